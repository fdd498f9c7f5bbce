#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qrd {

// Execution mode for the data-parallel kernels (meta-game fill, basin seeds,
// cross-validation trials, estimator sample batches). Every kernel writes to
// index-addressed slots with per-task derived seeds, so both modes produce
// byte-identical results; `serial` is the reference implementation the tests
// compare against and the benchmark baselines.
enum class Parallel { serial, omp };

// Thrown when an enumeration would exceed a configured cap (pure strategies,
// history windows, ...). `required` is the count the request would need.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(const std::string& what, double required, double cap)
      : std::runtime_error(what + " (required " + std::to_string(required) +
                           ", cap " + std::to_string(cap) + ")"),
        required(required),
        cap(cap) {}
  double required;
  double cap;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based seed derivation: task #k under a master seed gets
//   splitmix64(master ^ splitmix64(k + 1)).
// Every parallel loop draws its per-task seed this way, so results do not
// depend on scheduling or thread count. No ambient entropy anywhere.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t task) {
  return splitmix64(master ^ splitmix64(task + 1));
}

// mt19937_64 with hand-rolled draw helpers. The engine's output sequence is
// fixed by the standard; std::uniform_real_distribution & friends are not,
// so we avoid them to keep runs byte-reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1), 53 random bits
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  int uniform_int(int n) {
    return static_cast<int>(uniform() * static_cast<double>(n)) % n;
  }

  // index ~ weights (assumed to sum to 1 within validation tolerance);
  // falls back to the last positive weight if fp residue is hit
  int categorical(const std::vector<double>& w) {
    double u = uniform();
    double acc = 0.0;
    int last_pos = -1;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] <= 0.0) continue;
      last_pos = static_cast<int>(i);
      acc += w[i];
      if (u < acc) return static_cast<int>(i);
    }
    if (last_pos < 0) throw std::invalid_argument("categorical: no positive weight");
    return last_pos;
  }

  // standard normal via Box-Muller (deterministic given the engine state)
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925 * u2);
  }

  // uniform point on the n-simplex (Dirichlet(1,..,1) via exponentials)
  std::vector<double> simplex(int n) {
    std::vector<double> x(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      double u = uniform();
      if (u <= 0.0) u = 0x1.0p-53;
      x[i] = -std::log(u);
      s += x[i];
    }
    for (int i = 0; i < n; ++i) x[i] /= s;
    return x;
  }

 private:
  std::mt19937_64 eng_;
};

// Mixed-radix index over digit ranges, first digit most significant
// ("row-major", player 0 outermost for action/signal profiles).
class MixedRadix {
 public:
  MixedRadix() = default;
  explicit MixedRadix(std::vector<int> radix) : radix_(std::move(radix)) {
    stride_.assign(radix_.size(), 1);
    count_ = 1;
    for (int i = static_cast<int>(radix_.size()) - 1; i >= 0; --i) {
      if (radix_[i] <= 0) throw std::invalid_argument("MixedRadix: nonpositive radix");
      stride_[i] = count_;
      count_ *= static_cast<std::size_t>(radix_[i]);
    }
  }

  std::size_t count() const { return count_; }
  int digits() const { return static_cast<int>(radix_.size()); }
  int radix(int i) const { return radix_[i]; }

  std::size_t index(const std::vector<int>& digit) const {
    std::size_t id = 0;
    for (std::size_t i = 0; i < radix_.size(); ++i) id += stride_[i] * digit[i];
    return id;
  }

  int digit(std::size_t index, int i) const {
    return static_cast<int>((index / stride_[i]) % radix_[i]);
  }

  std::vector<int> decode(std::size_t index) const {
    std::vector<int> d(radix_.size());
    for (std::size_t i = 0; i < radix_.size(); ++i) d[i] = digit(index, i);
    return d;
  }

 private:
  std::vector<int> radix_;
  std::vector<std::size_t> stride_;
  std::size_t count_ = 1;
};

// x^q with the convention 0^0 := 1 (so q = 0 always weighs uniformly)
inline double pow_q(double x, double q) {
  if (q == 0.0) return 1.0;
  return std::pow(x, q);
}

// shortest round-trip decimal, locale-independent; used by every CSV writer
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace qrd
