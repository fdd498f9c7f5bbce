#include "qrd/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qrd {

namespace {

constexpr double kPivotTol = 1e-10;

struct Tableau {
  std::size_t rows = 0, cols = 0;      // cols excludes the rhs column
  std::vector<std::vector<double>> a;  // rows x (cols + 1), last entry = rhs
  std::vector<double> red;             // reduced costs, size cols + 1 (last = -objective)
  std::vector<std::size_t> basis;      // basic column per row

  void pivot(std::size_t r, std::size_t c) {
    double piv = a[r][c];
    for (double& x : a[r]) x /= piv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || a[i][c] == 0.0) continue;
      double f = a[i][c];
      for (std::size_t j = 0; j <= cols; ++j) a[i][j] -= f * a[r][j];
      a[i][c] = 0.0;
    }
    if (red[c] != 0.0) {
      double f = red[c];
      for (std::size_t j = 0; j <= cols; ++j) red[j] -= f * a[r][j];
      red[c] = 0.0;
    }
    basis[r] = c;
  }

  // Bland: smallest entering index with negative reduced cost; among the
  // min-ratio rows the one whose basic variable has the smallest index.
  LpStatus run(std::size_t usable_cols) {
    for (;;) {
      std::size_t enter = usable_cols;
      for (std::size_t j = 0; j < usable_cols; ++j)
        if (red[j] < -kPivotTol) {
          enter = j;
          break;
        }
      if (enter == usable_cols) return LpStatus::optimal;
      std::size_t leave = rows;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows; ++i) {
        if (a[i][enter] <= kPivotTol) continue;
        double ratio = a[i][cols] / a[i][enter];
        if (ratio < best - kPivotTol) {
          best = ratio;
          leave = i;
        } else if (ratio < best + kPivotTol && leave < rows && basis[i] < basis[leave]) {
          leave = i;
        }
      }
      if (leave == rows) return LpStatus::unbounded;
      pivot(leave, enter);
    }
  }
};

}  // namespace

LpResult solve_lp(const std::vector<double>& c, const std::vector<std::vector<double>>& a_ub,
                  const std::vector<double>& b_ub, const std::vector<std::vector<double>>& a_eq,
                  const std::vector<double>& b_eq) {
  std::size_t n = c.size();
  if (a_ub.size() != b_ub.size() || a_eq.size() != b_eq.size())
    throw std::invalid_argument("solve_lp: row/rhs count mismatch");
  for (const auto& row : a_ub)
    if (row.size() != n) throw std::invalid_argument("solve_lp: a_ub column count mismatch");
  for (const auto& row : a_eq)
    if (row.size() != n) throw std::invalid_argument("solve_lp: a_eq column count mismatch");

  std::size_t m_ub = a_ub.size(), m = m_ub + a_eq.size();
  Tableau t;
  t.rows = m;
  std::size_t art0 = n + m_ub;  // artificials appended after slacks as needed
  t.cols = art0;
  t.a.assign(m, std::vector<double>(art0 + 1, 0.0));
  t.basis.assign(m, 0);
  std::vector<std::size_t> art_rows;
  for (std::size_t r = 0; r < m; ++r) {
    bool ub = r < m_ub;
    const auto& src = ub ? a_ub[r] : a_eq[r - m_ub];
    double rhs = ub ? b_ub[r] : b_eq[r - m_ub];
    double sign = rhs < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t.a[r][j] = sign * src[j];
    t.a[r][art0] = sign * rhs;
    if (ub) t.a[r][n + r] = sign;  // slack
    if (ub && sign > 0.0) {
      t.basis[r] = n + r;  // clean slack basis
    } else {
      art_rows.push_back(r);  // negated slack or equality: artificial
    }
  }
  for (std::size_t k = 0; k < art_rows.size(); ++k) {
    for (auto& row : t.a) row.insert(row.end() - 1, 0.0);
    t.a[art_rows[k]][t.cols] = 1.0;
    t.basis[art_rows[k]] = t.cols;
    ++t.cols;
  }

  LpResult res;
  // Phase 1: minimise the artificial sum; reduced costs 1{artificial} minus
  // the artificial-basic rows priced out.
  t.red.assign(t.cols + 1, 0.0);
  for (std::size_t j = art0; j < t.cols; ++j) t.red[j] = 1.0;
  for (std::size_t r : art_rows)
    for (std::size_t j = 0; j <= t.cols; ++j) t.red[j] -= t.a[r][j];
  if (!art_rows.empty()) {
    if (t.run(t.cols) != LpStatus::optimal || -t.red[t.cols] > 1e-8) {
      res.status = LpStatus::infeasible;
      return res;
    }
    // Pivot leftover zero-level artificials out; an all-zero row is redundant.
    for (std::size_t r = 0; r < t.rows;) {
      if (t.basis[r] < art0) {
        ++r;
        continue;
      }
      std::size_t j = 0;
      while (j < art0 && std::fabs(t.a[r][j]) <= kPivotTol) ++j;
      if (j < art0) {
        t.pivot(r, j);
        ++r;
      } else {
        t.a.erase(t.a.begin() + static_cast<std::ptrdiff_t>(r));
        t.basis.erase(t.basis.begin() + static_cast<std::ptrdiff_t>(r));
        --t.rows;
      }
    }
  }

  // Phase 2 over the real objective, artificial columns barred from entering.
  t.red.assign(t.cols + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) t.red[j] = c[j];
  for (std::size_t r = 0; r < t.rows; ++r) {
    if (t.basis[r] >= n) continue;  // slack/artificial cost 0
    double f = c[t.basis[r]];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j <= t.cols; ++j) t.red[j] -= f * t.a[r][j];
  }
  res.status = t.run(art0);
  if (res.status != LpStatus::optimal) return res;
  res.x.assign(n, 0.0);
  for (std::size_t r = 0; r < t.rows; ++r)
    if (t.basis[r] < n) res.x[t.basis[r]] = t.a[r][t.cols];
  res.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
  return res;
}

}  // namespace qrd
