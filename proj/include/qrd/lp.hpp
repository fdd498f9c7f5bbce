#pragma once

#include <vector>

namespace qrd {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;   // structural variables at the optimum
  double objective = 0.0;  // c.x at the optimum
};

// Minimise c.x subject to a_ub x <= b_ub, a_eq x = b_eq, x >= 0.
// Dense two-phase simplex with Bland's rule (finite by construction),
// pivot tolerance 1e-10. Free variables are the caller's problem (split
// v = v+ - v-). Sized for the desk-scale geometry in this project: payoff
// dimension <= handful, rows <= a few dozen.
LpResult solve_lp(const std::vector<double>& c,
                  const std::vector<std::vector<double>>& a_ub,
                  const std::vector<double>& b_ub,
                  const std::vector<std::vector<double>>& a_eq = {},
                  const std::vector<double>& b_eq = {});

}  // namespace qrd
