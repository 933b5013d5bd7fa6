#pragma once

#include "acpo/types.hpp"

namespace acpo {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Vector x;
  double objective = 0.0;
};

/// Dense two-phase tableau simplex with Bland's rule:
///   maximize c^T x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0.
/// Either constraint block may have zero rows. Redundant equality rows are tolerated.
LpResult solve_lp(const Vector& c, const Matrix& a_eq, const Vector& b_eq, const Matrix& a_ub, const Vector& b_ub);

}  // namespace acpo
