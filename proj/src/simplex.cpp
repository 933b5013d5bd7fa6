#include "acpo/simplex.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace acpo {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kFeasTol = 1e-9;

// Tableau rows 0..m-1 are constraints, column `cols` holds the right-hand side.
struct Tableau {
  Matrix t;
  std::vector<Index> basis;
  Index cols = 0;

  void pivot(Index row, Index col) {
    t.row(row) /= t(row, col);
    for (Index r = 0; r < t.rows(); ++r) {
      if (r == row) continue;
      const double f = t(r, col);
      if (f != 0.0) t.row(r) -= f * t.row(row);
    }
    basis[static_cast<std::size_t>(row)] = col;
  }

  // Maximizes the objective stored in the last row as reduced costs (row holds -c plus
  // basis corrections); `allowed` limits the entering columns.
  LpStatus optimize(Index allowed) {
    const Index m = t.rows() - 1;
    for (int guard = 0; guard < 100000; ++guard) {
      Index enter = -1;
      for (Index j = 0; j < allowed; ++j) {
        if (t(m, j) < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::optimal;
      Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index r = 0; r < m; ++r) {
        if (t(r, enter) > kPivotTol) {
          const double ratio = t(r, cols) / t(r, enter);
          if (ratio < best - 1e-14 ||
              (ratio <= best + 1e-14 && leave >= 0 && basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return LpStatus::unbounded;
      pivot(leave, enter);
    }
    throw std::runtime_error("solve_lp: iteration limit reached");
  }
};

}  // namespace

LpResult solve_lp(const Vector& c, const Matrix& a_eq, const Vector& b_eq, const Matrix& a_ub, const Vector& b_ub) {
  const Index n = c.size();
  const Index me = a_eq.rows();
  const Index mu = a_ub.rows();
  if ((me && a_eq.cols() != n) || (mu && a_ub.cols() != n) || b_eq.size() != me || b_ub.size() != mu)
    throw std::invalid_argument("solve_lp: dimension mismatch");

  // Standard form: [A_eq 0; A_ub I] [x; slack] = b, then one artificial per row.
  const Index m = me + mu;
  const Index structural = n + mu;
  const Index cols = structural + m;
  Tableau tab;
  tab.cols = cols;
  tab.t = Matrix::Zero(m + 1, cols + 1);
  tab.basis.resize(static_cast<std::size_t>(m));
  if (me) tab.t.block(0, 0, me, n) = a_eq;
  if (mu) {
    tab.t.block(me, 0, mu, n) = a_ub;
    tab.t.block(me, n, mu, mu).setIdentity();
  }
  tab.t.col(cols).head(m) << b_eq, b_ub;
  for (Index r = 0; r < m; ++r) {
    if (tab.t(r, cols) < 0.0) tab.t.row(r).head(structural) *= -1.0, tab.t(r, cols) *= -1.0;
    tab.t(r, structural + r) = 1.0;
    tab.basis[static_cast<std::size_t>(r)] = structural + r;
  }

  // Phase one: maximize -sum(artificials).
  tab.t.row(m).setZero();
  for (Index r = 0; r < m; ++r) tab.t.row(m) -= tab.t.row(r);
  for (Index r = 0; r < m; ++r) tab.t(m, structural + r) = 0.0;
  tab.optimize(cols);
  LpResult result;
  if (-tab.t(m, cols) > kFeasTol * std::max<double>(1.0, static_cast<double>(m))) {
    result.status = LpStatus::infeasible;
    return result;
  }

  // Drive zero-level artificials out of the basis; rows with no structural pivot are redundant.
  std::vector<Index> keep;
  for (Index r = 0; r < m; ++r) {
    if (tab.basis[static_cast<std::size_t>(r)] >= structural) {
      Index col = -1;
      for (Index j = 0; j < structural; ++j) {
        if (std::abs(tab.t(r, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col < 0) continue;
      tab.pivot(r, col);
    }
    keep.push_back(r);
  }
  Tableau phase2;
  phase2.cols = structural;
  phase2.t = Matrix::Zero(static_cast<Index>(keep.size()) + 1, structural + 1);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    phase2.t.row(static_cast<Index>(k)).head(structural) = tab.t.row(keep[k]).head(structural);
    phase2.t(static_cast<Index>(k), structural) = tab.t(keep[k], cols);
    phase2.basis.push_back(tab.basis[static_cast<std::size_t>(keep[k])]);
  }
  const Index m2 = static_cast<Index>(keep.size());
  phase2.t.row(m2).setZero();
  phase2.t.row(m2).head(n) = -c.transpose();
  for (Index r = 0; r < m2; ++r) {
    const Index b = phase2.basis[static_cast<std::size_t>(r)];
    const double coef = phase2.t(m2, b);
    if (coef != 0.0) phase2.t.row(m2) -= coef * phase2.t.row(r);
  }
  if (phase2.optimize(structural) == LpStatus::unbounded) {
    result.status = LpStatus::unbounded;
    return result;
  }
  Vector full = Vector::Zero(structural);
  for (Index r = 0; r < m2; ++r) full(phase2.basis[static_cast<std::size_t>(r)]) = phase2.t(r, structural);
  result.status = LpStatus::optimal;
  result.x = full.head(n).cwiseMax(0.0);
  result.objective = c.dot(result.x);
  return result;
}

}  // namespace acpo
