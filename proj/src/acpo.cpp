#include "acpo/acpo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "acpo/baselines.hpp"

namespace acpo {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::acpo: return "acpo";
    case Algorithm::atrpo: return "atrpo";
    case Algorithm::atrpo_lagrangian: return "atrpo-lagrangian";
    case Algorithm::cpo_gamma: return "cpo-gamma";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "acpo") return Algorithm::acpo;
  if (name == "atrpo") return Algorithm::atrpo;
  if (name == "atrpo-lagrangian") return Algorithm::atrpo_lagrangian;
  if (name == "cpo-gamma") return Algorithm::cpo_gamma;
  throw std::invalid_argument("unknown algorithm: " + name);
}

std::string to_string(DualCase kind) {
  switch (kind) {
    case DualCase::interior: return "interior";
    case DualCase::constraint_active: return "constraint-active";
    case DualCase::infeasible_detected: return "infeasible-detected";
  }
  return "?";
}

std::string to_string(StepKind kind) {
  switch (kind) {
    case StepKind::dual_step: return "dual-step";
    case StepKind::recovery: return "recovery";
    case StepKind::no_update: return "no-update";
  }
  return "?";
}

// --- local problem ----------------------------------------------------------

TrustRegionProblem make_problem(Vector g, Matrix A, Vector c, LinearOperator<double> H, double delta, int cg_iters,
                                Matrix probe_states) {
  const Index d = g.size();
  if (A.cols() == 0) A.resize(d, 0);
  if (A.rows() != d || c.size() != A.cols() || H.dim != d)
    throw std::invalid_argument("make_problem: inconsistent dimensions");
  if (!(delta > 0.0)) throw std::invalid_argument("make_problem: delta must be positive");
  if (!g.allFinite() || !A.allFinite() || !c.allFinite())
    throw std::domain_error("make_problem: non-finite problem data");
  TrustRegionProblem p;
  p.g = std::move(g);
  p.A = std::move(A);
  p.c = std::move(c);
  p.H = std::move(H);
  p.delta = delta;
  p.cg_iters = cg_iters;
  p.probe_states = std::move(probe_states);
  const int m = p.num_constraints();
  p.constraint_index.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) p.constraint_index[static_cast<std::size_t>(i)] = i;
  p.hinv_g = conjugate_gradient(p.H, p.g, cg_iters).x;
  p.hinv_a.resize(d, m);
  for (int i = 0; i < m; ++i) p.hinv_a.col(i) = conjugate_gradient(p.H, Vector(p.A.col(i)), cg_iters).x;
  p.q = p.g.dot(p.hinv_g);
  p.r = p.A.transpose() * p.hinv_g;
  p.S = p.A.transpose() * p.hinv_a;
  p.S = 0.5 * (p.S + p.S.transpose()).eval();
  return p;
}

double symmetry_probe(const LinearOperator<double>& H, Rng& rng) {
  Vector u(H.dim), v(H.dim);
  for (Index i = 0; i < H.dim; ++i) {
    u(i) = standard_normal(rng);
    v(i) = standard_normal(rng);
  }
  const double uv = u.dot(H(v)), vu = v.dot(H(u));
  return std::abs(uv - vu) / (std::abs(uv) + std::abs(vu) + 1e-300);
}

TrustRegionProblem build_local_problem(const RolloutBatch& batch, const Policy& policy,
                                       const AdvantageEstimates& advantages, const Vector& constraint_values,
                                       const Vector& limits, const UpdateSettings& settings) {
  const int m_all = batch.num_costs();
  if (limits.size() != m_all || constraint_values.size() != m_all || advantages.costs.cols() != m_all)
    throw std::invalid_argument("build_local_problem: constraint count mismatch");
  std::vector<int> kept;
  for (int i = 0; i < m_all; ++i)
    if (std::isfinite(limits(i))) kept.push_back(i);
  const Index d = policy.num_params();
  Vector g = surrogate_gradient(policy, batch.states, batch.actions, advantages.reward);
  Matrix A(d, static_cast<Index>(kept.size()));
  Vector c(static_cast<Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const int i = kept[k];
    A.col(static_cast<Index>(k)) = surrogate_gradient(policy, batch.states, batch.actions, advantages.costs.col(i));
    c(static_cast<Index>(k)) = constraint_values(i) - limits(i);
  }
  LinearOperator<double> H = make_kl_hessian_operator(policy, batch.states, settings.damping);
  Rng probe_rng(batch.seed ^ 0x5bd1e995ULL);
  if (symmetry_probe(H, probe_rng) > 1e-8) throw std::domain_error("build_local_problem: KL Hessian not symmetric");
  TrustRegionProblem p =
      make_problem(std::move(g), std::move(A), std::move(c), std::move(H), settings.delta, settings.cg_iters,
                   batch.states);
  p.constraint_index = kept;
  return p;
}

// --- feasibility ------------------------------------------------------------

namespace {

template <typename Fn>
void for_each_subset(int m, Fn&& fn) {
  if (m > 16) throw std::invalid_argument("too many constraints for active-set enumeration");
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<Index> subset;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) subset.push_back(i);
    fn(subset);
  }
}

Matrix take(const Matrix& M, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(static_cast<Index>(i), static_cast<Index>(j)) = M(rows[i], cols[j]);
  return out;
}

Vector take(const Vector& v, const std::vector<Index>& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = v(idx[i]);
  return out;
}

double scale_of(const TrustRegionProblem& p) {
  if (p.num_constraints() == 0) return 1.0;
  return 1.0 + p.c.cwiseAbs().maxCoeff() + std::sqrt(std::max(0.0, p.S.diagonal().maxCoeff()));
}

}  // namespace

double minimum_constraint_energy(const TrustRegionProblem& problem) {
  const int m = problem.num_constraints();
  if (m == 0) return 0.0;
  if ((problem.S.diagonal().array() <= 0.0).any())
    throw std::domain_error("feasibility: a^T H^{-1} a is not positive");
  if (m == 1) {
    const double c = problem.c(0);
    return c > 0.0 ? c * c / (2.0 * problem.S(0, 0)) : 0.0;
  }
  const double tol = 1e-12 * scale_of(problem);
  double best = -1.0;
  for_each_subset(m, [&](const std::vector<Index>& B) {
    if (B.empty()) {
      if ((problem.c.array() <= tol).all()) best = std::max(best, 0.0);
      return;
    }
    std::vector<Index> all(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) all[static_cast<std::size_t>(i)] = i;
    const Matrix SB = take(problem.S, B, B);
    const Vector cB = take(problem.c, B);
    Eigen::LDLT<Matrix> ldlt(SB);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return;
    const Vector mu = ldlt.solve(cB);
    if (!mu.allFinite() || (mu.array() < -tol).any()) return;
    const Vector grad = problem.c - take(problem.S, all, B) * mu;
    for (int j = 0; j < m; ++j)
      if (std::find(B.begin(), B.end(), j) == B.end() && grad(j) > tol) return;
    best = std::max(best, 0.5 * cB.dot(mu));
  });
  if (best < 0.0) throw std::domain_error("feasibility: phase-one QP has no KKT point");
  return best;
}

Feasibility classify_feasibility(const TrustRegionProblem& problem) {
  const int m = problem.num_constraints();
  if (m == 0) return Feasibility::feasible;
  if (m == 1) {
    const double s = problem.S(0, 0);
    if (!(s > 0.0)) throw std::domain_error("classify_feasibility: a^T H^{-1} a is not positive");
    const double c = problem.c(0);
    return (c > 0.0 && c * c / s > 2.0 * problem.delta) ? Feasibility::infeasible : Feasibility::feasible;
  }
  return minimum_constraint_energy(problem) > problem.delta ? Feasibility::infeasible : Feasibility::feasible;
}

// --- dual -------------------------------------------------------------------

double dual_objective(const TrustRegionProblem& p, double lambda, const Vector& mu) {
  const double quad = p.q - 2.0 * p.r.dot(mu) + mu.dot(p.S * mu);
  return quad / (2.0 * lambda) + lambda * p.delta - mu.dot(p.c);
}

double transcribed_dual_objective(const TrustRegionProblem& p, double lambda, const Vector& mu) {
  const double quad = p.q - 2.0 * p.r.dot(mu) + mu.dot(p.S * mu);
  return quad / (2.0 * lambda) + 0.5 * lambda * p.delta - mu.dot(p.c);
}

namespace {

struct KktCandidate {
  bool valid = false;
  DualSolution dual;
  double primal = 0.0;
};

// Solves the KKT system with the constraints in B held active.
KktCandidate kkt_for_subset(const TrustRegionProblem& p, const std::vector<Index>& B) {
  const int m = p.num_constraints();
  const double tol = 1e-9 * scale_of(p);
  KktCandidate out;
  DualSolution& d = out.dual;
  d.mu = Vector::Zero(m);
  d.active.assign(static_cast<std::size_t>(m), false);
  Vector ax(m);  // A^T x
  if (B.empty()) {
    d.kind = DualCase::interior;
    if (p.q > 0.0) {
      d.lambda = std::sqrt(p.q / (2.0 * p.delta));
      ax = p.r / d.lambda;
      out.primal = p.q / d.lambda;
    } else {
      d.lambda = 0.0;
      ax.setZero();
      out.primal = 0.0;
    }
  } else {
    std::vector<Index> all(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) all[static_cast<std::size_t>(i)] = i;
    const Matrix SB = take(p.S, B, B);
    const Vector rB = take(p.r, B), cB = take(p.c, B);
    Eigen::LDLT<Matrix> ldlt(SB);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return out;
    const Vector sr = ldlt.solve(rB), sc = ldlt.solve(cB);
    const double num = p.q - rB.dot(sr);
    const double den = 2.0 * p.delta - cB.dot(sc);
    if (den < 0.0) return out;
    const Matrix SallB = take(p.S, all, B);
    Vector muB;
    if (num <= 1e-14 * std::max(p.q, 1e-300) || den == 0.0) {
      d.lambda = 0.0;
      muB = sr;
      ax = -SallB * sc;
      out.primal = -rB.dot(sc);
    } else {
      d.lambda = std::sqrt(num / den);
      muB = ldlt.solve(rB + d.lambda * cB);
      ax = (p.r - SallB * muB) / d.lambda;
      out.primal = (p.q - rB.dot(muB)) / d.lambda;
    }
    if ((muB.array() < -tol).any()) return out;
    for (std::size_t k = 0; k < B.size(); ++k) {
      d.mu(B[k]) = std::max(0.0, muB(static_cast<Index>(k)));
      d.active[static_cast<std::size_t>(B[k])] = true;
    }
    d.kind = DualCase::constraint_active;
  }
  for (int j = 0; j < m; ++j)
    if (!d.active[static_cast<std::size_t>(j)] && p.c(j) + ax(j) > tol) return out;
  d.objective = d.lambda > 0.0 ? dual_objective(p, d.lambda, d.mu) : out.primal;
  out.valid = true;
  return out;
}

// Projected gradient ascent on mu with lambda eliminated:
//   max_{mu >= 0} -sqrt(2 delta (q - 2 r^T mu + mu^T S mu)) + mu^T c.
Vector dual_ascent(const TrustRegionProblem& p) {
  const int m = p.num_constraints();
  Vector mu = Vector::Zero(m);
  const double root = std::sqrt(2.0 * p.delta);
  for (int k = 1; k <= 10000; ++k) {
    const double quad = std::max(p.q - 2.0 * p.r.dot(mu) + mu.dot(p.S * mu), 1e-300);
    const Vector grad = -root * (p.S * mu - p.r) / std::sqrt(quad) + p.c;
    const Vector next = (mu + (0.1 / std::sqrt(static_cast<double>(k))) * grad).cwiseMax(0.0);
    if (!next.allFinite()) throw std::domain_error("solve_dual: dual ascent diverged");
    const double moved = (next - mu).norm();
    mu = next;
    if (moved < 1e-8) break;
  }
  return mu;
}

}  // namespace

DualSolution solve_dual(const TrustRegionProblem& problem) {
  const int m = problem.num_constraints();
  if (classify_feasibility(problem) == Feasibility::infeasible) {
    DualSolution d;
    d.kind = DualCase::infeasible_detected;
    d.mu = Vector::Zero(m);
    d.active.assign(static_cast<std::size_t>(m), false);
    d.objective = std::numeric_limits<double>::quiet_NaN();
    return d;
  }
  if (m <= 1) {
    KktCandidate inactive = kkt_for_subset(problem, {});
    if (inactive.valid) return inactive.dual;
    KktCandidate active = kkt_for_subset(problem, {0});
    if (!active.valid) throw std::domain_error("solve_dual: no KKT point for the single-constraint problem");
    return active.dual;
  }
  const Vector mu = dual_ascent(problem);
  std::vector<Index> B;
  for (int i = 0; i < m; ++i)
    if (mu(i) > 1e-8) B.push_back(i);
  KktCandidate polished = kkt_for_subset(problem, B);
  if (polished.valid) return polished.dual;
  KktCandidate best;
  for_each_subset(m, [&](const std::vector<Index>& subset) {
    KktCandidate cand = kkt_for_subset(problem, subset);
    if (cand.valid && (!best.valid || cand.dual.objective < best.dual.objective)) best = cand;
  });
  if (!best.valid) throw std::domain_error("solve_dual: no KKT point found");
  return best.dual;
}

Vector primal_step(const TrustRegionProblem& problem, const DualSolution& dual) {
  if (dual.kind == DualCase::infeasible_detected) throw std::invalid_argument("primal_step: problem is infeasible");
  const int m = problem.num_constraints();
  Vector step;
  if (dual.lambda > 0.0) {
    const Vector rhs = m ? Vector(problem.g - problem.A * dual.mu) : problem.g;
    step = conjugate_gradient(problem.H, rhs, problem.cg_iters).x / dual.lambda;
  } else {
    std::vector<Index> B;
    for (int i = 0; i < m; ++i)
      if (dual.active[static_cast<std::size_t>(i)]) B.push_back(i);
    step = Vector::Zero(problem.dim());
    if (!B.empty()) {
      const Vector coef = take(problem.S, B, B).ldlt().solve(take(problem.c, B));
      for (std::size_t k = 0; k < B.size(); ++k) step -= coef(static_cast<Index>(k)) * problem.hinv_a.col(B[k]);
    }
  }
  const double energy = 0.5 * step.dot(problem.H(step));
  if (energy > problem.delta * (1.0 + 1e-3)) step *= std::sqrt(problem.delta / energy);
  return step;
}

Vector recovery_step(const TrustRegionProblem& problem, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("recovery_step: t outside [0, 1]");
  const int m = problem.num_constraints();
  if (m == 0) throw std::invalid_argument("recovery_step: no constraint to recover");
  Index worst = 0;
  double worst_score = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < m; ++i) {
    const double score = problem.c(i) / std::sqrt(std::max(problem.S(i, i), 1e-300));
    if (score > worst_score) {
      worst_score = score;
      worst = i;
    }
  }
  const double s = problem.S(worst, worst);
  const double tiny = 1e-300;
  double weight_a = t, weight_g = 1.0 - t;
  if (!(s > tiny)) weight_a = 0.0, weight_g = 1.0;
  if (!(problem.q > tiny)) weight_g = 0.0, weight_a = s > tiny ? 1.0 : 0.0;
  Vector dir = Vector::Zero(problem.dim());
  if (weight_a > 0.0) dir += weight_a * problem.hinv_a.col(worst) / std::sqrt(s);
  if (weight_g > 0.0) dir += weight_g * problem.hinv_g / std::sqrt(problem.q);
  return -std::sqrt(2.0 * problem.delta) * dir;
}

// --- line search ------------------------------------------------------------

LineSearchResult line_search(const Vector& params, const Vector& step, const TrustRegionProblem& problem,
                             const KlMeasure& kl, double coeff, int max_backtracks, double slack) {
  if (!(coeff > 0.0 && coeff < 1.0) || max_backtracks < 0)
    throw std::invalid_argument("line_search: bad backtracking schedule");
  LineSearchResult out;
  out.params = params;
  const Vector a_dx = problem.A.transpose() * step;
  double scale = 1.0;
  for (int j = 0; j <= max_backtracks; ++j, scale *= coeff) {
    const Vector candidate = params + scale * step;
    const double measured = kl(candidate);
    const Vector lin = problem.c + scale * a_dx;
    bool ok = std::isfinite(measured) && measured <= problem.delta;
    for (Index i = 0; ok && i < lin.size(); ++i)
      ok = lin(i) <= slack || (problem.c(i) > slack && a_dx(i) < 0.0);
    if (ok) {
      out.params = candidate;
      out.accepted = true;
      out.exponent = j;
      out.kl = measured;
      out.linearized = lin;
      return out;
    }
  }
  out.linearized = problem.c;
  return out;
}

// --- agent ------------------------------------------------------------------

AgentState::AgentState(const AgentState& other)
    : policy(other.policy ? other.policy->clone() : nullptr),
      reward_critic(other.reward_critic),
      cost_critics(other.cost_critics),
      state(other.state) {}

AgentState& AgentState::operator=(const AgentState& other) {
  if (this != &other) {
    AgentState copy(other);
    *this = std::move(copy);
  }
  return *this;
}

AgentState make_agent(const Environment& env, std::unique_ptr<Policy> policy, CriticFlavor critic, Rng& rng,
                      const std::vector<int>& critic_hidden) {
  AgentState agent;
  agent.policy = std::move(policy);
  auto make = [&]() {
    switch (critic) {
      case CriticFlavor::tabular:
        if (!env.model()) throw std::invalid_argument("make_agent: tabular critic needs a tabular environment");
        return Critic::tabular(env.model()->num_states);
      case CriticFlavor::linear: return Critic::linear(env.state_dim());
      case CriticFlavor::mlp: return Critic::mlp(env.state_dim(), critic_hidden, rng);
    }
    throw std::invalid_argument("make_agent: unknown critic flavor");
  };
  agent.reward_critic = make();
  for (int i = 0; i < env.num_costs(); ++i) agent.cost_critics.push_back(make());
  agent.state = env.initial_state(rng);
  return agent;
}

// --- iteration --------------------------------------------------------------

namespace {

TrustRegionProblem without_constraints(const TrustRegionProblem& p) {
  TrustRegionProblem u = p;
  u.A.resize(p.dim(), 0);
  u.c.resize(0);
  u.hinv_a.resize(p.dim(), 0);
  u.r.resize(0);
  u.S.resize(0, 0);
  u.constraint_index.clear();
  return u;
}

Vector standardized(const Vector& v) {
  if (v.size() < 2) return v;
  const double mean = v.mean();
  const double sd = std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
  return sd > 0.0 ? Vector((v.array() - mean) / sd) : Vector(v.array() - mean);
}

}  // namespace

IterationReport policy_update(const Environment& env, AgentState& agent, const UpdateSettings& settings,
                              std::uint64_t seed, int iteration) {
  IterationReport report;
  report.iteration = iteration;
  try {
    AgentState next = agent;
    Policy& policy = *next.policy;
    const std::unique_ptr<Policy> old_policy = policy.clone();
    const RolloutBatch batch = collect_batch(env, policy, agent.state, settings.batch_size, derive_seed(seed, 1));
    const GainEstimates gains = estimate_gains(batch);
    report.gain_before = gains.reward;
    report.cost_gain_before = gains.costs;

    const bool discounted = settings.algorithm == Algorithm::cpo_gamma;
    AdvantageEstimates adv =
        discounted ? discounted_advantages(batch, agent.reward_critic, agent.cost_critics, settings.gamma,
                                           settings.lambda_reward, settings.lambda_cost)
                   : average_gae(batch, agent.reward_critic, agent.cost_critics, gains, settings.lambda_reward,
                                 settings.lambda_cost);
    const Vector constraint_values = discounted ? discounted_constraint_values(batch, settings.gamma) : gains.costs;
    AdvantageEstimates adv_for_gradient = adv;
    if (settings.normalize_advantages) adv_for_gradient.reward = standardized(adv.reward);

    const TrustRegionProblem problem =
        build_local_problem(batch, policy, adv_for_gradient, constraint_values, env.limits(), settings);

    Vector step;
    const TrustRegionProblem* enforced = &problem;
    TrustRegionProblem unconstrained;
    switch (settings.algorithm) {
      case Algorithm::acpo:
      case Algorithm::cpo_gamma: {
        if (classify_feasibility(problem) == Feasibility::feasible) {
          const DualSolution dual = solve_dual(problem);
          report.kind = StepKind::dual_step;
          report.dual_case = to_string(dual.kind);
          report.lambda = dual.lambda;
          report.mu = dual.mu;
          if (dual.lambda > 0.0) report.transcribed_dual = transcribed_dual_objective(problem, dual.lambda, dual.mu);
          step = primal_step(problem, dual);
        } else {
          report.kind = StepKind::recovery;
          report.dual_case = to_string(DualCase::infeasible_detected);
          step = recovery_step(problem, settings.recovery_t);
        }
        break;
      }
      case Algorithm::atrpo: {
        unconstrained = without_constraints(problem);
        enforced = &unconstrained;
        const DualSolution dual = solve_dual(unconstrained);
        report.kind = StepKind::dual_step;
        report.dual_case = to_string(dual.kind);
        report.lambda = dual.lambda;
        step = primal_step(unconstrained, dual);
        break;
      }
      case Algorithm::atrpo_lagrangian: {
        unconstrained = without_constraints(problem);
        enforced = &unconstrained;
        report.kind = StepKind::dual_step;
        report.dual_case = "lagrangian";
        step = lagrangian_step(problem, settings.lagrange_ell);
        break;
      }
    }
    report.proposal_energy = 0.5 * step.dot(problem.H(step));

    const Matrix& states = batch.states;
    const KlMeasure measure = [&](const Vector& params) {
      std::unique_ptr<Policy> candidate = old_policy->clone();
      candidate->set_params(params);
      return mean_kl(*candidate, *old_policy, states);
    };
    const LineSearchResult ls = line_search(policy.params(), step, *enforced, measure, settings.backtrack_coeff,
                                            settings.backtrack_max, settings.line_search_slack);
    if (ls.accepted) {
      policy.set_params(ls.params);
      report.backtracks = ls.exponent;
      report.kl = ls.kl;
      const double scale = std::pow(settings.backtrack_coeff, ls.exponent);
      report.surrogate_change = scale * problem.g.dot(step);
      report.linearized = problem.c + scale * (problem.A.transpose() * step);
      if (settings.fresh_kl_states > 1) {
        const RolloutBatch fresh =
            collect_batch(env, *old_policy, batch.final_state(), settings.fresh_kl_states, derive_seed(seed, 2));
        report.fresh_kl = mean_kl(policy, *old_policy, fresh.states);
      }
    } else {
      report.kind = StepKind::no_update;
      report.linearized = problem.c;
    }

    Rng fit_rng(derive_seed(seed, 3));
    fit_critic(next.reward_critic, batch, adv.reward_targets, settings.critic_lr, settings.critic_epochs, fit_rng);
    for (std::size_t i = 0; i < next.cost_critics.size(); ++i)
      fit_critic(next.cost_critics[i], batch, adv.cost_targets.col(static_cast<Index>(i)), settings.cost_critic_lr,
                 settings.critic_epochs, fit_rng);
    next.state = batch.final_state();
    agent = std::move(next);
  } catch (const std::exception& e) {
    report.kind = StepKind::no_update;
    report.error = e.what();
  }
  return report;
}

IterationReport acpo_iteration(const Environment& env, AgentState& agent, const UpdateSettings& settings,
                               std::uint64_t seed, int iteration) {
  UpdateSettings s = settings;
  s.algorithm = Algorithm::acpo;
  return policy_update(env, agent, s, seed, iteration);
}

}  // namespace acpo
