#include "acpo/cmdp.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "acpo/exact.hpp"

namespace acpo {

namespace {

constexpr double kStochasticTol = 1e-12;
constexpr int kMaxResamples = 100;

std::vector<Matrix> zero_tensor(int num_states, int num_actions) {
  return std::vector<Matrix>(static_cast<std::size_t>(num_actions), Matrix::Zero(num_states, num_states));
}

Vector resolve_limits(const EnvSpec& spec) {
  const auto m = static_cast<std::size_t>(spec.num_costs);
  Vector limits(spec.num_costs);
  if (spec.limits.size() == m) {
    for (std::size_t i = 0; i < m; ++i) limits(static_cast<Index>(i)) = spec.limits[i];
  } else if (spec.limits.size() == 1) {
    limits.setConstant(spec.limits.front());
  } else if (spec.limits.empty()) {
    limits.setConstant(std::numeric_limits<double>::infinity());
  } else {
    throw std::invalid_argument("EnvSpec: limits must have one entry per cost");
  }
  return limits;
}

TabularCmdp empty_model(const EnvSpec& spec) {
  TabularCmdp m;
  m.num_states = spec.num_states;
  m.num_actions = spec.num_actions;
  m.transition = zero_tensor(spec.num_states, spec.num_actions);
  m.reward = zero_tensor(spec.num_states, spec.num_actions);
  m.costs.assign(static_cast<std::size_t>(spec.num_costs), zero_tensor(spec.num_states, spec.num_actions));
  m.limits = resolve_limits(spec);
  m.initial_dist = Vector::Constant(spec.num_states, 1.0 / spec.num_states);
  return m;
}

TabularCmdp draw_garnet(const EnvSpec& spec, Rng& rng) {
  TabularCmdp m = empty_model(spec);
  const int n = spec.num_states;
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < spec.num_actions; ++a) {
      std::iota(pool.begin(), pool.end(), 0);
      // partial Fisher-Yates: the first `branching` entries are the successors
      for (int k = 0; k < spec.branching; ++k) {
        const auto j = k + static_cast<int>(rng() % static_cast<std::uint64_t>(n - k));
        std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(j)]);
      }
      const Vector mass = sample_flat_dirichlet(spec.branching, rng);
      for (int k = 0; k < spec.branching; ++k) m.transition[a](s, pool[static_cast<std::size_t>(k)]) = mass(k);
      for (int sp = 0; sp < n; ++sp) {
        m.reward[a](s, sp) = uniform01(rng);
        for (auto& cost : m.costs) cost[a](s, sp) = uniform01(rng);
      }
    }
  }
  return m;
}

TabularCmdp draw_birth_death(const EnvSpec& spec, Rng& rng) {
  TabularCmdp m = empty_model(spec);
  const int n = spec.num_states;
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < spec.num_actions; ++a) {
      const Vector w = sample_flat_dirichlet(3, rng);  // (down, stay, up)
      double down = w(0), stay = w(1), up = w(2);
      if (s == 0) stay += std::exchange(down, 0.0);
      if (s == n - 1) stay += std::exchange(up, 0.0);
      m.transition[a](s, s) = stay;
      if (s > 0) m.transition[a](s, s - 1) = down;
      if (s < n - 1) m.transition[a](s, s + 1) = up;
      for (int sp = 0; sp < n; ++sp) {
        m.reward[a](s, sp) = uniform01(rng);
        for (auto& cost : m.costs) cost[a](s, sp) = uniform01(rng);
      }
    }
  }
  return m;
}

TabularCmdp build_chain(const EnvSpec& spec) {
  if (spec.num_costs != 1) throw std::invalid_argument("chain: exactly one cost");
  TabularCmdp m = empty_model(spec);
  const int n = spec.num_states;
  const int k = spec.num_actions;
  for (int a = 0; a < k; ++a) {
    const double effort = static_cast<double>(a) / (k - 1);
    const double up_p = 0.1 + 0.6 * effort;
    const double down_p = 0.6 - 0.4 * effort;
    for (int s = 0; s < n; ++s) {
      double up = up_p, down = down_p;
      double stay = 1.0 - up - down;
      if (s == 0) stay += std::exchange(down, 0.0);
      if (s == n - 1) stay += std::exchange(up, 0.0);
      m.transition[a](s, s) = stay;
      if (s > 0) m.transition[a](s, s - 1) = down;
      if (s < n - 1) m.transition[a](s, s + 1) = up;
      m.reward[a].row(s).setConstant(static_cast<double>(s) / (n - 1));
      m.costs[0][a].row(s).setConstant(effort);
    }
  }
  m.initial_dist.setZero();
  m.initial_dist(0) = 1.0;
  return m;
}

TabularCmdp build_gridworld(const EnvSpec& spec) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(spec.num_states))));
  if (side * side != spec.num_states) throw std::invalid_argument("gridworld: num_states must be a square");
  if (spec.num_actions != 4 && spec.num_actions != 5) throw std::invalid_argument("gridworld: 4 or 5 actions");
  if (spec.num_costs != 1) throw std::invalid_argument("gridworld: exactly one cost");
  TabularCmdp m = empty_model(spec);
  const int n = spec.num_states;
  const int k = spec.num_actions;
  constexpr double slip = 0.1;
  const int drow[5] = {-1, 1, 0, 0, 0};
  const int dcol[5] = {0, 0, -1, 1, 0};
  auto move = [&](int s, int a) {
    const int r = s / side + drow[a], c = s % side + dcol[a];
    if (r < 0 || r >= side || c < 0 || c >= side) return s;
    return r * side + c;
  };
  auto hazard = [&](int s) { return s / side == s % side && s != 0 && s != n - 1; };
  const int goal = n - 1;
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < k; ++a) {
      if (s == goal) {
        m.transition[a](s, 0) = 1.0;
        m.reward[a](s, 0) = 1.0;
        continue;
      }
      m.transition[a](s, move(s, a)) += 1.0 - slip;
      for (int b = 0; b < k; ++b) m.transition[a](s, move(s, b)) += slip / k;
      for (int sp = 0; sp < n; ++sp)
        if (hazard(sp)) m.costs[0][a](s, sp) = 1.0;
    }
  }
  m.initial_dist.setZero();
  m.initial_dist(0) = 1.0;
  return m;
}

void check_chain_binds(const TabularCmdp& m) {
  const Vector unconstrained = Vector::Constant(m.num_costs(), std::numeric_limits<double>::infinity());
  const OracleSolution free_opt = solve_constrained_optimal(m, unconstrained);
  const double cost = (m.expected_cost(0).array() * free_opt.occupation.array()).sum();
  if (!(cost > m.limits(0)))
    throw std::invalid_argument("chain: the unconstrained optimum satisfies the limit, constraint would not bind");
}

}  // namespace

std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::garnet: return "garnet";
    case EnvKind::chain: return "chain";
    case EnvKind::gridworld: return "gridworld";
    case EnvKind::birth_death: return "birth-death";
    case EnvKind::point_circle: return "point-circle";
  }
  return "unknown";
}

EnvKind parse_env_kind(const std::string& name) {
  if (name == "garnet") return EnvKind::garnet;
  if (name == "chain") return EnvKind::chain;
  if (name == "gridworld") return EnvKind::gridworld;
  if (name == "birth-death") return EnvKind::birth_death;
  if (name == "point-circle") return EnvKind::point_circle;
  throw std::invalid_argument("unknown environment kind: " + name);
}

bool is_primitive(const Matrix& P) {
  const Index n = P.rows();
  using Bool = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
  Bool reach = (P.array() > 0.0).cast<int>().matrix();
  // Wielandt: a primitive n x n matrix has A^k > 0 for k = (n-1)^2 + 1.
  const Index needed = (n - 1) * (n - 1) + 1;
  Bool power = reach;
  Index exponent = 1;
  while (exponent < needed) {
    power = ((power * power).array() > 0).cast<int>().matrix();
    exponent *= 2;
  }
  // A^k > 0 for some k >= needed implies it for all larger k; squaring overshoots safely.
  return (power.array() > 0).all();
}

void TabularCmdp::validate() const {
  if (num_states < 1 || num_actions < 1) throw std::invalid_argument("TabularCmdp: empty state or action set");
  const auto na = static_cast<std::size_t>(num_actions);
  if (transition.size() != na || reward.size() != na)
    throw std::invalid_argument("TabularCmdp: tensor action dimension mismatch");
  for (std::size_t a = 0; a < na; ++a) {
    const Matrix& P = transition[a];
    if (P.rows() != num_states || P.cols() != num_states) throw std::invalid_argument("TabularCmdp: bad P shape");
    if ((P.array() < 0.0).any()) throw std::invalid_argument("TabularCmdp: negative transition probability");
    if (((P.rowwise().sum().array() - 1.0).abs() > kStochasticTol).any())
      throw std::invalid_argument("TabularCmdp: transition rows must sum to 1");
  }
  for (const auto& cost : costs) {
    if (cost.size() != na) throw std::invalid_argument("TabularCmdp: cost tensor action dimension mismatch");
    for (const auto& c : cost)
      if ((c.array() < 0.0).any()) throw std::invalid_argument("TabularCmdp: costs must be nonnegative");
  }
  if (limits.size() != num_costs()) throw std::invalid_argument("TabularCmdp: one limit per cost");
  if (initial_dist.size() != num_states || (initial_dist.array() < 0.0).any() ||
      std::abs(initial_dist.sum() - 1.0) > kStochasticTol)
    throw std::invalid_argument("TabularCmdp: initial distribution must sum to 1");
  if (!is_primitive(induced_transition(uniform_policy())))
    throw std::invalid_argument("TabularCmdp: uniform-policy chain is not irreducible and aperiodic");
}

Matrix TabularCmdp::expected(const std::vector<Matrix>& signal) const {
  Matrix out(num_states, num_actions);
  for (int a = 0; a < num_actions; ++a)
    out.col(a) = transition[static_cast<std::size_t>(a)].cwiseProduct(signal[static_cast<std::size_t>(a)]).rowwise().sum();
  return out;
}

Matrix TabularCmdp::induced_transition(const Matrix& policy) const {
  Matrix P = Matrix::Zero(num_states, num_states);
  for (int a = 0; a < num_actions; ++a) P += policy.col(a).asDiagonal() * transition[static_cast<std::size_t>(a)];
  return P;
}

Matrix TabularCmdp::uniform_policy() const {
  return Matrix::Constant(num_states, num_actions, 1.0 / num_actions);
}

TabularCmdp construct_cmdp(const EnvSpec& spec) {
  if (!spec.is_tabular()) throw std::invalid_argument("construct_cmdp: spec kind is not tabular");
  if (spec.num_states < 2 || spec.num_actions < 2)
    throw std::invalid_argument("construct_cmdp: need at least 2 states and 2 actions");
  if (spec.num_costs < 0) throw std::invalid_argument("construct_cmdp: negative cost count");

  switch (spec.kind) {
    case EnvKind::garnet:
    case EnvKind::birth_death: {
      if (spec.kind == EnvKind::garnet && (spec.branching < 1 || spec.branching > spec.num_states))
        throw std::invalid_argument("garnet: branching must lie in [1, num_states]");
      for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
        Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(attempt)));
        TabularCmdp m = spec.kind == EnvKind::garnet ? draw_garnet(spec, rng) : draw_birth_death(spec, rng);
        if (is_primitive(m.induced_transition(m.uniform_policy()))) {
          m.validate();
          return m;
        }
      }
      throw std::invalid_argument("construct_cmdp: no ergodic draw within 100 resamples");
    }
    case EnvKind::chain: {
      TabularCmdp m = build_chain(spec);
      m.validate();
      if (std::isfinite(m.limits(0))) check_chain_binds(m);
      return m;
    }
    case EnvKind::gridworld: {
      TabularCmdp m = build_gridworld(spec);
      m.validate();
      return m;
    }
    case EnvKind::point_circle: break;
  }
  throw std::invalid_argument("construct_cmdp: unsupported kind");
}

TabularStep step(const TabularCmdp& cmdp, int state, int action, Rng& rng) {
  if (action < 0 || action >= cmdp.num_actions) throw std::out_of_range("step: action index out of range");
  if (state < 0 || state >= cmdp.num_states) throw std::out_of_range("step: state index out of range");
  const auto a = static_cast<std::size_t>(action);
  TabularStep out;
  out.next_state = static_cast<int>(sample_categorical(cmdp.transition[a].row(state), rng));
  out.reward = cmdp.reward[a](state, out.next_state);
  out.costs.resize(cmdp.num_costs());
  for (int i = 0; i < cmdp.num_costs(); ++i)
    out.costs(i) = cmdp.costs[static_cast<std::size_t>(i)][a](state, out.next_state);
  return out;
}

void write_cmdp(std::ostream& out, const TabularCmdp& m) {
  out << m.num_states << ' ' << m.num_actions << ' ' << m.num_costs() << '\n';
  out << std::setprecision(17);
  auto write_tensor = [&](const std::vector<Matrix>& t) {
    for (const Matrix& block : t) {
      for (Index s = 0; s < block.rows(); ++s) {
        for (Index sp = 0; sp < block.cols(); ++sp) out << (sp ? " " : "") << block(s, sp);
        out << '\n';
      }
    }
  };
  write_tensor(m.transition);
  write_tensor(m.reward);
  for (const auto& c : m.costs) write_tensor(c);
  for (Index i = 0; i < m.limits.size(); ++i) out << (i ? " " : "") << m.limits(i);
  out << '\n';
  for (Index s = 0; s < m.initial_dist.size(); ++s) out << (s ? " " : "") << m.initial_dist(s);
  out << '\n';
}

TabularCmdp read_cmdp(std::istream& in) {
  TabularCmdp m;
  int num_costs = 0;
  if (!(in >> m.num_states >> m.num_actions >> num_costs)) throw std::invalid_argument("read_cmdp: bad header");
  auto read_value = [&]() {
    std::string token;
    if (!(in >> token)) throw std::invalid_argument("read_cmdp: truncated input");
    return std::stod(token);  // accepts inf / nan spellings
  };
  auto read_tensor = [&]() {
    auto t = zero_tensor(m.num_states, m.num_actions);
    for (auto& block : t)
      for (Index s = 0; s < block.rows(); ++s)
        for (Index sp = 0; sp < block.cols(); ++sp) block(s, sp) = read_value();
    return t;
  };
  m.transition = read_tensor();
  m.reward = read_tensor();
  for (int i = 0; i < num_costs; ++i) m.costs.push_back(read_tensor());
  m.limits.resize(num_costs);
  for (int i = 0; i < num_costs; ++i) m.limits(i) = read_value();
  m.initial_dist.resize(m.num_states);
  for (int s = 0; s < m.num_states; ++s) m.initial_dist(s) = read_value();
  m.validate();
  return m;
}

}  // namespace acpo
