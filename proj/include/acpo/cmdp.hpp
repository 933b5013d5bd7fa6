#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "acpo/types.hpp"

namespace acpo {

enum class EnvKind { garnet, chain, gridworld, birth_death, point_circle };

std::string to_string(EnvKind kind);
EnvKind parse_env_kind(const std::string& name);

/// Declarative environment description. Identical specs build identical environments.
struct EnvSpec {
  EnvKind kind = EnvKind::chain;
  std::uint64_t seed = 0;
  int num_states = 10;
  int num_actions = 2;
  int branching = 2;
  int num_costs = 1;
  std::vector<double> limits{0.6};

  // point-circle parameters
  double dt = 0.05;
  double action_noise = 0.01;
  double radius = 1.0;
  double x_limit = 0.5;
  double drag = 0.5;

  bool is_tabular() const { return kind != EnvKind::point_circle; }
};

/// Finite CMDP with transition-indexed reward and costs. Tensors are stored per action:
/// transition[a](s, s') = P(s'|s,a), reward[a](s, s') = r(s,a,s'), costs[i][a](s, s') = C_i(s,a,s').
struct TabularCmdp {
  int num_states = 0;
  int num_actions = 0;
  std::vector<Matrix> transition;
  std::vector<Matrix> reward;
  std::vector<std::vector<Matrix>> costs;
  Vector limits;
  Vector initial_dist;

  int num_costs() const { return static_cast<int>(costs.size()); }

  /// Throws std::invalid_argument on any violated model invariant
  /// (row-stochastic P, normalized mu, nonnegative costs, ergodic uniform-policy chain).
  void validate() const;

  /// Expected one-step signal r(s,a) = sum_s' P(s'|s,a) f(s,a,s') as an |S| x |A| matrix.
  Matrix expected(const std::vector<Matrix>& signal) const;
  Matrix expected_reward() const { return expected(reward); }
  Matrix expected_cost(int i) const { return expected(costs.at(static_cast<std::size_t>(i))); }

  /// Row-stochastic matrix induced by a policy (|S| x |A|, rows sum to 1).
  Matrix induced_transition(const Matrix& policy) const;

  Matrix uniform_policy() const;
};

/// True iff the chain is irreducible and aperiodic (some power of P is strictly positive).
bool is_primitive(const Matrix& P);

TabularCmdp construct_cmdp(const EnvSpec& spec);

struct TabularStep {
  int next_state = 0;
  double reward = 0.0;
  Vector costs;
};

TabularStep step(const TabularCmdp& cmdp, int state, int action, Rng& rng);

/// Plain-text tensor format: header "nS nA m", then P, r, C_1..C_m each as nA blocks of
/// nS rows x nS columns (row s lists s'), then limits (m values), then mu (nS values).
void write_cmdp(std::ostream& out, const TabularCmdp& cmdp);
TabularCmdp read_cmdp(std::istream& in);

// ---------------------------------------------------------------------------
// Sampling interface shared by tabular and continuous environments. States and
// actions travel as vectors; a tabular state or action is a length-1 vector holding
// its index.

struct Transition {
  Vector next_state;
  double reward = 0.0;
  Vector costs;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual bool is_tabular() const = 0;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  /// Number of discrete actions, 0 for continuous action spaces.
  virtual int num_actions() const = 0;
  virtual int num_costs() const = 0;
  virtual const Vector& limits() const = 0;
  virtual Vector initial_state(Rng& rng) const = 0;
  virtual Transition step(const Vector& state, const Vector& action, Rng& rng) const = 0;
  /// The underlying finite model, or nullptr for continuous environments.
  virtual const TabularCmdp* model() const { return nullptr; }
};

class TabularEnv final : public Environment {
 public:
  explicit TabularEnv(TabularCmdp cmdp) : cmdp_(std::move(cmdp)) {}

  bool is_tabular() const override { return true; }
  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  int num_actions() const override { return cmdp_.num_actions; }
  int num_costs() const override { return cmdp_.num_costs(); }
  const Vector& limits() const override { return cmdp_.limits; }
  Vector initial_state(Rng& rng) const override;
  Transition step(const Vector& state, const Vector& action, Rng& rng) const override;
  const TabularCmdp* model() const override { return &cmdp_; }

 private:
  TabularCmdp cmdp_;
};

/// Planar double integrator rewarded for counter-clockwise motion along a circle of
/// radius rho, with one cost flagging |x| > x_limit.
///
/// state (x, y, vx, vy); action a clipped to [-1, 1]^2 plus N(0, noise^2) per axis;
///   x'  = x + dt * vx,            y'  = y + dt * vy
///   vx' = (1 - drag*dt) vx + dt ax, vy' = (1 - drag*dt) vy + dt ay
///   reward = (-y' vx' + x' vy') / (1 + | ||(x', y')|| - rho |)
///   cost   = 1{|x'| > x_limit}
class PointCircleEnv final : public Environment {
 public:
  explicit PointCircleEnv(const EnvSpec& spec);

  bool is_tabular() const override { return false; }
  int state_dim() const override { return 4; }
  int action_dim() const override { return 2; }
  int num_actions() const override { return 0; }
  int num_costs() const override { return 1; }
  const Vector& limits() const override { return limits_; }
  Vector initial_state(Rng& rng) const override;
  Transition step(const Vector& state, const Vector& action, Rng& rng) const override;

  double reward(const Vector& next_state) const;
  double cost(const Vector& next_state) const;

 private:
  double dt_, noise_, radius_, x_limit_, drag_;
  Vector limits_;
};

PointCircleEnv construct_point_circle(const EnvSpec& spec);

/// Builds the sampling environment for any spec kind.
std::unique_ptr<Environment> make_environment(const EnvSpec& spec);

}  // namespace acpo
