#pragma once

#include "acpo/cmdp.hpp"

namespace fixtures {

using acpo::Matrix;
using acpo::TabularCmdp;
using acpo::Vector;

// One-action model with state rewards r_s on the transition into s' = anything.
inline TabularCmdp markov_chain(const Matrix& P, const Vector& state_reward) {
  TabularCmdp m;
  m.num_states = static_cast<int>(P.rows());
  m.num_actions = 1;
  m.transition = {P};
  m.reward = {state_reward * Vector::Ones(P.rows()).transpose()};
  m.limits.resize(0);
  m.initial_dist = Vector::Constant(P.rows(), 1.0 / static_cast<double>(P.rows()));
  return m;
}

inline TabularCmdp two_state_chain(double limit = 0.5) {
  acpo::EnvSpec spec;
  spec.kind = acpo::EnvKind::chain;
  spec.num_states = 2;
  spec.num_actions = 2;
  spec.limits = {limit};
  return acpo::construct_cmdp(spec);
}

inline TabularCmdp garnet(std::uint64_t seed, int states, int actions, int branching = 2, int costs = 1) {
  acpo::EnvSpec spec;
  spec.kind = acpo::EnvKind::garnet;
  spec.seed = seed;
  spec.num_states = states;
  spec.num_actions = actions;
  spec.branching = branching;
  spec.num_costs = costs;
  spec.limits.assign(static_cast<std::size_t>(costs), 0.5);
  return acpo::construct_cmdp(spec);
}

}  // namespace fixtures
