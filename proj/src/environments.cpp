#include <cmath>
#include <stdexcept>

#include "acpo/cmdp.hpp"

namespace acpo {

Vector TabularEnv::initial_state(Rng& rng) const {
  return Vector::Constant(1, static_cast<double>(sample_categorical(cmdp_.initial_dist, rng)));
}

Transition TabularEnv::step(const Vector& state, const Vector& action, Rng& rng) const {
  const TabularStep t = acpo::step(cmdp_, static_cast<int>(state(0)), static_cast<int>(action(0)), rng);
  return {Vector::Constant(1, static_cast<double>(t.next_state)), t.reward, t.costs};
}

PointCircleEnv::PointCircleEnv(const EnvSpec& spec)
    : dt_(spec.dt), noise_(spec.action_noise), radius_(spec.radius), x_limit_(spec.x_limit), drag_(spec.drag) {
  if (spec.kind != EnvKind::point_circle) throw std::invalid_argument("PointCircleEnv: spec kind must be point-circle");
  if (!(dt_ > 0.0) || noise_ < 0.0 || !(radius_ > 0.0) || !(x_limit_ > 0.0) || drag_ < 0.0 || drag_ * dt_ >= 1.0)
    throw std::invalid_argument("PointCircleEnv: invalid dynamics parameters");
  if (spec.num_costs != 1) throw std::invalid_argument("PointCircleEnv: exactly one cost");
  limits_ = Vector::Constant(1, spec.limits.empty() ? 0.1 : spec.limits.front());
}

Vector PointCircleEnv::initial_state(Rng&) const { return Vector::Zero(4); }

double PointCircleEnv::reward(const Vector& s) const {
  const double speed_tangential = -s(1) * s(2) + s(0) * s(3);
  return speed_tangential / (1.0 + std::abs(std::hypot(s(0), s(1)) - radius_));
}

double PointCircleEnv::cost(const Vector& s) const { return std::abs(s(0)) > x_limit_ ? 1.0 : 0.0; }

Transition PointCircleEnv::step(const Vector& state, const Vector& action, Rng& rng) const {
  if (state.size() != 4 || action.size() != 2) throw std::invalid_argument("PointCircleEnv::step: bad dimensions");
  Vector accel = action.cwiseMax(-1.0).cwiseMin(1.0);
  accel(0) += noise_ * standard_normal(rng);
  accel(1) += noise_ * standard_normal(rng);
  Vector next(4);
  next(0) = state(0) + dt_ * state(2);
  next(1) = state(1) + dt_ * state(3);
  next(2) = (1.0 - drag_ * dt_) * state(2) + dt_ * accel(0);
  next(3) = (1.0 - drag_ * dt_) * state(3) + dt_ * accel(1);
  return {next, reward(next), Vector::Constant(1, cost(next))};
}

PointCircleEnv construct_point_circle(const EnvSpec& spec) { return PointCircleEnv(spec); }

std::unique_ptr<Environment> make_environment(const EnvSpec& spec) {
  if (spec.kind == EnvKind::point_circle) return std::make_unique<PointCircleEnv>(spec);
  return std::make_unique<TabularEnv>(construct_cmdp(spec));
}

}  // namespace acpo
