#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "acpo/acpo.hpp"
#include "acpo/cmdp.hpp"

namespace acpo {

/// Everything that determines a run. Serialized as flat "key = value" lines.
struct ExperimentConfig {
  EnvSpec env;
  UpdateSettings update;

  std::string policy = "auto";  ///< auto, tabular-softmax or gaussian-mlp
  std::vector<int> policy_hidden{16, 16};
  double initial_log_std = -1.0;
  double policy_lr = 2e-4;  ///< kept for completeness; trust-region updates do not use it
  CriticFlavor critic = CriticFlavor::tabular;
  std::vector<int> critic_hidden{16, 16};
  bool normalize_observations = false;

  int iterations = 500;
  int num_seeds = 5;
  std::uint64_t seed = 1;
  int eval_every = 50;
  int eval_trajectories = 10;
  int eval_horizon = 1000;
  bool exact_metrics = true;
  bool certify_updates = false;
  bool plot = true;
};

ExperimentConfig default_config();

/// Parses "key = value" lines; '#' starts a comment. Unknown keys are errors.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Every key in a fixed order with round-trip precision.
std::string serialize_config(const ExperimentConfig& config);

/// Hex FNV-1a 64 of the serialized config.
std::string config_hash(const ExperimentConfig& config);

void validate_config(const ExperimentConfig& config);

}  // namespace acpo
