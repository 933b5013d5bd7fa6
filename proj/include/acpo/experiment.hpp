#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "acpo/bounds.hpp"
#include "acpo/config.hpp"

namespace acpo {

struct EvaluationProtocol {
  int trajectories = 10;
  int horizon = 1000;
  std::uint64_t seed = 0;
};

struct EvaluationResult {
  double reward = 0.0;
  Vector costs;
  std::vector<double> trajectory_rewards;
  std::vector<Vector> trajectory_costs;
};

/// Runs the deterministic version of the policy (argmax or mean action) for the given
/// number of trajectories and averages the per-step reward and costs of each.
EvaluationResult evaluate_policy(const Environment& env, const Policy& policy, const EvaluationProtocol& protocol);

/// Seed stream for evaluation rollouts; never collides with the training streams.
std::uint64_t evaluation_seed(std::uint64_t run_seed, int iteration);

std::unique_ptr<Policy> make_policy(const ExperimentConfig& config, const Environment& env, Rng& rng);

struct IterationRecord {
  std::uint64_t seed = 0;
  IterationReport report;
  double exact_gain = std::numeric_limits<double>::quiet_NaN();
  Vector exact_costs;
  std::vector<BoundReport> certificates;
};

struct EvaluationRecord {
  std::uint64_t seed = 0;
  int iteration = 0;
  int trajectory = 0;
  double reward = 0.0;
  Vector costs;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::vector<IterationRecord> iterations;
  std::vector<EvaluationRecord> evaluations;
  std::unique_ptr<Policy> policy;
  std::string error;
};

struct SummaryRow {
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  int count = 0;
};

struct RunArtifacts {
  std::filesystem::path dir;
  std::vector<SeedOutcome> seeds;
  std::vector<SummaryRow> summary;
  double oracle_gain = std::numeric_limits<double>::quiet_NaN();

  const SummaryRow* find(const std::string& metric) const;
};

/// Directory named by the config hash under $ACPO_RUN_ROOT (default "runs").
std::filesystem::path default_run_dir(const ExperimentConfig& config);

/// Trains config.num_seeds independent seeds concurrently and writes iterations.csv,
/// evaluation.csv, summary.csv, config.txt, params_seed<k>.txt and optionally plot.svg.
/// An empty `dir` selects default_run_dir.
RunArtifacts run_experiment(const ExperimentConfig& config, const std::filesystem::path& dir = {});

/// Trains one seed without touching the filesystem.
SeedOutcome train_seed(const ExperimentConfig& config, std::uint64_t seed);

std::vector<SummaryRow> summarize(const ExperimentConfig& config, const std::vector<SeedOutcome>& seeds);

void write_iterations_csv(std::ostream& out, int num_costs, const std::vector<SeedOutcome>& seeds);
void write_evaluation_csv(std::ostream& out, int num_costs, const std::vector<SeedOutcome>& seeds);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_plot_svg(std::ostream& out, const ExperimentConfig& config, const std::vector<SeedOutcome>& seeds);

struct BoundsSuiteOptions {
  std::uint64_t first_seed = 0;
  std::uint64_t last_seed = 199;
  int max_states = 8;
  int max_actions = 4;
  int mixing_samples = 100;
  bool identical_pairs = false;
  bool break_sigma = false;
  std::vector<double> gammas{0.9, 0.99, 0.999};
};

struct BoundsSuiteResult {
  std::vector<BoundReport> reports;
  std::vector<BoundReport> failures;
  bool passed() const { return failures.empty(); }
};

/// Per seed: a random garnet with a random policy pair (identity, surrogate error,
/// sandwich and Pinsker checks, discounted-penalty growth) and a random birth-death chain
/// (stationary TV bound).
BoundsSuiteResult verify_bounds_suite(const BoundsSuiteOptions& options);

void write_bounds_csv(std::ostream& out, const std::vector<BoundReport>& reports);

}  // namespace acpo
