#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <string>

#include "CLI11.hpp"
#include "acpo/experiment.hpp"

namespace fs = std::filesystem;
using namespace acpo;

namespace {

int cmd_train(const std::string& config_path, const std::string& out_dir) {
  const ExperimentConfig config = load_config(config_path);
  const RunArtifacts art = run_experiment(config, out_dir);
  std::cout << "run directory: " << art.dir.string() << "\n";
  for (const SeedOutcome& s : art.seeds)
    if (!s.error.empty()) std::cerr << "seed " << s.seed << " failed: " << s.error << "\n";
  for (const SummaryRow& r : art.summary) std::printf("%-28s %.6g +- %.3g (n=%d)\n", r.metric.c_str(), r.mean, r.std, r.count);
  return 0;
}

int cmd_eval(const std::string& run_dir, int trajectories, int horizon) {
  const ExperimentConfig config = load_config((fs::path(run_dir) / "config.txt").string());
  const auto env = make_environment(config.env);
  std::ofstream csv(fs::path(run_dir) / "eval.csv");
  csv << "seed,reward";
  for (int i = 1; i <= env->num_costs(); ++i) csv << ",cost" << i;
  csv << ",exact_gain\n";
  int found = 0;
  for (int k = 0; k < config.num_seeds; ++k) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(k);
    std::ifstream in(fs::path(run_dir) / ("params_seed" + std::to_string(seed) + ".txt"));
    if (!in) continue;
    ++found;
    const auto policy = read_policy(in);
    const EvaluationResult ev =
        evaluate_policy(*env, *policy, {trajectories, horizon, evaluation_seed(seed, config.iterations)});
    csv << seed << ',' << ev.reward;
    std::printf("seed %llu: reward %.6f", static_cast<unsigned long long>(seed), ev.reward);
    for (Index i = 0; i < ev.costs.size(); ++i) {
      csv << ',' << ev.costs(i);
      std::printf(" cost%ld %.6f", static_cast<long>(i + 1), ev.costs(i));
    }
    csv << ',';
    if (const auto* tab = dynamic_cast<const TabularSoftmaxPolicy*>(policy.get())) {
      const ExactEvaluation exact = gain_bias_advantage(*env->model(), tab->policy_matrix());
      csv << exact.reward.gain;
      std::printf(" exact_gain %.6f", exact.reward.gain);
    }
    csv << '\n';
    std::printf("\n");
  }
  if (!found) {
    std::cerr << "no params_seed*.txt files in " << run_dir << "\n";
    return 1;
  }
  return 0;
}

int cmd_verify(const std::string& range, bool break_sigma, bool identical, const std::string& out) {
  static const std::regex pattern(R"((\d+)\.\.(\d+))");
  std::smatch match;
  if (!std::regex_match(range, match, pattern)) throw CLI::ValidationError("--seeds", "expected A..B");
  BoundsSuiteOptions opt;
  opt.first_seed = std::stoull(match[1]);
  opt.last_seed = std::stoull(match[2]);
  opt.break_sigma = break_sigma;
  opt.identical_pairs = identical;
  const BoundsSuiteResult res = verify_bounds_suite(opt);
  if (!out.empty()) {
    std::ofstream csv(out);
    write_bounds_csv(csv, res.reports);
  }
  std::printf("%zu checks over seeds %s, %zu failed\n", res.reports.size(), range.c_str(), res.failures.size());
  for (const BoundReport& r : res.failures)
    std::printf("FAILED %s seed=%llu lhs=%.12g rhs=%.12g slack=%.3g\n", r.name.c_str(),
                static_cast<unsigned long long>(r.seed), r.lhs, r.rhs, r.slack);
  return res.passed() ? 0 : 1;
}

int cmd_solve_exact(const std::string& config_path, const std::string& model_out) {
  const ExperimentConfig config = load_config(config_path);
  if (!config.env.is_tabular()) throw std::invalid_argument("solve-exact needs a tabular environment");
  const TabularCmdp cmdp = construct_cmdp(config.env);
  if (!model_out.empty()) {
    std::ofstream out(model_out);
    write_cmdp(out, cmdp);
  }
  const OracleSolution oracle = solve_constrained_optimal(cmdp, cmdp.limits);
  const PolicyIterationResult unconstrained = average_reward_policy_iteration(cmdp);
  std::printf("unconstrained_gain %.12f\n", unconstrained.gain);
  if (!oracle.feasible) {
    std::printf("constrained problem infeasible\n");
    return 1;
  }
  const ExactEvaluation ev = gain_bias_advantage(cmdp, oracle.policy);
  std::printf("constrained_gain %.12f\n", oracle.gain);
  for (int i = 0; i < cmdp.num_costs(); ++i)
    std::printf("cost%d %.12f limit %.12f\n", i + 1, ev.costs[static_cast<std::size_t>(i)].gain, cmdp.limits(i));
  std::printf("policy (state: action probabilities)\n");
  for (int s = 0; s < cmdp.num_states; ++s) {
    std::printf("%d:", s);
    for (int a = 0; a < cmdp.num_actions; ++a) std::printf(" %.6f", oracle.policy(s, a));
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Average-constrained policy optimization on small CMDPs"};
  app.require_subcommand(1);

  std::string config_path, out_dir, run_dir, seeds, bounds_out, model_out;
  int trajectories = 10, horizon = 1000;
  bool break_sigma = false, identical = false;

  auto* train = app.add_subcommand("train", "train with a config file");
  train->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out_dir, "run directory (default $ACPO_RUN_ROOT/<config hash>)");

  auto* eval = app.add_subcommand("eval", "re-evaluate the saved policies of a run");
  eval->add_option("--run", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--trajectories", trajectories, "evaluation trajectories")->check(CLI::PositiveNumber);
  eval->add_option("--horizon", horizon, "steps per trajectory")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify-bounds", "certify the sensitivity bounds over a seed range");
  verify->add_option("--seeds", seeds, "seed range A..B")->required();
  verify->add_flag("--break-sigma", break_sigma, "zero the mixing constants to exercise the failure path");
  verify->add_flag("--identical-pairs", identical, "compare each policy with itself");
  verify->add_option("--out", bounds_out, "CSV of every report");

  auto* solve = app.add_subcommand("solve-exact", "solve the constrained problem by linear programming");
  solve->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
  solve->add_option("--dump-model", model_out, "write the CMDP tensors");

  auto* print = app.add_subcommand("print-default-config", "print every config key with its default");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return cmd_train(config_path, out_dir);
    if (*eval) return cmd_eval(run_dir, trajectories, horizon);
    if (*verify) return cmd_verify(seeds, break_sigma, identical, bounds_out);
    if (*solve) return cmd_solve_exact(config_path, model_out);
    if (*print) {
      std::cout << serialize_config(default_config());
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
