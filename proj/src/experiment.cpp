#include "acpo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace acpo {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

constexpr std::uint64_t kEvalTag = 0xe7a1000000000000ULL;

const TabularSoftmaxPolicy* as_tabular(const Policy& p) { return dynamic_cast<const TabularSoftmaxPolicy*>(&p); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

// --- evaluation -------------------------------------------------------------

std::uint64_t evaluation_seed(std::uint64_t run_seed, int iteration) {
  return derive_seed(run_seed ^ kEvalTag, static_cast<std::uint64_t>(iteration));
}

EvaluationResult evaluate_policy(const Environment& env, const Policy& policy, const EvaluationProtocol& protocol) {
  if (protocol.trajectories < 1 || protocol.horizon < 1) throw std::invalid_argument("evaluate_policy: empty protocol");
  EvaluationResult out;
  out.costs = Vector::Zero(env.num_costs());
  for (int k = 0; k < protocol.trajectories; ++k) {
    Rng rng(derive_seed(protocol.seed, static_cast<std::uint64_t>(k)));
    Vector s = env.initial_state(rng);
    double reward = 0.0;
    Vector costs = Vector::Zero(env.num_costs());
    for (int t = 0; t < protocol.horizon; ++t) {
      Transition tr = env.step(s, policy.mode(s), rng);
      reward += tr.reward;
      costs += tr.costs;
      s = std::move(tr.next_state);
    }
    reward /= protocol.horizon;
    costs /= protocol.horizon;
    out.trajectory_rewards.push_back(reward);
    out.trajectory_costs.push_back(costs);
    out.reward += reward;
    out.costs += costs;
  }
  out.reward /= protocol.trajectories;
  out.costs /= protocol.trajectories;
  return out;
}

std::unique_ptr<Policy> make_policy(const ExperimentConfig& config, const Environment& env, Rng& rng) {
  std::string flavor = config.policy;
  if (flavor == "auto") flavor = env.is_tabular() ? "tabular-softmax" : "gaussian-mlp";
  if (flavor == "tabular-softmax") {
    if (!env.model()) throw std::invalid_argument("tabular-softmax policy needs a tabular environment");
    return std::make_unique<TabularSoftmaxPolicy>(env.model()->num_states, env.model()->num_actions);
  }
  if (env.is_tabular()) throw std::invalid_argument("gaussian-mlp policy needs a continuous environment");
  return std::make_unique<GaussianMlpPolicy>(env.state_dim(), env.action_dim(), config.policy_hidden,
                                             config.initial_log_std, rng);
}

// --- training ---------------------------------------------------------------

SeedOutcome train_seed(const ExperimentConfig& config, std::uint64_t seed) {
  SeedOutcome out;
  out.seed = seed;
  try {
    const std::unique_ptr<Environment> env = make_environment(config.env);
    const TabularCmdp* model = env->model();
    Rng init_rng(derive_seed(seed, 0));
    AgentState agent = make_agent(*env, make_policy(config, *env, init_rng), config.critic, init_rng,
                                  config.critic_hidden);

    if (config.normalize_observations && !env->is_tabular()) {
      const RolloutBatch warmup =
          collect_batch(*env, *agent.policy, agent.state, config.update.batch_size, derive_seed(seed, 1));
      const Vector mean = warmup.states.colwise().mean().transpose();
      const Vector sd =
          ((warmup.states.rowwise() - mean.transpose()).array().square().colwise().mean().sqrt() + 1e-8).transpose();
      if (auto* g = dynamic_cast<GaussianMlpPolicy*>(agent.policy.get())) g->set_observation_normalizer(mean, sd);
      agent.reward_critic.set_observation_normalizer(mean, sd);
      for (Critic& c : agent.cost_critics) c.set_observation_normalizer(mean, sd);
    }

    const Vector limits = env->limits();
    auto exact = [&](IterationRecord& rec) {
      if (!model || !config.exact_metrics) return;
      const ExactEvaluation ev = gain_bias_advantage(*model, as_tabular(*agent.policy)->policy_matrix());
      rec.exact_gain = ev.reward.gain;
      rec.exact_costs.resize(model->num_costs());
      for (int i = 0; i < model->num_costs(); ++i) rec.exact_costs(i) = ev.costs[static_cast<std::size_t>(i)].gain;
    };
    auto evaluate = [&](int iteration) {
      const EvaluationResult ev =
          evaluate_policy(*env, *agent.policy, {config.eval_trajectories, config.eval_horizon, evaluation_seed(seed, iteration)});
      for (int k = 0; k < config.eval_trajectories; ++k)
        out.evaluations.push_back({seed, iteration, k, ev.trajectory_rewards[static_cast<std::size_t>(k)],
                                   ev.trajectory_costs[static_cast<std::size_t>(k)]});
    };

    for (int k = 0; k < config.iterations; ++k) {
      Matrix pi_before;
      if (model && config.certify_updates) pi_before = as_tabular(*agent.policy)->policy_matrix();
      IterationRecord rec;
      rec.seed = seed;
      rec.report = policy_update(*env, agent, config.update, derive_seed(seed, 100 + static_cast<std::uint64_t>(k)), k);
      if (!out.iterations.empty()) {
        IterationReport& prev = out.iterations.back().report;
        prev.gain_after = rec.report.gain_before;
        prev.cost_gain_after = rec.report.cost_gain_before;
      }
      exact(rec);
      if (model && config.certify_updates && rec.report.kind != StepKind::no_update)
        rec.certificates = trust_region_guarantees(*model, pi_before, as_tabular(*agent.policy)->policy_matrix(),
                                                   config.update.delta, limits);
      out.iterations.push_back(std::move(rec));
      const bool last = k + 1 == config.iterations;
      if (config.eval_trajectories > 0 && (last || (config.eval_every > 0 && (k + 1) % config.eval_every == 0)))
        evaluate(k + 1);
    }
    if (!out.iterations.empty()) {
      const RolloutBatch tail =
          collect_batch(*env, *agent.policy, agent.state, config.update.batch_size, derive_seed(seed, 99));
      const GainEstimates g = estimate_gains(tail);
      out.iterations.back().report.gain_after = g.reward;
      out.iterations.back().report.cost_gain_after = g.costs;
    }
    out.policy = std::move(agent.policy);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

// --- summaries --------------------------------------------------------------

const SummaryRow* RunArtifacts::find(const std::string& metric) const {
  for (const SummaryRow& r : summary)
    if (r.metric == metric) return &r;
  return nullptr;
}

namespace {

SummaryRow aggregate(std::string metric, const std::vector<double>& values) {
  SummaryRow row;
  row.metric = std::move(metric);
  row.count = static_cast<int>(values.size());
  if (values.empty()) {
    row.mean = row.std = std::numeric_limits<double>::quiet_NaN();
    return row;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  row.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - row.mean) * (v - row.mean);
  row.std = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  return row;
}

int cost_count(const ExperimentConfig& config) { return config.env.is_tabular() ? config.env.num_costs : 1; }

}  // namespace

std::vector<SummaryRow> summarize(const ExperimentConfig& config, const std::vector<SeedOutcome>& seeds) {
  const int m = cost_count(config);
  std::vector<double> sampled_gain, exact_gain, eval_reward, accepted;
  std::vector<std::vector<double>> sampled_cost(static_cast<std::size_t>(m)), exact_cost(static_cast<std::size_t>(m)),
      eval_cost(static_cast<std::size_t>(m)), violation(static_cast<std::size_t>(m));
  Vector limits = Vector::Map(config.env.limits.data(), static_cast<Index>(config.env.limits.size()));
  if (!config.env.is_tabular() && limits.size() == 0) limits = Vector::Constant(1, 0.1);
  for (const SeedOutcome& s : seeds) {
    if (!s.error.empty() || s.iterations.empty()) continue;
    const IterationRecord& last = s.iterations.back();
    sampled_gain.push_back(last.report.gain_after);
    int n_accepted = 0;
    for (const IterationRecord& r : s.iterations) n_accepted += r.report.kind != StepKind::no_update;
    accepted.push_back(static_cast<double>(n_accepted) / static_cast<double>(s.iterations.size()));
    if (!std::isnan(last.exact_gain)) exact_gain.push_back(last.exact_gain);
    for (int i = 0; i < m; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      sampled_cost[ii].push_back(last.report.cost_gain_after(i));
      if (last.exact_costs.size() > i) exact_cost[ii].push_back(last.exact_costs(i));
      int violations = 0;
      for (const IterationRecord& r : s.iterations) violations += r.report.cost_gain_after(i) > limits(i);
      violation[ii].push_back(static_cast<double>(violations) / static_cast<double>(s.iterations.size()));
    }
    if (!s.evaluations.empty()) {
      const int final_iteration = s.evaluations.back().iteration;
      double r = 0.0;
      Vector c = Vector::Zero(m);
      int n = 0;
      for (const EvaluationRecord& e : s.evaluations)
        if (e.iteration == final_iteration) {
          r += e.reward;
          c += e.costs;
          ++n;
        }
      eval_reward.push_back(r / n);
      for (int i = 0; i < m; ++i) eval_cost[static_cast<std::size_t>(i)].push_back(c(i) / n);
    }
  }
  std::vector<SummaryRow> rows;
  rows.push_back(aggregate("final_sampled_gain", sampled_gain));
  for (int i = 0; i < m; ++i)
    rows.push_back(aggregate("final_sampled_cost" + std::to_string(i + 1), sampled_cost[static_cast<std::size_t>(i)]));
  if (!exact_gain.empty()) {
    rows.push_back(aggregate("final_exact_gain", exact_gain));
    for (int i = 0; i < m; ++i)
      rows.push_back(aggregate("final_exact_cost" + std::to_string(i + 1), exact_cost[static_cast<std::size_t>(i)]));
  }
  rows.push_back(aggregate("final_eval_reward", eval_reward));
  for (int i = 0; i < m; ++i)
    rows.push_back(aggregate("final_eval_cost" + std::to_string(i + 1), eval_cost[static_cast<std::size_t>(i)]));
  for (int i = 0; i < m; ++i)
    rows.push_back(aggregate("violation_rate_cost" + std::to_string(i + 1), violation[static_cast<std::size_t>(i)]));
  rows.push_back(aggregate("accepted_update_rate", accepted));
  return rows;
}

// --- CSV and plot writers ---------------------------------------------------

void write_iterations_csv(std::ostream& out, int m, const std::vector<SeedOutcome>& seeds) {
  out << "seed,iteration,kind,dual_case,lambda";
  for (int i = 1; i <= m; ++i) out << ",mu" << i;
  out << ",kl,fresh_kl,backtracks,surrogate_change,proposal_energy";
  for (int i = 1; i <= m; ++i) out << ",linearized" << i;
  out << ",gain_before";
  for (int i = 1; i <= m; ++i) out << ",cost" << i << "_before";
  out << ",gain_after";
  for (int i = 1; i <= m; ++i) out << ",cost" << i << "_after";
  out << ",exact_gain";
  for (int i = 1; i <= m; ++i) out << ",exact_cost" << i;
  out << ",transcribed_dual,certified,certificate_min_slack,error\n";
  auto entry = [](const Vector& v, int i) { return i < v.size() ? num(v(i)) : std::string(); };
  for (const SeedOutcome& s : seeds)
    for (const IterationRecord& rec : s.iterations) {
      const IterationReport& r = rec.report;
      out << s.seed << ',' << r.iteration << ',' << to_string(r.kind) << ',' << r.dual_case << ',' << num(r.lambda);
      for (int i = 0; i < m; ++i) out << ',' << entry(r.mu, i);
      out << ',' << num(r.kl) << ',' << num(r.fresh_kl) << ',' << r.backtracks << ',' << num(r.surrogate_change) << ','
          << num(r.proposal_energy);
      for (int i = 0; i < m; ++i) out << ',' << entry(r.linearized, i);
      out << ',' << num(r.gain_before);
      for (int i = 0; i < m; ++i) out << ',' << entry(r.cost_gain_before, i);
      out << ',' << num(r.gain_after);
      for (int i = 0; i < m; ++i) out << ',' << entry(r.cost_gain_after, i);
      out << ',' << (std::isnan(rec.exact_gain) ? std::string() : num(rec.exact_gain));
      for (int i = 0; i < m; ++i) out << ',' << entry(rec.exact_costs, i);
      std::string certified, min_slack;
      if (!rec.certificates.empty()) {
        bool all = true;
        double lo = std::numeric_limits<double>::infinity();
        for (const BoundReport& b : rec.certificates) {
          all = all && b.holds;
          lo = std::min(lo, b.slack);
        }
        certified = all ? "1" : "0";
        min_slack = num(lo);
      }
      std::string error = r.error;
      std::replace(error.begin(), error.end(), ',', ';');
      std::replace(error.begin(), error.end(), '\n', ' ');
      out << ',' << num(r.transcribed_dual) << ',' << certified << ',' << min_slack << ',' << error << '\n';
    }
}

void write_evaluation_csv(std::ostream& out, int m, const std::vector<SeedOutcome>& seeds) {
  out << "seed,iteration,trajectory,reward";
  for (int i = 1; i <= m; ++i) out << ",cost" << i;
  out << '\n';
  for (const SeedOutcome& s : seeds)
    for (const EvaluationRecord& e : s.evaluations) {
      out << e.seed << ',' << e.iteration << ',' << e.trajectory << ',' << num(e.reward);
      for (int i = 0; i < m; ++i) out << ',' << num(e.costs(i));
      out << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "metric,mean,std,count\n";
  for (const SummaryRow& r : rows) out << r.metric << ',' << num(r.mean) << ',' << num(r.std) << ',' << r.count << '\n';
}

void write_plot_svg(std::ostream& out, const ExperimentConfig& config, const std::vector<SeedOutcome>& seeds) {
  const int width = 640, height = 240, pad = 40;
  std::vector<std::vector<double>> series(2);
  for (int k = 0; k < config.iterations; ++k) {
    double r = 0.0, c = 0.0;
    int n = 0;
    for (const SeedOutcome& s : seeds)
      if (s.error.empty() && k < static_cast<int>(s.iterations.size())) {
        r += s.iterations[static_cast<std::size_t>(k)].report.gain_before;
        const Vector& cb = s.iterations[static_cast<std::size_t>(k)].report.cost_gain_before;
        c += cb.size() ? cb(0) : 0.0;
        ++n;
      }
    if (n) {
      series[0].push_back(r / n);
      series[1].push_back(c / n);
    }
  }
  const double limit = config.env.limits.empty() ? (config.env.is_tabular() ? NAN : 0.1) : config.env.limits.front();
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << 2 * height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  const char* titles[] = {"average reward", "average cost 1"};
  for (int panel = 0; panel < 2; ++panel) {
    const std::vector<double>& ys = series[static_cast<std::size_t>(panel)];
    const int top = panel * height;
    double lo = ys.empty() ? 0.0 : *std::min_element(ys.begin(), ys.end());
    double hi = ys.empty() ? 1.0 : *std::max_element(ys.begin(), ys.end());
    if (panel == 1 && std::isfinite(limit)) lo = std::min(lo, limit), hi = std::max(hi, limit);
    if (hi - lo < 1e-12) hi = lo + 1.0;
    auto px = [&](std::size_t i) {
      return pad + (width - 2.0 * pad) * (ys.size() > 1 ? static_cast<double>(i) / (ys.size() - 1) : 0.0);
    };
    auto py = [&](double v) { return top + height - pad - (height - 2.0 * pad) * (v - lo) / (hi - lo); };
    out << "<rect x=\"" << pad << "\" y=\"" << top + pad << "\" width=\"" << width - 2 * pad << "\" height=\""
        << height - 2 * pad << "\" fill=\"none\" stroke=\"#888\"/>\n";
    out << "<text x=\"" << pad << "\" y=\"" << top + pad - 8 << "\">" << titles[panel] << " (" << num(lo) << " to "
        << num(hi) << ")</text>\n";
    if (!ys.empty()) {
      out << "<polyline fill=\"none\" stroke=\"" << (panel ? "#c33" : "#36c") << "\" points=\"";
      for (std::size_t i = 0; i < ys.size(); ++i) out << (i ? " " : "") << px(i) << ',' << py(ys[i]);
      out << "\"/>\n";
    }
    if (panel == 1 && std::isfinite(limit))
      out << "<line x1=\"" << pad << "\" x2=\"" << width - pad << "\" y1=\"" << py(limit) << "\" y2=\"" << py(limit)
          << "\" stroke=\"#333\" stroke-dasharray=\"6,4\"/>\n";
  }
  out << "</svg>\n";
}

// --- orchestration ----------------------------------------------------------

std::filesystem::path default_run_dir(const ExperimentConfig& config) {
  const char* root = std::getenv("ACPO_RUN_ROOT");
  return std::filesystem::path(root && *root ? root : "runs") / config_hash(config);
}

RunArtifacts run_experiment(const ExperimentConfig& config, const std::filesystem::path& dir) {
  validate_config(config);
  RunArtifacts art;
  art.dir = dir.empty() ? default_run_dir(config) : dir;
  std::filesystem::create_directories(art.dir);

  std::vector<std::future<SeedOutcome>> jobs;
  for (int k = 0; k < config.num_seeds; ++k)
    jobs.push_back(std::async(std::launch::async, train_seed, std::cref(config), config.seed + static_cast<std::uint64_t>(k)));
  for (auto& job : jobs) art.seeds.push_back(job.get());

  if (config.env.is_tabular()) {
    try {
      const TabularCmdp cmdp = construct_cmdp(config.env);
      const OracleSolution oracle = solve_constrained_optimal(cmdp, cmdp.limits);
      if (oracle.feasible) art.oracle_gain = oracle.gain;
    } catch (const std::exception&) {
    }
  }
  art.summary = summarize(config, art.seeds);
  if (!std::isnan(art.oracle_gain)) art.summary.push_back({"oracle_gain", art.oracle_gain, 0.0, 1});

  const int m = cost_count(config);
  std::ostringstream iterations, evaluation, summary;
  write_iterations_csv(iterations, m, art.seeds);
  write_evaluation_csv(evaluation, m, art.seeds);
  write_summary_csv(summary, art.summary);
  write_file(art.dir / "config.txt", serialize_config(config));
  write_file(art.dir / "iterations.csv", iterations.str());
  write_file(art.dir / "evaluation.csv", evaluation.str());
  write_file(art.dir / "summary.csv", summary.str());
  for (const SeedOutcome& s : art.seeds) {
    if (!s.policy) continue;
    std::ostringstream params;
    s.policy->write(params);
    write_file(art.dir / ("params_seed" + std::to_string(s.seed) + ".txt"), params.str());
  }
  if (config.plot) {
    std::ostringstream svg;
    write_plot_svg(svg, config, art.seeds);
    write_file(art.dir / "plot.svg", svg.str());
  }
  return art;
}

// --- bounds suite -----------------------------------------------------------

namespace {

void tag_all(std::vector<BoundReport>& reports, std::uint64_t seed) {
  for (BoundReport& r : reports) r.seed = seed;
}

}  // namespace

BoundsSuiteResult verify_bounds_suite(const BoundsSuiteOptions& opt) {
  if (opt.last_seed < opt.first_seed) throw std::invalid_argument("verify_bounds_suite: empty seed range");
  if (opt.max_states < 2 || opt.max_actions < 2) throw std::invalid_argument("verify_bounds_suite: shape too small");
  BoundsSuiteResult out;
  for (std::uint64_t seed = opt.first_seed;; ++seed) {
    std::vector<BoundReport> reports;
    Rng rng(derive_seed(seed, 0xb0));
    auto draw_spec = [&](EnvKind kind) {
      EnvSpec spec;
      spec.kind = kind;
      spec.seed = derive_seed(seed, static_cast<std::uint64_t>(kind));
      spec.num_states = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(opt.max_states - 1));
      spec.num_actions = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(opt.max_actions - 1));
      spec.branching = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(spec.num_states));
      spec.num_costs = 1 + static_cast<int>(rng() % 2);
      spec.limits.assign(static_cast<std::size_t>(spec.num_costs), 0.5);
      return spec;
    };
    auto draw_pair = [&](const TabularCmdp& cmdp) {
      Matrix pi = random_policy(cmdp.num_states, cmdp.num_actions, rng);
      Matrix pi_new = opt.identical_pairs ? pi : random_policy(cmdp.num_states, cmdp.num_actions, rng);
      return std::pair{pi, pi_new};
    };
    auto mixing_for = [&](const TabularCmdp& cmdp, const Matrix& pi, const Matrix& pi_new) {
      MixingEstimate mix = estimate_mixing_constants(cmdp, pi, pi_new, opt.mixing_samples, rng);
      if (opt.break_sigma) mix = {0.0, 0.0};
      return mix;
    };

    const TabularCmdp garnet = construct_cmdp(draw_spec(EnvKind::garnet));
    const auto [pi, pi_new] = draw_pair(garnet);
    reports.push_back(check_policy_difference_identity(garnet, pi, pi_new));
    reports.push_back(check_surrogate_error_bound(garnet, pi, pi_new));
    const MixingEstimate mix = mixing_for(garnet, pi, pi_new);
    BoundReport garnet_tv = check_stationary_tv_bound(garnet, pi, pi_new, mix);
    garnet_tv.name += "_nonreversible";
    garnet_tv.asserted = false;
    const double sigma_used =
        garnet_tv.context_value("escalated") > 0.0 ? mix.kemeny : mix.sigma;
    reports.push_back(garnet_tv);
    ImprovementBounds imp = improvement_bounds(garnet, pi, pi_new, sigma_used);
    for (BoundReport& r : imp.reports) r.context.emplace_back("sigma_used", sigma_used);
    reports.insert(reports.end(), imp.reports.begin(), imp.reports.end());

    if (!opt.identical_pairs) {
      const std::vector<TrivializationPoint> pts = trivialization_demo(garnet, pi, pi_new, opt.gammas);
      for (std::size_t k = 1; k < pts.size(); ++k) {
        BoundReport grow = make_bound_report("discounted_penalty_increasing", pts[k - 1].penalty, pts[k].penalty);
        grow.holds = pts[k].penalty > pts[k - 1].penalty;
        grow.context = {{"gamma_low", pts[k - 1].gamma}, {"gamma_high", pts[k].gamma}};
        reports.push_back(grow);
      }
    }

    const TabularCmdp chain = construct_cmdp(draw_spec(EnvKind::birth_death));
    const auto [rho, rho_new] = draw_pair(chain);
    reports.push_back(check_stationary_tv_bound(chain, rho, rho_new, mixing_for(chain, rho, rho_new)));

    tag_all(reports, seed);
    for (const BoundReport& r : reports)
      if (r.asserted && !r.holds) out.failures.push_back(r);
    out.reports.insert(out.reports.end(), reports.begin(), reports.end());
    if (seed == opt.last_seed) break;
  }
  return out;
}

void write_bounds_csv(std::ostream& out, const std::vector<BoundReport>& reports) {
  out << "seed,name,lhs,rhs,slack,holds,asserted,context\n";
  for (const BoundReport& r : reports) {
    out << r.seed << ',' << r.name << ',' << num(r.lhs) << ',' << num(r.rhs) << ',' << num(r.slack) << ','
        << (r.holds ? 1 : 0) << ',' << (r.asserted ? 1 : 0) << ',';
    for (std::size_t k = 0; k < r.context.size(); ++k)
      out << (k ? ";" : "") << r.context[k].first << '=' << num(r.context[k].second);
    out << '\n';
  }
}

}  // namespace acpo
