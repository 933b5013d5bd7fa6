#include "acpo/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace acpo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& v, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse(item));
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>) out += fmt(v[i]);
    else out += std::to_string(v[i]);
  }
  return out;
}

struct Field {
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define ACPO_NUM(KEY, EXPR, SHOW, PARSE)                                                               \
  Field {                                                                                             \
    KEY, [](const ExperimentConfig& c) { return SHOW(c.EXPR); },                                       \
        [](ExperimentConfig& c, const std::string& v) { c.EXPR = static_cast<decltype(c.EXPR)>(PARSE(v)); } \
  }
#define ACPO_INT(KEY, EXPR) ACPO_NUM(KEY, EXPR, std::to_string, std::stoll)
#define ACPO_REAL(KEY, EXPR) ACPO_NUM(KEY, EXPR, fmt, std::stod)
#define ACPO_BOOL(KEY, EXPR)                                                          \
  Field {                                                                            \
    KEY, [](const ExperimentConfig& c) { return std::string(c.EXPR ? "true" : "false"); }, \
        [](ExperimentConfig& c, const std::string& v) { c.EXPR = parse_bool(v); }    \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"env", [](const ExperimentConfig& c) { return to_string(c.env.kind); },
       [](ExperimentConfig& c, const std::string& v) { c.env.kind = parse_env_kind(v); }},
      {"env_seed", [](const ExperimentConfig& c) { return std::to_string(c.env.seed); },
       [](ExperimentConfig& c, const std::string& v) { c.env.seed = std::stoull(v); }},
      ACPO_INT("num_states", env.num_states),
      ACPO_INT("num_actions", env.num_actions),
      ACPO_INT("branching", env.branching),
      ACPO_INT("num_costs", env.num_costs),
      {"limits", [](const ExperimentConfig& c) { return join(c.env.limits); },
       [](ExperimentConfig& c, const std::string& v) {
         c.env.limits = parse_list<double>(v, [](const std::string& s) { return std::stod(s); });
       }},
      ACPO_REAL("dt", env.dt),
      ACPO_REAL("action_noise", env.action_noise),
      ACPO_REAL("radius", env.radius),
      ACPO_REAL("x_limit", env.x_limit),
      ACPO_REAL("drag", env.drag),
      {"algorithm", [](const ExperimentConfig& c) { return to_string(c.update.algorithm); },
       [](ExperimentConfig& c, const std::string& v) { c.update.algorithm = parse_algorithm(v); }},
      ACPO_REAL("delta", update.delta),
      ACPO_REAL("gae_lambda_reward", update.lambda_reward),
      ACPO_REAL("gae_lambda_cost", update.lambda_cost),
      ACPO_INT("batch_size", update.batch_size),
      ACPO_REAL("recovery_t", update.recovery_t),
      ACPO_REAL("backtrack_coeff", update.backtrack_coeff),
      ACPO_INT("backtrack_max", update.backtrack_max),
      ACPO_REAL("line_search_slack", update.line_search_slack),
      ACPO_INT("cg_iters", update.cg_iters),
      ACPO_REAL("damping", update.damping),
      ACPO_REAL("critic_lr", update.critic_lr),
      ACPO_REAL("cost_critic_lr", update.cost_critic_lr),
      ACPO_INT("critic_epochs", update.critic_epochs),
      ACPO_BOOL("normalize_advantages", update.normalize_advantages),
      ACPO_REAL("lagrange_ell", update.lagrange_ell),
      ACPO_REAL("gamma", update.gamma),
      ACPO_INT("fresh_kl_states", update.fresh_kl_states),
      {"policy", [](const ExperimentConfig& c) { return c.policy; },
       [](ExperimentConfig& c, const std::string& v) { c.policy = v; }},
      {"policy_hidden", [](const ExperimentConfig& c) { return join(c.policy_hidden); },
       [](ExperimentConfig& c, const std::string& v) {
         c.policy_hidden = parse_list<int>(v, [](const std::string& s) { return std::stoi(s); });
       }},
      ACPO_REAL("initial_log_std", initial_log_std),
      ACPO_REAL("policy_lr", policy_lr),
      {"critic", [](const ExperimentConfig& c) { return to_string(c.critic); },
       [](ExperimentConfig& c, const std::string& v) { c.critic = parse_critic_flavor(v); }},
      {"critic_hidden", [](const ExperimentConfig& c) { return join(c.critic_hidden); },
       [](ExperimentConfig& c, const std::string& v) {
         c.critic_hidden = parse_list<int>(v, [](const std::string& s) { return std::stoi(s); });
       }},
      ACPO_BOOL("normalize_observations", normalize_observations),
      ACPO_INT("iterations", iterations),
      ACPO_INT("num_seeds", num_seeds),
      {"seed", [](const ExperimentConfig& c) { return std::to_string(c.seed); },
       [](ExperimentConfig& c, const std::string& v) { c.seed = std::stoull(v); }},
      ACPO_INT("eval_every", eval_every),
      ACPO_INT("eval_trajectories", eval_trajectories),
      ACPO_INT("eval_horizon", eval_horizon),
      ACPO_BOOL("exact_metrics", exact_metrics),
      ACPO_BOOL("certify_updates", certify_updates),
      ACPO_BOOL("plot", plot),
  };
  return table;
}

#undef ACPO_NUM
#undef ACPO_INT
#undef ACPO_REAL
#undef ACPO_BOOL

}  // namespace

ExperimentConfig default_config() { return ExperimentConfig{}; }

ExperimentConfig parse_config(std::istream& in) {
  std::map<std::string, const Field*> index;
  for (const Field& f : fields()) index[f.key] = &f;
  ExperimentConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = index.find(key);
    if (it == index.end()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key " + key);
    try {
      it->second->set(config, value);
    } catch (const std::exception& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + " (" + key + "): " + e.what());
    }
  }
  validate_config(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return parse_config(in);
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void validate_config(const ExperimentConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid config: ") + what);
  };
  const UpdateSettings& u = c.update;
  require(u.delta > 0.0, "delta must be positive");
  require(u.lambda_reward >= 0.0 && u.lambda_reward <= 1.0, "gae_lambda_reward outside [0, 1]");
  require(u.lambda_cost >= 0.0 && u.lambda_cost <= 1.0, "gae_lambda_cost outside [0, 1]");
  require(u.batch_size >= 2, "batch_size below 2");
  require(u.recovery_t >= 0.0 && u.recovery_t <= 1.0, "recovery_t outside [0, 1]");
  require(u.backtrack_coeff > 0.0 && u.backtrack_coeff < 1.0, "backtrack_coeff outside (0, 1)");
  require(u.backtrack_max >= 0, "backtrack_max negative");
  require(u.cg_iters >= 1, "cg_iters below 1");
  require(u.damping >= 0.0, "damping negative");
  require(u.critic_lr > 0.0 && u.cost_critic_lr > 0.0, "critic learning rates must be positive");
  require(u.critic_epochs >= 0, "critic_epochs negative");
  require(u.lagrange_ell >= 0.0 && u.lagrange_ell <= 1.0, "lagrange_ell outside [0, 1]");
  require(u.gamma > 0.0 && u.gamma < 1.0, "gamma outside (0, 1)");
  require(u.fresh_kl_states >= 0, "fresh_kl_states negative");
  require(c.policy == "auto" || c.policy == "tabular-softmax" || c.policy == "gaussian-mlp", "unknown policy");
  require(c.iterations >= 0 && c.num_seeds >= 1, "iterations or num_seeds out of range");
  require(c.eval_every >= 0 && c.eval_trajectories >= 0 && c.eval_horizon >= 1, "evaluation protocol out of range");
  require(static_cast<int>(c.env.limits.size()) == c.env.num_costs || !c.env.is_tabular(),
          "limits must list one value per cost");
  require(!(c.critic == CriticFlavor::tabular && !c.env.is_tabular()), "tabular critic needs a tabular environment");
}

}  // namespace acpo
