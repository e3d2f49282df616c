#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fedminimax/auc.hpp"
#include "fedminimax/core.hpp"
#include "fedminimax/fedopt.hpp"
#include "fedminimax/saddle.hpp"
#include "fedminimax/trace.hpp"

namespace fedminimax {

enum class ProblemKind { saddle, auc };
enum class ScheduleKind { theorem1, theorem2, explicit_rates };

inline std::string_view to_string(ProblemKind k) { return k == ProblemKind::saddle ? "saddle" : "auc"; }

inline std::string_view to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::theorem1: return "theorem1";
    case ScheduleKind::theorem2: return "theorem2";
    case ScheduleKind::explicit_rates: return "explicit";
  }
  return "theorem1";
}

inline std::string_view to_string(RatioMode m) { return m == RatioMode::shard ? "shard" : "pooled"; }

/// Saddle instance parameters. A primal block with x_cols > 1 is a
/// dim_x x x_cols matrix; otherwise it is a vector of dimension dim_x.
struct SaddleConfig {
  int dim_x = 10;
  int dim_y = 10;
  int x_cols = 1;
  int y_cols = 1;
  double mu = 1.0;
  double amp = 1.0;
  double hetero = 0.5;
  std::uint64_t problem_seed = 0;

  bool operator==(const SaddleConfig&) const = default;
};

/// Synthetic imbalanced AUC data. `ratios` (one per client) overrides the
/// common `ratio` when non-empty.
struct AucConfig {
  int dim = 20;
  double separation = 2.0;
  double feature_std = 0.5;
  int n_per_client = 640;
  double ratio = 0.1;
  std::vector<double> ratios;
  int test_size = 4000;
  std::optional<double> test_ratio;  // defaults to the mean client ratio
  int batch_size = 64;
  RatioMode ratio_mode = RatioMode::shard;
  std::uint64_t data_seed = 0;

  std::vector<double> client_ratios(int n_clients) const {
    return ratios.empty() ? std::vector<double>(static_cast<std::size_t>(n_clients), ratio) : ratios;
  }

  bool operator==(const AucConfig&) const = default;
};

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::nsgda_m;
  ProblemKind problem = ProblemKind::saddle;
  SaddleConfig saddle;
  AucConfig auc;
  int T = 100;
  int N = 8;
  int p = 4;
  ScheduleKind schedule = ScheduleKind::theorem1;
  ScheduleConstants constants;
  // Explicit rates; all six are required with schedule = explicit.
  std::optional<double> gamma_x, gamma_y, eta_x, eta_y, beta_x, beta_y;
  double baseline_beta = 0.9;  // momentum weight of the baselines under a theorem schedule
  double tau = 0.1;
  int ns_iters = 10;
  int ns_degree = 4;
  NsMode ns_mode = NsMode::iterative;
  ZeroMomentumPolicy zero_momentum_policy = ZeroMomentumPolicy::skip;
  MomentumInit momentum_init = MomentumInit::zero;
  bool local_recursive_momentum = false;
  NoiseModel noise;
  std::vector<std::uint64_t> seeds{1};
  std::optional<std::string> output;
  bool parallel_clients = false;
  bool parallel_seeds = false;
  bool halt_on_divergence = false;
  double divergence_threshold = 1e8;
  double phi_tol = 1e-8;

  RunOptions run_options() const {
    RunOptions o;
    o.momentum_init = momentum_init;
    o.local_recursive_momentum = local_recursive_momentum;
    o.parallel_clients = parallel_clients;
    o.halt_on_divergence = halt_on_divergence;
    o.divergence_threshold = divergence_threshold;
    o.phi_tol = phi_tol;
    return o;
  }

  bool operator==(const ExperimentConfig&) const = default;
};

struct ConfigError {
  int line = 0;  // 0 when the field does not appear in the text
  std::string field;
  std::string message;

  std::string to_string() const {
    std::string out = line > 0 ? "line " + std::to_string(line) + ": " : std::string();
    if (!field.empty()) out += field + ": ";
    return out + message;
  }
};

/// All problems found in a configuration, not just the first.
class ConfigErrors : public InvalidConfiguration {
 public:
  explicit ConfigErrors(std::vector<ConfigError> errors)
      : InvalidConfiguration(join(errors)), errors_(std::move(errors)) {}
  const std::vector<ConfigError>& errors() const { return errors_; }

 private:
  static std::string join(const std::vector<ConfigError>& errors) {
    std::string out = std::to_string(errors.size()) + " configuration error(s)";
    for (const auto& e : errors) out += "\n  " + e.to_string();
    return out;
  }
  std::vector<ConfigError> errors_;
};

namespace detail {

using nlohmann::json;

inline int line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the key named by a dotted path ("noise.s"), found by locating each
// quoted key in turn after its parent. Returns 0 when not present.
inline int line_of_field(std::string_view text, std::string_view path) {
  std::size_t pos = 0;
  while (!path.empty()) {
    const auto dot = path.find('.');
    std::string key = "\"" + std::string(path.substr(0, dot)) + "\"";
    const auto bracket = key.find('[');
    if (bracket != std::string::npos) key = key.substr(0, bracket) + "\"";
    const auto found = text.find(key, pos);
    if (found == std::string_view::npos) return 0;
    pos = found + key.size();
    path = dot == std::string_view::npos ? std::string_view{} : path.substr(dot + 1);
  }
  return line_of_offset(text, pos);
}

class ConfigReader {
 public:
  explicit ConfigReader(std::string_view text) : text_(text) {}

  void error(const std::string& field, const std::string& message) {
    errors_.push_back({line_of_field(text_, field), field, message});
  }
  std::vector<ConfigError>& errors() { return errors_; }

  void check_keys(const json& obj, const std::string& prefix, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items())
      if (!allowed.count(key)) error(prefix + key, "unknown key");
  }

  template <class T>
  bool read(const json& obj, const std::string& prefix, const std::string& key, T& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return false;
    const std::string field = prefix + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) return type_error(field, "a boolean");
      out = it->template get<bool>();
    } else if constexpr (std::is_same_v<T, int>) {
      if (!it->is_number_integer()) return type_error(field, "an integer");
      const auto v = it->template get<long long>();
      if (v < INT32_MIN || v > INT32_MAX) return type_error(field, "an integer in 32-bit range");
      out = static_cast<int>(v);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!it->is_number_unsigned()) return type_error(field, "a non-negative integer");
      out = it->template get<std::uint64_t>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) return type_error(field, "a number");
      out = it->template get<double>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) return type_error(field, "a string");
      out = it->template get<std::string>();
    } else {
      static_assert(sizeof(T) == 0, "unsupported config field type");
    }
    return true;
  }

  template <class T>
  bool read(const json& obj, const std::string& prefix, const std::string& key, std::optional<T>& out) {
    T v{};
    if (!read(obj, prefix, key, v)) return false;
    out = v;
    return true;
  }

  // Enumerations spelled as strings.
  template <class E>
  bool read_enum(const json& obj, const std::string& prefix, const std::string& key, E& out,
                 const std::function<std::optional<E>(std::string_view)>& parse, std::string_view choices) {
    std::string s;
    if (!read(obj, prefix, key, s)) return false;
    if (auto v = parse(s)) {
      out = *v;
      return true;
    }
    error(prefix + key, "unknown value '" + s + "' (expected one of " + std::string(choices) + ")");
    return false;
  }

  bool read_doubles(const json& obj, const std::string& prefix, const std::string& key, std::vector<double>& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_array()) return type_error(prefix + key, "an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < it->size(); ++i) {
      if (!(*it)[i].is_number()) return type_error(prefix + key + "[" + std::to_string(i) + "]", "a number");
      v.push_back((*it)[i].get<double>());
    }
    out = std::move(v);
    return true;
  }

  bool read_object(const json& obj, const std::string& key, const json*& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_object()) return type_error(key, "an object");
    out = &*it;
    return true;
  }

 private:
  bool type_error(const std::string& field, const std::string& expected) {
    error(field, "type mismatch: expected " + expected);
    return false;
  }

  std::string_view text_;
  std::vector<ConfigError> errors_;
};

inline std::optional<ProblemKind> parse_problem_kind(std::string_view s) {
  if (s == "saddle") return ProblemKind::saddle;
  if (s == "auc") return ProblemKind::auc;
  return std::nullopt;
}

inline std::optional<ScheduleKind> parse_schedule_kind(std::string_view s) {
  if (s == "theorem1") return ScheduleKind::theorem1;
  if (s == "theorem2") return ScheduleKind::theorem2;
  if (s == "explicit") return ScheduleKind::explicit_rates;
  return std::nullopt;
}

inline std::optional<RatioMode> parse_ratio_mode(std::string_view s) {
  if (s == "shard") return RatioMode::shard;
  if (s == "pooled") return RatioMode::pooled;
  return std::nullopt;
}

inline void validate_config(const ExperimentConfig& c, ConfigReader& r) {
  auto at_least = [&](int v, int lo, const char* field) {
    if (v < lo) r.error(field, "must be >= " + std::to_string(lo) + " (got " + std::to_string(v) + ")");
  };
  auto positive = [&](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) r.error(field, "must be a finite number > 0");
  };
  auto unit_interval = [&](double v, const char* field) {
    if (!(v > 0.0 && v <= 1.0)) r.error(field, "must be in (0, 1]");
  };

  at_least(c.T, 1, "T");
  at_least(c.N, 1, "N");
  at_least(c.p, 1, "p");
  positive(c.tau, "tau");
  at_least(c.ns_iters, 1, "ns_iters");
  at_least(c.ns_degree, 1, "ns_degree");
  unit_interval(c.baseline_beta, "baseline_beta");
  positive(c.divergence_threshold, "divergence_threshold");
  positive(c.phi_tol, "phi_tol");
  if (c.seeds.empty()) r.error("seeds", "must list at least one seed");

  if (c.schedule == ScheduleKind::explicit_rates) {
    const std::pair<const std::optional<double>*, const char*> rates[] = {
        {&c.gamma_x, "gamma_x"}, {&c.gamma_y, "gamma_y"}, {&c.eta_x, "eta_x"},
        {&c.eta_y, "eta_y"},     {&c.beta_x, "beta_x"},   {&c.beta_y, "beta_y"}};
    for (const auto& [v, name] : rates) {
      if (!*v) {
        r.error(name, "required when schedule is explicit");
        continue;
      }
      if (name[0] == 'b')
        unit_interval(**v, name);
      else
        positive(**v, name);
    }
  } else {
    positive(c.constants.c1, "c1");
    positive(c.constants.c2, "c2");
    positive(c.constants.c3, "c3");
    // Range errors are still worth reporting next to the exclusion error.
    for (const auto& [v, name] : {std::pair{c.beta_x, "beta_x"}, std::pair{c.beta_y, "beta_y"}})
      if (v) unit_interval(*v, name);
  }

  if (!(c.noise.s > 1.0 && c.noise.s <= 2.0)) r.error("noise.s", "must be in (1, 2]");
  if (!(c.noise.sigma >= 0.0) || !std::isfinite(c.noise.sigma)) r.error("noise.sigma", "must be finite and >= 0");
  if (c.noise.family == NoiseFamily::gaussian && c.noise.s != 2.0)
    r.error("noise.family", "gaussian noise has bounded variance and requires s = 2");
  if (c.noise.family == NoiseFamily::none && c.noise.sigma != 0.0)
    r.error("noise.sigma", "must be 0 when the noise family is none");
  if ((c.noise.family == NoiseFamily::symmetrized_pareto || c.noise.family == NoiseFamily::student_t) &&
      !(c.noise.effective_tail_exponent() > c.noise.s && std::isfinite(c.noise.effective_tail_exponent())))
    r.error("noise.tail_exponent", "must exceed s");

  if (c.problem == ProblemKind::saddle) {
    const auto& s = c.saddle;
    at_least(s.dim_x, 1, "saddle.dim_x");
    at_least(s.dim_y, 1, "saddle.dim_y");
    at_least(s.x_cols, 1, "saddle.x_cols");
    at_least(s.y_cols, 1, "saddle.y_cols");
    positive(s.mu, "saddle.mu");
    if (!(s.amp >= 0.0) || !std::isfinite(s.amp)) r.error("saddle.amp", "must be finite and >= 0");
    if (!(s.hetero >= 0.0) || !std::isfinite(s.hetero)) r.error("saddle.hetero", "must be finite and >= 0");
  } else {
    const auto& a = c.auc;
    at_least(a.dim, 1, "auc.dim");
    at_least(a.n_per_client, 2, "auc.n_per_client");
    at_least(a.test_size, 2, "auc.test_size");
    at_least(a.batch_size, 1, "auc.batch_size");
    positive(a.feature_std, "auc.feature_std");
    if (!(a.separation >= 0.0) || !std::isfinite(a.separation))
      r.error("auc.separation", "must be finite and >= 0");
    if (!a.ratios.empty() && static_cast<int>(a.ratios.size()) != c.N)
      r.error("auc.ratios", "must list one ratio per client (N = " + std::to_string(c.N) + ")");
    auto check_ratio = [&](double v, const std::string& field) {
      if (!(v > 0.0 && v < 1.0)) {
        r.error(field, "must be in (0, 1)");
      } else if (std::lround(v * a.n_per_client) < 2 || a.n_per_client - std::lround(v * a.n_per_client) < 1) {
        r.error(field, "gives fewer than 2 positives or no negatives at n_per_client = " +
                           std::to_string(a.n_per_client));
      }
    };
    if (a.ratios.empty()) check_ratio(a.ratio, "auc.ratio");
    for (std::size_t i = 0; i < a.ratios.size(); ++i) check_ratio(a.ratios[i], "auc.ratios[" + std::to_string(i) + "]");
    if (a.test_ratio && !(*a.test_ratio > 0.0 && *a.test_ratio < 1.0)) r.error("auc.test_ratio", "must be in (0, 1)");
  }
}

}  // namespace detail

struct ConfigParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<ConfigError> errors;

  bool ok() const { return config.has_value(); }
};

/// Parses and validates a JSON configuration. Every error found is reported
/// with the line of the offending key (or of the syntax error).
inline ConfigParseResult parse_config(std::string_view text) {
  using detail::json;
  ConfigParseResult result;
  json root;
  try {
    root = json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    result.errors.push_back({detail::line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1), "",
                             std::string("syntax error: ") + e.what()});
    return result;
  }
  if (!root.is_object()) {
    result.errors.push_back({1, "", "top level must be an object"});
    return result;
  }

  detail::ConfigReader r(text);
  ExperimentConfig c;

  r.check_keys(root, "",
               {"algorithm", "problem", "saddle", "auc", "T", "N", "p", "schedule", "c1", "c2", "c3", "gamma_x",
                "gamma_y", "eta_x", "eta_y", "beta_x", "beta_y", "baseline_beta", "tau", "ns_iters", "ns_degree",
                "ns_mode", "zero_momentum_policy", "momentum_init", "local_recursive_momentum", "noise", "seed",
                "seeds", "output", "parallel_clients", "parallel_seeds", "halt_on_divergence",
                "divergence_threshold", "phi_tol"});

  r.read_enum<Algorithm>(root, "", "algorithm", c.algorithm, parse_algorithm,
                         "nsgda-m, muon-da, local-sgda-m, sgda-clip");
  r.read_enum<ProblemKind>(root, "", "problem", c.problem, detail::parse_problem_kind, "saddle, auc");
  r.read(root, "", "T", c.T);
  r.read(root, "", "N", c.N);
  r.read(root, "", "p", c.p);
  const bool has_schedule = r.read_enum<ScheduleKind>(root, "", "schedule", c.schedule, detail::parse_schedule_kind,
                                                      "theorem1, theorem2, explicit");
  r.read(root, "", "c1", c.constants.c1);
  r.read(root, "", "c2", c.constants.c2);
  r.read(root, "", "c3", c.constants.c3);
  r.read(root, "", "gamma_x", c.gamma_x);
  r.read(root, "", "gamma_y", c.gamma_y);
  r.read(root, "", "eta_x", c.eta_x);
  r.read(root, "", "eta_y", c.eta_y);
  r.read(root, "", "beta_x", c.beta_x);
  r.read(root, "", "beta_y", c.beta_y);
  r.read(root, "", "baseline_beta", c.baseline_beta);
  r.read(root, "", "tau", c.tau);
  r.read(root, "", "ns_iters", c.ns_iters);
  r.read(root, "", "ns_degree", c.ns_degree);
  r.read_enum<NsMode>(root, "", "ns_mode", c.ns_mode, parse_ns_mode, "iterative, exact-svd");
  r.read_enum<ZeroMomentumPolicy>(root, "", "zero_momentum_policy", c.zero_momentum_policy,
                                  parse_zero_momentum_policy, "skip, error");
  r.read_enum<MomentumInit>(root, "", "momentum_init", c.momentum_init, parse_momentum_init, "zero, warm-start");
  r.read(root, "", "local_recursive_momentum", c.local_recursive_momentum);
  r.read(root, "", "output", c.output);
  r.read(root, "", "parallel_clients", c.parallel_clients);
  r.read(root, "", "parallel_seeds", c.parallel_seeds);
  r.read(root, "", "halt_on_divergence", c.halt_on_divergence);
  r.read(root, "", "divergence_threshold", c.divergence_threshold);
  r.read(root, "", "phi_tol", c.phi_tol);

  // Schedule selector and explicit rates are mutually exclusive.
  if (c.schedule != ScheduleKind::explicit_rates) {
    for (const char* key : {"gamma_x", "gamma_y", "eta_x", "eta_y", "beta_x", "beta_y"})
      if (root.contains(key))
        r.error(key, std::string("explicit rate conflicts with schedule ") +
                         (has_schedule ? std::string(to_string(c.schedule)) : "theorem1 (the default)") +
                         "; set schedule to explicit or remove it");
  } else {
    for (const char* key : {"c1", "c2", "c3"})
      if (root.contains(key)) r.error(key, "schedule constants conflict with schedule explicit");
  }

  const bool has_seed = root.contains("seed"), has_seeds = root.contains("seeds");
  if (has_seed && has_seeds) {
    r.error("seeds", "give either seed or seeds, not both");
  } else if (has_seed) {
    std::uint64_t s = 0;
    if (r.read(root, "", "seed", s)) c.seeds = {s};
  } else if (has_seeds) {
    const auto& arr = root["seeds"];
    if (!arr.is_array()) {
      r.error("seeds", "type mismatch: expected an array of non-negative integers");
    } else {
      std::vector<std::uint64_t> seeds;
      bool ok = true;
      for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number_unsigned()) {
          r.error("seeds[" + std::to_string(i) + "]", "type mismatch: expected a non-negative integer");
          ok = false;
        } else {
          seeds.push_back(arr[i].get<std::uint64_t>());
        }
      }
      if (ok) c.seeds = std::move(seeds);
    }
  }

  const detail::json* obj = nullptr;
  if (r.read_object(root, "noise", obj)) {
    r.check_keys(*obj, "noise.", {"family", "s", "sigma", "tail_exponent"});
    r.read_enum<NoiseFamily>(*obj, "noise.", "family", c.noise.family, parse_noise_family,
                             "symmetrized-pareto, student-t, gaussian, none");
    r.read(*obj, "noise.", "s", c.noise.s);
    r.read(*obj, "noise.", "sigma", c.noise.sigma);
    r.read(*obj, "noise.", "tail_exponent", c.noise.tail_exponent);
  }
  obj = nullptr;
  if (r.read_object(root, "saddle", obj)) {
    if (c.problem != ProblemKind::saddle) r.error("saddle", "section given but problem is not saddle");
    auto& s = c.saddle;
    r.check_keys(*obj, "saddle.", {"dim_x", "dim_y", "x_cols", "y_cols", "mu", "amp", "hetero", "problem_seed"});
    r.read(*obj, "saddle.", "dim_x", s.dim_x);
    r.read(*obj, "saddle.", "dim_y", s.dim_y);
    r.read(*obj, "saddle.", "x_cols", s.x_cols);
    r.read(*obj, "saddle.", "y_cols", s.y_cols);
    r.read(*obj, "saddle.", "mu", s.mu);
    r.read(*obj, "saddle.", "amp", s.amp);
    r.read(*obj, "saddle.", "hetero", s.hetero);
    r.read(*obj, "saddle.", "problem_seed", s.problem_seed);
  }
  obj = nullptr;
  if (r.read_object(root, "auc", obj)) {
    if (c.problem != ProblemKind::auc) r.error("auc", "section given but problem is not auc");
    auto& a = c.auc;
    r.check_keys(*obj, "auc.",
                 {"dim", "separation", "feature_std", "n_per_client", "ratio", "ratios", "test_size", "test_ratio",
                  "batch_size", "ratio_mode", "data_seed"});
    r.read(*obj, "auc.", "dim", a.dim);
    r.read(*obj, "auc.", "separation", a.separation);
    r.read(*obj, "auc.", "feature_std", a.feature_std);
    r.read(*obj, "auc.", "n_per_client", a.n_per_client);
    r.read(*obj, "auc.", "ratio", a.ratio);
    r.read_doubles(*obj, "auc.", "ratios", a.ratios);
    r.read(*obj, "auc.", "test_size", a.test_size);
    r.read(*obj, "auc.", "test_ratio", a.test_ratio);
    r.read(*obj, "auc.", "batch_size", a.batch_size);
    r.read_enum<RatioMode>(*obj, "auc.", "ratio_mode", a.ratio_mode, detail::parse_ratio_mode, "shard, pooled");
    r.read(*obj, "auc.", "data_seed", a.data_seed);
    if (obj->contains("ratio") && obj->contains("ratios")) r.error("auc.ratios", "give either ratio or ratios, not both");
  }

  detail::validate_config(c, r);
  if (r.errors().empty())
    result.config = std::move(c);
  else
    result.errors = std::move(r.errors());
  return result;
}

inline ExperimentConfig parse_config_or_throw(std::string_view text) {
  auto res = parse_config(text);
  if (!res.ok()) throw ConfigErrors(std::move(res.errors));
  return std::move(*res.config);
}

/// Canonical JSON text of a configuration; parse_config inverts it.
inline std::string serialize_config(const ExperimentConfig& c) {
  using detail::json;
  json j = json::object();
  j["algorithm"] = to_string(c.algorithm);
  j["problem"] = to_string(c.problem);
  j["T"] = c.T;
  j["N"] = c.N;
  j["p"] = c.p;
  j["schedule"] = to_string(c.schedule);
  if (c.schedule == ScheduleKind::explicit_rates) {
    j["gamma_x"] = *c.gamma_x;
    j["gamma_y"] = *c.gamma_y;
    j["eta_x"] = *c.eta_x;
    j["eta_y"] = *c.eta_y;
    j["beta_x"] = *c.beta_x;
    j["beta_y"] = *c.beta_y;
  } else {
    j["c1"] = c.constants.c1;
    j["c2"] = c.constants.c2;
    j["c3"] = c.constants.c3;
  }
  j["baseline_beta"] = c.baseline_beta;
  j["tau"] = c.tau;
  j["ns_iters"] = c.ns_iters;
  j["ns_degree"] = c.ns_degree;
  j["ns_mode"] = to_string(c.ns_mode);
  j["zero_momentum_policy"] = to_string(c.zero_momentum_policy);
  j["momentum_init"] = to_string(c.momentum_init);
  j["local_recursive_momentum"] = c.local_recursive_momentum;
  json noise = {{"family", to_string(c.noise.family)}, {"s", c.noise.s}, {"sigma", c.noise.sigma}};
  if (c.noise.tail_exponent) noise["tail_exponent"] = *c.noise.tail_exponent;
  j["noise"] = noise;
  j["seeds"] = c.seeds;
  if (c.output) j["output"] = *c.output;
  j["parallel_clients"] = c.parallel_clients;
  j["parallel_seeds"] = c.parallel_seeds;
  j["halt_on_divergence"] = c.halt_on_divergence;
  j["divergence_threshold"] = c.divergence_threshold;
  j["phi_tol"] = c.phi_tol;
  if (c.problem == ProblemKind::saddle) {
    const auto& s = c.saddle;
    j["saddle"] = {{"dim_x", s.dim_x}, {"dim_y", s.dim_y}, {"x_cols", s.x_cols}, {"y_cols", s.y_cols},
                   {"mu", s.mu},       {"amp", s.amp},     {"hetero", s.hetero}, {"problem_seed", s.problem_seed}};
  } else {
    const auto& a = c.auc;
    json auc = {{"dim", a.dim},
                {"separation", a.separation},
                {"feature_std", a.feature_std},
                {"n_per_client", a.n_per_client},
                {"test_size", a.test_size},
                {"batch_size", a.batch_size},
                {"ratio_mode", to_string(a.ratio_mode)},
                {"data_seed", a.data_seed}};
    if (a.ratios.empty())
      auc["ratio"] = a.ratio;
    else
      auc["ratios"] = a.ratios;
    if (a.test_ratio) auc["test_ratio"] = *a.test_ratio;
    j["auc"] = auc;
  }
  return j.dump(2) + "\n";
}

}  // namespace fedminimax
