#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fedminimax/auc.hpp"
#include "fedminimax/config.hpp"
#include "fedminimax/fedopt.hpp"
#include "fedminimax/metrics.hpp"
#include "fedminimax/saddle.hpp"
#include "fedminimax/trace_io.hpp"

namespace fedminimax {

/// Process exit statuses of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitInvariant = 2, kExitIo = 3 };

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputEnvVar = "FEDMINIMAX_OUT";

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::unique_ptr<MinimaxProblem> make_problem(const ExperimentConfig& c) {
  if (c.problem == ProblemKind::saddle) {
    const auto& s = c.saddle;
    auto shape = [](int rows, int cols) {
      return cols > 1 ? Shape::matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols))
                      : Shape::vector(static_cast<std::size_t>(rows));
    };
    return std::make_unique<SaddleProblem>(make_saddle_problem(c.N, shape(s.dim_x, s.x_cols), shape(s.dim_y, s.y_cols),
                                                               s.mu, s.amp, s.hetero, s.problem_seed));
  }
  const auto& a = c.auc;
  const auto ratios = a.client_ratios(c.N);
  const auto dim = static_cast<std::size_t>(a.dim);
  auto shards = gen_imbalanced_data(a.n_per_client, ratios, dim, a.separation, a.data_seed, a.feature_std);
  double mean_ratio = 0.0;
  for (double r : ratios) mean_ratio += r / static_cast<double>(ratios.size());
  auto test = gen_imbalanced_data(a.test_size, {a.test_ratio.value_or(mean_ratio)}, dim, a.separation, a.data_seed,
                                  a.feature_std, StreamPurpose::test);
  AucOptions opts;
  opts.batch_size = a.batch_size;
  opts.ratio_mode = a.ratio_mode;
  opts.test_set = std::move(test.front());
  return std::make_unique<AucProblem>(std::move(shards), dim, std::move(opts));
}

/// Rates from the configured schedule plus the algorithm-level settings.
/// Under a theorem schedule the baselines use baseline_beta for momentum.
inline HyperParams resolve_hyperparams(const ExperimentConfig& c, const MinimaxProblem& problem) {
  HyperParams hp;
  if (c.schedule == ScheduleKind::explicit_rates) {
    hp.gamma_x = *c.gamma_x;
    hp.gamma_y = *c.gamma_y;
    hp.eta_x = *c.eta_x;
    hp.eta_y = *c.eta_y;
    hp.beta_x = *c.beta_x;
    hp.beta_y = *c.beta_y;
    hp.N = c.N;
    hp.p = c.p;
    hp.T = c.T;
  } else {
    const auto sched = c.schedule == ScheduleKind::theorem1 ? theorem1_schedule : theorem2_schedule;
    hp = sched(c.N, c.p, c.T, problem.smoothness(), c.constants);
    if (c.algorithm == Algorithm::local_sgda_m || c.algorithm == Algorithm::sgda_clip)
      hp.beta_x = hp.beta_y = c.baseline_beta;
  }
  hp.tau = c.tau;
  hp.ns_iters = c.ns_iters;
  hp.ns_degree = c.ns_degree;
  hp.ns_mode = c.ns_mode;
  hp.zero_momentum_policy = c.zero_momentum_policy;
  hp.validate();
  return hp;
}

/// One row of a run or sweep summary.
struct RunSummary {
  Algorithm algorithm = Algorithm::nsgda_m;
  int p = 1, T = 1, N = 1;
  double s = 2.0;
  std::uint64_t seed = 0;
  double first_window_mean = 0.0;  // first 10% of rounds
  double final_window_mean = 0.0;  // last 10% of rounds
  std::optional<double> final_auc;
  bool diverged = false;
};

inline constexpr const char* kSummaryHeader =
    "algorithm,p,T,N,s,seed,first_window_mean,final_window_mean,final_auc,diverged";

inline RunSummary summarize(const ExperimentConfig& c, const RunTrace& trace) {
  RunSummary s;
  s.algorithm = trace.algorithm;
  s.p = c.p;
  s.T = c.T;
  s.N = c.N;
  s.s = c.noise.s;
  s.seed = trace.seed;
  s.first_window_mean = metrics::window_mean(trace, 0.1, false);
  s.final_window_mean = metrics::window_mean(trace, 0.1, true);
  if (!trace.records.empty()) s.final_auc = trace.records.back().auc;
  s.diverged = trace.diverged;
  return s;
}

inline void write_summary_row(const RunSummary& s, std::ostream& os) {
  os << to_string(s.algorithm) << ',' << s.p << ',' << s.T << ',' << s.N << ',' << format_double(s.s) << ','
     << s.seed << ',' << format_double(s.first_window_mean) << ',' << format_double(s.final_window_mean) << ',';
  if (s.final_auc) os << format_double(*s.final_auc);
  os << ',' << (s.diverged ? 1 : 0) << '\n';
}

struct RunOutput {
  HyperParams hp;
  RunTrace trace;
  metrics::InvariantReport report;
};

/// Builds the problem, resolves the rates and runs one seed.
inline RunOutput execute_run(const ExperimentConfig& c, std::uint64_t seed) {
  const auto problem = make_problem(c);
  RunOutput out;
  out.hp = resolve_hyperparams(c, *problem);
  out.trace = run(c.algorithm, *problem, out.hp, c.noise, seed, c.run_options());
  out.report = metrics::verify_invariants(out.trace, out.hp);
  return out;
}

/// Runs every seed, sequentially unless parallel_seeds is set. Results are
/// returned in seed order either way.
inline std::vector<RunOutput> execute_seeds(const ExperimentConfig& c) {
  std::vector<RunOutput> outs;
  if (c.parallel_seeds && c.seeds.size() > 1) {
    std::vector<std::future<RunOutput>> futures;
    for (auto seed : c.seeds) futures.push_back(std::async(std::launch::async, execute_run, std::cref(c), seed));
    for (auto& f : futures) outs.push_back(f.get());
  } else {
    for (auto seed : c.seeds) outs.push_back(execute_run(c, seed));
  }
  return outs;
}

/// --out, then the config's output, then $FEDMINIMAX_OUT, then ".".
inline std::filesystem::path resolve_output_dir(const std::optional<std::string>& cli_out,
                                                const ExperimentConfig& c) {
  if (cli_out) return *cli_out;
  if (c.output) return *c.output;
  if (const char* env = std::getenv(kOutputEnvVar); env && *env) return env;
  return ".";
}

inline std::string trace_file_name(Algorithm alg, std::uint64_t seed) {
  return "trace_" + std::string(to_string(alg)) + "_seed" + std::to_string(seed) + ".csv";
}

namespace detail {

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << contents;
  os.close();
  if (!os) throw IoError("failed writing " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace detail

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config_or_throw(detail::read_file(path));
}

/// Runs every configured seed and writes one trace CSV per (algorithm, seed)
/// plus summary.csv. Returns an exit status.
inline int cmd_run(const ExperimentConfig& c, const std::filesystem::path& out_dir, std::ostream& out,
                   std::ostream& err) {
  try {
    detail::ensure_dir(out_dir);
    const auto outs = execute_seeds(c);
    std::ostringstream summary;
    summary << kSummaryHeader << '\n';
    bool all_ok = true;
    for (const auto& o : outs) {
      const auto path = out_dir / trace_file_name(o.trace.algorithm, o.trace.seed);
      detail::write_file(path, trace_to_csv(o.trace));
      write_summary_row(summarize(c, o.trace), summary);
      out << "wrote " << path.string() << "\n" << o.report.to_text();
      if (o.trace.diverged) out << "divergence detected in round " << *o.trace.diverged_round << "\n";
      all_ok = all_ok && o.report.all_passed();
    }
    detail::write_file(out_dir / "summary.csv", summary.str());
    return all_ok ? kExitOk : kExitInvariant;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

/// A sweep axis and its values, e.g. "seed=1,2,3".
struct SweepAxis {
  std::string name;
  std::vector<std::string> values;
};

/// Parses "algorithm=nsgda-m,muon-da;seed=1,2,3". Axes: algorithm, p, T, N, s, seed.
inline std::vector<SweepAxis> parse_axes(std::string_view spec) {
  static const std::set<std::string> known{"algorithm", "p", "T", "N", "s", "seed"};
  std::vector<SweepAxis> axes;
  std::set<std::string> seen;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto semi = spec.find(';', start);
    const auto part = spec.substr(start, semi == std::string_view::npos ? std::string_view::npos : semi - start);
    start = semi == std::string_view::npos ? spec.size() + 1 : semi + 1;
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument("sweep axes: expected name=values in '" + std::string(part) + "'");
    SweepAxis axis{std::string(part.substr(0, eq)), {}};
    if (!known.count(axis.name)) throw InvalidArgument("sweep axes: unknown axis '" + axis.name + "'");
    if (!seen.insert(axis.name).second) throw InvalidArgument("sweep axes: axis '" + axis.name + "' given twice");
    auto values = part.substr(eq + 1);
    std::size_t vs = 0;
    while (vs <= values.size()) {
      const auto comma = values.find(',', vs);
      const auto v = values.substr(vs, comma == std::string_view::npos ? std::string_view::npos : comma - vs);
      vs = comma == std::string_view::npos ? values.size() + 1 : comma + 1;
      if (v.empty()) throw InvalidArgument("sweep axes: empty value on axis '" + axis.name + "'");
      axis.values.emplace_back(v);
    }
    axes.push_back(std::move(axis));
  }
  if (axes.empty()) throw InvalidArgument("sweep axes: empty grid");
  return axes;
}

/// The configuration of every grid cell, in row-major order over the axes
/// (the last axis varies fastest). Each cell runs one seed; without a seed
/// axis the configured seeds form an implicit last axis.
inline std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base, const std::vector<SweepAxis>& axes_in) {
  auto axes = axes_in;
  const bool has_seed = std::any_of(axes.begin(), axes.end(), [](const auto& a) { return a.name == "seed"; });
  if (!has_seed) {
    SweepAxis seeds{"seed", {}};
    for (auto s : base.seeds) seeds.values.push_back(std::to_string(s));
    axes.push_back(std::move(seeds));
  }
  for (const auto& a : axes)
    if (a.values.empty()) throw InvalidArgument("sweep axes: empty grid");

  std::vector<ExperimentConfig> cells;
  std::vector<std::size_t> idx(axes.size(), 0);
  for (;;) {
    // Apply the cell's values through the JSON form so each cell is validated
    // exactly like a configuration file.
    auto j = nlohmann::json::parse(serialize_config(base));
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const auto& name = axes[a].name;
      const auto& v = axes[a].values[idx[a]];
      try {
        if (name == "algorithm") {
          j["algorithm"] = v;
        } else if (name == "s") {
          j["noise"]["s"] = std::stod(v);
        } else if (name == "seed") {
          j.erase("seeds");
          j["seed"] = std::stoull(v);
        } else {
          j[name] = std::stoi(v);
        }
      } catch (const std::logic_error&) {
        throw InvalidArgument("sweep axes: bad value '" + v + "' on axis '" + name + "'");
      }
    }
    cells.push_back(parse_config_or_throw(j.dump(2)));

    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++idx[a] < axes[a].values.size()) break;
      idx[a] = 0;
      if (a == 0) return cells;
    }
  }
}

/// One summary row per grid cell, written to <out>/sweep_summary.csv.
inline int cmd_sweep(const ExperimentConfig& base, std::string_view axes_spec, const std::filesystem::path& out_dir,
                     std::ostream& out, std::ostream& err) {
  try {
    const auto cells = expand_grid(base, parse_axes(axes_spec));
    detail::ensure_dir(out_dir);
    std::ostringstream summary;
    summary << kSummaryHeader << '\n';
    bool all_ok = true;
    for (const auto& cell : cells) {
      const auto o = execute_run(cell, cell.seeds.front());
      const auto row = summarize(cell, o.trace);
      write_summary_row(row, summary);
      out << to_string(row.algorithm) << " p=" << row.p << " T=" << row.T << " N=" << row.N
          << " s=" << format_double(row.s) << " seed=" << row.seed
          << " final_window_mean=" << format_double(row.final_window_mean)
          << (o.report.all_passed() ? "" : " INVARIANT FAILURE") << "\n";
      all_ok = all_ok && o.report.all_passed();
    }
    const auto path = out_dir / "sweep_summary.csv";
    detail::write_file(path, summary.str());
    out << "wrote " << path.string() << " (" << cells.size() << " rows)\n";
    return all_ok ? kExitOk : kExitInvariant;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

/// Checks a trace CSV against the invariants implied by the configuration's
/// rates. Prints the report followed by its CSV form.
inline int cmd_verify(const std::filesystem::path& trace_path, const ExperimentConfig& base, std::ostream& out,
                      std::ostream& err) {
  try {
    std::istringstream is(detail::read_file(trace_path));
    RunTrace trace = read_trace_csv(is);
    ExperimentConfig c = base;
    if (!trace.records.empty()) c.algorithm = trace.algorithm;
    const auto problem = make_problem(c);
    const HyperParams hp = resolve_hyperparams(c, *problem);
    trace.rounds_planned = hp.T;
    trace.cols_x = problem->shape_x().cols;
    trace.cols_y = problem->shape_y().cols;
    const auto report = metrics::verify_invariants(trace, hp);
    out << report.to_text() << "\n" << report.to_csv();
    return report.all_passed() ? kExitOk : kExitInvariant;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const TraceParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace fedminimax
