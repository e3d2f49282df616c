#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fedminimax/core.hpp"
#include "fedminimax/problem.hpp"
#include "fedminimax/trace.hpp"

namespace fedminimax::metrics {

struct PhiOptions {
  bool use_closed_form = true;
  int max_iters = 100000;
  std::optional<Matrix> y_init;
  bool record_ascent = false;
};

struct PhiEval {
  double value = 0.0;
  Matrix grad;
  Matrix y;  // the (approximate) maximizer used
  int iterations = 0;
  // Bound on ||grad - grad Phi(x)||: L_f * tol / mu on the ascent path, 0 for closed form.
  double grad_error_bound = 0.0;
  std::vector<double> ascent_values;  // f(x, y_k), when requested
};

/// Phi(x) = max_y f(x, y) and its gradient grad_x f(x, y*(x)). Uses the
/// problem's closed forms when present, otherwise full-batch gradient ascent
/// on y with step 1/L_f until ||grad_y f|| <= tol.
inline PhiEval phi_value_and_grad(const MinimaxProblem& problem, const Matrix& x, double tol,
                                  const PhiOptions& opts = {}) {
  if (!(tol > 0.0)) throw InvalidArgument("phi_value_and_grad: tol must be > 0");
  PhiEval out;

  if (opts.use_closed_form) {
    if (auto ys = problem.y_star(x)) {
      out.y = std::move(*ys);
      out.value = problem.f_value(x, out.y);
      if (auto g = problem.phi_grad(x))
        out.grad = std::move(*g);
      else
        out.grad = full_grad(problem, x, out.y).x;
      return out;
    }
  }

  const SmoothnessInfo sm = problem.smoothness();
  const double step = 1.0 / sm.L_f;
  Matrix y = opts.y_init.value_or(problem.initial_y());
  for (int k = 0;; ++k) {
    if (opts.record_ascent) out.ascent_values.push_back(problem.f_value(x, y));
    GradPair g = full_grad(problem, x, y);
    if (g.y.frobenius_norm() <= tol) {
      out.iterations = k;
      out.y = std::move(y);
      out.grad = std::move(g.x);
      break;
    }
    if (k >= opts.max_iters)
      throw ConvergenceFailure("phi_value_and_grad: inner ascent did not reach tolerance within " +
                               std::to_string(opts.max_iters) + " iterations");
    y += g.y * step;
  }
  out.value = problem.f_value(x, out.y);
  out.grad_error_bound = sm.L_f * tol / sm.mu;
  return out;
}

/// P(score_+ > score_-) + 0.5 P(tie), counted exactly over all pairs.
inline double auc_score(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("auc_score: size mismatch");
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1)
      pos.push_back(scores[i]);
    else if (labels[i] == -1)
      neg.push_back(scores[i]);
    else
      throw InvalidArgument("auc_score: labels must be +1 or -1");
  }
  if (pos.empty() || neg.empty()) throw InvalidArgument("auc_score: both classes must be present");

  // Twice the Mann–Whitney count, kept integral so the result is exact.
  unsigned long long twice = 0;
  for (double sp : pos)
    for (double sn : neg) twice += sp > sn ? 2u : (sp == sn ? 1u : 0u);
  return static_cast<double>(twice) / (2.0 * static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

/// Per-step, per-round bounds implied by the step rule of each algorithm.
struct StepBounds {
  double local_x = 0.0;  // one local step
  double local_y = 0.0;
  double server_x = 0.0;  // one server step
  double server_y = 0.0;
};

inline StepBounds step_bounds(Algorithm alg, const HyperParams& hp, std::size_t cols_x, std::size_t cols_y) {
  double fx = 1.0, fy = 1.0;
  if (alg == Algorithm::muon_da) {
    fx = std::sqrt(static_cast<double>(cols_x));
    fy = std::sqrt(static_cast<double>(cols_y));
  } else if (alg == Algorithm::sgda_clip) {
    fx = fy = hp.tau;
  }
  return {hp.eta_x * fx, hp.eta_y * fy, hp.gamma_x * fx, hp.gamma_y * fy};
}

inline constexpr double kBoundSlack = 1e-9;
inline constexpr double kCenteringRelTol = 1e-7;
inline constexpr double kPotentialTol = 1e-10;

struct InvariantEntry {
  std::string name;
  int rounds_checked = 0;
  double max_violation = 0.0;
  bool passed = true;
  bool skipped = false;
  std::string note;
};

struct InvariantReport {
  std::vector<InvariantEntry> entries;

  bool all_passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.skipped || e.passed; });
  }

  const InvariantEntry* find(std::string_view name) const {
    for (const auto& e : entries)
      if (e.name == name) return &e;
    return nullptr;
  }

  std::vector<std::string> failed_names() const {
    std::vector<std::string> out;
    for (const auto& e : entries)
      if (!e.skipped && !e.passed) out.push_back(e.name);
    return out;
  }

  std::string to_text() const {
    std::ostringstream os;
    for (const auto& e : entries) {
      char buf[256];
      if (e.skipped)
        std::snprintf(buf, sizeof buf, "SKIP  %-20s %s\n", e.name.c_str(), e.note.c_str());
      else
        std::snprintf(buf, sizeof buf, "%s  %-20s rounds=%d max_violation=%.6g%s%s\n", e.passed ? "PASS" : "FAIL",
                      e.name.c_str(), e.rounds_checked, e.max_violation, e.note.empty() ? "" : "  ",
                      e.note.c_str());
      os << buf;
    }
    os << (all_passed() ? "all invariants passed\n" : "invariant violations detected\n");
    return os.str();
  }

  // Machine-readable summary: name,status,rounds_checked,max_violation
  std::string to_csv() const {
    std::ostringstream os;
    os << "invariant,status,rounds_checked,max_violation\n";
    for (const auto& e : entries) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", e.max_violation);
      os << e.name << ',' << (e.skipped ? "skip" : (e.passed ? "pass" : "fail")) << ',' << e.rounds_checked << ','
         << buf << '\n';
    }
    return os.str();
  }
};

namespace detail {

// Accumulates max(value - bound, 0) over rounds; passes when the worst excess
// is within `slack`.
class BoundCheck {
 public:
  BoundCheck(std::string name, double slack) : slack_(slack) { entry_.name = std::move(name); }

  void observe(double value, double bound) {
    ++entry_.rounds_checked;
    const double excess = std::isfinite(value) ? std::max(value - bound, 0.0) : INFINITY;
    entry_.max_violation = std::max(entry_.max_violation, excess);
  }

  void skip(std::string note) {
    entry_.skipped = true;
    entry_.note = std::move(note);
  }

  InvariantEntry finish() {
    if (!entry_.skipped) entry_.passed = entry_.max_violation <= slack_;
    return entry_;
  }

 private:
  double slack_;
  InvariantEntry entry_;
};

}  // namespace detail

/// Checks the trace-level guarantees of the federated algorithms: local drift
/// and server step bounds, control-variate centering, boundedness of the
/// iterates, finiteness, the potential identity and the record count.
/// Invariants whose diagnostics are absent from the trace (e.g. a trace read
/// back from CSV) are reported as skipped.
inline InvariantReport verify_invariants(const RunTrace& trace, const HyperParams& hp) {
  const Algorithm alg = trace.algorithm;
  const StepBounds b = step_bounds(alg, hp, trace.cols_x, trace.cols_y);
  const bool bounded = has_bounded_steps(alg);
  const bool cv = uses_control_variates(alg);
  const double p = static_cast<double>(hp.p);

  detail::BoundCheck drift_x("drift_x", kBoundSlack), drift_y("drift_y", kBoundSlack);
  detail::BoundCheck server_x("server_step_x", kBoundSlack), server_y("server_step_y", kBoundSlack);
  detail::BoundCheck bounded_x("boundedness_x", kBoundSlack), bounded_y("boundedness_y", kBoundSlack);
  detail::BoundCheck center_x("centering_x", 0.0), center_y("centering_y", 0.0);
  detail::BoundCheck clip("clip_norm", kBoundSlack);
  detail::BoundCheck finite("finite", 0.0), potential("potential_identity", 0.0);

  bool saw_center = false, saw_disp = false, saw_clip = false, saw_phi = false;
  for (const auto& r : trace.records) {
    if (bounded) {
      drift_x.observe(r.max_drift_x, p * b.local_x);
      drift_y.observe(r.max_drift_y, p * b.local_y);
      server_x.observe(r.server_step_x, b.server_x);
      server_y.observe(r.server_step_y, b.server_y);
      if (r.displacement_x && r.displacement_y) {
        saw_disp = true;
        bounded_x.observe(*r.displacement_x, r.t * b.server_x);
        bounded_y.observe(*r.displacement_y, r.t * b.server_y);
      }
      const bool all_finite = std::isfinite(r.grad_phi_norm) && std::isfinite(r.f_value) &&
                              std::isfinite(r.grad_err_x) && std::isfinite(r.grad_err_y) &&
                              std::isfinite(r.max_drift_x) && std::isfinite(r.max_drift_y) &&
                              std::isfinite(r.server_step_x) && std::isfinite(r.server_step_y) &&
                              std::isfinite(r.potential) && (!r.auc || std::isfinite(*r.auc));
      finite.observe(all_finite ? 0.0 : 1.0, 0.0);
    }
    if (cv && r.t >= 1 && r.centering_x && r.centering_y && r.g_prev_norm_x && r.g_prev_norm_y) {
      saw_center = true;
      center_x.observe(*r.centering_x, kCenteringRelTol * (1.0 + *r.g_prev_norm_x));
      center_y.observe(*r.centering_y, kCenteringRelTol * (1.0 + *r.g_prev_norm_y));
    }
    if (alg == Algorithm::sgda_clip && r.max_clip_norm) {
      saw_clip = true;
      clip.observe(*r.max_clip_norm, hp.tau);
    }
    if (r.phi_value) {
      saw_phi = true;
      const double expected = 4.0 * *r.phi_value - r.f_value;
      potential.observe(std::abs(r.potential - expected), kPotentialTol * std::max(1.0, std::abs(expected)));
    }
  }

  if (!bounded) {
    const char* why = "unnormalized baseline has no step bound";
    drift_x.skip(why);
    drift_y.skip(why);
    server_x.skip(why);
    server_y.skip(why);
    bounded_x.skip(why);
    bounded_y.skip(why);
    finite.skip(why);
  } else if (!saw_disp) {
    bounded_x.skip("displacement not recorded");
    bounded_y.skip("displacement not recorded");
  }
  if (!cv) {
    center_x.skip("algorithm has no control variates");
    center_y.skip("algorithm has no control variates");
  } else if (!saw_center) {
    center_x.skip("centering residual not recorded");
    center_y.skip("centering residual not recorded");
  }
  if (alg != Algorithm::sgda_clip)
    clip.skip("not a clipping algorithm");
  else if (!saw_clip)
    clip.skip("clip norms not recorded");
  if (!saw_phi) potential.skip("Phi not recorded");

  InvariantReport report;
  for (auto* c : {&drift_x, &drift_y, &server_x, &server_y, &bounded_x, &bounded_y, &center_x, &center_y, &clip,
                  &finite, &potential})
    report.entries.push_back(c->finish());

  InvariantEntry count{"record_count", 1, 0.0, true, false, ""};
  const int expected = trace.rounds_planned;
  const int got = static_cast<int>(trace.records.size());
  if (trace.diverged && got < expected) {
    count.note = "run halted after divergence";
  } else if (got != expected) {
    count.passed = false;
    count.max_violation = std::abs(expected - got);
    count.note = "expected " + std::to_string(expected) + " records, found " + std::to_string(got);
  }
  report.entries.push_back(count);
  return report;
}

/// Mean of grad_phi_norm over the first / last `fraction` of the rounds
/// (at least one round each).
inline double window_mean(const RunTrace& trace, double fraction, bool last) {
  const auto n = trace.records.size();
  if (n == 0) throw InvalidArgument("window_mean: empty trace");
  const auto w = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n))));
  double acc = 0.0;
  for (std::size_t k = 0; k < w; ++k) acc += trace.records[last ? n - w + k : k].grad_phi_norm;
  return acc / static_cast<double>(w);
}

}  // namespace fedminimax::metrics
