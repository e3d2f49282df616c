#pragma once

#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "fedminimax/core.hpp"
#include "fedminimax/linalg.hpp"
#include "fedminimax/metrics.hpp"
#include "fedminimax/noise.hpp"
#include "fedminimax/problem.hpp"
#include "fedminimax/trace.hpp"

namespace fedminimax {

/// Momentum norms at or below this are treated as zero.
inline constexpr double kZeroMomentumTol = 1e-15;

enum class Direction { descend, ascend };

/// How u_{-1}, g_{-1} and g^(n)_{-1} are initialized.
enum class MomentumInit {
  zero,        // all zero: the round-0 corrections vanish and u = beta * grad
  warm_start,  // deterministic gradients at (x_0, y_0)
};

inline std::string_view to_string(MomentumInit m) { return m == MomentumInit::zero ? "zero" : "warm-start"; }

inline std::optional<MomentumInit> parse_momentum_init(std::string_view s) {
  if (s == "zero") return MomentumInit::zero;
  if (s == "warm-start") return MomentumInit::warm_start;
  return std::nullopt;
}

struct ServerState {
  Matrix x, y;      // x_t, y_t
  Matrix u, v;      // u_{t-1}, v_{t-1}
  Matrix g_x, g_y;  // g_{x,t-1}, g_{y,t-1}
  int round = 0;
};

struct ClientState {
  Matrix x_local, y_local;
  Matrix g_local_x, g_local_y;  // g^(n)_{t-1}
  Matrix grad_accum_x, grad_accum_y;
};

struct ClientResult {
  Matrix x_final, y_final;
  Matrix g_local_x, g_local_y;       // round averages of the local gradient samples
  Matrix momentum_x, momentum_y;     // last local momentum (used by the recursive baseline)
  std::vector<double> drift_x;       // ||x^(n)_{t,i} - x_t||, i = 1..p
  std::vector<double> drift_y;
  double max_clip_norm = 0.0;
};

struct RunOptions {
  MomentumInit momentum_init = MomentumInit::zero;
  // Variant: carry the local momentum across local steps instead of
  // restarting each step from the global momentum.
  bool local_recursive_momentum = false;
  bool parallel_clients = false;
  bool halt_on_divergence = false;
  double divergence_threshold = 1e8;
  double phi_tol = 1e-8;
};

/// u = beta (grad + g_prev - g_local_prev) + (1 - beta) u_prev.
inline Matrix local_momentum(const Matrix& grad_sample, const Matrix& g_global_prev, const Matrix& g_local_prev,
                             const Matrix& u_global_prev, double beta) {
  if (!grad_sample.same_shape(g_global_prev) || !grad_sample.same_shape(g_local_prev) ||
      !grad_sample.same_shape(u_global_prev))
    throw InvalidArgument("local_momentum: shape mismatch");
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("local_momentum: beta must be in (0,1]");
  Matrix out(grad_sample.rows(), grad_sample.cols());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = beta * (grad_sample[k] + g_global_prev[k] - g_local_prev[k]) + (1.0 - beta) * u_global_prev[k];
  return out;
}

namespace detail {

inline double sign(Direction d) { return d == Direction::descend ? -1.0 : 1.0; }

// True when the step must be skipped; throws under the error policy.
inline bool degenerate(const Matrix& m, ZeroMomentumPolicy policy, const char* who) {
  if (m.frobenius_norm() > kZeroMomentumTol) return false;
  if (policy == ZeroMomentumPolicy::error)
    throw DegenerateMomentum(std::string(who) + ": momentum norm is below the zero tolerance");
  return true;
}

}  // namespace detail

/// z -/+ eta * m / ||m||.
inline Matrix normalized_step(const Matrix& z, const Matrix& m, double eta, Direction dir,
                              ZeroMomentumPolicy policy = ZeroMomentumPolicy::skip) {
  if (!(eta > 0.0)) throw InvalidArgument("normalized_step: eta must be > 0");
  if (!z.same_shape(m)) throw InvalidArgument("normalized_step: shape mismatch");
  if (detail::degenerate(m, policy, "normalized_step")) return z;
  return z + m * (detail::sign(dir) * eta / m.frobenius_norm());
}

/// Z -/+ eta * polar(M), with M viewed as a matrix of the given shape.
inline Matrix muon_step(const Matrix& z, const Matrix& m, double eta, Direction dir, const PolarSettings& ns,
                        ZeroMomentumPolicy policy = ZeroMomentumPolicy::skip) {
  if (!(eta > 0.0)) throw InvalidArgument("muon_step: eta must be > 0");
  if (!z.same_shape(m)) throw InvalidArgument("muon_step: shape mismatch");
  if (detail::degenerate(m, policy, "muon_step")) return z;
  return z + linalg::polar(m, ns) * (detail::sign(dir) * eta);
}

/// z -/+ eta * min(1, tau / ||m||) m.
inline Matrix clip_step(const Matrix& z, const Matrix& m, double eta, double tau, Direction dir,
                        double* clipped_norm = nullptr) {
  if (!(eta > 0.0) || !(tau > 0.0)) throw InvalidArgument("clip_step: eta and tau must be > 0");
  if (!z.same_shape(m)) throw InvalidArgument("clip_step: shape mismatch");
  const double norm = m.frobenius_norm();
  const double scale = norm > tau ? tau / norm : 1.0;
  if (clipped_norm) *clipped_norm = scale * norm;
  return z + m * (detail::sign(dir) * eta * scale);
}

namespace detail {

inline Matrix apply_step(Algorithm alg, const Matrix& z, const Matrix& m, double eta, Direction dir,
                         const HyperParams& hp, double& clip_norm) {
  switch (alg) {
    case Algorithm::nsgda_m: return normalized_step(z, m, eta, dir, hp.zero_momentum_policy);
    case Algorithm::muon_da: return muon_step(z, m, eta, dir, hp.polar(), hp.zero_momentum_policy);
    case Algorithm::sgda_clip: {
      double c = 0.0;
      Matrix out = clip_step(z, m, eta, hp.tau, dir, &c);
      clip_norm = std::max(clip_norm, c);
      return out;
    }
    case Algorithm::local_sgda_m: return z + m * (sign(dir) * eta);
  }
  return z;
}

inline bool all_finite(const Matrix& m) {
  for (double v : m.values())
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace detail

/// p local steps of client n from the round-start server state. One
/// stochastic gradient per (client, step) drives both the update and the
/// round average of the local gradient samples.
inline ClientResult client_round(int n, const ServerState& server, const ClientState& prev, const MinimaxProblem& problem,
                                 const HyperParams& hp, const noise::NoiseSampler& sampler, Algorithm alg,
                                 std::uint64_t seed, const RunOptions& opts = {}) {
  ClientState cs = prev;
  cs.x_local = server.x;
  cs.y_local = server.y;
  cs.grad_accum_x = Matrix(server.x.rows(), server.x.cols());
  cs.grad_accum_y = Matrix(server.y.rows(), server.y.cols());

  const bool cv = uses_control_variates(alg);
  const bool recursive = alg == Algorithm::local_sgda_m || opts.local_recursive_momentum;
  const Matrix zero_x(server.x.rows(), server.x.cols()), zero_y(server.y.rows(), server.y.cols());
  const Matrix& gx_prev = cv ? server.g_x : zero_x;
  const Matrix& gy_prev = cv ? server.g_y : zero_y;
  const Matrix& gnx_prev = cv ? cs.g_local_x : zero_x;
  const Matrix& gny_prev = cv ? cs.g_local_y : zero_y;

  ClientResult res;
  res.momentum_x = server.u;
  res.momentum_y = server.v;
  res.drift_x.reserve(static_cast<std::size_t>(hp.p));
  res.drift_y.reserve(static_cast<std::size_t>(hp.p));

  for (int i = 0; i < hp.p; ++i) {
    const StreamKey key{seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(server.round),
                        static_cast<std::uint64_t>(i), StreamPurpose::noise};
    const GradPair g = sampled_grad(problem, sampler, n, cs.x_local, cs.y_local, key);

    const Matrix& ux_prev = recursive ? res.momentum_x : server.u;
    const Matrix& uy_prev = recursive ? res.momentum_y : server.v;
    Matrix mx = local_momentum(g.x, gx_prev, gnx_prev, ux_prev, hp.beta_x);
    Matrix my = local_momentum(g.y, gy_prev, gny_prev, uy_prev, hp.beta_y);

    cs.x_local = detail::apply_step(alg, cs.x_local, mx, hp.eta_x, Direction::descend, hp, res.max_clip_norm);
    cs.y_local = detail::apply_step(alg, cs.y_local, my, hp.eta_y, Direction::ascend, hp, res.max_clip_norm);
    cs.grad_accum_x += g.x;
    cs.grad_accum_y += g.y;
    res.momentum_x = std::move(mx);
    res.momentum_y = std::move(my);
    res.drift_x.push_back(distance(cs.x_local, server.x));
    res.drift_y.push_back(distance(cs.y_local, server.y));
  }

  const double inv_p = 1.0 / static_cast<double>(hp.p);
  res.g_local_x = cs.grad_accum_x * inv_p;
  res.g_local_y = cs.grad_accum_y * inv_p;
  res.x_final = std::move(cs.x_local);
  res.y_final = std::move(cs.y_local);
  return res;
}

/// Server side: aggregate control variates, take the global step and update
/// the global momentum. The recursive baseline averages the clients' final
/// local momenta instead.
inline ServerState server_round(const ServerState& server, const std::vector<ClientResult>& results,
                                const HyperParams& hp, Algorithm alg = Algorithm::nsgda_m) {
  if (static_cast<int>(results.size()) != hp.N)
    throw ProtocolError("server_round: expected " + std::to_string(hp.N) + " client results, got " +
                        std::to_string(results.size()));

  std::vector<Matrix> gx, gy, dx, dy, mx, my;
  for (const auto& r : results) {
    gx.push_back(r.g_local_x);
    gy.push_back(r.g_local_y);
    dx.push_back(r.x_final - server.x);
    dy.push_back(r.y_final - server.y);
    mx.push_back(r.momentum_x);
    my.push_back(r.momentum_y);
  }

  ServerState next;
  next.round = server.round + 1;
  next.g_x = pairwise_mean(gx);
  next.g_y = pairwise_mean(gy);
  const double np = static_cast<double>(hp.N) * static_cast<double>(hp.p);
  next.x = server.x + pairwise_sum(dx) * (hp.gamma_x / (hp.eta_x * np));
  next.y = server.y + pairwise_sum(dy) * (hp.gamma_y / (hp.eta_y * np));
  if (alg == Algorithm::local_sgda_m) {
    next.u = pairwise_mean(mx);
    next.v = pairwise_mean(my);
  } else {
    next.u = next.g_x * hp.beta_x + server.u * (1.0 - hp.beta_x);
    next.v = next.g_y * hp.beta_y + server.v * (1.0 - hp.beta_y);
  }
  return next;
}

/// Runs T communication rounds and records one trace row per round.
inline RunTrace run(Algorithm alg, const MinimaxProblem& problem, const HyperParams& hp, const NoiseModel& noise_model,
                    std::uint64_t seed, const RunOptions& opts = {}) {
  hp.validate();
  if (hp.N != problem.num_clients())
    throw InvalidArgument("run: hp.N (" + std::to_string(hp.N) + ") != number of clients (" +
                          std::to_string(problem.num_clients()) + ")");
  const noise::NoiseSampler sampler(noise_model);
  const Shape sx = problem.shape_x(), sy = problem.shape_y();

  RunTrace trace;
  trace.algorithm = alg;
  trace.seed = seed;
  trace.rounds_planned = hp.T;
  trace.cols_x = sx.cols;
  trace.cols_y = sy.cols;

  ServerState server;
  server.x = problem.initial_x();
  server.y = problem.initial_y();
  const Matrix x0 = server.x, y0 = server.y;
  std::vector<ClientState> clients(static_cast<std::size_t>(hp.N));
  for (int n = 0; n < hp.N; ++n) {
    auto& c = clients[static_cast<std::size_t>(n)];
    if (opts.momentum_init == MomentumInit::warm_start) {
      GradPair g = problem.grad(n, x0, y0);
      c.g_local_x = std::move(g.x);
      c.g_local_y = std::move(g.y);
    } else {
      c.g_local_x = Matrix(sx);
      c.g_local_y = Matrix(sy);
    }
  }
  if (opts.momentum_init == MomentumInit::warm_start) {
    std::vector<Matrix> gx, gy;
    for (const auto& c : clients) {
      gx.push_back(c.g_local_x);
      gy.push_back(c.g_local_y);
    }
    server.g_x = pairwise_mean(gx);
    server.g_y = pairwise_mean(gy);
    server.u = server.g_x;
    server.v = server.g_y;
  } else {
    server.g_x = server.u = Matrix(sx);
    server.g_y = server.v = Matrix(sy);
  }

  const bool bounded = has_bounded_steps(alg);
  const metrics::StepBounds bounds = metrics::step_bounds(alg, hp, sx.cols, sy.cols);
  metrics::PhiOptions phi_opts;

  for (int t = 0; t < hp.T; ++t) {
    server.round = t;
    RoundRecord rec;
    rec.t = t;

    // Centering of the corrections about to be applied.
    {
      std::vector<Matrix> cx, cy;
      for (const auto& c : clients) {
        cx.push_back(server.g_x - c.g_local_x);
        cy.push_back(server.g_y - c.g_local_y);
      }
      rec.centering_x = pairwise_mean(cx).frobenius_norm();
      rec.centering_y = pairwise_mean(cy).frobenius_norm();
      rec.g_prev_norm_x = server.g_x.frobenius_norm();
      rec.g_prev_norm_y = server.g_y.frobenius_norm();
    }
    rec.displacement_x = distance(server.x, x0);
    rec.displacement_y = distance(server.y, y0);

    // Metrics at the round-start iterates.
    const bool finite_start = detail::all_finite(server.x) && detail::all_finite(server.y);
    rec.f_value = problem.f_value(server.x, server.y);
    if (finite_start) {
      const auto phi = metrics::phi_value_and_grad(problem, server.x, opts.phi_tol, phi_opts);
      rec.grad_phi_norm = phi.grad.frobenius_norm();
      rec.phi_value = phi.value;
      rec.potential = 4.0 * phi.value - rec.f_value;
    } else {
      rec.grad_phi_norm = rec.potential = NAN;
    }
    rec.auc = problem.evaluate_auc(server.x);

    // Clients, independent given the round-start state.
    std::vector<ClientResult> results(static_cast<std::size_t>(hp.N));
    auto work = [&](int n) {
      return client_round(n, server, clients[static_cast<std::size_t>(n)], problem, hp, sampler, alg, seed, opts);
    };
    if (opts.parallel_clients && hp.N > 1) {
      std::vector<std::future<ClientResult>> futures;
      for (int n = 0; n < hp.N; ++n) futures.push_back(std::async(std::launch::async, work, n));
      for (int n = 0; n < hp.N; ++n) results[static_cast<std::size_t>(n)] = futures[static_cast<std::size_t>(n)].get();
    } else {
      for (int n = 0; n < hp.N; ++n) results[static_cast<std::size_t>(n)] = work(n);
    }

    ServerState next = server_round(server, results, hp, alg);

    for (const auto& r : results) {
      for (double d : r.drift_x) rec.max_drift_x = std::max(rec.max_drift_x, d);
      for (double d : r.drift_y) rec.max_drift_y = std::max(rec.max_drift_y, d);
      if (alg == Algorithm::sgda_clip)
        rec.max_clip_norm = std::max(rec.max_clip_norm.value_or(0.0), r.max_clip_norm);
    }
    rec.server_step_x = distance(next.x, server.x);
    rec.server_step_y = distance(next.y, server.y);
    const GradPair exact = full_grad(problem, server.x, server.y);
    rec.grad_err_x = distance(exact.x, next.u);
    rec.grad_err_y = distance(exact.y, next.v);

    const bool finite_next = detail::all_finite(next.x) && detail::all_finite(next.y) &&
                             detail::all_finite(next.u) && detail::all_finite(next.v);
    if (bounded) {
      const double p = static_cast<double>(hp.p);
      const bool ok = finite_next && rec.max_drift_x <= p * bounds.local_x + metrics::kBoundSlack &&
                      rec.max_drift_y <= p * bounds.local_y + metrics::kBoundSlack &&
                      rec.server_step_x <= bounds.server_x + metrics::kBoundSlack &&
                      rec.server_step_y <= bounds.server_y + metrics::kBoundSlack;
      if (!ok)
        throw InvariantViolation(std::string("run: ") + (finite_next ? "step bound" : "finiteness") +
                                 " breached by " + std::string(to_string(alg)) + " in round " + std::to_string(t));
      rec.invariants_ok = true;
    } else {
      const double size = std::max(next.x.frobenius_norm(), next.y.frobenius_norm());
      const bool diverged = !finite_next || !(size <= opts.divergence_threshold);
      rec.invariants_ok = !diverged;
      if (diverged && !trace.diverged) {
        trace.diverged = true;
        trace.diverged_round = t;
      }
    }

    for (int n = 0; n < hp.N; ++n) {
      auto& c = clients[static_cast<std::size_t>(n)];
      auto& r = results[static_cast<std::size_t>(n)];
      c.g_local_x = std::move(r.g_local_x);
      c.g_local_y = std::move(r.g_local_y);
    }
    server = std::move(next);
    trace.records.push_back(std::move(rec));
    if (trace.diverged && opts.halt_on_divergence) break;
  }
  return trace;
}

}  // namespace fedminimax
