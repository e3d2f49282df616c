#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "fedminimax/error.hpp"
#include "fedminimax/matrix.hpp"

namespace fedminimax {

enum class NsMode { iterative, exact_svd };
enum class ZeroMomentumPolicy { skip, error };

/// Orthonormalization settings for the Muon step.
struct PolarSettings {
  NsMode mode = NsMode::iterative;
  int iters = 10;
  int degree = 4;  // 1 is the classical cubic Newton–Schulz map

  bool operator==(const PolarSettings&) const = default;
};

struct HyperParams {
  double gamma_x = 0.01;
  double gamma_y = 0.01;
  double eta_x = 0.01;
  double eta_y = 0.01;
  double beta_x = 0.1;
  double beta_y = 0.1;
  int p = 1;
  int T = 1;
  int N = 1;
  double tau = 0.1;
  int ns_iters = 10;
  int ns_degree = 4;
  NsMode ns_mode = NsMode::iterative;
  ZeroMomentumPolicy zero_momentum_policy = ZeroMomentumPolicy::skip;

  PolarSettings polar() const { return {ns_mode, ns_iters, ns_degree}; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw InvalidArgument(std::string("HyperParams: ") + name + " must be > 0");
    };
    positive(gamma_x, "gamma_x");
    positive(gamma_y, "gamma_y");
    positive(eta_x, "eta_x");
    positive(eta_y, "eta_y");
    positive(tau, "tau");
    if (!(beta_x > 0.0 && beta_x <= 1.0)) throw InvalidArgument("HyperParams: beta_x must be in (0,1]");
    if (!(beta_y > 0.0 && beta_y <= 1.0)) throw InvalidArgument("HyperParams: beta_y must be in (0,1]");
    if (p < 1) throw InvalidArgument("HyperParams: p must be >= 1");
    if (T < 1) throw InvalidArgument("HyperParams: T must be >= 1");
    if (N < 1) throw InvalidArgument("HyperParams: N must be >= 1");
    if (ns_iters < 1) throw InvalidArgument("HyperParams: ns_iters must be >= 1");
    if (ns_degree < 1) throw InvalidArgument("HyperParams: ns_degree must be >= 1");
  }

  bool operator==(const HyperParams&) const = default;
};

struct SmoothnessInfo {
  double L_f = 1.0;
  double mu = 1.0;

  double kappa() const { return L_f / mu; }
  double L_phi() const { return L_f + L_f * L_f / mu; }

  void validate() const {
    if (!(L_f > 0.0) || !(mu > 0.0)) throw InvalidArgument("SmoothnessInfo: L_f and mu must be > 0");
    if (kappa() < 1.0) throw InvalidArgument("SmoothnessInfo: kappa = L_f/mu must be >= 1");
  }
};

enum class NoiseFamily { symmetrized_pareto, student_t, gaussian, none };

/// Heavy-tailed additive gradient noise: E||delta||^s = sigma^s, mean zero.
struct NoiseModel {
  double s = 2.0;
  double sigma = 0.0;
  NoiseFamily family = NoiseFamily::none;
  // Pareto shape / Student-t degrees of freedom; defaults to (s + 2) / 2.
  std::optional<double> tail_exponent;

  double effective_tail_exponent() const { return tail_exponent.value_or((s + 2.0) / 2.0); }

  void validate() const {
    if (!(s > 1.0 && s <= 2.0)) throw InvalidConfiguration("NoiseModel: s must be in (1, 2]");
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
      throw InvalidConfiguration("NoiseModel: sigma must be finite and >= 0");
    if (family == NoiseFamily::gaussian && s != 2.0)
      throw InvalidConfiguration("NoiseModel: gaussian family requires s = 2");
    if (family == NoiseFamily::none && sigma != 0.0)
      throw InvalidConfiguration("NoiseModel: family none requires sigma = 0");
    if (family == NoiseFamily::symmetrized_pareto || family == NoiseFamily::student_t) {
      const double t = effective_tail_exponent();
      if (!(t > s) || !std::isfinite(t))
        throw InvalidConfiguration("NoiseModel: tail_exponent must exceed s");
    }
  }

  static NoiseModel none() { return {}; }

  bool operator==(const NoiseModel&) const = default;
};

inline std::string_view to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::symmetrized_pareto: return "symmetrized-pareto";
    case NoiseFamily::student_t: return "student-t";
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::none: return "none";
  }
  return "none";
}

inline std::optional<NoiseFamily> parse_noise_family(std::string_view s) {
  if (s == "symmetrized-pareto") return NoiseFamily::symmetrized_pareto;
  if (s == "student-t") return NoiseFamily::student_t;
  if (s == "gaussian") return NoiseFamily::gaussian;
  if (s == "none") return NoiseFamily::none;
  return std::nullopt;
}

inline std::string_view to_string(NsMode m) { return m == NsMode::iterative ? "iterative" : "exact-svd"; }

inline std::optional<NsMode> parse_ns_mode(std::string_view s) {
  if (s == "iterative") return NsMode::iterative;
  if (s == "exact-svd") return NsMode::exact_svd;
  return std::nullopt;
}

inline std::string_view to_string(ZeroMomentumPolicy p) {
  return p == ZeroMomentumPolicy::skip ? "skip" : "error";
}

inline std::optional<ZeroMomentumPolicy> parse_zero_momentum_policy(std::string_view s) {
  if (s == "skip") return ZeroMomentumPolicy::skip;
  if (s == "error") return ZeroMomentumPolicy::error;
  return std::nullopt;
}

/// Multipliers on the order-of-magnitude rate schedules.
struct ScheduleConstants {
  double c1 = 1.0;  // global step
  double c2 = 1.0;  // momentum
  double c3 = 1.0;  // local step

  bool operator==(const ScheduleConstants&) const = default;
};

/// Rate schedule for Fed-NSGDA-M:
///   gamma_x = c1 (Np)^{1/4} / (kappa T^{3/4}),  gamma_y = 10 kappa gamma_x,
///   beta    = min(1, c2 (Np)^{1/2} / T^{1/2}),   eta     = c3 / (p sqrt(T)).
/// The dual/primal ratio is pinned to exactly 10 kappa.
inline HyperParams theorem1_schedule(int N, int p, int T, const SmoothnessInfo& smooth,
                                     const ScheduleConstants& c = {}) {
  if (N < 1 || p < 1 || T < 1) throw InvalidArgument("schedule: N, p, T must be >= 1");
  if (!(c.c1 > 0.0) || !(c.c2 > 0.0) || !(c.c3 > 0.0))
    throw InvalidArgument("schedule: scale constants must be > 0");
  smooth.validate();

  const double np = static_cast<double>(N) * static_cast<double>(p);
  const double t = static_cast<double>(T);
  const double kappa = smooth.kappa();

  HyperParams hp;
  hp.N = N;
  hp.p = p;
  hp.T = T;
  hp.gamma_x = c.c1 * std::pow(np, 0.25) / (kappa * std::pow(t, 0.75));
  hp.gamma_y = (10.0 * kappa) * hp.gamma_x;
  hp.beta_x = std::min(1.0, c.c2 * std::sqrt(np) / std::sqrt(t));
  hp.beta_y = hp.beta_x;
  hp.eta_x = c.c3 / (static_cast<double>(p) * std::sqrt(t));
  hp.eta_y = hp.eta_x;
  return hp;
}

/// FedMuon-DA uses the same orders as Fed-NSGDA-M.
inline HyperParams theorem2_schedule(int N, int p, int T, const SmoothnessInfo& smooth,
                                     const ScheduleConstants& c = {}) {
  return theorem1_schedule(N, p, T, smooth, c);
}

}  // namespace fedminimax
