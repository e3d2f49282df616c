#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace fedminimax {

enum class Algorithm { nsgda_m, muon_da, local_sgda_m, sgda_clip };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::nsgda_m: return "nsgda-m";
    case Algorithm::muon_da: return "muon-da";
    case Algorithm::local_sgda_m: return "local-sgda-m";
    case Algorithm::sgda_clip: return "sgda-clip";
  }
  return "nsgda-m";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  if (s == "nsgda-m") return Algorithm::nsgda_m;
  if (s == "muon-da") return Algorithm::muon_da;
  if (s == "local-sgda-m") return Algorithm::local_sgda_m;
  if (s == "sgda-clip") return Algorithm::sgda_clip;
  return std::nullopt;
}

/// Algorithms whose every local step has bounded length by construction.
inline bool has_bounded_steps(Algorithm a) { return a != Algorithm::local_sgda_m; }

/// Algorithms that use the control-variate correction.
inline bool uses_control_variates(Algorithm a) { return a != Algorithm::local_sgda_m; }

/// Metrics for communication round t, evaluated at the round-start iterates
/// (x_t, y_t) except for grad_err_*, which compare against the momentum u_t,
/// v_t produced by the round.
struct RoundRecord {
  int t = 0;
  double grad_phi_norm = 0.0;
  double f_value = 0.0;
  double grad_err_x = 0.0;
  double grad_err_y = 0.0;
  double max_drift_x = 0.0;
  double max_drift_y = 0.0;
  double server_step_x = 0.0;
  double server_step_y = 0.0;
  double potential = 0.0;  // 3 Phi(x_t) + (Phi(x_t) - f(x_t, y_t))
  std::optional<double> auc;

  // In-memory diagnostics; not part of the CSV schema.
  std::optional<double> phi_value;
  std::optional<double> centering_x;  // ||(1/N) sum_n (g_{x,t-1} - g^(n)_{x,t-1})||
  std::optional<double> centering_y;
  std::optional<double> g_prev_norm_x;
  std::optional<double> g_prev_norm_y;
  std::optional<double> displacement_x;  // ||x_t - x_0||
  std::optional<double> displacement_y;
  std::optional<double> max_clip_norm;  // largest clipped momentum norm in the round
  bool invariants_ok = true;
};

struct RunTrace {
  Algorithm algorithm = Algorithm::nsgda_m;
  std::uint64_t seed = 0;
  int rounds_planned = 0;
  std::size_t cols_x = 1;  // n_x: column count of the primal block
  std::size_t cols_y = 1;
  bool diverged = false;
  std::optional<int> diverged_round;
  std::vector<RoundRecord> records;
};

}  // namespace fedminimax
