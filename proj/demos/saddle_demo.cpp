// Fed-NSGDA-M and FedMuon-DA on the heterogeneous saddle problem under
// heavy-tailed noise; prints how far the gradient of Phi falls.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "fedminimax/fedminimax.hpp"

namespace fm = fedminimax;

int main(int argc, char** argv) {
  const int T = argc > 1 ? std::atoi(argv[1]) : 2000;
  const int N = 8, p = 4;
  const auto problem = fm::make_saddle_problem(N, 10, 10, /*mu=*/1.0, /*amp=*/1.0, /*hetero=*/0.5, /*seed=*/0);
  const fm::HyperParams hp = fm::theorem1_schedule(N, p, T, problem.smoothness());
  fm::NoiseModel noise;
  noise.family = fm::NoiseFamily::symmetrized_pareto;
  noise.s = 1.5;
  noise.sigma = 1.0;

  std::printf("L_f=%.4g mu=%.4g gamma_x=%.4g gamma_y=%.4g beta=%.4g eta=%.4g\n", problem.smoothness().L_f,
              problem.smoothness().mu, hp.gamma_x, hp.gamma_y, hp.beta_x, hp.eta_x);
  for (auto alg : {fm::Algorithm::nsgda_m, fm::Algorithm::muon_da}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto start = std::chrono::steady_clock::now();
      const auto trace = fm::run(alg, problem, hp, noise, seed);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const double first = fm::metrics::window_mean(trace, 0.1, false);
      const double last = fm::metrics::window_mean(trace, 0.1, true);
      std::printf("%-8s seed=%llu first=%.4f last=%.4f ratio=%.3f (%.2fs)\n", std::string(fm::to_string(alg)).c_str(),
                  static_cast<unsigned long long>(seed), first, last, last / first, secs);
    }
  }
}
