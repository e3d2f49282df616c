// Newton–Schulz orthonormalization versus the SVD polar factor: error per
// iteration count and polynomial degree on a random ill-conditioned matrix.

#include <cstdio>
#include <cstdlib>

#include "fedminimax/fedminimax.hpp"

namespace fm = fedminimax;

int main(int argc, char** argv) {
  const std::size_t m = argc > 1 ? static_cast<std::size_t>(std::atoi(argv[1])) : 12;
  const std::size_t n = argc > 2 ? static_cast<std::size_t>(std::atoi(argv[2])) : 8;

  fm::Stream st = fm::Stream::from_seed(7);
  fm::Matrix a(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = st.normal();
  // Stretch the columns to make the matrix ill-conditioned.
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) a(i, j) *= std::pow(100.0, static_cast<double>(j) / std::max<double>(1, n - 1));

  const auto sigma = fm::linalg::singular_values(a);
  std::printf("%zux%zu matrix, singular values %.4g .. %.4g (condition %.1f)\n", m, n, sigma.front(), sigma.back(),
              sigma.front() / sigma.back());

  const fm::Matrix exact = fm::linalg::svd_polar(a);
  std::printf("%6s", "iters");
  for (int degree : {1, 2, 4}) std::printf("   degree %d      ", degree);
  std::printf("\n");
  for (int iters : {1, 2, 4, 6, 8, 10, 15, 20}) {
    std::printf("%6d", iters);
    for (int degree : {1, 2, 4})
      std::printf("   %-14.3e", fm::distance(fm::linalg::newton_schulz_polar(a, iters, degree), exact));
    std::printf("\n");
  }
  std::printf("orthonormality defect of the SVD factor: %.3e\n",
              fm::linalg::orthonormality_defect(exact, static_cast<int>(std::min(m, n))));
}
