#pragma once

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "fedminimax/core.hpp"
#include "fedminimax/error.hpp"
#include "fedminimax/matrix.hpp"

namespace fedminimax::linalg {

/// Thin SVD of an m x n matrix with m >= n: A = U diag(sigma) V^T,
/// singular values sorted in descending order.
struct ThinSvd {
  Matrix U;                   // m x n, columns with sigma = 0 are left zero
  std::vector<double> sigma;  // n
  Matrix V;                   // n x n, orthogonal
};

/// One-sided (Hestenes) Jacobi SVD. Requires rows >= cols.
inline ThinSvd jacobi_svd(const Matrix& a) {
  const std::size_t m = a.rows(), n = a.cols();
  if (m < n) throw InvalidArgument("jacobi_svd: requires rows >= cols");
  if (!a.all_finite()) throw DegenerateInput("jacobi_svd: non-finite entries");

  Matrix w = a;
  Matrix v = Matrix::identity(n);
  constexpr int kMaxSweeps = 80;
  constexpr double kOrthTol = 1e-15;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += w(i, p) * w(i, p);
          beta += w(i, q) * w(i, q);
          gamma += w(i, p) * w(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= kOrthTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) ss += w(i, j) * w(i, j);
    norms[j] = std::sqrt(ss);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  ThinSvd out{Matrix(m, n), std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.sigma[k] = norms[j];
    for (std::size_t i = 0; i < n; ++i) out.V(i, k) = v(i, j);
    if (norms[j] > 0.0)
      for (std::size_t i = 0; i < m; ++i) out.U(i, k) = w(i, j) / norms[j];
  }
  return out;
}

/// Singular values (descending) of a matrix of any orientation.
inline std::vector<double> singular_values(const Matrix& a) {
  return a.rows() >= a.cols() ? jacobi_svd(a).sigma : jacobi_svd(a.transpose()).sigma;
}

inline double spectral_norm(const Matrix& a) {
  const auto s = singular_values(a);
  return s.empty() ? 0.0 : s.front();
}

/// Relative rank tolerance used by the exact polar factor.
inline constexpr double kRankTol = 1e-12;

namespace detail {

inline void require_nondegenerate(const Matrix& m, const char* who) {
  if (m.empty()) throw DegenerateInput(std::string(who) + ": empty matrix");
  if (!m.all_finite()) throw DegenerateInput(std::string(who) + ": non-finite entries");
  if (!(m.frobenius_norm() >= DBL_MIN)) throw DegenerateInput(std::string(who) + ": zero matrix");
}

}  // namespace detail

/// Exact polar factor O = P Q^T from the SVD, keeping singular values above
/// kRankTol * sigma_max. Wide inputs are handled through the transpose.
inline Matrix svd_polar(const Matrix& m) {
  detail::require_nondegenerate(m, "svd_polar");
  if (m.rows() < m.cols()) return svd_polar(m.transpose()).transpose();

  const ThinSvd svd = jacobi_svd(m);
  const double cutoff = kRankTol * svd.sigma.front();
  Matrix o(m.rows(), m.cols());
  for (std::size_t k = 0; k < svd.sigma.size(); ++k) {
    if (!(svd.sigma[k] > cutoff)) break;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const double uik = svd.U(i, k);
      for (std::size_t j = 0; j < m.cols(); ++j) o(i, j) += uik * svd.V(j, k);
    }
  }
  return o;
}

/// Newton–Schulz polar iteration of the given degree:
///
///   X_{k+1} = X_k * sum_{j=0..degree} binom(2j, j) / 4^j * (I - X_k^T X_k)^j
///
/// i.e. the truncated series of (X^T X)^{-1/2}. degree = 1 is the classical
/// cubic map 1.5 X - 0.5 X X^T X. X_0 = M / min(||M||_F, sqrt(||M||_1 ||M||_inf)),
/// both upper bounds on the spectral norm, so every singular value of X_0
/// lies in (0, 1] and each iterate maps (0, 1] into itself monotonically.
inline Matrix newton_schulz_polar(const Matrix& m, int iters, int degree = 4) {
  if (iters < 1) throw InvalidArgument("newton_schulz_polar: iters must be >= 1");
  if (degree < 1) throw InvalidArgument("newton_schulz_polar: degree must be >= 1");
  detail::require_nondegenerate(m, "newton_schulz_polar");
  if (m.rows() < m.cols()) return newton_schulz_polar(m.transpose(), iters, degree).transpose();

  const double scale = std::min(m.frobenius_norm(), std::sqrt(m.norm_1() * m.norm_inf()));
  Matrix x = m * (1.0 / scale);

  std::vector<double> coeff(static_cast<std::size_t>(degree) + 1);
  coeff[0] = 1.0;
  for (int j = 1; j <= degree; ++j) coeff[j] = coeff[j - 1] * (2.0 * j - 1.0) / (2.0 * j);

  const std::size_t n = m.cols();
  const Matrix eye = Matrix::identity(n);
  for (int k = 0; k < iters; ++k) {
    const Matrix e = eye - matmul_tn(x, x);
    Matrix poly = eye * coeff[degree];
    for (int j = degree - 1; j >= 0; --j) poly = eye * coeff[j] + matmul(e, poly);
    x = matmul(x, poly);
  }
  return x;
}

/// Polar factor through the configured backend.
inline Matrix polar(const Matrix& m, const PolarSettings& settings) {
  return settings.mode == NsMode::exact_svd ? svd_polar(m)
                                            : newton_schulz_polar(m, settings.iters, settings.degree);
}

/// ||(O^T O) restricted to its top-r eigenspace - I_r||_F. The top eigenvalues
/// of O^T O are the squared singular values of O.
inline double orthonormality_defect(const Matrix& o, int r) {
  const auto limit = static_cast<int>(std::min(o.rows(), o.cols()));
  if (r < 0 || r > limit) throw InvalidArgument("orthonormality_defect: r out of range");
  const auto s = singular_values(o);
  double ss = 0.0;
  for (int i = 0; i < r; ++i) {
    const double d = s[i] * s[i] - 1.0;
    ss += d * d;
  }
  return std::sqrt(ss);
}

}  // namespace fedminimax::linalg
