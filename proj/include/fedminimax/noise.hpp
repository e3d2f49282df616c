#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fedminimax/core.hpp"
#include "fedminimax/matrix.hpp"
#include "fedminimax/rng.hpp"

namespace fedminimax::noise {

using NoiseSample = Matrix;

/// E|P - E[P]|^s for P ~ Pareto(alpha, x_m = 1), alpha > s > 1.
///
/// With m = alpha / (alpha - 1) and the substitution x = m u, the upper branch
/// (x > m) is alpha m^{s-alpha} B(alpha - s, s + 1) in closed form and the
/// lower branch (1 <= x <= m) is an integral over [1/m, 1] whose only
/// irregularity is the (1 - u)^s endpoint, handled by tanh-sinh quadrature.
inline double centered_pareto_abs_moment(double alpha, double s) {
  if (!(alpha > s) || !(alpha > 1.0) || !(s > 0.0))
    throw InvalidArgument("centered_pareto_abs_moment: need alpha > max(s, 1), s > 0");
  const double m = alpha / (alpha - 1.0);
  const double upper = std::beta(alpha - s, s + 1.0);
  auto integrand = [&](double u) { return std::pow(1.0 - u, s) * std::pow(u, -alpha - 1.0); };
  const double lower = boost::math::quadrature::tanh_sinh<double>().integrate(integrand, 1.0 / m, 1.0);
  return alpha * std::pow(m, s - alpha) * (upper + lower);
}

/// E|t_nu|^s for a Student-t variable with nu > s degrees of freedom.
inline double student_t_abs_moment(double nu, double s) {
  if (!(nu > s)) throw InvalidArgument("student_t_abs_moment: need nu > s");
  return std::pow(nu, s / 2.0) * std::tgamma((s + 1.0) / 2.0) * std::tgamma((nu - s) / 2.0) /
         (std::sqrt(std::numbers::pi) * std::tgamma(nu / 2.0));
}

/// Draws delta = radius * direction with direction uniform on the unit sphere
/// of the flattened dimension, radius independent of the direction and scaled
/// so that E[radius^s] = sigma^s exactly. Mean zero follows from the symmetry
/// of the direction.
class NoiseSampler {
 public:
  explicit NoiseSampler(NoiseModel model) : model_(model) {
    model_.validate();
    switch (model_.family) {
      case NoiseFamily::symmetrized_pareto: {
        const double alpha = model_.effective_tail_exponent();
        radius_scale_ = model_.sigma / std::pow(centered_pareto_abs_moment(alpha, model_.s), 1.0 / model_.s);
        break;
      }
      case NoiseFamily::student_t: {
        const double nu = model_.effective_tail_exponent();
        radius_scale_ = model_.sigma / std::pow(student_t_abs_moment(nu, model_.s), 1.0 / model_.s);
        break;
      }
      case NoiseFamily::gaussian:
      case NoiseFamily::none:
        radius_scale_ = model_.sigma;
        break;
    }
  }

  const NoiseModel& model() const { return model_; }
  double radius_scale() const { return radius_scale_; }
  bool is_zero() const { return model_.family == NoiseFamily::none || model_.sigma == 0.0; }

  void sample_into(std::span<double> out, Stream& stream) const {
    if (is_zero()) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    const auto dim = static_cast<double>(out.size());
    if (model_.family == NoiseFamily::gaussian) {
      // E||delta||^2 = sigma^2 with per-coordinate variance sigma^2 / D.
      const double sd = model_.sigma / std::sqrt(dim);
      for (double& v : out) v = sd * stream.normal();
      return;
    }

    double radius = 0.0;
    const double tail = model_.effective_tail_exponent();
    if (model_.family == NoiseFamily::symmetrized_pareto) {
      const double pareto = std::pow(stream.uniform(), -1.0 / tail);
      radius = std::abs(pareto - tail / (tail - 1.0));
    } else {
      const double z = stream.normal();
      const double chi2 = 2.0 * stream.gamma(tail / 2.0);
      radius = std::abs(z / std::sqrt(chi2 / tail));
    }
    radius *= radius_scale_;

    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (double& v : out) {
        v = stream.normal();
        norm2 += v * v;
      }
    } while (norm2 == 0.0);
    const double factor = radius / std::sqrt(norm2);
    for (double& v : out) v *= factor;
  }

  NoiseSample sample(const Shape& shape, Stream& stream) const {
    Matrix delta(shape);
    sample_into(delta.values(), stream);
    return delta;
  }

 private:
  NoiseModel model_;
  double radius_scale_ = 0.0;
};

inline NoiseSample sample(const NoiseModel& model, const Shape& shape, Stream& stream) {
  return NoiseSampler(model).sample(shape, stream);
}

/// (1/K) sum_k ||delta_k||^s.
inline double empirical_moment(std::span<const NoiseSample> samples, double s) {
  if (samples.empty()) throw InvalidArgument("empirical_moment: empty sample list");
  if (!(s > 0.0 && s <= 2.0)) throw InvalidArgument("empirical_moment: s must be in (0, 2]");
  double acc = 0.0;
  for (const auto& d : samples) acc += std::pow(d.frobenius_norm(), s);
  return acc / static_cast<double>(samples.size());
}

}  // namespace fedminimax::noise
