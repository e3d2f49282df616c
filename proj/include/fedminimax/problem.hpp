#pragma once

#include <optional>
#include <vector>

#include "fedminimax/core.hpp"
#include "fedminimax/matrix.hpp"
#include "fedminimax/noise.hpp"
#include "fedminimax/rng.hpp"

namespace fedminimax {

struct GradPair {
  Matrix x;
  Matrix y;
};

/// Oracle for a federated minimax problem
///   min_x max_y f(x, y) = (1/N) sum_n f^(n)(x, y).
/// Implementations are immutable after construction, so gradients may be
/// requested concurrently from several clients.
class MinimaxProblem {
 public:
  virtual ~MinimaxProblem() = default;

  virtual int num_clients() const = 0;
  virtual Shape shape_x() const = 0;
  virtual Shape shape_y() const = 0;

  /// Deterministic gradient of client n's objective.
  virtual GradPair grad(int n, const Matrix& x, const Matrix& y) const = 0;

  /// Data-sampled gradient (minibatch), without injected noise. Problems
  /// without a dataset return the exact gradient.
  virtual GradPair stoch_grad(int n, const Matrix& x, const Matrix& y, Stream& /*stream*/) const {
    return grad(n, x, y);
  }

  /// Global objective f(x, y).
  virtual double f_value(const Matrix& x, const Matrix& y) const = 0;

  virtual SmoothnessInfo smoothness() const = 0;

  virtual std::optional<Matrix> y_star(const Matrix& /*x*/) const { return std::nullopt; }
  virtual std::optional<Matrix> phi_grad(const Matrix& /*x*/) const { return std::nullopt; }

  /// Test AUC of the model encoded in x (classification problems only).
  virtual std::optional<double> evaluate_auc(const Matrix& /*x*/) const { return std::nullopt; }

  virtual Matrix initial_x() const { return Matrix(shape_x()); }
  virtual Matrix initial_y() const { return Matrix(shape_y()); }

 protected:
  void check_client(int n) const {
    if (n < 0 || n >= num_clients()) throw InvalidArgument("MinimaxProblem: client index out of range");
  }
};

/// (1/N) sum_n grad(n, x, y), summed pairwise in client order.
inline GradPair full_grad(const MinimaxProblem& problem, const Matrix& x, const Matrix& y) {
  const int n_clients = problem.num_clients();
  std::vector<Matrix> gx, gy;
  gx.reserve(n_clients);
  gy.reserve(n_clients);
  for (int n = 0; n < n_clients; ++n) {
    auto g = problem.grad(n, x, y);
    gx.push_back(std::move(g.x));
    gy.push_back(std::move(g.y));
  }
  return {pairwise_mean(gx), pairwise_mean(gy)};
}

/// One stochastic gradient sample for client n: minibatch from the
/// (client, round, step) data stream plus additive noise drawn jointly over
/// the concatenated (x, y) gradient, so E||delta||^s <= sigma^s holds for the
/// full gradient.
inline GradPair sampled_grad(const MinimaxProblem& problem, const noise::NoiseSampler& sampler, int n,
                             const Matrix& x, const Matrix& y, StreamKey key) {
  key.purpose = StreamPurpose::minibatch;
  Stream data_stream(key);
  GradPair g = problem.stoch_grad(n, x, y, data_stream);
  if (sampler.is_zero()) return g;

  key.purpose = StreamPurpose::noise;
  Stream noise_stream(key);
  std::vector<double> delta(g.x.size() + g.y.size());
  sampler.sample_into(delta, noise_stream);
  for (std::size_t k = 0; k < g.x.size(); ++k) g.x[k] += delta[k];
  for (std::size_t k = 0; k < g.y.size(); ++k) g.y[k] += delta[g.x.size() + k];
  return g;
}

}  // namespace fedminimax
