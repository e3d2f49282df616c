#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "fedminimax/linalg.hpp"
#include "fedminimax/problem.hpp"

namespace fedminimax {

/// Nonconvex-strongly-concave saddle
///
///   f^(n)(x, y) = amp * sum_j sin(x_j + phi^(n)_j) + x^T B^(n) y - (mu/2)||y||^2 + c^(n) . x
///
/// on the flattened parameters. Strong concavity in y gives PL with constant
/// mu and the closed forms y*(x) = Bbar^T x / mu and
/// grad Phi(x) = amp * mean_n cos(x + phi^(n)) + cbar + Bbar Bbar^T x / mu.
class SaddleProblem final : public MinimaxProblem {
 public:
  struct Client {
    Matrix B;                 // dim_x x dim_y
    Matrix c;                 // dim_x x 1
    std::vector<double> phi;  // dim_x
  };

  SaddleProblem(Shape shape_x, Shape shape_y, double mu, double amp, std::vector<Client> clients)
      : shape_x_(shape_x), shape_y_(shape_y), mu_(mu), amp_(amp), clients_(std::move(clients)) {
    if (!(mu_ > 0.0)) throw InvalidArgument("SaddleProblem: mu must be > 0");
    if (!(amp_ >= 0.0)) throw InvalidArgument("SaddleProblem: amp must be >= 0");
    if (clients_.empty()) throw InvalidArgument("SaddleProblem: need at least one client");
    const std::size_t dx = shape_x_.size(), dy = shape_y_.size();
    std::vector<Matrix> bs, cs;
    for (const auto& cl : clients_) {
      if (cl.B.rows() != dx || cl.B.cols() != dy || cl.c.size() != dx || cl.phi.size() != dx)
        throw InvalidArgument("SaddleProblem: client component shapes do not match");
      bs.push_back(cl.B);
      cs.push_back(cl.c.reshaped(dx, 1));
    }
    b_mean_ = pairwise_mean(bs);
    c_mean_ = pairwise_mean(cs);
    bbt_over_mu_ = matmul(b_mean_, b_mean_.transpose()) * (1.0 / mu_);
    l_f_ = amp_ + linalg::spectral_norm(b_mean_) + mu_;
  }

  int num_clients() const override { return static_cast<int>(clients_.size()); }
  Shape shape_x() const override { return shape_x_; }
  Shape shape_y() const override { return shape_y_; }
  SmoothnessInfo smoothness() const override { return {l_f_, mu_}; }

  double mu() const { return mu_; }
  double amp() const { return amp_; }
  const Matrix& b_mean() const { return b_mean_; }
  const std::vector<Client>& clients() const { return clients_; }

  GradPair grad(int n, const Matrix& x, const Matrix& y) const override {
    check_client(n);
    const auto& cl = clients_[static_cast<std::size_t>(n)];
    const Matrix xv = flat(x, shape_x_), yv = flat(y, shape_y_);

    Matrix gx = matmul(cl.B, yv) + cl.c.reshaped(xv.size(), 1);
    for (std::size_t j = 0; j < xv.size(); ++j) gx[j] += amp_ * std::cos(xv[j] + cl.phi[j]);
    Matrix gy = matmul_tn(cl.B, xv) - yv * mu_;
    return {gx.reshaped(shape_x_.rows, shape_x_.cols), gy.reshaped(shape_y_.rows, shape_y_.cols)};
  }

  double client_value(int n, const Matrix& x, const Matrix& y) const {
    check_client(n);
    const auto& cl = clients_[static_cast<std::size_t>(n)];
    const Matrix xv = flat(x, shape_x_), yv = flat(y, shape_y_);
    double v = dot(xv, matmul(cl.B, yv)) - 0.5 * mu_ * dot(yv, yv) + dot(cl.c, xv);
    for (std::size_t j = 0; j < xv.size(); ++j) v += amp_ * std::sin(xv[j] + cl.phi[j]);
    return v;
  }

  double f_value(const Matrix& x, const Matrix& y) const override {
    double acc = 0.0;
    for (int n = 0; n < num_clients(); ++n) acc += client_value(n, x, y);
    return acc / num_clients();
  }

  std::optional<Matrix> y_star(const Matrix& x) const override {
    Matrix ys = matmul_tn(b_mean_, flat(x, shape_x_)) * (1.0 / mu_);
    return ys.reshaped(shape_y_.rows, shape_y_.cols);
  }

  std::optional<Matrix> phi_grad(const Matrix& x) const override {
    const Matrix xv = flat(x, shape_x_);
    Matrix g = matmul(bbt_over_mu_, xv) + c_mean_;
    const double w = amp_ / num_clients();
    for (const auto& cl : clients_)
      for (std::size_t j = 0; j < xv.size(); ++j) g[j] += w * std::cos(xv[j] + cl.phi[j]);
    return g.reshaped(shape_x_.rows, shape_x_.cols);
  }

 private:
  static Matrix flat(const Matrix& m, const Shape& s) {
    if (m.size() != s.size()) throw InvalidArgument("SaddleProblem: argument has wrong size");
    return m.reshaped(m.size(), 1);
  }

  Shape shape_x_, shape_y_;
  double mu_, amp_;
  std::vector<Client> clients_;
  Matrix b_mean_, c_mean_, bbt_over_mu_;
  double l_f_ = 1.0;
};

/// Seeded instance: every client shares a base (B0, c0, phi0) and adds a
/// perturbation of scale `hetero`. B0 is the rectangular identity plus a small
/// random part; no bound on client heterogeneity is imposed.
inline SaddleProblem make_saddle_problem(int n_clients, Shape shape_x, Shape shape_y, double mu, double amp,
                                         double hetero, std::uint64_t seed) {
  if (n_clients < 1) throw InvalidArgument("make_saddle_problem: N must be >= 1");
  if (!(mu > 0.0)) throw InvalidArgument("make_saddle_problem: mu must be > 0");
  if (!(amp >= 0.0)) throw InvalidArgument("make_saddle_problem: amp must be >= 0");
  if (!(hetero >= 0.0)) throw InvalidArgument("make_saddle_problem: hetero must be >= 0");

  const std::size_t dx = shape_x.size(), dy = shape_y.size();
  const double bscale = 1.0 / std::sqrt(static_cast<double>(std::max(dx, dy)));
  Stream st(StreamKey{seed, 0, 0, 0, StreamPurpose::problem});

  Matrix b0(dx, dy);
  for (std::size_t i = 0; i < dx; ++i)
    for (std::size_t j = 0; j < dy; ++j) b0(i, j) = (i == j ? 1.0 : 0.0) + 0.1 * bscale * st.normal();
  Matrix c0(dx, 1);
  for (std::size_t i = 0; i < dx; ++i) c0[i] = 0.5 * st.normal();
  std::vector<double> phi0(dx);
  for (double& v : phi0) v = st.uniform(0.0, 2.0 * std::numbers::pi);

  std::vector<SaddleProblem::Client> clients;
  clients.reserve(static_cast<std::size_t>(n_clients));
  for (int n = 0; n < n_clients; ++n) {
    SaddleProblem::Client cl{b0, c0, phi0};
    for (std::size_t k = 0; k < cl.B.size(); ++k) cl.B[k] += hetero * bscale * st.normal();
    for (std::size_t k = 0; k < dx; ++k) cl.c[k] += hetero * st.normal();
    for (double& v : cl.phi) v += hetero * st.normal();
    clients.push_back(std::move(cl));
  }
  return SaddleProblem(shape_x, shape_y, mu, amp, std::move(clients));
}

inline SaddleProblem make_saddle_problem(int n_clients, std::size_t d_x, std::size_t d_y, double mu, double amp,
                                         double hetero, std::uint64_t seed) {
  if (d_x < 1 || d_y < 1) throw InvalidArgument("make_saddle_problem: dimensions must be >= 1");
  return make_saddle_problem(n_clients, Shape::vector(d_x), Shape::vector(d_y), mu, amp, hetero, seed);
}

}  // namespace fedminimax
