#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <optional>
#include <span>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fedminimax/linalg.hpp"
#include "fedminimax/metrics.hpp"
#include "fedminimax/problem.hpp"

namespace fedminimax {

/// Labeled binary classification data; labels are +1 / -1.
struct Dataset {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.empty() ? 0 : features.front().size(); }

  std::size_t positive_count() const {
    std::size_t c = 0;
    for (int b : labels) c += b == 1;
    return c;
  }
  double positive_ratio() const {
    return size() ? static_cast<double>(positive_count()) / static_cast<double>(size()) : 0.0;
  }

  void validate() const {
    if (features.size() != labels.size()) throw InvalidArgument("Dataset: feature/label count mismatch");
    for (int b : labels)
      if (b != 1 && b != -1) throw InvalidArgument("Dataset: labels must be +1 or -1");
    for (const auto& a : features)
      if (a.size() != dim()) throw InvalidArgument("Dataset: ragged feature rows");
  }
};

/// Square-loss AUC surrogate for one sample with score h:
///   (1-p)(h-w1)^2 [b=1] + p(h-w2)^2 [b=-1]
///   + 2(1+w3)(p h [b=-1] - (1-p) h [b=1]) - p(1-p) w3^2
inline double auc_loss(double h, double w1, double w2, double w3, int label, double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("auc_loss: p_ratio must be in (0,1)");
  if (label != 1 && label != -1) throw InvalidArgument("auc_loss: label must be +1 or -1");
  const double q = 1.0 - p;
  if (label == 1) return q * (h - w1) * (h - w1) - 2.0 * (1.0 + w3) * q * h - p * q * w3 * w3;
  return p * (h - w2) * (h - w2) + 2.0 * (1.0 + w3) * p * h - p * q * w3 * w3;
}

struct AucLossGrad {
  double dh = 0.0, dw1 = 0.0, dw2 = 0.0, dw3 = 0.0;
};

inline AucLossGrad auc_loss_grad(double h, double w1, double w2, double w3, int label, double p) {
  const double q = 1.0 - p;
  if (label == 1) return {2.0 * q * (h - w1) - 2.0 * (1.0 + w3) * q, -2.0 * q * (h - w1), 0.0, -2.0 * q * h - 2.0 * p * q * w3};
  return {2.0 * p * (h - w2) + 2.0 * (1.0 + w3) * p, 0.0, -2.0 * p * (h - w2), 2.0 * p * h - 2.0 * p * q * w3};
}

/// Per-client shards with the requested positive ratios: positives and
/// negatives are drawn from isotropic Gaussians centered at +/- separation/2
/// along the first coordinate axis; the positive count is round(ratio * n).
inline std::vector<Dataset> gen_imbalanced_data(int n_per_client, const std::vector<double>& ratios, std::size_t dim,
                                                double separation, std::uint64_t seed, double feature_std = 0.5,
                                                StreamPurpose purpose = StreamPurpose::data) {
  if (n_per_client < 1 || dim < 1) throw InvalidArgument("gen_imbalanced_data: n and dim must be >= 1");
  if (ratios.empty()) throw InvalidArgument("gen_imbalanced_data: need at least one ratio");
  if (!(feature_std > 0.0)) throw InvalidArgument("gen_imbalanced_data: feature_std must be > 0");
  if (!(separation >= 0.0)) throw InvalidArgument("gen_imbalanced_data: separation must be >= 0");

  std::vector<Dataset> shards;
  for (std::size_t n = 0; n < ratios.size(); ++n) {
    const double r = ratios[n];
    if (!(r > 0.0 && r < 1.0)) throw InvalidArgument("gen_imbalanced_data: ratios must be in (0,1)");
    const auto positives = static_cast<int>(std::lround(r * n_per_client));
    if (positives < 2 || n_per_client - positives < 1)
      throw InvalidArgument("gen_imbalanced_data: degenerate class counts for ratio " + std::to_string(r));

    Stream st(StreamKey{seed, n, 0, 0, purpose});
    Dataset ds;
    for (int i = 0; i < n_per_client; ++i) {
      const int label = i < positives ? 1 : -1;
      std::vector<double> a(dim);
      for (double& v : a) v = feature_std * st.normal();
      a[0] += label * separation / 2.0;
      ds.features.push_back(std::move(a));
      ds.labels.push_back(label);
    }
    // Shuffle so minibatches and CSV exports are not class-sorted.
    for (std::size_t i = ds.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(st.index(i));
      std::swap(ds.features[i - 1], ds.features[j]);
      std::swap(ds.labels[i - 1], ds.labels[j]);
    }
    shards.push_back(std::move(ds));
  }
  return shards;
}

/// CSV with header x0,...,x{d-1},label.
inline void write_dataset_csv(const Dataset& ds, std::ostream& os) {
  for (std::size_t j = 0; j < ds.dim(); ++j) os << 'x' << j << ',';
  os << "label\n";
  char buf[32];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.features[i]) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << buf << ',';
    }
    os << ds.labels[i] << '\n';
  }
}

inline Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("read_dataset_csv: missing header");
  std::size_t columns = 1;
  for (char c : line) columns += c == ',';
  if (columns < 2 || line.substr(line.rfind(',') + 1) != "label")
    throw InvalidArgument("read_dataset_csv: header must end with 'label'");

  Dataset ds;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> a;
    int label = 0;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        if (col + 1 < columns) {
          a.push_back(std::stod(cell, &used));
        } else {
          label = std::stoi(cell, &used);
        }
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InvalidArgument("read_dataset_csv: bad value at row " + std::to_string(row));
      }
      ++col;
    }
    if (col != columns) throw InvalidArgument("read_dataset_csv: wrong column count at row " + std::to_string(row));
    ds.features.push_back(std::move(a));
    ds.labels.push_back(label);
  }
  ds.validate();
  return ds;
}

/// How each client's objective weighs the two classes.
enum class RatioMode {
  shard,   // client n uses its own positive ratio (heterogeneous protocol)
  pooled,  // every client uses the ratio of the pooled data (homogeneous protocol)
};

struct AucOptions {
  int batch_size = 64;
  RatioMode ratio_mode = RatioMode::shard;
  std::optional<Dataset> test_set;  // AUC is evaluated on the pooled shards when absent
};

/// Federated AUC maximization with a linear score h(w; a) = w^T a.
/// Primal x = (w, w1, w2) as a vector of dimension d + 2, dual y = (w3).
class AucProblem final : public MinimaxProblem {
 public:
  AucProblem(std::vector<Dataset> shards, std::size_t model_dim, AucOptions opts = {})
      : shards_(std::move(shards)), dim_(model_dim), opts_(std::move(opts)) {
    if (shards_.empty()) throw InvalidArgument("AucProblem: need at least one shard");
    if (dim_ < 1) throw InvalidArgument("AucProblem: model_dim must be >= 1");
    if (opts_.batch_size < 1) throw InvalidArgument("AucProblem: batch_size must be >= 1");
    std::size_t pos = 0, total = 0;
    for (const auto& s : shards_) {
      s.validate();
      if (s.size() == 0) throw InvalidArgument("AucProblem: empty shard");
      if (s.dim() != dim_) throw InvalidArgument("AucProblem: shard feature dimension != model_dim");
      const double r = s.positive_ratio();
      if (!(r > 0.0 && r < 1.0)) throw InvalidArgument("AucProblem: shard must contain both classes");
      pos += s.positive_count();
      total += s.size();
    }
    pooled_ratio_ = static_cast<double>(pos) / static_cast<double>(total);
    for (const auto& s : shards_)
      ratios_.push_back(opts_.ratio_mode == RatioMode::shard ? s.positive_ratio() : pooled_ratio_);
    if (opts_.test_set) {
      opts_.test_set->validate();
      if (opts_.test_set->dim() != dim_) throw InvalidArgument("AucProblem: test set dimension != model_dim");
    }

    double curv = 0.0;
    for (double p : ratios_) curv += p * (1.0 - p);
    mu_ = 2.0 * curv / static_cast<double>(ratios_.size());
    l_f_ = std::max(estimate_lipschitz(), mu_);
  }

  int num_clients() const override { return static_cast<int>(shards_.size()); }
  Shape shape_x() const override { return Shape::vector(dim_ + 2); }
  Shape shape_y() const override { return Shape::vector(1); }
  SmoothnessInfo smoothness() const override { return {l_f_, mu_}; }

  const std::vector<Dataset>& shards() const { return shards_; }
  double client_ratio(int n) const { return ratios_.at(static_cast<std::size_t>(n)); }
  double pooled_ratio() const { return pooled_ratio_; }
  int batch_size() const { return opts_.batch_size; }

  /// Mean gradient over the given sample indices of client n's shard.
  GradPair minibatch_grad(int n, const Matrix& x, const Matrix& y, std::span<const std::size_t> idx) const {
    check_client(n);
    if (idx.empty()) throw InvalidArgument("AucProblem: empty minibatch");
    check_args(x, y);
    const auto& shard = shards_[static_cast<std::size_t>(n)];
    const double p = ratios_[static_cast<std::size_t>(n)];
    const double w1 = x[dim_], w2 = x[dim_ + 1], w3 = y[0];

    GradPair g{Matrix(shape_x()), Matrix(shape_y())};
    for (std::size_t i : idx) {
      const auto& a = shard.features.at(i);
      const double h = score(x, a);
      const AucLossGrad d = auc_loss_grad(h, w1, w2, w3, shard.labels[i], p);
      for (std::size_t j = 0; j < dim_; ++j) g.x[j] += d.dh * a[j];
      g.x[dim_] += d.dw1;
      g.x[dim_ + 1] += d.dw2;
      g.y[0] += d.dw3;
    }
    const double inv = 1.0 / static_cast<double>(idx.size());
    g.x *= inv;
    g.y *= inv;
    return g;
  }

  GradPair grad(int n, const Matrix& x, const Matrix& y) const override {
    check_client(n);
    std::vector<std::size_t> all(shards_[static_cast<std::size_t>(n)].size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return minibatch_grad(n, x, y, all);
  }

  // Minibatch drawn uniformly with replacement, so it is unbiased for grad().
  GradPair stoch_grad(int n, const Matrix& x, const Matrix& y, Stream& stream) const override {
    check_client(n);
    const auto size = shards_[static_cast<std::size_t>(n)].size();
    std::vector<std::size_t> idx(static_cast<std::size_t>(opts_.batch_size));
    for (auto& i : idx) i = static_cast<std::size_t>(stream.index(size));
    return minibatch_grad(n, x, y, idx);
  }

  double client_value(int n, const Matrix& x, const Matrix& y) const {
    check_client(n);
    check_args(x, y);
    const auto& shard = shards_[static_cast<std::size_t>(n)];
    const double p = ratios_[static_cast<std::size_t>(n)];
    double acc = 0.0;
    for (std::size_t i = 0; i < shard.size(); ++i)
      acc += auc_loss(score(x, shard.features[i]), x[dim_], x[dim_ + 1], y[0], shard.labels[i], p);
    return acc / static_cast<double>(shard.size());
  }

  double f_value(const Matrix& x, const Matrix& y) const override {
    double acc = 0.0;
    for (int n = 0; n < num_clients(); ++n) acc += client_value(n, x, y);
    return acc / num_clients();
  }

  /// Exact maximizer of the (concave quadratic in w3) global objective:
  ///   w3* = sum_n (p_n E_n[h 1_-] - (1-p_n) E_n[h 1_+]) / sum_n p_n (1-p_n).
  /// With a common ratio and equal shard sizes this is the pooled formula.
  std::optional<Matrix> y_star(const Matrix& x) const override {
    double num = 0.0, den = 0.0;
    for (std::size_t n = 0; n < shards_.size(); ++n) {
      const auto& shard = shards_[n];
      const double p = ratios_[n];
      double neg = 0.0, pos = 0.0;
      for (std::size_t i = 0; i < shard.size(); ++i) {
        const double h = score(x, shard.features[i]);
        (shard.labels[i] == 1 ? pos : neg) += h;
      }
      const auto m = static_cast<double>(shard.size());
      num += p * neg / m - (1.0 - p) * pos / m;
      den += p * (1.0 - p);
    }
    Matrix w3(1, 1);
    w3[0] = num / den;
    return w3;
  }

  std::optional<double> evaluate_auc(const Matrix& x) const override {
    std::vector<double> scores;
    std::vector<int> labels;
    auto add = [&](const Dataset& ds) {
      for (std::size_t i = 0; i < ds.size(); ++i) {
        scores.push_back(score(x, ds.features[i]));
        labels.push_back(ds.labels[i]);
      }
    };
    if (opts_.test_set)
      add(*opts_.test_set);
    else
      for (const auto& s : shards_) add(s);
    return metrics::auc_score(scores, labels);
  }

 private:
  double score(const Matrix& x, const std::vector<double>& a) const {
    double h = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) h += x[j] * a[j];
    return h;
  }

  void check_args(const Matrix& x, const Matrix& y) const {
    if (x.size() != dim_ + 2 || y.size() != 1) throw InvalidArgument("AucProblem: argument has wrong size");
  }

  // Each client objective is quadratic, so its Hessian is exact from gradient
  // differences along the unit vectors; L_f is the largest spectral norm.
  double estimate_lipschitz() const {
    const std::size_t dx = dim_ + 2, d = dx + 1;
    const Matrix x0(dx, 1), y0(1, 1);
    double best = 0.0;
    for (int n = 0; n < num_clients(); ++n) {
      const GradPair g0 = grad(n, x0, y0);
      Matrix h(d, d);
      for (std::size_t k = 0; k < d; ++k) {
        Matrix xe = x0, ye = y0;
        if (k < dx)
          xe[k] = 1.0;
        else
          ye[0] = 1.0;
        const GradPair g = grad(n, xe, ye);
        for (std::size_t i = 0; i < dx; ++i) h(i, k) = g.x[i] - g0.x[i];
        h(dx, k) = g.y[0] - g0.y[0];
      }
      const Matrix sym = (h + h.transpose()) * 0.5;
      best = std::max(best, linalg::spectral_norm(sym));
    }
    return best;
  }

  std::vector<Dataset> shards_;
  std::size_t dim_;
  AucOptions opts_;
  std::vector<double> ratios_;
  double pooled_ratio_ = 0.5;
  double mu_ = 1.0;
  double l_f_ = 1.0;
};

inline AucProblem make_auc_problem(std::vector<Dataset> shards, std::size_t model_dim, AucOptions opts = {}) {
  return AucProblem(std::move(shards), model_dim, std::move(opts));
}

/// Rounds per epoch: one full pass over a shard at the given batch size,
/// with p minibatches consumed per round.
inline int rounds_per_epoch(std::size_t shard_size, int batch_size, int p) {
  const auto per_round = static_cast<std::size_t>(batch_size) * static_cast<std::size_t>(p);
  return static_cast<int>((shard_size + per_round - 1) / per_round);
}

}  // namespace fedminimax
