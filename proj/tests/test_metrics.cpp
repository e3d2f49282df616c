#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "fedminimax/auc.hpp"
#include "fedminimax/fedopt.hpp"
#include "fedminimax/metrics.hpp"
#include "fedminimax/saddle.hpp"

namespace fm = fedminimax;
namespace mx = fedminimax::metrics;
using fm::Matrix;

namespace {

// AUC from average ranks (Mann–Whitney U), an independent formulation of
// the pairwise count.
double rank_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  std::vector<double> rank(scores.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  double rsum = 0, npos = 0, nneg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1) {
      rsum += rank[i];
      ++npos;
    } else {
      ++nneg;
    }
  }
  return (rsum - npos * (npos + 1) / 2) / (npos * nneg);
}

fm::SaddleProblem identity_saddle(std::size_t d) {
  fm::SaddleProblem::Client cl{Matrix::identity(d), Matrix(d, 1), std::vector<double>(d, 0.0)};
  return fm::SaddleProblem(fm::Shape::vector(d), fm::Shape::vector(d), 1.0, 0.0, {cl});
}

fm::RoundRecord clean_record(int t) {
  fm::RoundRecord r;
  r.t = t;
  r.grad_phi_norm = 1.0;
  r.f_value = 0.5;
  r.phi_value = 1.0;
  r.potential = 4.0 * 1.0 - 0.5;
  r.centering_x = r.centering_y = 0.0;
  r.g_prev_norm_x = r.g_prev_norm_y = 1.0;
  r.displacement_x = r.displacement_y = 0.0;
  return r;
}

fm::RunTrace clean_trace(fm::Algorithm alg, int T) {
  fm::RunTrace tr;
  tr.algorithm = alg;
  tr.rounds_planned = T;
  for (int t = 0; t < T; ++t) tr.records.push_back(clean_record(t));
  return tr;
}

fm::HyperParams simple_hp() {
  fm::HyperParams hp;
  hp.eta_x = 0.01;
  hp.eta_y = 0.02;
  hp.gamma_x = 0.05;
  hp.gamma_y = 0.5;
  hp.p = 4;
  hp.T = 10;
  return hp;
}

}  // namespace

TEST(AucScore, Examples) {
  const std::vector<int> labels{1, 1, -1, -1};
  EXPECT_DOUBLE_EQ(mx::auc_score(std::vector<double>{3, 4, 1, 2}, labels), 1.0);
  EXPECT_DOUBLE_EQ(mx::auc_score(std::vector<double>{1, 2, 3, 4}, labels), 0.0);
  EXPECT_DOUBLE_EQ(mx::auc_score(std::vector<double>{7, 7, 7, 7}, labels), 0.5);
  EXPECT_THROW(mx::auc_score(std::vector<double>{1, 2}, std::vector<int>{1, 1}), fm::InvalidArgument);
  EXPECT_THROW(mx::auc_score(std::vector<double>{1, 2}, std::vector<int>{1, 0}), fm::InvalidArgument);
  EXPECT_THROW(mx::auc_score(std::vector<double>{1}, std::vector<int>{1, -1}), fm::InvalidArgument);
}

TEST(AucScore, MatchesRankFormulation) {
  fm::Stream st = fm::Stream::from_seed(2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 200; ++i) {
      const int b = i < 30 ? 1 : -1;
      // Rounded scores force many ties.
      scores.push_back(std::round(4.0 * (st.normal() + 0.5 * b)) / 4.0);
      labels.push_back(b);
    }
    EXPECT_NEAR(mx::auc_score(scores, labels), rank_auc(scores, labels), 1e-12);
  }
}

TEST(Phi, IdentityInstanceIsHalfSquaredNorm) {
  const auto prob = identity_saddle(2);
  const auto e = mx::phi_value_and_grad(prob, Matrix::column({1.0, 1.0}), 1e-10);
  EXPECT_DOUBLE_EQ(e.value, 1.0);
  EXPECT_EQ(e.grad, Matrix::column({1.0, 1.0}));
  EXPECT_EQ(e.grad_error_bound, 0.0);
}

TEST(Phi, AscentAgreesWithClosedForm) {
  const auto prob = fm::make_saddle_problem(4, 10, 8, 1.0, 1.0, 0.5, 3);
  fm::Stream st = fm::Stream::from_seed(3);
  const double tol = 1e-8;
  for (int trial = 0; trial < 5; ++trial) {
    Matrix x(prob.shape_x());
    for (double& v : x.values()) v = st.normal();
    const auto closed = mx::phi_value_and_grad(prob, x, tol);
    mx::PhiOptions opts;
    opts.use_closed_form = false;
    const auto ascent = mx::phi_value_and_grad(prob, x, tol, opts);
    EXPECT_GT(ascent.iterations, 0);
    EXPECT_LE(fm::distance(closed.grad, ascent.grad), 10 * tol);
    EXPECT_NEAR(closed.value, ascent.value, 10 * tol);
    EXPECT_LE(fm::distance(closed.grad, ascent.grad), ascent.grad_error_bound);
  }
}

TEST(Phi, AucAscentAgreesWithClosedFormMaximizer) {
  const auto prob = fm::make_auc_problem(fm::gen_imbalanced_data(100, {0.1, 0.3}, 4, 2.0, 1), 4);
  Matrix x = Matrix::column({0.5, -0.2, 0.1, 0.3, 0.2, -0.4});
  const auto closed = mx::phi_value_and_grad(prob, x, 1e-10);
  mx::PhiOptions opts;
  opts.use_closed_form = false;
  const auto ascent = mx::phi_value_and_grad(prob, x, 1e-10, opts);
  EXPECT_NEAR(closed.y[0], ascent.y[0], 1e-8);
  EXPECT_LE(fm::distance(closed.grad, ascent.grad), 1e-8);
}

TEST(Phi, GradientMatchesFiniteDifferences) {
  const auto prob = fm::make_saddle_problem(4, 6, 6, 1.0, 1.0, 0.5, 5);
  fm::Stream st = fm::Stream::from_seed(5);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix x(prob.shape_x());
    for (double& v : x.values()) v = st.normal();
    const auto e = mx::phi_value_and_grad(prob, x, 1e-10);
    Matrix fd(x.rows(), x.cols());
    const double h = 1e-6;
    for (std::size_t k = 0; k < x.size(); ++k) {
      Matrix xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      fd[k] = (mx::phi_value_and_grad(prob, xp, 1e-10).value - mx::phi_value_and_grad(prob, xm, 1e-10).value) / (2 * h);
    }
    EXPECT_LE(fm::distance(e.grad, fd), 1e-5 * (1.0 + e.grad.frobenius_norm()));
  }
}

TEST(Phi, AscentValuesAreMonotone) {
  const auto prob = fm::make_saddle_problem(3, 5, 5, 2.0, 1.0, 0.5, 6);
  mx::PhiOptions opts;
  opts.use_closed_form = false;
  opts.record_ascent = true;
  const auto e = mx::phi_value_and_grad(prob, Matrix::column({1, 2, 3, 4, 5}), 1e-9, opts);
  ASSERT_GT(e.ascent_values.size(), 2u);
  for (std::size_t k = 1; k < e.ascent_values.size(); ++k)
    EXPECT_GE(e.ascent_values[k], e.ascent_values[k - 1] - 1e-12);
}

TEST(Phi, ReportsConvergenceFailure) {
  const auto prob = fm::make_saddle_problem(3, 5, 5, 1.0, 1.0, 0.5, 6);
  mx::PhiOptions opts;
  opts.use_closed_form = false;
  opts.max_iters = 2;
  EXPECT_THROW(mx::phi_value_and_grad(prob, Matrix::column({1, 2, 3, 4, 5}), 1e-12, opts), fm::ConvergenceFailure);
  EXPECT_THROW(mx::phi_value_and_grad(prob, Matrix(5, 1), 0.0), fm::InvalidArgument);
}

TEST(StepBounds, PerAlgorithm) {
  auto hp = simple_hp();
  hp.tau = 0.3;
  const auto nsgda = mx::step_bounds(fm::Algorithm::nsgda_m, hp, 3, 1);
  EXPECT_DOUBLE_EQ(nsgda.local_x, 0.01);
  EXPECT_DOUBLE_EQ(nsgda.server_y, 0.5);
  const auto muon = mx::step_bounds(fm::Algorithm::muon_da, hp, 4, 1);
  EXPECT_DOUBLE_EQ(muon.local_x, 0.02);
  EXPECT_DOUBLE_EQ(muon.server_x, 0.1);
  EXPECT_DOUBLE_EQ(muon.local_y, 0.02);
  const auto clip = mx::step_bounds(fm::Algorithm::sgda_clip, hp, 1, 1);
  EXPECT_DOUBLE_EQ(clip.local_x, 0.003);
}

TEST(VerifyInvariants, CleanTracePasses) {
  const auto report = mx::verify_invariants(clean_trace(fm::Algorithm::nsgda_m, 10), simple_hp());
  EXPECT_TRUE(report.all_passed()) << report.to_text();
  EXPECT_EQ(report.find("drift_x")->rounds_checked, 10);
  EXPECT_TRUE(report.find("clip_norm")->skipped);
}

TEST(VerifyInvariants, ConstructedDriftViolation) {
  auto tr = clean_trace(fm::Algorithm::nsgda_m, 10);
  const auto hp = simple_hp();
  tr.records[4].max_drift_x = hp.eta_x * hp.p + 0.1;
  const auto report = mx::verify_invariants(tr, hp);
  EXPECT_FALSE(report.all_passed());
  const auto* e = report.find("drift_x");
  ASSERT_NE(e, nullptr);
  EXPECT_FALSE(e->passed);
  EXPECT_NEAR(e->max_violation, 0.1, 1e-12);
  EXPECT_EQ(report.failed_names(), std::vector<std::string>{"drift_x"});
}

TEST(VerifyInvariants, ConstructedCenteringViolation) {
  auto tr = clean_trace(fm::Algorithm::muon_da, 10);
  tr.records[3].centering_y = 1e-3;
  const auto report = mx::verify_invariants(tr, simple_hp());
  EXPECT_FALSE(report.find("centering_y")->passed);
  EXPECT_TRUE(report.find("centering_x")->passed);
}

TEST(VerifyInvariants, ServerStepAndBoundednessViolations) {
  auto tr = clean_trace(fm::Algorithm::nsgda_m, 10);
  const auto hp = simple_hp();
  tr.records[2].server_step_y = hp.gamma_y * 1.5;
  tr.records[5].displacement_x = 5 * hp.gamma_x + 1.0;
  const auto report = mx::verify_invariants(tr, hp);
  EXPECT_FALSE(report.find("server_step_y")->passed);
  EXPECT_FALSE(report.find("boundedness_x")->passed);
  EXPECT_NEAR(report.find("boundedness_x")->max_violation, 1.0, 1e-12);
}

TEST(VerifyInvariants, NonFiniteAndPotentialAndCount) {
  auto tr = clean_trace(fm::Algorithm::nsgda_m, 10);
  tr.records[1].f_value = NAN;
  tr.records[6].potential += 1.0;
  tr.records.pop_back();
  const auto report = mx::verify_invariants(tr, simple_hp());
  EXPECT_FALSE(report.find("finite")->passed);
  EXPECT_FALSE(report.find("potential_identity")->passed);
  EXPECT_FALSE(report.find("record_count")->passed);
}

TEST(VerifyInvariants, ClipNormAboveTauFails) {
  auto tr = clean_trace(fm::Algorithm::sgda_clip, 10);
  auto hp = simple_hp();
  for (auto& r : tr.records) r.max_clip_norm = hp.tau;
  EXPECT_TRUE(mx::verify_invariants(tr, hp).all_passed());
  tr.records[0].max_clip_norm = hp.tau * 2;
  EXPECT_FALSE(mx::verify_invariants(tr, hp).find("clip_norm")->passed);
}

TEST(VerifyInvariants, BaselineSkipsStepBounds) {
  auto tr = clean_trace(fm::Algorithm::local_sgda_m, 10);
  tr.records[0].max_drift_x = 1e6;
  const auto report = mx::verify_invariants(tr, simple_hp());
  EXPECT_TRUE(report.all_passed());
  EXPECT_TRUE(report.find("drift_x")->skipped);
  EXPECT_TRUE(report.find("centering_x")->skipped);
}

TEST(VerifyInvariants, MissingDiagnosticsAreSkipped) {
  auto tr = clean_trace(fm::Algorithm::nsgda_m, 5);
  for (auto& r : tr.records) {
    r.phi_value.reset();
    r.centering_x.reset();
    r.centering_y.reset();
    r.displacement_x.reset();
    r.displacement_y.reset();
  }
  const auto report = mx::verify_invariants(tr, simple_hp());
  EXPECT_TRUE(report.all_passed());
  EXPECT_TRUE(report.find("potential_identity")->skipped);
  EXPECT_TRUE(report.find("boundedness_x")->skipped);
  EXPECT_TRUE(report.find("centering_x")->skipped);
  EXPECT_FALSE(report.find("drift_x")->skipped);
}

TEST(VerifyInvariants, RealRunsPass) {
  const auto prob = fm::make_saddle_problem(4, 5, 5, 1.0, 1.0, 0.5, 1);
  fm::NoiseModel nm;
  nm.family = fm::NoiseFamily::symmetrized_pareto;
  nm.s = 1.5;
  nm.sigma = 1.0;
  for (auto alg : {fm::Algorithm::nsgda_m, fm::Algorithm::muon_da, fm::Algorithm::sgda_clip}) {
    auto hp = fm::theorem1_schedule(4, 3, 50, prob.smoothness());
    const auto tr = fm::run(alg, prob, hp, nm, 7);
    const auto report = mx::verify_invariants(tr, hp);
    EXPECT_TRUE(report.all_passed()) << fm::to_string(alg) << "\n" << report.to_text();
    EXPECT_EQ(report.find("drift_x")->rounds_checked, 50);
  }
}

TEST(VerifyInvariants, ReportFormats) {
  auto tr = clean_trace(fm::Algorithm::nsgda_m, 3);
  tr.records[0].max_drift_y = 10.0;
  const auto report = mx::verify_invariants(tr, simple_hp());
  const auto text = report.to_text();
  EXPECT_NE(text.find("FAIL  drift_y"), std::string::npos);
  EXPECT_NE(text.find("invariant violations detected"), std::string::npos);
  const auto csv = report.to_csv();
  EXPECT_EQ(csv.rfind("invariant,status,rounds_checked,max_violation\n", 0), 0u);
  EXPECT_NE(csv.find("drift_y,fail,3,"), std::string::npos);
}

TEST(WindowMean, FirstAndLastTenPercent) {
  fm::RunTrace tr;
  for (int t = 0; t < 20; ++t) {
    fm::RoundRecord r;
    r.t = t;
    r.grad_phi_norm = t;
    tr.records.push_back(r);
  }
  EXPECT_DOUBLE_EQ(mx::window_mean(tr, 0.1, false), 0.5);
  EXPECT_DOUBLE_EQ(mx::window_mean(tr, 0.1, true), 18.5);
  tr.records.resize(5);
  EXPECT_DOUBLE_EQ(mx::window_mean(tr, 0.1, true), 4.0);  // at least one round
  EXPECT_THROW(mx::window_mean(fm::RunTrace{}, 0.1, true), fm::InvalidArgument);
}
