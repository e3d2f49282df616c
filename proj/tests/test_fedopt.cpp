#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fedminimax/fedopt.hpp"
#include "fedminimax/saddle.hpp"
#include "fedminimax/trace_io.hpp"

namespace fm = fedminimax;
using fm::Matrix;

namespace {

fm::NoiseModel pareto(double s, double sigma) {
  fm::NoiseModel m;
  m.family = fm::NoiseFamily::symmetrized_pareto;
  m.s = s;
  m.sigma = sigma;
  return m;
}

fm::ServerState zero_server(const fm::MinimaxProblem& prob) {
  fm::ServerState s;
  s.x = prob.initial_x();
  s.y = prob.initial_y();
  s.u = s.g_x = Matrix(prob.shape_x());
  s.v = s.g_y = Matrix(prob.shape_y());
  return s;
}

fm::ClientState zero_client(const fm::MinimaxProblem& prob) {
  fm::ClientState c;
  c.g_local_x = Matrix(prob.shape_x());
  c.g_local_y = Matrix(prob.shape_y());
  return c;
}

fm::SaddleProblem identity_saddle(std::size_t d) {
  fm::SaddleProblem::Client cl{Matrix::identity(d), Matrix(d, 1), std::vector<double>(d, 0.0)};
  return fm::SaddleProblem(fm::Shape::vector(d), fm::Shape::vector(d), 1.0, 0.0, {cl});
}

Matrix seeded_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  fm::Stream st = fm::Stream::from_seed(seed);
  Matrix m(r, c);
  for (double& v : m.values()) v = st.normal();
  return m;
}

}  // namespace

// ------------------------------------------------------------ step rules

TEST(LocalMomentum, Examples) {
  const Matrix g = Matrix::column({2.0, 0.0}), zero(2, 1);
  EXPECT_EQ(fm::local_momentum(g, zero, zero, Matrix::column({0.0, 2.0}), 0.5), Matrix::column({1.0, 1.0}));
  const Matrix gp = Matrix::column({1.0, 5.0}), gl = Matrix::column({0.5, 1.0});
  EXPECT_EQ(fm::local_momentum(g, gp, gl, Matrix::column({9.0, 9.0}), 1.0), g + gp - gl);
  // A single client: the correction cancels exactly.
  EXPECT_EQ(fm::local_momentum(g, gp, gp, zero, 1.0), g);
  EXPECT_THROW(fm::local_momentum(g, Matrix(3, 1), zero, zero, 0.5), fm::InvalidArgument);
  EXPECT_THROW(fm::local_momentum(g, zero, zero, zero, 0.0), fm::InvalidArgument);
}

TEST(NormalizedStep, Examples) {
  const Matrix z(2, 1), m = Matrix::column({3.0, 4.0});
  const Matrix down = fm::normalized_step(z, m, 0.1, fm::Direction::descend);
  EXPECT_NEAR(down[0], -0.06, 1e-15);
  EXPECT_NEAR(down[1], -0.08, 1e-15);
  const Matrix up = fm::normalized_step(z, m, 0.1, fm::Direction::ascend);
  EXPECT_NEAR(up[0], 0.06, 1e-15);
  EXPECT_NEAR(up[1], 0.08, 1e-15);
  EXPECT_EQ(fm::normalized_step(m, Matrix(2, 1), 0.1, fm::Direction::descend), m);
  EXPECT_THROW(fm::normalized_step(m, Matrix(2, 1), 0.1, fm::Direction::descend, fm::ZeroMomentumPolicy::error),
               fm::DegenerateMomentum);
}

TEST(NormalizedStep, StepLengthIsExactlyEta) {
  fm::Stream st = fm::Stream::from_seed(1);
  for (int trial = 0; trial < 200; ++trial) {
    Matrix z(5, 1), m(5, 1);
    const double scale = std::pow(10.0, st.uniform(-12.0, 12.0));
    for (std::size_t k = 0; k < 5; ++k) {
      z[k] = st.normal();
      m[k] = scale * st.normal();
    }
    const double eta = st.uniform(1e-4, 1.0);
    EXPECT_NEAR(fm::distance(fm::normalized_step(z, m, eta, fm::Direction::descend), z), eta, 1e-12);
  }
}

TEST(MuonStep, ColumnEqualsNormalizedStep) {
  const Matrix z = Matrix::column({0.5, -1.0}), m = Matrix::column({3.0, 4.0});
  const fm::PolarSettings exact{fm::NsMode::exact_svd, 10, 4};
  const Matrix a = fm::muon_step(z, m, 0.1, fm::Direction::descend, exact);
  const Matrix b = fm::normalized_step(z, m, 0.1, fm::Direction::descend);
  EXPECT_LE(fm::distance(a, b), 1e-14);
  const Matrix c = fm::muon_step(z, m, 0.1, fm::Direction::descend, fm::PolarSettings{});
  EXPECT_LE(fm::distance(c, b), 0.1 * 1e-6);
}

TEST(MuonStep, ScaledIdentity) {
  const Matrix z = seeded_matrix(3, 3, 1);
  const Matrix out = fm::muon_step(z, Matrix::identity(3) * 5.0, 0.1, fm::Direction::descend, fm::PolarSettings{});
  EXPECT_LE(fm::distance(out, z - Matrix::identity(3) * 0.1), 1e-9);
}

TEST(MuonStep, IterativeMatchesExact) {
  const Matrix z = seeded_matrix(4, 3, 2), m = seeded_matrix(4, 3, 3);
  const double eta = 0.05;
  const Matrix it = fm::muon_step(z, m, eta, fm::Direction::ascend, {fm::NsMode::iterative, 10, 4});
  const Matrix ex = fm::muon_step(z, m, eta, fm::Direction::ascend, {fm::NsMode::exact_svd, 10, 4});
  EXPECT_LE(fm::distance(it, ex), eta * 1e-6);
  // The step norm is eta * sqrt(rank) for full-column-rank momentum.
  EXPECT_NEAR(fm::distance(ex, z), eta * std::sqrt(3.0), 1e-12);
}

TEST(MuonStep, ZeroMomentumPolicy) {
  const Matrix z = seeded_matrix(3, 2, 4);
  EXPECT_EQ(fm::muon_step(z, Matrix(3, 2), 0.1, fm::Direction::descend, {}), z);
  EXPECT_THROW(fm::muon_step(z, Matrix(3, 2), 0.1, fm::Direction::descend, {}, fm::ZeroMomentumPolicy::error),
               fm::DegenerateMomentum);
}

TEST(ClipStep, Examples) {
  const Matrix z(2, 1), m = Matrix::column({3.0, 4.0});
  double clipped = 0;
  const Matrix a = fm::clip_step(z, m, 0.5, 10.0, fm::Direction::descend, &clipped);
  EXPECT_EQ(a, m * -0.5);
  EXPECT_DOUBLE_EQ(clipped, 5.0);
  const Matrix b = fm::clip_step(z, m, 1.0, 0.1, fm::Direction::descend, &clipped);
  EXPECT_NEAR(b[0], -0.06, 1e-15);
  EXPECT_NEAR(b[1], -0.08, 1e-15);
  EXPECT_NEAR(clipped, 0.1, 1e-15);
  EXPECT_EQ(fm::clip_step(m, Matrix(2, 1), 1.0, 0.1, fm::Direction::ascend), m);
  EXPECT_THROW(fm::clip_step(z, m, 1.0, 0.0, fm::Direction::ascend), fm::InvalidArgument);
}

TEST(Enums, MomentumInitRoundTrip) {
  for (auto m : {fm::MomentumInit::zero, fm::MomentumInit::warm_start})
    EXPECT_EQ(fm::parse_momentum_init(fm::to_string(m)), m);
  for (auto a : {fm::Algorithm::nsgda_m, fm::Algorithm::muon_da, fm::Algorithm::local_sgda_m, fm::Algorithm::sgda_clip})
    EXPECT_EQ(fm::parse_algorithm(fm::to_string(a)), a);
  EXPECT_FALSE(fm::parse_algorithm("adam"));
}

// --------------------------------------------------------- client/server

TEST(ClientRound, SingleStepMatchesReference) {
  const auto prob = fm::make_saddle_problem(1, 4, 3, 1.0, 1.0, 0.5, 1);
  fm::HyperParams hp;
  hp.N = 1;
  hp.p = 1;
  hp.beta_x = hp.beta_y = 1.0;
  hp.eta_x = 0.1;
  hp.eta_y = 0.2;
  const fm::noise::NoiseSampler sampler(fm::NoiseModel::none());
  auto server = zero_server(prob);
  server.x = Matrix::column({0.3, -0.2, 0.1, 0.4});
  const auto res = fm::client_round(0, server, zero_client(prob), prob, hp, sampler, fm::Algorithm::nsgda_m, 1);
  const auto g = prob.grad(0, server.x, server.y);
  EXPECT_EQ(res.g_local_x, g.x);
  EXPECT_EQ(res.g_local_y, g.y);
  EXPECT_EQ(res.x_final, fm::normalized_step(server.x, g.x, 0.1, fm::Direction::descend));
  EXPECT_EQ(res.y_final, fm::normalized_step(server.y, g.y, 0.2, fm::Direction::ascend));
  ASSERT_EQ(res.drift_x.size(), 1u);
  EXPECT_NEAR(res.drift_x[0], 0.1, 1e-15);
}

TEST(ClientRound, IdenticalClientsAgree) {
  const auto prob = fm::make_saddle_problem(3, 5, 5, 1.0, 1.0, 0.0, 2);
  auto hp = fm::theorem1_schedule(3, 4, 100, prob.smoothness());
  const fm::noise::NoiseSampler sampler(fm::NoiseModel::none());
  const auto server = zero_server(prob);
  const auto r0 = fm::client_round(0, server, zero_client(prob), prob, hp, sampler, fm::Algorithm::nsgda_m, 1);
  for (int n = 1; n < 3; ++n) {
    const auto r = fm::client_round(n, server, zero_client(prob), prob, hp, sampler, fm::Algorithm::nsgda_m, 1);
    EXPECT_EQ(r.x_final, r0.x_final);
    EXPECT_EQ(r.g_local_x, r0.g_local_x);
  }
}

TEST(ClientRound, RoundAverageUsesTheUpdateSamples) {
  // With p steps and pure noise on a zero-curvature direction, the round
  // average must be the mean of exactly the gradients that drove the steps.
  const auto prob = fm::make_saddle_problem(2, 3, 3, 1.0, 1.0, 0.5, 3);
  fm::HyperParams hp;
  hp.N = 2;
  hp.p = 5;
  hp.beta_x = hp.beta_y = 1.0;
  const fm::noise::NoiseSampler sampler(pareto(1.5, 1.0));
  const auto server = zero_server(prob);
  const auto res = fm::client_round(1, server, zero_client(prob), prob, hp, sampler, fm::Algorithm::nsgda_m, 9);

  Matrix x = server.x, y = server.y, acc_x(3, 1);
  for (int i = 0; i < 5; ++i) {
    const auto g = fm::sampled_grad(prob, sampler, 1, x, y, {9, 1, 0, static_cast<std::uint64_t>(i)});
    x = fm::normalized_step(x, g.x, hp.eta_x, fm::Direction::descend);
    y = fm::normalized_step(y, g.y, hp.eta_y, fm::Direction::ascend);
    acc_x += g.x;
    EXPECT_NEAR(res.drift_x[static_cast<std::size_t>(i)], fm::distance(x, server.x), 1e-15);
  }
  EXPECT_EQ(res.x_final, x);
  EXPECT_LE(fm::distance(res.g_local_x, acc_x * 0.2), 1e-15 * (1 + acc_x.frobenius_norm()));
}

TEST(ClientRound, LocalSgdaMomentumIsRecursive) {
  const auto prob = fm::make_saddle_problem(1, 3, 2, 1.0, 1.0, 0.5, 4);
  fm::HyperParams hp;
  hp.N = 1;
  hp.p = 3;
  hp.beta_x = hp.beta_y = 0.9;
  const fm::noise::NoiseSampler sampler(fm::NoiseModel::none());
  auto server = zero_server(prob);
  server.u = Matrix::column({1.0, 2.0, 3.0});
  server.g_x = Matrix::column({5.0, 5.0, 5.0});  // ignored: no control variates
  const auto res = fm::client_round(0, server, zero_client(prob), prob, hp, sampler, fm::Algorithm::local_sgda_m, 1);

  Matrix x = server.x, y = server.y, u = server.u, v = server.v;
  for (int i = 0; i < 3; ++i) {
    const auto g = prob.grad(0, x, y);
    u = g.x * 0.9 + u * 0.1;
    v = g.y * 0.9 + v * 0.1;
    x = x - u * hp.eta_x;
    y = y + v * hp.eta_y;
  }
  EXPECT_LE(fm::distance(res.x_final, x), 1e-15);
  EXPECT_LE(fm::distance(res.momentum_x, u), 1e-15);
  EXPECT_LE(fm::distance(res.momentum_y, v), 1e-15);
}

TEST(ServerRound, Examples) {
  fm::HyperParams hp;
  hp.N = 2;
  hp.p = 1;
  hp.beta_x = hp.beta_y = 1.0;
  fm::ServerState s;
  s.x = Matrix::column({1.0, 1.0});
  s.y = Matrix(1, 1);
  s.u = s.g_x = Matrix(2, 1);
  s.v = s.g_y = Matrix(1, 1);
  fm::ClientResult a, b;
  a.g_local_x = Matrix::column({1.0, 0.0});
  b.g_local_x = Matrix::column({3.0, 2.0});
  a.g_local_y = b.g_local_y = Matrix(1, 1);
  a.x_final = b.x_final = s.x;
  a.y_final = b.y_final = s.y;
  a.momentum_x = b.momentum_x = Matrix(2, 1);
  a.momentum_y = b.momentum_y = Matrix(1, 1);
  const auto next = fm::server_round(s, {a, b}, hp);
  EXPECT_EQ(next.g_x, Matrix::column({2.0, 1.0}));
  EXPECT_EQ(next.x, s.x);
  EXPECT_EQ(next.u, next.g_x);
  EXPECT_EQ(next.round, 1);
  EXPECT_THROW(fm::server_round(s, {a}, hp), fm::ProtocolError);
  EXPECT_THROW(fm::server_round(s, {a, b, a}, hp), fm::ProtocolError);
}

TEST(ServerRound, GlobalStepScalesDisplacement) {
  fm::HyperParams hp;
  hp.N = 2;
  hp.p = 2;
  hp.gamma_x = 0.3;
  hp.eta_x = 0.1;
  hp.beta_x = 0.25;
  fm::ServerState s;
  s.x = Matrix(1, 1);
  s.y = Matrix(1, 1);
  s.u = Matrix::column({4.0});
  s.g_x = s.v = s.g_y = Matrix(1, 1);
  fm::ClientResult a, b;
  a.x_final = Matrix::column({0.2});
  b.x_final = Matrix::column({0.1});
  a.y_final = b.y_final = Matrix(1, 1);
  a.g_local_x = Matrix::column({2.0});
  b.g_local_x = Matrix::column({4.0});
  a.g_local_y = b.g_local_y = a.momentum_y = b.momentum_y = Matrix(1, 1);
  a.momentum_x = b.momentum_x = Matrix(1, 1);
  const auto next = fm::server_round(s, {a, b}, hp);
  EXPECT_NEAR(next.x[0], 0.3 / (0.1 * 4) * 0.3, 1e-15);
  EXPECT_NEAR(next.u[0], 0.25 * 3.0 + 0.75 * 4.0, 1e-15);
}

// ------------------------------------------------------------------- run

TEST(Run, OneRoundHandCalculation) {
  const auto prob = fm::make_saddle_problem(1, 3, 2, 1.0, 1.0, 0.5, 5);
  fm::HyperParams hp;
  hp.N = 1;
  hp.p = 1;
  hp.T = 2;
  hp.gamma_x = 0.05;
  hp.gamma_y = 0.4;
  hp.eta_x = 0.02;
  hp.eta_y = 0.03;
  hp.beta_x = hp.beta_y = 0.3;
  const auto tr = fm::run(fm::Algorithm::nsgda_m, prob, hp, fm::NoiseModel::none(), 1);
  ASSERT_EQ(tr.records.size(), 2u);

  // Round 0 by hand: zero initial momentum and corrections. At x = 0 the
  // coupling term vanishes, so grad_y f(0, 0) = 0 and the y step is skipped.
  const Matrix x0(3, 1), y0(2, 1);
  const auto g = prob.grad(0, x0, y0);
  ASSERT_EQ(g.y.frobenius_norm(), 0.0);
  const Matrix mx = g.x * 0.3;                                       // local momentum
  const Matrix xl = x0 - mx * (0.02 / mx.frobenius_norm());          // local step
  const Matrix x1 = x0 + (xl - x0) * (0.05 / 0.02);                  // global step
  const Matrix y1 = y0;
  const Matrix u0 = g.x * 0.3, v0 = g.y * 0.3;                       // global momentum
  const auto& r0 = tr.records[0];
  EXPECT_NEAR(r0.grad_phi_norm, prob.phi_grad(x0)->frobenius_norm(), 1e-14);
  EXPECT_NEAR(r0.f_value, prob.f_value(x0, y0), 1e-14);
  EXPECT_NEAR(r0.max_drift_x, 0.02, 1e-15);
  EXPECT_EQ(r0.max_drift_y, 0.0);
  EXPECT_NEAR(r0.server_step_x, 0.05, 1e-15);
  EXPECT_EQ(r0.server_step_y, 0.0);
  EXPECT_NEAR(r0.grad_err_x, fm::distance(g.x, u0), 1e-14);
  EXPECT_NEAR(r0.grad_err_y, fm::distance(g.y, v0), 1e-14);
  const double phi0 = prob.f_value(x0, *prob.y_star(x0));
  EXPECT_NEAR(r0.potential, 4 * phi0 - prob.f_value(x0, y0), 1e-13);
  EXPECT_FALSE(r0.auc.has_value());

  // Round 1 starts at (x1, y1).
  const auto& r1 = tr.records[1];
  EXPECT_NEAR(r1.f_value, prob.f_value(x1, y1), 1e-13);
  EXPECT_NEAR(r1.grad_phi_norm, prob.phi_grad(x1)->frobenius_norm(), 1e-13);
  EXPECT_NEAR(*r1.displacement_x, fm::distance(x1, x0), 1e-15);
  // With N = 1 the correction g_{t-1} - g^(1)_{t-1} vanishes.
  EXPECT_EQ(*r1.centering_x, 0.0);
  const auto g1 = prob.grad(0, x1, y1);
  const Matrix u1 = g1.x * 0.3 + u0 * 0.7;
  EXPECT_NEAR(r1.grad_err_x, fm::distance(g1.x, u1), 1e-13);
}

TEST(Run, SameSeedGivesIdenticalTraces) {
  const auto prob = fm::make_saddle_problem(4, 6, 6, 1.0, 1.0, 0.5, 1);
  const auto hp = fm::theorem1_schedule(4, 3, 30, prob.smoothness());
  const auto a = fm::run(fm::Algorithm::muon_da, prob, hp, pareto(1.5, 1.0), 3);
  const auto b = fm::run(fm::Algorithm::muon_da, prob, hp, pareto(1.5, 1.0), 3);
  const auto c = fm::run(fm::Algorithm::muon_da, prob, hp, pareto(1.5, 1.0), 4);
  EXPECT_EQ(fm::trace_to_csv(a), fm::trace_to_csv(b));
  EXPECT_NE(fm::trace_to_csv(a), fm::trace_to_csv(c));
}

TEST(Run, ParallelClientsMatchSequential) {
  const auto prob = fm::make_saddle_problem(6, 5, 5, 1.0, 1.0, 0.5, 2);
  const auto hp = fm::theorem1_schedule(6, 4, 25, prob.smoothness());
  fm::RunOptions par;
  par.parallel_clients = true;
  for (auto alg : {fm::Algorithm::nsgda_m, fm::Algorithm::sgda_clip}) {
    const auto seq = fm::run(alg, prob, hp, pareto(1.5, 1.0), 5);
    const auto con = fm::run(alg, prob, hp, pareto(1.5, 1.0), 5, par);
    EXPECT_EQ(fm::trace_to_csv(seq), fm::trace_to_csv(con));
  }
}

TEST(Run, MuonOnColumnMatrixEqualsNormalizedRun) {
  const auto vec = fm::make_saddle_problem(4, fm::Shape::vector(6), fm::Shape::vector(3), 1.0, 1.0, 0.5, 3);
  const auto col = fm::make_saddle_problem(4, fm::Shape::matrix(6, 1), fm::Shape::matrix(3, 1), 1.0, 1.0, 0.5, 3);
  const auto hp = fm::theorem1_schedule(4, 2, 60, vec.smoothness());
  const auto a = fm::run(fm::Algorithm::nsgda_m, vec, hp, pareto(1.5, 1.0), 2);
  const auto b = fm::run(fm::Algorithm::muon_da, col, hp, pareto(1.5, 1.0), 2);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t t = 0; t < a.records.size(); ++t) {
    EXPECT_NEAR(a.records[t].grad_phi_norm, b.records[t].grad_phi_norm, 1e-8);
    EXPECT_NEAR(a.records[t].f_value, b.records[t].f_value, 1e-8);
    EXPECT_NEAR(a.records[t].server_step_x, b.records[t].server_step_x, 1e-8);
  }
}

TEST(Run, MatrixShapedMuonRespectsSqrtColumnBounds) {
  const auto prob = fm::make_saddle_problem(4, fm::Shape::matrix(4, 3), fm::Shape::matrix(3, 2), 1.0, 1.0, 0.5, 1);
  const auto hp = fm::theorem1_schedule(4, 3, 40, prob.smoothness());
  const auto tr = fm::run(fm::Algorithm::muon_da, prob, hp, pareto(1.5, 1.0), 1);
  EXPECT_EQ(tr.cols_x, 3u);
  EXPECT_EQ(tr.cols_y, 2u);
  const auto report = fm::metrics::verify_invariants(tr, hp);
  EXPECT_TRUE(report.all_passed()) << report.to_text();
  double biggest = 0;
  for (const auto& r : tr.records) biggest = std::max(biggest, r.server_step_x);
  EXPECT_GT(biggest, hp.gamma_x);  // a rank-3 step exceeds the vector bound
}

TEST(Run, WarmStartInitializesFromGradients) {
  const auto prob = fm::make_saddle_problem(3, 4, 4, 1.0, 1.0, 0.5, 1);
  // One local step, so the round-0 gradient average is taken at x_0 exactly.
  auto hp = fm::theorem1_schedule(3, 1, 5, prob.smoothness());
  fm::RunOptions opts;
  opts.momentum_init = fm::MomentumInit::warm_start;
  const auto tr = fm::run(fm::Algorithm::nsgda_m, prob, hp, fm::NoiseModel::none(), 1, opts);
  const auto g = fm::full_grad(prob, prob.initial_x(), prob.initial_y());
  EXPECT_NEAR(*tr.records[0].g_prev_norm_x, g.x.frobenius_norm(), 1e-14);
  // u_{-1} = g_{-1} = g_0 = grad f(x_0, y_0), hence u_0 = grad f(x_0, y_0).
  EXPECT_LE(tr.records[0].grad_err_x, 1e-12);
  EXPECT_TRUE(fm::metrics::verify_invariants(tr, hp).all_passed());
}

TEST(Run, ZeroMomentumPolicy) {
  // At the stationary point of the identity instance every gradient vanishes.
  const auto prob = identity_saddle(2);
  auto hp = fm::theorem1_schedule(1, 2, 3, prob.smoothness());
  const auto skip = fm::run(fm::Algorithm::nsgda_m, prob, hp, fm::NoiseModel::none(), 1);
  for (const auto& r : skip.records) {
    EXPECT_EQ(r.server_step_x, 0.0);
    EXPECT_EQ(r.max_drift_y, 0.0);
  }
  hp.zero_momentum_policy = fm::ZeroMomentumPolicy::error;
  EXPECT_THROW(fm::run(fm::Algorithm::nsgda_m, prob, hp, fm::NoiseModel::none(), 1), fm::DegenerateMomentum);
  EXPECT_THROW(fm::run(fm::Algorithm::muon_da, prob, hp, fm::NoiseModel::none(), 1), fm::DegenerateMomentum);
}

TEST(Run, RejectsClientCountMismatch) {
  const auto prob = fm::make_saddle_problem(3, 4, 4, 1.0, 1.0, 0.5, 1);
  auto hp = fm::theorem1_schedule(2, 2, 5, prob.smoothness());
  EXPECT_THROW(fm::run(fm::Algorithm::nsgda_m, prob, hp, fm::NoiseModel::none(), 1), fm::InvalidArgument);
}

TEST(Run, BaselineDivergenceIsFlagged) {
  const auto prob = fm::make_saddle_problem(2, 4, 4, 1.0, 1.0, 0.5, 1);
  fm::HyperParams hp;
  hp.N = 2;
  hp.p = 2;
  hp.T = 200;
  hp.gamma_x = hp.gamma_y = hp.eta_x = hp.eta_y = 5.0;
  hp.beta_x = hp.beta_y = 0.9;
  const auto tr = fm::run(fm::Algorithm::local_sgda_m, prob, hp, pareto(1.2, 1.0), 1);
  EXPECT_TRUE(tr.diverged);
  ASSERT_TRUE(tr.diverged_round.has_value());
  EXPECT_EQ(tr.records.size(), 200u);

  fm::RunOptions halt;
  halt.halt_on_divergence = true;
  const auto stopped = fm::run(fm::Algorithm::local_sgda_m, prob, hp, pareto(1.2, 1.0), 1, halt);
  EXPECT_EQ(static_cast<int>(stopped.records.size()), *tr.diverged_round + 1);
  EXPECT_TRUE(fm::metrics::verify_invariants(stopped, hp).find("record_count")->passed);
}

TEST(Run, BoundedAlgorithmsStayBoundedUnderHeavyTails) {
  const auto prob = fm::make_saddle_problem(4, 5, 5, 1.0, 1.0, 0.5, 1);
  for (auto alg : {fm::Algorithm::nsgda_m, fm::Algorithm::muon_da, fm::Algorithm::sgda_clip}) {
    auto hp = fm::theorem1_schedule(4, 4, 100, prob.smoothness());
    hp.beta_x = hp.beta_y = alg == fm::Algorithm::sgda_clip ? 0.9 : hp.beta_x;
    const auto tr = fm::run(alg, prob, hp, pareto(1.2, 5.0), 2);
    const auto report = fm::metrics::verify_invariants(tr, hp);
    EXPECT_TRUE(report.all_passed()) << fm::to_string(alg) << "\n" << report.to_text();
    EXPECT_FALSE(tr.diverged);
  }
}
