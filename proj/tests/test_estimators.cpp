#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fbmc/estimators.hpp"

using namespace fbmc;

namespace {

CVec random_taps(int L, RngStream& rng) {
  CVec h(L);
  for (int i = 0; i < L; ++i) h[i] = rng.cgaussian(1.0 / L);
  return h;
}

}  // namespace

TEST_CASE("ls estimate is consistent and reports conditioning") {
  FbmcConfig cfg = make_config(64, 4);
  PilotPlan plan = design_plan(64, {16}, 16.0, 2);
  const int L = 8;
  CMat A = build_single_user_A(cfg, plan, L);
  RngStream rng(31);
  CVec h0 = random_taps(L, rng);
  double cond = 0.0;
  CVec h_hat = ls_estimate(A * h0, A, &cond);
  CHECK((h_hat - h0).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(cond >= 1.0);
  CHECK(cond < 100.0);

  // Duplicate columns: rank deficient.
  CMat bad(8, 3);
  bad.col(0) = CVec::Ones(8);
  bad.col(1) = CVec::Ones(8);
  bad.col(2) = CVec::LinSpaced(8, 0.0, 7.0).cast<Complex>();
  CHECK_THROWS_AS(ls_estimate(CVec::Zero(8), bad), std::domain_error);
}

TEST_CASE("ls estimator is unbiased and attains the trace-formula MSE") {
  FbmcConfig cfg = make_config(128, 4);
  PilotPlan plan = design_plan(128, {32}, 32.0, 4);
  const int L = 32;
  CMat A = build_single_user_A(cfg, plan, L);
  Eigen::ColPivHouseholderQR<CMat> qr(A);
  const CMat pinv = qr.solve(CMat::Identity(A.rows(), A.rows()));
  const CMat C0 = build_noise_covariance(cfg, plan, 1.0);
  const Eigen::LLT<CMat> lltC(C0);
  const CMat Lc = lltC.matrixL();

  const double sigma2 = 0.5;
  const int trials = 10000;
  RngStream rng = RngStream::derive(77, "noise");
  CVec mean_err = CVec::Zero(L);
  RVec var_acc = RVec::Zero(L);
  double mse_acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    // Demodulated noise has covariance sigma2*C0; draw via its Cholesky
    // factor rather than running the signal pipeline.
    CVec w(C0.rows());
    for (int i = 0; i < w.size(); ++i) w[i] = rng.cgaussian(sigma2);
    const CVec err = pinv * (Lc * w);
    mean_err += err;
    var_acc += err.cwiseAbs2();
    mse_acc += err.squaredNorm();
  }
  mean_err /= trials;
  // Per-tap unbiasedness: mean within 3 standard errors of zero.
  for (int l = 0; l < L; ++l) {
    const double se = std::sqrt(var_acc[l] / trials / trials);
    CHECK(std::abs(mean_err[l]) < 3.0 * se);
  }
  // Empirical MSE against the trace formula with the true (correlated)
  // noise covariance.
  const CMat cov = pinv * (sigma2 * C0) * pinv.adjoint();
  const double want = cov.trace().real();
  CHECK(mse_acc / trials == doctest::Approx(want).epsilon(0.05));
  // And the correlation-free trace formula is close for the sparse comb.
  CHECK(want == doctest::Approx(sigma2 * (A.adjoint() * A).inverse().trace().real())
                    .epsilon(0.02));
}

TEST_CASE("gls recovers noiseless channels exactly") {
  FbmcConfig cfg = make_config(64, 4);
  PilotPlan plan = design_plan(64, {16, 16}, 16.0, 5);
  SystemMatrices S = make_system_matrices(cfg, plan, {12, 12});
  RngStream rng(41);
  CVec h0 = random_taps(24, rng);
  const auto est = gls_estimate(S.A_bar * h0, S);
  CHECK((est[0] - h0.head(12)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((est[1] - h0.tail(12)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("gls with identity covariance coincides with plain ls") {
  FbmcConfig cfg = make_config(64, 4);
  PilotPlan plan = design_plan(64, {16, 16}, 16.0, 6);
  SystemMatrices S = make_system_matrices(cfg, plan, {8, 8});
  S.C0 = CMat::Identity(32, 32);
  RngStream rng(43);
  CVec z(32);
  for (int i = 0; i < 32; ++i) z[i] = rng.cgaussian(1.0);
  const CVec via_gls = GlsSolver(S).estimate_stacked(z);
  const CVec via_ls = ls_estimate(z, S.A_bar);
  CHECK((via_gls - via_ls).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("gls is invariant to covariance scaling") {
  FbmcConfig cfg = make_config(32, 4);
  PilotPlan plan = design_plan(32, {8, 8}, 8.0, 7);
  SystemMatrices S = make_system_matrices(cfg, plan, {8, 8});
  RngStream rng(47);
  CVec z(16);
  for (int i = 0; i < 16; ++i) z[i] = rng.cgaussian(1.0);
  SystemMatrices S5 = S;
  S5.C0 = 5.0 * S.C0;
  const CVec a = GlsSolver(S).estimate_stacked(z);
  const CVec b = GlsSolver(S5).estimate_stacked(z);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("crlb properties") {
  FbmcConfig cfg = make_config(64, 4);
  PilotPlan plan = design_plan(64, {16, 16}, 16.0, 8);
  SystemMatrices S = make_system_matrices(cfg, plan, {10, 10});

  // Linear in sigma2, exactly.
  const double c1 = crlb(S, 1.0);
  CHECK(crlb(S, 2.0) == doctest::Approx(2.0 * c1).epsilon(1e-14));

  // Identical to the analytic multiuser MSE (same expression).
  for (double s2 : {0.3, 1.0, 4.0})
    CHECK(analytic_mse_multi(S, s2) == crlb(S, s2));

  // Single user, equally spaced: near sigma2*L/P_t.
  PilotPlan single = design_plan(128, {32}, 32.0, 9);
  SystemMatrices S1 = make_system_matrices(make_config(128, 4), single, {32});
  CHECK(crlb(S1, 1.0) == doctest::Approx(32.0 / 32.0).epsilon(0.10));
}

TEST_CASE("closed-form single-user mse") {
  CHECK(analytic_mse_single(1.0, 32, 32.0) == doctest::Approx(1.0));
  CHECK(analytic_mse_single(0.1, 32, 32.0) == doctest::Approx(0.1));
  CHECK_THROWS_AS(analytic_mse_single(1.0, 32, 0.0), std::invalid_argument);

  // DFT-submatrix oracle: with P = diag(p), |p_i| = sqrt(P_t/N_p) and F the
  // first L columns of the N_p-point DFT matrix,
  // sigma2*tr[((PF)^H (PF))^-1] collapses to sigma2*L/P_t.
  const int np = 32, L = 8;
  const double pt = 5.0, sigma2 = 0.7;
  RngStream rng(53);
  CMat F = dft_matrix(np, L);
  CVec p(np);
  for (int i = 0; i < np; ++i) p[i] = rng.sign() * std::sqrt(pt / np);
  CMat PF = p.asDiagonal() * F;
  const double numeric = sigma2 * (PF.adjoint() * PF).inverse().trace().real();
  CHECK(std::abs(numeric - analytic_mse_single(sigma2, L, pt)) < 1e-10);
}

TEST_CASE("nmse definition") {
  RngStream rng(59);
  CVec h = random_taps(16, rng);
  CHECK(nmse(h, h) == doctest::Approx(0.0));
  CHECK(nmse(CVec::Zero(16), h) == doctest::Approx(1.0));
  CVec e = random_taps(16, rng);
  e *= std::sqrt(0.01 * h.squaredNorm() / e.squaredNorm());
  CHECK(nmse(h + e, h) == doctest::Approx(0.01));
  CHECK_THROWS_AS(nmse(h, CVec::Zero(16)), std::domain_error);
  CHECK_THROWS_AS(nmse(h, CVec::Zero(8)), std::invalid_argument);
}

TEST_CASE("pilot power scaling moves the analytic mse by 1/c^2") {
  FbmcConfig cfg = make_config(32, 4);
  PilotPlan plan = design_plan(32, {8, 8}, 8.0, 10);
  SystemMatrices S = make_system_matrices(cfg, plan, {6, 6});
  const double base = crlb(S, 1.0);
  const double c = 3.0;
  PilotPlan scaled = plan;
  for (auto& v : scaled.values) v *= c;
  scaled.power = plan.power * c * c;
  SystemMatrices Ss = make_system_matrices(cfg, scaled, {6, 6});
  CHECK(crlb(Ss, 1.0) == doctest::Approx(base / (c * c)).epsilon(1e-12));
}

TEST_CASE("equal accuracy at fixed power across pilot counts") {
  // Equally spaced single-user plans with N_p in {L, 2L, 4L, M} at the same
  // budget: analytic MSE values stay within a 10 percent band.
  FbmcConfig cfg = make_config(128, 4);
  const int L = 32;
  const double pt = 32.0;
  std::vector<double> mses;
  for (int np : {32, 64, 128}) {
    PilotPlan plan = design_plan(128, {np}, pt, 16);
    mses.push_back(crlb(make_system_matrices(cfg, plan, {L}), 1.0));
  }
  const double lo = *std::min_element(mses.begin(), mses.end());
  const double hi = *std::max_element(mses.begin(), mses.end());
  CHECK(hi / lo < 1.10);
  CHECK(lo == doctest::Approx(L / pt).epsilon(0.10));
}

TEST_CASE("solver cache returns the same instance") {
  FbmcConfig cfg = make_config(32, 4);
  PilotPlan plan = design_plan(32, {8}, 8.0, 12);
  auto a = cached_gls_solver(cfg, plan, {8});
  auto b = cached_gls_solver(cfg, plan, {8});
  CHECK(a.get() == b.get());
  auto c = cached_gls_solver(cfg, plan, {6});
  CHECK(a.get() != c.get());
}

TEST_CASE("projector agrees with the factorized solve") {
  FbmcConfig cfg = make_config(32, 4);
  PilotPlan plan = design_plan(32, {8, 8}, 8.0, 13);
  GlsSolver solver(make_system_matrices(cfg, plan, {8, 8}));
  RngStream rng(61);
  CVec z(16);
  for (int i = 0; i < 16; ++i) z[i] = rng.cgaussian(1.0);
  CHECK((solver.projector() * z - solver.estimate_stacked(z)).cwiseAbs().maxCoeff() <
        1e-10);
}

TEST_CASE("baseline estimator recovers noiseless channels") {
  FbmcConfig cfg = make_config(32, 4);
  RngStream ch_rng = RngStream::derive(70, "channel");
  RngStream noise = RngStream::derive(70, "noise");

  // Single user: exact recovery.
  PilotPlan p1 = design_fullpilot_plan(32, 1, 8.0, 4, 14);
  std::vector<ChannelRealization> h1 = {sample_channel({6, 0.5, true}, ch_rng)};
  EstimationReport r1 = baseline_fullpilot_estimate(cfg, p1, h1, 0.0, noise);
  CHECK((r1.taps[0] - h1[0].taps).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(r1.preamble_slots == 4);

  // Two users: recovery up to the residual filter-tail leakage across the
  // kappa-1 guard slots, which the per-user estimator ignores.
  PilotPlan p2 = design_fullpilot_plan(32, 2, 8.0, 4, 14);
  std::vector<ChannelRealization> h2 = {sample_channel({6, 0.5, true}, ch_rng),
                                        sample_channel({6, 0.5, true}, ch_rng)};
  EstimationReport r2 = baseline_fullpilot_estimate(cfg, p2, h2, 0.0, noise);
  REQUIRE(r2.taps.size() == 2);
  CHECK((r2.taps[0] - h2[0].taps).cwiseAbs().maxCoeff() < 2e-2);
  CHECK((r2.taps[1] - h2[1].taps).cwiseAbs().maxCoeff() < 2e-2);
  CHECK(r2.nmse_pooled < 1e-3);
  // Preamble accounting: U*kappa slots.
  CHECK(r2.preamble_slots == 8);
}

TEST_CASE("baseline matches the sparse plan accuracy at fixed power") {
  // Single user: N_p = M = 128 pilots vs the sparse N_p = 32 comb at the
  // same budget; empirical NMSE within 5 percent of each other.
  FbmcConfig cfg = make_config(128, 4);
  const int L = 32;
  const double pt = 32.0, sigma2 = 0.2;

  auto make_side = [&](const PilotPlan& plan) {
    struct Side {
      CMat pinv;
      BasisBank bank;
      BasebandSignal x;
    };
    CMat A = build_single_user_A(cfg, plan, L);
    Eigen::ColPivHouseholderQR<CMat> qr(A);
    return Side{qr.solve(CMat::Identity(A.rows(), A.rows())),
                BasisBank(cfg, pilot_slot_order(plan)),
                synthesize(cfg, render_preamble(plan, {3}))};
  };
  PilotPlan dense = design_fullpilot_plan(128, 1, pt, 4, 15);
  PilotPlan sparse = design_plan(128, {32}, pt, 15);
  auto d = make_side(dense);
  auto s = make_side(sparse);

  const int trials = 4000;
  RngStream ch_rng = RngStream::derive(71, "channel");
  RngStream noise_d = RngStream::derive(71, "noise-dense");
  RngStream noise_s = RngStream::derive(71, "noise-sparse");
  double acc_d = 0.0, acc_s = 0.0;
  for (int t = 0; t < trials; ++t) {
    const ChannelRealization h = sample_channel({L, 0.5, true}, ch_rng);
    const CVec zd = d.bank.demodulate(add_awgn(apply_channel(d.x, h), sigma2, noise_d));
    acc_d += nmse(d.pinv * zd, h.taps);
    const CVec zs = s.bank.demodulate(add_awgn(apply_channel(s.x, h), sigma2, noise_s));
    acc_s += nmse(s.pinv * zs, h.taps);
  }
  CHECK(acc_d / acc_s == doctest::Approx(1.0).epsilon(0.05));
}
