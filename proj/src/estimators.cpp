#include "fbmc/estimators.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

namespace fbmc {

CVec ls_estimate(const CVec& z, const CMat& A, double* cond_out) {
  if (z.size() != A.rows())
    throw std::invalid_argument("ls_estimate: z length does not match A rows");
  Eigen::ColPivHouseholderQR<CMat> qr(A);
  const auto& R = qr.matrixR();
  const int k = static_cast<int>(A.cols());
  const double rmax = std::abs(R(0, 0));
  const double rmin = std::abs(R(k - 1, k - 1));
  const double cond = rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();
  if (cond_out) *cond_out = cond;
  if (qr.rank() < k)
    throw std::domain_error("ls_estimate: A is rank deficient (condition estimate " +
                            std::to_string(cond) + ")");
  return qr.solve(z);
}

GlsSolver::GlsSolver(SystemMatrices S) : S_(std::move(S)) {
  const long n = S_.A_bar.cols();
  llt_.compute(S_.C0);
  if (llt_.info() != Eigen::Success)
    throw std::domain_error("GlsSolver: noise covariance is not positive definite");
  const CMat whitened = llt_.matrixL().solve(S_.A_bar);
  qr_.compute(whitened);
  if (qr_.rank() < n) {
    const auto& R = qr_.matrixR();
    const double cond = std::abs(R(0, 0)) / std::abs(R(n - 1, n - 1));
    throw std::domain_error("GlsSolver: whitened system matrix is rank deficient "
                            "(condition estimate " + std::to_string(cond) + ")");
  }
  // tr(F0^-1) = ||R^-1||_F^2 for W P = Q R (permutation cancels inside the
  // trace). R^-1 via a triangular solve against the identity.
  const CMat R = qr_.matrixR().topRows(n).template triangularView<Eigen::Upper>();
  const CMat Rinv = R.triangularView<Eigen::Upper>().solve(CMat::Identity(n, n));
  tr_finv_ = Rinv.squaredNorm();
  // Projector (A^H C0^-1 A)^-1 A^H C0^-1: solve against identity columns in
  // the whitened domain, then un-whiten from the right.
  const CMat Pw = qr_.solve(CMat::Identity(S_.A_bar.rows(), S_.A_bar.rows()));
  projector_ = llt_.matrixL().adjoint().solve(Pw.adjoint()).adjoint();
}

CVec GlsSolver::estimate_stacked(const CVec& z_bar) const {
  if (z_bar.size() != S_.A_bar.rows())
    throw std::invalid_argument("GlsSolver: z_bar length does not match slot order");
  return qr_.solve(llt_.matrixL().solve(z_bar));
}

std::vector<CVec> GlsSolver::estimate(const CVec& z_bar) const {
  const CVec h = estimate_stacked(z_bar);
  std::vector<CVec> out(S_.lengths.size());
  for (size_t u = 0; u < S_.lengths.size(); ++u)
    out[u] = h.segment(S_.col_offset[u], S_.lengths[u]);
  return out;
}

std::vector<CVec> gls_estimate(const CVec& z_bar, const SystemMatrices& S) {
  return GlsSolver(S).estimate(z_bar);
}

double crlb(const SystemMatrices& S, double sigma2) {
  return GlsSolver(S).crlb(sigma2);
}

double analytic_mse_multi(const SystemMatrices& S, double sigma2) {
  return crlb(S, sigma2);
}

double analytic_mse_single(double sigma2, int L, double total_power) {
  if (total_power <= 0.0)
    throw std::invalid_argument("analytic_mse_single: total power must be positive");
  return sigma2 * L / total_power;
}

double nmse(const CVec& h_hat, const CVec& h_true) {
  if (h_hat.size() != h_true.size())
    throw std::invalid_argument("nmse: length mismatch");
  const double energy = h_true.squaredNorm();
  if (energy == 0.0) throw std::domain_error("nmse: true channel has zero energy");
  return (h_hat - h_true).squaredNorm() / energy;
}

namespace {

uint64_t mix64(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

uint64_t solver_key(const FbmcConfig& cfg, const PilotPlan& plan,
                    const std::vector<int>& lengths) {
  uint64_t h = 0xcbf29ce484222325ULL;
  h = mix64(h, (uint64_t)cfg.M);
  h = mix64(h, (uint64_t)cfg.kappa);
  for (int i = 0; i < cfg.prototype.size(); ++i) {
    uint64_t bits;
    double v = cfg.prototype[i];
    std::memcpy(&bits, &v, 8);
    h = mix64(h, bits);
  }
  for (int u = 0; u < plan.users(); ++u) {
    for (const auto& s : plan.slots[u]) h = mix64(h, ((uint64_t)s.m << 32) | (uint64_t)s.n);
    for (int i = 0; i < plan.values[u].size(); ++i) {
      uint64_t bits;
      double v = plan.values[u][i];
      std::memcpy(&bits, &v, 8);
      h = mix64(h, bits);
    }
  }
  for (int l : lengths) h = mix64(h, (uint64_t)l);
  return h;
}

}  // namespace

std::shared_ptr<const GlsSolver> cached_gls_solver(const FbmcConfig& cfg,
                                                   const PilotPlan& plan,
                                                   const std::vector<int>& lengths) {
  static std::mutex mu;
  static std::map<uint64_t, std::shared_ptr<const GlsSolver>> cache;
  const uint64_t key = solver_key(cfg, plan, lengths);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto solver = std::make_shared<const GlsSolver>(make_system_matrices(cfg, plan, lengths));
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, std::move(solver)).first->second;
}

EstimationReport baseline_fullpilot_estimate(const FbmcConfig& cfg,
                                             const PilotPlan& plan,
                                             const std::vector<ChannelRealization>& channels,
                                             double sigma2, RngStream& rng) {
  const int U = plan.users();
  if (static_cast<int>(channels.size()) != U)
    throw std::invalid_argument("baseline_fullpilot_estimate: channel count mismatch");

  BasisBank bank(cfg, pilot_slot_order(plan));
  const long W = bank.required_length();

  // Received preamble: each user's pilots through that user's channel.
  BasebandSignal y;
  y.offset = 0;
  y.samples = CVec::Zero(W);
  for (int u = 0; u < U; ++u) {
    PilotPlan sub;
    sub.M = plan.M;
    sub.power = plan.power;
    sub.slots = {plan.slots[u]};
    sub.values = {plan.values[u]};
    sub.comb_offset = {0};
    TfGrid grid = render_preamble(sub, {0});
    BasebandSignal rx = apply_channel(synthesize(cfg, grid), channels[u]);
    const long len = std::min<long>(rx.size(), W);
    y.samples.head(len) += rx.samples.head(len);
  }
  y = add_awgn(y, sigma2, rng);
  const CVec z = bank.demodulate(y);

  EstimationReport report;
  report.preamble_slots = plan.pilot_time_slots() + (cfg.kappa - 1);
  double err = 0.0, energy = 0.0, mse = 0.0;
  int row0 = 0;
  for (int u = 0; u < U; ++u) {
    PilotPlan sub;
    sub.M = plan.M;
    sub.power = plan.power;
    sub.slots = {plan.slots[u]};
    sub.values = {plan.values[u]};
    sub.comb_offset = {0};
    const int L = channels[u].length();
    const CMat A = build_single_user_A(cfg, sub, L);
    const int np = static_cast<int>(plan.slots[u].size());
    // z rows of user u, shifted to the user's own time slot: the demodulated
    // values are at the slots of the full plan, but A was built with the
    // sub-plan whose slots keep their absolute n, so rows line up directly.
    const CVec zu = z.segment(row0, np);
    row0 += np;
    const CVec h_hat = ls_estimate(zu, A);
    report.taps.push_back(h_hat);
    report.nmse_user.push_back(nmse(h_hat, channels[u].taps));
    err += (h_hat - channels[u].taps).squaredNorm();
    energy += channels[u].taps.squaredNorm();
    const CMat AhA = A.adjoint() * A;
    const Eigen::LLT<CMat> llt(AhA);
    mse += sigma2 * llt.solve(CMat::Identity(L, L)).trace().real();
  }
  report.nmse_pooled = err / energy;
  report.crlb = mse;
  report.analytic_mse = mse;
  return report;
}

}  // namespace fbmc
