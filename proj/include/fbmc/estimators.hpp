#pragma once
// LS and correlation-aware (generalized) LS channel estimators, closed-form
// MSE, CRLB, NMSE, and the full-subcarrier baseline estimator.
//
// Estimators consume complex demodulated values (before the real-part
// operation). Solves go through whitening + orthogonal factorization; no
// explicit inverse appears in a solve path. The inverse shows up only inside
// tr(F^-1), computed from triangular solves against identity columns.

#include <memory>
#include <vector>

#include "fbmc/channel.hpp"
#include "fbmc/pilots.hpp"
#include "fbmc/rng.hpp"
#include "fbmc/system_matrix.hpp"
#include "fbmc/types.hpp"

namespace fbmc {

/// h_hat = argmin ||z - A h||, solved by column-pivoted QR. Throws
/// std::domain_error (with a condition estimate) when A is rank deficient.
/// When cond_out is set it receives |R_00 / R_kk|, a cheap condition
/// estimate from the pivoted R diagonal.
CVec ls_estimate(const CVec& z, const CMat& A, double* cond_out = nullptr);

/** Whitened solver for one plan: factorizations of C0 and L^-1 A_bar are
 *  done once, estimates are cheap afterwards. The whitening uses the
 *  Cholesky factor of C0, so the estimate is invariant to any positive
 *  scaling of the covariance. */
class GlsSolver {
 public:
  explicit GlsSolver(SystemMatrices S);

  /// All users' taps from the stacked demodulated pilot vector.
  CVec estimate_stacked(const CVec& z_bar) const;
  std::vector<CVec> estimate(const CVec& z_bar) const;

  /// tr[(A^H C^-1 A)^-1] with C = sigma2 * C0; linear in sigma2.
  double crlb(double sigma2) const { return sigma2 * tr_finv_; }

  /// Cached projector P = (A^H C0^-1 A)^-1 A^H C0^-1, so that h = P z.
  /// Useful for batch estimation across antennas (H = P * Z).
  const CMat& projector() const { return projector_; }

  const SystemMatrices& system() const { return S_; }

 private:
  SystemMatrices S_;
  Eigen::LLT<CMat> llt_;                    // C0 = L L^H
  Eigen::ColPivHouseholderQR<CMat> qr_;     // QR of L^-1 A_bar
  double tr_finv_ = 0.0;
  CMat projector_;
};

/// Whitened LS estimate split per user. One-shot wrapper around GlsSolver
/// for callers without a cached solver.
std::vector<CVec> gls_estimate(const CVec& z_bar, const SystemMatrices& S);

/// tr[(A_bar^H C^-1 A_bar)^-1] with C = sigma2 * C0.
double crlb(const SystemMatrices& S, double sigma2);

/// Analytic multiuser MSE; identical to crlb by construction (the
/// expressions coincide), kept as a separate name.
double analytic_mse_multi(const SystemMatrices& S, double sigma2);

/// sigma2 * L / P_t.
double analytic_mse_single(double sigma2, int L, double total_power);

/// sum |h_hat - h|^2 / sum |h|^2. Throws std::domain_error when the true
/// channel has zero energy.
double nmse(const CVec& h_hat, const CVec& h_true);

/// Process-wide cache of GlsSolvers keyed by (config, plan, lengths).
/// Read-mostly; insertion is serialized.
std::shared_ptr<const GlsSolver> cached_gls_solver(const FbmcConfig& cfg,
                                                   const PilotPlan& plan,
                                                   const std::vector<int>& lengths);

struct EstimationReport {
  std::vector<CVec> taps;         // per-user estimates
  std::vector<double> nmse_user;  // per-user NMSE vs the true channels
  double nmse_pooled = 0.0;
  double crlb = 0.0;
  double analytic_mse = 0.0;
  int preamble_slots = 0;  // pilot + guard time slots, for overhead accounting
};

/// Full-subcarrier baseline: every user sends M pilots in its own time slot,
/// users separated by kappa-1 guard slots; per-user plain LS (no noise
/// whitening, as the guards justify). `plan` must come from
/// design_fullpilot_plan. Reports the plain-LS analytic MSE
/// sigma2 * sum_u tr[(A_u^H A_u)^-1] in both crlb and analytic_mse.
EstimationReport baseline_fullpilot_estimate(const FbmcConfig& cfg,
                                             const PilotPlan& plan,
                                             const std::vector<ChannelRealization>& channels,
                                             double sigma2, RngStream& rng);

}  // namespace fbmc
