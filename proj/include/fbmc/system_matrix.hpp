#pragma once
// Stacked multiuser system matrix and demodulated-noise covariance.
//
// Row i of A_bar is the noiseless demodulated value at pilot slot i when a
// unit channel tap sits at the column's delay and the column's user
// transmits its full pilot preamble. Diagonal user blocks are the
// single-user matrices A_u; off-diagonal blocks are the intrinsic
// interference of one user's pilots on another user's pilot slots.
//
// The noise covariance is C = sigma^2 * C0 with
// C0(i,j) = <g_{m_j,n_j}, g_{m_i,n_i}>; sigma^2 is kept factored out since
// it cancels in the whitened estimate but not in the CRLB.

#include <string>
#include <vector>

#include "fbmc/pilots.hpp"
#include "fbmc/types.hpp"
#include "fbmc/waveform.hpp"

namespace fbmc {

struct SlotRef {
  int user = 0;
  int m = 0;
  int n = 0;
};

/// Row order of z_bar / A_bar / C0: user-major, plan order within a user.
std::vector<SlotRef> pilot_slot_order(const PilotPlan& plan);

/** Pilot-slot demodulator. Slots are grouped by time index; each group owns
 *  a dense basis matrix over its kappa*M-sample window, so demodulating a
 *  signal (or a bank of per-antenna signals) is one small matrix product
 *  per group. Output order matches the slot order passed at construction. */
class BasisBank {
 public:
  BasisBank(const FbmcConfig& cfg, std::vector<SlotRef> order);

  /// Smallest signal length (from time origin 0) covering every window.
  long required_length() const { return required_; }
  const std::vector<SlotRef>& order() const { return order_; }

  /// z in slot order. Throws std::out_of_range if y does not cover a window.
  CVec demodulate(const BasebandSignal& y) const;

  /// Columns of Y are signals starting at time origin 0 with >= required
  /// length; returns the (slots x columns) demodulated matrix.
  CMat demodulate_all(const CMat& Y) const;

 private:
  struct Group {
    long start = 0;          // absolute sample index of the window
    CMat basis;              // kappa*M x group size, columns are g_{m,n}
    std::vector<int> rows;   // output row of each column
  };
  std::vector<SlotRef> order_;
  std::vector<Group> groups_;
  long required_ = 0;
  int window_ = 0;  // kappa*M
};

/** Stacked matrices for one plan. */
struct SystemMatrices {
  CMat A_bar;                       // N_p^t x sum(L_u)
  CMat C0;                          // N_p^t x N_p^t noise covariance, sigma2 = 1
  std::vector<SlotRef> slot_order;  // row order contract
  std::vector<int> lengths;         // L_u
  std::vector<int> row_offset;      // per-user first row, size U+1
  std::vector<int> col_offset;      // per-user first column, size U+1
};

/// Single-user system matrix (N_p x L). The plan must have exactly one user.
CMat build_single_user_A(const FbmcConfig& cfg, const PilotPlan& plan, int L);

/// Multiuser stacked matrix with interference blocks, N_p^t x sum(L_u).
/// lengths[u] is the modeled channel length of user u.
CMat build_multiuser_A(const FbmcConfig& cfg, const PilotPlan& plan,
                       const std::vector<int>& lengths);

/// Demodulated-noise covariance sigma2 * C0 in plan slot order.
CMat build_noise_covariance(const FbmcConfig& cfg, const PilotPlan& plan,
                            double sigma2);

/// A_bar + C0 + ordering bundled.
SystemMatrices make_system_matrices(const FbmcConfig& cfg, const PilotPlan& plan,
                                    const std::vector<int>& lengths);

/// Binary round-trip (versioned header; each complex value is a little-endian
/// pair of IEEE-754 float64: real then imaginary; matrices row-major).
void save_system(const SystemMatrices& S, const std::string& path);
SystemMatrices load_system(const std::string& path);

}  // namespace fbmc
