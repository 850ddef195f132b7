#pragma once
// SMT (staggered multi-tone) modulator/demodulator in discrete time.
//
// Real OQAM symbols s_{m,n} live on an M x N_t grid with time spacing M/2
// samples. Each symbol is carried by the basis function
//
//   g_{m,n}[k] = g[k - n*M/2] * exp(j*2*pi*m*k/M) * exp(j*pi*(m+n)/2),
//
// where g is a unit-energy prototype filter of length kappa*M. The basis is
// orthogonal in the real field only; the imaginary leakage onto neighboring
// slots is the intrinsic interference the estimators exploit.

#include <utility>
#include <vector>

#include "fbmc/types.hpp"

namespace fbmc {

/** Static waveform parameters. */
struct FbmcConfig {
  int M = 0;       // subcarriers (positive even)
  int kappa = 0;   // overlapping factor
  RVec prototype;  // length kappa*M, unit energy

  int symbol_advance() const { return M / 2; }
  int filter_length() const { return kappa * M; }
};

/// PHYDYAS frequency-sampled prototype, unit-energy normalized, symmetric
/// about kappa*M/2. Coefficients tabulated for kappa in {2,3,4}; other
/// kappa values throw std::invalid_argument.
RVec build_prototype(int kappa, int M);

/// Config with a PHYDYAS prototype. Validates M (even, >= 2) and kappa.
FbmcConfig make_config(int M, int kappa);

/** M x N_t grid of real symbols plus per-slot roles. Role encoding in
 *  `owner`: kRoleData, kRoleGuard, or the owning user index (>= 0) for
 *  pilot slots. Guard slots must carry value 0. */
struct TfGrid {
  static constexpr int kRoleData = -2;
  static constexpr int kRoleGuard = -1;

  int M = 0;
  int N_t = 0;
  RMat symbols;  // M x N_t
  IMat owner;    // M x N_t role encoding

  static TfGrid make(int M, int N_t, int role = kRoleData);
  bool is_pilot(int m, int n) const { return owner(m, n) >= 0; }
  /// Throws std::logic_error when a structural invariant is broken
  /// (guard slots with nonzero values, shape mismatch).
  void validate() const;
};

/** Complex baseband samples. samples[i] sits at absolute time index
 *  offset + i on the grid clock (slot n starts at sample n*M/2). */
struct BasebandSignal {
  CVec samples;
  long offset = 0;

  long size() const { return samples.size(); }
  long end() const { return offset + samples.size(); }
};

/// g_{m,n} as a signal supported on [n*M/2, n*M/2 + kappa*M).
BasebandSignal basis_function(const FbmcConfig& cfg, int m, int n);

/// x[k] = sum_{m,n} s_{m,n} g_{m,n}[k]. Output covers
/// [0, (N_t-1)*M/2 + kappa*M).
BasebandSignal synthesize(const FbmcConfig& cfg, const TfGrid& grid);

/// Inner products z_{m,n} = <y, g_{m,n}> = sum_k y[k] conj(g_{m,n}[k]) for
/// the requested slots, complex values retained (no real-part operation).
/// Throws std::out_of_range when a slot's support is not covered by y.
CVec analyze(const FbmcConfig& cfg, const BasebandSignal& y,
             const std::vector<std::pair<int, int>>& slots);

}  // namespace fbmc
