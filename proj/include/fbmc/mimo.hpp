#pragma once
// Massive-MIMO uplink evaluation: per-antenna channel estimation through the
// full waveform pipeline, per-subcarrier MRC combining with estimated
// combiners, per-user SINR and overhead-weighted sum-rate.

#include <vector>

#include "fbmc/channel.hpp"
#include "fbmc/types.hpp"

namespace fbmc {

enum class Method { Proposed, FullPilotBaseline };

struct ScenarioConfig {
  int M = 128;
  int kappa = 4;
  int antennas = 128;
  int users = 4;   // per cell
  int cells = 1;   // 1 or 2
  int L = 16;
  double beta_desired = 0.5;
  double beta_lo = 0.4, beta_hi = 0.6;
  double pilot_power = -1.0;  // per-user training budget P_t for both methods;
                              // < 0 means N_p of the proposed plan (= L)
  double data_power = 1.0;    // per-user data-phase transmit power
  double cross_gain_max = 1.0;  // cross-gains drawn uniformly from [0, max]
  int coherence_slots = 84;   // OQAM slots per coherence interval
  std::vector<double> snr_db; // per-antenna receive SNR; sigma2 = 10^(-snr/10)
  int trials = 200;
  uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency
  // Baseline pilot policy across cells: true reuses the identical plan in
  // both cells (worst-case contamination); false time-separates all users.
  bool baseline_reuse_across_cells = true;
};

/** Channels of one trial: taps[cell][user][antenna] and cached per-subcarrier
 *  frequency responses freq[cell][user] (M x antennas). Cross-cell entries
 *  are already cross-gain scaled. */
struct MimoChannelTensor {
  std::vector<std::vector<std::vector<ChannelRealization>>> taps;
  std::vector<std::vector<CMat>> freq;
};

/// Independent per-antenna draws; in-cell user 0 uses beta_desired, all other
/// users draw beta from [beta_lo, beta_hi]; cross-cell users additionally get
/// a cross-gain in [0,1]. Deterministic given (cfg.seed, trial).
MimoChannelTensor draw_mimo_channels(const ScenarioConfig& cfg, uint64_t trial);

/// gamma = (coherence - preamble) / coherence. Throws when the preamble does
/// not fit the coherence interval.
double overhead_factor(int preamble_slots, int coherence_slots);

/// gamma * sum_u log2(1 + SINR_u).
double sum_rate(const std::vector<double>& sinr, double gamma);

/// Per-user SINR of per-subcarrier MRC. The combiner for user u at
/// subcarrier m is that user's estimated response across antennas; desired
/// power, multiuser and cross-cell interference come from the true
/// responses; noise is sigma2 * ||w||^2. Averaged over subcarriers.
std::vector<double> mrc_sinr(const std::vector<CMat>& freq_true_incell,
                             const std::vector<CMat>& freq_true_crosscell,
                             const std::vector<CMat>& freq_hat, double sigma2,
                             double data_power = 1.0);

struct SumRatePoint {
  double snr_db = 0.0;
  double value = 0.0;    // mean per-cell sum-rate, bits/s/Hz
  double stderr_ = 0.0;  // standard error of the mean
  double gamma = 0.0;
};

/// Full pipeline per trial: draw channels, pass each user's preamble through
/// channel + noise per antenna, estimate per antenna, MRC with estimated
/// combiners, apply the overhead factor. Deterministic given cfg.seed and
/// independent of thread count.
std::vector<SumRatePoint> run_cell_scenario(const ScenarioConfig& cfg, Method method);

}  // namespace fbmc
