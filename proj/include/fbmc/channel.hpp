#pragma once
// Multipath channel generation (Rayleigh taps, exponential power delay
// profile), convolution, AWGN and multicell cross-gain scaling.

#include <vector>

#include "fbmc/rng.hpp"
#include "fbmc/types.hpp"
#include "fbmc/waveform.hpp"

namespace fbmc {

struct ChannelRealization {
  CVec taps;  // h[0..L-1]
  int length() const { return static_cast<int>(taps.size()); }
};

/** Exponential power delay profile: tap l has average power ~ exp(-beta*l),
 *  scaled to unit total average power when `normalize` is set. */
struct ChannelProfile {
  int L = 1;
  double beta = 0.0;
  bool normalize = true;
};

/** Per-user channels plus per-user cross-gain factors in [0,1] (1 for
 *  in-cell users; path-loss-like scaling for neighbor-cell users). */
struct ChannelSet {
  std::vector<ChannelRealization> per_user;
  std::vector<double> cross_gain;

  int users() const { return static_cast<int>(per_user.size()); }
  /// Throws std::logic_error on shape mismatch or gains outside [0,1].
  void validate() const;
};

/// Draws one channel per profile and applies the matching cross-gain.
ChannelSet sample_channel_set(const std::vector<ChannelProfile>& profiles,
                              const std::vector<double>& cross_gain, RngStream& rng);

/// Independent Rayleigh taps: h[l] ~ CN(0, p_l) with p_l following the
/// profile. beta = 0 gives a uniform profile.
ChannelRealization sample_channel(const ChannelProfile& profile, RngStream& rng);

/// Linear convolution y = h * x; output length = input length + L - 1,
/// same time offset.
BasebandSignal apply_channel(const BasebandSignal& x, const ChannelRealization& h);

/// Adds i.i.d. CN(0, sigma2) samples. sigma2 = 0 returns the input.
BasebandSignal add_awgn(const BasebandSignal& x, double sigma2, RngStream& rng);

/// Taps scaled by sqrt(g) so received power scales by g; g must be in [0,1].
ChannelRealization scale_crossgain(const ChannelRealization& h, double g);

}  // namespace fbmc
