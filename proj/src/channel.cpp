#include "fbmc/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fbmc {

void ChannelSet::validate() const {
  if (per_user.size() != cross_gain.size())
    throw std::logic_error("ChannelSet: per_user/cross_gain size mismatch");
  for (double g : cross_gain)
    if (g < 0.0 || g > 1.0)
      throw std::logic_error("ChannelSet: cross gain outside [0,1]");
}

ChannelSet sample_channel_set(const std::vector<ChannelProfile>& profiles,
                              const std::vector<double>& cross_gain, RngStream& rng) {
  if (profiles.size() != cross_gain.size())
    throw std::invalid_argument("sample_channel_set: profile/gain count mismatch");
  ChannelSet set;
  set.cross_gain = cross_gain;
  for (size_t u = 0; u < profiles.size(); ++u)
    set.per_user.push_back(
        scale_crossgain(sample_channel(profiles[u], rng), cross_gain[u]));
  set.validate();
  return set;
}

ChannelRealization sample_channel(const ChannelProfile& profile, RngStream& rng) {
  if (profile.L < 1) throw std::invalid_argument("sample_channel: L must be >= 1");
  if (profile.beta < 0.0) throw std::invalid_argument("sample_channel: beta must be >= 0");
  RVec power(profile.L);
  for (int l = 0; l < profile.L; ++l) power[l] = std::exp(-profile.beta * l);
  if (profile.normalize) power /= power.sum();
  ChannelRealization h;
  h.taps.resize(profile.L);
  for (int l = 0; l < profile.L; ++l) h.taps[l] = rng.cgaussian(power[l]);
  return h;
}

BasebandSignal apply_channel(const BasebandSignal& x, const ChannelRealization& h) {
  const long n = x.size();
  const int L = h.length();
  BasebandSignal y;
  y.offset = x.offset;
  y.samples = CVec::Zero(n + L - 1);
  for (int l = 0; l < L; ++l)
    y.samples.segment(l, n) += h.taps[l] * x.samples;
  return y;
}

BasebandSignal add_awgn(const BasebandSignal& x, double sigma2, RngStream& rng) {
  if (sigma2 < 0.0) throw std::invalid_argument("add_awgn: negative noise variance");
  BasebandSignal y = x;
  if (sigma2 == 0.0) return y;
  for (long i = 0; i < y.size(); ++i) y.samples[i] += rng.cgaussian(sigma2);
  return y;
}

ChannelRealization scale_crossgain(const ChannelRealization& h, double g) {
  if (g < 0.0 || g > 1.0)
    throw std::invalid_argument("scale_crossgain: g=" + std::to_string(g) +
                                " outside [0,1]");
  ChannelRealization out;
  out.taps = std::sqrt(g) * h.taps;
  return out;
}

}  // namespace fbmc
