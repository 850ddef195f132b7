#include "fbmc/mimo.hpp"

#include <cmath>
#include <stdexcept>

#include "fbmc/estimators.hpp"
#include "fbmc/parallel.hpp"
#include "fbmc/pilots.hpp"
#include "fbmc/rng.hpp"
#include "fbmc/system_matrix.hpp"

namespace fbmc {

double overhead_factor(int preamble_slots, int coherence_slots) {
  if (preamble_slots < 0 || coherence_slots <= 0 || preamble_slots > coherence_slots)
    throw std::invalid_argument("overhead_factor: preamble exceeds coherence interval");
  return static_cast<double>(coherence_slots - preamble_slots) / coherence_slots;
}

double sum_rate(const std::vector<double>& sinr, double gamma) {
  double rate = 0.0;
  for (double s : sinr) {
    if (s < 0.0) throw std::invalid_argument("sum_rate: negative SINR");
    rate += std::log2(1.0 + s);
  }
  return gamma * rate;
}

MimoChannelTensor draw_mimo_channels(const ScenarioConfig& cfg, uint64_t trial) {
  MimoChannelTensor t;
  t.taps.resize(cfg.cells);
  t.freq.resize(cfg.cells);
  const CMat F = dft_matrix(cfg.M, cfg.L);
  for (int c = 0; c < cfg.cells; ++c) {
    t.taps[c].resize(cfg.users);
    t.freq[c].resize(cfg.users);
    for (int u = 0; u < cfg.users; ++u) {
      ChannelProfile profile;
      profile.L = cfg.L;
      profile.normalize = true;
      if (c == 0 && u == 0) {
        profile.beta = cfg.beta_desired;
      } else {
        profile.beta = RngStream::derive(cfg.seed, "beta", trial, c, u)
                           .uniform(cfg.beta_lo, cfg.beta_hi);
      }
      const double gain =
          c == 0 ? 1.0
                 : cfg.cross_gain_max *
                       RngStream::derive(cfg.seed, "crossgain", trial, c, u).uniform();
      RngStream rng = RngStream::derive(cfg.seed, "channel", trial, c, u);
      CMat taps_mat(cfg.L, cfg.antennas);
      t.taps[c][u].reserve(cfg.antennas);
      for (int r = 0; r < cfg.antennas; ++r) {
        ChannelRealization h = sample_channel(profile, rng);
        if (c > 0) h = scale_crossgain(h, gain);
        taps_mat.col(r) = h.taps;
        t.taps[c][u].push_back(std::move(h));
      }
      t.freq[c][u] = F * taps_mat;
    }
  }
  return t;
}

std::vector<double> mrc_sinr(const std::vector<CMat>& freq_true_incell,
                             const std::vector<CMat>& freq_true_crosscell,
                             const std::vector<CMat>& freq_hat, double sigma2,
                             double data_power) {
  const int U = static_cast<int>(freq_true_incell.size());
  if (static_cast<int>(freq_hat.size()) < U)
    throw std::invalid_argument("mrc_sinr: estimate missing for an in-cell user");
  const long M = freq_true_incell[0].rows();
  std::vector<double> sinr(U, 0.0);
  for (int u = 0; u < U; ++u) {
    double acc = 0.0;
    for (long m = 0; m < M; ++m) {
      const auto w = freq_hat[u].row(m);
      if (w.squaredNorm() == 0.0) continue;  // nothing combined on this bin
      const double desired =
          data_power * std::norm(w.dot(freq_true_incell[u].row(m)));
      double denom = sigma2 * w.squaredNorm();
      for (int v = 0; v < U; ++v)
        if (v != u) denom += data_power * std::norm(w.dot(freq_true_incell[v].row(m)));
      for (const auto& fx : freq_true_crosscell)
        denom += data_power * std::norm(w.dot(fx.row(m)));
      acc += desired / denom;
    }
    sinr[u] = acc / static_cast<double>(M);
  }
  return sinr;
}

namespace {

// Per-method precompute shared by every trial and SNR point.
struct MethodContext {
  Method method = Method::Proposed;
  PilotPlan plan;                       // all transmitting users, cell-major
  std::vector<CVec> tx;                 // per plan user, padded to W
  std::unique_ptr<BasisBank> bank;
  long W = 0;
  std::shared_ptr<const GlsSolver> gls; // proposed
  std::vector<CMat> ls_pinv;            // baseline, per user (L x M)
  std::vector<int> row_offset;          // per plan user first z row
  double gamma = 0.0;
  // plan user index of (cell, user); baseline reuse maps both cells to the
  // same transmit signal.
  int plan_user(int cell, int u, int users) const {
    if (method == Method::FullPilotBaseline && reuse) return u;
    return cell * users + u;
  }
  bool reuse = false;
};

CVec padded_user_signal(const FbmcConfig& cfg, const PilotPlan& plan, int u, long W) {
  PilotPlan sub;
  sub.M = plan.M;
  sub.power = plan.power;
  sub.slots = {plan.slots[u]};
  sub.values = {plan.values[u]};
  sub.comb_offset = {0};
  BasebandSignal x = synthesize(cfg, render_preamble(sub, {0}));
  CVec padded = CVec::Zero(W);
  const long len = std::min<long>(x.size(), W);
  padded.head(len) = x.samples.head(len);
  return padded;
}

MethodContext make_context(const FbmcConfig& wave, const ScenarioConfig& cfg,
                           Method method) {
  MethodContext ctx;
  ctx.method = method;
  // Same per-user training budget for both methods (the proposed plan
  // boosts per-pilot power, the full-pilot baseline spreads it over M).
  const double power = cfg.pilot_power > 0 ? cfg.pilot_power
                                           : static_cast<double>(cfg.L);
  if (method == Method::Proposed) {
    const int tx_users = cfg.users * cfg.cells;  // disjoint combs for all users
    ctx.plan = design_plan(cfg.M, std::vector<int>(tx_users, cfg.L), power, cfg.seed);
    ctx.gls = cached_gls_solver(wave, ctx.plan, std::vector<int>(tx_users, cfg.L));
  } else {
    ctx.reuse = cfg.baseline_reuse_across_cells || cfg.cells == 1;
    const int tx_users = ctx.reuse ? cfg.users : cfg.users * cfg.cells;
    ctx.plan = design_fullpilot_plan(cfg.M, tx_users, power, cfg.kappa, cfg.seed);
    for (int u = 0; u < tx_users; ++u) {
      PilotPlan sub;
      sub.M = ctx.plan.M;
      sub.power = ctx.plan.power;
      sub.slots = {ctx.plan.slots[u]};
      sub.values = {ctx.plan.values[u]};
      sub.comb_offset = {0};
      const CMat A = build_single_user_A(wave, sub, cfg.L);
      Eigen::ColPivHouseholderQR<CMat> qr(A);
      ctx.ls_pinv.push_back(qr.solve(CMat::Identity(A.rows(), A.rows())));
    }
  }
  ctx.bank = std::make_unique<BasisBank>(wave, pilot_slot_order(ctx.plan));
  ctx.W = ctx.bank->required_length();
  for (int u = 0; u < ctx.plan.users(); ++u)
    ctx.tx.push_back(padded_user_signal(wave, ctx.plan, u, ctx.W));
  ctx.row_offset.assign(1, 0);
  for (int u = 0; u < ctx.plan.users(); ++u)
    ctx.row_offset.push_back(ctx.row_offset.back() +
                             static_cast<int>(ctx.plan.slots[u].size()));
  ctx.gamma = overhead_factor(ctx.plan.pilot_time_slots() + (cfg.kappa - 1),
                              cfg.coherence_slots);
  return ctx;
}

}  // namespace

std::vector<SumRatePoint> run_cell_scenario(const ScenarioConfig& cfg, Method method) {
  if (cfg.cells != 1 && cfg.cells != 2)
    throw std::invalid_argument("run_cell_scenario: cells must be 1 or 2");
  if (cfg.trials < 1) throw std::invalid_argument("run_cell_scenario: trials must be >= 1");
  const FbmcConfig wave = make_config(cfg.M, cfg.kappa);
  const MethodContext ctx = make_context(wave, cfg, method);
  const CMat F = dft_matrix(cfg.M, cfg.L);
  const char* noise_stream =
      method == Method::Proposed ? "noise-proposed" : "noise-baseline";

  std::vector<SumRatePoint> out;
  for (size_t si = 0; si < cfg.snr_db.size(); ++si) {
    const double sigma2 = std::pow(10.0, -cfg.snr_db[si] / 10.0);
    std::vector<double> rates(cfg.trials, 0.0);
    parallel_for_index(cfg.trials, cfg.threads, [&](long trial) {
      const MimoChannelTensor tensor = draw_mimo_channels(cfg, trial);
      // Received preamble per antenna.
      CMat Y = CMat::Zero(ctx.W, cfg.antennas);
      for (int r = 0; r < cfg.antennas; ++r) {
        for (int c = 0; c < cfg.cells; ++c)
          for (int u = 0; u < cfg.users; ++u) {
            const CVec& x = ctx.tx[ctx.plan_user(c, u, cfg.users)];
            const auto& h = tensor.taps[c][u][r];
            for (int l = 0; l < h.length(); ++l)
              Y.col(r).tail(ctx.W - l) += h.taps[l] * x.head(ctx.W - l);
          }
        RngStream rng = RngStream::derive(cfg.seed, noise_stream, si, trial, r);
        for (long k = 0; k < ctx.W; ++k) Y(k, r) += rng.cgaussian(sigma2);
      }
      const CMat Z = ctx.bank->demodulate_all(Y);
      // Per-antenna estimates, as per-user M x R frequency responses.
      std::vector<CMat> freq_hat(cfg.users);
      if (method == Method::Proposed) {
        const CMat H = ctx.gls->projector() * Z;
        const auto& col0 = ctx.gls->system().col_offset;
        for (int u = 0; u < cfg.users; ++u)
          freq_hat[u] = F * H.middleRows(col0[u], cfg.L);
      } else {
        for (int u = 0; u < cfg.users; ++u) {
          const int r0 = ctx.row_offset[u];
          const int np = ctx.row_offset[u + 1] - r0;
          freq_hat[u] = F * (ctx.ls_pinv[u] * Z.middleRows(r0, np));
        }
      }
      const std::vector<CMat> no_cross;
      const std::vector<double> sinr =
          mrc_sinr(tensor.freq[0], cfg.cells == 2 ? tensor.freq[1] : no_cross,
                   freq_hat, sigma2, cfg.data_power);
      rates[trial] = sum_rate(sinr, ctx.gamma);
    });
    double mean = 0.0;
    for (double r : rates) mean += r;
    mean /= cfg.trials;
    double var = 0.0;
    for (double r : rates) var += (r - mean) * (r - mean);
    var = cfg.trials > 1 ? var / (cfg.trials - 1) : 0.0;
    out.push_back({cfg.snr_db[si], mean, std::sqrt(var / cfg.trials), ctx.gamma});
  }
  return out;
}

}  // namespace fbmc
