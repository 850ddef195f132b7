#include "fbmc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fbmc/channel.hpp"
#include "fbmc/estimators.hpp"
#include "fbmc/mimo.hpp"
#include "fbmc/parallel.hpp"
#include "fbmc/rng.hpp"
#include "fbmc/system_matrix.hpp"
#include "fbmc/waveform.hpp"

namespace fbmc {

namespace {

constexpr const char* kVersion = "fbmcsim 1.0.0";

using nlohmann::json;

[[noreturn]] void reject(const std::string& field, const std::string& msg) {
  throw ConfigError(field, msg);
}

const json& get_object(const json& j, const std::string& key, const json& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_object()) reject(key, "must be an object");
  return j.at(key);
}

template <typename T>
T get_or(const json& j, const std::string& scope, const std::string& key, T def) {
  if (!j.contains(key)) return def;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    reject(scope.empty() ? key : scope + "." + key, "has the wrong type");
  }
}

void check_known_keys(const json& j, const std::string& scope,
                      std::initializer_list<const char*> known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) { ok = true; break; }
    if (!ok) reject(scope.empty() ? it.key() : scope + "." + it.key(), "unknown field");
  }
}

std::string canonical_config(const ExperimentConfig& c) {
  json j;
  j["kind"] = c.kind == ExperimentKind::NmseSingle  ? "nmse_single"
              : c.kind == ExperimentKind::NmseMulti ? "nmse_multi"
                                                    : "sumrate_cell";
  j["waveform"] = {{"M", c.M}, {"kappa", c.kappa}};
  j["channel"] = {{"L", c.L},
                  {"beta", c.beta},
                  {"beta_interferer_range", {c.beta_lo, c.beta_hi}}};
  j["pilots"] = {{"np", c.np_list},
                 {"np_per_user", c.np_per_user},
                 {"power", c.power},
                 {"signs", c.signs == SignPolicy::Uniform ? "uniform" : "random"}};
  j["scenario"] = {{"users", c.users},
                   {"antennas", c.antennas},
                   {"cells", c.cells},
                   {"coherence_slots", c.coherence_slots},
                   {"include_baseline", c.include_baseline},
                   {"baseline_reuse_across_cells", c.baseline_reuse_across_cells}};
  j["snr_db"] = c.snr_db;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  return j.dump();
}

std::string hash_hex(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Accumulator {
  std::vector<double> samples;
  explicit Accumulator(long n) : samples(n, 0.0) {}
  double mean() const {
    double m = 0.0;
    for (double v : samples) m += v;
    return m / samples.size();
  }
  double stderr_of_mean() const {
    if (samples.size() < 2) return 0.0;
    const double m = mean();
    double var = 0.0;
    for (double v : samples) var += (v - m) * (v - m);
    var /= (samples.size() - 1);
    return std::sqrt(var / samples.size());
  }
};

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    reject("<json>", std::string("parse error: ") + e.what());
  }
  if (!j.is_object()) reject("<json>", "top level must be an object");
  check_known_keys(j, "", {"kind", "name", "waveform", "channel", "pilots", "scenario",
                           "snr_db", "trials", "seed", "threads"});

  ExperimentConfig c;
  const std::string kind = get_or<std::string>(j, "", "kind", "");
  if (kind == "nmse_single") c.kind = ExperimentKind::NmseSingle;
  else if (kind == "nmse_multi") c.kind = ExperimentKind::NmseMulti;
  else if (kind == "sumrate_cell") c.kind = ExperimentKind::SumrateCell;
  else reject("kind", "must be one of nmse_single, nmse_multi, sumrate_cell");
  c.name = get_or<std::string>(j, "", "name", kind);

  const json empty = json::object();
  const json& wf = get_object(j, "waveform", empty);
  check_known_keys(wf, "waveform", {"M", "kappa"});
  c.M = get_or(wf, "waveform", "M", 128);
  c.kappa = get_or(wf, "waveform", "kappa", 4);
  if (c.M < 2 || c.M % 2 != 0) reject("waveform.M", "must be an even integer >= 2");
  if (c.kappa < 2 || c.kappa > 4) reject("waveform.kappa", "must be 2, 3 or 4");

  const json& ch = get_object(j, "channel", empty);
  check_known_keys(ch, "channel", {"L", "beta", "beta_interferer_range"});
  c.L = get_or(ch, "channel", "L", 32);
  c.beta = get_or(ch, "channel", "beta", 0.5);
  if (c.L < 1 || c.L > c.M) reject("channel.L", "must be in [1, M]");
  if (c.beta < 0.0) reject("channel.beta", "must be >= 0");
  if (ch.contains("beta_interferer_range")) {
    auto r = get_or<std::vector<double>>(ch, "channel", "beta_interferer_range", {});
    if (r.size() != 2 || r[0] > r[1] || r[0] < 0.0)
      reject("channel.beta_interferer_range", "must be [lo, hi] with 0 <= lo <= hi");
    c.beta_lo = r[0];
    c.beta_hi = r[1];
  }

  const json& pl = get_object(j, "pilots", empty);
  check_known_keys(pl, "pilots", {"np", "np_per_user", "power", "signs"});
  c.np_list = get_or<std::vector<int>>(pl, "pilots", "np", {});
  c.np_per_user = get_or(pl, "pilots", "np_per_user", 0);
  c.power = get_or(pl, "pilots", "power", -1.0);
  const std::string signs = get_or<std::string>(pl, "pilots", "signs", "random");
  if (signs == "random") c.signs = SignPolicy::PseudoRandom;
  else if (signs == "uniform") c.signs = SignPolicy::Uniform;
  else reject("pilots.signs", "must be random or uniform");
  if (c.power != -1.0 && c.power <= 0.0) reject("pilots.power", "must be positive");

  const json& sc = get_object(j, "scenario", empty);
  check_known_keys(sc, "scenario",
                   {"users", "antennas", "cells", "coherence_slots", "include_baseline",
                    "baseline_reuse_across_cells"});
  c.users = get_or(sc, "scenario", "users", 1);
  c.antennas = get_or(sc, "scenario", "antennas", 1);
  c.cells = get_or(sc, "scenario", "cells", 1);
  c.coherence_slots = get_or(sc, "scenario", "coherence_slots", 84);
  c.include_baseline = get_or(sc, "scenario", "include_baseline", false);
  c.baseline_reuse_across_cells =
      get_or(sc, "scenario", "baseline_reuse_across_cells", true);
  if (c.users < 1) reject("scenario.users", "must be >= 1");
  if (c.antennas < 1) reject("scenario.antennas", "must be >= 1");
  if (c.cells != 1 && c.cells != 2) reject("scenario.cells", "must be 1 or 2");
  if (c.coherence_slots < 1) reject("scenario.coherence_slots", "must be >= 1");

  c.snr_db = get_or<std::vector<double>>(j, "", "snr_db", {});
  if (c.snr_db.empty()) reject("snr_db", "must be a nonempty array");
  c.trials = get_or(j, "", "trials", 1000);
  if (c.trials < 1) reject("trials", "must be >= 1");
  c.seed = get_or<uint64_t>(j, "", "seed", 1);
  c.threads = get_or(j, "", "threads", 0);
  if (c.threads < 0) reject("threads", "must be >= 0");

  // Kind-specific requirements.
  switch (c.kind) {
    case ExperimentKind::NmseSingle:
      if (c.users != 1) reject("scenario.users", "nmse_single is single user");
      if (c.np_list.empty()) c.np_list = {c.L};
      for (int np : c.np_list)
        if (np < c.L || np > c.M)
          reject("pilots.np", "entries must be in [L, M], got " + std::to_string(np));
      break;
    case ExperimentKind::NmseMulti:
    case ExperimentKind::SumrateCell:
      if (!c.np_list.empty()) reject("pilots.np", "use np_per_user for this kind");
      if (c.np_per_user == 0) c.np_per_user = c.L;
      if (c.np_per_user < c.L || c.np_per_user > c.M)
        reject("pilots.np_per_user", "must be in [L, M]");
      break;
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) reject("<file>", "cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  ExperimentConfig c = parse_experiment_config(ss.str());
  const auto stem = std::filesystem::path(path).stem().string();
  if (!stem.empty()) c.name = stem;
  return c;
}

namespace {

// Everything fixed per curve variant of an NMSE sweep.
struct NmseVariant {
  std::string label;
  PilotPlan plan;
  std::unique_ptr<BasisBank> bank;
  long W = 0;
  std::vector<CVec> tx;                  // per user, padded to W
  std::shared_ptr<const GlsSolver> gls;  // CRLB + multiuser estimation
  CMat ls_pinv;                          // single-user LS (L x N_p)
  std::string noise_stream;
};

NmseVariant make_single_user_variant(const FbmcConfig& wave, int np, int L,
                                     double power, const ExperimentConfig& cfg) {
  NmseVariant v;
  v.label = "np" + std::to_string(np);
  v.plan = design_plan(cfg.M, {np}, power, cfg.seed, cfg.signs);
  v.bank = std::make_unique<BasisBank>(wave, pilot_slot_order(v.plan));
  v.W = v.bank->required_length();
  v.gls = cached_gls_solver(wave, v.plan, {L});
  const CMat A = build_single_user_A(wave, v.plan, L);
  Eigen::ColPivHouseholderQR<CMat> qr(A);
  v.ls_pinv = qr.solve(CMat::Identity(A.rows(), A.rows()));
  v.noise_stream = "noise-" + v.label;
  TfGrid grid = render_preamble(v.plan, PreambleLayout::for_kappa(cfg.kappa));
  BasebandSignal x = synthesize(wave, grid);
  CVec padded = CVec::Zero(v.W);
  padded.head(std::min<long>(x.size(), v.W)) = x.samples.head(std::min<long>(x.size(), v.W));
  v.tx = {padded};
  return v;
}

CVec padded_signal(const FbmcConfig& wave, const PilotPlan& plan, int u, long W) {
  PilotPlan sub;
  sub.M = plan.M;
  sub.power = plan.power;
  sub.slots = {plan.slots[u]};
  sub.values = {plan.values[u]};
  sub.comb_offset = {0};
  BasebandSignal x = synthesize(wave, render_preamble(sub, {0}));
  CVec padded = CVec::Zero(W);
  const long len = std::min<long>(x.size(), W);
  padded.head(len) = x.samples.head(len);
  return padded;
}

void convolve_into(CVec& acc, const CVec& x, const CVec& taps) {
  const long W = acc.size();
  for (long l = 0; l < taps.size(); ++l)
    acc.tail(W - l) += taps[l] * x.head(W - l);
}

ResultTable finish_table(const ExperimentConfig& cfg, std::vector<ResultRow> rows) {
  ResultTable t;
  t.rows = std::move(rows);
  t.config_hash = hash_hex(canonical_config(cfg));
  t.seed = cfg.seed;
  t.version = kVersion;
  return t;
}

ResultTable run_nmse_single(const ExperimentConfig& cfg) {
  const FbmcConfig wave = make_config(cfg.M, cfg.kappa);
  const double power = cfg.power > 0 ? cfg.power : static_cast<double>(cfg.L);
  std::vector<NmseVariant> variants;
  for (int np : cfg.np_list)
    variants.push_back(make_single_user_variant(wave, np, cfg.L, power, cfg));

  const ChannelProfile profile{cfg.L, cfg.beta, true};
  std::vector<ResultRow> rows;
  for (size_t si = 0; si < cfg.snr_db.size(); ++si) {
    const double sigma2 = power / (cfg.L * std::pow(10.0, cfg.snr_db[si] / 10.0));
    std::vector<Accumulator> nm(variants.size(), Accumulator(cfg.trials));
    std::vector<Accumulator> ms(variants.size(), Accumulator(cfg.trials));
    Accumulator inv_energy(cfg.trials);
    parallel_for_index(cfg.trials, cfg.threads, [&](long t) {
      RngStream ch_rng = RngStream::derive(cfg.seed, "channel", si, t);
      const ChannelRealization h = sample_channel(profile, ch_rng);
      const double energy = h.taps.squaredNorm();
      inv_energy.samples[t] = 1.0 / energy;
      for (size_t vi = 0; vi < variants.size(); ++vi) {
        const NmseVariant& v = variants[vi];
        CVec y = CVec::Zero(v.W);
        convolve_into(y, v.tx[0], h.taps);
        RngStream noise = RngStream::derive(cfg.seed, v.noise_stream, si, t);
        for (long k = 0; k < v.W; ++k) y[k] += noise.cgaussian(sigma2);
        const CVec z = v.bank->demodulate({y, 0});
        const CVec h_hat = v.ls_pinv * z;
        const double err = (h_hat - h.taps).squaredNorm();
        ms[vi].samples[t] = err;
        nm[vi].samples[t] = err / energy;
      }
    });
    for (size_t vi = 0; vi < variants.size(); ++vi) {
      rows.push_back({cfg.snr_db[si], "nmse_" + variants[vi].label, nm[vi].mean(),
                      nm[vi].stderr_of_mean(), cfg.trials});
      rows.push_back({cfg.snr_db[si], "mse_" + variants[vi].label, ms[vi].mean(),
                      ms[vi].stderr_of_mean(), cfg.trials});
      const double crlb_v = variants[vi].gls->crlb(sigma2);
      rows.push_back({cfg.snr_db[si], "nmse_crlb_" + variants[vi].label,
                      crlb_v * inv_energy.mean(),
                      crlb_v * inv_energy.stderr_of_mean(), cfg.trials});
    }
    const double mse_cf = analytic_mse_single(sigma2, cfg.L, power);
    rows.push_back({cfg.snr_db[si], "mse_analytic", mse_cf, 0.0, cfg.trials});
    rows.push_back({cfg.snr_db[si], "nmse_analytic", mse_cf * inv_energy.mean(),
                    mse_cf * inv_energy.stderr_of_mean(), cfg.trials});
  }
  return finish_table(cfg, std::move(rows));
}

ResultTable run_nmse_multi(const ExperimentConfig& cfg) {
  const FbmcConfig wave = make_config(cfg.M, cfg.kappa);
  const int U = cfg.users;
  const int np = cfg.np_per_user;
  const double power = cfg.power > 0 ? cfg.power : static_cast<double>(np);

  PilotPlan plan = design_plan(cfg.M, std::vector<int>(U, np), power, cfg.seed, cfg.signs);
  BasisBank bank(wave, pilot_slot_order(plan));
  const long W = bank.required_length();
  std::vector<CVec> tx;
  for (int u = 0; u < U; ++u) tx.push_back(padded_signal(wave, plan, u, W));
  auto gls = cached_gls_solver(wave, plan, std::vector<int>(U, cfg.L));

  // Optional full-pilot baseline, same per-user power budget.
  PilotPlan bplan;
  std::unique_ptr<BasisBank> bbank;
  std::vector<CVec> btx;
  std::vector<CMat> bpinv;
  std::vector<int> brow{0};
  long bW = 0;
  if (cfg.include_baseline) {
    bplan = design_fullpilot_plan(cfg.M, U, power, cfg.kappa, cfg.seed, cfg.signs);
    bbank = std::make_unique<BasisBank>(wave, pilot_slot_order(bplan));
    bW = bbank->required_length();
    for (int u = 0; u < U; ++u) {
      btx.push_back(padded_signal(wave, bplan, u, bW));
      PilotPlan sub;
      sub.M = bplan.M;
      sub.power = bplan.power;
      sub.slots = {bplan.slots[u]};
      sub.values = {bplan.values[u]};
      sub.comb_offset = {0};
      const CMat A = build_single_user_A(wave, sub, cfg.L);
      Eigen::ColPivHouseholderQR<CMat> qr(A);
      bpinv.push_back(qr.solve(CMat::Identity(A.rows(), A.rows())));
      brow.push_back(brow.back() + static_cast<int>(bplan.slots[u].size()));
    }
  }

  std::vector<ResultRow> rows;
  for (size_t si = 0; si < cfg.snr_db.size(); ++si) {
    const double sigma2 = power / (cfg.L * std::pow(10.0, cfg.snr_db[si] / 10.0));
    Accumulator nm(cfg.trials), ms(cfg.trials), inv_energy(cfg.trials);
    Accumulator nb(cfg.include_baseline ? cfg.trials : 1);
    parallel_for_index(cfg.trials, cfg.threads, [&](long t) {
      std::vector<ChannelRealization> h(U);
      double energy = 0.0;
      for (int u = 0; u < U; ++u) {
        ChannelProfile profile{cfg.L, cfg.beta, true};
        if (u > 0)
          profile.beta = RngStream::derive(cfg.seed, "beta", si, t, u)
                             .uniform(cfg.beta_lo, cfg.beta_hi);
        RngStream ch_rng = RngStream::derive(cfg.seed, "channel", si, t, u);
        h[u] = sample_channel(profile, ch_rng);
        energy += h[u].taps.squaredNorm();
      }
      inv_energy.samples[t] = 1.0 / energy;

      CVec y = CVec::Zero(W);
      for (int u = 0; u < U; ++u) convolve_into(y, tx[u], h[u].taps);
      RngStream noise = RngStream::derive(cfg.seed, "noise-gls", si, t);
      for (long k = 0; k < W; ++k) y[k] += noise.cgaussian(sigma2);
      const std::vector<CVec> h_hat = gls->estimate(bank.demodulate({y, 0}));
      double err = 0.0;
      for (int u = 0; u < U; ++u) err += (h_hat[u] - h[u].taps).squaredNorm();
      ms.samples[t] = err;
      nm.samples[t] = err / energy;

      if (cfg.include_baseline) {
        CVec yb = CVec::Zero(bW);
        for (int u = 0; u < U; ++u) convolve_into(yb, btx[u], h[u].taps);
        RngStream bnoise = RngStream::derive(cfg.seed, "noise-baseline", si, t);
        for (long k = 0; k < bW; ++k) yb[k] += bnoise.cgaussian(sigma2);
        const CVec zb = bbank->demodulate({yb, 0});
        double berr = 0.0;
        for (int u = 0; u < U; ++u) {
          const CVec hb = bpinv[u] * zb.segment(brow[u], brow[u + 1] - brow[u]);
          berr += (hb - h[u].taps).squaredNorm();
        }
        nb.samples[t] = berr / energy;
      }
    });
    rows.push_back({cfg.snr_db[si], "nmse_gls", nm.mean(), nm.stderr_of_mean(), cfg.trials});
    rows.push_back({cfg.snr_db[si], "mse_gls", ms.mean(), ms.stderr_of_mean(), cfg.trials});
    const double mse_an = gls->crlb(sigma2);  // analytic MSE == CRLB
    rows.push_back({cfg.snr_db[si], "nmse_analytic", mse_an * inv_energy.mean(),
                    mse_an * inv_energy.stderr_of_mean(), cfg.trials});
    rows.push_back({cfg.snr_db[si], "nmse_crlb", mse_an * inv_energy.mean(),
                    mse_an * inv_energy.stderr_of_mean(), cfg.trials});
    if (cfg.include_baseline)
      rows.push_back({cfg.snr_db[si], "nmse_baseline", nb.mean(), nb.stderr_of_mean(),
                      cfg.trials});
  }
  return finish_table(cfg, std::move(rows));
}

}  // namespace

ResultTable run_nmse_sweep(const ExperimentConfig& cfg) {
  if (cfg.kind == ExperimentKind::NmseSingle) return run_nmse_single(cfg);
  if (cfg.kind == ExperimentKind::NmseMulti) return run_nmse_multi(cfg);
  reject("kind", "run_nmse_sweep requires an nmse_* experiment");
}

ResultTable run_sumrate_sweep(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::SumrateCell)
    reject("kind", "run_sumrate_sweep requires kind sumrate_cell");
  ScenarioConfig sc;
  sc.M = cfg.M;
  sc.kappa = cfg.kappa;
  sc.antennas = cfg.antennas;
  sc.users = cfg.users;
  sc.cells = cfg.cells;
  sc.L = cfg.L;
  sc.beta_desired = cfg.beta;
  sc.beta_lo = cfg.beta_lo;
  sc.beta_hi = cfg.beta_hi;
  sc.pilot_power = cfg.power;
  sc.coherence_slots = cfg.coherence_slots;
  sc.snr_db = cfg.snr_db;
  sc.trials = cfg.trials;
  sc.seed = cfg.seed;
  sc.threads = cfg.threads;
  sc.baseline_reuse_across_cells = cfg.baseline_reuse_across_cells;

  const auto proposed = run_cell_scenario(sc, Method::Proposed);
  const auto baseline = run_cell_scenario(sc, Method::FullPilotBaseline);
  std::vector<ResultRow> rows;
  for (size_t i = 0; i < proposed.size(); ++i) {
    rows.push_back({proposed[i].snr_db, "sumrate_proposed", proposed[i].value,
                    proposed[i].stderr_, cfg.trials});
    rows.push_back({baseline[i].snr_db, "sumrate_baseline", baseline[i].value,
                    baseline[i].stderr_, cfg.trials});
    rows.push_back({proposed[i].snr_db, "gamma_proposed", proposed[i].gamma, 0.0,
                    cfg.trials});
    rows.push_back({baseline[i].snr_db, "gamma_baseline", baseline[i].gamma, 0.0,
                    cfg.trials});
  }
  return finish_table(cfg, std::move(rows));
}

void write_csv(const ResultTable& table, std::ostream& os) {
  os << "# " << table.version << " config=" << table.config_hash
     << " seed=" << table.seed << "\n";
  os << csv_body(table);
}

std::string csv_body(const ResultTable& table) {
  std::string out = "snr_db,metric,value,stderr,trials\n";
  for (const auto& r : table.rows) {
    out += fmt_double(r.snr_db);
    out += ',';
    out += r.metric;
    out += ',';
    out += fmt_double(r.value);
    out += ',';
    out += fmt_double(r.stderr_);
    out += ',';
    out += std::to_string(r.trials);
    out += '\n';
  }
  return out;
}

std::vector<ResultRow> parse_csv(const std::string& text) {
  std::vector<ResultRow> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("snr_db,", 0) == 0) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (fields.size() != 5)
      throw std::runtime_error("parse_csv: malformed row: " + line);
    ResultRow r;
    r.snr_db = std::stod(fields[0]);
    r.metric = fields[1];
    r.value = std::stod(fields[2]);
    r.stderr_ = std::stod(fields[3]);
    r.trials = std::stol(fields[4]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_jsonl(const ResultTable& table, std::ostream& os) {
  json meta = {{"version", table.version},
               {"config", table.config_hash},
               {"seed", table.seed}};
  os << meta.dump() << "\n";
  for (const auto& r : table.rows) {
    json row = {{"snr_db", r.snr_db},
                {"metric", r.metric},
                {"value", r.value},
                {"stderr", r.stderr_},
                {"trials", r.trials}};
    os << row.dump() << "\n";
  }
}

void print_summary(const ResultTable& table, std::ostream& os) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%8s  %-24s %14s %12s %8s", "snr_db", "metric",
                "value", "stderr", "trials");
  os << buf << "\n";
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%8.2f  %-24s %14.6g %12.3g %8ld", r.snr_db,
                  r.metric.c_str(), r.value, r.stderr_, r.trials);
    os << buf << "\n";
  }
}

std::vector<std::string> emit(const ResultTable& table, const std::string& dir,
                              const std::string& format, const std::string& basename) {
  if (table.rows.empty())
    throw std::invalid_argument("emit: empty result table, no file created");
  if (format != "csv" && format != "jsonl" && format != "both")
    throw std::invalid_argument("emit: format must be csv, jsonl or both");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::vector<std::string> paths;
  auto write_one = [&](const std::string& ext, auto writer) {
    const std::string path = (std::filesystem::path(dir) / (basename + ext)).string();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("emit: cannot write " + path);
    writer(os);
    if (!os) throw std::runtime_error("emit: write failed for " + path);
    paths.push_back(path);
  };
  if (format == "csv" || format == "both")
    write_one(".csv", [&](std::ostream& os) { write_csv(table, os); });
  if (format == "jsonl" || format == "both")
    write_one(".jsonl", [&](std::ostream& os) { write_jsonl(table, os); });
  return paths;
}

}  // namespace fbmc
