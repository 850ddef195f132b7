#pragma once
// Reproducible experiment runner: config files, seeded parallel Monte-Carlo
// sweeps, and tabular result output (CSV / JSON lines).

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbmc/pilots.hpp"
#include "fbmc/types.hpp"

namespace fbmc {

/// Config rejection with the offending field; the CLI maps this to exit 2.
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string f, const std::string& msg)
      : std::runtime_error(f + ": " + msg), field(std::move(f)) {}
};

enum class ExperimentKind { NmseSingle, NmseMulti, SumrateCell };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::NmseSingle;
  std::string name = "experiment";
  // waveform
  int M = 128;
  int kappa = 4;
  // channel
  int L = 32;
  double beta = 0.5;
  double beta_lo = 0.4, beta_hi = 0.6;
  // pilots
  std::vector<int> np_list;  // nmse_single: one empirical curve per entry
  int np_per_user = 0;       // nmse_multi / sumrate; 0 means L
  double power = -1.0;       // per-user P_t; < 0 means N_p
  SignPolicy signs = SignPolicy::PseudoRandom;
  // scenario
  int users = 1;
  int antennas = 1;
  int cells = 1;
  int coherence_slots = 84;
  bool include_baseline = false;
  bool baseline_reuse_across_cells = true;
  // sweep
  std::vector<double> snr_db;
  int trials = 1000;
  uint64_t seed = 1;
  int threads = 0;  // runtime override; 0 = hardware concurrency
};

/// Parses and validates a JSON experiment config. Throws ConfigError with a
/// field-level message before any simulation runs.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

struct ResultRow {
  double snr_db = 0.0;
  std::string metric;
  double value = 0.0;
  double stderr_ = 0.0;
  long trials = 0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::string config_hash;  // hex digest of the canonical config
  uint64_t seed = 0;
  std::string version;
};

/// NMSE sweep (kinds nmse_single / nmse_multi): per SNR point emits empirical
/// NMSE, normalized analytic MSE and normalized CRLB (and the baseline curve
/// when configured). SNR convention: sigma2 = P_t / (L * 10^(SNR/10)), the
/// per-pilot-sample SNR of the reference N_p = L plan, shared by all curve
/// variants of the sweep.
ResultTable run_nmse_sweep(const ExperimentConfig& cfg);

/// Sum-rate sweep (kind sumrate_cell): proposed and baseline per-cell
/// sum-rates per SNR. SNR convention: sigma2 = 10^(-SNR/10) with unit
/// per-user data power (per-antenna receive SNR).
ResultTable run_sumrate_sweep(const ExperimentConfig& cfg);

/// CSV: one '#' metadata line, then "snr_db,metric,value,stderr,trials".
void write_csv(const ResultTable& table, std::ostream& os);
/// CSV body only (no metadata line); what determinism checks compare.
std::string csv_body(const ResultTable& table);
/// Parses rows back from CSV text (metadata and header lines skipped).
/// Values round-trip losslessly through write_csv.
std::vector<ResultRow> parse_csv(const std::string& text);
/// JSON lines: one metadata object, then one object per row.
void write_jsonl(const ResultTable& table, std::ostream& os);
/// Fixed-width human-readable dump.
void print_summary(const ResultTable& table, std::ostream& os);

/// Writes <dir>/<basename>.csv and/or .jsonl ("csv", "jsonl" or "both").
/// Returns the paths written. Throws std::invalid_argument on an empty
/// table (no files created) and std::runtime_error on unwritable paths.
std::vector<std::string> emit(const ResultTable& table, const std::string& dir,
                              const std::string& format, const std::string& basename);

}  // namespace fbmc
