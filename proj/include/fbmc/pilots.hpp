#pragma once
// Interleaved multiuser pilot preamble: per-user equally spaced frequency
// combs sharing the preamble time slots with no guards between users, guard
// slots only between preamble and data. Includes power budgeting, plan file
// serialization and PAPR measurement.

#include <iosfwd>
#include <string>
#include <vector>

#include "fbmc/types.hpp"
#include "fbmc/waveform.hpp"

namespace fbmc {

struct PilotSlot {
  int m = 0;
  int n = 0;
};

enum class SignPolicy { PseudoRandom, Uniform };

/** Per-user pilot slot coordinates, values and power budget. Slot lists are
 *  pairwise disjoint across users; per user sum(value^2) = power. */
struct PilotPlan {
  int M = 0;
  std::vector<std::vector<PilotSlot>> slots;  // per user
  std::vector<RVec> values;                   // per user, aligned with slots
  double power = 0.0;                         // per-user budget P_t
  std::vector<int> comb_offset;               // frequency offset per user
  bool near_uniform = false;                  // set when M % N_p != 0 fallback used

  int users() const { return static_cast<int>(slots.size()); }
  int total_pilots() const;
  /// Number of time slots occupied by pilots (max n + 1).
  int pilot_time_slots() const;
  /// Throws std::logic_error on invariant violations (overlap, power).
  void validate() const;
};

/** Preamble layout: pilot slots followed by n_guard all-zero slots that
 *  isolate the preamble from data. */
struct PreambleLayout {
  int n_guard = 3;
  static PreambleLayout for_kappa(int kappa) { return {kappa - 1}; }
};

/// Equally spaced comb per user: user u gets pilots_per_user[u] pilots with
/// frequency spacing M / N_p^u, users frequency-offset from each other and
/// packed into as few time slots as possible (a second slot opens only when
/// a user's comb cannot fit). All values have magnitude sqrt(power / N_p^u);
/// signs follow `policy` (seeded pseudo-random or all +1).
/// Non-divisible M / N_p^u falls back to near-uniform placement and sets
/// plan.near_uniform. Throws std::invalid_argument when a comb cannot fit
/// (N_p^u > M) or parameters are invalid.
PilotPlan design_plan(int M, const std::vector<int>& pilots_per_user,
                      double power_per_user, uint64_t sign_seed = 0,
                      SignPolicy policy = SignPolicy::PseudoRandom);

/// Full-subcarrier baseline plan: user u occupies every subcarrier of time
/// slot u*kappa, consecutive users separated by kappa-1 guard slots.
PilotPlan design_fullpilot_plan(int M, int users, double power_per_user, int kappa,
                                uint64_t sign_seed = 0,
                                SignPolicy policy = SignPolicy::PseudoRandom);

/// Grid with pilot values at the plan slots, everything else guard (zero).
/// Grid length = pilot time slots + layout.n_guard.
TfGrid render_preamble(const PilotPlan& plan, const PreambleLayout& layout);

/// 10*log10(max |x|^2 / mean |x|^2). Throws std::domain_error on an
/// all-zero signal.
double measure_papr_db(const BasebandSignal& x);

/// Plan file: header lines (M, users, power, offsets) then one record per
/// pilot "user m n value". Round-trips through load_plan.
void save_plan(const PilotPlan& plan, std::ostream& os);
void save_plan(const PilotPlan& plan, const std::string& path);
PilotPlan load_plan(std::istream& is);
PilotPlan load_plan(const std::string& path);

}  // namespace fbmc
