#include "fbmc/pilots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fbmc/rng.hpp"

namespace fbmc {

int PilotPlan::total_pilots() const {
  int n = 0;
  for (const auto& s : slots) n += static_cast<int>(s.size());
  return n;
}

int PilotPlan::pilot_time_slots() const {
  int last = -1;
  for (const auto& s : slots)
    for (const auto& p : s) last = std::max(last, p.n);
  return last + 1;
}

void PilotPlan::validate() const {
  if (slots.size() != values.size())
    throw std::logic_error("PilotPlan: slots/values user count mismatch");
  std::set<std::pair<int, int>> used;
  for (int u = 0; u < users(); ++u) {
    if (static_cast<int>(slots[u].size()) != values[u].size())
      throw std::logic_error("PilotPlan: slot/value length mismatch for user " +
                             std::to_string(u));
    double e = values[u].squaredNorm();
    if (std::abs(e - power) > 1e-12 * std::max(1.0, power))
      throw std::logic_error("PilotPlan: user " + std::to_string(u) +
                             " pilot energy " + std::to_string(e) +
                             " != budget " + std::to_string(power));
    for (const auto& p : slots[u]) {
      if (p.m < 0 || p.m >= M || p.n < 0)
        throw std::logic_error("PilotPlan: slot out of range");
      if (!used.insert({p.m, p.n}).second)
        throw std::logic_error("PilotPlan: slot (" + std::to_string(p.m) + "," +
                               std::to_string(p.n) + ") assigned to two users");
    }
  }
}

namespace {

RVec draw_values(int n, double power, RngStream& rng, SignPolicy policy) {
  const double mag = std::sqrt(power / n);
  RVec v(n);
  for (int i = 0; i < n; ++i)
    v[i] = mag * (policy == SignPolicy::PseudoRandom ? rng.sign() : 1.0);
  return v;
}

}  // namespace

PilotPlan design_plan(int M, const std::vector<int>& pilots_per_user,
                      double power_per_user, uint64_t sign_seed, SignPolicy policy) {
  if (M < 2) throw std::invalid_argument("design_plan: M must be >= 2");
  if (power_per_user <= 0.0)
    throw std::invalid_argument("design_plan: power budget must be positive");
  if (pilots_per_user.empty())
    throw std::invalid_argument("design_plan: no users");

  PilotPlan plan;
  plan.M = M;
  plan.power = power_per_user;
  const int U = static_cast<int>(pilots_per_user.size());
  plan.slots.resize(U);
  plan.values.resize(U);
  plan.comb_offset.resize(U);

  // Occupied (m, n) slots so far; combs are placed first-fit starting at
  // offset u in time slot 0, moving to later offsets then later slots.
  std::set<std::pair<int, int>> used;
  for (int u = 0; u < U; ++u) {
    const int np = pilots_per_user[u];
    if (np < 1 || np > M)
      throw std::invalid_argument("design_plan: user " + std::to_string(u) + " needs " +
                                  std::to_string(np) + " pilots, capacity is M=" +
                                  std::to_string(M));
    const bool exact = (M % np == 0);
    if (!exact) plan.near_uniform = true;

    auto comb = [&](int offset) {
      std::vector<int> ms(np);
      if (exact) {
        const int spacing = M / np;
        for (int i = 0; i < np; ++i) ms[i] = offset + spacing * i;
      } else {
        // Near-uniform fallback: round positions of an ideal fractional comb.
        for (int i = 0; i < np; ++i)
          ms[i] = (offset + static_cast<int>(std::lround(double(i) * M / np))) % M;
      }
      return ms;
    };

    bool placed = false;
    for (int n = 0; n < 2 * U && !placed; ++n) {
      const int max_off = exact ? M / np : M;
      for (int off = (n == 0 ? u % std::max(1, max_off) : 0); off < max_off; ++off) {
        auto ms = comb(off);
        if (*std::max_element(ms.begin(), ms.end()) >= M) continue;
        bool free = true;
        for (int m : ms)
          if (used.count({m, n})) { free = false; break; }
        if (!free) continue;
        for (int m : ms) {
          used.insert({m, n});
          plan.slots[u].push_back({m, n});
        }
        plan.comb_offset[u] = off;
        placed = true;
        break;
      }
    }
    if (!placed)
      throw std::invalid_argument("design_plan: could not place comb for user " +
                                  std::to_string(u) + " (capacity exceeded)");
    RngStream rng = RngStream::derive(sign_seed, "pilot-signs", u);
    plan.values[u] = draw_values(np, power_per_user, rng, policy);
  }
  plan.validate();
  return plan;
}

PilotPlan design_fullpilot_plan(int M, int users, double power_per_user, int kappa,
                                uint64_t sign_seed, SignPolicy policy) {
  if (users < 1) throw std::invalid_argument("design_fullpilot_plan: no users");
  PilotPlan plan;
  plan.M = M;
  plan.power = power_per_user;
  plan.slots.resize(users);
  plan.values.resize(users);
  plan.comb_offset.assign(users, 0);
  for (int u = 0; u < users; ++u) {
    const int n = u * kappa;  // kappa-1 guard slots between consecutive users
    for (int m = 0; m < M; ++m) plan.slots[u].push_back({m, n});
    RngStream rng = RngStream::derive(sign_seed, "pilot-signs", u);
    plan.values[u] = draw_values(M, power_per_user, rng, policy);
  }
  plan.validate();
  return plan;
}

TfGrid render_preamble(const PilotPlan& plan, const PreambleLayout& layout) {
  const int n_pilot = std::max(plan.pilot_time_slots(), 1);
  TfGrid grid = TfGrid::make(plan.M, n_pilot + layout.n_guard, TfGrid::kRoleGuard);
  for (int u = 0; u < plan.users(); ++u)
    for (size_t i = 0; i < plan.slots[u].size(); ++i) {
      const auto& p = plan.slots[u][i];
      grid.symbols(p.m, p.n) = plan.values[u][i];
      grid.owner(p.m, p.n) = u;
    }
  grid.validate();
  return grid;
}

double measure_papr_db(const BasebandSignal& x) {
  if (x.size() == 0) throw std::domain_error("measure_papr_db: empty signal");
  const RVec p = x.samples.cwiseAbs2();
  const double peak = p.maxCoeff();
  if (peak == 0.0) throw std::domain_error("measure_papr_db: all-zero signal");
  return 10.0 * std::log10(peak / p.mean());
}

void save_plan(const PilotPlan& plan, std::ostream& os) {
  os << "# fbmc pilot plan v1\n";
  os << "M " << plan.M << "\n";
  os << "users " << plan.users() << "\n";
  os.precision(17);
  os << "power " << plan.power << "\n";
  os << "offsets";
  for (int o : plan.comb_offset) os << " " << o;
  os << "\n";
  os << "near_uniform " << (plan.near_uniform ? 1 : 0) << "\n";
  os << "# user m n value\n";
  for (int u = 0; u < plan.users(); ++u)
    for (size_t i = 0; i < plan.slots[u].size(); ++i)
      os << u << " " << plan.slots[u][i].m << " " << plan.slots[u][i].n << " "
         << plan.values[u][i] << "\n";
}

void save_plan(const PilotPlan& plan, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_plan: cannot open " + path);
  save_plan(plan, os);
}

PilotPlan load_plan(std::istream& is) {
  PilotPlan plan;
  int users = 0;
  std::vector<std::vector<double>> vals;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "M") ls >> plan.M;
    else if (key == "users") { ls >> users; plan.slots.resize(users); vals.resize(users); }
    else if (key == "power") ls >> plan.power;
    else if (key == "offsets") { int o; while (ls >> o) plan.comb_offset.push_back(o); }
    else if (key == "near_uniform") { int f; ls >> f; plan.near_uniform = f != 0; }
    else {
      // pilot record: user m n value
      std::istringstream rec(line);
      int u, m, n;
      double v;
      if (!(rec >> u >> m >> n >> v) || u < 0 || u >= users)
        throw std::runtime_error("load_plan: bad record: " + line);
      plan.slots[u].push_back({m, n});
      vals[u].push_back(v);
    }
  }
  plan.values.resize(users);
  for (int u = 0; u < users; ++u)
    plan.values[u] = Eigen::Map<const RVec>(vals[u].data(), vals[u].size());
  plan.validate();
  return plan;
}

PilotPlan load_plan(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_plan: cannot open " + path);
  return load_plan(is);
}

}  // namespace fbmc
