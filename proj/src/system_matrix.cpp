#include "fbmc/system_matrix.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace fbmc {

std::vector<SlotRef> pilot_slot_order(const PilotPlan& plan) {
  std::vector<SlotRef> order;
  order.reserve(plan.total_pilots());
  for (int u = 0; u < plan.users(); ++u)
    for (const auto& p : plan.slots[u]) order.push_back({u, p.m, p.n});
  return order;
}

BasisBank::BasisBank(const FbmcConfig& cfg, std::vector<SlotRef> order)
    : order_(std::move(order)), window_(cfg.filter_length()) {
  std::map<int, std::vector<int>> by_time;  // n -> indices into order_
  for (size_t i = 0; i < order_.size(); ++i) by_time[order_[i].n].push_back((int)i);
  for (const auto& [n, idx] : by_time) {
    Group grp;
    grp.start = static_cast<long>(n) * cfg.symbol_advance();
    grp.basis.resize(window_, idx.size());
    grp.rows.assign(idx.begin(), idx.end());
    for (size_t c = 0; c < idx.size(); ++c) {
      BasebandSignal b = basis_function(cfg, order_[idx[c]].m, order_[idx[c]].n);
      grp.basis.col(c) = b.samples;
    }
    required_ = std::max(required_, grp.start + window_);
    groups_.push_back(std::move(grp));
  }
}

CVec BasisBank::demodulate(const BasebandSignal& y) const {
  CVec z(order_.size());
  for (const auto& grp : groups_) {
    if (grp.start < y.offset || grp.start + window_ > y.end())
      throw std::out_of_range("BasisBank: signal does not cover a pilot window");
    CVec zg = grp.basis.adjoint() * y.samples.segment(grp.start - y.offset, window_);
    for (size_t c = 0; c < grp.rows.size(); ++c) z[grp.rows[c]] = zg[c];
  }
  return z;
}

CMat BasisBank::demodulate_all(const CMat& Y) const {
  if (Y.rows() < required_)
    throw std::out_of_range("BasisBank: signals shorter than required window span");
  CMat Z(order_.size(), Y.cols());
  for (const auto& grp : groups_) {
    CMat Zg = grp.basis.adjoint() * Y.middleRows(grp.start, window_);
    for (size_t c = 0; c < grp.rows.size(); ++c) Z.row(grp.rows[c]) = Zg.row(c);
  }
  return Z;
}

namespace {

// Synthesizes user u's part of the preamble, zero-padded to `len` samples.
CVec user_preamble_padded(const FbmcConfig& cfg, const PilotPlan& plan, int u,
                          long len) {
  TfGrid grid = TfGrid::make(cfg.M, std::max(plan.pilot_time_slots(), 1),
                             TfGrid::kRoleGuard);
  for (size_t i = 0; i < plan.slots[u].size(); ++i) {
    const auto& p = plan.slots[u][i];
    grid.symbols(p.m, p.n) = plan.values[u][i];
    grid.owner(p.m, p.n) = u;
  }
  BasebandSignal x = synthesize(cfg, grid);
  CVec padded = CVec::Zero(len);
  padded.head(std::min<long>(x.size(), len)) = x.samples.head(std::min<long>(x.size(), len));
  return padded;
}

}  // namespace

CMat build_multiuser_A(const FbmcConfig& cfg, const PilotPlan& plan,
                       const std::vector<int>& lengths) {
  if (static_cast<int>(lengths.size()) != plan.users())
    throw std::invalid_argument("build_multiuser_A: lengths do not match plan users");
  for (int u = 0; u < plan.users(); ++u) {
    if (lengths[u] < 1)
      throw std::invalid_argument("build_multiuser_A: channel length must be >= 1");
    if (static_cast<int>(plan.slots[u].size()) < lengths[u])
      throw std::invalid_argument("build_multiuser_A: user " + std::to_string(u) +
                                  " has fewer pilots than channel taps");
  }
  BasisBank bank(cfg, pilot_slot_order(plan));
  const long W = bank.required_length();
  const int max_delay = *std::max_element(lengths.begin(), lengths.end()) - 1;
  if (max_delay >= cfg.filter_length())
    throw std::invalid_argument("build_multiuser_A: delay span exceeds preamble padding");

  int total_cols = 0;
  for (int l : lengths) total_cols += l;
  CMat A(bank.order().size(), total_cols);
  int col0 = 0;
  for (int u = 0; u < plan.users(); ++u) {
    const CVec x = user_preamble_padded(cfg, plan, u, W);
    // Column for delay l is the demodulated response to x delayed by l;
    // stack the delayed copies and demodulate them in one pass.
    CMat Xd = CMat::Zero(W, lengths[u]);
    for (int l = 0; l < lengths[u]; ++l)
      Xd.col(l).tail(W - l) = x.head(W - l);
    A.middleCols(col0, lengths[u]) = bank.demodulate_all(Xd);
    col0 += lengths[u];
  }
  return A;
}

CMat build_single_user_A(const FbmcConfig& cfg, const PilotPlan& plan, int L) {
  if (plan.users() != 1)
    throw std::invalid_argument("build_single_user_A: plan must have exactly one user");
  return build_multiuser_A(cfg, plan, {L});
}

CMat build_noise_covariance(const FbmcConfig& cfg, const PilotPlan& plan,
                            double sigma2) {
  if (sigma2 < 0.0)
    throw std::invalid_argument("build_noise_covariance: negative variance");
  BasisBank bank(cfg, pilot_slot_order(plan));
  const long W = bank.required_length();
  // C(i,j) = sigma2 * sum_k g_j[k] conj(g_i[k]); evaluate as the Gram matrix
  // of the zero-padded basis vectors.
  const auto& order = bank.order();
  CMat G = CMat::Zero(W, order.size());
  for (size_t i = 0; i < order.size(); ++i) {
    BasebandSignal b = basis_function(cfg, order[i].m, order[i].n);
    G.col(i).segment(b.offset, b.size()) = b.samples;
  }
  CMat C = G.adjoint() * G;
  // Force exact Hermitian symmetry against rounding in the products.
  C = (C + C.adjoint().eval()) / 2.0;
  return sigma2 * C;
}

SystemMatrices make_system_matrices(const FbmcConfig& cfg, const PilotPlan& plan,
                                    const std::vector<int>& lengths) {
  SystemMatrices S;
  S.slot_order = pilot_slot_order(plan);
  S.lengths = lengths;
  S.A_bar = build_multiuser_A(cfg, plan, lengths);
  S.C0 = build_noise_covariance(cfg, plan, 1.0);
  S.row_offset.assign(1, 0);
  S.col_offset.assign(1, 0);
  for (int u = 0; u < plan.users(); ++u) {
    S.row_offset.push_back(S.row_offset.back() + (int)plan.slots[u].size());
    S.col_offset.push_back(S.col_offset.back() + lengths[u]);
  }
  return S;
}

namespace {

constexpr char kMagic[8] = {'F', 'B', 'S', 'M', 'X', '0', '0', '1'};

void put_i32(std::ostream& os, int32_t v) { os.write(reinterpret_cast<char*>(&v), 4); }
int32_t get_i32(std::istream& is) {
  int32_t v;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

void put_cmat(std::ostream& os, const CMat& A) {
  for (long r = 0; r < A.rows(); ++r)
    for (long c = 0; c < A.cols(); ++c) {
      double re = A(r, c).real(), im = A(r, c).imag();
      os.write(reinterpret_cast<char*>(&re), 8);
      os.write(reinterpret_cast<char*>(&im), 8);
    }
}

CMat get_cmat(std::istream& is, long rows, long cols) {
  CMat A(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) {
      double re, im;
      is.read(reinterpret_cast<char*>(&re), 8);
      is.read(reinterpret_cast<char*>(&im), 8);
      A(r, c) = {re, im};
    }
  return A;
}

}  // namespace

void save_system(const SystemMatrices& S, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_system: cannot open " + path);
  os.write(kMagic, 8);
  const int U = static_cast<int>(S.lengths.size());
  put_i32(os, (int32_t)S.A_bar.rows());
  put_i32(os, (int32_t)S.A_bar.cols());
  put_i32(os, U);
  for (int v : S.lengths) put_i32(os, v);
  for (int v : S.row_offset) put_i32(os, v);
  for (int v : S.col_offset) put_i32(os, v);
  for (const auto& s : S.slot_order) {
    put_i32(os, s.user);
    put_i32(os, s.m);
    put_i32(os, s.n);
  }
  put_cmat(os, S.A_bar);
  put_cmat(os, S.C0);
}

SystemMatrices load_system(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_system: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("load_system: bad magic in " + path);
  const long rows = get_i32(is), cols = get_i32(is);
  const int U = get_i32(is);
  SystemMatrices S;
  S.lengths.resize(U);
  for (int& v : S.lengths) v = get_i32(is);
  S.row_offset.resize(U + 1);
  for (int& v : S.row_offset) v = get_i32(is);
  S.col_offset.resize(U + 1);
  for (int& v : S.col_offset) v = get_i32(is);
  S.slot_order.resize(rows);
  for (auto& s : S.slot_order) {
    s.user = get_i32(is);
    s.m = get_i32(is);
    s.n = get_i32(is);
  }
  S.A_bar = get_cmat(is, rows, cols);
  S.C0 = get_cmat(is, rows, rows);
  if (!is) throw std::runtime_error("load_system: truncated file " + path);
  return S;
}

}  // namespace fbmc
