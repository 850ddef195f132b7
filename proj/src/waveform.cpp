#include "fbmc/waveform.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fbmc {

RVec build_prototype(int kappa, int M) {
  if (M < 2 || M % 2 != 0)
    throw std::invalid_argument("build_prototype: M must be even and >= 2, got " +
                                std::to_string(M));
  // Frequency-sampling coefficients H_1..H_{kappa-1} of the PHYDYAS design;
  // H_0 = 1 and H_i^2 + H_{kappa-i}^2 = 1.
  std::vector<double> H;
  switch (kappa) {
    case 2: H = {std::sqrt(2.0) / 2.0}; break;
    case 3: H = {0.91143783, 0.41143783}; break;
    case 4: H = {0.97195983, std::sqrt(2.0) / 2.0, 0.23514695}; break;
    default:
      throw std::invalid_argument(
          "build_prototype: PHYDYAS coefficients tabulated for kappa in {2,3,4}, got " +
          std::to_string(kappa));
  }
  const int N = kappa * M;
  RVec g(N);
  for (int k = 0; k < N; ++k) {
    double v = 1.0;
    for (int i = 1; i < kappa; ++i)
      v += 2.0 * (i % 2 ? -1.0 : 1.0) * H[i - 1] * std::cos(2.0 * kPi * i * k / N);
    g[k] = v;
  }
  g /= g.norm();
  return g;
}

FbmcConfig make_config(int M, int kappa) {
  FbmcConfig cfg;
  cfg.M = M;
  cfg.kappa = kappa;
  cfg.prototype = build_prototype(kappa, M);
  return cfg;
}

TfGrid TfGrid::make(int M, int N_t, int role) {
  TfGrid grid;
  grid.M = M;
  grid.N_t = N_t;
  grid.symbols = RMat::Zero(M, N_t);
  grid.owner = IMat::Constant(M, N_t, role);
  return grid;
}

void TfGrid::validate() const {
  if (symbols.rows() != M || symbols.cols() != N_t || owner.rows() != M ||
      owner.cols() != N_t)
    throw std::logic_error("TfGrid: shape mismatch");
  for (int n = 0; n < N_t; ++n)
    for (int m = 0; m < M; ++m)
      if (owner(m, n) == kRoleGuard && symbols(m, n) != 0.0)
        throw std::logic_error("TfGrid: guard slot (" + std::to_string(m) + "," +
                               std::to_string(n) + ") carries a nonzero value");
}

BasebandSignal basis_function(const FbmcConfig& cfg, int m, int n) {
  if (m < 0 || m >= cfg.M)
    throw std::out_of_range("basis_function: subcarrier index " + std::to_string(m) +
                            " outside [0, " + std::to_string(cfg.M) + ")");
  const int N = cfg.filter_length();
  const long start = static_cast<long>(n) * cfg.symbol_advance();
  BasebandSignal b;
  b.offset = start;
  b.samples.resize(N);
  const Complex phase = std::exp(Complex(0, kPi * (m + n) / 2.0));
  for (int i = 0; i < N; ++i) {
    const long k = start + i;  // absolute time index
    b.samples[i] = cfg.prototype[i] * std::exp(Complex(0, 2.0 * kPi * m * k / cfg.M)) * phase;
  }
  return b;
}

BasebandSignal synthesize(const FbmcConfig& cfg, const TfGrid& grid) {
  if (grid.M != cfg.M)
    throw std::invalid_argument("synthesize: grid has M=" + std::to_string(grid.M) +
                                ", config has M=" + std::to_string(cfg.M));
  BasebandSignal x;
  x.offset = 0;
  x.samples = CVec::Zero((grid.N_t - 1) * static_cast<long>(cfg.symbol_advance()) +
                         cfg.filter_length());
  for (int n = 0; n < grid.N_t; ++n) {
    for (int m = 0; m < grid.M; ++m) {
      const double s = grid.symbols(m, n);
      if (s == 0.0) continue;
      BasebandSignal b = basis_function(cfg, m, n);
      x.samples.segment(b.offset, b.size()) += s * b.samples;
    }
  }
  return x;
}

CVec analyze(const FbmcConfig& cfg, const BasebandSignal& y,
             const std::vector<std::pair<int, int>>& slots) {
  CVec z(slots.size());
  for (size_t i = 0; i < slots.size(); ++i) {
    BasebandSignal b = basis_function(cfg, slots[i].first, slots[i].second);
    if (b.offset < y.offset || b.end() > y.end())
      throw std::out_of_range("analyze: slot (" + std::to_string(slots[i].first) + "," +
                              std::to_string(slots[i].second) +
                              ") support exceeds signal extent");
    // Eigen's dot conjugates the left operand: g.dot(y) = sum conj(g)*y.
    z[i] = b.samples.dot(y.samples.segment(b.offset - y.offset, b.size()));
  }
  return z;
}

}  // namespace fbmc
