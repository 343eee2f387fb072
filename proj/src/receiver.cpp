#include "mdobf/receiver.hpp"

#include <cmath>
#include <string>

#include "mdobf/fft.hpp"

namespace mdobf {
namespace {

std::size_t known_column(const SymbolGrid& known, std::size_t m, std::size_t n_received) {
  if (known.n_symbols() == 1) return 0;
  if (known.n_symbols() != n_received)
    throw DimensionError("reference grid must have one column or one per received symbol");
  return m;
}

}  // namespace

void CfrSeries::append(const CfrSeries& other) {
  if (t.empty()) {
    *this = other;
    return;
  }
  if (other.subcarriers != subcarriers) throw DimensionError("CfrSeries::append: subcarrier rows differ");
  const std::size_t rows = subcarriers.size();
  const std::size_t cols = t.size() + other.t.size();
  Matrix<cplx> h(rows, cols);
  Matrix<double> p(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < t.size(); ++c) {
      h(r, c) = h_hat(r, c);
      p(r, c) = power(r, c);
    }
    for (std::size_t c = 0; c < other.t.size(); ++c) {
      h(r, t.size() + c) = other.h_hat(r, c);
      p(r, t.size() + c) = other.power(r, c);
    }
  }
  h_hat = std::move(h);
  power = std::move(p);
  t.insert(t.end(), other.t.begin(), other.t.end());
}

SymbolGrid ofdm_demodulate(const BasebandSignal& sig, std::size_t n_subcarriers, std::size_t cp_len) {
  const std::size_t len = n_subcarriers + cp_len;
  if (sig.samples.size() % len != 0)
    throw DimensionError("ofdm_demodulate: sample count is not a multiple of N + cp");
  const std::size_t n_sym = sig.samples.size() / len;
  SymbolGrid grid(n_subcarriers, n_sym);
  if (n_sym == 0) return grid;
  const Dft& dft = dft_of_size(n_subcarriers);

  #pragma omp parallel for schedule(static)
  for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(n_sym); ++m) {
    const std::size_t base = static_cast<std::size_t>(m) * len + cp_len;
    dft.forward_unitary({sig.samples.data() + base, n_subcarriers}, grid.symbol(static_cast<std::size_t>(m)));
  }
  return grid;
}

SymbolGrid ofdm_demodulate(const BasebandSignal& sig, const ScenarioConfig& cfg) {
  return ofdm_demodulate(sig, cfg.n_subcarriers, cfg.cp_len);
}

CfrSeries estimate_cfr(const SymbolGrid& received, const SymbolGrid& known, std::span<const int> subcarriers,
                       std::span<const double> symbol_times, std::size_t decimation) {
  if (decimation == 0) throw DimensionError("estimate_cfr: decimation must be >= 1");
  if (symbol_times.size() != received.n_symbols())
    throw DimensionError("estimate_cfr: one timestamp per received symbol required");
  if (known.n_subcarriers() != received.n_subcarriers())
    throw DimensionError("estimate_cfr: grids differ in subcarrier count");
  const std::size_t n = received.n_subcarriers();
  const std::size_t kept = (received.n_symbols() + decimation - 1) / decimation;

  CfrSeries out;
  out.subcarriers.assign(subcarriers.begin(), subcarriers.end());
  out.h_hat = Matrix<cplx>(subcarriers.size(), kept);
  out.power = Matrix<double>(subcarriers.size(), kept);
  out.t.resize(kept);
  for (std::size_t c = 0; c < kept; ++c) {
    const std::size_t m = c * decimation;
    out.t[c] = symbol_times[m];
    const std::size_t kc = known_column(known, m, received.n_symbols());
    for (std::size_t r = 0; r < subcarriers.size(); ++r) {
      const std::size_t b = SubcarrierMap::bin(subcarriers[r], n);
      const cplx x = known.at(b, kc);
      const double e = std::norm(x);
      if (e == 0.0)
        throw DimensionError("estimate_cfr: known symbol is zero on subcarrier " + std::to_string(subcarriers[r]));
      const cplx h = std::conj(x) * received.at(b, m) / e;
      out.h_hat(r, c) = h;
      out.power(r, c) = std::norm(h);
    }
  }
  if (kept >= 2) out.csi_rate_hz = 1.0 / (out.t[1] - out.t[0]);
  return out;
}

CfrSeries average_cfr(const CfrSeries& series) {
  if (series.t.empty()) throw DimensionError("average_cfr: empty series");
  CfrSeries out;
  out.subcarriers = series.subcarriers;
  out.h_hat = Matrix<cplx>(series.subcarriers.size(), 1);
  out.power = Matrix<double>(series.subcarriers.size(), 1);
  const double inv = 1.0 / static_cast<double>(series.t.size());
  double t = 0.0;
  for (double v : series.t) t += v;
  out.t = {t * inv};
  for (std::size_t r = 0; r < series.subcarriers.size(); ++r) {
    cplx acc{};
    for (std::size_t c = 0; c < series.t.size(); ++c) acc += series.h_hat(r, c);
    out.h_hat(r, 0) = acc * inv;
    out.power(r, 0) = std::norm(out.h_hat(r, 0));
  }
  return out;
}

SymbolGrid pilot_phase_correct(const SymbolGrid& received, const SymbolGrid& reference,
                               std::span<const int> pilot_subcarriers) {
  if (pilot_subcarriers.empty()) throw DimensionError("pilot_phase_correct: no pilot subcarriers");
  if (reference.n_subcarriers() != received.n_subcarriers())
    throw DimensionError("pilot_phase_correct: grids differ in subcarrier count");
  const std::size_t n = received.n_subcarriers();
  SymbolGrid out = received;
  for (std::size_t m = 0; m < received.n_symbols(); ++m) {
    const std::size_t rc = known_column(reference, m, received.n_symbols());
    cplx acc{};
    for (int k : pilot_subcarriers) {
      const std::size_t b = SubcarrierMap::bin(k, n);
      acc += received.at(b, m) * std::conj(reference.at(b, rc));
    }
    if (acc == cplx{}) throw Error("pilot_phase_correct: all pilots zero in symbol " + std::to_string(m));
    const cplx derotate = std::conj(acc) / std::abs(acc);
    for (auto& v : out.symbol(m)) v *= derotate;
  }
  return out;
}

SymbolGrid equalize(const SymbolGrid& received, const CfrSeries& channel) {
  const std::size_t n = received.n_subcarriers();
  const std::size_t cols = channel.t.size();
  if (cols != 1 && cols != received.n_symbols())
    throw DimensionError("equalize: channel must have one column or one per symbol");
  SymbolGrid out = received;
  for (std::size_t m = 0; m < received.n_symbols(); ++m) {
    const std::size_t c = cols == 1 ? 0 : m;
    for (std::size_t r = 0; r < channel.subcarriers.size(); ++r) {
      const cplx h = channel.h_hat(r, c);
      if (h == cplx{})
        throw Error("equalize: zero channel estimate on subcarrier " + std::to_string(channel.subcarriers[r]));
      out.at(SubcarrierMap::bin(channel.subcarriers[r], n), m) /= h;
    }
  }
  return out;
}

std::vector<cplx> gather(const SymbolGrid& grid, std::span<const int> subcarriers) {
  std::vector<cplx> out;
  out.reserve(grid.n_symbols() * subcarriers.size());
  for (std::size_t m = 0; m < grid.n_symbols(); ++m)
    for (int k : subcarriers) out.push_back(grid.at(SubcarrierMap::bin(k, grid.n_subcarriers()), m));
  return out;
}

std::vector<std::uint8_t> demap_data(const SymbolGrid& equalized, std::span<const int> data_subcarriers, int order) {
  return qam_demap(gather(equalized, data_subcarriers), order);
}

std::vector<std::uint8_t> equalize_demap(const SymbolGrid& received, const CfrSeries& channel,
                                         std::span<const int> data_subcarriers, int order) {
  return demap_data(equalize(received, channel), data_subcarriers, order);
}

double ber(std::span<const std::uint8_t> bits, std::span<const std::uint8_t> ref_bits) {
  if (bits.size() != ref_bits.size()) throw DimensionError("ber: length mismatch");
  if (bits.empty()) return 0.0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) errors += (bits[i] & 1u) != (ref_bits[i] & 1u);
  return static_cast<double>(errors) / static_cast<double>(bits.size());
}

double evm(const SymbolGrid& equalized, const SymbolGrid& reference, std::span<const int> subcarriers) {
  if (equalized.n_symbols() != reference.n_symbols() || equalized.n_subcarriers() != reference.n_subcarriers())
    throw DimensionError("evm: grid shapes differ");
  double err = 0.0, ref = 0.0;
  const std::size_t n = equalized.n_subcarriers();
  for (std::size_t m = 0; m < equalized.n_symbols(); ++m)
    for (int k : subcarriers) {
      const std::size_t b = SubcarrierMap::bin(k, n);
      err += std::norm(equalized.at(b, m) - reference.at(b, m));
      ref += std::norm(reference.at(b, m));
    }
  if (ref == 0.0) throw Error("evm: reference has no energy");
  return std::sqrt(err / ref);
}

}  // namespace mdobf
