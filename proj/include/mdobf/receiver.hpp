#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mdobf/scenario.hpp"
#include "mdobf/waveform.hpp"

namespace mdobf {

// Per-subcarrier channel estimates over time. Row r belongs to signed
// subcarrier `subcarriers[r]`, column c to time t[c].
struct CfrSeries {
  std::vector<int> subcarriers;
  Matrix<cplx> h_hat;
  Matrix<double> power;  // |h_hat|^2
  std::vector<double> t;
  double csi_rate_hz = 0.0;

  std::size_t n_times() const { return t.size(); }
  // Appends the columns of `other` (same subcarrier rows).
  void append(const CfrSeries& other);
};

// Strips the prefix and applies the 1/sqrt(N) forward DFT per symbol.
SymbolGrid ofdm_demodulate(const BasebandSignal& sig, std::size_t n_subcarriers, std::size_t cp_len);
SymbolGrid ofdm_demodulate(const BasebandSignal& sig, const ScenarioConfig& cfg);

// H[k, m] = conj(X[k]) Y[k, m] / |X[k]|^2 on the listed subcarriers, keeping
// symbols 0, M, 2M, ... `known` holds either one column (reused for every
// symbol) or one column per symbol of `received`.
CfrSeries estimate_cfr(const SymbolGrid& received, const SymbolGrid& known, std::span<const int> subcarriers,
                       std::span<const double> symbol_times, std::size_t decimation = 1);

// Mean of the columns of a CFR series, one column at the mean time.
CfrSeries average_cfr(const CfrSeries& series);

// Removes the common phase of each symbol, estimated as
// arg(sum_p Y[p] conj(R[p])) over the pilot subcarriers. `reference`
// follows the same one-or-all column rule as estimate_cfr.
SymbolGrid pilot_phase_correct(const SymbolGrid& received, const SymbolGrid& reference,
                               std::span<const int> pilot_subcarriers);

// Zero-forcing Y / H on every subcarrier listed in `channel`. A channel with
// one column applies to every symbol.
SymbolGrid equalize(const SymbolGrid& received, const CfrSeries& channel);

// Data cells in symbol order, ascending subcarrier within each symbol.
std::vector<cplx> gather(const SymbolGrid& grid, std::span<const int> subcarriers);

std::vector<std::uint8_t> demap_data(const SymbolGrid& equalized, std::span<const int> data_subcarriers, int order);

std::vector<std::uint8_t> equalize_demap(const SymbolGrid& received, const CfrSeries& channel,
                                         std::span<const int> data_subcarriers, int order);

// Hamming distance / length.
double ber(std::span<const std::uint8_t> bits, std::span<const std::uint8_t> ref_bits);

// RMS error vector over RMS reference on the listed subcarriers.
double evm(const SymbolGrid& equalized, const SymbolGrid& reference, std::span<const int> subcarriers);

}  // namespace mdobf
