#pragma once

#include <span>

#include "mdobf/scenario.hpp"
#include "mdobf/waveform.hpp"

namespace mdobf {

// Time-domain FM smearing waveform exp(j (df/fm) sin(2 pi fm t)).
cplx smear_phasor(double t, const SmearParams& p);

// Multiplies every sample (prefix and preamble included) by the smearing
// phasor at its absolute time, so the FM phase runs continuously across
// calls on consecutive chunks. Throws if the sample rate is below
// 10 * (df + fm).
BasebandSignal apply_smearing(const BasebandSignal& sig, const SmearParams& p);
void apply_smearing_inplace(BasebandSignal& sig, const SmearParams& p);

// Per-subcarrier spoofing phasor exp(j 2 pi k df (v_sp / c) t) for signed
// subcarrier index k.
cplx spoof_phasor(int k, double t, double subcarrier_spacing_hz, const SpoofParams& p);

// out[k, m] = grid[k, m] * spoof_phasor(k, symbol_times[m]); the phasor is
// held over the whole symbol, evaluated at the time given for its column.
SymbolGrid apply_spoofing(const SymbolGrid& grid, std::span<const double> symbol_times,
                          double subcarrier_spacing_hz, const SpoofParams& p);

// Midpoint time of every symbol of a grid transmitted from t0.
std::vector<double> symbol_midpoints(std::size_t n_symbols, std::size_t samples_per_symbol,
                                     double sample_rate_hz, double t0 = 0.0);

}  // namespace mdobf
