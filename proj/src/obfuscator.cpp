#include "mdobf/obfuscator.hpp"

#include <cmath>

namespace mdobf {

cplx smear_phasor(double t, const SmearParams& p) {
  if (p.delta_f_hz == 0.0) return {1.0, 0.0};
  return std::polar(1.0, p.delta_f_hz / p.f_m_hz * std::sin(kTwoPi * p.f_m_hz * t));
}

void apply_smearing_inplace(BasebandSignal& sig, const SmearParams& p) {
  if (!(p.f_m_hz > 0.0) || p.delta_f_hz < 0.0) throw ConfigError("smearing: need f_m > 0 and delta_f >= 0");
  if (sig.sample_rate_hz < 10.0 * (p.delta_f_hz + p.f_m_hz))
    throw ConfigError("smearing: sample rate below 10 * (delta_f + f_m)");
  if (p.delta_f_hz == 0.0) return;
  const auto n = static_cast<std::ptrdiff_t>(sig.samples.size());

  #pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    sig.samples[static_cast<std::size_t>(i)] *= smear_phasor(sig.time_of(static_cast<std::size_t>(i)), p);
}

BasebandSignal apply_smearing(const BasebandSignal& sig, const SmearParams& p) {
  BasebandSignal out = sig;
  apply_smearing_inplace(out, p);
  return out;
}

cplx spoof_phasor(int k, double t, double subcarrier_spacing_hz, const SpoofParams& p) {
  if (k == 0 || p.v_sp_mps == 0.0) return {1.0, 0.0};
  return std::polar(1.0, kTwoPi * k * subcarrier_spacing_hz * (p.v_sp_mps / kSpeedOfLight) * t);
}

SymbolGrid apply_spoofing(const SymbolGrid& grid, std::span<const double> symbol_times,
                          double subcarrier_spacing_hz, const SpoofParams& p) {
  if (symbol_times.size() != grid.n_symbols())
    throw DimensionError("apply_spoofing: one time per symbol column required");
  SymbolGrid out = grid;
  const std::size_t n = grid.n_subcarriers();
  const auto n_sym = static_cast<std::ptrdiff_t>(grid.n_symbols());

  #pragma omp parallel for schedule(static)
  for (std::ptrdiff_t m = 0; m < n_sym; ++m) {
    const auto col = static_cast<std::size_t>(m);
    for (std::size_t b = 0; b < n; ++b)
      out.at(b, col) *= spoof_phasor(SubcarrierMap::signed_index(b, n), symbol_times[col], subcarrier_spacing_hz, p);
  }
  return out;
}

std::vector<double> symbol_midpoints(std::size_t n_symbols, std::size_t samples_per_symbol, double sample_rate_hz,
                                     double t0) {
  std::vector<double> t(n_symbols);
  const double len = static_cast<double>(samples_per_symbol);
  for (std::size_t m = 0; m < n_symbols; ++m) t[m] = t0 + (static_cast<double>(m) * len + 0.5 * len) / sample_rate_hz;
  return t;
}

}  // namespace mdobf
