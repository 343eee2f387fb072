#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mdobf/scenario.hpp"
#include "mdobf/types.hpp"

namespace mdobf {

enum class CellKind : std::uint8_t { kNull, kData, kPilot, kPreamble };

inline constexpr std::size_t kPreambleSymbols = 7;

// Frequency-domain frame. Column m is OFDM symbol m, stored contiguously in
// DFT-bin order (bin b <-> signed subcarrier b or b - N).
class SymbolGrid {
 public:
  SymbolGrid() = default;
  SymbolGrid(std::size_t n_subcarriers, std::size_t n_symbols);

  std::size_t n_subcarriers() const { return n_; }
  std::size_t n_symbols() const { return m_; }

  cplx& at(std::size_t bin, std::size_t sym) { return values_[sym * n_ + bin]; }
  const cplx& at(std::size_t bin, std::size_t sym) const { return values_[sym * n_ + bin]; }
  CellKind& kind(std::size_t bin, std::size_t sym) { return kinds_[sym * n_ + bin]; }
  CellKind kind(std::size_t bin, std::size_t sym) const { return kinds_[sym * n_ + bin]; }

  std::span<cplx> symbol(std::size_t sym) { return {values_.data() + sym * n_, n_}; }
  std::span<const cplx> symbol(std::size_t sym) const { return {values_.data() + sym * n_, n_}; }

  // Appends the columns of `other` (same subcarrier count).
  void append(const SymbolGrid& other);
  SymbolGrid columns(std::size_t first, std::size_t count) const;

  bool operator==(const SymbolGrid&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<cplx> values_;
  std::vector<CellKind> kinds_;
};

struct BasebandSignal {
  std::vector<cplx> samples;
  double sample_rate_hz = 0.0;
  double t0 = 0.0;

  double time_of(std::size_t n) const { return t0 + static_cast<double>(n) / sample_rate_hz; }
};

int bits_per_symbol(int order);

// Gray-coded square QAM with unit mean energy. The first half of each
// symbol's bits selects the in-phase level, the second half quadrature;
// a 0 in the leading bit maps to the positive half-plane.
std::vector<cplx> qam_map(std::span<const std::uint8_t> bits, int order);

// Minimum-distance decision followed by Gray decoding; inverse of qam_map.
std::vector<std::uint8_t> qam_demap(std::span<const cplx> symbols, int order);

// The known-symbol table: one QPSK value per used subcarrier drawn from
// mt19937_64 seeded with kPreambleTableSeed (two bits per subcarrier in
// ascending signed-index order, mapped with qam_map(., 4)).
inline constexpr std::uint64_t kPreambleTableSeed = 0x0FD3A11CE5EEDULL;
std::vector<cplx> known_symbol_column(const ScenarioConfig& cfg);

SymbolGrid build_preamble_grid(const ScenarioConfig& cfg);

// IDFT with 1/sqrt(N) scaling, cyclic prefix of cp_len samples per symbol.
BasebandSignal ofdm_modulate(const SymbolGrid& grid, std::size_t cp_len, double sample_rate_hz,
                             double t0 = 0.0);

struct Frame {
  SymbolGrid grid;
  BasebandSignal signal;
  std::size_t n_padding_bits = 0;  // zero bits appended to fill the last symbol
};

// Known-symbol mode: `n_symbols` copies of the preamble column, so every
// symbol is usable for channel estimation.
Frame known_symbol_stream(const ScenarioConfig& cfg, std::size_t n_symbols, double t0 = 0.0);

// Payload mode: 7 preamble symbols, then data symbols carrying `bits`
// (zero-padded to whole symbols) with pilots from the known table.
Frame frame_stream(const ScenarioConfig& cfg, std::span<const std::uint8_t> bits, double t0 = 0.0);

// Data symbols only (no preamble), used to assemble long payload bursts.
SymbolGrid data_grid(const ScenarioConfig& cfg, std::span<const std::uint8_t> bits);

}  // namespace mdobf
