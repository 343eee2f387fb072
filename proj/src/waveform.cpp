#include "mdobf/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mdobf/fft.hpp"

namespace mdobf {
namespace {

int levels_per_axis(int order) { return order == 4 ? 2 : order == 16 ? 4 : 8; }

double qam_scale(int order) {
  const int l = levels_per_axis(order);
  // Mean energy of an L x L grid with levels +-1, +-3, ...: 2 (L^2 - 1) / 3.
  return 1.0 / std::sqrt(2.0 * (l * l - 1) / 3.0);
}

// Gray index -> amplitude level; index 0 is the most positive level.
double pam_level(unsigned gray_bits, int l) {
  unsigned i = gray_bits;
  for (unsigned shift = 1; shift < 32; shift <<= 1) i ^= i >> shift;  // Gray -> binary
  return static_cast<double>(l - 1 - 2 * static_cast<int>(i));
}

unsigned pam_decide(double x, int l) {
  // Nearest level index in 0..l-1, then binary -> Gray.
  double idx = std::round((static_cast<double>(l - 1) - x) / 2.0);
  idx = std::clamp(idx, 0.0, static_cast<double>(l - 1));
  const auto i = static_cast<unsigned>(idx);
  return i ^ (i >> 1);
}

void check_order(int order) {
  if (order != 4 && order != 16 && order != 64)
    throw ConfigError("unsupported QAM order " + std::to_string(order));
}

}  // namespace

SymbolGrid::SymbolGrid(std::size_t n_subcarriers, std::size_t n_symbols)
    : n_(n_subcarriers),
      m_(n_symbols),
      values_(n_subcarriers * n_symbols),
      kinds_(n_subcarriers * n_symbols, CellKind::kNull) {}

void SymbolGrid::append(const SymbolGrid& other) {
  if (m_ == 0 && n_ == 0) {
    *this = other;
    return;
  }
  if (other.n_ != n_) throw DimensionError("SymbolGrid::append: subcarrier count mismatch");
  values_.insert(values_.end(), other.values_.begin(), other.values_.end());
  kinds_.insert(kinds_.end(), other.kinds_.begin(), other.kinds_.end());
  m_ += other.m_;
}

SymbolGrid SymbolGrid::columns(std::size_t first, std::size_t count) const {
  if (first + count > m_) throw DimensionError("SymbolGrid::columns: range out of bounds");
  SymbolGrid out(n_, count);
  std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(first * n_), count * n_, out.values_.begin());
  std::copy_n(kinds_.begin() + static_cast<std::ptrdiff_t>(first * n_), count * n_, out.kinds_.begin());
  return out;
}

int bits_per_symbol(int order) {
  check_order(order);
  return order == 4 ? 2 : order == 16 ? 4 : 6;
}

std::vector<cplx> qam_map(std::span<const std::uint8_t> bits, int order) {
  const int bps = bits_per_symbol(order);
  if (bits.size() % static_cast<std::size_t>(bps) != 0)
    throw DimensionError("qam_map: bit count is not a multiple of log2(order)");
  const int half = bps / 2;
  const int l = levels_per_axis(order);
  const double scale = qam_scale(order);
  std::vector<cplx> out(bits.size() / static_cast<std::size_t>(bps));
  for (std::size_t s = 0; s < out.size(); ++s) {
    unsigned gi = 0, gq = 0;
    for (int b = 0; b < half; ++b) {
      gi = (gi << 1) | (bits[s * bps + b] & 1u);
      gq = (gq << 1) | (bits[s * bps + half + b] & 1u);
    }
    out[s] = scale * cplx(pam_level(gi, l), pam_level(gq, l));
  }
  return out;
}

std::vector<std::uint8_t> qam_demap(std::span<const cplx> symbols, int order) {
  const int bps = bits_per_symbol(order);
  const int half = bps / 2;
  const int l = levels_per_axis(order);
  const double scale = qam_scale(order);
  std::vector<std::uint8_t> bits(symbols.size() * static_cast<std::size_t>(bps));
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    const unsigned gi = pam_decide(symbols[s].real() / scale, l);
    const unsigned gq = pam_decide(symbols[s].imag() / scale, l);
    for (int b = 0; b < half; ++b) {
      bits[s * bps + b] = static_cast<std::uint8_t>((gi >> (half - 1 - b)) & 1u);
      bits[s * bps + half + b] = static_cast<std::uint8_t>((gq >> (half - 1 - b)) & 1u);
    }
  }
  return bits;
}

std::vector<cplx> known_symbol_column(const ScenarioConfig& cfg) {
  const DerivedParams d = derive_streams(cfg);
  std::mt19937_64 gen(kPreambleTableSeed);
  std::vector<std::uint8_t> bits(2 * d.subcarriers.used.size());
  for (auto& b : bits) b = static_cast<std::uint8_t>(gen() >> 63);
  const std::vector<cplx> qpsk = qam_map(bits, 4);
  std::vector<cplx> column(cfg.n_subcarriers, cplx{});
  for (std::size_t i = 0; i < d.subcarriers.used.size(); ++i)
    column[SubcarrierMap::bin(d.subcarriers.used[i], cfg.n_subcarriers)] = qpsk[i];
  return column;
}

SymbolGrid build_preamble_grid(const ScenarioConfig& cfg) {
  return known_symbol_stream(cfg, kPreambleSymbols).grid;
}

BasebandSignal ofdm_modulate(const SymbolGrid& grid, std::size_t cp_len, double sample_rate_hz, double t0) {
  const std::size_t n = grid.n_subcarriers();
  const std::size_t len = n + cp_len;
  const std::size_t n_sym = grid.n_symbols();
  BasebandSignal sig;
  sig.sample_rate_hz = sample_rate_hz;
  sig.t0 = t0;
  sig.samples.resize(n_sym * len);
  if (n_sym == 0) return sig;
  const Dft& dft = dft_of_size(n);

  #pragma omp parallel for schedule(static)
  for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(n_sym); ++m) {
    cplx* out = sig.samples.data() + static_cast<std::size_t>(m) * len;
    dft.inverse_unitary(grid.symbol(static_cast<std::size_t>(m)), {out + cp_len, n});
    std::copy(out + n, out + len, out);  // last cp_len samples become the prefix
  }
  return sig;
}

Frame known_symbol_stream(const ScenarioConfig& cfg, std::size_t n_symbols, double t0) {
  const std::vector<cplx> column = known_symbol_column(cfg);
  Frame f;
  f.grid = SymbolGrid(cfg.n_subcarriers, n_symbols);
  for (std::size_t m = 0; m < n_symbols; ++m)
    for (std::size_t b = 0; b < cfg.n_subcarriers; ++b) {
      f.grid.at(b, m) = column[b];
      f.grid.kind(b, m) = column[b] == cplx{} ? CellKind::kNull : CellKind::kPreamble;
    }
  f.signal = ofdm_modulate(f.grid, cfg.cp_len, static_cast<double>(cfg.n_subcarriers) * cfg.subcarrier_spacing_hz, t0);
  return f;
}

SymbolGrid data_grid(const ScenarioConfig& cfg, std::span<const std::uint8_t> bits) {
  const DerivedParams d = derive_streams(cfg);
  const std::size_t per_symbol = d.subcarriers.data.size() * static_cast<std::size_t>(bits_per_symbol(cfg.qam_order));
  if (bits.size() < per_symbol) throw DimensionError("payload shorter than one OFDM symbol");
  const std::size_t n_sym = (bits.size() + per_symbol - 1) / per_symbol;
  std::vector<std::uint8_t> padded(bits.begin(), bits.end());
  padded.resize(n_sym * per_symbol, 0);
  const std::vector<cplx> qam = qam_map(padded, cfg.qam_order);
  const std::vector<cplx> known = known_symbol_column(cfg);

  SymbolGrid g(cfg.n_subcarriers, n_sym);
  std::size_t q = 0;
  for (std::size_t m = 0; m < n_sym; ++m) {
    for (int k : d.subcarriers.data) {
      const std::size_t b = SubcarrierMap::bin(k, cfg.n_subcarriers);
      g.at(b, m) = qam[q++];
      g.kind(b, m) = CellKind::kData;
    }
    for (int k : d.subcarriers.pilot) {
      const std::size_t b = SubcarrierMap::bin(k, cfg.n_subcarriers);
      g.at(b, m) = known[b];
      g.kind(b, m) = CellKind::kPilot;
    }
  }
  return g;
}

Frame frame_stream(const ScenarioConfig& cfg, std::span<const std::uint8_t> bits, double t0) {
  Frame f;
  f.grid = build_preamble_grid(cfg);
  const SymbolGrid data = data_grid(cfg, bits);
  f.grid.append(data);
  const DerivedParams d = derive_streams(cfg);
  const std::size_t per_symbol = d.subcarriers.data.size() * static_cast<std::size_t>(bits_per_symbol(cfg.qam_order));
  f.n_padding_bits = data.n_symbols() * per_symbol - bits.size();
  f.signal = ofdm_modulate(f.grid, cfg.cp_len, d.sample_rate_hz, t0);
  return f;
}

}  // namespace mdobf
