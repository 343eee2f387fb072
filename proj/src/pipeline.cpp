#include "mdobf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "mdobf/fft.hpp"
#include "mdobf/obfuscator.hpp"
#include "mdobf/rng.hpp"
#include "mdobf/waveform.hpp"

namespace mdobf {
namespace {

struct ChunkOutput {
  std::vector<std::pair<std::size_t, cplx>> method1;  // (block, partial sum)
  std::vector<std::size_t> csi_symbols;
  std::vector<std::vector<cplx>> csi_columns;  // full N-bin spectra
};

// Symbols on each side of an exact-mode chunk so the interpolator sees real
// neighbours instead of zeros at the chunk edges.
std::size_t exact_guard_symbols(const ChannelRealization& chan, const PropagationOptions& prop, double fs,
                                std::size_t len) {
  const double reach = static_cast<double>(prop.interp_half_width) + chan.max_relative_delay_s() * fs + 1.0;
  return static_cast<std::size_t>(std::ceil(reach / static_cast<double>(len)));
}

// Exceptions must not leave an OpenMP region; keep the first and rethrow.
class ErrorTrap {
 public:
  template <class F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
      #pragma omp critical(mdobf_error_trap)
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

}  // namespace

SimulationResult simulate(const ScenarioConfig& cfg, const PipelineOptions& opt) {
  SimulationResult res;
  res.derived = derive_streams(cfg);
  res.channel = build_channel(cfg);
  const DerivedParams& d = res.derived;
  const ChannelRealization& chan = res.channel;
  const std::size_t n = cfg.n_subcarriers;
  const std::size_t len = d.samples_per_symbol;
  const double fs = d.sample_rate_hz;

  const std::size_t block = static_cast<std::size_t>(std::llround(fs / cfg.method1_rate_hz));
  const std::size_t chunk_syms = std::max<std::size_t>(1, (block + len / 2) / len);
  const std::size_t n_sym = d.n_symbols;
  const std::size_t n_chunks = (n_sym + chunk_syms - 1) / chunk_syms;
  const std::size_t n_blocks = n_sym * len / block;
  const std::size_t m_csi = d.csi_decimation;

  const PropagationOptions prop{cfg.channel_mode, n, cfg.cp_len, 32};
  const std::size_t guard = cfg.channel_mode == ChannelMode::kExact ? exact_guard_symbols(chan, prop, fs, len) : 0;

  const std::vector<cplx> known = known_symbol_column(cfg);
  SymbolGrid known_col(n, 1);
  for (std::size_t b = 0; b < n; ++b) {
    known_col.at(b, 0) = known[b];
    known_col.kind(b, 0) = known[b] == cplx{} ? CellKind::kNull : CellKind::kPreamble;
  }
  // One clean symbol in the time domain; the reference stream repeats it.
  const BasebandSignal clean_symbol = ofdm_modulate(known_col, cfg.cp_len, fs);

  const auto* smear = std::get_if<SmearParams>(&cfg.obfuscation);
  const auto* spoof = std::get_if<SpoofParams>(&cfg.obfuscation);
  const bool want_csi = opt.method2;

  std::vector<ChunkOutput> chunks(n_chunks);
  if (opt.keep_rx) res.rx = BasebandSignal{std::vector<cplx>(n_sym * len), fs, 0.0};
  const Dft& dft = dft_of_size(n);

  ErrorTrap trap;
  #pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(n_chunks); ++ci) trap.run([&] {
    const std::size_t c = static_cast<std::size_t>(ci);
    const std::size_t s0 = c * chunk_syms;
    const std::size_t s1 = std::min(n_sym, s0 + chunk_syms);
    const std::size_t g0 = s0 >= guard ? s0 - guard : 0;
    const std::size_t g1 = std::min(n_sym, s1 + guard);
    const std::size_t count = g1 - g0;
    const double t0 = static_cast<double>(g0 * len) / fs;

    SymbolGrid grid(n, count);
    for (std::size_t m = 0; m < count; ++m)
      for (std::size_t b = 0; b < n; ++b) {
        grid.at(b, m) = known[b];
        grid.kind(b, m) = known_col.kind(b, 0);
      }
    if (spoof) grid = apply_spoofing(grid, symbol_midpoints(count, len, fs, t0), cfg.subcarrier_spacing_hz, *spoof);
    BasebandSignal tx = ofdm_modulate(grid, cfg.cp_len, fs, t0);
    if (smear) apply_smearing_inplace(tx, *smear);
    BasebandSignal rx = propagate(tx, chan, prop);

    const std::size_t skip = (s0 - g0) * len;
    std::span<cplx> own(rx.samples.data() + skip, (s1 - s0) * len);
    for (std::size_t m = s0; m < s1; ++m) {
      if (!(chan.noise_power > 0.0)) break;
      auto rng = make_rng(cfg.seed, Stream::kNoise, m);
      add_noise_inplace(own.subspan((m - s0) * len, len), chan.noise_power, rng);
    }
    if (opt.keep_rx) std::copy(own.begin(), own.end(), res.rx.samples.begin() + static_cast<std::ptrdiff_t>(s0 * len));

    ChunkOutput& out = chunks[c];
    if (opt.method1) {
      const std::size_t first = s0 * len;
      std::size_t i = 0;
      while (i < own.size()) {
        const std::size_t blk = (first + i) / block;
        const std::size_t stop = std::min(own.size(), (blk + 1) * block - first);
        cplx acc{};
        for (; i < stop; ++i) acc += own[i] * std::conj(clean_symbol.samples[i % len]);
        if (blk < n_blocks) out.method1.emplace_back(blk, acc);
      }
    }
    if (want_csi) {
      for (std::size_t m = s0; m < s1; ++m) {
        if (m % m_csi != 0) continue;
        std::vector<cplx> spec(n);
        dft.forward_unitary(own.subspan((m - s0) * len + cfg.cp_len, n), spec);
        out.csi_symbols.push_back(m);
        out.csi_columns.push_back(std::move(spec));
      }
    }
  });
  trap.rethrow();

  if (opt.method1) {
    res.method1_rate_hz = fs / static_cast<double>(block);
    res.method1_t0 = 0.5 * static_cast<double>(block - 1) / fs;
    res.method1_series.assign(n_blocks, cplx{});
    for (const auto& ch : chunks)
      for (const auto& [blk, sum] : ch.method1) res.method1_series[blk] += sum;
    for (auto& v : res.method1_series) v /= static_cast<double>(block);
    res.method1 = stft(res.method1_series, res.method1_rate_hz, stft_settings(cfg.stft, res.method1_rate_hz),
                       res.method1_t0);
  }

  if (want_csi) {
    std::size_t total = 0;
    for (const auto& ch : chunks) total += ch.csi_symbols.size();
    SymbolGrid y(n, total);
    std::vector<double> times;
    times.reserve(total);
    std::size_t col = 0;
    const double t_sym = d.symbol_duration_s;
    for (const auto& ch : chunks)
      for (std::size_t i = 0; i < ch.csi_symbols.size(); ++i, ++col) {
        std::copy(ch.csi_columns[i].begin(), ch.csi_columns[i].end(), y.symbol(col).begin());
        times.push_back((static_cast<double>(ch.csi_symbols[i]) + 0.5) * t_sym);
      }
    res.cfr = estimate_cfr(y, known_col, d.subcarriers.used, times, 1);
    res.cfr.csi_rate_hz = d.csi_rate_hz;
    const std::vector<int>& sel = opt.method2_selection.empty() ? d.subcarriers.used : opt.method2_selection;
    res.method2 = method2_view(res.cfr, sel, cfg.stft);
  }

  if (opt.link) res.link = simulate_link(cfg, chan);
  return res;
}

LinkResult simulate_link(const ScenarioConfig& cfg, const ChannelRealization& chan) {
  const DerivedParams d = derive_streams(cfg);
  const std::size_t n = cfg.n_subcarriers;
  const std::size_t len = d.samples_per_symbol;
  const double fs = d.sample_rate_hz;
  const auto bps = static_cast<std::size_t>(bits_per_symbol(cfg.qam_order));
  const std::size_t per_symbol = d.subcarriers.data.size() * bps;
  const std::size_t bits_per_frame = cfg.link.frame_data_symbols * per_symbol;
  if (bits_per_frame == 0) throw ConfigError("link: frame carries no data bits");
  const std::size_t n_bits = cfg.link.n_bits;
  const std::size_t n_frames = (n_bits + bits_per_frame - 1) / bits_per_frame;
  const std::size_t frame_syms = kPreambleSymbols + cfg.link.frame_data_symbols;
  const double frame_s = static_cast<double>(frame_syms * len) / fs;
  if (static_cast<double>(n_frames) * frame_s > cfg.duration_s * (1.0 + 1e-12))
    throw ConfigError("link: payload does not fit in the scenario duration");

  std::vector<std::uint8_t> bits(n_bits);
  {
    auto rng = make_rng(cfg.seed, Stream::kBits);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
  }

  const auto* smear = std::get_if<SmearParams>(&cfg.obfuscation);
  const auto* spoof = std::get_if<SpoofParams>(&cfg.obfuscation);
  const PropagationOptions prop{cfg.channel_mode, n, cfg.cp_len, 32};
  const auto& data_sc = d.subcarriers.data;

  std::vector<std::size_t> errors(n_frames, 0);
  std::vector<double> err_energy(n_frames, 0.0), ref_energy(n_frames, 0.0);

  ErrorTrap trap;
  #pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t fi = 0; fi < static_cast<std::ptrdiff_t>(n_frames); ++fi) trap.run([&] {
    const std::size_t f = static_cast<std::size_t>(fi);
    const std::size_t first = f * bits_per_frame;
    const std::size_t count = std::min(bits_per_frame, n_bits - first);
    std::vector<std::uint8_t> payload(bits.begin() + static_cast<std::ptrdiff_t>(first),
                                      bits.begin() + static_cast<std::ptrdiff_t>(first + count));
    if (payload.size() < per_symbol) payload.resize(per_symbol, 0);
    const double t0 = static_cast<double>(f) * frame_s;

    Frame frame = frame_stream(cfg, payload, t0);
    BasebandSignal tx = frame.signal;
    if (spoof) {
      const SymbolGrid g = apply_spoofing(frame.grid, symbol_midpoints(frame.grid.n_symbols(), len, fs, t0),
                                          cfg.subcarrier_spacing_hz, *spoof);
      tx = ofdm_modulate(g, cfg.cp_len, fs, t0);
    }
    if (smear) apply_smearing_inplace(tx, *smear);
    BasebandSignal rx = propagate(tx, chan, prop);
    if (chan.noise_power > 0.0) {
      auto rng = make_rng(cfg.seed, Stream::kLinkNoise, f);
      add_noise_inplace(rx.samples, chan.noise_power, rng);
    }

    const SymbolGrid y = ofdm_demodulate(rx, cfg);
    const SymbolGrid pre = y.columns(0, kPreambleSymbols);
    const SymbolGrid pre_ref = frame.grid.columns(0, kPreambleSymbols);
    const std::vector<double> pre_t(kPreambleSymbols, t0);
    const CfrSeries h = average_cfr(estimate_cfr(pre, pre_ref, d.subcarriers.used, pre_t, 1));

    const std::size_t n_data = frame.grid.n_symbols() - kPreambleSymbols;
    const SymbolGrid y_data = y.columns(kPreambleSymbols, n_data);
    const SymbolGrid x_data = frame.grid.columns(kPreambleSymbols, n_data);
    const SymbolGrid z = pilot_phase_correct(equalize(y_data, h), x_data, d.subcarriers.pilot);
    const std::vector<std::uint8_t> got = demap_data(z, data_sc, cfg.qam_order);
    for (std::size_t i = 0; i < count; ++i) errors[f] += got[i] != payload[i];

    for (std::size_t m = 0; m < n_data; ++m)
      for (int k : data_sc) {
        const std::size_t b = SubcarrierMap::bin(k, n);
        err_energy[f] += std::norm(z.at(b, m) - x_data.at(b, m));
        ref_energy[f] += std::norm(x_data.at(b, m));
      }
  });
  trap.rethrow();

  LinkResult r;
  r.n_bits = n_bits;
  r.n_frames = n_frames;
  double e = 0.0, s = 0.0;
  for (std::size_t f = 0; f < n_frames; ++f) {
    r.bit_errors += errors[f];
    e += err_energy[f];
    s += ref_energy[f];
  }
  r.ber = n_bits ? static_cast<double>(r.bit_errors) / static_cast<double>(n_bits) : 0.0;
  r.evm = s > 0.0 ? std::sqrt(e / s) : 0.0;
  return r;
}

}  // namespace mdobf
