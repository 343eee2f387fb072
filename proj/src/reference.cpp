#include "mdobf/reference.hpp"

#include <cmath>

namespace mdobf::reference {
namespace {

constexpr double kKaiserBeta = 8.0;

double windowed_sinc(double d, double h) {
  if (std::abs(d) >= h) return 0.0;
  const double r = d / h;
  const double win = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / std::cyl_bessel_i(0.0, kKaiserBeta);
  return (d == 0.0 ? 1.0 : std::sin(kPi * d) / (kPi * d)) * win;
}

}  // namespace

std::vector<cplx> dft(std::span<const cplx> x, bool inverse) {
  const std::size_t n = x.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc{};
    for (std::size_t i = 0; i < n; ++i)
      acc += x[i] * std::polar(1.0, sign * kTwoPi * static_cast<double>((k * i) % n) / static_cast<double>(n));
    out[k] = acc;
  }
  return out;
}

BasebandSignal ofdm_modulate(const SymbolGrid& grid, std::size_t cp_len, double sample_rate_hz, double t0) {
  const std::size_t n = grid.n_subcarriers();
  const std::size_t len = n + cp_len;
  BasebandSignal out{std::vector<cplx>(grid.n_symbols() * len), sample_rate_hz, t0};
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t m = 0; m < grid.n_symbols(); ++m) {
    const std::vector<cplx> td = dft(grid.symbol(m), true);
    for (std::size_t i = 0; i < n; ++i) out.samples[m * len + cp_len + i] = td[i] * scale;
    for (std::size_t i = 0; i < cp_len; ++i) out.samples[m * len + i] = td[n - cp_len + i] * scale;
  }
  return out;
}

SymbolGrid ofdm_demodulate(const BasebandSignal& sig, std::size_t n_subcarriers, std::size_t cp_len) {
  const std::size_t len = n_subcarriers + cp_len;
  if (sig.samples.size() % len != 0) throw DimensionError("reference demodulate: partial symbol");
  SymbolGrid grid(n_subcarriers, sig.samples.size() / len);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_subcarriers));
  for (std::size_t m = 0; m < grid.n_symbols(); ++m) {
    const std::vector<cplx> fd = dft({sig.samples.data() + m * len + cp_len, n_subcarriers});
    for (std::size_t b = 0; b < n_subcarriers; ++b) grid.at(b, m) = fd[b] * scale;
  }
  return grid;
}

Spectrogram stft(std::span<const cplx> series, double rate_hz, const StftSettings& s, double t0) {
  if (series.size() < s.window_len || s.window_len == 0 || s.hop == 0 || s.window_len > s.n_fft)
    throw DimensionError("reference stft: bad settings");
  const std::size_t frames = 1 + (series.size() - s.window_len) / s.hop;
  const std::size_t nf = s.n_fft;
  Spectrogram out;
  out.rate_hz = rate_hz;
  out.settings = s;
  out.power = Matrix<double>(nf, frames);
  for (std::size_t i = 0; i < nf; ++i)
    out.freq_hz.push_back((static_cast<double>(i) - static_cast<double>(nf / 2)) * rate_hz / static_cast<double>(nf));
  const std::vector<double> w = make_window(s.window, s.window_len);
  for (std::size_t j = 0; j < frames; ++j) {
    out.time_s.push_back(t0 + (static_cast<double>(j * s.hop) + 0.5 * static_cast<double>(s.window_len)) / rate_hz);
    std::vector<cplx> buf(nf);
    for (std::size_t n = 0; n < s.window_len; ++n) buf[n] = w[n] * series[j * s.hop + n];
    const std::vector<cplx> spec = dft(buf);
    for (std::size_t i = 0; i < nf; ++i)
      out.power(i, j) = std::norm(spec[(i + nf - nf / 2) % nf]) / static_cast<double>(nf);
  }
  return out;
}

std::vector<cplx> reference_product_decimate(std::span<const cplx> rx, std::span<const cplx> ref, std::size_t factor) {
  if (rx.size() != ref.size() || factor == 0) throw DimensionError("reference product: bad arguments");
  std::vector<cplx> out(rx.size() / factor);
  for (std::size_t j = 0; j < out.size(); ++j) {
    cplx acc{};
    for (std::size_t n = 0; n < factor; ++n) acc += rx[j * factor + n] * std::conj(ref[j * factor + n]);
    out[j] = acc / static_cast<double>(factor);
  }
  return out;
}

BasebandSignal propagate_fast(const BasebandSignal& sig, const ChannelRealization& chan, std::size_t n_subcarriers,
                              std::size_t cp_len) {
  const std::size_t n = n_subcarriers;
  const std::size_t len = n + cp_len;
  if (sig.samples.size() % len != 0) throw DimensionError("reference propagate: partial symbol");
  BasebandSignal out{std::vector<cplx>(sig.samples.size()), sig.sample_rate_hz, sig.t0};
  const double df = sig.sample_rate_hz / static_cast<double>(n);
  for (std::size_t m = 0; m < sig.samples.size() / len; ++m) {
    const std::size_t base = m * len;
    const double t_mid = sig.time_of(base) + 0.5 * static_cast<double>(len) / sig.sample_rate_hz;
    std::vector<cplx> spec = dft({sig.samples.data() + base + cp_len, n});
    for (std::size_t b = 0; b < n; ++b) {
      const double f = static_cast<double>(SubcarrierMap::signed_index(b, n)) * df;
      spec[b] *= cfr(chan, f, t_mid) / static_cast<double>(n);
    }
    const std::vector<cplx> td = dft(spec, true);
    for (std::size_t i = 0; i < n; ++i) out.samples[base + cp_len + i] = td[i];
    for (std::size_t i = 0; i < cp_len; ++i) out.samples[base + i] = td[n - cp_len + i];
  }
  return out;
}

BasebandSignal propagate_exact(const BasebandSignal& sig, const ChannelRealization& chan, std::size_t half_width) {
  BasebandSignal out{std::vector<cplx>(sig.samples.size()), sig.sample_rate_hz, sig.t0};
  const double h = static_cast<double>(half_width);
  const auto len = static_cast<std::ptrdiff_t>(sig.samples.size());
  for (std::ptrdiff_t i = 0; i < len; ++i) {
    const double t = sig.time_of(static_cast<std::size_t>(i));
    cplx acc{};
    for (const auto& track : chan.tracks) {
      const double tau = path_delay(track, t);
      const double u = static_cast<double>(i) - (tau - chan.sync_delay_s) * sig.sample_rate_hz;
      const auto lo = static_cast<std::ptrdiff_t>(std::floor(u)) - static_cast<std::ptrdiff_t>(half_width) + 1;
      cplx x{};
      for (std::ptrdiff_t j = lo; j < lo + 2 * static_cast<std::ptrdiff_t>(half_width); ++j) {
        if (j < 0 || j >= len) continue;
        x += sig.samples[static_cast<std::size_t>(j)] * windowed_sinc(u - static_cast<double>(j), h);
      }
      acc += track.reflectivity * std::polar(1.0, -kTwoPi * chan.carrier_hz * tau) * x;
    }
    out.samples[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

}  // namespace mdobf::reference
