#include "mdobf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mdobf/fft.hpp"

namespace mdobf {
namespace {

std::size_t next_pow2(std::size_t v) {
  std::size_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

void check_settings(std::size_t len, const StftSettings& s) {
  if (s.window_len == 0 || s.hop == 0 || s.n_fft == 0) throw DimensionError("stft: zero-sized window, hop or FFT");
  if (s.window_len > s.n_fft) throw DimensionError("stft: window longer than n_fft");
  if (len < s.window_len) throw DimensionError("stft: series shorter than one window");
}

Spectrogram stft_impl(std::span<const cplx> series, double rate_hz, const StftSettings& s, double t0) {
  check_settings(series.size(), s);
  const std::size_t frames = 1 + (series.size() - s.window_len) / s.hop;
  const std::size_t nf = s.n_fft;
  Spectrogram out;
  out.rate_hz = rate_hz;
  out.settings = s;
  out.power = Matrix<double>(nf, frames);
  out.freq_hz.resize(nf);
  out.time_s.resize(frames);
  for (std::size_t i = 0; i < nf; ++i)
    out.freq_hz[i] = (static_cast<double>(i) - static_cast<double>(nf / 2)) * rate_hz / static_cast<double>(nf);
  for (std::size_t j = 0; j < frames; ++j)
    out.time_s[j] = t0 + (static_cast<double>(j * s.hop) + 0.5 * static_cast<double>(s.window_len)) / rate_hz;

  const std::vector<double> w = make_window(s.window, s.window_len);
  const Dft& dft = dft_of_size(nf);
  const double scale = 1.0 / static_cast<double>(nf);

  #pragma omp parallel
  {
    std::vector<cplx> buf(nf), spec(nf);
    #pragma omp for schedule(static)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(frames); ++j) {
      const std::size_t start = static_cast<std::size_t>(j) * s.hop;
      std::fill(buf.begin(), buf.end(), cplx{});
      for (std::size_t n = 0; n < s.window_len; ++n) buf[n] = w[n] * series[start + n];
      dft.forward(buf, spec);
      for (std::size_t i = 0; i < nf; ++i) {
        const std::size_t bin = (i + nf - nf / 2) % nf;
        out.power(i, static_cast<std::size_t>(j)) = std::norm(spec[bin]) * scale;
      }
    }
  }
  return out;
}

void check_same_shape(const Spectrogram& a, const Spectrogram& b) {
  if (a.power.rows() != b.power.rows() || a.power.cols() != b.power.cols())
    throw DimensionError("spectrograms differ in shape");
}

}  // namespace

StftSettings stft_settings(const StftParams& p, double rate_hz) {
  StftSettings s;
  s.window_len = static_cast<std::size_t>(std::llround(p.window_s * rate_hz));
  s.hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(p.hop_s * rate_hz)));
  s.n_fft = p.n_fft ? p.n_fft : next_pow2(4 * std::max<std::size_t>(1, s.window_len));
  s.window = p.window;
  return s;
}

std::vector<double> make_window(WindowKind kind, std::size_t len) {
  std::vector<double> w(len, 1.0);
  const double l = static_cast<double>(len);
  for (std::size_t n = 0; n < len; ++n) {
    const double c = std::cos(kTwoPi * static_cast<double>(n) / l);
    if (kind == WindowKind::kHann) w[n] = 0.5 - 0.5 * c;
    if (kind == WindowKind::kHamming) w[n] = 0.54 - 0.46 * c;
  }
  return w;
}

Spectrogram stft(std::span<const cplx> series, double rate_hz, const StftSettings& s, double t0) {
  return stft_impl(series, rate_hz, s, t0);
}

Spectrogram stft(std::span<const double> series, double rate_hz, const StftSettings& s, double t0) {
  std::vector<cplx> c(series.begin(), series.end());
  return stft_impl(c, rate_hz, s, t0);
}

std::vector<cplx> reference_product_decimate(std::span<const cplx> rx, std::span<const cplx> ref, std::size_t factor) {
  if (rx.size() != ref.size()) throw DimensionError("reference product: length mismatch");
  if (factor == 0) throw DimensionError("reference product: zero decimation factor");
  const std::size_t out_len = rx.size() / factor;
  std::vector<cplx> out(out_len);
  const double inv = 1.0 / static_cast<double>(factor);

  #pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(out_len); ++j) {
    const std::size_t base = static_cast<std::size_t>(j) * factor;
    cplx acc{};
    for (std::size_t n = 0; n < factor; ++n) acc += rx[base + n] * std::conj(ref[base + n]);
    out[static_cast<std::size_t>(j)] = acc * inv;
  }
  return out;
}

Spectrogram method1_view(const BasebandSignal& rx, const BasebandSignal& ref_tx, double decimate_to_hz,
                         const StftParams& params) {
  if (rx.sample_rate_hz != ref_tx.sample_rate_hz) throw DimensionError("method1_view: sample rates differ");
  if (rx.samples.size() != ref_tx.samples.size()) throw DimensionError("method1_view: lengths differ");
  const double ratio = rx.sample_rate_hz / decimate_to_hz;
  const auto factor = static_cast<std::size_t>(std::llround(ratio));
  if (factor == 0 || std::abs(ratio - static_cast<double>(factor)) > 1e-9 * ratio)
    throw DimensionError("method1_view: sample rate is not an integer multiple of the decimated rate");
  const std::vector<cplx> series = reference_product_decimate(rx.samples, ref_tx.samples, factor);
  const double rate = rx.sample_rate_hz / static_cast<double>(factor);
  // Each decimated sample represents the centre of its block.
  const double t0 = rx.t0 + 0.5 * static_cast<double>(factor - 1) / rx.sample_rate_hz;
  return stft(series, rate, stft_settings(params, rate), t0);
}

Spectrogram method2_view(const CfrSeries& cfr, std::span<const int> selection, const StftParams& params) {
  if (selection.empty()) throw DimensionError("method2_view: empty subcarrier selection");
  if (!(cfr.csi_rate_hz > 0.0)) throw DimensionError("method2_view: CFR series has no sampling rate");
  const StftSettings s = stft_settings(params, cfr.csi_rate_hz);
  Spectrogram acc;
  for (int k : selection) {
    const auto it = std::find(cfr.subcarriers.begin(), cfr.subcarriers.end(), k);
    if (it == cfr.subcarriers.end()) throw DimensionError("method2_view: subcarrier not in the CFR series");
    const auto row = cfr.power.row(static_cast<std::size_t>(it - cfr.subcarriers.begin()));
    const double mean = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(row.size());
    std::vector<double> centred(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) centred[i] = row[i] - mean;
    Spectrogram one = stft(std::span<const double>(centred), cfr.csi_rate_hz, s, cfr.t.front());
    if (acc.power.empty()) {
      acc = std::move(one);
    } else {
      auto& dst = acc.power.data();
      const auto& src = one.power.data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
  }
  const double inv = 1.0 / static_cast<double>(selection.size());
  for (auto& v : acc.power.data()) v *= inv;
  return acc;
}

double spectrogram_correlation(const Spectrogram& a, const Spectrogram& b) {
  check_same_shape(a, b);
  const auto& x = a.power.data();
  const auto& y = b.power.data();
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("spectrogram_correlation: input has no energy after mean removal");
  return std::clamp(sxy / std::sqrt(sxx * syy), 0.0, 1.0);
}

double occupied_bandwidth(const Spectrogram& s, double energy_fraction) {
  const std::size_t rows = s.power.rows();
  std::vector<double> avg(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (double v : s.power.row(i)) avg[i] += v;
  const double total = std::accumulate(avg.begin(), avg.end(), 0.0);
  if (!(total > 0.0)) throw Error("occupied_bandwidth: spectrogram has no energy");
  const std::size_t c = s.dc_row();
  double inside = avg[c];
  std::size_t half = 0;
  while (inside < energy_fraction * total * (1.0 - 1e-12)) {
    ++half;
    if (c >= half) inside += avg[c - half];
    if (c + half < rows) inside += avg[c + half];
    if (c < half && c + half >= rows) break;
  }
  return static_cast<double>(2 * half + 1) * s.bin_width_hz();
}

std::vector<double> peak_doppler_track(const Spectrogram& s) {
  const std::size_t rows = s.power.rows();
  const std::size_t dc = s.dc_row();
  std::vector<double> track(s.power.cols(), 0.0);
  for (std::size_t j = 0; j < s.power.cols(); ++j) {
    std::size_t arg = dc == 0 ? 1 : 0;
    for (std::size_t i = 0; i < rows; ++i)
      if (i != dc && s.power(i, j) > s.power(arg, j)) arg = i;
    const std::size_t mirror = 2 * dc - arg;
    if (arg < dc && mirror < rows && s.power(mirror, j) >= s.power(arg, j) * (1.0 - 1e-9)) arg = mirror;
    track[j] = s.freq_hz[arg];
  }
  return track;
}

}  // namespace mdobf
