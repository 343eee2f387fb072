#pragma once

#include <span>
#include <vector>

#include "mdobf/receiver.hpp"
#include "mdobf/scenario.hpp"
#include "mdobf/waveform.hpp"

namespace mdobf {

// STFT dimensions in samples.
struct StftSettings {
  std::size_t window_len = 0;
  std::size_t hop = 1;
  std::size_t n_fft = 0;
  WindowKind window = WindowKind::kHann;
};

// Converts the scenario's second-based settings at a given series rate.
// n_fft = 0 becomes the next power of two >= 4 * window_len.
StftSettings stft_settings(const StftParams& p, double rate_hz);

// Power over (frequency, frame). Row i is frequency (i - n_fft/2) * rate /
// n_fft, so the 0 Hz row sits at n_fft/2 and row 0 is the lowest frequency.
struct Spectrogram {
  Matrix<double> power;
  std::vector<double> freq_hz;
  std::vector<double> time_s;
  double rate_hz = 0.0;
  StftSettings settings;

  std::size_t dc_row() const { return settings.n_fft / 2; }
  double bin_width_hz() const { return rate_hz / static_cast<double>(settings.n_fft); }
};

std::vector<double> make_window(WindowKind kind, std::size_t len);

// |DFT(w x)|^2 / n_fft per frame, so each frame's row sum equals the
// windowed-frame energy. Frame j covers samples [j*hop, j*hop + window_len)
// and is stamped at its centre, t0 + (j*hop + window_len/2) / rate.
Spectrogram stft(std::span<const cplx> series, double rate_hz, const StftSettings& s, double t0 = 0.0);
Spectrogram stft(std::span<const double> series, double rate_hz, const StftSettings& s, double t0 = 0.0);

// rx * conj(ref), averaged over blocks of `factor` samples (integrate and
// dump low-pass).
std::vector<cplx> reference_product_decimate(std::span<const cplx> rx, std::span<const cplx> ref, std::size_t factor);

// Spectrogram of the received signal with the clean transmit waveform
// conjugated out, decimated to decimate_to_hz before the STFT.
Spectrogram method1_view(const BasebandSignal& rx, const BasebandSignal& ref_tx, double decimate_to_hz,
                         const StftParams& params);

// STFT of each selected subcarrier's mean-removed CFR power series,
// averaged over the selection.
Spectrogram method2_view(const CfrSeries& cfr, std::span<const int> selection, const StftParams& params);

// Normalized inner product of the mean-removed power matrices, clamped to
// [0, 1].
double spectrogram_correlation(const Spectrogram& a, const Spectrogram& b);

// Width of the narrowest band centred on 0 Hz holding `energy_fraction` of
// the time-averaged energy, counted in whole bins (a pure DC line is one
// bin wide).
double occupied_bandwidth(const Spectrogram& s, double energy_fraction = 0.9);

// Frequency of the strongest non-DC bin in every frame. Exact mirror ties,
// as produced by real input, resolve to the positive frequency.
std::vector<double> peak_doppler_track(const Spectrogram& s);

}  // namespace mdobf
