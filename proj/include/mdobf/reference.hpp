#pragma once

#include <span>
#include <vector>

#include "mdobf/human_channel.hpp"
#include "mdobf/spectral.hpp"
#include "mdobf/waveform.hpp"

// Single-threaded, transform-free implementations of the parallel kernels.
// They are slow (direct O(N^2) DFTs, per-tap sinc evaluation) and exist to
// cross-check the OpenMP/FFTW code paths and to benchmark against.
namespace mdobf::reference {

// Direct DFT; `inverse` flips the exponent sign. No scaling.
std::vector<cplx> dft(std::span<const cplx> x, bool inverse = false);

BasebandSignal ofdm_modulate(const SymbolGrid& grid, std::size_t cp_len, double sample_rate_hz, double t0 = 0.0);
SymbolGrid ofdm_demodulate(const BasebandSignal& sig, std::size_t n_subcarriers, std::size_t cp_len);

Spectrogram stft(std::span<const cplx> series, double rate_hz, const StftSettings& s, double t0 = 0.0);

std::vector<cplx> reference_product_decimate(std::span<const cplx> rx, std::span<const cplx> ref, std::size_t factor);

// Fast-mode channel with per-bin phasors evaluated directly.
BasebandSignal propagate_fast(const BasebandSignal& sig, const ChannelRealization& chan, std::size_t n_subcarriers,
                              std::size_t cp_len);

// Exact-mode channel with the Kaiser-windowed sinc evaluated per tap
// instead of read from the polyphase table.
BasebandSignal propagate_exact(const BasebandSignal& sig, const ChannelRealization& chan,
                               std::size_t half_width = 32);

}  // namespace mdobf::reference
