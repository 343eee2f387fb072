#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mdobf/human_channel.hpp"
#include "mdobf/receiver.hpp"
#include "mdobf/spectral.hpp"

namespace mdobf {

class IoError : public Error {
 public:
  using Error::Error;
};

// Spectrogram CSV:
//   line 1: "# mdobf spectrogram v1 rate_hz=<r> window=<w> window_len=<n> hop=<h> n_fft=<m>"
//   line 2: "freq_hz\time_s,<t0>,<t1>,..."
//   then one line per frequency row, lowest frequency first: "<f>,<p0>,<p1>,..."
void write_spectrogram_csv(const std::filesystem::path& path, const Spectrogram& s);
Spectrogram read_spectrogram_csv(const std::filesystem::path& path);

// Binary 8-bit PGM (P5). Width = frames, height = frequency rows with the
// highest frequency in image row 0. Grey level is linear in dB:
// 255 * (10 log10(p / peak) - floor_db) / -floor_db, clamped to [0, 255].
void write_spectrogram_pgm(const std::filesystem::path& path, const Spectrogram& s, double floor_db = -60.0);

// CSV with header "t,k,re,im,power", one line per (time, subcarrier).
void write_cfr_csv(const std::filesystem::path& path, const CfrSeries& cfr);

// Binary matrix: 32-byte header of little-endian u32 fields
//   magic "MDMX", version (1), rows, cols, dtype (1 = f32, 2 = complex f32 as
//   interleaved re/im), three reserved zeros
// followed by row-major little-endian data.
enum class MatrixDtype : std::uint32_t { kF32 = 1, kComplexF32 = 2 };
void write_matrix_bin(const std::filesystem::path& path, const Matrix<double>& m);
void write_matrix_bin(const std::filesystem::path& path, const Matrix<cplx>& m);
struct BinaryMatrix {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  MatrixDtype dtype = MatrixDtype::kF32;
  std::vector<float> values;  // interleaved for complex
};
BinaryMatrix read_matrix_bin(const std::filesystem::path& path);

// CSV "t,label,path_length_m", one line per track sample.
void write_tracks_csv(const std::filesystem::path& path, const std::vector<ScattererTrack>& tracks);

// Interleaved little-endian f32 I/Q in `path` plus a one-line text sidecar
// `path`.txt: "format=cf32_le sample_rate_hz=<fs> t0_s=<t0> n_samples=<n>".
void write_iq(const std::filesystem::path& path, const BasebandSignal& sig);
BasebandSignal read_iq(const std::filesystem::path& path);

}  // namespace mdobf
