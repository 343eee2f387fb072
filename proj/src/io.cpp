#include "mdobf/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace mdobf {
namespace {

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                     static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b, 4);
}

void put_f32(std::ostream& out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated binary file");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_header(std::ostream& out, std::size_t rows, std::size_t cols, MatrixDtype dtype) {
  out.write("MDMX", 4);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(rows));
  put_u32(out, static_cast<std::uint32_t>(cols));
  put_u32(out, static_cast<std::uint32_t>(dtype));
  for (int i = 0; i < 3; ++i) put_u32(out, 0);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("bad number '" + s + "' in " + path.string());
  }
}

}  // namespace

void write_spectrogram_csv(const std::filesystem::path& path, const Spectrogram& s) {
  auto out = open_out(path);
  out << "# mdobf spectrogram v1 rate_hz=" << fmt_num(s.rate_hz) << " window=" << window_name(s.settings.window)
      << " window_len=" << s.settings.window_len << " hop=" << s.settings.hop << " n_fft=" << s.settings.n_fft
      << "\n";
  out << "freq_hz\\time_s";
  for (double t : s.time_s) out << ',' << fmt_num(t);
  out << '\n';
  for (std::size_t i = 0; i < s.power.rows(); ++i) {
    out << fmt_num(s.freq_hz[i]);
    for (double v : s.power.row(i)) out << ',' << fmt_num(v);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Spectrogram read_spectrogram_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  Spectrogram s;
  if (!std::getline(in, line) || line.rfind("# mdobf spectrogram v1", 0) != 0)
    throw IoError(path.string() + " is not a spectrogram CSV");
  for (const auto& field : split(line, ' ')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = field.substr(0, eq), val = field.substr(eq + 1);
    if (key == "rate_hz") s.rate_hz = parse_double(val, path);
    if (key == "window_len") s.settings.window_len = std::stoul(val);
    if (key == "hop") s.settings.hop = std::stoul(val);
    if (key == "n_fft") s.settings.n_fft = std::stoul(val);
    if (key == "window")
      s.settings.window = val == "rect" ? WindowKind::kRect : val == "hamming" ? WindowKind::kHamming : WindowKind::kHann;
  }
  if (!std::getline(in, line)) throw IoError(path.string() + ": missing time axis");
  const auto head = split(line, ',');
  for (std::size_t i = 1; i < head.size(); ++i) s.time_s.push_back(parse_double(head[i], path));
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != s.time_s.size() + 1) throw IoError(path.string() + ": ragged row");
    s.freq_hz.push_back(parse_double(cells[0], path));
    std::vector<double> r;
    for (std::size_t i = 1; i < cells.size(); ++i) r.push_back(parse_double(cells[i], path));
    rows.push_back(std::move(r));
  }
  s.power = Matrix<double>(rows.size(), s.time_s.size());
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), s.power.row(i).begin());
  return s;
}

void write_spectrogram_pgm(const std::filesystem::path& path, const Spectrogram& s, double floor_db) {
  const std::size_t h = s.power.rows(), w = s.power.cols();
  double peak = 0.0;
  for (double v : s.power.data()) peak = std::max(peak, v);
  auto out = open_out(path, true);
  out << "P5\n" << w << ' ' << h << "\n255\n";
  std::vector<char> row(w);
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t i = h - 1 - r;  // highest frequency first
    for (std::size_t j = 0; j < w; ++j) {
      const double p = s.power(i, j);
      double level = 0.0;
      if (peak > 0.0 && p > 0.0) level = 255.0 * (10.0 * std::log10(p / peak) - floor_db) / -floor_db;
      row[j] = static_cast<char>(static_cast<unsigned char>(std::clamp(std::round(level), 0.0, 255.0)));
    }
    out.write(row.data(), static_cast<std::streamsize>(w));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_cfr_csv(const std::filesystem::path& path, const CfrSeries& cfr) {
  auto out = open_out(path);
  out << "t,k,re,im,power\n";
  for (std::size_t c = 0; c < cfr.t.size(); ++c)
    for (std::size_t r = 0; r < cfr.subcarriers.size(); ++r)
      out << fmt_num(cfr.t[c]) << ',' << cfr.subcarriers[r] << ',' << fmt_num(cfr.h_hat(r, c).real()) << ','
          << fmt_num(cfr.h_hat(r, c).imag()) << ',' << fmt_num(cfr.power(r, c)) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

void write_matrix_bin(const std::filesystem::path& path, const Matrix<double>& m) {
  auto out = open_out(path, true);
  write_header(out, m.rows(), m.cols(), MatrixDtype::kF32);
  for (double v : m.data()) put_f32(out, v);
  if (!out) throw IoError("write failed for " + path.string());
}

void write_matrix_bin(const std::filesystem::path& path, const Matrix<cplx>& m) {
  auto out = open_out(path, true);
  write_header(out, m.rows(), m.cols(), MatrixDtype::kComplexF32);
  for (const cplx& v : m.data()) {
    put_f32(out, v.real());
    put_f32(out, v.imag());
  }
  if (!out) throw IoError("write failed for " + path.string());
}

BinaryMatrix read_matrix_bin(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "MDMX") throw IoError(path.string() + ": bad magic");
  if (get_u32(in) != 1) throw IoError(path.string() + ": unsupported version");
  BinaryMatrix m;
  m.rows = get_u32(in);
  m.cols = get_u32(in);
  const std::uint32_t dtype = get_u32(in);
  if (dtype != 1 && dtype != 2) throw IoError(path.string() + ": unknown dtype");
  m.dtype = static_cast<MatrixDtype>(dtype);
  for (int i = 0; i < 3; ++i) get_u32(in);
  const std::size_t n = std::size_t{m.rows} * m.cols * (dtype == 2 ? 2 : 1);
  m.values.resize(n);
  for (auto& v : m.values) v = std::bit_cast<float>(get_u32(in));
  return m;
}

void write_tracks_csv(const std::filesystem::path& path, const std::vector<ScattererTrack>& tracks) {
  auto out = open_out(path);
  out << "t,label,path_length_m\n";
  for (const auto& track : tracks)
    for (std::size_t i = 0; i < track.path_length_m.size(); ++i)
      out << fmt_num(track.dt * static_cast<double>(i)) << ',' << track.label << ','
          << fmt_num(track.path_length_m[i]) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

void write_iq(const std::filesystem::path& path, const BasebandSignal& sig) {
  {
    auto out = open_out(path, true);
    for (const cplx& v : sig.samples) {
      put_f32(out, v.real());
      put_f32(out, v.imag());
    }
    if (!out) throw IoError("write failed for " + path.string());
  }
  auto side = open_out(path.string() + ".txt");
  side << "format=cf32_le sample_rate_hz=" << fmt_num(sig.sample_rate_hz) << " t0_s=" << fmt_num(sig.t0)
       << " n_samples=" << sig.samples.size() << '\n';
}

BasebandSignal read_iq(const std::filesystem::path& path) {
  std::ifstream side(path.string() + ".txt");
  if (!side) throw IoError("missing sidecar " + path.string() + ".txt");
  std::string line;
  std::getline(side, line);
  BasebandSignal sig;
  std::size_t n = 0;
  bool format_ok = false;
  for (const auto& field : split(line, ' ')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = field.substr(0, eq), val = field.substr(eq + 1);
    if (key == "format") format_ok = val == "cf32_le";
    if (key == "sample_rate_hz") sig.sample_rate_hz = parse_double(val, path);
    if (key == "t0_s") sig.t0 = parse_double(val, path);
    if (key == "n_samples") n = std::stoull(val);
  }
  if (!format_ok) throw IoError(path.string() + ": unsupported sample format");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  sig.samples.resize(n);
  for (auto& v : sig.samples) {
    const float re = std::bit_cast<float>(get_u32(in));
    const float im = std::bit_cast<float>(get_u32(in));
    v = {re, im};
  }
  return sig;
}

}  // namespace mdobf
