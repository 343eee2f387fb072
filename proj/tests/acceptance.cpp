// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mdobf/cli.hpp"
#include "mdobf/obfuscator.hpp"
#include "mdobf/pipeline.hpp"
#include "mdobf/receiver.hpp"
#include "mdobf/spectral.hpp"
#include "mdobf/waveform.hpp"

namespace fs = std::filesystem;
using namespace mdobf;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kC = 299'792'458.0;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

double energy(std::span<const cplx> x) {
  double e = 0.0;
  for (const cplx& v : x) e += std::norm(v);
  return e;
}

std::vector<cplx> random_complex(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {d(g), d(g)};
  return v;
}

double qfunc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

ScenarioConfig base_scenario() {
  ScenarioConfig c = load_scenario("{}");
  c.duration_s = 2.0;
  c.seed = 1;
  return c;
}

ScenarioConfig point_scenario(double speed) {
  ScenarioConfig c = base_scenario();
  c.walker.model = WalkerModel::kPoint;
  c.walker.speed = speed;
  return c;
}

const PipelineOptions kMethod1Only{true, false, false, false, {}};
const PipelineOptions kMethod2Only{false, true, false, false, {}};

// 1: CFR power from Y = H X.
Outcome cfr_exactness() {
  const std::size_t n = 64, m = 200;
  const auto h = random_complex(n * m, 11);
  const auto x = random_complex(n * m, 12);
  SymbolGrid y(n, m), known(n, m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t b = 0; b < n; ++b) {
      known.at(b, j) = x[j * n + b];
      y.at(b, j) = h[j * n + b] * x[j * n + b];
    }
  std::vector<int> used;
  for (int k = -28; k <= 28; ++k)
    if (k != 0) used.push_back(k);
  std::vector<double> t(m);
  for (std::size_t j = 0; j < m; ++j) t[j] = 4e-6 * static_cast<double>(j);
  const CfrSeries c = estimate_cfr(y, known, used, t);
  double worst = 0.0;
  for (std::size_t r = 0; r < used.size(); ++r)
    for (std::size_t j = 0; j < m; ++j) {
      const double want = std::norm(h[j * n + SubcarrierMap::bin(used[r], n)]);
      worst = std::max(worst, std::abs(c.power(r, j) - want) / want);
    }
  Outcome o;
  o.check(worst < 1e-12, "max relative error " + fmt("%.2e", worst));
  return o;
}

// 2: Doppler ridge of a single radial scatterer with a static LoS path.
Outcome doppler_oracle() {
  Outcome o;
  const SimulationResult slow = simulate(point_scenario(0.8), kMethod2Only);
  const SimulationResult fast = simulate(point_scenario(1.5), kMethod2Only);
  const double bin = slow.method2->bin_width_hz();
  const double f1 = median(peak_doppler_track(*slow.method2));
  const double f2 = median(peak_doppler_track(*fast.method2));
  const double want1 = 5.8e9 * 0.8 / kC, want2 = 5.8e9 * 1.5 / kC;
  o.check(std::abs(f1 - want1) <= bin, "0.8 m/s ridge " + fmt("%.2f", f1) + " Hz vs " + fmt("%.2f", want1));
  o.check(std::abs(f2 - want2) <= bin, "1.5 m/s ridge " + fmt("%.2f", f2) + " Hz vs " + fmt("%.2f", want2));
  // One-bin quantization on both ridges bounds the ratio error.
  const double ratio_tol = bin / f1 + f2 * bin / (f1 * f1);
  o.check(std::abs(f2 / f1 - 1.875) <= ratio_tol,
          "ratio " + fmt("%.3f", f2 / f1) + " (tol " + fmt("%.3f", ratio_tol) + ")");
  o.detail += "; bin " + fmt("%.2f", bin) + " Hz";
  return o;
}

// 3: smearing spreads and decorrelates the method 1 view at both speeds.
Outcome smearing_spread() {
  Outcome o;
  for (double v : {0.8, 1.5}) {
    ScenarioConfig clean = base_scenario();
    clean.walker.speed = v;
    ScenarioConfig smeared = clean;
    smeared.obfuscation = SmearParams{200.0, 10.0};
    const SimulationResult a = simulate(clean, kMethod1Only);
    const SimulationResult b = simulate(smeared, kMethod1Only);
    const double bw = occupied_bandwidth(*b.method1);
    const double corr = spectrogram_correlation(*a.method1, *b.method1);
    const std::string at = fmt("%.1f", v) + " m/s ";
    o.check(bw >= 340.0 && bw <= 500.0, at + "bandwidth " + fmt("%.1f", bw) + " Hz");
    o.check(corr < 0.2, at + "correlation " + fmt("%.3f", corr));
  }
  return o;
}

// 4: a spoofed run reads like an unspoofed run at v - v_sp.
Outcome spoofing_equivalence() {
  Outcome o;
  const double v = 0.8;
  for (double v_sp : {-2.0, 5.0, 16.0}) {
    ScenarioConfig spoofed = point_scenario(v);
    spoofed.obfuscation = SpoofParams{v_sp};
    const SimulationResult a = simulate(spoofed, kMethod2Only);
    const SimulationResult b = simulate(point_scenario(v - v_sp), kMethod2Only);
    const auto ta = peak_doppler_track(*a.method2);
    const auto tb = peak_doppler_track(*b.method2);
    const double bin = a.method2->bin_width_hz();
    std::size_t within = 0;
    for (std::size_t j = 0; j < ta.size(); ++j) within += std::abs(ta[j] - tb[j]) <= bin;
    o.check(within == ta.size(), "v_sp " + fmt("%g", v_sp) + ": " + std::to_string(within) + "/" +
                                     std::to_string(ta.size()) + " frames within a bin (ridge " +
                                     fmt("%.1f", median(ta)) + " Hz vs " + fmt("%.1f", median(tb)) + " Hz)");
  }
  return o;
}

// 5: the intended link is unaffected by either defense.
Outcome demodulation_unharmed() {
  Outcome o;
  ScenarioConfig cfg = base_scenario();
  cfg.walker_enabled = false;
  cfg.qam_order = 16;
  cfg.snr_db = 25.0;
  cfg.link.n_bits = 1'000'000;
  const std::vector<Obfuscation> cases{NoObfuscation{}, SmearParams{200.0, 10.0}, SpoofParams{16.0}};
  const char* names[] = {"clean", "smear", "spoof"};
  std::vector<LinkResult> res;
  for (const Obfuscation& ob : cases) {
    ScenarioConfig c = cfg;
    c.obfuscation = ob;
    res.push_back(simulate_link(c, build_channel(c)));
  }
  for (std::size_t i = 0; i < res.size(); ++i)
    o.detail += std::string(i ? "; " : "") + names[i] + " BER " + fmt("%.2e", res[i].ber) + " EVM " +
                fmt("%.2f%%", 100 * res[i].evm) + " (" + std::to_string(res[i].n_bits) + " bits)";
  for (std::size_t i = 1; i < res.size(); ++i)
    o.check(std::abs(res[i].ber - res[0].ber) < 1e-3, std::string(names[i]) + " BER difference " +
                                                          fmt("%.2e", std::abs(res[i].ber - res[0].ber)));
  for (std::size_t i = 0; i < res.size(); ++i)
    o.check(res[i].evm < 0.02, std::string(names[i]) + " EVM < 2%");

  // Reference points: the noise floor alone sets the EVM.
  ScenarioConfig quiet = cfg;
  quiet.snr_db = std::numeric_limits<double>::infinity();
  quiet.link.n_bits = 100'000;
  const LinkResult nf = simulate_link(quiet, build_channel(quiet));
  o.detail += "; noise-free EVM " + fmt("%.3f%%", 100 * nf.evm) + ", AWGN floor 10^(-25/20) = " +
              fmt("%.2f%%", 100 * std::pow(10.0, -25.0 / 20.0));
  return o;
}

// 6: QPSK through the OFDM modem with perfect CSI at Eb/N0 = 6 dB.
Outcome awgn_calibration() {
  ScenarioConfig cfg = base_scenario();
  cfg.qam_order = 4;
  const DerivedParams d = derive_streams(cfg);
  const std::size_t n_bits = 1'000'000;
  std::vector<std::uint8_t> bits(n_bits);
  std::mt19937_64 g(2024);
  for (auto& b : bits) b = static_cast<std::uint8_t>(g() >> 63);

  const SymbolGrid grid = data_grid(cfg, bits);
  BasebandSignal tx = ofdm_modulate(grid, cfg.cp_len, d.sample_rate_hz);
  // Unit-energy symbols and a unitary DFT: per-sample variance N0 maps to
  // N0 per subcarrier, and Es = 2 Eb for QPSK.
  const double ebn0 = std::pow(10.0, 0.6);
  const double n0 = 1.0 / (2.0 * ebn0);
  std::mt19937_64 noise(7);
  add_noise_inplace(tx.samples, n0, noise);
  const SymbolGrid rx = ofdm_demodulate(tx, cfg);
  const std::vector<std::uint8_t> got = demap_data(rx, d.subcarriers.data, 4);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < n_bits; ++i) errors += got[i] != bits[i];
  const double ber = static_cast<double>(errors) / static_cast<double>(n_bits);
  const double want = qfunc(std::sqrt(2.0 * ebn0));
  Outcome o;
  o.check(std::abs(ber - want) <= 0.3 * want,
          "BER " + fmt("%.3e", ber) + " vs Q(sqrt(2 Eb/N0)) " + fmt("%.3e", want) + " over " +
              std::to_string(n_bits) + " bits");
  return o;
}

// 7: Parseval, loopback and unit-modulus identities.
Outcome numerical_identities() {
  Outcome o;
  const std::size_t n = 64, cp = 16, m = 50;
  const auto v = random_complex(n * m, 21);
  SymbolGrid grid(n, m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t b = 0; b < n; ++b) grid.at(b, j) = v[j * n + b];
  const BasebandSignal tx = ofdm_modulate(grid, cp, 20e6);
  double mod_err = 0.0, demod_err = 0.0, loop_err = 0.0;
  const SymbolGrid back = ofdm_demodulate(tx, n, cp);
  for (std::size_t j = 0; j < m; ++j) {
    const std::span<const cplx> body(tx.samples.data() + j * (n + cp) + cp, n);
    const double eg = energy(grid.symbol(j)), eb = energy(body), ed = energy(back.symbol(j));
    mod_err = std::max(mod_err, std::abs(eb - eg) / eg);
    demod_err = std::max(demod_err, std::abs(ed - eb) / eb);
    for (std::size_t b = 0; b < n; ++b)
      loop_err = std::max(loop_err, std::abs(back.at(b, j) - grid.at(b, j)) / std::sqrt(eg / n));
  }
  o.check(mod_err < 1e-9, "modulator Parseval " + fmt("%.1e", mod_err));
  o.check(demod_err < 1e-9, "demodulator Parseval " + fmt("%.1e", demod_err));
  o.check(loop_err < 1e-9, "loopback " + fmt("%.1e", loop_err));

  const auto series = random_complex(4000, 22);
  const StftSettings s{256, 64, 1024, WindowKind::kHann};
  const Spectrogram sp = stft(series, 1000.0, s);
  const std::vector<double> w = make_window(s.window, s.window_len);
  double stft_err = 0.0;
  for (std::size_t j = 0; j < sp.power.cols(); ++j) {
    double want = 0.0, got = 0.0;
    for (std::size_t k = 0; k < s.window_len; ++k) want += std::norm(w[k] * series[j * s.hop + k]);
    for (std::size_t i = 0; i < sp.power.rows(); ++i) got += sp.power(i, j);
    stft_err = std::max(stft_err, std::abs(got - want) / want);
  }
  o.check(stft_err < 1e-9, "STFT frame Parseval " + fmt("%.1e", stft_err));

  // Per-sample magnitude is preserved to rounding.
  BasebandSignal sig{random_complex(200'000, 23), 20e6, 0.0};
  const BasebandSignal sm = apply_smearing(sig, SmearParams{200.0, 10.0});
  double smear_err = 0.0;
  for (std::size_t i = 0; i < sig.samples.size(); ++i)
    smear_err = std::max(smear_err, std::abs(std::abs(sm.samples[i]) / std::abs(sig.samples[i]) - 1.0));
  const SymbolGrid sg = apply_spoofing(grid, symbol_midpoints(m, n + cp, 20e6), 312'500.0, SpoofParams{16.0});
  double spoof_err = 0.0;
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t b = 0; b < n; ++b)
      spoof_err = std::max(spoof_err, std::abs(std::abs(sg.at(b, j)) / std::abs(grid.at(b, j)) - 1.0));
  const double e0 = energy(sig.samples), e1 = energy(sm.samples);
  o.check(smear_err < 1e-14 && std::abs(e1 - e0) / e0 < 1e-12, "smearing magnitude " + fmt("%.1e", smear_err));
  o.check(spoof_err < 1e-14, "spoofing magnitude " + fmt("%.1e", spoof_err));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 8: same scenario and seed twice gives byte-identical CSV artifacts.
Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / ("mdobf_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  ScenarioConfig cfg = base_scenario();
  cfg.obfuscation = SmearParams{200.0, 10.0};
  cfg.snr_db = 20.0;
  cfg.link.n_bits = 100'000;
  for (const char* d : {"a", "b"}) {
    RunOptions opt;
    opt.out_dir = root / d;
    opt.formats = {OutputFormat::kCsv};
    run_scenario(cfg, opt);
  }
  std::size_t files = 0, same = 0;
  for (const auto& e : fs::directory_iterator(root / "a")) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    same += slurp(e.path()) == slurp(root / "b" / e.path().filename());
  }
  fs::remove_all(root);
  o.check(files > 0 && same == files, std::to_string(same) + "/" + std::to_string(files) + " CSV files identical");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"CFR power exactness", cfr_exactness},
      {"Doppler oracle", doppler_oracle},
      {"smearing spread", smearing_spread},
      {"spoofing equivalence", spoofing_equivalence},
      {"demodulation unharmed", demodulation_unharmed},
      {"AWGN calibration", awgn_calibration},
      {"numerical identities", numerical_identities},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("[%s] %zu %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed ? 1 : 0;
}
