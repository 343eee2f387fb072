#include <doctest.h>

#include <omp.h>

#include <numeric>

#include "mdobf/obfuscator.hpp"
#include "mdobf/pipeline.hpp"
#include "oracles.hpp"

using namespace mdobf;

namespace {

ScenarioConfig walker_scenario(double speed, double duration = 1.0) {
  ScenarioConfig c = load_scenario("{}");
  c.walker.speed = speed;
  c.duration_s = duration;
  c.link.n_bits = 20'000;
  return c;
}

ScenarioConfig point_scenario(double speed, double duration = 1.0) {
  ScenarioConfig c = walker_scenario(speed, duration);
  c.walker.model = WalkerModel::kPoint;
  return c;
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

// Fraction of time-averaged energy within |f| <= f_max.
double energy_within(const Spectrogram& s, double f_max) {
  double in = 0.0, all = 0.0;
  for (std::size_t i = 0; i < s.power.rows(); ++i)
    for (double v : s.power.row(i)) {
      all += v;
      if (std::abs(s.freq_hz[i]) <= f_max) in += v;
    }
  return in / all;
}

}  // namespace

TEST_CASE("clean walker run") {
  const ScenarioConfig cfg = walker_scenario(0.8);
  const SimulationResult r = simulate(cfg);
  REQUIRE(r.link);
  CHECK(r.link->ber == 0.0);
  CHECK(r.link->n_bits == 20'000);
  REQUIRE(r.method1);
  REQUIRE(r.method2);
  CHECK(r.method1_series.size() == 2000);
  CHECK(r.method1_rate_hz == 2000.0);
  CHECK(r.cfr.n_times() == 1000);
  CHECK(r.cfr.csi_rate_hz == doctest::Approx(1000.0));
  CHECK(r.cfr.t[1] - r.cfr.t[0] == doctest::Approx(1e-3));
  CHECK(r.cfr.subcarriers.size() == 56);
  CHECK(r.rx.samples.empty());

  // Method 1: the micro-Doppler signature stays within a few tens of Hz.
  CHECK(energy_within(*r.method1, 60.0) > 0.999);
  CHECK(occupied_bandwidth(*r.method1) < 150.0);
  // Method 2: the torso line at f_c v / c.
  const double fd = oracle::doppler_hz(5.8e9, 0.8);
  CHECK(std::abs(median(peak_doppler_track(*r.method2)) - fd) <= 2 * r.method2->bin_width_hz());
}

TEST_CASE("runs are deterministic and independent of thread count") {
  ScenarioConfig cfg = walker_scenario(0.8, 0.6);
  cfg.snr_db = 15.0;
  cfg.obfuscation = SmearParams{200.0, 10.0};
  const int before = omp_get_max_threads();
  omp_set_num_threads(1);
  const SimulationResult a = simulate(cfg);
  omp_set_num_threads(3);
  const SimulationResult b = simulate(cfg);
  omp_set_num_threads(before);
  CHECK(a.method1_series == b.method1_series);
  CHECK(a.cfr.h_hat == b.cfr.h_hat);
  CHECK(a.method1->power == b.method1->power);
  CHECK(a.method2->power == b.method2->power);
  CHECK(a.link->bit_errors == b.link->bit_errors);
  CHECK(a.link->evm == b.link->evm);

  ScenarioConfig other = cfg;
  other.seed = 2;
  CHECK(simulate(other).cfr.h_hat != a.cfr.h_hat);
}

TEST_CASE("Doppler scales with speed") {
  const SimulationResult slow = simulate(point_scenario(0.8), {false, true, false, false, {}});
  const SimulationResult fast = simulate(point_scenario(1.6), {false, true, false, false, {}});
  const double bin = slow.method2->bin_width_hz();
  const double f1 = median(peak_doppler_track(*slow.method2));
  const double f2 = median(peak_doppler_track(*fast.method2));
  CHECK(std::abs(f1 - oracle::doppler_hz(5.8e9, 0.8)) <= bin);
  CHECK(std::abs(f2 - 2 * f1) <= bin);
}

TEST_CASE("obfuscation leaves the CSI power of a sensing run unchanged") {
  // Both defenses multiply by unit-modulus terms that are common to every
  // path, so |H|^2 seen by the passive receiver is untouched.
  const ScenarioConfig clean = point_scenario(0.8, 0.6);
  const PipelineOptions m2{false, true, false, false, {}};
  const SimulationResult base = simulate(clean, m2);
  for (const Obfuscation& o : {Obfuscation{SpoofParams{16.0}}, Obfuscation{SmearParams{200.0, 10.0}}}) {
    ScenarioConfig cfg = clean;
    cfg.obfuscation = o;
    const SimulationResult r = simulate(cfg, m2);
    const auto& p0 = base.cfr.power.data();
    const auto& p1 = r.cfr.power.data();
    const double mean = std::accumulate(p0.begin(), p0.end(), 0.0) / static_cast<double>(p0.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < p0.size(); ++i) worst = std::max(worst, std::abs(p1[i] - p0[i]) / mean);
    // A 200 Hz instantaneous offset is ~6e-4 of the subcarrier spacing and
    // leaks that order of inter-carrier interference.
    CHECK(worst < (std::holds_alternative<SpoofParams>(o) ? 1e-9 : 1e-2));
  }
}

TEST_CASE("spoofing tilts the CSI phase across subcarriers") {
  // The spoof phasor adds 2 pi k df v_sp t / c to subcarrier k: an apparent
  // delay drift of v_sp t / c.
  const ScenarioConfig clean = point_scenario(0.8, 0.6);
  ScenarioConfig cfg = clean;
  const double v_sp = 16.0;
  cfg.obfuscation = SpoofParams{v_sp};
  const PipelineOptions m2{false, true, false, false, {}};
  const SimulationResult a = simulate(clean, m2);
  const SimulationResult b = simulate(cfg, m2);
  for (std::size_t c = 0; c < a.cfr.n_times(); c += 97)
    for (std::size_t r = 0; r < a.cfr.subcarriers.size(); ++r) {
      const int k = a.cfr.subcarriers[r];
      const double want = 2 * oracle::kPi * k * 312500.0 * v_sp * a.cfr.t[c] / oracle::kC;
      const double got = std::arg(b.cfr.h_hat(r, c) / a.cfr.h_hat(r, c));
      CHECK(std::abs(std::remainder(got - want, 2 * oracle::kPi)) < 1e-6);
    }
}

TEST_CASE("smearing spreads the method 1 view") {
  ScenarioConfig cfg = walker_scenario(0.8);
  cfg.obfuscation = SmearParams{200.0, 10.0};
  const SimulationResult r = simulate(cfg, {true, false, true, false, {}});
  CHECK(r.link->ber == 0.0);
  CHECK(energy_within(*r.method1, 210.0 + r.method1->bin_width_hz()) >= 0.9);
  CHECK(occupied_bandwidth(*r.method1) > 300.0);
}

TEST_CASE("exact and fast channel modes agree on the Doppler line") {
  ScenarioConfig cfg = point_scenario(0.8, 0.55);
  cfg.link.n_bits = 2000;
  const PipelineOptions m2{false, true, false, false, {}};
  const SimulationResult fast = simulate(cfg, m2);
  cfg.channel_mode = ChannelMode::kExact;
  const SimulationResult exact = simulate(cfg, m2);
  const auto tf = peak_doppler_track(*fast.method2);
  const auto te = peak_doppler_track(*exact.method2);
  REQUIRE(tf.size() == te.size());
  for (std::size_t j = 0; j < tf.size(); ++j) CHECK(std::abs(tf[j] - te[j]) <= fast.method2->bin_width_hz());
  double worst = 0.0;
  for (std::size_t i = 0; i < fast.cfr.power.data().size(); ++i)
    worst = std::max(worst, std::abs(fast.cfr.power.data()[i] - exact.cfr.power.data()[i]));
  CHECK(worst < 0.05);
}

TEST_CASE("noisy link and options") {
  ScenarioConfig cfg = walker_scenario(0.8, 0.6);
  cfg.snr_db = 25.0;
  cfg.walker_enabled = false;
  cfg.link.n_bits = 100'000;
  const LinkResult l = simulate_link(cfg, build_channel(cfg));
  CHECK(l.n_frames == (100'000 + 20'799) / 20'800);
  CHECK(l.ber < 1e-2);
  CHECK(l.evm > 0.03);
  CHECK(l.evm < 0.08);

  PipelineOptions opt;
  opt.keep_rx = true;
  opt.link = false;
  opt.method2_selection = {-28, 28};
  const SimulationResult r = simulate(cfg, opt);
  CHECK(r.rx.samples.size() == r.derived.n_symbols * 80);
  CHECK_FALSE(r.link);

  ScenarioConfig tiny = cfg;
  tiny.duration_s = 0.001;
  tiny.link.n_bits = 1'000'000;
  CHECK_THROWS_AS(simulate_link(tiny, build_channel(cfg)), ConfigError);
}

TEST_CASE("cyclic prefix of zero and odd block sizes") {
  ScenarioConfig cfg = point_scenario(0.8, 0.6);
  cfg.cp_len = 0;
  cfg.link.n_bits = 5000;
  // Without a prefix the cyclic fast model no longer holds.
  CHECK_THROWS_AS(simulate(cfg), DimensionError);
  cfg.channel_mode = ChannelMode::kExact;
  const SimulationResult r = simulate(cfg);
  CHECK(r.method1_series.size() == 1200);
  CHECK(r.link->ber == 0.0);
  CHECK(std::abs(median(peak_doppler_track(*r.method2)) - oracle::doppler_hz(5.8e9, 0.8)) <=
        r.method2->bin_width_hz());
}
