#include <doctest.h>

#include "mdobf/human_channel.hpp"
#include "mdobf/receiver.hpp"
#include "mdobf/rng.hpp"
#include "mdobf/spectral.hpp"
#include "oracles.hpp"

using namespace mdobf;

namespace {

ChannelRealization one_path(ScattererTrack t, double carrier = 5.8e9) {
  ChannelRealization c;
  c.carrier_hz = carrier;
  double shortest = 1e300;
  for (double r : t.path_length_m) shortest = std::min(shortest, r);
  c.sync_delay_s = shortest / kSpeedOfLight;
  c.tracks.push_back(std::move(t));
  return c;
}

double mean_rate(const ScattererTrack& t) {
  return (t.path_length_m.back() - t.path_length_m.front()) / t.t_end();
}

double peak_rate(const ScattererTrack& t) {
  double m = 0.0;
  for (std::size_t i = 1; i < t.path_length_m.size(); ++i)
    m = std::max(m, std::abs(t.path_length_m[i] - t.path_length_m[i - 1]) / t.dt);
  return m;
}

}  // namespace

TEST_CASE("path delay") {
  const auto s = static_track("los", 30.0, 1.0, 2.0);
  CHECK(path_delay(s, 0.7) * 1e9 == doctest::Approx(100.069).epsilon(1e-5));
  const auto r = radial_track("p", 30.0, 1.5, 1.0, 2.0, 1e-3);
  CHECK(path_delay(r, 2.0) * 1e9 == doctest::Approx(27.0 / oracle::kC * 1e9).epsilon(1e-12));
  CHECK(path_delay(r, 2.0) * 1e9 == doctest::Approx(90.06).epsilon(1e-4));
  CHECK(path_delay(r, 0.0) == 30.0 / kSpeedOfLight);
  CHECK_THROWS_AS(path_delay(r, 2.1), DimensionError);
  CHECK_THROWS_AS(path_delay(r, -1e-3), DimensionError);
  CHECK_THROWS_AS(static_track("x", 1.0, 1.0, 0.0), ConfigError);
}

TEST_CASE("cfr of simple channels") {
  const auto chan = one_path(static_track("a", 12.0, 1.0, 1.0));
  for (double f : {-8e6, 0.0, 3e6})
    for (double t : {0.0, 0.5}) CHECK(std::abs(cfr(chan, f, t)) == doctest::Approx(1.0));
  CHECK(cfr(chan, 1e6, 0.0) == cfr(chan, 1e6, 0.9));

  // Two equal paths half a wavelength apart (at f_c + f) cancel.
  ChannelRealization two;
  two.carrier_hz = 5.8e9;
  const double f = 1.25e6;
  const double dr = kSpeedOfLight / (2.0 * (5.8e9 + f));
  two.tracks = {static_track("a", 20.0, 1.0, 1.0), static_track("b", 20.0 + dr, 1.0, 1.0)};
  CHECK(std::abs(cfr(two, f, 0.3)) < 1e-6);
  CHECK(std::abs(cfr(two, f + 2e6, 0.3)) > 1e-3);
  CHECK_THROWS_AS(cfr(ChannelRealization{}, 0.0, 0.0), ConfigError);
}

TEST_CASE("static walker has constant tracks") {
  WalkerParams w;
  w.speed = 0.0;
  for (const auto& t : walker_tracks(w, {0, 200}, {0, 0}, 1.0, 1e-3, 0.3)) {
    for (double r : t.path_length_m) CHECK(r == t.path_length_m.front());
    CHECK(t.path_length_m.front() > 0.0);
  }
}

TEST_CASE("walker torso and limb kinematics") {
  WalkerParams w;
  w.speed = 0.8;
  // Default geometry: Tx far broadside, so the bistatic torso rate is about
  // the walking speed.
  const auto tracks = walker_tracks(w, {0.0, 200.0}, {0.0, 0.0}, 2.0, 1e-3, 0.0);
  REQUIRE(tracks.size() == kSegmentCount);
  CHECK(tracks[0].label == "torso");
  CHECK(tracks[1].label == "left_leg");
  CHECK(tracks[5].label == "head");
  CHECK(mean_rate(tracks[0]) == doctest::Approx(-0.8).epsilon(0.05));

  // Behind the receiver on the Tx-Rx axis, approaching both ends: twice the speed.
  WalkerParams axial = w;
  axial.start = {0.0, -6.0};
  axial.heading_deg = 90.0;
  const auto ax = walker_tracks(axial, {0.0, 200.0}, {0.0, 0.0}, 2.0, 1e-3, 0.0);
  CHECK(mean_rate(ax[0]) == doctest::Approx(-1.6).epsilon(1e-9));
  CHECK(peak_rate(tracks[1]) > peak_rate(tracks[0]));
  CHECK(peak_rate(tracks[2]) > peak_rate(tracks[0]));
  for (const auto& t : tracks) {
    CHECK(peak_rate(t) <= 4.0 * w.speed);
    for (double r : t.path_length_m) CHECK(r > 0.0);
    CHECK(t.reflectivity == w.reflectivity[static_cast<std::size_t>(&t - tracks.data())]);
  }

  // Legs swing in antiphase about the torso.
  const auto& l = tracks[1].path_length_m;
  const auto& r = tracks[2].path_length_m;
  const auto& c = tracks[0].path_length_m;
  double corr = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) corr += (l[i] - c[i]) * (r[i] - c[i]);
  CHECK(corr < 0.0);

  CHECK(gait_frequency_hz(w) == doctest::Approx(std::sqrt(0.8) / 1.346));
  CHECK_THROWS_AS(walker_tracks(w, {0, 200}, {0, 0}, 0.0, 1e-3), ConfigError);
  CHECK_THROWS_AS(walker_tracks(w, {0, 200}, {0, 0}, 1.0, 0.5), ConfigError);
}

TEST_CASE("identity channel passes the signal through") {
  const Frame f = known_symbol_stream(ScenarioConfig{}, 10);
  ChannelRealization c = one_path(static_track("a", 30.0, 1.0, 1.0), 0.0);
  for (auto mode : {ChannelMode::kFast, ChannelMode::kExact}) {
    const BasebandSignal y = propagate(f.signal, c, {mode, 64, 16, 32});
    for (std::size_t n = 0; n < y.samples.size(); ++n) CHECK(std::abs(y.samples[n] - f.signal.samples[n]) < 1e-9);
  }
  // Exact mode is the identity on arbitrary input too.
  BasebandSignal s{oracle::random_complex(800, 1), 20e6, 0.0};
  const BasebandSignal y = propagate(s, c, {ChannelMode::kExact, 64, 16, 32});
  for (std::size_t n = 0; n < s.samples.size(); ++n) CHECK(std::abs(y.samples[n] - s.samples[n]) < 1e-9);
}

TEST_CASE("single static path is a scalar times the delayed input") {
  // Path 3 samples longer than the sync reference: y[n] = g x[n-3].
  ChannelRealization c;
  c.carrier_hz = 5.8e9;
  const double dr = 3.0 * kSpeedOfLight / 20e6;
  c.tracks = {static_track("near", 100.0, 1e-300, 1.0), static_track("far", 100.0 + dr, {0.3, 0.4}, 1.0)};
  c.sync_delay_s = 100.0 / kSpeedOfLight;
  BasebandSignal s{oracle::random_complex(4000, 2), 20e6, 0.0};
  const BasebandSignal y = propagate(s, c, {ChannelMode::kExact, 64, 16, 32});
  const cplx g = cplx{0.3, 0.4} * std::polar(1.0, -2 * oracle::kPi * 5.8e9 * (100.0 + dr) / kSpeedOfLight);
  double err = 0.0, ref = 0.0;
  for (std::size_t n = 100; n < 3900; ++n) {
    err += std::norm(y.samples[n] - g * s.samples[n - 3]);
    ref += std::norm(g * s.samples[n - 3]);
  }
  CHECK(std::sqrt(err / ref) < 1e-6);
}

TEST_CASE("whole-sample delay gives a linear phase slope across subcarriers") {
  ScenarioConfig cfg;
  const Frame f = known_symbol_stream(cfg, 4);
  ChannelRealization c;
  c.carrier_hz = 0.0;
  const double d = 2.0;
  c.tracks = {static_track("a", 50.0 + d * kSpeedOfLight / 20e6, 1.0, 1.0)};
  c.sync_delay_s = 50.0 / kSpeedOfLight;
  for (auto mode : {ChannelMode::kFast, ChannelMode::kExact}) {
    const SymbolGrid y = ofdm_demodulate(propagate(f.signal, c, {mode, 64, 16, 32}), 64, 16);
    for (int k : derive_streams(cfg).subcarriers.used) {
      const std::size_t b = SubcarrierMap::bin(k, 64);
      const cplx h = y.at(b, 2) / f.grid.at(b, 2);
      CHECK(std::abs(h - std::polar(1.0, -2 * oracle::kPi * k * d / 64.0)) < 1e-4);
    }
  }
}

TEST_CASE("receiver CSI agrees with cfr for a slowly moving channel") {
  ScenarioConfig cfg;
  const Frame f = known_symbol_stream(cfg, 40);
  const DerivedParams d = derive_streams(cfg);
  // Fast mode reproduces cfr at the symbol midpoint exactly. Exact mode
  // interpolates across symbol boundaries, where the waveform is not band
  // limited: whole-sample offsets stay within 1e-3, fractional ones within 2e-2.
  struct Case {
    ChannelMode mode;
    double extra_m;
    double tol;
  };
  const double sample_m = kSpeedOfLight / 20e6;
  for (const Case& cs : {Case{ChannelMode::kFast, 7.0, 1e-9}, Case{ChannelMode::kExact, 3 * sample_m, 1e-3},
                         Case{ChannelMode::kExact, 7.0, 2e-2}}) {
    ChannelRealization c;
    c.carrier_hz = 5.8e9;
    c.tracks = {static_track("los", 200.0, 1.0, 0.01),
                radial_track("p", 200.0 + cs.extra_m, 0.8, {0.3, 0.1}, 0.01, 1e-4)};
    c.sync_delay_s = 200.0 / kSpeedOfLight;
    const SymbolGrid y = ofdm_demodulate(propagate(f.signal, c, {cs.mode, 64, 16, 32}), 64, 16);
    double worst = 0.0;
    for (std::size_t m = 5; m < 35; ++m) {
      const double t = (m + 0.5) * 4e-6;
      for (int k : d.subcarriers.used) {
        const std::size_t b = SubcarrierMap::bin(k, 64);
        const cplx want = cfr(c, k * 312500.0, t);
        worst = std::max(worst, std::abs(y.at(b, m) / f.grid.at(b, m) - want) / std::abs(want));
      }
    }
    CHECK(worst < cs.tol);
  }
}

TEST_CASE("moving path produces the carrier Doppler in the reference product") {
  ScenarioConfig cfg;
  const double v = 0.8;
  const double dur = 0.25;
  ChannelRealization c;
  c.carrier_hz = 5.8e9;
  c.tracks = {radial_track("p", 30.0, v, 1.0, dur, 1e-3)};
  c.sync_delay_s = (30.0 - v * dur) / kSpeedOfLight;
  const Frame f = known_symbol_stream(cfg, static_cast<std::size_t>(dur / 4e-6));
  const BasebandSignal y = propagate(f.signal, c, {ChannelMode::kFast, 64, 16, 32});
  const std::vector<cplx> prod = reference_product_decimate(y.samples, f.signal.samples, 10000);
  StftParams p;
  p.window_s = 0.1;
  p.hop_s = 0.05;
  const Spectrogram s = stft(prod, 2000.0, stft_settings(p, 2000.0));
  const double fd = oracle::doppler_hz(5.8e9, v);
  CHECK(fd == doctest::Approx(15.48).epsilon(1e-3));
  for (double pk : peak_doppler_track(s)) CHECK(std::abs(pk - fd) <= s.bin_width_hz());
}

TEST_CASE("noise") {
  std::mt19937_64 g1(5), g2(5);
  BasebandSignal zero{std::vector<cplx>(1'000'000), 20e6, 0.0};
  const BasebandSignal a = add_awgn(zero, 10.0, 1.0, g1);
  const BasebandSignal b = add_awgn(zero, 10.0, 1.0, g2);
  CHECK(a.samples == b.samples);
  CHECK(oracle::energy(a.samples) / 1e6 == doctest::Approx(0.1).epsilon(0.02));
  double re = 0.0;
  for (const auto& v : a.samples) re += v.real() * v.real();
  CHECK(re / 1e6 == doctest::Approx(0.05).epsilon(0.02));
  CHECK(add_awgn(a, std::numeric_limits<double>::infinity(), 1.0, g1).samples == a.samples);

  // SNR = 0 dB through propagate: output power of a zero input is the noise power.
  ChannelRealization c = one_path(static_track("a", 10.0, 1.0, 1.0));
  c.noise_power = 0.7;
  std::mt19937_64 g3(9);
  BasebandSignal z{std::vector<cplx>(200'000), 20e6, 0.0};
  const BasebandSignal y = propagate(z, c, {ChannelMode::kFast, 64, 16, 32}, &g3);
  CHECK(oracle::energy(y.samples) / 200'000 == doctest::Approx(0.7).epsilon(0.05));
}

TEST_CASE("build_channel from a scenario") {
  ScenarioConfig cfg = load_scenario("{}");
  cfg.snr_db = 20.0;
  const ChannelRealization c = build_channel(cfg);
  REQUIRE(c.tracks.size() == 1 + kSegmentCount);
  CHECK(c.tracks[0].label == "static0");
  CHECK(c.tracks[1].label == "torso");
  CHECK(c.sync_delay_s == doctest::Approx(200.0 / kSpeedOfLight));
  double paths = 1.0 + 0.09 + 2 * 0.01 + 2 * 0.0036 + 0.0025;
  CHECK(mean_signal_power(cfg, c) == doctest::Approx(56.0 / 64.0 * paths));
  CHECK(c.noise_power == doctest::Approx(56.0 / 64.0 * paths / 100.0));
  CHECK(build_channel(cfg).tracks[2].path_length_m == c.tracks[2].path_length_m);

  cfg.walker.model = WalkerModel::kPoint;
  const ChannelRealization p = build_channel(cfg);
  REQUIRE(p.tracks.size() == 2);
  CHECK(mean_rate(p.tracks[1]) == doctest::Approx(-0.8).epsilon(1e-9));

  ScenarioConfig far = cfg;
  far.static_paths = {{200.0, 1.0}, {200.0 + 16 * kSpeedOfLight / 20e6 + 10.0, 0.5}};
  BasebandSignal s{std::vector<cplx>(800, 1.0), 20e6, 0.0};
  CHECK_THROWS_AS(propagate(s, build_channel(far), {ChannelMode::kFast, 64, 16, 32}), DimensionError);
  BasebandSignal ragged{std::vector<cplx>(81, 1.0), 20e6, 0.0};
  CHECK_THROWS_AS(propagate(ragged, build_channel(cfg), {ChannelMode::kFast, 64, 16, 32}), DimensionError);
}
