#include "mdobf/human_channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdobf/fft.hpp"
#include "mdobf/rng.hpp"

namespace mdobf {
namespace {

constexpr double kKaiserBeta = 8.0;
constexpr std::size_t kInterpPhases = 1024;

std::size_t sample_count(double duration_s, double dt) {
  return static_cast<std::size_t>(std::ceil(duration_s / dt * (1.0 - 1e-12))) + 1;
}

// Polyphase table of a Kaiser-windowed sinc: row p holds the 2H taps for
// fractional offset p / kInterpPhases, tap j at sample floor(u) - H + 1 + j.
class SincTable {
 public:
  explicit SincTable(std::size_t half_width) : h_(half_width), taps_((kInterpPhases + 1) * 2 * half_width) {
    const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
    const auto h = static_cast<double>(h_);
    for (std::size_t p = 0; p <= kInterpPhases; ++p) {
      const double frac = static_cast<double>(p) / kInterpPhases;
      for (std::size_t j = 0; j < 2 * h_; ++j) {
        const double d = frac + h - 1.0 - static_cast<double>(j);  // u - sample index
        double v = 0.0;
        if (std::abs(d) < h) {
          const double r = d / h;
          const double win = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / norm;
          v = (d == 0.0 ? 1.0 : std::sin(kPi * d) / (kPi * d)) * win;
        }
        taps_[p * 2 * h_ + j] = v;
      }
    }
  }

  // Band-limited value of x at fractional sample position u.
  cplx interpolate(std::span<const cplx> x, double u) const {
    const double fl = std::floor(u);
    const double frac = u - fl;
    const double pos = frac * kInterpPhases;
    const auto p = std::min<std::size_t>(static_cast<std::size_t>(pos), kInterpPhases - 1);
    const double w = pos - static_cast<double>(p);
    const double* a = &taps_[p * 2 * h_];
    const double* b = &taps_[(p + 1) * 2 * h_];
    const auto first = static_cast<std::ptrdiff_t>(fl) - static_cast<std::ptrdiff_t>(h_) + 1;
    cplx acc{};
    for (std::size_t j = 0; j < 2 * h_; ++j) {
      const std::ptrdiff_t i = first + static_cast<std::ptrdiff_t>(j);
      if (i < 0 || i >= static_cast<std::ptrdiff_t>(x.size())) continue;
      acc += x[static_cast<std::size_t>(i)] * ((1.0 - w) * a[j] + w * b[j]);
    }
    return acc;
  }

 private:
  std::size_t h_;
  std::vector<double> taps_;
};

BasebandSignal propagate_exact(const BasebandSignal& sig, const ChannelRealization& chan, std::size_t half_width) {
  BasebandSignal out{std::vector<cplx>(sig.samples.size()), sig.sample_rate_hz, sig.t0};
  const SincTable table(half_width);
  const auto n = static_cast<std::ptrdiff_t>(sig.samples.size());
  const double fs = sig.sample_rate_hz;

  #pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double t = sig.time_of(static_cast<std::size_t>(i));
    cplx acc{};
    for (const auto& track : chan.tracks) {
      const double tau = path_delay(track, t);
      const cplx gain = track.reflectivity * std::polar(1.0, -kTwoPi * chan.carrier_hz * tau);
      acc += gain * table.interpolate(sig.samples, static_cast<double>(i) - (tau - chan.sync_delay_s) * fs);
    }
    out.samples[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

BasebandSignal propagate_fast(const BasebandSignal& sig, const ChannelRealization& chan, std::size_t n_sc,
                              std::size_t cp_len) {
  const std::size_t len = n_sc + cp_len;
  if (sig.samples.size() % len != 0)
    throw DimensionError("propagate (fast mode): signal is not a whole number of OFDM symbols");
  if (chan.max_relative_delay_s() * sig.sample_rate_hz > static_cast<double>(cp_len))
    throw DimensionError("propagate (fast mode): channel delay spread exceeds the cyclic prefix");
  BasebandSignal out{std::vector<cplx>(sig.samples.size()), sig.sample_rate_hz, sig.t0};
  const Dft& dft = dft_of_size(n_sc);
  const double df = sig.sample_rate_hz / static_cast<double>(n_sc);
  const auto n_sym = static_cast<std::ptrdiff_t>(sig.samples.size() / len);
  const double scale = 1.0 / static_cast<double>(n_sc);

  #pragma omp parallel
  {
    std::vector<cplx> spec(n_sc), gain(n_sc), steps(n_sc);
    #pragma omp for schedule(static)
    for (std::ptrdiff_t m = 0; m < n_sym; ++m) {
      const std::size_t base = static_cast<std::size_t>(m) * len;
      const double t_mid = sig.time_of(base) + 0.5 * static_cast<double>(len) / sig.sample_rate_hz;
      std::fill(gain.begin(), gain.end(), cplx{});
      for (const auto& track : chan.tracks) {
        const double tau = path_delay(track, t_mid);
        const double rel = tau - chan.sync_delay_s;
        const cplx g0 = track.reflectivity * std::polar(1.0, -kTwoPi * chan.carrier_hz * tau);
        // exp(-j 2 pi k df rel) for k = 0..N/2-1 and k = -N/2..-1 by recurrence.
        const cplx step = std::polar(1.0, -kTwoPi * df * rel);
        cplx pos = g0, neg = g0;
        const cplx back = std::conj(step);
        gain[0] += g0;
        for (std::size_t k = 1; k <= n_sc / 2; ++k) {
          pos *= step;
          neg *= back;
          if (k < n_sc - n_sc / 2) gain[k] += pos;
          gain[n_sc - k] += neg;
        }
      }
      dft.forward({sig.samples.data() + base + cp_len, n_sc}, spec);
      for (std::size_t b = 0; b < n_sc; ++b) spec[b] *= gain[b] * scale;
      cplx* y = out.samples.data() + base;
      dft.inverse(spec, {y + cp_len, n_sc});
      std::copy(y + n_sc, y + len, y);
    }
  }
  return out;
}

}  // namespace

double ScattererTrack::path_length_at(double t) const {
  if (path_length_m.empty()) throw DimensionError("track " + label + " has no samples");
  if (path_length_m.size() == 1 || dt <= 0.0) {
    if (t != 0.0) throw DimensionError("time outside track support");
    return path_length_m.front();
  }
  const double end = t_end();
  if (t < 0.0 || t > end * (1.0 + 1e-12)) throw DimensionError("time outside track support of " + label);
  const double u = std::min(t, end) / dt;
  const auto i = std::min(static_cast<std::size_t>(u), path_length_m.size() - 2);
  const double w = u - static_cast<double>(i);
  return (1.0 - w) * path_length_m[i] + w * path_length_m[i + 1];
}

double ChannelRealization::max_relative_delay_s() const {
  double longest = 0.0;
  for (const auto& t : tracks)
    for (double r : t.path_length_m) longest = std::max(longest, r / kSpeedOfLight - sync_delay_s);
  return longest;
}

ScattererTrack static_track(std::string label, double range_m, cplx gain, double duration_s) {
  if (!(duration_s > 0.0)) throw ConfigError("track duration must be positive");
  if (!(range_m > 0.0)) throw ConfigError("path length must be positive");
  return {std::move(label), duration_s, {range_m, range_m}, gain};
}

ScattererTrack radial_track(std::string label, double start_range_m, double radial_speed, cplx gain,
                            double duration_s, double dt) {
  if (!(duration_s > 0.0)) throw ConfigError("track duration must be positive");
  if (!(dt > 0.0)) throw ConfigError("track sample interval must be positive");
  ScattererTrack t{std::move(label), dt, {}, gain};
  const std::size_t n = sample_count(duration_s, dt);
  t.path_length_m.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.path_length_m[i] = start_range_m - radial_speed * dt * static_cast<double>(i);
    if (!(t.path_length_m[i] > 0.0)) throw ConfigError("radial track reaches zero path length");
  }
  return t;
}

double gait_frequency_hz(const WalkerParams& walker) {
  if (walker.speed <= 0.0) return 0.0;
  // Stride length coeff * sqrt(v) per cycle, so cycles per second v / stride.
  return std::sqrt(walker.speed) / walker.gait.stride_coefficient;
}

std::vector<ScattererTrack> walker_tracks(const WalkerParams& walker, Vec2 tx_pos, Vec2 rx_pos, double duration_s,
                                          double dt, double gait_phase) {
  if (!(duration_s > 0.0)) throw ConfigError("walker_tracks: duration must be positive");
  if (!(dt > 0.0)) throw ConfigError("walker_tracks: dt must be positive");
  const double f_gait = gait_frequency_hz(walker);
  if (f_gait > 0.0 && dt > 1.0 / (2.0 * 4.0 * f_gait))
    throw ConfigError("walker_tracks: dt too coarse for the gait harmonics");

  const double h = walker.heading_deg * kPi / 180.0;
  const Vec2 dir{std::cos(h), std::sin(h)};
  const Vec2 side{-dir.y, dir.x};
  const double stride = walker.speed > 0.0 ? walker.gait.stride_coefficient * std::sqrt(walker.speed) : 0.0;
  const double a_leg = walker.gait.leg_swing_ratio * stride;
  const double a_arm = walker.gait.arm_swing_ratio * stride;
  const double hip = 0.5 * walker.gait.shoulder_offset_m;
  const double shoulder = walker.gait.shoulder_offset_m;

  const std::size_t n = sample_count(duration_s, dt);
  std::vector<ScattererTrack> tracks(kSegmentCount);
  for (std::size_t s = 0; s < kSegmentCount; ++s) {
    tracks[s].label = std::string(segment_label(static_cast<Segment>(s)));
    tracks[s].dt = dt;
    tracks[s].reflectivity = walker.reflectivity[s];
    tracks[s].path_length_m.resize(n);
  }
  auto bistatic = [&](Vec2 p) { return norm(p - tx_pos) + norm(p - rx_pos); };
  for (std::size_t i = 0; i < n; ++i) {
    const double t = dt * static_cast<double>(i);
    const Vec2 torso = walker.start + (walker.speed * t) * dir;
    const double swing = std::sin(kTwoPi * f_gait * t + gait_phase);
    const std::array<Vec2, kSegmentCount> pos = {
        torso,
        torso + (a_leg * swing) * dir + hip * side,
        torso + (-a_leg * swing) * dir + (-hip) * side,
        torso + (-a_arm * swing) * dir + shoulder * side,
        torso + (a_arm * swing) * dir + (-shoulder) * side,
        torso,
    };
    for (std::size_t s = 0; s < kSegmentCount; ++s) tracks[s].path_length_m[i] = bistatic(pos[s]);
  }
  return tracks;
}

double path_delay(const ScattererTrack& track, double t) { return track.path_length_at(t) / kSpeedOfLight; }

cplx cfr(const ChannelRealization& chan, double f, double t) {
  if (chan.tracks.empty()) throw ConfigError("cfr: channel has no paths");
  cplx h{};
  for (const auto& track : chan.tracks) {
    const double tau = path_delay(track, t);
    h += track.reflectivity * std::polar(1.0, -kTwoPi * (chan.carrier_hz * tau + f * (tau - chan.sync_delay_s)));
  }
  return h;
}

double mean_signal_power(const ScenarioConfig& cfg, const ChannelRealization& chan) {
  double paths = 0.0;
  for (const auto& t : chan.tracks) paths += std::norm(t.reflectivity);
  const double used = static_cast<double>(cfg.n_data_subcarriers + cfg.n_pilot_subcarriers);
  return used / static_cast<double>(cfg.n_subcarriers) * paths;
}

ChannelRealization build_channel(const ScenarioConfig& cfg) {
  validate(cfg);
  ChannelRealization chan;
  chan.carrier_hz = cfg.carrier_hz;
  for (std::size_t i = 0; i < cfg.static_paths.size(); ++i)
    chan.tracks.push_back(static_track("static" + std::to_string(i), cfg.static_paths[i].range_m,
                                       cfg.static_paths[i].gain, cfg.duration_s));
  if (cfg.walker_enabled) {
    const auto& w = cfg.walker;
    if (w.model == WalkerModel::kPoint) {
      const double r0 = norm(w.start - cfg.tx_pos) + norm(w.start - cfg.rx_pos);
      chan.tracks.push_back(radial_track("torso", r0, w.speed, w.reflectivity[0], cfg.duration_s, w.track_dt_s));
    } else {
      auto rng = make_rng(cfg.seed, Stream::kWalker);
      const double phase = std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
      for (auto& t : walker_tracks(w, cfg.tx_pos, cfg.rx_pos, cfg.duration_s, w.track_dt_s, phase))
        chan.tracks.push_back(std::move(t));
    }
  }
  double shortest = std::numeric_limits<double>::infinity();
  for (const auto& t : chan.tracks)
    for (double r : t.path_length_m) shortest = std::min(shortest, r);
  chan.sync_delay_s = shortest / kSpeedOfLight;
  if (std::isfinite(cfg.snr_db))
    chan.noise_power = mean_signal_power(cfg, chan) / std::pow(10.0, cfg.snr_db / 10.0);
  return chan;
}

BasebandSignal propagate(const BasebandSignal& sig, const ChannelRealization& chan, const PropagationOptions& opt,
                         std::mt19937_64* rng) {
  if (chan.tracks.empty()) throw ConfigError("propagate: channel has no paths");
  if (chan.max_relative_delay_s() * sig.sample_rate_hz >= static_cast<double>(sig.samples.size()))
    throw DimensionError("propagate: channel delay spread exceeds the signal duration");
  BasebandSignal out = opt.mode == ChannelMode::kExact
                           ? propagate_exact(sig, chan, opt.interp_half_width)
                           : propagate_fast(sig, chan, opt.n_subcarriers, opt.cp_len);
  if (rng && chan.noise_power > 0.0) add_noise_inplace(out.samples, chan.noise_power, *rng);
  return out;
}

void add_noise_inplace(std::span<cplx> samples, double variance, std::mt19937_64& rng) {
  if (!(variance > 0.0)) return;
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * variance));
  for (auto& s : samples) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    s += cplx{re, im};
  }
}

BasebandSignal add_awgn(const BasebandSignal& sig, double snr_db, double signal_power_ref, std::mt19937_64& rng) {
  BasebandSignal out = sig;
  if (std::isinf(snr_db) && snr_db > 0) return out;
  add_noise_inplace(out.samples, signal_power_ref / std::pow(10.0, snr_db / 10.0), rng);
  return out;
}

}  // namespace mdobf
