#pragma once

#include <random>
#include <string>
#include <vector>

#include "mdobf/scenario.hpp"
#include "mdobf/waveform.hpp"

namespace mdobf {

// Total Tx -> scatterer -> Rx path length of one propagation path, sampled
// on a uniform time grid starting at t = 0.
struct ScattererTrack {
  std::string label;
  double dt = 0.0;
  std::vector<double> path_length_m;
  cplx reflectivity{1.0, 0.0};

  double t_end() const { return dt * static_cast<double>(path_length_m.size() - 1); }
  // Linear interpolation; throws DimensionError outside [0, t_end].
  double path_length_at(double t) const;
};

struct ChannelRealization {
  std::vector<ScattererTrack> tracks;
  double carrier_hz = 5.8e9;
  double noise_power = 0.0;   // linear, per complex sample
  double sync_delay_s = 0.0;  // receiver timing reference (earliest arrival)

  double max_relative_delay_s() const;
};

ScattererTrack static_track(std::string label, double range_m, cplx gain, double duration_s);

// One scatterer whose path length falls at `radial_speed` m/s (rises if
// negative).
ScattererTrack radial_track(std::string label, double start_range_m, double radial_speed, cplx gain,
                            double duration_s, double dt);

// Simplified walking model: the torso moves at constant speed along the
// heading, each limb oscillates along the heading at the gait frequency
// sqrt(speed) / stride_coefficient with amplitude ratio * stride length,
// legs in antiphase and each arm opposite to the leg on its side. One track
// per Segment, in enum order. `gait_phase` is the initial phase in radians.
std::vector<ScattererTrack> walker_tracks(const WalkerParams& walker, Vec2 tx_pos, Vec2 rx_pos,
                                          double duration_s, double dt, double gait_phase = 0.0);

double gait_frequency_hz(const WalkerParams& walker);

// Propagation delay R(t) / c.
double path_delay(const ScattererTrack& track, double t);

// H(f, t) = sum_l h_l exp(-j 2 pi f_c tau_l) exp(-j 2 pi f (tau_l - sync)),
// f relative to the carrier. With sync_delay_s = 0 this is the plain
// carrier-inclusive sum over paths.
cplx cfr(const ChannelRealization& chan, double f, double t);

// Tracks for the scenario (static paths first, then walker segments) plus
// noise power from snr_db against the mean received power.
ChannelRealization build_channel(const ScenarioConfig& cfg);

// Mean received power per sample without noise: occupied-band fraction of
// the unit-energy constellation times the incoherent sum of path powers.
double mean_signal_power(const ScenarioConfig& cfg, const ChannelRealization& chan);

struct PropagationOptions {
  ChannelMode mode = ChannelMode::kFast;
  std::size_t n_subcarriers = 64;  // symbol layout, used by fast mode
  std::size_t cp_len = 16;
  std::size_t interp_half_width = 32;  // windowed-sinc half width, exact mode
};

// y(t) = sum_l h_l exp(-j 2 pi f_c tau_l(t)) x(t - (tau_l(t) - sync)).
// Exact mode evaluates tau per sample and interpolates x with a
// Kaiser-windowed sinc. Fast mode freezes tau at each symbol midpoint and
// applies the delay as a per-subcarrier phase ramp on the symbol's FFT
// window, then rebuilds the cyclic prefix; it requires whole symbols and a
// delay spread below the prefix. Noise is added when `rng` is given and the
// channel has nonzero noise power.
BasebandSignal propagate(const BasebandSignal& sig, const ChannelRealization& chan,
                         const PropagationOptions& opt, std::mt19937_64* rng = nullptr);

// Adds i.i.d. circular complex Gaussian noise with variance
// signal_power_ref / 10^(snr_db / 10). snr_db = +inf leaves sig untouched.
BasebandSignal add_awgn(const BasebandSignal& sig, double snr_db, double signal_power_ref, std::mt19937_64& rng);
void add_noise_inplace(std::span<cplx> samples, double variance, std::mt19937_64& rng);

}  // namespace mdobf
