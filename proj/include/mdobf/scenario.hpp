#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mdobf/types.hpp"

namespace mdobf {

struct SmearParams {
  double delta_f_hz = 200.0;  // peak instantaneous frequency deviation
  double f_m_hz = 10.0;       // modulation rate

  bool operator==(const SmearParams&) const = default;
};

struct SpoofParams {
  double v_sp_mps = 16.0;  // spoofed path-length change speed, signed

  bool operator==(const SpoofParams&) const = default;
};

struct NoObfuscation {
  bool operator==(const NoObfuscation&) const = default;
};

using Obfuscation = std::variant<NoObfuscation, SmearParams, SpoofParams>;

std::string obfuscation_name(const Obfuscation& o);

enum class WalkerModel {
  kBoulic,  // torso + four limbs + head, gait sinusoids
  kPoint,   // one scatterer whose path length shrinks at `speed` (grows if negative)
};

enum class ChannelMode {
  kFast,   // delays frozen at each OFDM symbol midpoint
  kExact,  // delays evaluated per sample, band-limited interpolation
};

// Segments of the simplified walking model, in track order.
enum class Segment { kTorso, kLeftLeg, kRightLeg, kLeftArm, kRightArm, kHead };
inline constexpr std::size_t kSegmentCount = 6;
std::string_view segment_label(Segment s);

struct GaitParams {
  // Limb swing amplitude as a fraction of stride length. Bounded by
  // 1/(2*pi) so that limb speed never exceeds twice the walking speed.
  double leg_swing_ratio = 0.15;
  double arm_swing_ratio = 0.10;
  double stride_coefficient = 1.346;  // stride length = coeff * sqrt(speed)
  double shoulder_offset_m = 0.2;     // lateral offset of limbs from the torso line

  bool operator==(const GaitParams&) const = default;
};

struct WalkerParams {
  WalkerModel model = WalkerModel::kBoulic;
  double speed = 0.8;                 // m/s along heading
  Vec2 start{5.0, 0.0};               // initial torso position, m
  double heading_deg = 180.0;         // direction of travel, degrees from +x
  GaitParams gait;
  std::array<cplx, kSegmentCount> reflectivity{cplx{0.3}, cplx{0.1}, cplx{0.1},
                                               cplx{0.06}, cplx{0.06}, cplx{0.05}};
  double track_dt_s = 1e-3;

  bool operator==(const WalkerParams&) const = default;
};

struct StaticPath {
  double range_m = 0.0;  // total Tx -> Rx path length
  cplx gain{1.0, 0.0};

  bool operator==(const StaticPath&) const = default;
};

enum class WindowKind { kHann, kHamming, kRect };
std::string_view window_name(WindowKind w);

struct StftParams {
  double window_s = 0.5;
  double hop_s = 0.05;
  std::size_t n_fft = 0;  // 0: next power of two >= 4 * window samples
  WindowKind window = WindowKind::kHann;

  bool operator==(const StftParams&) const = default;
};

struct LinkParams {
  std::size_t n_bits = 200'000;          // payload bits for the BER/EVM check
  std::size_t frame_data_symbols = 100;  // data symbols following each preamble

  bool operator==(const LinkParams&) const = default;
};

struct ScenarioConfig {
  double carrier_hz = 5.8e9;
  std::size_t n_subcarriers = 64;
  double subcarrier_spacing_hz = 312'500.0;
  std::size_t n_data_subcarriers = 52;
  std::size_t n_pilot_subcarriers = 4;
  std::size_t cp_len = 16;
  int qam_order = 16;
  double duration_s = 2.0;
  double csi_rate_hz = 1000.0;
  double method1_rate_hz = 2000.0;
  ChannelMode channel_mode = ChannelMode::kFast;
  Vec2 tx_pos{0.0, 200.0};
  Vec2 rx_pos{0.0, 0.0};
  WalkerParams walker;
  bool walker_enabled = true;
  std::vector<StaticPath> static_paths;  // load_scenario fills the LoS path when absent
  Obfuscation obfuscation = NoObfuscation{};
  double snr_db = std::numeric_limits<double>::infinity();
  StftParams stft;
  LinkParams link;
  std::uint64_t seed = 1;

  bool operator==(const ScenarioConfig&) const = default;
};

// Parses a JSON scenario document, fills defaults and validates. Unknown
// keys are rejected. Throws ConfigError.
ScenarioConfig load_scenario(std::string_view text);
ScenarioConfig load_scenario_file(const std::filesystem::path& path);

// Throws ConfigError naming the first violated invariant.
void validate(const ScenarioConfig& cfg);

// Serializes back to the scenario grammar (used for the report echo).
std::string to_json(const ScenarioConfig& cfg);

struct SubcarrierMap {
  std::vector<int> data;   // signed subcarrier indices, ascending
  std::vector<int> pilot;  // signed subcarrier indices, ascending
  std::vector<int> used;   // data and pilots, ascending

  // DFT bin of signed subcarrier k (negative k wrap to the top half).
  static std::size_t bin(int k, std::size_t n) {
    return static_cast<std::size_t>(k < 0 ? k + static_cast<int>(n) : k);
  }
  static int signed_index(std::size_t bin, std::size_t n) {
    return bin < (n + 1) / 2 ? static_cast<int>(bin) : static_cast<int>(bin) - static_cast<int>(n);
  }
};

struct DerivedParams {
  double sample_rate_hz = 0.0;
  double symbol_duration_s = 0.0;  // (N + cp) / (N * df)
  double symbol_rate_hz = 0.0;
  std::size_t samples_per_symbol = 0;
  std::size_t n_symbols = 0;       // whole symbols fitting in duration_s
  std::size_t csi_decimation = 1;  // keep every M-th symbol
  double csi_rate_hz = 0.0;        // symbol_rate / M, the rate actually delivered
  SubcarrierMap subcarriers;
};

// Symbol timing and subcarrier layout. The layout is the 802.11 20 MHz one
// for the defaults: used bins +-1..+-(used/2), DC empty, pilots at
// round(half * (2p+1) / P) on each side (+-7, +-21 for 56 used, 4 pilots).
DerivedParams derive_streams(const ScenarioConfig& cfg);

}  // namespace mdobf
