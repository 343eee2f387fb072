#include "mdobf/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mdobf {
namespace {

using json = nlohmann::json;

// Reads the members of one JSON object and rejects anything it was not
// asked for.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  const json& at(const std::string& key) { return obj_.at(key); }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    return v.get<double>();
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
      throw ConfigError(where(key) + ": expected a non-negative integer");
    if (v.get<long long>() < 0) throw ConfigError(where(key) + ": expected a non-negative integer");
    return v.get<std::size_t>();
  }

  std::string text(const std::string& key, std::string fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    return v.get<std::string>();
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return v.get<bool>();
  }

  void finish() const {
    for (const auto& [key, _] : obj_.items())
      if (!seen_.count(key)) throw ConfigError(where(key) + ": unknown key");
  }

  std::string where(const std::string& key = {}) const {
    if (key.empty()) return path_.empty() ? std::string("<root>") : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

cplx parse_complex(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError(where + ": expected a number or [re, im]");
}

Vec2 parse_vec2(const json& v, const std::string& where) {
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError(where + ": expected [x, y]");
}

constexpr std::array<const char*, kSegmentCount> kSegmentKeys = {
    "torso", "left_leg", "right_leg", "left_arm", "right_arm", "head"};

WalkerParams parse_walker(const json& node) {
  WalkerParams w;
  ObjectReader r(node, "walker");
  const std::string model = r.text("model", "boulic");
  if (model == "boulic")
    w.model = WalkerModel::kBoulic;
  else if (model == "point")
    w.model = WalkerModel::kPoint;
  else
    throw ConfigError("walker.model: expected \"boulic\" or \"point\"");
  w.speed = r.number("speed", w.speed);
  if (r.has("start")) w.start = parse_vec2(r.at("start"), "walker.start");
  w.heading_deg = r.number("heading_deg", w.heading_deg);
  w.track_dt_s = r.number("track_dt_s", w.track_dt_s);
  if (r.has("gait")) {
    ObjectReader g(r.at("gait"), "walker.gait");
    w.gait.leg_swing_ratio = g.number("leg_swing_ratio", w.gait.leg_swing_ratio);
    w.gait.arm_swing_ratio = g.number("arm_swing_ratio", w.gait.arm_swing_ratio);
    w.gait.stride_coefficient = g.number("stride_coefficient", w.gait.stride_coefficient);
    w.gait.shoulder_offset_m = g.number("shoulder_offset_m", w.gait.shoulder_offset_m);
    g.finish();
  }
  if (r.has("reflectivity")) {
    ObjectReader g(r.at("reflectivity"), "walker.reflectivity");
    for (std::size_t i = 0; i < kSegmentCount; ++i)
      if (g.has(kSegmentKeys[i]))
        w.reflectivity[i] = parse_complex(g.at(kSegmentKeys[i]), g.where(kSegmentKeys[i]));
    g.finish();
  }
  r.finish();
  return w;
}

Obfuscation parse_obfuscation(const json& node) {
  if (node.is_string()) {
    if (node.get<std::string>() == "none") return NoObfuscation{};
    throw ConfigError("obfuscation: a bare string may only be \"none\"");
  }
  ObjectReader r(node, "obfuscation");
  const std::string kind = r.text("kind", "");
  Obfuscation out;
  if (kind == "none") {
    out = NoObfuscation{};
  } else if (kind == "smear") {
    SmearParams p;
    p.delta_f_hz = r.number("delta_f_hz", p.delta_f_hz);
    p.f_m_hz = r.number("f_m_hz", p.f_m_hz);
    out = p;
  } else if (kind == "spoof") {
    SpoofParams p;
    p.v_sp_mps = r.number("v_sp_mps", p.v_sp_mps);
    out = p;
  } else {
    throw ConfigError("obfuscation.kind: expected \"none\", \"smear\" or \"spoof\"");
  }
  r.finish();
  return out;
}

StftParams parse_stft(const json& node) {
  StftParams s;
  ObjectReader r(node, "stft");
  s.window_s = r.number("window_s", s.window_s);
  s.hop_s = r.number("hop_s", s.hop_s);
  s.n_fft = r.count("n_fft", s.n_fft);
  const std::string w = r.text("window", "hann");
  if (w == "hann")
    s.window = WindowKind::kHann;
  else if (w == "hamming")
    s.window = WindowKind::kHamming;
  else if (w == "rect")
    s.window = WindowKind::kRect;
  else
    throw ConfigError("stft.window: expected \"hann\", \"hamming\" or \"rect\"");
  r.finish();
  return s;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid scenario: " + what);
}

json complex_json(cplx v) { return json::array({v.real(), v.imag()}); }

}  // namespace

std::string obfuscation_name(const Obfuscation& o) {
  if (std::holds_alternative<SmearParams>(o)) return "smear";
  if (std::holds_alternative<SpoofParams>(o)) return "spoof";
  return "none";
}

std::string_view segment_label(Segment s) {
  switch (s) {
    case Segment::kTorso: return "torso";
    case Segment::kLeftLeg: return "left_leg";
    case Segment::kRightLeg: return "right_leg";
    case Segment::kLeftArm: return "left_arm";
    case Segment::kRightArm: return "right_arm";
    case Segment::kHead: return "head";
  }
  return "?";
}

std::string_view window_name(WindowKind w) {
  switch (w) {
    case WindowKind::kHann: return "hann";
    case WindowKind::kHamming: return "hamming";
    case WindowKind::kRect: return "rect";
  }
  return "?";
}

ScenarioConfig load_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario parse error: ") + e.what());
  }

  ScenarioConfig cfg;
  ObjectReader r(doc, "");
  cfg.carrier_hz = r.number("carrier_hz", cfg.carrier_hz);
  cfg.n_subcarriers = r.count("n_subcarriers", cfg.n_subcarriers);
  cfg.subcarrier_spacing_hz = r.number("subcarrier_spacing_hz", cfg.subcarrier_spacing_hz);
  cfg.n_data_subcarriers = r.count("n_data_subcarriers", cfg.n_data_subcarriers);
  cfg.n_pilot_subcarriers = r.count("n_pilot_subcarriers", cfg.n_pilot_subcarriers);
  cfg.cp_len = r.count("cp_len", cfg.cp_len);
  cfg.qam_order = static_cast<int>(r.count("qam_order", static_cast<std::size_t>(cfg.qam_order)));
  cfg.duration_s = r.number("duration_s", cfg.duration_s);
  cfg.csi_rate_hz = r.number("csi_rate_hz", cfg.csi_rate_hz);
  cfg.method1_rate_hz = r.number("method1_rate_hz", cfg.method1_rate_hz);

  const std::string mode = r.text("channel_mode", "fast");
  if (mode == "fast")
    cfg.channel_mode = ChannelMode::kFast;
  else if (mode == "exact")
    cfg.channel_mode = ChannelMode::kExact;
  else
    throw ConfigError("channel_mode: expected \"fast\" or \"exact\"");

  if (r.has("geometry")) {
    ObjectReader g(r.at("geometry"), "geometry");
    if (g.has("tx")) cfg.tx_pos = parse_vec2(g.at("tx"), "geometry.tx");
    if (g.has("rx")) cfg.rx_pos = parse_vec2(g.at("rx"), "geometry.rx");
    g.finish();
  }

  if (r.has("walker")) {
    const json& w = r.at("walker");
    if (w.is_null()) {
      cfg.walker_enabled = false;
    } else {
      json copy = w;
      if (copy.is_object() && copy.contains("enabled")) {
        if (!copy["enabled"].is_boolean()) throw ConfigError("walker.enabled: expected true or false");
        cfg.walker_enabled = copy["enabled"].get<bool>();
        copy.erase("enabled");
      }
      cfg.walker = parse_walker(copy);
    }
  }

  if (r.has("static_paths")) {
    const json& paths = r.at("static_paths");
    if (!paths.is_array()) throw ConfigError("static_paths: expected an array");
    for (std::size_t i = 0; i < paths.size(); ++i) {
      ObjectReader p(paths[i], "static_paths[" + std::to_string(i) + "]");
      StaticPath sp;
      sp.range_m = p.number("range_m", std::nan(""));
      if (!p.has("range_m")) throw ConfigError(p.where("range_m") + ": required");
      if (p.has("gain")) sp.gain = parse_complex(p.at("gain"), p.where("gain"));
      p.finish();
      cfg.static_paths.push_back(sp);
    }
  } else {
    cfg.static_paths.push_back({norm(cfg.tx_pos - cfg.rx_pos), cplx{1.0, 0.0}});
  }

  if (r.has("obfuscation")) cfg.obfuscation = parse_obfuscation(r.at("obfuscation"));

  if (r.has("snr_db")) {
    const json& v = r.at("snr_db");
    if (v.is_number()) {
      cfg.snr_db = v.get<double>();
    } else if (v.is_string() && v.get<std::string>() == "inf") {
      cfg.snr_db = std::numeric_limits<double>::infinity();
    } else {
      throw ConfigError("snr_db: expected a number or \"inf\"");
    }
  }

  if (r.has("stft")) cfg.stft = parse_stft(r.at("stft"));

  if (r.has("link")) {
    ObjectReader l(r.at("link"), "link");
    cfg.link.n_bits = l.count("n_bits", cfg.link.n_bits);
    cfg.link.frame_data_symbols = l.count("frame_data_symbols", cfg.link.frame_data_symbols);
    l.finish();
  }

  if (r.has("seed")) {
    const json& v = r.at("seed");
    if (!v.is_number_unsigned() && !v.is_number_integer()) throw ConfigError("seed: expected an integer");
    if (v.is_number_integer() && v.get<long long>() < 0) throw ConfigError("seed: must be non-negative");
    cfg.seed = v.get<std::uint64_t>();
  }
  r.finish();

  validate(cfg);
  return cfg;
}

ScenarioConfig load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str());
}

void validate(const ScenarioConfig& cfg) {
  require(std::isfinite(cfg.carrier_hz) && cfg.carrier_hz > 0, "carrier_hz must be positive");
  require(cfg.n_subcarriers >= 4, "n_subcarriers must be at least 4");
  require(std::isfinite(cfg.subcarrier_spacing_hz) && cfg.subcarrier_spacing_hz > 0,
          "subcarrier_spacing_hz must be positive");
  const std::size_t used = cfg.n_data_subcarriers + cfg.n_pilot_subcarriers;
  require(used <= cfg.n_subcarriers, "n_data_subcarriers + n_pilot_subcarriers must not exceed n_subcarriers");
  require(cfg.n_data_subcarriers >= 1, "n_data_subcarriers must be at least 1");
  require(used % 2 == 0, "n_data_subcarriers + n_pilot_subcarriers must be even (symmetric layout)");
  require(cfg.n_pilot_subcarriers % 2 == 0, "n_pilot_subcarriers must be even (symmetric layout)");
  require(used / 2 < cfg.n_subcarriers / 2, "used subcarriers leave no room for the DC bin");
  require(cfg.cp_len <= cfg.n_subcarriers, "cp_len must not exceed n_subcarriers");
  require(cfg.qam_order == 4 || cfg.qam_order == 16 || cfg.qam_order == 64,
          "qam_order must be 4, 16 or 64");
  require(std::isfinite(cfg.duration_s) && cfg.duration_s > 0, "duration_s must be positive");

  const double fs = static_cast<double>(cfg.n_subcarriers) * cfg.subcarrier_spacing_hz;
  const double symbol_rate = fs / static_cast<double>(cfg.n_subcarriers + cfg.cp_len);
  require(std::isfinite(cfg.csi_rate_hz) && cfg.csi_rate_hz > 0, "csi_rate_hz must be positive");
  require(cfg.csi_rate_hz <= symbol_rate, "csi_rate_hz must not exceed the OFDM symbol rate");
  require(std::isfinite(cfg.method1_rate_hz) && cfg.method1_rate_hz > 0 && cfg.method1_rate_hz <= fs,
          "method1_rate_hz must be in (0, sample rate]");
  const double m1_factor = fs / cfg.method1_rate_hz;
  require(std::abs(m1_factor - std::round(m1_factor)) < 1e-9 * m1_factor,
          "sample rate / method1_rate_hz must be an integer");

  require(std::isfinite(cfg.tx_pos.x) && std::isfinite(cfg.tx_pos.y) && std::isfinite(cfg.rx_pos.x) &&
              std::isfinite(cfg.rx_pos.y),
          "geometry positions must be finite");

  const auto& w = cfg.walker;
  if (cfg.walker_enabled) {
    require(std::isfinite(w.speed), "walker.speed must be finite");
    require(w.model == WalkerModel::kPoint || w.speed >= 0, "walker.speed must be >= 0 for the boulic model");
    require(std::isfinite(w.heading_deg), "walker.heading_deg must be finite");
    require(std::isfinite(w.track_dt_s) && w.track_dt_s > 0, "walker.track_dt_s must be positive");
    require(w.track_dt_s <= cfg.duration_s, "walker.track_dt_s must not exceed duration_s");
    const double max_ratio = 1.0 / kTwoPi;
    require(w.gait.leg_swing_ratio >= 0 && w.gait.leg_swing_ratio <= max_ratio,
            "walker.gait.leg_swing_ratio must be in [0, 1/(2 pi)]");
    require(w.gait.arm_swing_ratio >= 0 && w.gait.arm_swing_ratio <= max_ratio,
            "walker.gait.arm_swing_ratio must be in [0, 1/(2 pi)]");
    require(std::isfinite(w.gait.stride_coefficient) && w.gait.stride_coefficient > 0,
            "walker.gait.stride_coefficient must be positive");
    require(std::isfinite(w.gait.shoulder_offset_m) && w.gait.shoulder_offset_m >= 0,
            "walker.gait.shoulder_offset_m must be >= 0");
    for (const auto& g : w.reflectivity)
      require(std::isfinite(g.real()) && std::isfinite(g.imag()), "walker.reflectivity must be finite");
  }
  require(cfg.walker_enabled || !cfg.static_paths.empty(), "the channel needs at least one path");
  for (const auto& p : cfg.static_paths) {
    require(std::isfinite(p.range_m) && p.range_m > 0, "static path range_m must be positive");
    require(std::isfinite(p.gain.real()) && std::isfinite(p.gain.imag()), "static path gain must be finite");
  }

  if (const auto* s = std::get_if<SmearParams>(&cfg.obfuscation)) {
    require(std::isfinite(s->f_m_hz) && s->f_m_hz > 0, "obfuscation.f_m_hz must be positive");
    require(std::isfinite(s->delta_f_hz) && s->delta_f_hz >= 0, "obfuscation.delta_f_hz must be >= 0");
    require(fs >= 10.0 * (s->delta_f_hz + s->f_m_hz), "smearing bandwidth too wide for the sample rate");
  }
  if (const auto* s = std::get_if<SpoofParams>(&cfg.obfuscation))
    require(std::isfinite(s->v_sp_mps), "obfuscation.v_sp_mps must be finite");

  require(!std::isnan(cfg.snr_db) && cfg.snr_db > -std::numeric_limits<double>::infinity(),
          "snr_db must be a number or +inf");
  require(std::isfinite(cfg.stft.window_s) && cfg.stft.window_s > 0, "stft.window_s must be positive");
  require(std::isfinite(cfg.stft.hop_s) && cfg.stft.hop_s > 0, "stft.hop_s must be positive");
  require(cfg.link.frame_data_symbols >= 1, "link.frame_data_symbols must be at least 1");
}

std::string to_json(const ScenarioConfig& cfg) {
  json doc;
  doc["carrier_hz"] = cfg.carrier_hz;
  doc["n_subcarriers"] = cfg.n_subcarriers;
  doc["subcarrier_spacing_hz"] = cfg.subcarrier_spacing_hz;
  doc["n_data_subcarriers"] = cfg.n_data_subcarriers;
  doc["n_pilot_subcarriers"] = cfg.n_pilot_subcarriers;
  doc["cp_len"] = cfg.cp_len;
  doc["qam_order"] = cfg.qam_order;
  doc["duration_s"] = cfg.duration_s;
  doc["csi_rate_hz"] = cfg.csi_rate_hz;
  doc["method1_rate_hz"] = cfg.method1_rate_hz;
  doc["channel_mode"] = cfg.channel_mode == ChannelMode::kFast ? "fast" : "exact";
  doc["geometry"] = {{"tx", {cfg.tx_pos.x, cfg.tx_pos.y}}, {"rx", {cfg.rx_pos.x, cfg.rx_pos.y}}};

  const auto& w = cfg.walker;
  json walker;
  walker["enabled"] = cfg.walker_enabled;
  walker["model"] = w.model == WalkerModel::kBoulic ? "boulic" : "point";
  walker["speed"] = w.speed;
  walker["start"] = {w.start.x, w.start.y};
  walker["heading_deg"] = w.heading_deg;
  walker["track_dt_s"] = w.track_dt_s;
  walker["gait"] = {{"leg_swing_ratio", w.gait.leg_swing_ratio},
                    {"arm_swing_ratio", w.gait.arm_swing_ratio},
                    {"stride_coefficient", w.gait.stride_coefficient},
                    {"shoulder_offset_m", w.gait.shoulder_offset_m}};
  json refl;
  for (std::size_t i = 0; i < kSegmentCount; ++i) refl[kSegmentKeys[i]] = complex_json(w.reflectivity[i]);
  walker["reflectivity"] = refl;
  doc["walker"] = walker;

  json paths = json::array();
  for (const auto& p : cfg.static_paths) paths.push_back({{"range_m", p.range_m}, {"gain", complex_json(p.gain)}});
  doc["static_paths"] = paths;

  if (const auto* s = std::get_if<SmearParams>(&cfg.obfuscation))
    doc["obfuscation"] = {{"kind", "smear"}, {"delta_f_hz", s->delta_f_hz}, {"f_m_hz", s->f_m_hz}};
  else if (const auto* s = std::get_if<SpoofParams>(&cfg.obfuscation))
    doc["obfuscation"] = {{"kind", "spoof"}, {"v_sp_mps", s->v_sp_mps}};
  else
    doc["obfuscation"] = {{"kind", "none"}};

  if (std::isinf(cfg.snr_db))
    doc["snr_db"] = "inf";
  else
    doc["snr_db"] = cfg.snr_db;
  doc["stft"] = {{"window_s", cfg.stft.window_s},
                 {"hop_s", cfg.stft.hop_s},
                 {"n_fft", cfg.stft.n_fft},
                 {"window", std::string(window_name(cfg.stft.window))}};
  doc["link"] = {{"n_bits", cfg.link.n_bits}, {"frame_data_symbols", cfg.link.frame_data_symbols}};
  doc["seed"] = cfg.seed;
  return doc.dump(2);
}

DerivedParams derive_streams(const ScenarioConfig& cfg) {
  validate(cfg);
  DerivedParams d;
  const double n = static_cast<double>(cfg.n_subcarriers);
  d.sample_rate_hz = n * cfg.subcarrier_spacing_hz;
  d.samples_per_symbol = cfg.n_subcarriers + cfg.cp_len;
  d.symbol_duration_s = static_cast<double>(d.samples_per_symbol) / d.sample_rate_hz;
  d.symbol_rate_hz = 1.0 / d.symbol_duration_s;
  // Tolerate representation error so that 2 s / 4 us gives 500000.
  d.n_symbols = static_cast<std::size_t>(std::floor(cfg.duration_s / d.symbol_duration_s * (1.0 + 1e-12)));
  const double ratio = d.symbol_rate_hz / cfg.csi_rate_hz;
  if (ratio < 1.0 - 1e-12) throw ConfigError("csi_rate_hz exceeds the OFDM symbol rate");
  d.csi_decimation = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ratio)));
  d.csi_rate_hz = d.symbol_rate_hz / static_cast<double>(d.csi_decimation);

  const int half = static_cast<int>((cfg.n_data_subcarriers + cfg.n_pilot_subcarriers) / 2);
  const int pilots_per_side = static_cast<int>(cfg.n_pilot_subcarriers / 2);
  std::set<int> pilot_pos;
  for (int p = 0; p < pilots_per_side; ++p)
    pilot_pos.insert(static_cast<int>(std::lround(half * (2.0 * p + 1.0) / (2.0 * pilots_per_side))));
  if (static_cast<int>(pilot_pos.size()) != pilots_per_side)
    throw ConfigError("invalid scenario: too many pilots for the used band");
  for (int k = -half; k <= half; ++k) {
    if (k == 0) continue;
    d.subcarriers.used.push_back(k);
    if (pilot_pos.count(std::abs(k)))
      d.subcarriers.pilot.push_back(k);
    else
      d.subcarriers.data.push_back(k);
  }
  return d;
}

}  // namespace mdobf
