#include "mdobf/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mdobf/io.hpp"

namespace mdobf {
namespace {

std::string number_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_opt(const std::optional<double>& v) { return v ? number_text(*v) : std::string("-"); }

// Scenario fields whose mismatch makes two runs incomparable.
const std::set<std::string> kStructuralKeys = {
    "scenario.n_subcarriers", "scenario.subcarrier_spacing_hz", "scenario.cp_len", "scenario.carrier_hz",
    "scenario.duration_s",    "scenario.csi_rate_hz",           "scenario.qam_order"};

}  // namespace

std::string RunReport::to_text() const {
  std::ostringstream out;
  out << "# mdobf run report\n";
  out << "report.version = 1\n";
  for (const auto& [k, v] : scenario) out << "scenario." << k << " = " << v << '\n';
  for (const auto& [k, m] : metrics) {
    out << "metric." << k << " = ";
    if (m.value)
      out << number_text(*m.value);
    else
      out << "skipped: " << m.skipped_reason;
    out << '\n';
  }
  for (const auto& [k, v] : artifacts) out << "artifact." << k << " = " << v << '\n';
  for (const auto& [k, v] : run) out << "run." << k << " = " << v << '\n';
  return out.str();
}

RunReport RunReport::parse(const std::string& text) {
  RunReport r;
  std::istringstream in(text);
  std::string line;
  bool versioned = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find(" = ");
    if (eq == std::string::npos) throw Error("report line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = t.substr(0, eq);
    const std::string value = trim(t.substr(eq + 3));
    const auto dot = key.find('.');
    const std::string group = key.substr(0, dot);
    const std::string name = dot == std::string::npos ? std::string() : key.substr(dot + 1);
    if (key == "report.version") {
      if (value != "1") throw Error("unsupported report version " + value);
      versioned = true;
    } else if (group == "scenario") {
      r.scenario[name] = value;
    } else if (group == "metric") {
      if (value.rfind("skipped", 0) == 0) {
        const auto colon = value.find(':');
        r.metrics[name] = Metric::skipped(colon == std::string::npos ? std::string() : trim(value.substr(colon + 1)));
      } else {
        try {
          r.metrics[name] = Metric::of(std::stod(value));
        } catch (const std::exception&) {
          throw Error("report line " + std::to_string(lineno) + ": metric is not a number");
        }
      }
    } else if (group == "artifact") {
      r.artifacts[name] = value;
    } else if (group == "run") {
      r.run[name] = value;
    } else {
      throw Error("report line " + std::to_string(lineno) + ": unknown key group '" + group + "'");
    }
  }
  if (!versioned) throw Error("report has no report.version line");
  return r;
}

void write_report(const std::filesystem::path& path, const RunReport& r) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << r.to_text();
  if (!out) throw IoError("write failed for " + path.string());
}

RunReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return RunReport::parse(ss.str());
}

std::map<std::string, std::string> flatten_scenario(const std::string& json_text) {
  const auto flat = nlohmann::json::parse(json_text).flatten();
  std::map<std::string, std::string> out;
  for (const auto& [ptr, v] : flat.items()) {
    std::string key = ptr.substr(1);
    for (auto& c : key)
      if (c == '/') c = '.';
    if (v.is_string())
      out[key] = v.get<std::string>();
    else if (v.is_number_float())
      out[key] = number_text(v.get<double>());
    else
      out[key] = v.dump();
  }
  return out;
}

Comparison compare(const RunReport& a, const RunReport& b) {
  Comparison c;
  for (const auto& key : kStructuralKeys) {
    const std::string k = key.substr(std::string("scenario.").size());
    const auto ia = a.scenario.find(k), ib = b.scenario.find(k);
    const std::string va = ia == a.scenario.end() ? "<missing>" : ia->second;
    const std::string vb = ib == b.scenario.end() ? "<missing>" : ib->second;
    if (va != vb) c.warnings.push_back("scenarios differ in " + k + " (" + va + " vs " + vb + "); comparison is partial");
  }
  std::set<std::string> names;
  for (const auto& [k, _] : a.metrics) names.insert(k);
  for (const auto& [k, _] : b.metrics) names.insert(k);
  for (const auto& name : names) {
    ComparisonRow row;
    row.metric = name;
    const auto ia = a.metrics.find(name), ib = b.metrics.find(name);
    if (ia != a.metrics.end()) row.a = ia->second.value;
    if (ib != b.metrics.end()) row.b = ib->second.value;
    if (row.a && row.b)
      row.delta = *row.b - *row.a;
    else if (ia == a.metrics.end() || ib == b.metrics.end())
      row.note = "missing in " + std::string(ia == a.metrics.end() ? "A" : "B");
    else
      row.note = "skipped";
    c.rows.push_back(row);
  }
  return c;
}

std::string Comparison::to_text() const {
  std::ostringstream out;
  for (const auto& w : warnings) out << "warning: " << w << '\n';
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-36s %16s %16s %16s  %s\n", "metric", "A", "B", "B-A", "note");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-36s %16s %16s %16s  %s\n", r.metric.c_str(), fmt_opt(r.a).c_str(),
                  fmt_opt(r.b).c_str(), fmt_opt(r.delta).c_str(), r.note.c_str());
    out << buf;
  }
  return out.str();
}

const ComparisonRow* Comparison::find(const std::string& metric) const {
  for (const auto& r : rows)
    if (r.metric == metric) return &r;
  return nullptr;
}

}  // namespace mdobf
