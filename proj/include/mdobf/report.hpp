#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mdobf {

// A metric either carries a value or the reason it was not computed.
struct Metric {
  std::optional<double> value;
  std::string skipped_reason;

  static Metric of(double v) { return {v, {}}; }
  static Metric skipped(std::string why) { return {std::nullopt, std::move(why)}; }
};

// Report file: UTF-8 text, one "key = value" per line, '#' starts a comment.
// Key groups:
//   report.version          format version (1)
//   scenario.<path>         flattened scenario echo, e.g. scenario.walker.speed
//   metric.<name>           number, or "skipped: <reason>"
//   artifact.<name>         path relative to the report's directory
//   run.<name>              run facts (wall_time_s, threads)
struct RunReport {
  std::map<std::string, std::string> scenario;
  std::map<std::string, Metric> metrics;
  std::map<std::string, std::string> artifacts;
  std::map<std::string, std::string> run;

  std::string to_text() const;
  static RunReport parse(const std::string& text);
};

void write_report(const std::filesystem::path& path, const RunReport& r);
RunReport read_report(const std::filesystem::path& path);

// Flattens a scenario JSON document into dotted keys.
std::map<std::string, std::string> flatten_scenario(const std::string& json_text);

struct ComparisonRow {
  std::string metric;
  std::optional<double> a;
  std::optional<double> b;
  std::optional<double> delta;  // b - a when both present
  std::string note;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  std::vector<std::string> warnings;  // e.g. scenarios differ in key fields

  std::string to_text() const;
  const ComparisonRow* find(const std::string& metric) const;
};

Comparison compare(const RunReport& a, const RunReport& b);

}  // namespace mdobf
