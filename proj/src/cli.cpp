#include "mdobf/cli.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "mdobf/io.hpp"
#include "mdobf/pipeline.hpp"

namespace mdobf {
namespace fs = std::filesystem;
namespace {

std::string number_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

bool wants(const RunOptions& opt, OutputFormat f) {
  return std::find(opt.formats.begin(), opt.formats.end(), f) != opt.formats.end();
}

void add_view_metrics(RunReport& r, const std::string& prefix, const std::optional<Spectrogram>& s) {
  if (!s) {
    for (const char* m : {"occupied_bandwidth_hz", "peak_max_abs_hz", "peak_median_hz"})
      r.metrics[prefix + m] = Metric::skipped("view not computed");
    return;
  }
  try {
    r.metrics[prefix + "occupied_bandwidth_hz"] = Metric::of(occupied_bandwidth(*s));
  } catch (const Error& e) {
    r.metrics[prefix + "occupied_bandwidth_hz"] = Metric::skipped(e.what());
  }
  std::vector<double> track = peak_doppler_track(*s);
  if (track.empty()) {
    r.metrics[prefix + "peak_max_abs_hz"] = Metric::skipped("no frames");
    r.metrics[prefix + "peak_median_hz"] = Metric::skipped("no frames");
    return;
  }
  double peak = 0.0;
  for (double f : track) peak = std::max(peak, std::abs(f));
  r.metrics[prefix + "peak_max_abs_hz"] = Metric::of(peak);
  std::nth_element(track.begin(), track.begin() + static_cast<std::ptrdiff_t>(track.size() / 2), track.end());
  r.metrics[prefix + "peak_median_hz"] = Metric::of(track[track.size() / 2]);
}

Metric correlation_metric(const std::optional<Spectrogram>& mine, const std::optional<Spectrogram>& base) {
  if (!mine) return Metric::skipped("view not computed");
  if (!base) return Metric::skipped("baseline has no such spectrogram");
  try {
    return Metric::of(spectrogram_correlation(*mine, *base));
  } catch (const Error& e) {
    return Metric::skipped(e.what());
  }
}

std::optional<Spectrogram> baseline_view(const fs::path& report_path, const RunReport& base, const std::string& key) {
  const auto it = base.artifacts.find(key);
  if (it == base.artifacts.end()) return std::nullopt;
  return read_spectrogram_csv(report_path.parent_path() / it->second);
}

void write_view(RunReport& r, const RunOptions& opt, const std::string& name, const Spectrogram& s) {
  if (wants(opt, OutputFormat::kCsv)) {
    write_spectrogram_csv(opt.out_dir / (name + ".csv"), s);
    r.artifacts[name + "_csv"] = name + ".csv";
  }
  if (wants(opt, OutputFormat::kPgm)) {
    write_spectrogram_pgm(opt.out_dir / (name + ".pgm"), s);
    r.artifacts[name + "_pgm"] = name + ".pgm";
  }
  if (wants(opt, OutputFormat::kBin)) {
    write_matrix_bin(opt.out_dir / (name + ".bin"), s.power);
    r.artifacts[name + "_bin"] = name + ".bin";
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("not a number list: '" + text + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

struct Threshold {
  std::string metric;
  double limit = 0.0;
};

Threshold parse_threshold(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("threshold must look like metric=value: " + text);
  try {
    return {text.substr(0, eq), std::stod(text.substr(eq + 1))};
  } catch (const std::exception&) {
    throw ConfigError("threshold value is not a number: " + text);
  }
}

OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::kCsv;
  if (s == "bin") return OutputFormat::kBin;
  if (s == "pgm") return OutputFormat::kPgm;
  throw ConfigError("unknown format '" + s + "' (csv, bin, pgm)");
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(opt.out_dir);

  PipelineOptions popt;
  popt.keep_rx = opt.dump_iq;
  SimulationResult sim = simulate(cfg, popt);

  RunReport r;
  r.scenario = flatten_scenario(to_json(cfg));

  if (sim.method1) write_view(r, opt, "method1_spectrogram", *sim.method1);
  if (sim.method2) write_view(r, opt, "method2_spectrogram", *sim.method2);
  if (!sim.cfr.t.empty()) {
    if (wants(opt, OutputFormat::kCsv)) {
      write_cfr_csv(opt.out_dir / "cfr.csv", sim.cfr);
      r.artifacts["cfr_csv"] = "cfr.csv";
    }
    if (wants(opt, OutputFormat::kBin)) {
      write_matrix_bin(opt.out_dir / "cfr.bin", sim.cfr.h_hat);
      r.artifacts["cfr_bin"] = "cfr.bin";
    }
  }
  write_tracks_csv(opt.out_dir / "tracks.csv", sim.channel.tracks);
  r.artifacts["tracks_csv"] = "tracks.csv";
  if (opt.dump_iq) {
    write_iq(opt.out_dir / "rx.cf32", sim.rx);
    r.artifacts["rx_iq"] = "rx.cf32";
  }

  add_view_metrics(r, "m1_", sim.method1);
  add_view_metrics(r, "m2_", sim.method2);

  if (sim.link) {
    r.metrics["ber"] = Metric::of(sim.link->ber);
    r.metrics["evm"] = Metric::of(sim.link->evm);
    r.metrics["link_bits"] = Metric::of(static_cast<double>(sim.link->n_bits));
  } else {
    for (const char* m : {"ber", "evm", "link_bits"}) r.metrics[m] = Metric::skipped("link not simulated");
  }

  std::optional<Spectrogram> base1, base2;
  std::string no_baseline = "no baseline given";
  if (opt.baseline_report) {
    const RunReport base = read_report(*opt.baseline_report);
    base1 = baseline_view(*opt.baseline_report, base, "method1_spectrogram_csv");
    base2 = baseline_view(*opt.baseline_report, base, "method2_spectrogram_csv");
    no_baseline = "baseline has no CSV spectrogram";
  } else if (opt.auto_baseline) {
    ScenarioConfig clean = cfg;
    clean.obfuscation = NoObfuscation{};
    PipelineOptions bopt;
    bopt.link = false;
    SimulationResult b = simulate(clean, bopt);
    base1 = std::move(b.method1);
    base2 = std::move(b.method2);
  }
  if (opt.baseline_report || opt.auto_baseline) {
    r.metrics["m1_correlation_vs_baseline"] = correlation_metric(sim.method1, base1);
    r.metrics["m2_correlation_vs_baseline"] = correlation_metric(sim.method2, base2);
  } else {
    r.metrics["m1_correlation_vs_baseline"] = Metric::skipped(no_baseline);
    r.metrics["m2_correlation_vs_baseline"] = Metric::skipped(no_baseline);
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.run["obfuscation"] = obfuscation_name(cfg.obfuscation);
  r.run["n_symbols"] = std::to_string(sim.derived.n_symbols);
  r.run["csi_rate_hz"] = number_text(sim.derived.csi_rate_hz);
  r.run["threads"] = std::to_string(omp_get_max_threads());
  r.run["wall_time_s"] = number_text(wall);
  if (!opt.scenario_label.empty()) r.run["scenario_file"] = opt.scenario_label;
  write_report(opt.out_dir / "report.txt", r);
  return r;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Micro-Doppler obfuscation simulator"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (0: runtime default)")->check(CLI::NonNegativeNumber);

  std::string scenario_path, out_dir, baseline;
  std::vector<std::string> formats{"csv", "pgm"};
  bool auto_baseline = false, dump_iq = false;

  auto* run = app.add_subcommand("run", "Simulate one scenario and write artifacts and a report");
  run->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  auto* base_opt = run->add_option("--baseline", baseline, "Report of a clean run to correlate against");
  run->add_flag("--auto-baseline", auto_baseline, "Simulate the unobfuscated scenario as the baseline")
      ->excludes(base_opt);
  run->add_option("--format", formats, "Artifact formats: csv, bin, pgm (repeatable)")->delimiter(',');
  run->add_flag("--dump-iq", dump_iq, "Also write the received baseband signal");

  std::string report_a, report_b;
  std::vector<std::string> max_t, min_t, delta_t;
  auto* cmp = app.add_subcommand("compare", "Side-by-side metric table of two reports");
  cmp->add_option("report_a", report_a, "Reference report")->required();
  cmp->add_option("report_b", report_b, "Candidate report")->required();
  cmp->add_option("--max", max_t, "metric=value: fail if B's metric exceeds value");
  cmp->add_option("--min", min_t, "metric=value: fail if B's metric is below value");
  cmp->add_option("--max-delta", delta_t, "metric=value: fail if |B - A| exceeds value");

  std::string sweep_scenario, sweep_out, df_list, fm_list, vsp_list;
  auto* sweep = app.add_subcommand("sweep", "Grid of smearing and spoofing settings, one report per point");
  sweep->add_option("--scenario", sweep_scenario, "Base scenario JSON file")->required();
  sweep->add_option("--out", sweep_out, "Output directory")->required();
  sweep->add_option("--delta-f", df_list, "Comma-separated smearing deviations, Hz");
  sweep->add_option("--f-m", fm_list, "Comma-separated smearing rates, Hz");
  sweep->add_option("--v-sp", vsp_list, "Comma-separated spoofing speeds, m/s");
  sweep->add_option("--format", formats, "Artifact formats: csv, bin, pgm (repeatable)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    std::vector<OutputFormat> fmts;
    for (const auto& f : formats) fmts.push_back(parse_format(f));

    if (*run) {
      const ScenarioConfig cfg = load_scenario_file(scenario_path);
      RunOptions opt;
      opt.out_dir = out_dir;
      if (!baseline.empty()) opt.baseline_report = baseline;
      opt.auto_baseline = auto_baseline;
      opt.formats = fmts;
      opt.dump_iq = dump_iq;
      opt.scenario_label = scenario_path;
      const RunReport r = run_scenario(cfg, opt);
      std::cout << r.to_text();
      return kExitOk;
    }

    if (*cmp) {
      const RunReport a = read_report(report_a);
      const RunReport b = read_report(report_b);
      const Comparison c = compare(a, b);
      std::cout << c.to_text();
      int status = kExitOk;
      auto check = [&](const std::vector<std::string>& specs, const char* kind) {
        for (const auto& spec : specs) {
          const Threshold t = parse_threshold(spec);
          const ComparisonRow* row = c.find(t.metric);
          if (!row) throw ConfigError("metric '" + t.metric + "' is in neither report");
          const std::string what = std::string(kind) == "max-delta" ? "delta" : "B";
          const std::optional<double> v = what == "delta" ? (row->delta ? std::optional(std::abs(*row->delta))
                                                                        : std::nullopt)
                                                          : row->b;
          if (!v) throw ConfigError("metric '" + t.metric + "' has no value to check");
          const bool bad = std::string(kind) == "min" ? *v < t.limit : *v > t.limit;
          if (bad) {
            std::cout << "threshold violated: --" << kind << ' ' << spec << " (" << what << " = " << number_text(*v)
                      << ")\n";
            status = kExitThreshold;
          }
        }
      };
      check(max_t, "max");
      check(min_t, "min");
      check(delta_t, "max-delta");
      return status;
    }

    if (*sweep) {
      const ScenarioConfig base = load_scenario_file(sweep_scenario);
      const std::vector<double> dfs = df_list.empty() ? std::vector<double>{} : parse_list(df_list);
      const std::vector<double> fms = fm_list.empty() ? std::vector<double>{} : parse_list(fm_list);
      const std::vector<double> vsps = vsp_list.empty() ? std::vector<double>{} : parse_list(vsp_list);
      if (dfs.empty() != fms.empty()) throw ConfigError("sweep: --delta-f and --f-m must be given together");
      if (dfs.empty() && vsps.empty()) throw ConfigError("sweep: nothing to sweep");

      const fs::path root = sweep_out;
      fs::create_directories(root);
      std::ofstream index(root / "sweep.csv");
      if (!index) throw IoError("cannot write " + (root / "sweep.csv").string());
      index << "point,kind,delta_f_hz,f_m_hz,v_sp_mps,report\n";

      ScenarioConfig clean = base;
      clean.obfuscation = NoObfuscation{};
      RunOptions bopt;
      bopt.out_dir = root / "baseline";
      bopt.formats = fmts;
      if (!wants(bopt, OutputFormat::kCsv)) bopt.formats.push_back(OutputFormat::kCsv);
      bopt.scenario_label = sweep_scenario;
      run_scenario(clean, bopt);
      index << "baseline,none,,,,baseline/report.txt\n";

      std::size_t point = 0;
      auto run_point = [&](const ScenarioConfig& cfg, const std::string& kind, const std::string& df,
                           const std::string& fm, const std::string& vsp) {
        char name[32];
        std::snprintf(name, sizeof name, "point_%03zu", point++);
        RunOptions opt;
        opt.out_dir = root / name;
        opt.baseline_report = root / "baseline" / "report.txt";
        opt.formats = fmts;
        opt.scenario_label = sweep_scenario;
        run_scenario(cfg, opt);
        index << name << ',' << kind << ',' << df << ',' << fm << ',' << vsp << ',' << name << "/report.txt\n";
        std::cerr << name << ' ' << kind << " done\n";
      };
      for (double df : dfs)
        for (double fm : fms) {
          ScenarioConfig cfg = base;
          cfg.obfuscation = SmearParams{df, fm};
          validate(cfg);
          run_point(cfg, "smear", number_text(df), number_text(fm), "");
        }
      for (double v : vsps) {
        ScenarioConfig cfg = base;
        cfg.obfuscation = SpoofParams{v};
        validate(cfg);
        run_point(cfg, "spoof", "", "", number_text(v));
      }
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace mdobf
