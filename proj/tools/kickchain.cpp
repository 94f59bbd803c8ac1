#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kickchain/csv.hpp"
#include "kickchain/experiment.hpp"
#include "kickchain/manifest.hpp"
#include "kickchain/oracle_check.hpp"

namespace fs = std::filesystem;
using namespace kickchain;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kBadConfig = 2;
constexpr int kNumerical = 3;
constexpr int kCollision = 4;

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  bool overwrite = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("config", c.config, "experiment YAML file")->required()->check(CLI::ExistingFile);
  app->add_option("--set", c.sets, "override a config key, e.g. --set chain.J=0.1")->take_all();
  app->add_option("--out", c.out, "output directory (overrides output.directory)");
  app->add_flag("--overwrite", c.overwrite, "replace files in a non-empty output directory");
}

std::pair<std::string, std::string> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(s, "expected key=value");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

std::string apply_sets(std::string text, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto [key, value] = split_assignment(s);
    text = override_key(text, key, value);
  }
  return text;
}

ExperimentConfig load(const Common& c, std::string* text_out = nullptr) {
  const std::string text = apply_sets(io::read_file(c.config), c.sets);
  ExperimentConfig cfg = parse_config(text, fs::path(c.config).parent_path());
  if (!c.out.empty()) cfg.output.directory = c.out;
  if (c.overwrite) cfg.output.overwrite = true;
  if (text_out) *text_out = text;
  return cfg;
}

void summarize(const RunResult& r) {
  std::printf("wrote %zu files to %s\n", r.files.size(), r.directory.string().c_str());
  std::printf("max norm drift: %.3g\n", r.max_norm_drift);
  if (r.report.observed_rise) {
    std::printf("entropy rise (5%%) at kick %zu\n", *r.report.observed_rise);
  }
  if (r.report.has_bath) std::printf("predicted horizon n*: %s\n", io::format_number(r.report.n_star).c_str());
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string item = s.substr(start, comma - start);
    if (!item.empty()) out.push_back(std::stod(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    out.push_back(s.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string dir_label(std::string s) {
  for (char& ch : s) {
    if (ch == '/' || ch == ' ' || ch == ':' || ch == '[' || ch == ']' || ch == ',') ch = '_';
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kicked spin chain driven by a classical chaotic bath"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  // simulate
  Common sim;
  auto* simulate = app.add_subcommand("simulate", "run an experiment and write its output bundle");
  add_common(simulate, sim);

  // predict
  Common pre;
  bool pre_csv = false;
  auto* predict_cmd = app.add_subcommand("predict", "print the horizon and transmission predictions");
  predict_cmd->add_option("config", pre.config, "experiment YAML file")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--set", pre.sets, "override a config key")->take_all();
  predict_cmd->add_flag("--csv", pre_csv, "print CSV instead of text");

  // control
  Common ctl;
  std::string ctl_preset;
  int ctl_target = 0;
  int ctl_blocked = 0;
  std::size_t ctl_duration = 0;
  std::string ctl_timing;
  double dist_spread = -1.0;
  std::uint64_t dist_seed = 0;
  std::string export_path;
  bool export_only = false;
  auto* control = app.add_subcommand("control", "build a kick schedule and run it on the chain");
  add_common(control, ctl);
  control->add_option("--preset", ctl_preset, "one_way, freeze, instant or file")
      ->check(CLI::IsMember({"one_way", "freeze", "instant", "file"}));
  control->add_option("--target", ctl_target, "spin to keep excited (1-based)");
  control->add_option("--blocked", ctl_blocked, "spin blocked by the one-way preset (1-based)");
  control->add_option("--duration", ctl_duration, "blocking length in kicks for the one-way preset");
  control->add_option("--timing", ctl_timing, "freeze timing: predicted or simulated")
      ->check(CLI::IsMember({"predicted", "simulated"}));
  control->add_option("--disturbance-spread", dist_spread, "overlay chaotic kicks from a d0-square ensemble");
  control->add_option("--disturbance-seed", dist_seed, "seed of the disturbance ensemble");
  control->add_option("--export", export_path, "write the schedule in text form to this file");
  control->add_flag("--export-only", export_only, "write the schedule and stop");

  // oracle-check
  oracles::CheckParameters op;
  double tolerance = 1e-10;
  auto* oracle = app.add_subcommand("oracle-check", "compare the simulator with closed-form pair results");
  oracle->add_option("--J", op.coupling, "coupling strength");
  oracle->add_option("--omega1", op.omega1, "Zeeman frequency");
  oracle->add_option("--lambda1", op.lambda1, "kick strength on the first spin");
  oracle->add_option("--lambda2", op.lambda2, "kick strength on the second spin");
  oracle->add_option("--periods", op.periods, "periods for the unrestricted checks")->check(CLI::Range(0, 1000));
  oracle->add_option("--tolerance", tolerance, "largest accepted deviation");

  // husimi
  Common hus;
  std::string hus_kicks;
  int hus_theta = 0;
  int hus_phi = 0;
  bool hus_unsquared = false;
  auto* husimi_cmd = app.add_subcommand("husimi", "run an experiment and export Husimi grids");
  add_common(husimi_cmd, hus);
  husimi_cmd->add_option("--kicks", hus_kicks, "comma separated kick numbers")->required();
  husimi_cmd->add_option("--theta-points", hus_theta, "theta samples over [0, pi]");
  husimi_cmd->add_option("--phi-points", hus_phi, "phi samples over [0, 2pi)");
  husimi_cmd->add_flag("--unsquared", hus_unsquared, "report the bare expectation in the value column");

  // sweep
  Common swp;
  std::vector<std::string> grid;
  unsigned workers = 1;
  auto* sweep = app.add_subcommand("sweep", "run a grid of experiments into separate directories");
  sweep->add_option("config", swp.config, "experiment YAML file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--set", swp.sets, "fixed override key=value")->take_all();
  sweep->add_option("--vary", grid, "swept key=v1,v2,...")->required()->take_all();
  sweep->add_option("--out", swp.out, "parent directory for the runs")->required();
  sweep->add_flag("--overwrite", swp.overwrite, "replace files in existing run directories");
  sweep->add_option("--workers", workers, "parallel runs")->check(CLI::Range(1U, 256U));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      summarize(run(load(sim)));
    } else if (*predict_cmd) {
      const ExperimentConfig cfg = load(pre);
      const PredictionReport r = predict(cfg);
      std::cout << (pre_csv ? r.csv() : r.text());
    } else if (*control) {
      ExperimentConfig cfg = load(ctl);
      cfg.source = KickSourceKind::Schedule;
      auto& s = cfg.schedule;
      if (!ctl_preset.empty()) {
        s.preset = ctl_preset == "one_way"  ? SchedulePreset::OneWay
                   : ctl_preset == "freeze" ? SchedulePreset::Freeze
                   : ctl_preset == "instant" ? SchedulePreset::Instant
                                             : SchedulePreset::File;
      }
      if (control->count("--target")) s.target = ctl_target - 1;
      if (control->count("--blocked")) s.blocked = ctl_blocked - 1;
      if (control->count("--duration")) s.duration = ctl_duration;
      if (!ctl_timing.empty()) s.timing = ctl_timing == "simulated" ? FreezeTiming::Simulated : FreezeTiming::Predicted;
      if (dist_spread >= 0.0) {
        DisturbanceSection d = s.disturbance.value_or(DisturbanceSection{});
        d.spread = dist_spread;
        if (control->count("--disturbance-seed")) d.seed = dist_seed;
        s.disturbance = d;
      }
      // Re-validate the edited config through the parser.
      cfg = parse_config(emit_config(cfg));
      const KickSchedule schedule = build_schedule(cfg);
      if (!export_path.empty()) {
        io::write_file(export_path, schedule.to_text());
        std::printf("schedule written to %s\n", export_path.c_str());
      }
      if (!export_only) summarize(run(cfg));
    } else if (*oracle) {
      bool ok = true;
      for (const auto& r : oracles::compare_with_simulator(op)) {
        const bool pass = r.max_deviation <= tolerance;
        ok = ok && pass;
        std::printf("%-32s max deviation %.3e  %s\n", r.name.c_str(), r.max_deviation, pass ? "ok" : "FAIL");
      }
      return ok ? kOk : kFailure;
    } else if (*husimi_cmd) {
      ExperimentConfig cfg = load(hus);
      cfg.output.husimi_kicks.clear();
      for (double k : parse_list(hus_kicks)) {
        if (k < 0 || k != static_cast<double>(static_cast<std::size_t>(k))) {
          throw ConfigError("--kicks", "kick numbers must be non-negative integers");
        }
        cfg.output.husimi_kicks.push_back(static_cast<std::size_t>(k));
      }
      if (hus_theta > 0) cfg.output.husimi.theta_points = hus_theta;
      if (hus_phi > 0) cfg.output.husimi.phi_points = hus_phi;
      if (hus_unsquared) cfg.output.husimi.squared = false;
      cfg = parse_config(emit_config(cfg));
      summarize(run(cfg));
    } else if (*sweep) {
      const std::string base = apply_sets(io::read_file(swp.config), swp.sets);
      // Cartesian product of every --vary entry.
      std::vector<std::pair<std::string, std::string>> combos{{base, ""}};
      for (const auto& g : grid) {
        const auto [key, values] = split_assignment(g);
        std::vector<std::pair<std::string, std::string>> next;
        for (const auto& [text, label] : combos) {
          for (const auto& v : split_values(values)) {
            next.emplace_back(override_key(text, key, v), label + (label.empty() ? "" : "_") + key + "=" + v);
          }
        }
        combos = std::move(next);
      }
      std::vector<ExperimentConfig> configs;
      for (const auto& [text, label] : combos) {
        ExperimentConfig cfg = parse_config(text, fs::path(swp.config).parent_path());
        cfg.output.directory = fs::path(swp.out) / dir_label(label);
        cfg.output.overwrite = cfg.output.overwrite || swp.overwrite;
        configs.push_back(std::move(cfg));
      }
      const auto results = run_sweep(configs, workers);
      for (std::size_t i = 0; i < results.size(); ++i) {
        std::printf("%s: %zu files, drift %.3g", results[i].directory.string().c_str(), results[i].files.size(),
                    results[i].max_norm_drift);
        if (results[i].report.observed_rise) std::printf(", rise at kick %zu", *results[i].report.observed_rise);
        std::printf("\n");
      }
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kBadConfig;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kNumerical;
  } catch (const OutputCollision& e) {
    std::fprintf(stderr, "output error: %s\n", e.what());
    return kCollision;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kOk;
}
