// Experiment configuration, runs and their output bundles.
//
// A config is one YAML file describing one experiment. Frequencies are in
// units of omega0 unless stated, angles in radians, and spin numbers in the
// file are 1-based.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kickchain/bath.hpp"
#include "kickchain/chain.hpp"
#include "kickchain/control.hpp"
#include "kickchain/observables.hpp"

namespace kickchain {

/// Invalid configuration; `key` is the dotted path of the offending entry.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::invalid_argument(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// A run that lost its numerical footing (norm drift beyond tolerance).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output directory already holds files and overwriting was not requested.
class OutputCollision : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KickSourceKind { None, Bath, Schedule };
enum class SchedulePreset { OneWay, Freeze, Instant, File };

struct BathSection {
  std::array<std::int64_t, 4> map{2, 1, 1, 1};
  TorusPoint anchor{};
  double spread = 1e-6;
  std::uint64_t seed = 1;
  /// Trains in the classical ensemble. The chain uses the first N of them;
  /// 0 means exactly N.
  std::size_t ensemble = 0;
};

struct DisturbanceSection {
  std::array<std::int64_t, 4> map{2, 1, 1, 1};
  TorusPoint anchor{};
  double spread = 1e-8;
  std::uint64_t seed = 1;
};

struct ScheduleSection {
  SchedulePreset preset = SchedulePreset::Freeze;
  int target = 4;                         // 0-based
  int blocked = -1;                       // 0-based, -1: last spin
  std::optional<std::size_t> duration;    // one-way blocking length in kicks
  FreezeTiming timing = FreezeTiming::Predicted;
  std::filesystem::path file;             // preset == File
  std::optional<DisturbanceSection> disturbance;
};

struct EntropySection {
  /// Shannon prefactor theta; unset: 1 / S_max so the ceiling reads 1.
  std::optional<double> shannon_theta;
  /// von Neumann prefactor gamma; unset: 1 / ln 2 so a mixed spin reads 1.
  std::optional<double> von_neumann_gamma;
  /// Overrides the default ceiling ln(min(trains, cells)).
  std::optional<double> s_max;
};

struct OutputSection {
  std::filesystem::path directory = "out";
  bool overwrite = false;
  std::vector<std::size_t> husimi_kicks;
  HusimiSpec husimi{};
  bool trajectories = false;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ChainConfig chain;
  std::size_t kicks = 100;
  KickSourceKind source = KickSourceKind::None;
  BathSection bath;
  ScheduleSection schedule;
  double cell = std::numbers::pi / 64.0;
  EntropySection entropy;
  OutputSection output;

  PartitionSpec partition() const { return PartitionSpec(cell); }
  std::size_t ensemble_size() const;
};

/// Parses and validates a YAML document. Unknown keys, wrong types and out
/// of range values raise ConfigError naming the key. Relative paths inside
/// the document are resolved against `base_dir`.
ExperimentConfig parse_config(std::string_view yaml, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& file);

/// Fully resolved config as YAML; parse_config(emit_config(c)) reproduces c.
std::string emit_config(const ExperimentConfig& cfg);

/// Replaces one dotted key (e.g. "chain.J") in a YAML document.
std::string override_key(std::string_view yaml, std::string_view dotted_key, std::string_view value);

/// Schedule for a config whose source is Schedule.
KickSchedule build_schedule(const ExperimentConfig& cfg);

/// Kick source exactly as run() drives the chain.
KickSource build_kick_source(const ExperimentConfig& cfg);

struct PeriodRow {
  int spin = 0;  // 1-based, from 2
  double averaged_period = 0.0;
  double transfer_time = 0.0;
};

struct PredictionReport {
  bool has_bath = false;
  double lyapunov = 0.0;
  double unstable_angle = 0.0;
  double n_box = 0.0;
  double s_max = 0.0;
  double n_star = 0.0;

  bool has_transmission = false;
  double edge_period = 0.0;
  double mid_period = 0.0;
  std::vector<PeriodRow> periods;
  double one_way_period = 0.0;
  int turns = 0;
  double spins_reached = 0.0;
  bool out_of_validated_regime = false;
  bool degenerate_sum = false;

  /// First kick where the average spin's entropy exceeds 5% of its maximum,
  /// filled in by simulations only.
  std::optional<std::size_t> observed_rise;

  std::string text() const;
  std::string csv() const;
};

PredictionReport predict(const ExperimentConfig& cfg);

struct RunResult {
  std::filesystem::path directory;
  std::vector<std::filesystem::path> files;  // relative to directory
  double max_norm_drift = 0.0;
  PredictionReport report;
};

/// Runs the experiment end to end and writes the bundle into
/// cfg.output.directory. Throws OutputCollision, NumericalError or
/// ConfigError; nothing is computed before validation succeeds.
RunResult run(const ExperimentConfig& cfg, std::string_view config_text = {});

/// Runs independent experiments on up to `workers` threads. Each config must
/// name its own output directory. Results come back in input order; the
/// first failure is rethrown after every worker has stopped.
std::vector<RunResult> run_sweep(const std::vector<ExperimentConfig>& configs, unsigned workers);

/// Norm drift beyond which a run aborts.
inline constexpr double kNormTolerance = 1e-6;

}  // namespace kickchain
