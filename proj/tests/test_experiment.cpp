#include <doctest.h>

#include <unistd.h>

#include <json.hpp>

#include "kickchain/csv.hpp"
#include "kickchain/experiment.hpp"
#include "kickchain/manifest.hpp"

using namespace kickchain;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(
name: small
kicks: 12
chain:
  spins: 4
  J: 0.3
  topology: closed
  initial:
    all: cat
    spins:
      1: up
source: bath
bath:
  anchor: [1, 2]
  spread: 1.0e-3
  seed: 3
  ensemble: 50
partition:
  cells_per_side: 32
output:
  husimi:
    kicks: [0, 12]
    theta_points: 5
    phi_points: 6
)";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kickchain-test-" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string error_key(const std::string& yaml) {
  try {
    parse_config(yaml);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(kSmall);
  CHECK(c.name == "small");
  CHECK(c.chain.spins == 4);
  CHECK(c.chain.topology == Topology::Closed);
  CHECK(c.chain.initial[0].up == Complex(1.0));
  CHECK(std::abs(c.chain.initial[1].down - std::sqrt(0.5)) < 1e-15);
  CHECK(c.source == KickSourceKind::Bath);
  CHECK(c.ensemble_size() == 50);
  CHECK(c.partition().cells_per_side() == 32);
  CHECK(c.output.husimi_kicks == std::vector<std::size_t>{0, 12});
}

TEST_CASE("config errors name the offending key") {
  CHECK(error_key("chain: {spins: 3}\ncolour: red\n") == "colour");
  CHECK(error_key("chain: {spins: 3, Jay: 1}\n") == "chain.Jay");
  CHECK(error_key("chain: {spins: three}\n") == "chain.spins");
  CHECK(error_key("chain: {spins: 40}\n") == "chain.spins");
  CHECK(error_key("chain: {spins: 2, topology: closed}\n") == "chain.topology");
  CHECK(error_key("chain: {spins: 3, initial: {spins: {4: up}}}\n") == "chain.initial.spins.4");
  CHECK(error_key("chain: {spins: 3, initial: {all: sideways}}\n") == "chain.initial.all");
  CHECK(error_key("chain: {spins: 3, initial: {all: [0, 0]}}\n") == "chain.initial.all");
  CHECK(error_key("chain: {spins: 3}\nbath: {map: [1, 2, 3, 4]}\n") == "bath.map");
  CHECK(error_key("chain: {spins: 3}\nbath: {spread: -1}\n") == "bath.spread");
  CHECK(error_key("chain: {spins: 3}\npartition: {cell: 0.3}\n") == "partition");
  CHECK(error_key("chain: {spins: 3}\nsource: magic\n") == "source");
  CHECK(error_key("chain: {spins: 9, J: 0.05, topology: closed}\nsource: schedule\nschedule: {target: 9}\n") ==
        "schedule.target");
  CHECK(error_key("chain: {spins: 9, J: 0.05}\nsource: schedule\n") == "chain.topology");
  CHECK(error_key("kicks: 5\nchain: {spins: 3}\noutput: {husimi: {kicks: [6]}}\n") == "output.husimi.kicks");
  CHECK(error_key("chain: {spins: 3}\noutput: {overwrite: maybe}\n") == "output.overwrite");
  CHECK(error_key("kicks: 5\n") == "chain");
  CHECK(error_key("chain: [\n") == "<document>");
}

TEST_CASE("emitted config parses back to the same config") {
  const char* extra = R"(
name: "odd: name"
kicks: 7
chain:
  spins: 5
  coupling: isingz
  J: 0.123456789012345
  omega0: 1.3
  omega1: 0.2
  kick_angle: 0.785
  initial:
    all: [[0.3, 0.1], [0.2, -0.9]]
source: schedule
schedule:
  preset: file
  file: /tmp/none.txt
  disturbance: {spread: 1.0e-8, seed: 9, anchor: [0.1, 0.2]}
entropy: {shannon_theta: 0.5, s_max: 3}
)";
  for (const char* doc : {kSmall, extra}) {
    const ExperimentConfig a = parse_config(doc);
    const std::string once = emit_config(a);
    const ExperimentConfig b = parse_config(once);
    CHECK(emit_config(b) == once);
    for (int n = 0; n < a.chain.spins; ++n) {
      CHECK(a.chain.initial[n].up == b.chain.initial[n].up);
      CHECK(a.chain.initial[n].down == b.chain.initial[n].down);
    }
    CHECK(a.chain.coupling_strength == b.chain.coupling_strength);
    CHECK(a.cell == b.cell);
  }
}

TEST_CASE("dotted overrides") {
  const std::string text = override_key(kSmall, "chain.J", "0.7");
  CHECK(parse_config(text).chain.coupling_strength == 0.7);
  CHECK(parse_config(override_key(kSmall, "schedule.target", "3")).schedule.target == 2);
  CHECK(parse_config(override_key(kSmall, "kicks", "30")).kicks == 30);
}

TEST_CASE("run writes a complete, reproducible bundle") {
  ExperimentConfig c = parse_config(kSmall);
  c.output.directory = scratch("bundle-a");
  const RunResult a = run(c);
  CHECK(a.max_norm_drift < 1e-10);
  for (const char* f : {"spins.csv", "average.csv", "husimi.csv", "bath.csv", "prediction.txt", "prediction.csv",
                        "config.yaml", "manifest.json"}) {
    CAPTURE(f);
    CHECK(fs::exists(c.output.directory / f));
  }
  const fs::path dir = c.output.directory;
  CHECK(first_line(io::read_file(dir / "spins.csv")) == "# schema: kickchain.spins/1");
  CHECK(io::read_file(dir / "spins.csv").find("\nkick,spin,population_up,coherence,entropy\n") != std::string::npos);
  CHECK(io::read_file(dir / "average.csv").find("\nkick,population_up,coherence,entropy,mean_spin_coherence\n") !=
        std::string::npos);
  CHECK(io::read_file(dir / "bath.csv").find("\niteration,shannon,cumulated,ks_prediction\n") != std::string::npos);
  CHECK(io::read_file(dir / "husimi.csv").find("\nkick,spin,theta,phi,r,polar_angle,x,y,value,unsquared\n") !=
        std::string::npos);
  CHECK(first_line(io::read_file(dir / "prediction.txt")) == "# kickchain prediction report v1");

  // 13 snapshots x 4 spins, and 2 kicks x 5 densities x 30 mesh points
  const std::string spins = io::read_file(dir / "spins.csv");
  CHECK(std::count(spins.begin(), spins.end(), '\n') == 2 + 13 * 4);
  const std::string husimi = io::read_file(dir / "husimi.csv");
  CHECK(std::count(husimi.begin(), husimi.end(), '\n') == 5 + 2 * 5 * 30);

  const auto manifest = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
  CHECK(manifest["version"] == version());
  CHECK(manifest["seeds"]["bath"] == 3);
  for (const auto& f : manifest["files"]) {
    CHECK(sha256_hex(io::read_file(dir / f["path"].get<std::string>())) == f["sha256"]);
  }
  // the stored config reproduces the run
  ExperimentConfig again = parse_config(manifest["config"].get<std::string>());
  again.output.directory = scratch("bundle-b");
  const RunResult b = run(again);
  for (const auto& f : a.files) {
    if (f == "manifest.json" || f == "config.yaml") continue;
    CAPTURE(f.string());
    CHECK(io::read_file(a.directory / f) == io::read_file(b.directory / f));
  }
}

TEST_CASE("output directory collisions") {
  ExperimentConfig c = parse_config(kSmall);
  c.kicks = 2;
  c.output.husimi_kicks.clear();
  c.output.directory = scratch("collide");
  run(c);
  CHECK_THROWS_AS(run(c), OutputCollision);
  c.output.overwrite = true;
  CHECK_NOTHROW(run(c));
}

TEST_CASE("sweeps run in isolated directories") {
  std::vector<ExperimentConfig> configs;
  for (double j : {0.1, 0.2, 0.4}) {
    ExperimentConfig c = parse_config(override_key(kSmall, "chain.J", std::to_string(j)));
    c.kicks = 4;
    c.output.husimi_kicks.clear();
    c.output.directory = scratch("sweep-" + std::to_string(j));
    configs.push_back(c);
  }
  const auto results = run_sweep(configs, 3);
  REQUIRE(results.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(results[i].directory == configs[i].output.directory);
  CHECK(io::read_file(results[0].directory / "spins.csv") != io::read_file(results[2].directory / "spins.csv"));
  configs[1].output.directory = configs[0].output.directory;
  CHECK_THROWS_AS(run_sweep(configs, 2), ConfigError);
}

TEST_CASE("schedule runs write the schedule they used") {
  ExperimentConfig c = parse_config(R"(
kicks: 40
chain: {spins: 9, J: 0.05, topology: closed, initial: {all: [1, 4], spins: {1: up}}}
source: schedule
schedule: {preset: freeze, target: 5}
)");
  c.output.directory = scratch("schedule");
  run(c);
  const KickSchedule s = KickSchedule::from_text(io::read_file(c.output.directory / "schedule.txt"));
  CHECK(s == build_schedule(c));
}

TEST_CASE("prediction report") {
  const ExperimentConfig c = parse_config(R"(
chain: {spins: 7, J: 0.5}
source: bath
bath: {anchor: [1, 2], spread: 1.0e-6, ensemble: 700}
)");
  const PredictionReport r = predict(c);
  REQUIRE(r.has_bath);
  CHECK(r.n_box == doctest::Approx(10.555).epsilon(1e-4));
  CHECK(r.s_max == doctest::Approx(std::log(700.0)));
  CHECK(r.n_star == doctest::Approx(13.778).epsilon(1e-4));
  REQUIRE(r.has_transmission);
  CHECK(r.periods.size() == 6);
  CHECK(r.text().find("n_star: 13.778") != std::string::npos);
  CHECK(first_line(r.csv()) == "# schema: kickchain.prediction/1");
  const PredictionReport none = predict(parse_config("chain: {spins: 2}\n"));
  CHECK_FALSE(none.has_bath);
  CHECK_FALSE(none.has_transmission);
}

TEST_CASE("csv tables and checksums") {
  io::CsvTable t("demo/1", {"a", "b"});
  t.comment("note");
  t.row({"1", io::format_number(0.1)});
  CHECK(t.render() == "# schema: demo/1\n# note\na,b\n1,0.1\n");
  CHECK_THROWS_AS(t.row({"only one"}), std::logic_error);
  CHECK(io::format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
