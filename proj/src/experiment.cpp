#include "kickchain/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <yaml-cpp/yaml.h>

#include "kickchain/csv.hpp"
#include "kickchain/manifest.hpp"
#include "kickchain/predictors.hpp"

namespace kickchain {

namespace {

using io::format_number;

// ---------------------------------------------------------------- parsing

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) throw ConfigError(path.empty() ? "<root>" : path, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(join(path, key), "unknown key");
  }
}

double as_double(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) throw ConfigError(key, "expected a number");
  double v = 0.0;
  try {
    v = n.as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError(key, "expected a number, got '" + n.Scalar() + "'");
  }
  if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
  return v;
}

std::int64_t as_int(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) throw ConfigError(key, "expected an integer");
  try {
    return n.as<std::int64_t>();
  } catch (const YAML::Exception&) {
    throw ConfigError(key, "expected an integer, got '" + n.Scalar() + "'");
  }
}

std::uint64_t as_uint(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) throw ConfigError(key, "expected a non-negative integer");
  const std::string& s = n.Scalar();
  if (s.empty() || s[0] == '-') throw ConfigError(key, "expected a non-negative integer");
  try {
    return n.as<std::uint64_t>();
  } catch (const YAML::Exception&) {
    throw ConfigError(key, "expected a non-negative integer, got '" + s + "'");
  }
}

bool as_bool(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) throw ConfigError(key, "expected true or false");
  try {
    return n.as<bool>();
  } catch (const YAML::Exception&) {
    throw ConfigError(key, "expected true or false, got '" + n.Scalar() + "'");
  }
}

std::string as_string(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) throw ConfigError(key, "expected a string");
  return n.Scalar();
}

template <class F>
void with(const YAML::Node& parent, const std::string& path, const char* key, F&& f) {
  const YAML::Node n = parent[key];
  if (n && !n.IsNull()) f(n, join(path, key));
}

std::array<std::int64_t, 4> parse_map(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence() || n.size() != 4) throw ConfigError(key, "expected four integers [a, b, c, d]");
  std::array<std::int64_t, 4> m{};
  for (std::size_t i = 0; i < 4; ++i) m[i] = as_int(n[i], key + "[" + std::to_string(i) + "]");
  try {
    TorusMap check(m);
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
  return m;
}

TorusPoint parse_point(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence() || n.size() != 2) throw ConfigError(key, "expected [strength, delay]");
  return {as_double(n[0], key + "[0]"), as_double(n[1], key + "[1]")};
}

Complex parse_complex(const YAML::Node& n, const std::string& key) {
  if (n.IsScalar()) return {as_double(n, key), 0.0};
  if (n.IsSequence() && n.size() == 2) return {as_double(n[0], key + "[0]"), as_double(n[1], key + "[1]")};
  throw ConfigError(key, "expected a real number or [re, im]");
}

SpinState parse_state(const YAML::Node& n, const std::string& key) {
  if (n.IsScalar()) {
    const std::string s = n.Scalar();
    if (s == "up") return SpinState::spin_up();
    if (s == "down") return SpinState::spin_down();
    if (s == "cat") return SpinState::normalized(1.0, 1.0);
    throw ConfigError(key, "expected up, down, cat or [alpha, beta], got '" + s + "'");
  }
  if (!n.IsSequence() || n.size() != 2) throw ConfigError(key, "expected up, down, cat or [alpha, beta]");
  const Complex a = parse_complex(n[0], key + "[0]");
  const Complex b = parse_complex(n[1], key + "[1]");
  const double norm2 = std::norm(a) + std::norm(b);
  if (norm2 == 0.0) throw ConfigError(key, "state cannot be the zero vector");
  // Already-normalised input is kept bit for bit so emitted configs round-trip.
  if (std::abs(norm2 - 1.0) <= 1e-14) return {a, b};
  return SpinState::normalized(a, b);
}

void parse_chain(const YAML::Node& n, const std::string& path, ChainConfig& c) {
  check_keys(n, path, {"spins", "coupling", "J", "omega0", "omega1", "topology", "kick_angle", "initial"});
  with(n, path, "spins", [&](const YAML::Node& v, const std::string& k) {
    const auto s = as_int(v, k);
    if (s < 1 || s > 14) throw ConfigError(k, "must be in [1, 14]");
    c.spins = static_cast<int>(s);
  });
  with(n, path, "coupling", [&](const YAML::Node& v, const std::string& k) {
    const auto s = as_string(v, k);
    if (s == "heisenberg") {
      c.coupling = Coupling::Heisenberg;
    } else if (s == "isingz") {
      c.coupling = Coupling::IsingZ;
    } else {
      throw ConfigError(k, "expected heisenberg or isingz, got '" + s + "'");
    }
  });
  with(n, path, "J", [&](const YAML::Node& v, const std::string& k) { c.coupling_strength = as_double(v, k); });
  with(n, path, "omega0", [&](const YAML::Node& v, const std::string& k) {
    c.kick_frequency = as_double(v, k);
    if (!(c.kick_frequency > 0.0)) throw ConfigError(k, "must be positive");
  });
  with(n, path, "omega1", [&](const YAML::Node& v, const std::string& k) { c.zeeman = as_double(v, k); });
  with(n, path, "topology", [&](const YAML::Node& v, const std::string& k) {
    const auto s = as_string(v, k);
    if (s == "open") {
      c.topology = Topology::Open;
    } else if (s == "closed") {
      c.topology = Topology::Closed;
    } else {
      throw ConfigError(k, "expected open or closed, got '" + s + "'");
    }
  });
  with(n, path, "kick_angle", [&](const YAML::Node& v, const std::string& k) { c.kick_angle = as_double(v, k); });
  if (c.topology == Topology::Closed && c.spins < 3) {
    throw ConfigError(join(path, "topology"), "a closed chain needs at least 3 spins");
  }

  c.initial = uniform_states(c.spins, SpinState::spin_up());
  with(n, path, "initial", [&](const YAML::Node& v, const std::string& k) {
    check_keys(v, k, {"all", "spins"});
    with(v, k, "all", [&](const YAML::Node& s, const std::string& kk) {
      c.initial = uniform_states(c.spins, parse_state(s, kk));
    });
    with(v, k, "spins", [&](const YAML::Node& m, const std::string& kk) {
      if (!m.IsMap()) throw ConfigError(kk, "expected a mapping from spin number to state");
      for (const auto& e : m) {
        const std::string key = join(kk, e.first.Scalar());
        const auto idx = as_int(e.first, key);
        if (idx < 1 || idx > c.spins) throw ConfigError(key, "spin number outside 1.." + std::to_string(c.spins));
        c.initial[static_cast<std::size_t>(idx - 1)] = parse_state(e.second, key);
      }
    });
  });
}

void parse_bath(const YAML::Node& n, const std::string& path, BathSection& b) {
  check_keys(n, path, {"map", "anchor", "spread", "seed", "ensemble"});
  with(n, path, "map", [&](const YAML::Node& v, const std::string& k) { b.map = parse_map(v, k); });
  with(n, path, "anchor", [&](const YAML::Node& v, const std::string& k) { b.anchor = parse_point(v, k); });
  with(n, path, "spread", [&](const YAML::Node& v, const std::string& k) {
    b.spread = as_double(v, k);
    if (b.spread < 0.0) throw ConfigError(k, "must be >= 0");
  });
  with(n, path, "seed", [&](const YAML::Node& v, const std::string& k) { b.seed = as_uint(v, k); });
  with(n, path, "ensemble", [&](const YAML::Node& v, const std::string& k) { b.ensemble = as_uint(v, k); });
}

void parse_disturbance(const YAML::Node& n, const std::string& path, DisturbanceSection& d) {
  check_keys(n, path, {"map", "anchor", "spread", "seed"});
  with(n, path, "map", [&](const YAML::Node& v, const std::string& k) { d.map = parse_map(v, k); });
  with(n, path, "anchor", [&](const YAML::Node& v, const std::string& k) { d.anchor = parse_point(v, k); });
  with(n, path, "spread", [&](const YAML::Node& v, const std::string& k) {
    d.spread = as_double(v, k);
    if (d.spread < 0.0) throw ConfigError(k, "must be >= 0");
  });
  with(n, path, "seed", [&](const YAML::Node& v, const std::string& k) { d.seed = as_uint(v, k); });
}

void parse_schedule(const YAML::Node& n, const std::string& path, ScheduleSection& s,
                    const std::filesystem::path& base_dir) {
  check_keys(n, path, {"preset", "target", "blocked", "duration", "timing", "file", "disturbance"});
  with(n, path, "preset", [&](const YAML::Node& v, const std::string& k) {
    const auto p = as_string(v, k);
    if (p == "one_way") {
      s.preset = SchedulePreset::OneWay;
    } else if (p == "freeze") {
      s.preset = SchedulePreset::Freeze;
    } else if (p == "instant") {
      s.preset = SchedulePreset::Instant;
    } else if (p == "file") {
      s.preset = SchedulePreset::File;
    } else {
      throw ConfigError(k, "expected one_way, freeze, instant or file, got '" + p + "'");
    }
  });
  with(n, path, "target", [&](const YAML::Node& v, const std::string& k) {
    s.target = static_cast<int>(as_int(v, k)) - 1;
  });
  with(n, path, "blocked", [&](const YAML::Node& v, const std::string& k) {
    s.blocked = static_cast<int>(as_int(v, k)) - 1;
  });
  with(n, path, "duration", [&](const YAML::Node& v, const std::string& k) { s.duration = as_uint(v, k); });
  with(n, path, "timing", [&](const YAML::Node& v, const std::string& k) {
    const auto t = as_string(v, k);
    if (t == "predicted") {
      s.timing = FreezeTiming::Predicted;
    } else if (t == "simulated") {
      s.timing = FreezeTiming::Simulated;
    } else {
      throw ConfigError(k, "expected predicted or simulated, got '" + t + "'");
    }
  });
  with(n, path, "file", [&](const YAML::Node& v, const std::string& k) {
    std::filesystem::path f = as_string(v, k);
    s.file = f.is_relative() && !base_dir.empty() ? base_dir / f : f;
  });
  with(n, path, "disturbance", [&](const YAML::Node& v, const std::string& k) {
    DisturbanceSection d;
    parse_disturbance(v, k, d);
    s.disturbance = d;
  });
}

void parse_output(const YAML::Node& n, const std::string& path, OutputSection& o,
                  const std::filesystem::path& base_dir) {
  check_keys(n, path, {"directory", "overwrite", "trajectories", "husimi"});
  with(n, path, "directory", [&](const YAML::Node& v, const std::string& k) {
    std::filesystem::path d = as_string(v, k);
    o.directory = d.is_relative() && !base_dir.empty() ? base_dir / d : d;
  });
  with(n, path, "overwrite", [&](const YAML::Node& v, const std::string& k) { o.overwrite = as_bool(v, k); });
  with(n, path, "trajectories", [&](const YAML::Node& v, const std::string& k) { o.trajectories = as_bool(v, k); });
  with(n, path, "husimi", [&](const YAML::Node& h, const std::string& hk) {
    check_keys(h, hk, {"kicks", "theta_points", "phi_points", "squared"});
    with(h, hk, "kicks", [&](const YAML::Node& v, const std::string& k) {
      if (!v.IsSequence()) throw ConfigError(k, "expected a list of kick numbers");
      for (std::size_t i = 0; i < v.size(); ++i) {
        o.husimi_kicks.push_back(as_uint(v[i], k + "[" + std::to_string(i) + "]"));
      }
    });
    with(h, hk, "theta_points", [&](const YAML::Node& v, const std::string& k) {
      const auto t = as_int(v, k);
      if (t < 1 || t > 4096) throw ConfigError(k, "must be in [1, 4096]");
      o.husimi.theta_points = static_cast<int>(t);
    });
    with(h, hk, "phi_points", [&](const YAML::Node& v, const std::string& k) {
      const auto p = as_int(v, k);
      if (p < 1 || p > 4096) throw ConfigError(k, "must be in [1, 4096]");
      o.husimi.phi_points = static_cast<int>(p);
    });
    with(h, hk, "squared", [&](const YAML::Node& v, const std::string& k) { o.husimi.squared = as_bool(v, k); });
  });
}

ExperimentConfig parse_root(const YAML::Node& root, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  if (!root || root.IsNull()) throw ConfigError("<root>", "empty document");
  check_keys(root, "", {"name", "kicks", "chain", "source", "bath", "schedule", "partition", "entropy", "output"});
  with(root, "", "name", [&](const YAML::Node& v, const std::string& k) { c.name = as_string(v, k); });
  with(root, "", "kicks", [&](const YAML::Node& v, const std::string& k) {
    c.kicks = as_uint(v, k);
    if (c.kicks > 1000000) throw ConfigError(k, "must be at most 1000000");
  });
  if (!root["chain"]) throw ConfigError("chain", "missing section");
  parse_chain(root["chain"], "chain", c.chain);
  with(root, "", "source", [&](const YAML::Node& v, const std::string& k) {
    const auto s = as_string(v, k);
    if (s == "none") {
      c.source = KickSourceKind::None;
    } else if (s == "bath") {
      c.source = KickSourceKind::Bath;
    } else if (s == "schedule") {
      c.source = KickSourceKind::Schedule;
    } else {
      throw ConfigError(k, "expected none, bath or schedule, got '" + s + "'");
    }
  });
  with(root, "", "bath", [&](const YAML::Node& v, const std::string& k) { parse_bath(v, k, c.bath); });
  with(root, "", "schedule", [&](const YAML::Node& v, const std::string& k) {
    parse_schedule(v, k, c.schedule, base_dir);
  });
  with(root, "", "partition", [&](const YAML::Node& v, const std::string& k) {
    check_keys(v, k, {"cell", "cells_per_side"});
    if (v["cell"] && v["cells_per_side"]) throw ConfigError(k, "give either cell or cells_per_side");
    with(v, k, "cell", [&](const YAML::Node& x, const std::string& kk) { c.cell = as_double(x, kk); });
    with(v, k, "cells_per_side", [&](const YAML::Node& x, const std::string& kk) {
      const auto n = as_int(x, kk);
      if (n < 1 || n > 1 << 14) throw ConfigError(kk, "must be in [1, 16384]");
      c.cell = kTwoPi / static_cast<double>(n);
    });
    try {
      PartitionSpec check(c.cell);
    } catch (const std::exception& e) {
      throw ConfigError(k, e.what());
    }
  });
  with(root, "", "entropy", [&](const YAML::Node& v, const std::string& k) {
    check_keys(v, k, {"shannon_theta", "von_neumann_gamma", "s_max"});
    auto positive = [](const YAML::Node& x, const std::string& kk) {
      const double d = as_double(x, kk);
      if (!(d > 0.0)) throw ConfigError(kk, "must be positive");
      return d;
    };
    with(v, k, "shannon_theta", [&](const YAML::Node& x, const std::string& kk) { c.entropy.shannon_theta = positive(x, kk); });
    with(v, k, "von_neumann_gamma", [&](const YAML::Node& x, const std::string& kk) { c.entropy.von_neumann_gamma = positive(x, kk); });
    with(v, k, "s_max", [&](const YAML::Node& x, const std::string& kk) { c.entropy.s_max = positive(x, kk); });
  });
  with(root, "", "output", [&](const YAML::Node& v, const std::string& k) { parse_output(v, k, c.output, base_dir); });

  // Cross-field checks.
  if (c.bath.ensemble != 0 && c.bath.ensemble < static_cast<std::size_t>(c.chain.spins)) {
    throw ConfigError("bath.ensemble", "must be at least the number of spins");
  }
  if (c.source == KickSourceKind::Schedule) {
    const auto& s = c.schedule;
    const int n = c.chain.spins;
    if (c.chain.topology != Topology::Closed && s.preset != SchedulePreset::File) {
      throw ConfigError("chain.topology", "schedule presets need a closed chain");
    }
    if ((s.preset == SchedulePreset::Freeze || s.preset == SchedulePreset::Instant) &&
        (s.target < 1 || s.target > n - 2)) {
      throw ConfigError("schedule.target", "must be in 2.." + std::to_string(n - 1));
    }
    if (s.preset == SchedulePreset::OneWay && (s.blocked < -1 || s.blocked >= n)) {
      throw ConfigError("schedule.blocked", "spin number outside 1.." + std::to_string(n));
    }
    if (s.preset == SchedulePreset::File && s.file.empty()) {
      throw ConfigError("schedule.file", "required for preset file");
    }
    if (s.preset != SchedulePreset::File &&
        (c.chain.coupling != Coupling::Heisenberg || !(c.chain.coupling_strength > 0.0))) {
      throw ConfigError("chain.J", "schedule presets need a Heisenberg chain with J > 0");
    }
  }
  for (std::size_t k : c.output.husimi_kicks) {
    if (k > c.kicks) throw ConfigError("output.husimi.kicks", "kick " + std::to_string(k) + " beyond the run length");
  }
  try {
    c.chain.validate();
  } catch (const std::exception& e) {
    throw ConfigError("chain", e.what());
  }
  return c;
}

// --------------------------------------------------------------- emitting

std::string exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string map_text(const std::array<std::int64_t, 4>& m) {
  return "[" + std::to_string(m[0]) + ", " + std::to_string(m[1]) + ", " + std::to_string(m[2]) + ", " +
         std::to_string(m[3]) + "]";
}

std::string point_text(const TorusPoint& p) { return "[" + exact(p.strength) + ", " + exact(p.delay) + "]"; }

std::string complex_text(Complex z) { return "[" + exact(z.real()) + ", " + exact(z.imag()) + "]"; }

std::string quoted(const std::string& s) {
  YAML::Emitter e;
  e << YAML::DoubleQuoted << s;
  return e.c_str();
}

// ------------------------------------------------------------- reporting

std::optional<TorusMap> chaotic_or_null(const std::array<std::int64_t, 4>& m) {
  TorusMap map(m);
  if (!map.is_chaotic()) return std::nullopt;
  return map;
}

struct ReportBath {
  std::array<std::int64_t, 4> map;
  double spread;
  std::size_t trains;
};

std::optional<ReportBath> report_bath(const ExperimentConfig& c) {
  if (c.source == KickSourceKind::Bath) return ReportBath{c.bath.map, c.bath.spread, c.ensemble_size()};
  if (c.source == KickSourceKind::Schedule && c.schedule.disturbance) {
    return ReportBath{c.schedule.disturbance->map, c.schedule.disturbance->spread,
                      static_cast<std::size_t>(c.chain.spins)};
  }
  return std::nullopt;
}

void ensure_output_dir(const OutputSection& o) {
  namespace fs = std::filesystem;
  if (fs::exists(o.directory)) {
    if (!fs::is_directory(o.directory)) {
      throw OutputCollision(o.directory.string() + " exists and is not a directory");
    }
    if (!fs::is_empty(o.directory) && !o.overwrite) {
      throw OutputCollision(o.directory.string() + " is not empty; pass overwrite to replace its files");
    }
  }
  fs::create_directories(o.directory);
}

}  // namespace

std::size_t ExperimentConfig::ensemble_size() const {
  return bath.ensemble == 0 ? static_cast<std::size_t>(chain.spins) : bath.ensemble;
}

ExperimentConfig parse_config(std::string_view yaml, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    throw ConfigError("<document>", std::string("YAML syntax: ") + e.what());
  }
  return parse_root(root, base_dir);
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::string text;
  try {
    text = io::read_file(file);
  } catch (const std::exception& e) {
    throw ConfigError("<file>", e.what());
  }
  return parse_config(text, file.parent_path());
}

std::string emit_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "# kickchain experiment (resolved). Frequencies in units of omega0, angles in radians.\n";
  o << "name: " << quoted(c.name) << "\n";
  o << "kicks: " << c.kicks << "\n";
  o << "chain:\n";
  o << "  spins: " << c.chain.spins << "\n";
  o << "  coupling: " << (c.chain.coupling == Coupling::Heisenberg ? "heisenberg" : "isingz") << "\n";
  o << "  J: " << exact(c.chain.coupling_strength) << "\n";
  o << "  omega0: " << exact(c.chain.kick_frequency) << "\n";
  o << "  omega1: " << exact(c.chain.zeeman) << "\n";
  o << "  topology: " << (c.chain.topology == Topology::Open ? "open" : "closed") << "\n";
  o << "  kick_angle: " << exact(c.chain.kick_angle) << "\n";
  o << "  initial:\n    spins:\n";
  for (std::size_t i = 0; i < c.chain.initial.size(); ++i) {
    const auto& s = c.chain.initial[i];
    o << "      " << i + 1 << ": [" << complex_text(s.up) << ", " << complex_text(s.down) << "]\n";
  }
  const char* source = c.source == KickSourceKind::None ? "none" : c.source == KickSourceKind::Bath ? "bath" : "schedule";
  o << "source: " << source << "\n";
  o << "bath:\n";
  o << "  map: " << map_text(c.bath.map) << "\n";
  o << "  anchor: " << point_text(c.bath.anchor) << "\n";
  o << "  spread: " << exact(c.bath.spread) << "\n";
  o << "  seed: " << c.bath.seed << "\n";
  o << "  ensemble: " << c.ensemble_size() << "\n";
  const auto& s = c.schedule;
  o << "schedule:\n";
  const char* preset = s.preset == SchedulePreset::OneWay  ? "one_way"
                       : s.preset == SchedulePreset::Freeze ? "freeze"
                       : s.preset == SchedulePreset::Instant ? "instant"
                                                             : "file";
  o << "  preset: " << preset << "\n";
  o << "  target: " << s.target + 1 << "\n";
  o << "  blocked: " << (s.blocked < 0 ? c.chain.spins : s.blocked + 1) << "\n";
  if (s.duration) o << "  duration: " << *s.duration << "\n";
  o << "  timing: " << (s.timing == FreezeTiming::Predicted ? "predicted" : "simulated") << "\n";
  if (!s.file.empty()) o << "  file: " << quoted(s.file.string()) << "\n";
  if (s.disturbance) {
    o << "  disturbance:\n";
    o << "    map: " << map_text(s.disturbance->map) << "\n";
    o << "    anchor: " << point_text(s.disturbance->anchor) << "\n";
    o << "    spread: " << exact(s.disturbance->spread) << "\n";
    o << "    seed: " << s.disturbance->seed << "\n";
  }
  o << "partition:\n  cell: " << exact(c.cell) << "\n";
  if (c.entropy.shannon_theta || c.entropy.von_neumann_gamma || c.entropy.s_max) {
    o << "entropy:\n";
    if (c.entropy.shannon_theta) o << "  shannon_theta: " << exact(*c.entropy.shannon_theta) << "\n";
    if (c.entropy.von_neumann_gamma) o << "  von_neumann_gamma: " << exact(*c.entropy.von_neumann_gamma) << "\n";
    if (c.entropy.s_max) o << "  s_max: " << exact(*c.entropy.s_max) << "\n";
  }
  o << "output:\n";
  o << "  directory: " << quoted(c.output.directory.string()) << "\n";
  o << "  overwrite: " << (c.output.overwrite ? "true" : "false") << "\n";
  o << "  trajectories: " << (c.output.trajectories ? "true" : "false") << "\n";
  o << "  husimi:\n    kicks: [";
  for (std::size_t i = 0; i < c.output.husimi_kicks.size(); ++i) {
    o << (i ? ", " : "") << c.output.husimi_kicks[i];
  }
  o << "]\n";
  o << "    theta_points: " << c.output.husimi.theta_points << "\n";
  o << "    phi_points: " << c.output.husimi.phi_points << "\n";
  o << "    squared: " << (c.output.husimi.squared ? "true" : "false") << "\n";
  return o.str();
}

std::string override_key(std::string_view yaml, std::string_view dotted_key, std::string_view value) {
  YAML::Node root = YAML::Load(std::string(yaml));
  std::vector<std::string> parts;
  std::string key(dotted_key);
  for (std::size_t start = 0;;) {
    const auto dot = key.find('.', start);
    parts.push_back(key.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  // yaml-cpp nodes are handles; walk with reset() so assignment does not
  // overwrite the parent.
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = chain.back()[parts[i]];
    if (!next.IsDefined() || next.IsNull()) {
      chain.back()[parts[i]] = YAML::Node(YAML::NodeType::Map);
      next = chain.back()[parts[i]];
    }
    chain.push_back(next);
  }
  chain.back()[parts.back()] = YAML::Load(std::string(value));
  YAML::Emitter e;
  e << root;
  return std::string(e.c_str()) + "\n";
}

KickSchedule build_schedule(const ExperimentConfig& c) {
  const auto& s = c.schedule;
  switch (s.preset) {
    case SchedulePreset::OneWay:
      return schedule_one_way(c.chain, s.blocked < 0 ? c.chain.spins - 1 : s.blocked, s.duration);
    case SchedulePreset::Freeze:
      return schedule_freeze(c.chain, s.target, s.timing);
    case SchedulePreset::Instant:
      return schedule_freeze_instant(c.chain, s.target);
    case SchedulePreset::File: {
      KickSchedule k = KickSchedule::from_text(io::read_file(s.file));
      if (k.spins() != c.chain.spins) {
        throw ConfigError("schedule.file", "schedule has " + std::to_string(k.spins()) + " spins, chain has " +
                                               std::to_string(c.chain.spins));
      }
      return k;
    }
  }
  throw std::logic_error("unhandled schedule preset");
}

KickSource build_kick_source(const ExperimentConfig& c) {
  const int n = c.chain.spins;
  switch (c.source) {
    case KickSourceKind::None:
      return no_kicks(n);
    case KickSourceKind::Bath: {
      TorusEnsemble first = sample_initial({static_cast<std::size_t>(n), c.bath.anchor, c.bath.spread, c.bath.seed});
      return bath_kicks(TorusMap(c.bath.map), std::move(first), c.chain.kick_angle);
    }
    case KickSourceKind::Schedule: {
      KickSource base = build_schedule(c).source();
      if (!c.schedule.disturbance) return base;
      const auto& d = *c.schedule.disturbance;
      return disturb(base, bath_stream(TorusMap(d.map),
                                       sample_initial({static_cast<std::size_t>(n), d.anchor, d.spread, d.seed})));
    }
  }
  throw std::logic_error("unhandled kick source");
}

PredictionReport predict(const ExperimentConfig& c) {
  PredictionReport r;
  const PartitionSpec part = c.partition();
  if (const auto b = report_bath(c)) {
    if (const auto map = chaotic_or_null(b->map)) {
      r.has_bath = true;
      r.lyapunov = lyapunov(*map);
      r.unstable_angle = map->unstable_angle();
      r.n_box = horizon_predictability(*map, b->spread, part);
      r.s_max = c.entropy.s_max ? *c.entropy.s_max : max_shannon_entropy(b->trains, part);
      r.n_star = horizon_coherence({r.s_max, r.lyapunov, r.n_box});
    }
  }
  const auto& ch = c.chain;
  if (ch.coupling == Coupling::Heisenberg && ch.coupling_strength > 0.0 && ch.spins >= 3) {
    const TransmissionModel m(ch.spins, ch.coupling_strength, ch.kick_frequency);
    r.has_transmission = true;
    r.edge_period = m.edge();
    r.mid_period = m.mid();
    const auto avg = averaged_periods(m);
    const auto trans = transfer_times(m);
    for (std::size_t i = 0; i < avg.size(); ++i) r.periods.push_back({static_cast<int>(i) + 2, avg[i], trans[i]});
    r.one_way_period = one_way_period(m);
    r.out_of_validated_regime = m.out_of_validated_regime();
    r.degenerate_sum = m.degenerate_sum();
    if (r.has_bath && std::isfinite(r.n_star)) {
      r.turns = turns(r.n_star, r.one_way_period);
      r.spins_reached = spins_reached(r.n_star, m, r.turns);
    }
  }
  return r;
}

std::string PredictionReport::text() const {
  std::ostringstream o;
  o << "# kickchain prediction report v1\n";
  if (has_bath) {
    o << "lyapunov: " << format_number(lyapunov) << "\n";
    o << "unstable_angle: " << format_number(unstable_angle) << "\n";
    o << "n_box: " << format_number(n_box) << "\n";
    o << "n_box_ceil: " << format_number(std::ceil(n_box)) << "\n";
    o << "s_max: " << format_number(s_max) << "\n";
    o << "n_star: " << format_number(n_star) << "\n";
  } else {
    o << "bath: none (no chaotic kick source)\n";
  }
  if (observed_rise) {
    o << "observed_rise: " << *observed_rise << "\n";
  } else {
    o << "observed_rise: not simulated\n";
  }
  if (has_transmission) {
    o << "edge_period: " << format_number(edge_period) << "\n";
    o << "mid_period: " << format_number(mid_period) << "\n";
    o << "periods:\n";
    o << "  spin averaged_period transfer_time\n";
    for (const auto& p : periods) {
      o << "  " << p.spin << " " << format_number(p.averaged_period) << " " << format_number(p.transfer_time) << "\n";
    }
    o << "one_way_period: " << format_number(one_way_period) << "\n";
    if (has_bath && std::isfinite(n_star)) {
      o << "turns: " << turns << "\n";
      o << "spins_reached: " << format_number(spins_reached) << "\n";
    }
    if (out_of_validated_regime) o << "warning: J > omega0, out of validated regime for the horizon formula\n";
    if (degenerate_sum) o << "warning: fewer than 5 spins, interior transfer sum is empty\n";
  }
  return o.str();
}

std::string PredictionReport::csv() const {
  io::CsvTable t("kickchain.prediction/1", {"quantity", "spin", "value"});
  auto add = [&t](const std::string& q, const std::string& spin, const std::string& v) { t.row({q, spin, v}); };
  if (has_bath) {
    add("lyapunov", "", format_number(lyapunov));
    add("unstable_angle", "", format_number(unstable_angle));
    add("n_box", "", format_number(n_box));
    add("s_max", "", format_number(s_max));
    add("n_star", "", format_number(n_star));
  }
  if (observed_rise) add("observed_rise", "", std::to_string(*observed_rise));
  if (has_transmission) {
    add("edge_period", "", format_number(edge_period));
    add("mid_period", "", format_number(mid_period));
    for (const auto& p : periods) {
      add("averaged_period", std::to_string(p.spin), format_number(p.averaged_period));
      add("transfer_time", std::to_string(p.spin), format_number(p.transfer_time));
    }
    add("one_way_period", "", format_number(one_way_period));
    if (has_bath && std::isfinite(n_star)) {
      add("turns", "", std::to_string(turns));
      add("spins_reached", "", format_number(spins_reached));
    }
    add("out_of_validated_regime", "", out_of_validated_regime ? "1" : "0");
    add("degenerate_sum", "", degenerate_sum ? "1" : "0");
  }
  return t.render();
}

RunResult run(const ExperimentConfig& c, std::string_view config_text) {
  namespace fs = std::filesystem;
  (void)config_text;
  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();

  c.chain.validate();
  PredictionReport report = predict(c);
  // Schedules are built before any output is written so bad presets fail early.
  std::optional<KickSchedule> schedule;
  if (c.source == KickSourceKind::Schedule) schedule = build_schedule(c);
  ensure_output_dir(c.output);

  RunResult result;
  result.directory = c.output.directory;
  const fs::path dir = c.output.directory;
  const int n = c.chain.spins;
  const double gamma = c.entropy.von_neumann_gamma.value_or(1.0 / std::log(2.0));

  io::CsvTable spins("kickchain.spins/1", {"kick", "spin", "population_up", "coherence", "entropy"});
  io::CsvTable average("kickchain.average/1",
                       {"kick", "population_up", "coherence", "entropy", "mean_spin_coherence"});
  io::CsvTable husimi_table("kickchain.husimi/1",
                            {"kick", "spin", "theta", "phi", "r", "polar_angle", "x", "y", "value", "unsquared"});
  const HusimiSpec hspec = c.output.husimi;
  HusimiSpec raw = hspec;
  raw.squared = false;
  husimi_table.comment("mesh: theta " + std::to_string(hspec.theta_points) + " points over [0, pi] inclusive, phi " +
                       std::to_string(hspec.phi_points) + " points over [0, 2pi)");
  husimi_table.comment(std::string("value: ") + (hspec.squared ? "<c|rho|c>^2" : "<c|rho|c>") +
                       "; unsquared: <c|rho|c>; spin 0 is the chain average");
  husimi_table.comment("azimuthal projection: r = theta (north pole at the centre), polar_angle = phi");
  const std::set<std::size_t> husimi_at(c.output.husimi_kicks.begin(), c.output.husimi_kicks.end());

  std::vector<double> avg_entropy;
  double drift = 0.0;
  const StaticHamiltonian h(c.chain);
  const KickSource source = schedule && !c.schedule.disturbance ? schedule->source() : build_kick_source(c);

  evolve(c.chain, h, source, c.kicks, [&](const ChainState& st) {
    const double d = std::abs(st.norm() - 1.0);
    drift = std::max(drift, d);
    if (!(d <= kNormTolerance)) {
      throw NumericalError("norm drift " + format_number(d) + " at kick " + std::to_string(st.kick) +
                           " exceeds " + format_number(kNormTolerance));
    }
    const auto rhos = reduce_all(st);
    const std::string kick = std::to_string(st.kick);
    double mean_coh = 0.0;
    for (const auto& r : rhos) {
      spins.row({kick, std::to_string(r.spin + 1), format_number(population_up(r)), format_number(coherence(r)),
                 format_number(von_neumann(r, gamma))});
      mean_coh += coherence(r);
    }
    const ReducedDensity avg = average_density(rhos);
    const double s = von_neumann(avg);
    avg_entropy.push_back(s);
    average.row({kick, format_number(population_up(avg)), format_number(coherence(avg)), format_number(gamma * s),
                 format_number(mean_coh / n)});
    if (husimi_at.count(st.kick)) {
      auto dump = [&](const ReducedDensity& r, int label) {
        const HusimiGrid q = husimi(r, raw);
        for (int i = 0; i < hspec.theta_points; ++i) {
          for (int k = 0; k < hspec.phi_points; ++k) {
            const double th = hspec.theta_at(i);
            const double ph = hspec.phi_at(k);
            const double v = q.at(i, k);
            husimi_table.row({kick, std::to_string(label), format_number(th), format_number(ph), format_number(th),
                              format_number(ph), format_number(th * std::cos(ph)), format_number(th * std::sin(ph)),
                              format_number(hspec.squared ? v * v : v), format_number(v)});
          }
        }
      };
      dump(avg, 0);
      for (const auto& r : rhos) dump(r, r.spin + 1);
    }
  });
  result.max_norm_drift = drift;
  report.observed_rise = first_rise(avg_entropy, 0.05);

  auto emit = [&](const fs::path& rel, const std::string& text) {
    io::write_file(dir / rel, text);
    result.files.push_back(rel);
  };
  emit("spins.csv", spins.render());
  emit("average.csv", average.render());
  if (!husimi_at.empty()) emit("husimi.csv", husimi_table.render());

  // Classical ensemble: the bath itself or the disturbance trajectories.
  std::optional<std::pair<TorusMap, BathConfig>> ensemble;
  if (c.source == KickSourceKind::Bath) {
    ensemble.emplace(TorusMap(c.bath.map), BathConfig{c.ensemble_size(), c.bath.anchor, c.bath.spread, c.bath.seed});
  } else if (c.source == KickSourceKind::Schedule && c.schedule.disturbance) {
    const auto& d = *c.schedule.disturbance;
    ensemble.emplace(TorusMap(d.map), BathConfig{static_cast<std::size_t>(n), d.anchor, d.spread, d.seed});
  }
  if (ensemble) {
    const auto& [map, bcfg] = *ensemble;
    const PartitionSpec part = c.partition();
    const double s_max = report.has_bath ? report.s_max : max_shannon_entropy(bcfg.trains, part);
    const double theta = c.entropy.shannon_theta.value_or(1.0 / s_max);
    io::CsvTable bath("kickchain.bath/1", {"iteration", "shannon", "cumulated", "ks_prediction"});
    io::CsvTable traj("kickchain.trajectories/1", {"iteration", "train", "strength", "delay"});
    TorusEnsemble e = sample_initial(bcfg);
    double cumulated = 0.0;
    for (std::size_t it = 0; it <= c.kicks; ++it) {
      const double s = shannon_entropy(e, part, theta);
      cumulated += s;
      const double ks = report.has_bath && map.is_chaotic()
                            ? theta * ks_prediction(static_cast<double>(it), map, report.n_box, s_max)
                            : 0.0;
      bath.row({std::to_string(it), format_number(s), format_number(cumulated), format_number(ks)});
      if (c.output.trajectories) {
        for (std::size_t t = 0; t < e.size(); ++t) {
          traj.row({std::to_string(it), std::to_string(t + 1), format_number(e.points[t].strength),
                    format_number(e.points[t].delay)});
        }
      }
      if (it < c.kicks) e = step_ensemble(map, e);
    }
    emit("bath.csv", bath.render());
    if (c.output.trajectories) emit("trajectories.csv", traj.render());
  }

  if (schedule) emit("schedule.txt", schedule->to_text());
  emit("prediction.txt", report.text());
  emit("prediction.csv", report.csv());
  const std::string resolved = emit_config(c);
  emit("config.yaml", resolved);

  RunManifest m;
  m.version = version();
  m.config_yaml = resolved;
  if (c.source == KickSourceKind::Bath) m.seeds.emplace_back("bath", c.bath.seed);
  if (c.source == KickSourceKind::Schedule && c.schedule.disturbance) {
    m.seeds.emplace_back("disturbance", c.schedule.disturbance->seed);
  }
  m.started_utc = utc_timestamp(started);
  m.files = inventory(dir, result.files);
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  io::write_file(dir / "manifest.json", m.to_json());
  result.files.push_back("manifest.json");
  result.report = report;
  return result;
}

std::vector<RunResult> run_sweep(const std::vector<ExperimentConfig>& configs, unsigned workers) {
  std::set<std::filesystem::path> dirs;
  for (const auto& c : configs) {
    if (!dirs.insert(std::filesystem::weakly_canonical(c.output.directory)).second) {
      throw ConfigError("output.directory", "sweep runs must write to distinct directories");
    }
  }
  std::vector<RunResult> results(configs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        results[i] = run(configs[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace kickchain
