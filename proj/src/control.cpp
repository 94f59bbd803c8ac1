#include "kickchain/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kickchain/observables.hpp"
#include "kickchain/predictors.hpp"

namespace kickchain {

namespace {

void require_spin(int spin, int spins) {
  if (spin < 0 || spin >= spins) {
    throw std::out_of_range("spin " + std::to_string(spin + 1) + " outside 1.." +
                            std::to_string(spins));
  }
}

void require_closed(const ChainConfig& cfg) {
  cfg.validate();
  if (cfg.topology != Topology::Closed) {
    throw std::invalid_argument("control schedules are defined on closed chains");
  }
  if (cfg.coupling != Coupling::Heisenberg || !(cfg.coupling_strength > 0.0)) {
    throw std::invalid_argument("control schedules need a Heisenberg chain with J > 0");
  }
}

std::size_t kick_at(double t) { return static_cast<std::size_t>(std::max(1.0, std::round(t))); }

}  // namespace

TorusStream bath_stream(const TorusMap& map, TorusEnsemble initial) {
  auto cache = std::make_shared<std::vector<TorusEnsemble>>();
  cache->push_back(std::move(initial));
  return [map, cache](std::size_t kick) {
    if (kick == 0) throw std::out_of_range("kick numbers start at 1");
    while (cache->size() < kick) cache->push_back(step_ensemble(map, cache->back()));
    return (*cache)[kick - 1].points;
  };
}

TorusStream add_streams(TorusStream a, TorusStream b) {
  return [a = std::move(a), b = std::move(b)](std::size_t kick) {
    auto x = a(kick);
    const auto y = b(kick);
    if (x.size() != y.size()) throw std::invalid_argument("disturbance streams differ in width");
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = TorusPoint::wrapped(x[i].strength + y[i].strength, x[i].delay + y[i].delay);
    }
    return x;
  };
}

KickSource bath_kicks(const TorusMap& map, TorusEnsemble initial, double angle) {
  return [stream = bath_stream(map, std::move(initial)), angle](std::size_t kick) {
    const auto pts = stream(kick);
    KickRound round(pts.size());
    for (std::size_t s = 0; s < pts.size(); ++s) round[s] = {pts[s].strength, pts[s].delay, angle};
    return round;
  };
}

KickSchedule::KickSchedule(int spins, double idle_angle) : idle_angle_(idle_angle) {
  if (spins < 1) throw std::invalid_argument("schedule needs at least one spin");
  events_.resize(static_cast<std::size_t>(spins));
}

bool KickSchedule::empty() const {
  return std::all_of(events_.begin(), events_.end(), [](const auto& e) { return e.empty(); });
}

void KickSchedule::add(int spin, const ScheduleEvent& e) {
  require_spin(spin, spins());
  if (e.first == 0 || e.last < e.first) {
    throw std::invalid_argument("schedule window must satisfy 1 <= first <= last");
  }
  auto& list = events_[static_cast<std::size_t>(spin)];
  for (const auto& other : list) {
    if (e.first <= other.last && other.first <= e.last) {
      throw std::invalid_argument("overlapping schedule windows on spin " + std::to_string(spin + 1));
    }
  }
  list.push_back(e);
  std::sort(list.begin(), list.end(),
            [](const ScheduleEvent& a, const ScheduleEvent& b) { return a.first < b.first; });
}

const std::vector<ScheduleEvent>& KickSchedule::events(int spin) const {
  require_spin(spin, spins());
  return events_[static_cast<std::size_t>(spin)];
}

KickRound KickSchedule::round(std::size_t kick) const {
  KickRound r(events_.size(), Kick{0.0, 0.0, idle_angle_});
  for (std::size_t s = 0; s < events_.size(); ++s) {
    for (const auto& e : events_[s]) {
      if (e.covers(kick)) {
        r[s] = {e.strength, e.delay, e.angle};
        break;
      }
    }
  }
  return r;
}

KickSource KickSchedule::source() const {
  return [copy = *this](std::size_t kick) { return copy.round(kick); };
}

std::string KickSchedule::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "# kickchain schedule v1\n";
  out << "spins " << spins() << "\n";
  out << "idle_angle " << idle_angle_ << "\n";
  out << "# spin first last strength delay angle\n";
  for (int s = 0; s < spins(); ++s) {
    for (const auto& e : events_[static_cast<std::size_t>(s)]) {
      out << s + 1 << ' ' << e.first << ' ';
      if (e.last == kOpenEnded) {
        out << "end";
      } else {
        out << e.last;
      }
      out << ' ' << e.strength << ' ' << e.delay << ' ' << e.angle << "\n";
    }
  }
  return out.str();
}

KickSchedule KickSchedule::from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::optional<KickSchedule> sched;
  double idle = std::numbers::pi / 2.0;
  int line_no = 0;
  auto fail = [&line_no](const std::string& why) {
    throw std::invalid_argument("schedule line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string head;
    if (!(fields >> head)) continue;
    if (head == "spins") {
      int n = 0;
      if (!(fields >> n) || sched) fail("bad or repeated 'spins' line");
      sched.emplace(n, idle);
    } else if (head == "idle_angle") {
      if (!(fields >> idle)) fail("bad idle_angle");
      if (sched) {
        KickSchedule rebuilt(sched->spins(), idle);
        rebuilt.events_ = sched->events_;
        sched = std::move(rebuilt);
      }
    } else {
      if (!sched) fail("event before the 'spins' line");
      int spin = 0;
      std::size_t first = 0;
      std::string last;
      ScheduleEvent e;
      try {
        spin = std::stoi(head);
      } catch (const std::exception&) {
        fail("unknown key '" + head + "'");
      }
      if (!(fields >> first >> last >> e.strength >> e.delay >> e.angle)) fail("expected 6 fields");
      e.first = first;
      if (last == "end") {
        e.last = kOpenEnded;
      } else {
        try {
          e.last = std::stoull(last);
        } catch (const std::exception&) {
          fail("bad window end '" + last + "'");
        }
      }
      std::string extra;
      if (fields >> extra) fail("trailing field '" + extra + "'");
      try {
        sched->add(spin - 1, e);
      } catch (const std::exception& ex) {
        fail(ex.what());
      }
    }
  }
  if (!sched) throw std::invalid_argument("schedule text has no 'spins' line");
  return *sched;
}

bool operator==(const KickSchedule& a, const KickSchedule& b) {
  if (a.idle_angle_ != b.idle_angle_ || a.events_.size() != b.events_.size()) return false;
  for (std::size_t s = 0; s < a.events_.size(); ++s) {
    const auto& x = a.events_[s];
    const auto& y = b.events_[s];
    if (x.size() != y.size()) return false;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (x[k].first != y[k].first || x[k].last != y[k].last || x[k].strength != y[k].strength ||
          x[k].delay != y[k].delay || x[k].angle != y[k].angle) {
        return false;
      }
    }
  }
  return true;
}

double WavePrediction::oscillation_end(int spin, int oscillation) const {
  if (spin < 0 || static_cast<std::size_t>(spin) >= arrival.size()) {
    throw std::out_of_range("spin outside the wave prediction");
  }
  if (oscillation < 1) throw std::invalid_argument("oscillations are counted from 1");
  const auto s = static_cast<std::size_t>(spin);
  return arrival[s] + (oscillation - 0.5) * period[s];
}

WavePrediction predict_wave(const ChainConfig& cfg) {
  const TransmissionModel model(cfg.spins, cfg.coupling_strength, cfg.kick_frequency);
  const auto avg = averaged_periods(model);
  WavePrediction w;
  w.period.push_back(model.edge());
  w.arrival.push_back(0.0);
  for (double p : avg) w.period.push_back(p);
  w.arrival.push_back(0.5 * w.period[1]);
  for (std::size_t n = 1; n + 1 < w.period.size(); ++n) {
    w.arrival.push_back(w.arrival[n] + 0.25 * w.period[n]);
  }
  return w;
}

KickSchedule schedule_one_way(const ChainConfig& cfg, int blocked, std::optional<std::size_t> duration) {
  require_closed(cfg);
  require_spin(blocked, cfg.spins);
  const std::size_t len =
      duration ? *duration : kick_at(mid_period(cfg.coupling_strength, cfg.kick_frequency));
  KickSchedule s(cfg.spins);
  if (len > 0) s.add(blocked, ScheduleEvent{1, len});
  return s;
}

namespace {

std::vector<std::vector<double>> simulate_populations(const ChainConfig& cfg, const StaticHamiltonian& h,
                                                      const KickSchedule& s, std::size_t kicks) {
  std::vector<std::vector<double>> pops(static_cast<std::size_t>(cfg.spins));
  evolve(cfg, h, s.source(), kicks, [&pops](const ChainState& st) {
    for (const auto& r : reduce_all(st)) pops[static_cast<std::size_t>(r.spin)].push_back(population_up(r));
  });
  return pops;
}

// Population minima with hysteresis, so period-to-period jitter from the
// blocking kicks does not count as an oscillation.
std::vector<std::size_t> oscillation_minima(const std::vector<double>& p, double hysteresis = 0.05) {
  std::vector<std::size_t> minima;
  bool falling = false;
  double extreme = p.empty() ? 0.0 : p[0];
  std::size_t at = 0;
  for (std::size_t k = 1; k < p.size(); ++k) {
    if (!falling) {
      extreme = std::max(extreme, p[k]);
      if (p[k] < extreme - hysteresis) {
        falling = true;
        extreme = p[k];
        at = k;
      }
    } else {
      if (p[k] < extreme) {
        extreme = p[k];
        at = k;
      }
      if (p[k] > extreme + hysteresis) {
        minima.push_back(at);
        falling = false;
        extreme = p[k];
      }
    }
  }
  return minima;
}

void check_freeze_target(const ChainConfig& cfg, int target) {
  require_closed(cfg);
  require_spin(target, cfg.spins);
  if (target < 1 || target > cfg.spins - 2) {
    throw std::invalid_argument("freeze target must leave spins on both sides and spare the blocked last spin");
  }
}

}  // namespace

KickSchedule schedule_freeze(const ChainConfig& cfg, int target, FreezeTiming timing) {
  check_freeze_target(cfg, target);
  KickSchedule s = schedule_one_way(cfg, cfg.spins - 1);
  const std::size_t block_end = s.events(cfg.spins - 1).front().last;
  auto freeze = [&](int n, std::size_t first) {
    if (n == cfg.spins - 1) first = std::max(first, block_end + 1);
    s.add(n, ScheduleEvent{first, kOpenEnded});
  };
  auto wanted = [target](int n) { return n < target ? 2 : 1; };

  if (timing == FreezeTiming::Predicted) {
    const WavePrediction w = predict_wave(cfg);
    for (int n = 0; n < cfg.spins; ++n) {
      if (n != target) freeze(n, kick_at(w.oscillation_end(n, wanted(n))));
    }
    return s;
  }

  // Freezing a spin changes what its neighbours do next, so spins are frozen
  // one at a time, earliest wanted minimum first, re-simulating in between.
  const StaticHamiltonian h(cfg);
  const auto horizon = static_cast<std::size_t>(8.0 * edge_period(cfg.coupling_strength, cfg.kick_frequency));
  std::vector<int> pending;
  for (int n = 0; n < cfg.spins; ++n) {
    if (n != target) pending.push_back(n);
  }
  std::size_t last_freeze = 0;
  while (!pending.empty()) {
    const auto pops = simulate_populations(cfg, h, s, horizon);
    std::size_t best_kick = kOpenEnded;
    std::size_t best = 0;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      const int n = pending[i];
      const auto& p = pops[static_cast<std::size_t>(n)];
      const auto m = oscillation_minima(p);
      const auto need = static_cast<std::size_t>(wanted(n));
      std::size_t k = 0;
      if (m.size() >= need && m[need - 1] > last_freeze) {
        k = m[need - 1];
      } else {
        // The oscillation was cut short by a frozen neighbour: take the
        // lowest point still ahead.
        const auto from = p.begin() + static_cast<std::ptrdiff_t>(last_freeze + 1);
        k = static_cast<std::size_t>(std::min_element(from, p.end()) - p.begin());
      }
      if (k < best_kick) {
        best_kick = k;
        best = i;
      }
    }
    freeze(pending[best], std::max<std::size_t>(1, best_kick));
    last_freeze = best_kick;
    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return s;
}

KickSchedule schedule_freeze_instant(const ChainConfig& cfg, int target) {
  check_freeze_target(cfg, target);
  KickSchedule s = schedule_one_way(cfg, cfg.spins - 1);
  const std::size_t block_end = s.events(cfg.spins - 1).front().last;
  const std::size_t at =
      std::max(block_end + 1, kick_at(predict_wave(cfg).oscillation_end(target - 1, 2)));
  for (int n = 0; n < cfg.spins; ++n) {
    if (n != target) s.add(n, ScheduleEvent{at, kOpenEnded});
  }
  return s;
}

KickSource disturb(const KickSource& base, TorusStream disturbance) {
  return [base, disturbance = std::move(disturbance)](std::size_t kick) {
    KickRound round = base(kick);
    const auto offsets = disturbance(kick);
    if (offsets.size() != round.size()) {
      throw std::invalid_argument("disturbance needs one trajectory per spin");
    }
    for (std::size_t s = 0; s < round.size(); ++s) {
      round[s].strength = wrap_angle(round[s].strength + offsets[s].strength);
      round[s].delay = wrap_angle(round[s].delay + offsets[s].delay);
    }
    return round;
  };
}

}  // namespace kickchain
