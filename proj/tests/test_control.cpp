#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "kickchain/control.hpp"
#include "kickchain/observables.hpp"
#include "kickchain/predictors.hpp"
#include "support.hpp"

using namespace kickchain;
using testing::Gen;

namespace {

ChainConfig ring(int spins, double j) {
  ChainConfig c;
  c.spins = spins;
  c.coupling_strength = j;
  c.topology = Topology::Closed;
  c.initial = uniform_states(spins, SpinState::normalized(1.0, 4.0));
  c.initial[0] = SpinState::spin_up();
  return c;
}

KickSchedule random_schedule(Gen& g) {
  const int n = g.integer(1, 10);
  KickSchedule s(n, g.uniform(0.0, 3.0));
  const int events = g.integer(0, 12);
  for (int e = 0; e < events; ++e) {
    ScheduleEvent ev;
    ev.first = static_cast<std::size_t>(g.integer(1, 200));
    ev.last = g.coin() ? kOpenEnded : ev.first + static_cast<std::size_t>(g.integer(0, 50));
    ev.strength = g.uniform(-7.0, 7.0);
    ev.delay = g.uniform(0.0, 6.28);
    ev.angle = g.uniform(0.0, 3.14);
    const int spin = g.integer(0, n - 1);
    bool clash = false;
    for (const auto& other : s.events(spin)) clash = clash || (ev.first <= other.last && other.first <= ev.last);
    if (!clash) s.add(spin, ev);
  }
  return s;
}

}  // namespace

TEST_CASE("schedule text round trip") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    Gen g(seed);
    const KickSchedule s = random_schedule(g);
    CAPTURE(seed);
    const KickSchedule back = KickSchedule::from_text(s.to_text());
    CHECK(back == s);
    CHECK(back.to_text() == s.to_text());
    for (std::size_t k : {std::size_t{1}, std::size_t{17}, std::size_t{150}}) {
      const auto a = s.round(k);
      const auto b = back.round(k);
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].strength == b[i].strength);
        CHECK(a[i].delay == b[i].delay);
        CHECK(a[i].angle == b[i].angle);
      }
    }
  }
}

TEST_CASE("malformed schedule text names the line") {
  const std::string good = "# kickchain schedule v1\nspins 2\nidle_angle 0\n1 1 end 3.14 0 1.57\n";
  CHECK_NOTHROW(KickSchedule::from_text(good));
  auto message = [](const std::string& text) {
    try {
      KickSchedule::from_text(text);
    } catch (const std::exception& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("# kickchain schedule v1\nspins 2\nidle_angle 0\n3 1 end 3.14 0 1.57\n").find("line 4") !=
        std::string::npos);
  CHECK(message("# kickchain schedule v1\nspins 2\nidle_angle 0\n1 5 2 3.14 0 1.57\n").find("line 4") !=
        std::string::npos);
  CHECK(message("# kickchain schedule v1\nspins x\n").find("line 2") != std::string::npos);
  CHECK(message("1 1 end 3.14 0 1.57\nspins 2\n").find("line 1") != std::string::npos);
}

TEST_CASE("schedule rounds use the idle direction when silent") {
  KickSchedule s(3);
  s.add(1, {2, 4, 1.0, 0.5, 0.0});
  for (std::size_t k = 1; k <= 5; ++k) {
    const auto r = s.round(k);
    REQUIRE(r.size() == 3);
    CHECK(r[0].strength == 0.0);
    CHECK(r[0].angle == doctest::Approx(std::numbers::pi / 2));
    const bool on = k >= 2 && k <= 4;
    CHECK(r[1].strength == (on ? 1.0 : 0.0));
  }
  CHECK_THROWS_AS(s.add(3, ScheduleEvent{}), std::out_of_range);
  CHECK_THROWS_AS(s.add(0, ScheduleEvent{5, 4}), std::invalid_argument);
  CHECK_THROWS_AS(s.add(1, ScheduleEvent{4, 9}), std::invalid_argument);
}

TEST_CASE("bath streams are cached and reproducible") {
  const TorusMap cat = TorusMap::cat_map();
  const TorusEnsemble e = sample_initial({4, {1.0, 2.0}, 1e-3, 5});
  const TorusStream a = bath_stream(cat, e);
  const TorusStream b = bath_stream(cat, e);
  const auto late = a(9);
  const auto early = a(3);
  CHECK(b(3) == early);
  CHECK(b(9) == late);
  CHECK(a(1) == e.points);
  const auto it = propagate(cat, e, 8);
  CHECK(a(9) == it[8].points);
  const TorusStream sum = add_streams(a, a);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(sum(2)[i].strength == doctest::Approx(wrap_angle(2 * it[1].points[i].strength)));
  }
  CHECK_THROWS_AS(a(0), std::out_of_range);
}

TEST_CASE("disturbance shifts every kick including silent ones") {
  KickSchedule s(2);
  s.add(0, {1, kOpenEnded, std::numbers::pi, 0.0, std::numbers::pi / 2});
  const TorusStream shift = [](std::size_t) { return std::vector<TorusPoint>{{0.25, 0.5}, {0.1, 6.2}}; };
  const KickSource d = disturb(s.source(), shift);
  const auto r = d(1);
  CHECK(r[0].strength == doctest::Approx(std::numbers::pi + 0.25));
  CHECK(r[0].delay == doctest::Approx(0.5));
  CHECK(r[1].strength == doctest::Approx(0.1));
  CHECK(r[1].delay == doctest::Approx(6.2));
  const TorusStream narrow = [](std::size_t) { return std::vector<TorusPoint>(1); };
  CHECK_THROWS_AS(disturb(s.source(), narrow)(1), std::invalid_argument);
}

TEST_CASE("wave prediction timing") {
  const ChainConfig c = ring(9, 0.05);
  const WavePrediction w = predict_wave(c);
  const auto avg = averaged_periods(TransmissionModel(9, 0.05, 1.0));
  REQUIRE(w.arrival.size() == 9);
  CHECK(w.arrival[0] == 0.0);
  CHECK(w.period[0] == doctest::Approx(20.0));
  CHECK(w.arrival[1] == doctest::Approx(7.5));
  for (std::size_t n = 1; n < 9; ++n) CHECK(w.period[n] == doctest::Approx(avg[n - 1]));
  for (std::size_t n = 2; n < 9; ++n) CHECK(w.arrival[n] == doctest::Approx(w.arrival[n - 1] + w.period[n - 1] / 4));
  CHECK(w.oscillation_end(0, 2) == doctest::Approx(30.0));
  CHECK(w.oscillation_end(1, 1) == doctest::Approx(7.5 + 7.5));
  CHECK_THROWS_AS(w.oscillation_end(9, 1), std::out_of_range);
  CHECK_THROWS_AS(w.oscillation_end(0, 0), std::invalid_argument);
}

TEST_CASE("one-way schedule") {
  const ChainConfig c = ring(9, 0.05);
  const KickSchedule s = schedule_one_way(c, 8);
  REQUIRE(s.events(8).size() == 1);
  CHECK(s.events(8)[0].first == 1);
  CHECK(s.events(8)[0].last == 10);
  CHECK(schedule_one_way(c, 8, 4).events(8)[0].last == 4);
  ChainConfig open = c;
  open.topology = Topology::Open;
  CHECK_THROWS_AS(schedule_one_way(open, 8), std::invalid_argument);
  ChainConfig ising = c;
  ising.coupling = Coupling::IsingZ;
  CHECK_THROWS_AS(schedule_one_way(ising, 8), std::invalid_argument);
  CHECK_THROWS_AS(schedule_one_way(c, 9), std::out_of_range);
}

TEST_CASE("blocking the last spin sends the wave forward first") {
  const ChainConfig c = ring(9, 0.05);
  const StaticHamiltonian h(c);
  const KickSchedule s = schedule_one_way(c, 8);
  std::vector<std::vector<double>> pops(9);
  evolve(c, h, s.source(), 60, [&](const ChainState& st) {
    for (int n = 0; n < 9; ++n) pops[static_cast<std::size_t>(n)].push_back(population_up(reduce(st, n)));
  });
  auto peak = [&](int n) {
    const auto& p = pops[static_cast<std::size_t>(n)];
    return std::max_element(p.begin() + 1, p.begin() + 30) - p.begin();
  };
  CHECK(peak(1) < peak(7));
}

TEST_CASE("freeze schedules") {
  const ChainConfig c = ring(9, 0.05);
  for (auto timing : {FreezeTiming::Predicted, FreezeTiming::Simulated}) {
    const KickSchedule s = schedule_freeze(c, 4, timing);
    CHECK(s.events(4).empty());
    for (int n = 0; n < 9; ++n) {
      if (n == 4) continue;
      CAPTURE(n);
      REQUIRE_FALSE(s.events(n).empty());
      const auto& last = s.events(n).back();
      CHECK(last.last == kOpenEnded);
      CHECK(last.strength == doctest::Approx(std::numbers::pi));
      CHECK(last.angle == doctest::Approx(std::numbers::pi / 2));
    }
    // the launch block on the last spin ends before its freeze begins
    CHECK(s.events(8).front().last < s.events(8).back().first);
  }
  const KickSchedule predicted = schedule_freeze(c, 4);
  const WavePrediction w = predict_wave(c);
  CHECK(predicted.events(0).back().first == static_cast<std::size_t>(std::lround(w.oscillation_end(0, 2))));
  CHECK(predicted.events(6).back().first == static_cast<std::size_t>(std::lround(w.oscillation_end(6, 1))));
  CHECK_THROWS_AS(schedule_freeze(c, 0), std::invalid_argument);
  CHECK_THROWS_AS(schedule_freeze(c, 8), std::invalid_argument);

  const KickSchedule instant = schedule_freeze_instant(c, 4);
  const std::size_t at = instant.events(0).back().first;
  for (int n = 0; n < 9; ++n) {
    if (n != 4) CHECK(instant.events(n).back().first == at);
  }
  CHECK(at == static_cast<std::size_t>(std::lround(w.oscillation_end(3, 2))));
}
