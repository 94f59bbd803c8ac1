#include <doctest.h>

#include <numbers>

#include "kickchain/observables.hpp"
#include "kickchain/oracle_check.hpp"
#include "kickchain/oracles.hpp"
#include "support.hpp"

using namespace kickchain;
using testing::Gen;

namespace {

ChainConfig pair(Coupling coupling, double j, double w1, SpinState a, SpinState b) {
  ChainConfig c;
  c.spins = 2;
  c.coupling = coupling;
  c.coupling_strength = j;
  c.zeeman = w1;
  c.initial = {a, b};
  return c;
}

}  // namespace

TEST_CASE("free Ising-Z pair: closed form against the dense reference propagator") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    Gen g(seed);
    const double j = g.uniform(0.0, 2.0);
    const double w1 = g.uniform(0.0, 1.0);
    const SpinState a = g.spin();
    const SpinState b = g.spin();
    const ChainConfig c = pair(Coupling::IsingZ, j, w1, a, b);
    const Eigen::MatrixXcd u = testing::reference_propagator(testing::reference_hamiltonian(c), 2 * std::numbers::pi, 1.0);
    Eigen::VectorXcd psi = testing::reference_product(c.initial);
    const auto amps = oracles::TwoSpinAmplitudes::product(a, b);
    CHECK(amps.norm() == doctest::Approx(1.0));
    for (int i = 0; i <= 40; ++i) {
      const Eigen::Matrix2cd rho = testing::reference_reduce(psi, 2, 0);
      const auto o = oracles::isingz_free(amps, j, 1.0, w1, i);
      CHECK(std::abs(o.population_up - rho(0, 0).real()) < 1e-10);
      CHECK(std::abs(o.coherence - std::abs(rho(0, 1))) < 1e-10);
      psi = u * psi;
    }
  }
}

TEST_CASE("closed forms match the simulator over 200 kicks for random parameters") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Gen g(seed);
    const double j = g.uniform(0.01, 1.0);
    const double w1 = g.uniform(0.0, 1.0);
    const double l1 = g.uniform(0.0, 6.28);
    const double l2 = g.uniform(0.0, 6.28);
    const SpinState a = g.spin();
    const SpinState b = g.spin();
    CAPTURE(seed);

    const ChainConfig z = pair(Coupling::IsingZ, j, w1, a, b);
    const KickSource constant = [&](std::size_t) { return KickRound{{l1, 0.0, 0.0}, {l2, 0.0, 0.0}}; };
    double free_dev = 0.0;
    double kicked_dev = 0.0;
    const auto amps = oracles::TwoSpinAmplitudes::product(a, b);
    evolve(z, StaticHamiltonian(z), no_kicks(2), 200, [&](const ChainState& s) {
      const auto o = oracles::isingz_free(amps, j, 1.0, w1, static_cast<int>(s.kick));
      const auto r = reduce(s, 0);
      free_dev = std::max({free_dev, std::abs(o.population_up - population_up(r)), std::abs(o.coherence - coherence(r))});
    });
    evolve(z, StaticHamiltonian(z), constant, 200, [&](const ChainState& s) {
      const auto o = oracles::isingz_kicked_pair(a, b, l1, l2, j, 1.0, w1, static_cast<int>(s.kick));
      const auto rhos = reduce_all(s);
      kicked_dev = std::max({kicked_dev, std::abs(o.first - coherence(rhos[0])),
                             std::abs(o.average - coherence(average_density(rhos)))});
    });
    CHECK(free_dev < 1e-10);
    CHECK(kicked_dev < 1e-10);

    ChainConfig lone = z;
    lone.spins = 1;
    lone.initial = {a};
    std::vector<double> strengths;
    std::vector<KickRound> rounds;
    for (int k = 0; k < 200; ++k) {
      strengths.push_back(g.uniform(0.0, 6.28));
      rounds.push_back({{strengths.back(), g.uniform(0.0, 6.28), 0.0}});
    }
    double lone_dev = 0.0;
    evolve(lone, StaticHamiltonian(lone), replay_rounds(rounds), 200, [&](const ChainState& s) {
      const auto o = oracles::uncoupled_kicked(a.up, a.down, std::span(strengths).first(s.kick), 1.0, w1);
      lone_dev = std::max(lone_dev, (o - reduce(s, 0).rho).cwiseAbs().maxCoeff());
    });
    CHECK(lone_dev < 1e-10);

    const ChainConfig hz = pair(Coupling::Heisenberg, j, w1, SpinState::spin_up(), SpinState::normalized(1.0, 1.0));
    const auto prop = oracles::heisenberg_pair_propagator(j, 1.0, w1);
    evolve(hz, StaticHamiltonian(hz), constant, 3, [&](const ChainState& s) {
      const double o = oracles::heisenberg_kicked_populations(l1, l2, prop, static_cast<int>(s.kick));
      CHECK(std::abs(o - population_up(reduce(s, 0))) < 1e-10);
    });
  }
}

TEST_CASE("Heisenberg pair propagator entries against the matrix exponential") {
  for (double j : {0.05, 0.3, 1.0, 1.7}) {
    const ChainConfig c = pair(Coupling::Heisenberg, j, 0.5, SpinState::spin_up(), SpinState::spin_up());
    const Eigen::MatrixXcd u =
        testing::reference_propagator(testing::reference_hamiltonian(c), 2 * std::numbers::pi, 1.0);
    const auto p = oracles::heisenberg_pair_propagator(j, 1.0, 0.5);
    CHECK(std::abs(u(0, 0) - p.u) < 1e-12);
    CHECK(std::abs(u(1, 1) - p.v) < 1e-12);
    CHECK(std::abs(u(2, 2) - p.v) < 1e-12);
    CHECK(std::abs(u(1, 2) - p.w) < 1e-12);
    CHECK(std::abs(u(2, 1) - p.w) < 1e-12);
    CHECK(std::abs(u(3, 3) - p.x) < 1e-12);
    CHECK(std::abs(u(0, 3)) < 1e-12);
  }
  const auto p = oracles::heisenberg_pair_propagator(0.3, 1.0, 0.5);
  CHECK_THROWS_AS(oracles::heisenberg_kicked_populations(1.0, 1.0, p, 4), std::invalid_argument);
  CHECK_THROWS_AS(oracles::heisenberg_kicked_populations(1.0, 1.0, p, -1), std::invalid_argument);
  CHECK(oracles::heisenberg_kicked_populations(1.0, 1.0, p, 0) == doctest::Approx(1.0));
}

TEST_CASE("bundled comparison reports agreement") {
  for (const auto& r : oracles::compare_with_simulator({})) {
    CAPTURE(r.name);
    CHECK(r.max_deviation < 1e-10);
  }
}
