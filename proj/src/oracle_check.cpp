#include "kickchain/oracle_check.hpp"

#include <algorithm>
#include <cmath>

#include "kickchain/observables.hpp"
#include "kickchain/oracles.hpp"

namespace kickchain::oracles {

namespace {

ChainConfig pair(Coupling coupling, const CheckParameters& p, SpinState a, SpinState b) {
  ChainConfig c;
  c.spins = 2;
  c.coupling = coupling;
  c.coupling_strength = p.coupling;
  c.kick_frequency = p.omega0;
  c.zeeman = p.omega1;
  c.kick_angle = 0.0;
  c.initial = {a, b};
  return c;
}

KickSource constant(double l1, double l2, double delay) {
  return [=](std::size_t) { return KickRound{{l1, delay, 0.0}, {l2, delay, 0.0}}; };
}

}  // namespace

std::vector<CheckResult> compare_with_simulator(const CheckParameters& p) {
  std::vector<CheckResult> out;
  const SpinState a = SpinState::normalized({1.0, 0.0}, {2.0, 0.5});
  const SpinState b = SpinState::normalized({0.3, -0.4}, {1.0, 0.0});
  const auto periods = static_cast<std::size_t>(p.periods);

  {
    const ChainConfig c = pair(Coupling::IsingZ, p, a, b);
    const TwoSpinAmplitudes amps = TwoSpinAmplitudes::product(a, b);
    double dev = 0.0;
    evolve(c, StaticHamiltonian(c), no_kicks(2), periods, [&](const ChainState& s) {
      const auto r = reduce(s, 0);
      const auto o = isingz_free(amps, p.coupling, p.omega0, p.omega1, static_cast<int>(s.kick));
      dev = std::max({dev, std::abs(population_up(r) - o.population_up), std::abs(coherence(r) - o.coherence)});
    });
    out.push_back({"isingz_free", dev});
  }
  {
    ChainConfig c = pair(Coupling::IsingZ, p, a, b);
    c.spins = 1;
    c.initial = {a};
    std::vector<double> strengths;
    for (std::size_t k = 0; k < periods; ++k) strengths.push_back(p.lambda1 + 0.37 * static_cast<double>(k));
    double dev = 0.0;
    const KickSource src = [&](std::size_t k) { return KickRound{{strengths[k - 1], 0.9, 0.0}}; };
    evolve(c, StaticHamiltonian(c), src, periods, [&](const ChainState& s) {
      const auto o = uncoupled_kicked(a.up, a.down, std::span(strengths).first(s.kick), p.omega0, p.omega1);
      dev = std::max(dev, (reduce(s, 0).rho - o).cwiseAbs().maxCoeff());
    });
    out.push_back({"uncoupled_kicked", dev});
  }
  {
    const ChainConfig c = pair(Coupling::IsingZ, p, a, b);
    double dev = 0.0;
    evolve(c, StaticHamiltonian(c), constant(p.lambda1, p.lambda2, 0.0), periods, [&](const ChainState& s) {
      const auto rhos = reduce_all(s);
      const auto o = isingz_kicked_pair(a, b, p.lambda1, p.lambda2, p.coupling, p.omega0, p.omega1,
                                        static_cast<int>(s.kick));
      dev = std::max({dev, std::abs(coherence(rhos[0]) - o.first),
                      std::abs(coherence(average_density(rhos)) - o.average)});
    });
    out.push_back({"isingz_kicked_pair", dev});
  }
  const PairPropagator prop = heisenberg_pair_propagator(p.coupling, p.omega0, p.omega1);
  {
    const ChainConfig c = pair(Coupling::Heisenberg, p, a, b);
    const StaticHamiltonian h(c);
    const Complex expected[4][4] = {{prop.u, 0, 0, 0}, {0, prop.v, prop.w, 0}, {0, prop.w, prop.v, 0}, {0, 0, 0, prop.x}};
    double dev = 0.0;
    for (int col = 0; col < 4; ++col) {
      Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
      psi[col] = 1.0;
      h.propagate(psi, 2.0 * std::numbers::pi);
      for (int row = 0; row < 4; ++row) dev = std::max(dev, std::abs(psi[row] - expected[row][col]));
    }
    out.push_back({"heisenberg_pair_propagator", dev});
  }
  {
    const ChainConfig c =
        pair(Coupling::Heisenberg, p, SpinState::spin_up(), SpinState::normalized({1.0, 0.0}, {1.0, 0.0}));
    double dev = 0.0;
    evolve(c, StaticHamiltonian(c), constant(p.lambda1, p.lambda2, 0.0), 3, [&](const ChainState& s) {
      const double o = heisenberg_kicked_populations(p.lambda1, p.lambda2, prop, static_cast<int>(s.kick));
      dev = std::max(dev, std::abs(population_up(reduce(s, 0)) - o));
    });
    out.push_back({"heisenberg_kicked_populations", dev});
  }
  return out;
}

}  // namespace kickchain::oracles
