// Closed-form two-spin results used to cross-check the simulator.
//
// Amplitude names are local to each function: TwoSpinAmplitudes holds the
// general pair state, while the kicked Ising-Z pair takes the two single-spin
// states (chi, zeta) and (gamma_amp, delta) of a product initial state.
#pragma once

#include <array>
#include <span>

#include <Eigen/Dense>

#include "kickchain/chain.hpp"

namespace kickchain::oracles {

/// Amplitudes of |up up>, |up down>, |down up>, |down down>.
struct TwoSpinAmplitudes {
  Complex alpha;
  Complex beta;
  Complex gamma_amp;
  Complex delta;

  static TwoSpinAmplitudes product(const SpinState& first, const SpinState& second);
  double norm() const;
};

struct PopulationCoherence {
  double population_up = 0.0;
  double coherence = 0.0;
};

/// Unkicked Ising-Z pair after i periods, observables of the first spin.
PopulationCoherence isingz_free(const TwoSpinAmplitudes& amps, double coupling, double omega0,
                                double omega1, int i);

/// Reduced density of a lone spin kicked along |up> with the given strengths
/// (one per period, i = strengths.size() periods). Delays drop out.
Eigen::Matrix2cd uncoupled_kicked(Complex alpha, Complex beta, std::span<const double> strengths,
                                  double omega0, double omega1);

struct PairCoherence {
  double first = 0.0;    // |rho_1 off-diagonal|
  double average = 0.0;  // |(rho_1 + rho_2)/2 off-diagonal|
};

/// Ising-Z pair kicked along |up> every period with constant strengths
/// lambda1 (first spin) and lambda2 (second spin); initial state
/// (chi|up> + zeta|down>) (x) (gamma_amp|up> + delta|down>).
PairCoherence isingz_kicked_pair(const SpinState& first, const SpinState& second, double lambda1,
                                 double lambda2, double coupling, double omega0, double omega1, int i);

/// Entries of exp(-i H 2pi / omega0) for the Heisenberg pair:
/// u on |up up>, the symmetric middle block [[v, w], [w, v]], x on |down down>.
struct PairPropagator {
  Complex u;
  Complex v;
  Complex w;
  Complex x;
};

/// Computed from the exact rotation that diagonalises the middle block.
PairPropagator heisenberg_pair_propagator(double coupling, double omega0, double omega1);

/// Up population of the first spin after i in {0, 1, 2, 3} periods, starting
/// from |up> (x) (|up> + |down>)/sqrt(2) with kicks along |up> at zero delay.
/// Throws std::invalid_argument for other i.
double heisenberg_kicked_populations(double lambda1, double lambda2, const PairPropagator& p, int i);

}  // namespace kickchain::oracles
