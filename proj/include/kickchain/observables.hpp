// Single-spin observables extracted from chain snapshots.
#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kickchain/chain.hpp"

namespace kickchain {

struct ReducedDensity {
  Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
  int spin = 0;  // -1 for the chain average
};

/// Partial trace over every spin but `spin` (0-based).
ReducedDensity reduce(const ChainState& psi, int spin);

/// All N reduced densities in one pass over the amplitudes.
std::vector<ReducedDensity> reduce_all(const ChainState& psi);

/// rho_tot = (1/N) sum_n rho_n
ReducedDensity average_density(std::span<const ReducedDensity> rhos);

double population_up(const ReducedDensity& r);
double coherence(const ReducedDensity& r);

/// -gamma tr(rho ln rho), eigenvalues below 1e-12 dropped.
double von_neumann(const ReducedDensity& r, double gamma = 1.0);

/// Spin coherent state cos(theta/2)|up> + e^{i phi} sin(theta/2)|down>.
Eigen::Vector2cd coherent_state(double theta, double phi);

struct HusimiSpec {
  int theta_points = 64;  // over [0, pi], endpoints included
  int phi_points = 128;   // over [0, 2pi)
  bool squared = true;    // |<theta,phi|rho|theta,phi>|^2 as opposed to the bare expectation

  double theta_at(int i) const;
  double phi_at(int k) const;
};

struct HusimiGrid {
  HusimiSpec spec;
  std::vector<double> values;  // row-major, theta index outer

  double at(int i, int k) const {
    return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(spec.phi_points) +
                  static_cast<std::size_t>(k)];
  }
};

HusimiGrid husimi(const ReducedDensity& r, const HusimiSpec& spec = {});

}  // namespace kickchain
