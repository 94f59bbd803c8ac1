#include "kickchain/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kickchain {

ReducedDensity reduce(const ChainState& psi, int spin) {
  const int n = psi.spins();
  if (spin < 0 || spin >= n) {
    throw std::out_of_range("spin index " + std::to_string(spin) + " outside [0, " +
                            std::to_string(n) + ")");
  }
  const Eigen::Index stride = Eigen::Index{1} << (n - 1 - spin);
  const Eigen::Index dim = psi.amplitudes.size();
  double up = 0.0;
  double down = 0.0;
  Complex off{0.0, 0.0};
  for (Eigen::Index base = 0; base < dim; base += 2 * stride) {
    for (Eigen::Index k = base; k < base + stride; ++k) {
      const Complex a = psi.amplitudes(k);
      const Complex b = psi.amplitudes(k + stride);
      up += std::norm(a);
      down += std::norm(b);
      off += a * std::conj(b);
    }
  }
  ReducedDensity r;
  r.spin = spin;
  r.rho << up, off, std::conj(off), down;
  return r;
}

std::vector<ReducedDensity> reduce_all(const ChainState& psi) {
  const int n = psi.spins();
  std::vector<ReducedDensity> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) out.push_back(reduce(psi, s));
  return out;
}

ReducedDensity average_density(std::span<const ReducedDensity> rhos) {
  if (rhos.empty()) throw std::invalid_argument("average of no reduced densities");
  ReducedDensity avg;
  avg.spin = -1;
  for (const auto& r : rhos) avg.rho += r.rho;
  avg.rho /= static_cast<double>(rhos.size());
  return avg;
}

double population_up(const ReducedDensity& r) { return r.rho(0, 0).real(); }

double coherence(const ReducedDensity& r) { return std::abs(r.rho(0, 1)); }

double von_neumann(const ReducedDensity& r, double gamma) {
  // Closed-form eigenvalues of a 2x2 Hermitian matrix.
  const double a = r.rho(0, 0).real();
  const double d = r.rho(1, 1).real();
  const double mean = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), std::abs(r.rho(0, 1)));
  double s = 0.0;
  for (double p : {mean + radius, mean - radius}) {
    if (p > 1e-12) s -= p * std::log(p);
  }
  // Rounding can push the larger eigenvalue just above 1.
  return gamma * std::max(s, 0.0);
}

Eigen::Vector2cd coherent_state(double theta, double phi) {
  return {Complex(std::cos(theta / 2.0), 0.0), std::polar(std::sin(theta / 2.0), phi)};
}

double HusimiSpec::theta_at(int i) const {
  return theta_points == 1 ? 0.0 : std::numbers::pi * i / (theta_points - 1);
}

double HusimiSpec::phi_at(int k) const { return 2.0 * std::numbers::pi * k / phi_points; }

HusimiGrid husimi(const ReducedDensity& r, const HusimiSpec& spec) {
  if (spec.theta_points < 1 || spec.phi_points < 1) {
    throw std::invalid_argument("Husimi grid needs at least one point per axis");
  }
  HusimiGrid grid{spec, {}};
  grid.values.reserve(static_cast<std::size_t>(spec.theta_points) *
                      static_cast<std::size_t>(spec.phi_points));
  for (int i = 0; i < spec.theta_points; ++i) {
    for (int k = 0; k < spec.phi_points; ++k) {
      const Eigen::Vector2cd c = coherent_state(spec.theta_at(i), spec.phi_at(k));
      const double q = (c.adjoint() * r.rho * c)(0).real();
      grid.values.push_back(spec.squared ? q * q : q);
    }
  }
  return grid;
}

}  // namespace kickchain
