// Shared test helpers: seeded generators and a brute-force reference chain.
#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "kickchain/chain.hpp"

namespace testing {

using kickchain::Complex;

/// Small wrapper for property tests; every case logs its seed on failure.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }
  Complex complex() { return {uniform(-1.0, 1.0), uniform(-1.0, 1.0)}; }

  kickchain::SpinState spin() {
    Complex a = complex();
    Complex b = complex();
    if (std::norm(a) + std::norm(b) < 1e-6) a = 1.0;
    return kickchain::SpinState::normalized(a, b);
  }

  kickchain::ChainConfig chain(int min_spins, int max_spins) {
    kickchain::ChainConfig c;
    c.spins = integer(min_spins, max_spins);
    c.coupling = coin() ? kickchain::Coupling::Heisenberg : kickchain::Coupling::IsingZ;
    c.coupling_strength = uniform(0.0, 1.5);
    c.kick_frequency = uniform(0.5, 2.0);
    c.zeeman = uniform(0.0, 1.0);
    c.topology = c.spins >= 3 && coin() ? kickchain::Topology::Closed : kickchain::Topology::Open;
    c.kick_angle = uniform(0.0, 3.2);
    for (int i = 0; i < c.spins; ++i) c.initial.push_back(spin());
    return c;
  }

  kickchain::KickRound round(int spins) {
    kickchain::KickRound r;
    for (int i = 0; i < spins; ++i) r.push_back({uniform(0.0, 6.3), uniform(0.0, 6.3), uniform(0.0, 3.2)});
    return r;
  }

 private:
  std::mt19937_64 rng_;
};

/// Dense Hamiltonian built from Kronecker products of spin operators.
inline Eigen::MatrixXcd reference_hamiltonian(const kickchain::ChainConfig& c) {
  using M = Eigen::MatrixXcd;
  const Complex i(0.0, 1.0);
  M sx(2, 2), sy(2, 2), sz(2, 2), down(2, 2);
  sx << 0, 0.5, 0.5, 0;
  sy << 0, -0.5 * i, 0.5 * i, 0;
  sz << 0.5, 0, 0, -0.5;
  down << 0, 0, 0, 1;
  auto site = [&](const M& op, int at) {
    M out = M::Identity(1, 1);
    for (int n = 0; n < c.spins; ++n) {
      const M f = n == at ? op : M::Identity(2, 2);
      out = Eigen::kroneckerProduct(out, f).eval();
    }
    return out;
  };
  const Eigen::Index dim = Eigen::Index{1} << c.spins;
  M h = M::Zero(dim, dim);
  std::vector<std::pair<int, int>> bonds;
  for (int n = 0; n + 1 < c.spins; ++n) bonds.emplace_back(n, n + 1);
  if (c.topology == kickchain::Topology::Closed && c.spins >= 3) bonds.emplace_back(c.spins - 1, 0);
  for (auto [a, b] : bonds) {
    h -= c.coupling_strength * site(sz, a) * site(sz, b);
    if (c.coupling == kickchain::Coupling::Heisenberg) {
      h -= c.coupling_strength * (site(sx, a) * site(sx, b) + site(sy, a) * site(sy, b));
    }
  }
  for (int n = 0; n < c.spins; ++n) h += 0.5 * c.zeeman * site(down, n);
  return h;
}

inline Eigen::MatrixXcd reference_propagator(const Eigen::MatrixXcd& h, double dphi, double omega0) {
  const Eigen::MatrixXcd a = Complex(0.0, -dphi / omega0) * h;
  return a.exp();
}

inline Eigen::MatrixXcd reference_kick(const kickchain::ChainConfig& c, int spin, const kickchain::Kick& k) {
  Eigen::Vector2cd w(std::cos(k.angle), std::sin(k.angle));
  Eigen::MatrixXcd local = Eigen::MatrixXcd::Identity(2, 2) + (std::polar(1.0, -k.strength) - 1.0) * w * w.adjoint();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (int n = 0; n < c.spins; ++n) {
    const Eigen::MatrixXcd f = n == spin ? local : Eigen::MatrixXcd::Identity(2, 2);
    out = Eigen::kroneckerProduct(out, f).eval();
  }
  return out;
}

/// Full-period operator assembled from dense pieces, same kick ordering rule.
inline Eigen::MatrixXcd reference_period(const kickchain::ChainConfig& c, const kickchain::KickRound& r) {
  const Eigen::MatrixXcd h = reference_hamiltonian(c);
  std::vector<int> order(static_cast<std::size_t>(c.spins));
  for (int n = 0; n < c.spins; ++n) order[static_cast<std::size_t>(n)] = n;
  auto wrapped = [&](int n) { return std::fmod(r[static_cast<std::size_t>(n)].delay, 2.0 * M_PI); };
  // insertion sort keeps equal delays in index order
  for (std::size_t a = 1; a < order.size(); ++a) {
    for (std::size_t b = a; b > 0 && wrapped(order[b]) < wrapped(order[b - 1]); --b) std::swap(order[b], order[b - 1]);
  }
  const Eigen::Index dim = Eigen::Index{1} << c.spins;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  double t = 0.0;
  for (int n : order) {
    u = reference_propagator(h, wrapped(n) - t, c.kick_frequency) * u;
    t = wrapped(n);
    u = reference_kick(c, n, r[static_cast<std::size_t>(n)]) * u;
  }
  return reference_propagator(h, 2.0 * M_PI - t, c.kick_frequency) * u;
}

inline Eigen::VectorXcd reference_product(const std::vector<kickchain::SpinState>& s) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(1);
  for (const auto& x : s) {
    Eigen::VectorXcd f(2);
    f << x.up, x.down;
    v = Eigen::kroneckerProduct(v, f).eval();
  }
  return v;
}

/// Reduced density of one spin by explicit partial trace over the others.
inline Eigen::Matrix2cd reference_reduce(const Eigen::VectorXcd& psi, int spins, int spin) {
  Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
  const Eigen::Index dim = psi.size();
  const int shift = spins - 1 - spin;
  for (Eigen::Index a = 0; a < dim; ++a) {
    for (Eigen::Index b = 0; b < dim; ++b) {
      if ((a | (Eigen::Index{1} << shift)) != (b | (Eigen::Index{1} << shift))) continue;
      rho((a >> shift) & 1, (b >> shift) & 1) += psi[a] * std::conj(psi[b]);
    }
  }
  return rho;
}

}  // namespace testing
