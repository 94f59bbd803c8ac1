#include "kickchain/oracles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kickchain::oracles {

namespace {

constexpr double kPi = std::numbers::pi;

// exp(i * phase)
Complex cis(double phase) { return std::polar(1.0, phase); }

}  // namespace

TwoSpinAmplitudes TwoSpinAmplitudes::product(const SpinState& first, const SpinState& second) {
  return {first.up * second.up, first.up * second.down, first.down * second.up,
          first.down * second.down};
}

double TwoSpinAmplitudes::norm() const {
  return std::sqrt(std::norm(alpha) + std::norm(beta) + std::norm(gamma_amp) + std::norm(delta));
}

PopulationCoherence isingz_free(const TwoSpinAmplitudes& a, double coupling, double omega0,
                                double omega1, int i) {
  const double plus = (coupling / (2.0 * omega0) + omega1 / (2.0 * omega0)) * 2.0 * kPi * i;
  const double minus = (coupling / (2.0 * omega0) - omega1 / (2.0 * omega0)) * 2.0 * kPi * i;
  const Complex off = a.gamma_amp * std::conj(a.alpha) * cis(-plus) +
                      a.delta * std::conj(a.beta) * cis(minus);
  return {std::norm(a.alpha) + std::norm(a.beta), std::abs(off)};
}

Eigen::Matrix2cd uncoupled_kicked(Complex alpha, Complex beta, std::span<const double> strengths,
                                  double omega0, double omega1) {
  double lambda_sum = 0.0;
  for (double l : strengths) lambda_sum += l;
  const double i = static_cast<double>(strengths.size());
  const Complex off = alpha * std::conj(beta) * cis(-lambda_sum) * cis(i * omega1 / omega0 * kPi);
  Eigen::Matrix2cd rho;
  rho << std::norm(alpha), off, std::conj(off), std::norm(beta);
  return rho;
}

PairCoherence isingz_kicked_pair(const SpinState& first, const SpinState& second, double lambda1,
                                 double lambda2, double coupling, double omega0, double omega1, int i) {
  const Complex chi = first.up;
  const Complex zeta = first.down;
  const Complex g = second.up;
  const Complex d = second.down;
  const double a = coupling / (4.0 * omega0);
  const double b = omega1 / (2.0 * omega0);
  const double n = static_cast<double>(i);
  const Complex e_plus = cis(n * (2.0 * a + b) * 2.0 * kPi);
  const Complex e_minus = cis(-n * (2.0 * a - b) * 2.0 * kPi);

  const Complex one = chi * g * std::conj(zeta) * std::conj(g) * e_plus +
                      chi * d * std::conj(zeta) * std::conj(d) * e_minus;
  const Complex two = chi * g * std::conj(chi) * std::conj(d) * e_plus +
                      zeta * g * std::conj(zeta) * std::conj(d) * e_minus;
  PairCoherence out;
  out.first = std::abs(one);
  out.average = 0.5 * std::abs(cis(-n * lambda1) * one + cis(-n * lambda2) * two);
  return out;
}

PairPropagator heisenberg_pair_propagator(double coupling, double omega0, double omega1) {
  const double t = 2.0 * kPi / omega0;
  // -J S.S + Zeeman: aligned pairs sit at -J/4, the middle block is
  // [[b, c], [c, b]] with b = J/4 + omega1/2 and c = -J/2.
  const double e_upup = -coupling / 4.0;
  const double e_dndn = -coupling / 4.0 + omega1;
  const double b = coupling / 4.0 + omega1 / 2.0;
  const double c = -coupling / 2.0;

  // Eigenvectors (1, 1)/sqrt2 and (1, -1)/sqrt2 with energies b + c, b - c.
  Eigen::Matrix2d r;
  r << 1.0, 1.0, 1.0, -1.0;
  r /= std::sqrt(2.0);
  Eigen::Matrix2cd phases = Eigen::Matrix2cd::Zero();
  phases(0, 0) = cis(-(b + c) * t);
  phases(1, 1) = cis(-(b - c) * t);
  const Eigen::Matrix2cd block = r.cast<Complex>() * phases * r.transpose().cast<Complex>();

  return {cis(-e_upup * t), block(0, 0), block(0, 1), cis(-e_dndn * t)};
}

double heisenberg_kicked_populations(double lambda1, double lambda2, const PairPropagator& p, int i) {
  const Complex u = p.u;
  const Complex v = p.v;
  const Complex w = p.w;
  const double diff = lambda1 - lambda2;
  const Complex v2 = v * v;
  const Complex w2 = w * w;
  const double v4 = std::norm(v2);
  const double w4 = std::norm(w2);
  switch (i) {
    case 0:
      return 1.0;
    case 1:
      return 0.5 * (std::norm(u) + std::norm(v));
    case 2: {
      const Complex s = std::norm(u * u) + v4 + w4 + v2 * std::conj(w2) * cis(-diff) +
                        w2 * std::conj(v2) * cis(diff);
      return 0.5 * s.real();
    }
    case 3: {
      const Complex bracket = v4 + 5.0 * w4 + v2 * std::conj(w2) * cis(-2.0 * diff) +
                              2.0 * v2 * std::conj(w2) * cis(-diff) +
                              w2 * std::conj(v2) * cis(2.0 * diff) + 2.0 * w4 * cis(diff) +
                              2.0 * w2 * std::conj(v2) * cis(diff) + 2.0 * w4 * cis(-diff);
      return 0.5 * (std::norm(u * u * u) + std::norm(v) * bracket.real());
    }
    default:
      throw std::invalid_argument("closed-form pair populations exist for i = 0..3 only");
  }
}

}  // namespace kickchain::oracles
