#include "kickchain/chain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "kickchain/bath.hpp"

namespace kickchain {

namespace {

constexpr int kMaxSpins = 14;

bool is_down(std::uint32_t index, int spins, int spin) {
  return (index >> (spins - 1 - spin)) & 1U;
}

std::vector<std::pair<int, int>> bonds(int spins, Topology topology) {
  std::vector<std::pair<int, int>> out;
  for (int n = 0; n + 1 < spins; ++n) out.emplace_back(n, n + 1);
  if (topology == Topology::Closed) out.emplace_back(spins - 1, 0);
  return out;
}

}  // namespace

SpinState SpinState::normalized(Complex up, Complex down) {
  const double n = std::sqrt(std::norm(up) + std::norm(down));
  if (n == 0.0) throw std::invalid_argument("spin state cannot be the zero vector");
  return {up / n, down / n};
}

void ChainConfig::validate() const {
  if (spins < 1 || spins > kMaxSpins) {
    throw std::invalid_argument("spins must be in [1, " + std::to_string(kMaxSpins) + "]");
  }
  if (topology == Topology::Closed && spins < 3) {
    throw std::invalid_argument("a closed chain needs at least 3 spins");
  }
  if (!(kick_frequency > 0.0) || !std::isfinite(kick_frequency)) {
    throw std::invalid_argument("kick frequency omega0 must be positive");
  }
  if (!std::isfinite(coupling_strength) || !std::isfinite(zeeman) || !std::isfinite(kick_angle)) {
    throw std::invalid_argument("J, omega1 and the kick angle must be finite");
  }
  if (static_cast<int>(initial.size()) != spins) {
    throw std::invalid_argument("expected " + std::to_string(spins) + " initial spin states, got " +
                                std::to_string(initial.size()));
  }
  for (std::size_t n = 0; n < initial.size(); ++n) {
    const double norm2 = std::norm(initial[n].up) + std::norm(initial[n].down);
    if (std::abs(norm2 - 1.0) > 1e-9) {
      throw std::invalid_argument("initial state of spin " + std::to_string(n + 1) +
                                  " is not normalised");
    }
  }
}

std::vector<SpinState> uniform_states(int spins, SpinState s) {
  return std::vector<SpinState>(static_cast<std::size_t>(std::max(spins, 0)), s);
}

int ChainState::spins() const {
  return std::countr_zero(static_cast<std::uint64_t>(amplitudes.size()));
}

ChainState product_state(std::span<const SpinState> spins) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(1);
  for (const auto& s : spins) {
    Eigen::VectorXcd next(psi.size() * 2);
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
      next(2 * i) = psi(i) * s.up;
      next(2 * i + 1) = psi(i) * s.down;
    }
    psi = std::move(next);
  }
  return {std::move(psi), 0};
}

StaticHamiltonian::StaticHamiltonian(const ChainConfig& cfg)
    : spins_(cfg.spins), omega0_(cfg.kick_frequency) {
  cfg.validate();
  const int n = spins_;
  const std::uint32_t dim = 1U << n;
  const double j = cfg.coupling_strength;
  const auto links = bonds(n, cfg.topology);

  sectors_.resize(static_cast<std::size_t>(n) + 1);
  for (std::uint32_t idx = 0; idx < dim; ++idx) {
    sectors_[static_cast<std::size_t>(std::popcount(idx))].basis.push_back(idx);
  }

  for (auto& sector : sectors_) {
    const auto size = static_cast<Eigen::Index>(sector.basis.size());
    sector.block = Eigen::MatrixXd::Zero(size, size);
    for (Eigen::Index r = 0; r < size; ++r) {
      const std::uint32_t idx = sector.basis[static_cast<std::size_t>(r)];
      // Zeeman term omega1/2 |down><down| per spin.
      double diag = 0.5 * cfg.zeeman * std::popcount(idx);
      for (auto [a, b] : links) {
        const bool aligned = is_down(idx, n, a) == is_down(idx, n, b);
        diag += -j * (aligned ? 0.25 : -0.25);
        if (cfg.coupling == Coupling::Heisenberg && !aligned) {
          // -J (SxSx + SySy) = -J/2 (S+S- + S-S+) swaps antiparallel pairs.
          const std::uint32_t flipped =
              idx ^ ((1U << (n - 1 - a)) | (1U << (n - 1 - b)));
          auto it = std::lower_bound(sector.basis.begin(), sector.basis.end(), flipped);
          const auto c = static_cast<Eigen::Index>(it - sector.basis.begin());
          sector.block(r, c) += -0.5 * j;
        }
      }
      sector.block(r, r) += diag;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sector.block);
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("eigendecomposition of the static Hamiltonian failed");
    }
    sector.energies = solver.eigenvalues();
    sector.vectors = solver.eigenvectors();
  }
}

Eigen::MatrixXd StaticHamiltonian::dense() const {
  const auto dim = static_cast<Eigen::Index>(dimension());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& s : sectors_) {
    for (std::size_t r = 0; r < s.basis.size(); ++r) {
      for (std::size_t c = 0; c < s.basis.size(); ++c) {
        h(s.basis[r], s.basis[c]) =
            s.block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
    }
  }
  return h;
}

void StaticHamiltonian::propagate(Eigen::VectorXcd& psi, double dphi) const {
  if (dphi == 0.0) return;
  const double t = dphi / omega0_;
  for (const auto& s : sectors_) {
    const auto size = static_cast<Eigen::Index>(s.basis.size());
    if (size == 1) {
      psi(s.basis[0]) *= std::polar(1.0, -s.energies(0) * t);
      continue;
    }
    // Real and imaginary parts as two columns so each basis change is one GEMM.
    Eigen::MatrixXd x(size, 2);
    for (Eigen::Index r = 0; r < size; ++r) {
      const Complex a = psi(s.basis[static_cast<std::size_t>(r)]);
      x(r, 0) = a.real();
      x(r, 1) = a.imag();
    }
    Eigen::MatrixXd y = s.vectors.transpose() * x;
    for (Eigen::Index k = 0; k < size; ++k) {
      const Complex phase = std::polar(1.0, -s.energies(k) * t);
      const Complex z = phase * Complex(y(k, 0), y(k, 1));
      y(k, 0) = z.real();
      y(k, 1) = z.imag();
    }
    x.noalias() = s.vectors * y;
    for (Eigen::Index r = 0; r < size; ++r) {
      psi(s.basis[static_cast<std::size_t>(r)]) = Complex(x(r, 0), x(r, 1));
    }
  }
}

double StaticHamiltonian::energy(const Eigen::VectorXcd& psi) const {
  double e = 0.0;
  for (const auto& s : sectors_) {
    const auto size = static_cast<Eigen::Index>(s.basis.size());
    Eigen::VectorXcd x(size);
    for (Eigen::Index r = 0; r < size; ++r) x(r) = psi(s.basis[static_cast<std::size_t>(r)]);
    e += (x.adjoint() * (s.block.cast<Complex>() * x))(0).real();
  }
  return e;
}

StaticHamiltonian build_static_hamiltonian(const ChainConfig& cfg) { return StaticHamiltonian(cfg); }

Eigen::Matrix2cd kick_unitary(double strength, double angle) {
  const Eigen::Vector2d w(std::cos(angle), std::sin(angle));
  const Complex factor = std::polar(1.0, -strength) - 1.0;
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
  u += factor * (w * w.transpose()).cast<Complex>();
  return u;
}

void apply_local(Eigen::VectorXcd& psi, int spins, int spin, const Eigen::Matrix2cd& op) {
  const Eigen::Index stride = Eigen::Index{1} << (spins - 1 - spin);
  const Eigen::Index dim = psi.size();
  const Complex a = op(0, 0), b = op(0, 1), c = op(1, 0), d = op(1, 1);
  for (Eigen::Index base = 0; base < dim; base += 2 * stride) {
    for (Eigen::Index k = base; k < base + stride; ++k) {
      const Complex up = psi(k);
      const Complex down = psi(k + stride);
      psi(k) = a * up + b * down;
      psi(k + stride) = c * up + d * down;
    }
  }
}

void monodromy_apply_inplace(const StaticHamiltonian& h, const KickRound& round,
                             Eigen::VectorXcd& psi) {
  const int n = h.spins();
  if (static_cast<int>(round.size()) != n) {
    throw std::invalid_argument("kick round has " + std::to_string(round.size()) +
                                " entries for a chain of " + std::to_string(n) + " spins");
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> delays(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) delays[static_cast<std::size_t>(s)] = wrap_angle(round[static_cast<std::size_t>(s)].delay);
  std::stable_sort(order.begin(), order.end(), [&delays](int a, int b) {
    return delays[static_cast<std::size_t>(a)] < delays[static_cast<std::size_t>(b)];
  });

  double elapsed = 0.0;
  for (int s : order) {
    const Kick& kick = round[static_cast<std::size_t>(s)];
    const double at = delays[static_cast<std::size_t>(s)];
    h.propagate(psi, at - elapsed);
    elapsed = at;
    if (wrap_angle(kick.strength) != 0.0) apply_local(psi, n, s, kick_unitary(kick.strength, kick.angle));
  }
  h.propagate(psi, kTwoPi - elapsed);
}

ChainState monodromy_apply(const StaticHamiltonian& h, const KickRound& round, const ChainState& psi) {
  ChainState out = psi;
  monodromy_apply_inplace(h, round, out.amplitudes);
  out.kick = psi.kick + 1;
  return out;
}

ChainState evolve(const ChainConfig& cfg, const StaticHamiltonian& h, const KickSource& source,
                  std::size_t kicks, const std::function<void(const ChainState&)>& observe) {
  cfg.validate();
  if (h.spins() != cfg.spins) {
    throw std::invalid_argument("Hamiltonian and configuration disagree on the spin count");
  }
  ChainState state = product_state(cfg.initial);
  if (observe) observe(state);
  for (std::size_t k = 1; k <= kicks; ++k) {
    const KickRound round = source(k);
    if (static_cast<int>(round.size()) != cfg.spins) {
      throw std::invalid_argument("kick source supplies " + std::to_string(round.size()) +
                                  " trains for " + std::to_string(cfg.spins) + " spins");
    }
    monodromy_apply_inplace(h, round, state.amplitudes);
    state.kick = k;
    if (observe) observe(state);
  }
  return state;
}

std::vector<ChainState> evolve_trajectory(const ChainConfig& cfg, const StaticHamiltonian& h,
                                          const KickSource& source, std::size_t kicks) {
  std::vector<ChainState> out;
  out.reserve(kicks + 1);
  evolve(cfg, h, source, kicks, [&out](const ChainState& s) { out.push_back(s); });
  return out;
}

KickSource no_kicks(int spins) {
  return [spins](std::size_t) { return KickRound(static_cast<std::size_t>(spins)); };
}

KickSource replay_rounds(std::vector<KickRound> rounds) {
  return [rounds = std::move(rounds)](std::size_t kick) {
    if (kick == 0 || kick > rounds.size()) {
      throw std::out_of_range("no kick round recorded for kick " + std::to_string(kick));
    }
    return rounds[kick - 1];
  };
}

}  // namespace kickchain
