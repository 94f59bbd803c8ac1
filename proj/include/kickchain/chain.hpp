// Kicked spin chain: static Hamiltonian, kick unitaries and the per-period
// monodromy operator acting on the full 2^N state vector.
//
// Basis convention: spin 0 is the most significant tensor factor and |up>
// is index 0 of each factor, so basis index = sum_n s_n 2^(N-1-n) with
// s_n = 1 for |down>. hbar = 1 and free propagation over a reduced-time
// interval dphi is exp(-i H dphi / omega0).
#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace kickchain {

using Complex = std::complex<double>;

enum class Coupling { Heisenberg, IsingZ };
enum class Topology { Open, Closed };

/// Single-spin amplitudes (up, down).
struct SpinState {
  Complex up{1.0, 0.0};
  Complex down{0.0, 0.0};

  /// Normalised alpha|up> + beta|down>.
  static SpinState normalized(Complex up, Complex down);
  static SpinState spin_up() { return {}; }
  static SpinState spin_down() { return {{0.0, 0.0}, {1.0, 0.0}}; }
};

struct ChainConfig {
  int spins = 1;
  Coupling coupling = Coupling::Heisenberg;
  double coupling_strength = 0.0;  // J, in units of omega0
  double kick_frequency = 1.0;     // omega0
  double zeeman = 0.5;             // omega1
  Topology topology = Topology::Open;
  double kick_angle = 0.0;  // |w> = cos(angle)|up> + sin(angle)|down>
  std::vector<SpinState> initial;

  /// Throws std::invalid_argument on any violated constraint.
  void validate() const;
};

/// Every spin in the same state.
std::vector<SpinState> uniform_states(int spins, SpinState s);

/// One kick on one spin within a period.
struct Kick {
  double strength = 0.0;
  double delay = 0.0;
  double angle = 0.0;
};

/// Kicks received by every spin during one period, indexed by spin.
using KickRound = std::vector<Kick>;

struct ChainState {
  Eigen::VectorXcd amplitudes;
  std::size_t kick = 0;

  int spins() const;
  double norm() const { return amplitudes.norm(); }
};

ChainState product_state(std::span<const SpinState> spins);

/// H_{0,I} stored as its total-S_z blocks, each with a cached eigenbasis.
///
/// Both couplings conserve the number of down spins, so the matrix splits
/// into N+1 real symmetric blocks. Free propagation only touches those
/// blocks, which is what keeps arbitrary per-kick delays cheap.
class StaticHamiltonian {
 public:
  explicit StaticHamiltonian(const ChainConfig& cfg);

  int spins() const { return spins_; }
  std::size_t dimension() const { return std::size_t{1} << spins_; }
  double kick_frequency() const { return omega0_; }

  /// Full 2^N x 2^N matrix, assembled on demand (tests, small N).
  Eigen::MatrixXd dense() const;

  /// exp(-i H dphi / omega0) applied in place; dphi == 0 is a no-op.
  void propagate(Eigen::VectorXcd& psi, double dphi) const;

  /// <psi|H|psi>
  double energy(const Eigen::VectorXcd& psi) const;

  struct Sector {
    std::vector<std::uint32_t> basis;  // global indices, ascending
    Eigen::MatrixXd block;
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;  // columns are eigenvectors
  };
  const std::vector<Sector>& sectors() const { return sectors_; }

 private:
  int spins_;
  double omega0_;
  std::vector<Sector> sectors_;
};

StaticHamiltonian build_static_hamiltonian(const ChainConfig& cfg);

/// id + (exp(-i strength) - 1)|w><w|
Eigen::Matrix2cd kick_unitary(double strength, double angle);

/// Applies a 2x2 operator to one tensor factor of the state.
void apply_local(Eigen::VectorXcd& psi, int spins, int spin, const Eigen::Matrix2cd& op);

/// One period of evolution: free segments interleaved with the kicks,
/// spins taken in increasing delay (ties by ascending spin index).
ChainState monodromy_apply(const StaticHamiltonian& h, const KickRound& round, const ChainState& psi);
void monodromy_apply_inplace(const StaticHamiltonian& h, const KickRound& round,
                             Eigen::VectorXcd& psi);

/// Supplies the kicks of kick number k (1-based; kick k maps snapshot k-1 to k).
using KickSource = std::function<KickRound(std::size_t kick)>;

/// Streams snapshots 0..kicks to `observe`; returns the final state.
ChainState evolve(const ChainConfig& cfg, const StaticHamiltonian& h, const KickSource& source,
                  std::size_t kicks, const std::function<void(const ChainState&)>& observe);

/// All kicks + 1 snapshots, including the initial product state.
std::vector<ChainState> evolve_trajectory(const ChainConfig& cfg, const StaticHamiltonian& h,
                                          const KickSource& source, std::size_t kicks);

/// Source with zero strength on every spin.
KickSource no_kicks(int spins);

/// Source that replays precomputed rounds; rounds[k-1] is kick k.
KickSource replay_rounds(std::vector<KickRound> rounds);

}  // namespace kickchain
