// Classical kick bath: strength/delay pairs living on the torus [0, 2pi)^2,
// driven by integer automorphisms (the Arnold cat map by default).
#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace kickchain {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces an angle into [0, 2pi).
double wrap_angle(double x);

/// Shortest signed separation of two angles, in [-pi, pi).
double angle_difference(double a, double b);

struct TorusPoint {
  double strength = 0.0;  // lambda
  double delay = 0.0;     // phi = omega0 * tau

  /// Builds a point with both coordinates reduced mod 2pi.
  static TorusPoint wrapped(double strength, double delay);

  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;
};

/// Raised by Lyapunov/horizon queries on maps without an expanding direction.
class NonChaoticMap : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A 2x2 integer matrix acting on (strength, delay) with |det| = 1.
///
/// The spectral data is computed once at construction. For hyperbolic maps
/// the unstable eigenvector is normalised with a non-negative strength
/// component; for elliptic or parabolic maps it is left at (1, 0) and
/// `is_chaotic()` is false.
class TorusMap {
 public:
  /// Row-major entries {a, b, c, d} of [[a, b], [c, d]].
  explicit TorusMap(std::array<std::int64_t, 4> entries);

  static TorusMap cat_map() { return TorusMap({2, 1, 1, 1}); }

  const std::array<std::int64_t, 4>& entries() const { return m_; }
  std::int64_t determinant() const { return m_[0] * m_[3] - m_[1] * m_[2]; }

  /// Largest-magnitude eigenvalue (real whenever the map is chaotic).
  double dominant_eigenvalue() const { return lambda_plus_; }
  bool is_chaotic() const { return chaotic_; }
  /// Unit eigenvector for the dominant eigenvalue, as (strength, delay).
  std::array<double, 2> unstable_direction() const { return e_plus_; }
  /// Angle between the unstable direction and the strength axis.
  double unstable_angle() const;

  TorusPoint apply(TorusPoint p) const;

 private:
  std::array<std::int64_t, 4> m_;
  double lambda_plus_ = 1.0;
  bool chaotic_ = false;
  std::array<double, 2> e_plus_{1.0, 0.0};
};

TorusPoint step_map(const TorusMap& map, TorusPoint p);

/// ln|lambda_+|; throws NonChaoticMap when |lambda_+| <= 1.
double lyapunov(const TorusMap& map);

struct BathConfig {
  std::size_t trains = 1;
  TorusPoint anchor{};
  double spread = 0.0;  // d0, side of the initial square
  std::uint64_t seed = 0;

  void validate() const;
};

/// Microstate grid on the torus; 2pi / cell must be an integer.
class PartitionSpec {
 public:
  /// Default cell side pi/64 (128 x 128 cells).
  PartitionSpec() : PartitionSpec(std::numbers::pi / 64.0) {}
  explicit PartitionSpec(double cell);
  static PartitionSpec with_cells_per_side(int cells);

  double cell() const { return cell_; }
  int cells_per_side() const { return per_side_; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(per_side_) * static_cast<std::size_t>(per_side_);
  }
  /// Flat index i * per_side + j of the cell containing p.
  std::size_t cell_of(TorusPoint p) const;

 private:
  double cell_;
  int per_side_;
};

struct TorusEnsemble {
  std::vector<TorusPoint> points;
  std::size_t iteration = 0;

  std::size_t size() const { return points.size(); }
};

/// Uniform i.i.d. draws on [l*, l*+d0] x [p*, p*+d0] from mt19937_64(seed).
/// Each uniform variate is (next() >> 11) * 2^-53, so the stream is
/// identical on every standard library.
TorusEnsemble sample_initial(const BathConfig& cfg);

TorusEnsemble step_ensemble(const TorusMap& map, const TorusEnsemble& ens);

/// Iterates 0..iterations inclusive.
std::vector<TorusEnsemble> propagate(const TorusMap& map, const TorusEnsemble& initial,
                                     std::size_t iterations);

/// horizon of predictability n_box; +infinity when spread == 0.
double horizon_predictability(const TorusMap& map, double spread, const PartitionSpec& part);

/// theta * sum_ij -p_ij ln p_ij over the occupied cells.
double shannon_entropy(const TorusEnsemble& ens, const PartitionSpec& part, double theta = 1.0);

std::vector<double> cumulated_shannon(std::span<const double> series);

/// Kolmogorov-Sinai entropy curve: grows at ln|lambda_+| from n_box, capped at s_max.
double ks_prediction(double n, const TorusMap& map, double n_box, double s_max);

/// Largest attainable Shannon entropy: ln(min(trains, cells)).
double max_shannon_entropy(std::size_t trains, const PartitionSpec& part);

}  // namespace kickchain
