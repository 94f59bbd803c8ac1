#include "kickchain/bath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace kickchain {

double wrap_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative number can round back up to 2pi exactly.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double angle_difference(double a, double b) {
  double d = wrap_angle(a - b);
  return d >= std::numbers::pi ? d - kTwoPi : d;
}

TorusPoint TorusPoint::wrapped(double strength, double delay) {
  return {wrap_angle(strength), wrap_angle(delay)};
}

TorusMap::TorusMap(std::array<std::int64_t, 4> entries) : m_(entries) {
  const std::int64_t det = determinant();
  if (det != 1 && det != -1) {
    throw std::invalid_argument("torus map must have |det| = 1, got det = " + std::to_string(det));
  }
  const double a = static_cast<double>(m_[0]);
  const double b = static_cast<double>(m_[1]);
  const double c = static_cast<double>(m_[2]);
  const double d = static_cast<double>(m_[3]);
  const double trace = a + d;
  const double disc = trace * trace - 4.0 * static_cast<double>(det);
  if (disc <= 0.0) {
    // Complex pair on the unit circle, or a repeated eigenvalue of modulus 1.
    lambda_plus_ = disc == 0.0 ? trace / 2.0 : 1.0;
    chaotic_ = false;
    return;
  }
  const double root = std::sqrt(disc);
  const double l1 = (trace + root) / 2.0;
  const double l2 = (trace - root) / 2.0;
  lambda_plus_ = std::abs(l1) >= std::abs(l2) ? l1 : l2;
  chaotic_ = std::abs(lambda_plus_) > 1.0;

  double ex = 1.0;
  double ey = 0.0;
  if (b != 0.0) {
    ex = b;
    ey = lambda_plus_ - a;
  } else if (c != 0.0) {
    ex = lambda_plus_ - d;
    ey = c;
  } else if (std::abs(d) > std::abs(a)) {
    ex = 0.0;
    ey = 1.0;
  }
  const double norm = std::hypot(ex, ey);
  ex /= norm;
  ey /= norm;
  if (ex < 0.0 || (ex == 0.0 && ey < 0.0)) {
    ex = -ex;
    ey = -ey;
  }
  e_plus_ = {ex, ey};
}

double TorusMap::unstable_angle() const { return std::atan2(e_plus_[1], e_plus_[0]); }

TorusPoint TorusMap::apply(TorusPoint p) const {
  const double l = static_cast<double>(m_[0]) * p.strength + static_cast<double>(m_[1]) * p.delay;
  const double f = static_cast<double>(m_[2]) * p.strength + static_cast<double>(m_[3]) * p.delay;
  return TorusPoint::wrapped(l, f);
}

TorusPoint step_map(const TorusMap& map, TorusPoint p) { return map.apply(p); }

double lyapunov(const TorusMap& map) {
  if (!map.is_chaotic()) {
    throw NonChaoticMap("map has no expanding direction (|lambda_+| <= 1)");
  }
  return std::log(std::abs(map.dominant_eigenvalue()));
}

void BathConfig::validate() const {
  if (trains == 0) throw std::invalid_argument("bath needs at least one kick train");
  if (!(spread >= 0.0) || !std::isfinite(spread)) {
    throw std::invalid_argument("bath spread d0 must be finite and >= 0");
  }
  if (!std::isfinite(anchor.strength) || !std::isfinite(anchor.delay)) {
    throw std::invalid_argument("bath anchor must be finite");
  }
}

PartitionSpec::PartitionSpec(double cell) : cell_(cell), per_side_(0) {
  if (!(cell > 0.0) || cell > kTwoPi) {
    throw std::invalid_argument("partition cell side must lie in (0, 2pi]");
  }
  const double ratio = kTwoPi / cell;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * ratio) {
    throw std::invalid_argument("2pi / cell side must be an integer");
  }
  per_side_ = static_cast<int>(rounded);
}

PartitionSpec PartitionSpec::with_cells_per_side(int cells) {
  if (cells <= 0) throw std::invalid_argument("cells per side must be positive");
  return PartitionSpec(kTwoPi / cells);
}

std::size_t PartitionSpec::cell_of(TorusPoint p) const {
  auto index = [this](double x) {
    auto k = static_cast<int>(std::floor(x / cell_));
    return std::clamp(k, 0, per_side_ - 1);
  };
  return static_cast<std::size_t>(index(p.strength)) * static_cast<std::size_t>(per_side_) +
         static_cast<std::size_t>(index(p.delay));
}

TorusEnsemble sample_initial(const BathConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  TorusEnsemble ens;
  ens.points.reserve(cfg.trains);
  for (std::size_t t = 0; t < cfg.trains; ++t) {
    const double u = uniform();
    const double v = uniform();
    ens.points.push_back(TorusPoint::wrapped(cfg.anchor.strength + cfg.spread * u,
                                             cfg.anchor.delay + cfg.spread * v));
  }
  return ens;
}

TorusEnsemble step_ensemble(const TorusMap& map, const TorusEnsemble& ens) {
  TorusEnsemble next;
  next.iteration = ens.iteration + 1;
  next.points.resize(ens.points.size());
  std::transform(ens.points.begin(), ens.points.end(), next.points.begin(),
                 [&map](TorusPoint p) { return map.apply(p); });
  return next;
}

std::vector<TorusEnsemble> propagate(const TorusMap& map, const TorusEnsemble& initial,
                                     std::size_t iterations) {
  std::vector<TorusEnsemble> out;
  out.reserve(iterations + 1);
  out.push_back(initial);
  for (std::size_t i = 0; i < iterations; ++i) out.push_back(step_ensemble(map, out.back()));
  return out;
}

double horizon_predictability(const TorusMap& map, double spread, const PartitionSpec& part) {
  if (spread < 0.0 || !std::isfinite(spread)) {
    throw std::invalid_argument("initial dispersion must be finite and >= 0");
  }
  const double rate = lyapunov(map);
  if (spread == 0.0) return std::numeric_limits<double>::infinity();
  const double s = std::sin(map.unstable_angle());
  if (s == 0.0) {
    throw std::domain_error("unstable direction is parallel to the strength axis");
  }
  return (std::log(part.cell()) - std::log(spread / std::abs(s))) / rate;
}

double shannon_entropy(const TorusEnsemble& ens, const PartitionSpec& part, double theta) {
  if (ens.points.empty()) throw std::invalid_argument("shannon entropy of an empty ensemble");
  std::vector<std::size_t> cells(ens.points.size());
  std::transform(ens.points.begin(), ens.points.end(), cells.begin(),
                 [&part](TorusPoint p) { return part.cell_of(p); });
  std::sort(cells.begin(), cells.end());

  const double total = static_cast<double>(cells.size());
  double s = 0.0;
  for (auto it = cells.begin(); it != cells.end();) {
    auto end = std::upper_bound(it, cells.end(), *it);
    const double p = static_cast<double>(end - it) / total;
    s -= p * std::log(p);
    it = end;
  }
  return theta * s;
}

std::vector<double> cumulated_shannon(std::span<const double> series) {
  std::vector<double> out(series.size());
  std::partial_sum(series.begin(), series.end(), out.begin());
  return out;
}

double ks_prediction(double n, const TorusMap& map, double n_box, double s_max) {
  if (!(s_max > 0.0)) throw std::invalid_argument("S_max must be positive");
  return std::min(s_max, std::max(0.0, (n - n_box) * lyapunov(map)));
}

double max_shannon_entropy(std::size_t trains, const PartitionSpec& part) {
  return std::log(static_cast<double>(std::min(trains, part.cell_count())));
}

}  // namespace kickchain
