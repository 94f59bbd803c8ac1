#include "kickchain/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kickchain {

double horizon_coherence(const HorizonInputs& h) {
  if (!(h.lyapunov > 0.0)) throw std::invalid_argument("Lyapunov exponent must be positive");
  if (h.s_max < 0.0) throw std::invalid_argument("S_max must be non-negative");
  return h.n_box + 0.5 * std::sqrt(1.0 + 8.0 * h.s_max / h.lyapunov) - 0.5;
}

double edge_period(double coupling, double omega0) {
  if (!(coupling > 0.0)) throw std::invalid_argument("coupling J must be positive");
  if (!(omega0 > 0.0)) throw std::invalid_argument("omega0 must be positive");
  return omega0 / coupling;
}

double mid_period(double coupling, double omega0) { return 0.5 * edge_period(coupling, omega0); }

TransmissionModel::TransmissionModel(int spins, double coupling, double omega0)
    : spins_(spins), coupling_(coupling), omega0_(omega0) {
  if (spins < 3) throw std::invalid_argument("transmission model needs at least 3 spins");
  edge_period(coupling, omega0);  // validates J and omega0
}

std::vector<double> averaged_periods(const TransmissionModel& m) {
  const double edge = m.edge();
  const double mid = m.mid();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.spins() - 1));
  out.push_back(0.5 * (edge + mid));
  for (int n = 3; n <= m.spins(); ++n) {
    const double own = n == m.spins() ? edge : mid;
    out.push_back(0.5 * (out.back() + own));
  }
  return out;
}

std::vector<double> transfer_times(const TransmissionModel& m) {
  auto t = averaged_periods(m);
  for (double& x : t) x *= 0.25;
  return t;
}

double one_way_period(const TransmissionModel& m) {
  const int n_spins = m.spins();
  const auto avg = averaged_periods(m);
  auto period_of = [&](int n) { return n == 1 ? m.edge() : avg[static_cast<std::size_t>(n - 2)]; };

  double p = 0.75 * period_of(2);
  for (int n = 3; n <= n_spins - 2; ++n) p += 0.25 * period_of(n);
  const double last = 0.5 * (period_of(std::max(n_spins - 2, 1)) + m.edge());
  p += 2.0 * 0.25 * last;
  return p;
}

int turns(double n_star, double period) {
  if (!(period > 0.0)) throw std::invalid_argument("one-way period must be positive");
  const double trips = n_star / period;
  return std::max(0, static_cast<int>(std::ceil(trips)) - 1);
}

double spins_reached(double n_star, const TransmissionModel& m, int turns) {
  if (turns < 0) throw std::invalid_argument("NTurn must be non-negative");
  const double p = one_way_period(m);
  return n_star / p * m.spins() - turns;
}

std::optional<std::size_t> first_rise(std::span<const double> series, double fraction) {
  if (series.empty()) return std::nullopt;
  const double peak = *std::max_element(series.begin(), series.end());
  if (!(peak > 0.0)) return std::nullopt;
  const double threshold = fraction * peak;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i] > threshold) return i;
  }
  return std::nullopt;
}

}  // namespace kickchain
