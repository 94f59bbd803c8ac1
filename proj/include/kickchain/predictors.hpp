// Closed-form predictions: horizon of coherence and the information
// transmission timing model of a Heisenberg chain. All periods are in kick
// counts (units of 2pi / omega0), hbar = 1.
#pragma once

#include <optional>
#include <span>
#include <vector>

namespace kickchain {

struct HorizonInputs {
  double s_max = 0.0;     // entropy ceiling (nats)
  double lyapunov = 0.0;  // ln|lambda_+|
  double n_box = 0.0;     // horizon of predictability
};

/// n* = n_box + (sqrt(1 + 8 S_max / ln|lambda_+|) - 1) / 2
double horizon_coherence(const HorizonInputs& h);

/// Period of a spin with one neighbour: omega0 / J.
double edge_period(double coupling, double omega0);
/// Period of a spin with two neighbours: omega0 / (2J).
double mid_period(double coupling, double omega0);

class TransmissionModel {
 public:
  TransmissionModel(int spins, double coupling, double omega0);

  int spins() const { return spins_; }
  double coupling() const { return coupling_; }
  double omega0() const { return omega0_; }
  double edge() const { return edge_period(coupling_, omega0_); }
  double mid() const { return mid_period(coupling_, omega0_); }
  /// J > omega0: the horizon formula is not validated there.
  bool out_of_validated_regime() const { return coupling_ > omega0_; }
  /// N < 5 leaves the interior transfer sum empty.
  bool degenerate_sum() const { return spins_ < 5; }

 private:
  int spins_;
  double coupling_;
  double omega0_;
};

/// T^{eff,n}_avg for n = 2..N (element 0 is n = 2). The last spin uses the
/// edge period, every other spin the mid-chain one. Requires N >= 3.
std::vector<double> averaged_periods(const TransmissionModel& m);

/// T_Trans^n = T^{eff,n}_avg / 4, same indexing as averaged_periods.
std::vector<double> transfer_times(const TransmissionModel& m);

/// One-way period P = 3/4 T^{eff,2} + sum_{n=3}^{N-2} T_Trans^n + 2 T_Trans^last,
/// where the last spin's averaged period closes the recursion from spin N-2
/// with the edge period: 1/2 (T^{eff,N-2} + T_edge). Empty sums are 0.
double one_way_period(const TransmissionModel& m);

/// Completed one-way trips whose end spin would otherwise be counted twice:
/// max(0, ceil(n* / P) - 1).
int turns(double n_star, double period);

/// nsp = (n* / P) N - NTurn
double spins_reached(double n_star, const TransmissionModel& m, int turns);

/// First index where the series exceeds fraction * max(series), if any.
std::optional<std::size_t> first_rise(std::span<const double> series, double fraction = 0.05);

}  // namespace kickchain
