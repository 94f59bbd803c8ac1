// Kick streams for the chain: classical baths, stationary control schedules
// on closed chains, and chaotic disturbance overlays.
#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kickchain/bath.hpp"
#include "kickchain/chain.hpp"

namespace kickchain {

/// Per-kick torus offsets, one point per spin; kick numbers are 1-based.
using TorusStream = std::function<std::vector<TorusPoint>(std::size_t kick)>;

/// Kick k reads iterate k-1 of the ensemble under `map`. Iterates are cached,
/// so replaying earlier kicks is cheap and repeated queries agree bit for bit.
TorusStream bath_stream(const TorusMap& map, TorusEnsemble initial);

/// Pointwise sum mod 2pi of two streams.
TorusStream add_streams(TorusStream a, TorusStream b);

/// Kicks taken straight from the bath, all in direction `angle`.
KickSource bath_kicks(const TorusMap& map, TorusEnsemble initial, double angle);

inline constexpr std::size_t kOpenEnded = std::numeric_limits<std::size_t>::max();

struct ScheduleEvent {
  std::size_t first = 1;  // kick numbers, inclusive
  std::size_t last = kOpenEnded;
  double strength = std::numbers::pi;
  double delay = 0.0;
  double angle = std::numbers::pi / 2.0;  // |down>

  bool covers(std::size_t kick) const { return kick >= first && kick <= last; }
};

/// Stationary kicks per spin. Spins without an active event get strength 0
/// in the schedule's idle direction.
class KickSchedule {
 public:
  explicit KickSchedule(int spins, double idle_angle = std::numbers::pi / 2.0);

  int spins() const { return static_cast<int>(events_.size()); }
  double idle_angle() const { return idle_angle_; }
  bool empty() const;

  /// Throws on a bad spin index, an empty window, or overlap with an existing event.
  void add(int spin, const ScheduleEvent& e);
  const std::vector<ScheduleEvent>& events(int spin) const;

  KickRound round(std::size_t kick) const;
  KickSource source() const;

  /// Line format "spin first last strength delay angle" (spins 1-based,
  /// `end` for an open window), preceded by a versioned header.
  std::string to_text() const;
  static KickSchedule from_text(std::string_view text);

  friend bool operator==(const KickSchedule&, const KickSchedule&);

 private:
  std::vector<std::vector<ScheduleEvent>> events_;
  double idle_angle_;
};

/// Predicted timing of the information wave launched from spin 0 on a
/// one-way (blocked) closed chain: arrival of the first maximum at each spin
/// and that spin's oscillation period, both in kicks.
struct WavePrediction {
  std::vector<double> arrival;
  std::vector<double> period;

  /// End (population minimum) of the given 1-based oscillation of a spin.
  double oscillation_end(int spin, int oscillation) const;
};

WavePrediction predict_wave(const ChainConfig& cfg);

/// Down-direction stationary kicks on `blocked` for kicks 1..duration.
/// The default duration is round(omega0 / (2J)), half an edge oscillation.
KickSchedule schedule_one_way(const ChainConfig& cfg, int blocked, std::optional<std::size_t> duration = {});

enum class FreezeTiming {
  Predicted,  // oscillation ends from the period model
  Simulated,  // population minima of the unfrozen one-way run
};

/// One-way launch on the last spin, then every spin past `target` is frozen
/// after its first oscillation and every spin before it after its second.
KickSchedule schedule_freeze(const ChainConfig& cfg, int target,
                             FreezeTiming timing = FreezeTiming::Predicted);

/// Same launch, but all spins except `target` frozen at one instant: the end
/// of the second oscillation of the spin just before the target.
KickSchedule schedule_freeze_instant(const ChainConfig& cfg, int target);

/// Schedule kicks shifted by the disturbance stream, at every kick including
/// the silent ones.
KickSource disturb(const KickSource& base, TorusStream disturbance);

}  // namespace kickchain
