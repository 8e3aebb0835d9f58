#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "tagsep/color.hpp"
#include "tagsep/kernel.hpp"
#include "tagsep/rates.hpp"

namespace tagsep::eta {

/// Sparse coloring of sites 1, 2, ...; absent sites are white.
///
/// Keys are stored in a frame that moves with the tagged particle, so a left
/// shift of the whole field is a single offset increment.
class ColorField {
 public:
  Color at(long site) const;
  // Setting White removes the entry. Requires site >= 1.
  void set(long site, Color c);
  void exchange(long i, long j);
  // Drops site 1 and moves every other site one step left. Site 1 must not be
  // blue, otherwise a revealed particle would leave the half line.
  void shift_left();

  std::size_t colored_count() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  template <class Fn>
  void for_each_colored(Fn&& fn) const {
    for (const auto& [key, color] : cells_) fn(key - offset_, color);
  }

  bool operator==(const ColorField& other) const;

 private:
  std::map<long, Color> cells_;
  long offset_ = 0;
};

/// Running observables of a trajectory.
struct TrajectoryStats {
  double t = 0.0;
  std::uint64_t x = 0;  // applied left shifts = tagged displacement
  // Time site 1 spent in each color, indexed by color_index().
  std::array<double, 3> occupation{0.0, 0.0, 0.0};
  long n_b = 0;
  long n_p = 0;
  long w_b = 0;
  long w_p = 0;
  // Time integrals of n_b and n_p.
  double int_n_b = 0.0;
  double int_n_p = 0.0;
};

struct EtaState {
  ColorField field;
  TrajectoryStats stats;
};

enum class EtaEventKind : std::uint8_t { Exchange, Tagged, Removal };

struct EtaEvent {
  EtaEventKind kind = EtaEventKind::Tagged;
  long i = 0;  // smaller site of an exchange
  long j = 0;  // larger site of an exchange

  bool operator==(const EtaEvent&) const = default;
};

/// What an applied event did; drives the mass-balance checks.
enum class EtaBranch : std::uint8_t {
  Exchange,
  RemovalToPurple,     // D clock; site 1 becomes purple
  ShiftPurple,         // C clock at a purple site 1
  Blocked,             // C clock at a blue site 1
  RevealBlue,          // C clock at a white site 1, revealed occupied
  RevealPurpleShift,   // C clock at a white site 1, revealed vacant
};

/// Active clocks: exchanges on range-one/two bonds with differing endpoint
/// colors (at least one endpoint colored), the tagged clock q1 and the
/// removal clock p2. White-white bonds are omitted.
EventCatalog<EtaEvent> eta_catalog(const ColorField& field, const Rates& r);

/// Applies an event with a prescribed reveal outcome for a white site 1.
EtaBranch apply_event(EtaState& s, const EtaEvent& ev, bool reveal_occupied);

/// Draws an Exp(total) holding time, accrues occupation time using the
/// pre-event color of site 1, then draws and applies one event.
EtaBranch eta_step(EtaState& s, const Rates& r, RngStream& rng);

/// Steps until the next event would fall after `horizon`; the clock ends at `horizon`.
void run_until(EtaState& s, const Rates& r, RngStream& rng, double horizon);

/// Recomputes (n_b, n_p, w_b, w_p) from the field.
std::array<long, 4> recount(const ColorField& field);

struct LlnReplica {
  std::uint64_t replica = 0;
  double horizon = 0.0;
  std::uint64_t x_t = 0;
  std::array<double, 3> fractions{};  // white, blue, purple
  double n_b_avg = 0.0;
  double n_p_avg = 0.0;
  // Time-averaged colored counts over the first and second halves of [0, T].
  double n_b_avg_first = 0.0;
  double n_b_avg_second = 0.0;
  double n_p_avg_first = 0.0;
  double n_p_avg_second = 0.0;
};

/// One replica started from the all-white field, stream id = replica index.
LlnReplica run_replica(const Rates& r, double horizon, std::uint64_t seed, std::uint64_t replica);

/// Independent replicas in parallel; results are ordered by replica index.
std::vector<LlnReplica> run_lln(const Rates& r, double horizon, std::size_t replicas,
                                std::uint64_t seed, unsigned threads = 0);

}  // namespace tagsep::eta
