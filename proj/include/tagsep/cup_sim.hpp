#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tagsep/color.hpp"
#include "tagsep/kernel.hpp"
#include "tagsep/rates.hpp"

namespace tagsep::cup {

/// One labelled cup: its color, the label it was born with, and its content
/// (true = environment particle, false = vacancy).
struct Cup {
  Color color = Color::White;
  std::uint64_t label = 0;
  bool particle = false;

  bool operator==(const Cup&) const = default;
};

/// Truncated labelled-cup lattice on sites 1..L.
///
/// Cups beyond L are white with independent Bernoulli(rho) contents and are
/// never materialised; each left shift injects one of them at site L.
class CupLattice {
 public:
  /// Fresh lattice: cup i has label i and an independent Bernoulli(rho) particle.
  static CupLattice fresh(int length, double rho, RngStream& rng);
  /// Explicit configuration; sites[k] is the cup at site k+1.
  static CupLattice from_cups(std::vector<Cup> sites, std::uint64_t next_label);

  int length() const { return static_cast<int>(sites_.size()); }
  const Cup& at(int site) const { return sites_.at(static_cast<std::size_t>(site - 1)); }
  Cup& at(int site) { return sites_.at(static_cast<std::size_t>(site - 1)); }
  std::span<const Cup> cups() const { return sites_; }

  std::uint64_t x_tagged() const { return x_tagged_; }
  std::uint64_t replenish_draws() const { return replenish_draws_; }
  double time() const { return time_; }
  // Set once a non-white cup has been seen at or beyond site L-2.
  bool contaminated() const { return contaminated_; }

  // Exchange cups at the two sites.
  void exchange(int x, int y);
  // Tagged-particle clock. Removes a vacant site-1 cup (shift + replenish) or
  // colours an occupied one blue.
  void ring_tagged(double rho, RngStream& rng);
  // Removal clock: site-1 content becomes a vacancy and the cup turns purple.
  void ring_removal();

  /// Color/content correspondence and label distinctness.
  bool invariants_hold() const;

  void advance_time(double dt) { time_ += dt; }

 private:
  void refresh_contamination();

  std::vector<Cup> sites_;
  std::uint64_t next_label_ = 1;
  std::uint64_t x_tagged_ = 0;
  std::uint64_t replenish_draws_ = 0;
  double time_ = 0.0;
  bool contaminated_ = false;
};

enum class CupEventKind : std::uint8_t { Exchange, Tagged, Removal };

struct CupEvent {
  CupEventKind kind = CupEventKind::Tagged;
  int x = 0;  // larger site of an exchange
  int y = 0;  // smaller site of an exchange

  bool operator==(const CupEvent&) const = default;
};

/// Applies one concrete event.
void apply(CupLattice& state, const CupEvent& ev, double rho, RngStream& rng);

/// Draws the next event and its holding time, advances the clock and applies it.
/// Exchange clocks on all bonds of range one and two inside 1..L are active.
CupEvent cup_step(CupLattice& state, const Rates& r, RngStream& rng);

/// Runs until the clock would pass `horizon`; the clock is left at `horizon`.
void run_until(CupLattice& state, const Rates& r, RngStream& rng, double horizon);

/// Occupancies of the queried sites, or nullopt if any of them is not white.
std::optional<std::vector<bool>> exchangeability_snapshot(const CupLattice& state,
                                                          std::span<const int> sites);

}  // namespace tagsep::cup
