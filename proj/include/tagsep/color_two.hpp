#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tagsep/color.hpp"
#include "tagsep/kernel.hpp"
#include "tagsep/rates.hpp"

namespace tagsep::psi {

/// Revealed block 1..m of the boundary process. Every site of the block is
/// blue or purple; sites beyond m are white. m == 0 only at regeneration.
struct BoundaryState {
  std::vector<Color> colors;  // colors[k] is site k+1

  int m() const { return static_cast<int>(colors.size()); }
  Color site(int i) const { return colors.at(static_cast<std::size_t>(i - 1)); }
  int blue_count() const;
  int purple_count() const;
  // Bitmask of blue sites, bit k for site k+1. Requires m <= 63.
  std::uint64_t blue_mask() const;

  bool operator==(const BoundaryState&) const = default;
};

/// Counting processes of one cycle: whites revealed blue, whites revealed
/// purple, blues turned purple, and downward boundary moves.
/// The site-1 reveal that opens a cycle is included in n_wb / n_wp.
struct CycleCounters {
  std::uint64_t n_wb = 0;
  std::uint64_t n_wp = 0;
  std::uint64_t n_bp = 0;
  std::uint64_t n_pd = 0;

  bool operator==(const CycleCounters&) const = default;
};

enum class PsiEventKind : std::uint8_t {
  Exchange,    // swap sites x < y inside 1..m
  Grow,        // reveal m+1..y, then swap x and y (x <= m < y)
  GrowNoSwap,  // only at m == 1: reveal site 2, no interchange
  Tagged,
  Removal,
};

struct PsiEvent {
  PsiEventKind kind = PsiEventKind::Tagged;
  int x = 0;
  int y = 0;

  int growth(int m) const {
    if (kind == PsiEventKind::Grow) return y - m;
    if (kind == PsiEventKind::GrowNoSwap) return 1;
    return 0;
  }
  bool operator==(const PsiEvent&) const = default;
};

enum class PsiBranch : std::uint8_t {
  Exchange,
  Grow,
  RemovalBlue,    // blue site 1 turned purple
  RemovalPurple,  // removal clock at a purple site 1: no change
  Shift,          // tagged clock at a purple site 1: boundary moves down
  Blocked,        // tagged clock at a blue site 1
};

/// Active clocks at boundary m >= 1. `cap` > 0 suppresses growth past site
/// cap. An empty catalog is returned at m == 0.
EventCatalog<PsiEvent> psi_catalog(const BoundaryState& state, const Rates& r, int cap = 0);

/// Applies an event; `reveals` holds the occupancies of sites m+1..m+growth.
PsiBranch apply_event(BoundaryState& state, CycleCounters& counters, const PsiEvent& ev,
                      std::span<const bool> reveals);

struct PsiStep {
  PsiEvent event;
  PsiBranch branch = PsiBranch::Blocked;
  double elapsed = 0.0;
};

/// Exact Gillespie step of the stopped boundary process. Requires m >= 1.
PsiStep psi_step(BoundaryState& state, CycleCounters& counters, const Rates& r, RngStream& rng,
                 int cap = 0);

/// Opens a cycle: m = 1 with site 1 blue w.p. rho, counted in n_wb / n_wp.
void open_cycle(BoundaryState& state, CycleCounters& counters, double rho, RngStream& rng);

struct RegenCycle {
  double tau = 0.0;
  std::uint64_t x_tau = 0;
  CycleCounters counters;
  Color initial_color = Color::Purple;
  std::uint64_t events = 0;
};

/// Tallies the counting-process identities checked after every event.
struct InvariantMonitor {
  std::uint64_t events_checked = 0;
  std::uint64_t cycles_checked = 0;
  std::uint64_t violations = 0;

  void check_event(const BoundaryState& s, const CycleCounters& c, std::uint64_t x_in_cycle);
  void check_regeneration(const BoundaryState& s, const CycleCounters& c, std::uint64_t x_tau);
  void merge(const InvariantMonitor& other);
};

struct CycleOptions {
  std::uint64_t max_events = 100'000'000;
  int cap = 0;  // 0 = uncapped
  bool verify = false;
  // Cycles per RNG stream; fixes the stream layout independently of threads.
  std::size_t block_size = 1024;
};

/// One full cycle from the site-1 reveal to the first return of m to 0.
/// Throws TruncatedCycleError when max_events is exceeded.
RegenCycle simulate_cycle(const Rates& r, RngStream& rng, const CycleOptions& opt,
                          InvariantMonitor* monitor = nullptr);

struct CycleRun {
  std::vector<RegenCycle> cycles;
  InvariantMonitor monitor;
};

/// n independent cycles. Block k of `block_size` cycles uses stream id k.
CycleRun run_cycles(const Rates& r, std::size_t n_cycles, std::uint64_t seed,
                    const CycleOptions& opt = {}, unsigned threads = 0);

struct MartingaleParams {
  double a = 0.0;  // weight of n_wb
  double b = 0.0;  // weight of n_wp
  double c = 0.0;  // weight of n_bp
  double d = 0.0;  // weight of n_pd
};

/// log M_{t ^ tau}: counter increments after the opening reveal, minus the
/// compensator integrated exactly over each holding interval.
double log_martingale_sample(const Rates& r, const MartingaleParams& mp, double t, RngStream& rng);

struct MartingaleResult {
  std::size_t n = 0;
  double mean = 0.0;
  double se = 0.0;
  double z = 0.0;
};

/// Empirical mean of M_{t ^ tau} over independent replicas (stream id = replica).
MartingaleResult martingale_check(const Rates& r, const MartingaleParams& mp, double t,
                                  std::size_t replicas, std::uint64_t seed, unsigned threads = 0);

}  // namespace tagsep::psi
