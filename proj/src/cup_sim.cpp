#include "tagsep/cup_sim.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace tagsep::cup {

CupLattice CupLattice::fresh(int length, double rho, RngStream& rng) {
  if (length < 5) throw DomainError("cup lattice needs L >= 5");
  CupLattice lat;
  lat.sites_.resize(static_cast<std::size_t>(length));
  for (int i = 1; i <= length; ++i)
    lat.at(i) = Cup{Color::White, static_cast<std::uint64_t>(i), sample_bernoulli(rng, rho)};
  lat.next_label_ = static_cast<std::uint64_t>(length) + 1;
  return lat;
}

CupLattice CupLattice::from_cups(std::vector<Cup> sites, std::uint64_t next_label) {
  if (sites.size() < 5) throw DomainError("cup lattice needs L >= 5");
  CupLattice lat;
  lat.sites_ = std::move(sites);
  lat.next_label_ = next_label;
  lat.refresh_contamination();
  return lat;
}

void CupLattice::exchange(int x, int y) {
  std::swap(at(x), at(y));
  if (at(x).color != Color::White || at(y).color != Color::White) refresh_contamination();
}

void CupLattice::ring_tagged(double rho, RngStream& rng) {
  Cup& first = at(1);
  if (first.particle) {
    first.color = Color::Blue;
    return;
  }
  sites_.erase(sites_.begin());
  sites_.push_back(Cup{Color::White, next_label_++, sample_bernoulli(rng, rho)});
  ++replenish_draws_;
  ++x_tagged_;
}

void CupLattice::ring_removal() {
  Cup& first = at(1);
  first.particle = false;
  first.color = Color::Purple;
}

void CupLattice::refresh_contamination() {
  const int n = length();
  for (int i = std::max(1, n - 2); i <= n; ++i)
    if (at(i).color != Color::White) contaminated_ = true;
}

bool CupLattice::invariants_hold() const {
  std::unordered_set<std::uint64_t> labels;
  for (const Cup& c : sites_) {
    if (c.color == Color::Blue && !c.particle) return false;
    if (c.color == Color::Purple && c.particle) return false;
    if (!labels.insert(c.label).second) return false;
  }
  return true;
}

void apply(CupLattice& state, const CupEvent& ev, double rho, RngStream& rng) {
  switch (ev.kind) {
    case CupEventKind::Exchange: state.exchange(ev.x, ev.y); break;
    case CupEventKind::Tagged: state.ring_tagged(rho, rng); break;
    case CupEventKind::Removal: state.ring_removal(); break;
  }
}

namespace {

// The clock set does not depend on the configuration, so bonds are grouped by
// range and a bond is picked uniformly inside its group.
enum class CupClass : std::uint8_t { Range1, Range2, Tagged, Removal };

EventCatalog<CupClass> class_catalog(int length, const Rates& r) {
  EventCatalog<CupClass> cat;
  cat.add(CupClass::Range1, r.p1 * (length - 1));
  cat.add(CupClass::Range2, r.p2 * (length - 2));
  cat.add(CupClass::Tagged, r.q1);
  cat.add(CupClass::Removal, r.p2);
  return cat;
}

CupEvent draw_event(const EventCatalog<CupClass>& cat, int length, RngStream& rng) {
  switch (sample_event(rng, cat)) {
    case CupClass::Range1: {
      const int y = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(length - 1)));
      return CupEvent{CupEventKind::Exchange, y + 1, y};
    }
    case CupClass::Range2: {
      const int y = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(length - 2)));
      return CupEvent{CupEventKind::Exchange, y + 2, y};
    }
    case CupClass::Tagged: return CupEvent{CupEventKind::Tagged, 0, 0};
    case CupClass::Removal: return CupEvent{CupEventKind::Removal, 0, 0};
  }
  throw std::logic_error("unreachable");
}

}  // namespace

CupEvent cup_step(CupLattice& state, const Rates& r, RngStream& rng) {
  const auto cat = class_catalog(state.length(), r);
  state.advance_time(sample_exponential(rng, cat.total_rate()));
  const CupEvent ev = draw_event(cat, state.length(), rng);
  apply(state, ev, r.rho, rng);
  return ev;
}

void run_until(CupLattice& state, const Rates& r, RngStream& rng, double horizon) {
  const auto cat = class_catalog(state.length(), r);
  while (true) {
    const double dt = sample_exponential(rng, cat.total_rate());
    if (state.time() + dt > horizon) {
      state.advance_time(horizon - state.time());
      return;
    }
    state.advance_time(dt);
    apply(state, draw_event(cat, state.length(), rng), r.rho, rng);
  }
}

std::optional<std::vector<bool>> exchangeability_snapshot(const CupLattice& state,
                                                          std::span<const int> sites) {
  std::vector<bool> occ;
  occ.reserve(sites.size());
  for (int s : sites) {
    if (s < 1 || s > state.length()) throw DomainError("snapshot site outside 1..L");
    const Cup& c = state.at(s);
    if (c.color != Color::White) return std::nullopt;
    occ.push_back(c.particle);
  }
  return occ;
}

}  // namespace tagsep::cup
