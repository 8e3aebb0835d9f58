#include "tagsep/color_one.hpp"

#include <stdexcept>

#include "tagsep/parallel.hpp"

namespace tagsep::eta {

Color ColorField::at(long site) const {
  auto it = cells_.find(site + offset_);
  return it == cells_.end() ? Color::White : it->second;
}

void ColorField::set(long site, Color c) {
  if (site < 1) throw std::out_of_range("color field sites start at 1");
  if (c == Color::White)
    cells_.erase(site + offset_);
  else
    cells_[site + offset_] = c;
}

void ColorField::exchange(long i, long j) {
  const Color ci = at(i);
  const Color cj = at(j);
  set(i, cj);
  set(j, ci);
}

void ColorField::shift_left() {
  if (at(1) == Color::Blue) throw std::logic_error("shift with a blue cup at site 1");
  cells_.erase(1 + offset_);
  ++offset_;
}

bool ColorField::operator==(const ColorField& other) const {
  if (cells_.size() != other.cells_.size()) return false;
  auto a = cells_.begin();
  auto b = other.cells_.begin();
  for (; a != cells_.end(); ++a, ++b)
    if (a->first - offset_ != b->first - other.offset_ || a->second != b->second) return false;
  return true;
}

EventCatalog<EtaEvent> eta_catalog(const ColorField& field, const Rates& r) {
  EventCatalog<EtaEvent> cat;
  // Each bond is listed once: from its colored left endpoint, or from its
  // right endpoint when the left one is white.
  field.for_each_colored([&](long site, Color c) {
    for (int d = 1; d <= 2; ++d) {
      const double rate = jump_rate(r, d);
      if (field.at(site + d) != c) cat.add(EtaEvent{EtaEventKind::Exchange, site, site + d}, rate);
      const long left = site - d;
      if (left >= 1 && field.at(left) == Color::White)
        cat.add(EtaEvent{EtaEventKind::Exchange, left, site}, rate);
    }
  });
  cat.add(EtaEvent{EtaEventKind::Tagged, 0, 0}, r.q1);
  cat.add(EtaEvent{EtaEventKind::Removal, 0, 0}, r.p2);
  return cat;
}

namespace {

void count_change(TrajectoryStats& st, long site, Color c, int sign) {
  if (c == Color::Blue) {
    st.n_b += sign;
    st.w_b += sign * site;
  } else if (c == Color::Purple) {
    st.n_p += sign;
    st.w_p += sign * site;
  }
}

void recolor(EtaState& s, long site, Color c) {
  count_change(s.stats, site, s.field.at(site), -1);
  s.field.set(site, c);
  count_change(s.stats, site, c, +1);
}

void shift(EtaState& s) {
  // Site 1 is purple here; it leaves and every other colored site moves down.
  count_change(s.stats, 1, s.field.at(1), -1);
  s.field.shift_left();
  s.stats.w_b -= s.stats.n_b;
  s.stats.w_p -= s.stats.n_p;
  ++s.stats.x;
}

}  // namespace

EtaBranch apply_event(EtaState& s, const EtaEvent& ev, bool reveal_occupied) {
  switch (ev.kind) {
    case EtaEventKind::Exchange: {
      const Color ci = s.field.at(ev.i);
      const Color cj = s.field.at(ev.j);
      recolor(s, ev.i, cj);
      recolor(s, ev.j, ci);
      return EtaBranch::Exchange;
    }
    case EtaEventKind::Removal:
      recolor(s, 1, Color::Purple);
      return EtaBranch::RemovalToPurple;
    case EtaEventKind::Tagged:
      switch (s.field.at(1)) {
        case Color::Purple:
          shift(s);
          return EtaBranch::ShiftPurple;
        case Color::Blue:
          return EtaBranch::Blocked;
        case Color::White:
          if (reveal_occupied) {
            recolor(s, 1, Color::Blue);
            return EtaBranch::RevealBlue;
          }
          recolor(s, 1, Color::Purple);
          shift(s);
          return EtaBranch::RevealPurpleShift;
      }
  }
  throw std::logic_error("unreachable");
}

namespace {

void accrue(EtaState& s, double dt) {
  s.stats.occupation[static_cast<std::size_t>(color_index(s.field.at(1)))] += dt;
  s.stats.int_n_b += dt * static_cast<double>(s.stats.n_b);
  s.stats.int_n_p += dt * static_cast<double>(s.stats.n_p);
  s.stats.t += dt;
}

EtaBranch apply_drawn(EtaState& s, const EtaEvent& ev, const Rates& r, RngStream& rng) {
  const bool reveal = ev.kind == EtaEventKind::Tagged && s.field.at(1) == Color::White &&
                      sample_bernoulli(rng, r.rho);
  return apply_event(s, ev, reveal);
}

}  // namespace

EtaBranch eta_step(EtaState& s, const Rates& r, RngStream& rng) {
  const auto cat = eta_catalog(s.field, r);
  accrue(s, sample_exponential(rng, cat.total_rate()));
  return apply_drawn(s, sample_event(rng, cat), r, rng);
}

void run_until(EtaState& s, const Rates& r, RngStream& rng, double horizon) {
  while (true) {
    const auto cat = eta_catalog(s.field, r);
    const double dt = sample_exponential(rng, cat.total_rate());
    if (s.stats.t + dt > horizon) {
      accrue(s, horizon - s.stats.t);
      return;
    }
    accrue(s, dt);
    apply_drawn(s, sample_event(rng, cat), r, rng);
  }
}

std::array<long, 4> recount(const ColorField& field) {
  std::array<long, 4> out{0, 0, 0, 0};
  field.for_each_colored([&](long site, Color c) {
    if (c == Color::Blue) {
      ++out[0];
      out[2] += site;
    } else if (c == Color::Purple) {
      ++out[1];
      out[3] += site;
    }
  });
  return out;
}

LlnReplica run_replica(const Rates& r, double horizon, std::uint64_t seed, std::uint64_t replica) {
  validate(r);
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  RngStream rng(seed, replica);
  EtaState s;
  run_until(s, r, rng, 0.5 * horizon);
  const double half = s.stats.t;
  const double nb_half = s.stats.int_n_b;
  const double np_half = s.stats.int_n_p;
  run_until(s, r, rng, horizon);

  LlnReplica row;
  row.replica = replica;
  row.horizon = horizon;
  row.x_t = s.stats.x;
  for (std::size_t k = 0; k < 3; ++k) row.fractions[k] = s.stats.occupation[k] / horizon;
  row.n_b_avg = s.stats.int_n_b / horizon;
  row.n_p_avg = s.stats.int_n_p / horizon;
  row.n_b_avg_first = nb_half / half;
  row.n_p_avg_first = np_half / half;
  row.n_b_avg_second = (s.stats.int_n_b - nb_half) / (horizon - half);
  row.n_p_avg_second = (s.stats.int_n_p - np_half) / (horizon - half);
  return row;
}

std::vector<LlnReplica> run_lln(const Rates& r, double horizon, std::size_t replicas,
                                std::uint64_t seed, unsigned threads) {
  validate(r);
  return parallel_map(replicas, threads, [&](std::size_t i) {
    return run_replica(r, horizon, seed, static_cast<std::uint64_t>(i));
  });
}

}  // namespace tagsep::eta
