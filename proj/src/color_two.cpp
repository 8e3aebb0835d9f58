#include "tagsep/color_two.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "tagsep/parallel.hpp"
#include "tagsep/stats.hpp"

namespace tagsep::psi {

int BoundaryState::blue_count() const {
  return static_cast<int>(std::count(colors.begin(), colors.end(), Color::Blue));
}

int BoundaryState::purple_count() const {
  return static_cast<int>(std::count(colors.begin(), colors.end(), Color::Purple));
}

std::uint64_t BoundaryState::blue_mask() const {
  if (colors.size() > 63) throw std::out_of_range("blue_mask needs m <= 63");
  std::uint64_t mask = 0;
  for (std::size_t k = 0; k < colors.size(); ++k)
    if (colors[k] == Color::Blue) mask |= std::uint64_t{1} << k;
  return mask;
}

EventCatalog<PsiEvent> psi_catalog(const BoundaryState& state, const Rates& r, int cap) {
  EventCatalog<PsiEvent> cat;
  const int m = state.m();
  if (m == 0) return cat;
  for (int i = 1; i <= m; ++i)
    for (int d = 1; d <= 2 && i + d <= m; ++d)
      if (state.site(i) != state.site(i + d))
        cat.add(PsiEvent{PsiEventKind::Exchange, i, i + d}, jump_rate(r, d));

  auto allowed = [&](int k) { return cap <= 0 || m + k <= cap; };
  if (allowed(1)) {
    cat.add(PsiEvent{PsiEventKind::Grow, m, m + 1}, r.p1);
    if (m >= 2)
      cat.add(PsiEvent{PsiEventKind::Grow, m - 1, m + 1}, r.p2);
    else
      cat.add(PsiEvent{PsiEventKind::GrowNoSwap, 0, 2}, r.p2);
  }
  if (allowed(2)) cat.add(PsiEvent{PsiEventKind::Grow, m, m + 2}, r.p2);
  cat.add(PsiEvent{PsiEventKind::Tagged, 0, 0}, r.q1);
  cat.add(PsiEvent{PsiEventKind::Removal, 0, 0}, r.p2);
  return cat;
}

namespace {

void reveal(BoundaryState& s, CycleCounters& c, bool occupied) {
  s.colors.push_back(occupied ? Color::Blue : Color::Purple);
  ++(occupied ? c.n_wb : c.n_wp);
}

void swap_sites(BoundaryState& s, int x, int y) {
  std::swap(s.colors.at(static_cast<std::size_t>(x - 1)),
            s.colors.at(static_cast<std::size_t>(y - 1)));
}

}  // namespace

PsiBranch apply_event(BoundaryState& state, CycleCounters& counters, const PsiEvent& ev,
                      std::span<const bool> reveals) {
  const int m = state.m();
  if (m == 0) throw std::logic_error("boundary process is absorbed");
  const int k = ev.growth(m);
  if (static_cast<int>(reveals.size()) != k)
    throw std::invalid_argument("reveal count does not match the growth of the event");
  switch (ev.kind) {
    case PsiEventKind::Exchange:
      swap_sites(state, ev.x, ev.y);
      return PsiBranch::Exchange;
    case PsiEventKind::Grow:
      for (bool occ : reveals) reveal(state, counters, occ);
      swap_sites(state, ev.x, ev.y);
      return PsiBranch::Grow;
    case PsiEventKind::GrowNoSwap:
      if (m != 1) throw std::logic_error("unswapped growth only exists at m == 1");
      reveal(state, counters, reveals[0]);
      return PsiBranch::Grow;
    case PsiEventKind::Removal:
      if (state.colors.front() == Color::Blue) {
        state.colors.front() = Color::Purple;
        ++counters.n_bp;
        return PsiBranch::RemovalBlue;
      }
      return PsiBranch::RemovalPurple;
    case PsiEventKind::Tagged:
      if (state.colors.front() == Color::Purple) {
        state.colors.erase(state.colors.begin());
        ++counters.n_pd;
        return PsiBranch::Shift;
      }
      return PsiBranch::Blocked;
  }
  throw std::logic_error("unreachable");
}

namespace {

PsiBranch apply_drawn(BoundaryState& state, CycleCounters& counters, const PsiEvent& ev,
                      double rho, RngStream& rng) {
  std::array<bool, 2> buf{};
  const int k = ev.growth(state.m());
  for (int i = 0; i < k; ++i) buf[static_cast<std::size_t>(i)] = sample_bernoulli(rng, rho);
  return apply_event(state, counters, ev, std::span<const bool>(buf.data(), static_cast<std::size_t>(k)));
}

}  // namespace

PsiStep psi_step(BoundaryState& state, CycleCounters& counters, const Rates& r, RngStream& rng,
                 int cap) {
  if (state.m() == 0) throw std::logic_error("psi_step at m == 0");
  const auto cat = psi_catalog(state, r, cap);
  PsiStep step;
  step.elapsed = sample_exponential(rng, cat.total_rate());
  step.event = sample_event(rng, cat);
  step.branch = apply_drawn(state, counters, step.event, r.rho, rng);
  return step;
}

void open_cycle(BoundaryState& state, CycleCounters& counters, double rho, RngStream& rng) {
  state.colors.clear();
  counters = CycleCounters{};
  reveal(state, counters, sample_bernoulli(rng, rho));
}

void InvariantMonitor::check_event(const BoundaryState& s, const CycleCounters& c,
                                   std::uint64_t x_in_cycle) {
  ++events_checked;
  const auto blue = static_cast<std::int64_t>(s.blue_count());
  const auto purple = static_cast<std::int64_t>(s.purple_count());
  const auto wb = static_cast<std::int64_t>(c.n_wb);
  const auto wp = static_cast<std::int64_t>(c.n_wp);
  const auto bp = static_cast<std::int64_t>(c.n_bp);
  const auto pd = static_cast<std::int64_t>(c.n_pd);
  bool ok = wb - bp == blue && bp + wp - pd == purple && wb - bp >= 0 && bp + wp - pd >= 0 &&
            x_in_cycle == c.n_pd && blue + purple == s.m();
  if (s.m() >= 1) {
    // Exactly one of the site-1 indicators is on while the block is nonempty.
    const Color c1 = s.colors.front();
    ok = ok && ((c1 == Color::Blue) + (c1 == Color::Purple) == 1);
  }
  if (!ok) ++violations;
}

void InvariantMonitor::check_regeneration(const BoundaryState& s, const CycleCounters& c,
                                          std::uint64_t x_tau) {
  ++cycles_checked;
  const bool ok = s.m() == 0 && c.n_wb == c.n_bp && c.n_bp + c.n_wp == c.n_pd &&
                  x_tau == c.n_pd && x_tau == c.n_wb + c.n_wp;
  if (!ok) ++violations;
}

void InvariantMonitor::merge(const InvariantMonitor& other) {
  events_checked += other.events_checked;
  cycles_checked += other.cycles_checked;
  violations += other.violations;
}

RegenCycle simulate_cycle(const Rates& r, RngStream& rng, const CycleOptions& opt,
                          InvariantMonitor* monitor) {
  BoundaryState state;
  RegenCycle cyc;
  open_cycle(state, cyc.counters, r.rho, rng);
  cyc.initial_color = state.colors.front();
  std::uint64_t x = 0;
  while (state.m() > 0) {
    if (cyc.events >= opt.max_events)
      throw TruncatedCycleError(cyc.events, cyc.tau, state.m(), 0);
    const PsiStep step = psi_step(state, cyc.counters, r, rng, opt.cap);
    cyc.tau += step.elapsed;
    ++cyc.events;
    if (step.branch == PsiBranch::Shift) ++x;
    if (monitor) monitor->check_event(state, cyc.counters, x);
  }
  cyc.x_tau = x;
  if (monitor) monitor->check_regeneration(state, cyc.counters, x);
  return cyc;
}

CycleRun run_cycles(const Rates& r, std::size_t n_cycles, std::uint64_t seed,
                    const CycleOptions& opt, unsigned threads) {
  validate(r);
  if (opt.block_size == 0) throw std::invalid_argument("block_size must be positive");
  const std::size_t blocks = (n_cycles + opt.block_size - 1) / opt.block_size;
  struct Block {
    std::vector<RegenCycle> cycles;
    InvariantMonitor monitor;
  };
  auto results = parallel_map(blocks, threads, [&](std::size_t k) {
    Block b;
    RngStream rng(seed, static_cast<std::uint64_t>(k));
    const std::size_t begin = k * opt.block_size;
    const std::size_t count = std::min(opt.block_size, n_cycles - begin);
    b.cycles.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      try {
        b.cycles.push_back(simulate_cycle(r, rng, opt, opt.verify ? &b.monitor : nullptr));
      } catch (const TruncatedCycleError& e) {
        throw TruncatedCycleError(e.events(), e.elapsed(), e.boundary(), begin + i);
      }
    }
    return b;
  });
  CycleRun run;
  run.cycles.reserve(n_cycles);
  for (auto& b : results) {
    run.cycles.insert(run.cycles.end(), b.cycles.begin(), b.cycles.end());
    run.monitor.merge(b.monitor);
  }
  return run;
}

double log_martingale_sample(const Rates& r, const MartingaleParams& mp, double t,
                             RngStream& rng) {
  const double mix = r.rho * std::exp(mp.a) + (1.0 - r.rho) * std::exp(mp.b);
  const double growth_rate = (r.p1 + r.p2) * (mix - 1.0) + r.p2 * (mix * mix - 1.0);
  const double blue_rate = r.p2 * std::expm1(mp.c);
  const double purple_rate = r.q1 * std::expm1(mp.d);

  BoundaryState state;
  CycleCounters counters;
  open_cycle(state, counters, r.rho, rng);
  const CycleCounters start = counters;
  double now = 0.0;
  double compensator = 0.0;
  while (state.m() > 0) {
    // Indicators are constant between events.
    const double rate =
        growth_rate + (state.colors.front() == Color::Blue ? blue_rate : purple_rate);
    const auto cat = psi_catalog(state, r);
    const double dt = sample_exponential(rng, cat.total_rate());
    if (now + dt >= t) {
      compensator += (t - now) * rate;
      break;
    }
    compensator += dt * rate;
    now += dt;
    apply_drawn(state, counters, sample_event(rng, cat), r.rho, rng);
  }
  auto diff = [](std::uint64_t a, std::uint64_t b) { return static_cast<double>(a - b); };
  return mp.a * diff(counters.n_wb, start.n_wb) + mp.b * diff(counters.n_wp, start.n_wp) +
         mp.c * diff(counters.n_bp, start.n_bp) + mp.d * diff(counters.n_pd, start.n_pd) -
         compensator;
}

MartingaleResult martingale_check(const Rates& r, const MartingaleParams& mp, double t,
                                  std::size_t replicas, std::uint64_t seed, unsigned threads) {
  validate(r);
  if (!(t >= 0.0)) throw DomainError("martingale horizon must be >= 0");
  for (double v : {mp.a, mp.b, mp.c, mp.d})
    if (!std::isfinite(v)) throw DomainError("martingale parameters must be finite");
  const auto values = parallel_map(replicas, threads, [&](std::size_t i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    return std::exp(log_martingale_sample(r, mp, t, rng));
  });
  stats::Accumulator acc;
  for (double v : values) acc.add(v);
  MartingaleResult res;
  res.n = acc.count();
  res.mean = acc.mean();
  res.se = acc.standard_error();
  res.z = stats::z_score(res.mean, res.se, 1.0);
  return res;
}

}  // namespace tagsep::psi
