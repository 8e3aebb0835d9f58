#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "tagsep/errors.hpp"

namespace tagsep {

/// Seeded random stream owned by a single replica.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard; every variate is produced by an explicit inverse transform so a
/// (seed, stream_id) pair reproduces bit-identical draws on any conforming
/// toolchain.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

/// Exp(rate) holding time. Throws DomainError when rate <= 0.
double sample_exponential(RngStream& rng, double rate);

/// True ("occupied") with probability rho.
bool sample_bernoulli(RngStream& rng, double rho);

/// Competing exponential clocks, one entry per event with a positive rate.
template <class Tag>
class EventCatalog {
 public:
  struct Entry {
    Tag tag;
    double rate;
  };

  void clear() {
    entries_.clear();
    total_ = 0.0;
  }

  // Zero-rate entries are dropped so the catalog only lists active clocks.
  void add(Tag tag, double rate) {
    if (!(rate > 0.0)) return;
    entries_.push_back(Entry{std::move(tag), rate});
    total_ += rate;
  }

  const std::vector<Entry>& entries() const { return entries_; }
  double total_rate() const { return total_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<Entry> entries_;
  double total_ = 0.0;
};

/// Gillespie selection: returns entry k with probability rate_k / total_rate.
template <class Tag>
const Tag& sample_event(RngStream& rng, const EventCatalog<Tag>& catalog) {
  if (catalog.empty()) throw NoActiveEventsError();
  const auto& entries = catalog.entries();
  double target = rng.uniform() * catalog.total_rate();
  for (const auto& e : entries) {
    if (target < e.rate) return e.tag;
    target -= e.rate;
  }
  // Rounding left a sliver past the last entry.
  return entries.back().tag;
}

}  // namespace tagsep
