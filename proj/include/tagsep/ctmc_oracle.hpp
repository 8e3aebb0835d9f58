#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "tagsep/color_two.hpp"
#include "tagsep/rates.hpp"

namespace tagsep::oracle {

/// Boundary process with growth beyond `cap` suppressed, on the finite state
/// space {(m, blue-mask) : 1 <= m <= cap} plus the absorbing state m = 0.
/// State (m, mask) has index 2^m - 2 + mask; the absorbing state is last.
class CappedChain {
 public:
  struct Transition {
    std::size_t target;
    double rate;
  };

  int cap() const { return cap_; }
  const Rates& rates() const { return rates_; }
  std::size_t state_count() const { return rows_.size(); }
  std::size_t absorbing_index() const { return rows_.size() - 1; }

  static std::size_t index_of(int m, std::uint64_t mask);
  std::pair<int, std::uint64_t> decode(std::size_t index) const;
  psi::BoundaryState state(std::size_t index) const;

  // Off-diagonal rates out of a state, one entry per distinct target.
  const std::vector<Transition>& transitions(std::size_t index) const { return rows_.at(index); }
  double exit_rate(std::size_t index) const;

  friend CappedChain build_capped_chain(const Rates& r, int cap);

 private:
  int cap_ = 0;
  Rates rates_;
  std::vector<std::vector<Transition>> rows_;
};

/// Enumerates every state, its active clocks (mirroring psi_catalog with the
/// cap) and every reveal outcome. Requires 2 <= cap <= 16.
CappedChain build_capped_chain(const Rates& r, int cap);

struct MgfTauValues {
  double s = 0.0;
  std::vector<double> u;  // E_x[exp(s tau)] per state; 1 at the absorbing state
  double mixture = 0.0;   // rho*u(m=1, blue) + (1-rho)*u(m=1, purple)
};

/// Solves (Q + s I) u = 0 on transient states with u = 1 at absorption.
/// Throws RadiusExceededError when the system is singular or the solution
/// leaves (0, inf), i.e. s is beyond the exponential-moment radius.
MgfTauValues exact_mgf_tau(const CappedChain& chain, double s);

struct CappedMarginals {
  double white = 0.0;
  double blue = 0.0;
  double purple = 0.0;
  std::vector<double> stationary;  // indexed like the chain; 0 off the recurrent class
  std::size_t recurrent_states = 0;
};

/// Stationary site-1 law of the chain closed by an instantaneous reset: every
/// jump into m = 0 is redirected to m = 1 with site 1 blue (prob rho) or
/// purple (prob 1 - rho). Throws ReducibleChainError if the states reachable
/// from the reset do not form a single closed class.
CappedMarginals exact_capped_marginals(const CappedChain& chain);

}  // namespace tagsep::oracle
