#include "tagsep/ctmc_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "tagsep/errors.hpp"

namespace tagsep::oracle {

namespace {

constexpr std::size_t kDenseLimit = 4000;

}  // namespace

std::size_t CappedChain::index_of(int m, std::uint64_t mask) {
  return (std::size_t{1} << m) - 2 + static_cast<std::size_t>(mask);
}

std::pair<int, std::uint64_t> CappedChain::decode(std::size_t index) const {
  if (index == absorbing_index()) return {0, 0};
  int m = 1;
  while (index_of(m + 1, 0) <= index) ++m;
  return {m, static_cast<std::uint64_t>(index - index_of(m, 0))};
}

psi::BoundaryState CappedChain::state(std::size_t index) const {
  const auto [m, mask] = decode(index);
  psi::BoundaryState s;
  s.colors.resize(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k)
    s.colors[static_cast<std::size_t>(k)] = ((mask >> k) & 1U) ? Color::Blue : Color::Purple;
  return s;
}

double CappedChain::exit_rate(std::size_t index) const {
  double total = 0.0;
  for (const auto& t : rows_.at(index)) total += t.rate;
  return total;
}

CappedChain build_capped_chain(const Rates& r, int cap) {
  validate(r);
  if (cap < 2 || cap > 16) throw DomainError("cap must lie in [2, 16]");
  CappedChain chain;
  chain.cap_ = cap;
  chain.rates_ = r;
  const std::size_t n = (std::size_t{1} << (cap + 1)) - 1;
  chain.rows_.resize(n);

  for (std::size_t idx = 0; idx + 1 < n; ++idx) {
    const psi::BoundaryState from = chain.state(idx);
    std::map<std::size_t, double> acc;
    const auto catalog = psi_catalog(from, r, cap);
    for (const auto& entry : catalog.entries()) {
      const int k = entry.tag.growth(from.m());
      for (unsigned outcome = 0; outcome < (1U << k); ++outcome) {
        std::array<bool, 2> reveals{};
        double weight = 1.0;
        for (int j = 0; j < k; ++j) {
          reveals[static_cast<std::size_t>(j)] = (outcome >> j) & 1U;
          weight *= reveals[static_cast<std::size_t>(j)] ? r.rho : 1.0 - r.rho;
        }
        if (weight == 0.0) continue;
        psi::BoundaryState to = from;
        psi::CycleCounters scratch;
        psi::apply_event(to, scratch, entry.tag,
                         std::span<const bool>(reveals.data(), static_cast<std::size_t>(k)));
        const std::size_t target =
            to.m() == 0 ? chain.absorbing_index() : CappedChain::index_of(to.m(), to.blue_mask());
        if (target != idx) acc[target] += entry.rate * weight;
      }
    }
    auto& row = chain.rows_[idx];
    row.reserve(acc.size());
    for (const auto& [target, rate] : acc) row.push_back({target, rate});
  }
  return chain;
}

MgfTauValues exact_mgf_tau(const CappedChain& chain, double s) {
  const std::size_t n = chain.state_count() - 1;  // transient states
  const std::size_t abs = chain.absorbing_index();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd u;

  auto radius_error = [&] {
    return RadiusExceededError("capped MGF system is not solvable at s=" + std::to_string(s) +
                               " (beyond the exponential-moment radius)");
  };

  if (n < kDenseLimit) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      a(ii, ii) = s - chain.exit_rate(i);
      for (const auto& t : chain.transitions(i)) {
        if (t.target == abs)
          rhs(ii) -= t.rate;
        else
          a(ii, static_cast<Eigen::Index>(t.target)) += t.rate;
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    if (!(lu.rcond() > 1e-14)) throw radius_error();
    u = lu.solve(rhs);
  } else {
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      trip.emplace_back(ii, ii, s - chain.exit_rate(i));
      for (const auto& t : chain.transitions(i)) {
        if (t.target == abs)
          rhs(ii) -= t.rate;
        else
          trip.emplace_back(ii, static_cast<Eigen::Index>(t.target), t.rate);
      }
    }
    Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw radius_error();
    u = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw radius_error();
  }

  MgfTauValues out;
  out.s = s;
  out.u.assign(chain.state_count(), 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = u(static_cast<Eigen::Index>(i));
    if (!std::isfinite(v) || v <= 0.0) throw radius_error();
    out.u[i] = v;
  }
  const double rho = chain.rates().rho;
  out.mixture = rho * out.u[CappedChain::index_of(1, 1)] +
                (1.0 - rho) * out.u[CappedChain::index_of(1, 0)];
  return out;
}

CappedMarginals exact_capped_marginals(const CappedChain& chain) {
  const std::size_t n_all = chain.state_count();
  const std::size_t abs = chain.absorbing_index();
  const double rho = chain.rates().rho;
  const std::size_t blue1 = CappedChain::index_of(1, 1);
  const std::size_t purple1 = CappedChain::index_of(1, 0);

  // Closed-chain transitions: jumps into m = 0 land on the reset states.
  auto closed_row = [&](std::size_t i) {
    std::map<std::size_t, double> row;
    for (const auto& t : chain.transitions(i)) {
      if (t.target == abs) {
        if (rho > 0.0) row[blue1] += t.rate * rho;
        if (rho < 1.0) row[purple1] += t.rate * (1.0 - rho);
      } else {
        row[t.target] += t.rate;
      }
    }
    row.erase(i);
    return row;
  };
  std::vector<std::map<std::size_t, double>> rows(abs);
  for (std::size_t i = 0; i < abs; ++i) rows[i] = closed_row(i);

  std::vector<std::size_t> starts;
  if (rho > 0.0) starts.push_back(blue1);
  if (rho < 1.0) starts.push_back(purple1);

  // Forward reachability from the reset states.
  std::vector<char> reach(abs, 0);
  std::vector<std::size_t> stack(starts.begin(), starts.end());
  for (auto s : starts) reach[s] = 1;
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    for (const auto& [j, rate] : rows[i])
      if (!reach[j]) {
        reach[j] = 1;
        stack.push_back(j);
      }
  }
  // Every reachable state must lead back to a reset state.
  std::vector<std::vector<std::size_t>> reverse(abs);
  for (std::size_t i = 0; i < abs; ++i)
    if (reach[i])
      for (const auto& [j, rate] : rows[i]) reverse[j].push_back(i);
  std::vector<char> back(abs, 0);
  stack.assign(starts.begin(), starts.end());
  for (auto s : starts) back[s] = 1;
  while (!stack.empty()) {
    const auto j = stack.back();
    stack.pop_back();
    for (auto i : reverse[j])
      if (!back[i]) {
        back[i] = 1;
        stack.push_back(i);
      }
  }
  std::vector<std::size_t> states;
  std::vector<Eigen::Index> local(abs, -1);
  for (std::size_t i = 0; i < abs; ++i) {
    if (!reach[i]) continue;
    if (!back[i]) throw ReducibleChainError("closed capped chain has more than one recurrent class");
    local[i] = static_cast<Eigen::Index>(states.size());
    states.push_back(i);
  }

  // pi Q = 0 with the last balance equation replaced by normalisation.
  const auto n = static_cast<Eigen::Index>(states.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index li = 0; li < n; ++li) {
    const auto i = states[static_cast<std::size_t>(li)];
    double exit = 0.0;
    for (const auto& [j, rate] : rows[i]) {
      exit += rate;
      if (local[j] != n - 1) trip.emplace_back(local[j], li, rate);
    }
    if (li != n - 1) trip.emplace_back(li, li, -exit);
    trip.emplace_back(n - 1, li, 1.0);
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd pi;
  if (static_cast<std::size_t>(n) < kDenseLimit) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (const auto& t : trip) a(t.row(), t.col()) += t.value();
    pi = a.partialPivLu().solve(rhs);
  } else {
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw ReducibleChainError("stationary system is singular");
    pi = lu.solve(rhs);
  }

  CappedMarginals out;
  out.stationary.assign(n_all, 0.0);
  out.recurrent_states = states.size();
  for (Eigen::Index li = 0; li < n; ++li) {
    const auto i = states[static_cast<std::size_t>(li)];
    const double v = std::max(0.0, pi(li));  // clip round-off below zero
    out.stationary[i] = v;
    const auto [m, mask] = chain.decode(i);
    if (mask & 1U)
      out.blue += v;
    else
      out.purple += v;
  }
  return out;
}

}  // namespace tagsep::oracle
