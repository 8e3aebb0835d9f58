#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tagsep/color_two.hpp"
#include "tagsep/rates.hpp"
#include "tagsep/report.hpp"

namespace tagsep {

struct Tolerances {
  double z = 3.0;              // |z| threshold for Monte Carlo vs target
  double p = 1e-3;             // minimum p-value for distributional tests
  double lln_abs = 0.02;       // absolute floor for the speed check
  double marginal_abs = 0.01;  // absolute floor for site-1 fractions
  double clt_rel = 0.10;       // relative gap between the two CLT variances
  double oracle_gap = 1e-2;    // capped MGF vs closed form at the largest cap
};

struct MartingaleSpec {
  double t = 2.0;
  // When set, (a, b, c, d) are the coupled exponents at this b.
  std::optional<double> coupled_b = -0.05;
  psi::MartingaleParams params;
};

struct OracleSpec {
  double b = -0.05;  // s = g(b)
  std::size_t mc_cycles = 100'000;
};

struct ExchangeabilitySpec {
  int lattice_length = 64;
  double time = 5.0;
  std::vector<std::vector<int>> site_sets{{2}, {2, 3}, {2, 3, 4}, {1, 3, 5}};
  bool emit_snapshots = false;
};

struct CltSpec {
  double horizon = 1000.0;
  std::size_t replicas = 2000;
  std::size_t cycles = 100'000;
};

/// Everything that determines an experiment's output, plus the output
/// location and thread count (which do not).
struct ExperimentConfig {
  std::string experiment = "analytic";
  // Unset fields take per-experiment defaults; see resolved_rates/resolved_replicas.
  std::optional<Rates> rates;
  std::uint64_t seed = 20240601;
  double horizon = 2e4;
  std::optional<std::size_t> replicas;
  std::size_t cycles = 100'000;
  std::vector<double> b_grid{-0.02, -0.05, -0.1};
  std::vector<int> cap_M{6, 8, 10, 12};
  std::uint64_t max_events_per_cycle = 100'000'000;
  MartingaleSpec martingale;
  OracleSpec oracle;
  ExchangeabilitySpec exchangeability;
  CltSpec clt;
  Tolerances tolerances;
  unsigned threads = 0;
  std::string output_dir = "out";
};

const std::vector<std::string>& experiment_names();

/// (1, 1, 2, 0.5) for the first-scheme and cup experiments, (0.1, 0.1, 5, 0.1)
/// for the regenerative ones.
Rates resolved_rates(const ExperimentConfig& c);
/// 16 for lln/marginal, 10^4 for martingale-check, 10^5 for exchangeability.
std::size_t resolved_replicas(const ExperimentConfig& c);

/// Parses a config document; unknown keys are rejected. Throws ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Result-determining fields only (no threads or output_dir), keys sorted.
nlohmann::json config_echo(const ExperimentConfig& c);
/// Throws ConfigError on invalid fields and RegimeError when the experiment
/// needs m > w and the rates do not satisfy it.
void validate(const ExperimentConfig& c);

/// Runs the configured experiment. Output does not depend on c.threads.
RunReport run(const ExperimentConfig& c);

}  // namespace tagsep
