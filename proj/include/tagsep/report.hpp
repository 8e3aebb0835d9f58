#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace tagsep {

/// A pooled estimate. `exact` marks closed-form values that carry no SE.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
  std::size_t n = 0;
  bool exact = false;
};

/// Pass/fail of one acceptance rule. When `estimate` names an entry of the
/// report, the rule is |value - target| < max(z_threshold * se, abs_floor) and
/// can be re-evaluated after merging.
struct Verdict {
  bool pass = false;
  std::string rule;
  std::string estimate;
  double target = 0.0;
  double z_threshold = 0.0;
  double abs_floor = 0.0;
  std::string detail;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct RunReport {
  std::string experiment;
  std::uint64_t seed = 0;
  nlohmann::json config;  // echo of every field that influences results
  std::map<std::string, Estimate> estimates;
  std::map<std::string, double> targets;  // closed-form values used as targets
  std::map<std::string, Verdict> verdicts;
  std::map<std::string, Table> tables;
  nlohmann::json notes = nlohmann::json::object();
  double wall_clock_seconds = 0.0;

  bool all_pass() const;
  void add_estimate(const std::string& key, double value, double se, std::size_t n);
  void add_exact(const std::string& key, double value);
  // Adds a tolerance verdict on an existing estimate and evaluates it.
  void add_tolerance_verdict(const std::string& key, const std::string& estimate, double target,
                             double z_threshold, double abs_floor, const std::string& rule);
  void add_verdict(const std::string& key, bool pass, const std::string& rule,
                   const std::string& detail);
};

/// Shortest round-trip decimal form ("%.17g"), '.' separator.
std::string format_number(double x);

/// RFC-4180 CSV with a header row and CRLF-free '\n' line endings.
std::string to_csv(const Table& table);

/// Parses RFC-4180 text produced by to_csv; the first record is the header.
Table parse_csv(const std::string& text);

/// JSON summary (no timing), keys sorted.
nlohmann::json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

/// Writes summary.json, one CSV per table, and timing.json under `dir`.
void write_report(const RunReport& report, const std::filesystem::path& dir);

/// Loads summary.json and the per-table CSV files written by write_report.
RunReport read_report(const std::filesystem::path& dir);

/// Pools reports of the same configuration run with different seeds.
/// Means are weighted by n; SE = sqrt(sum se_i^2 n_i^2) / sum n_i.
RunReport merge_reports(const std::vector<RunReport>& reports);

}  // namespace tagsep
