// Experiment runner: one subcommand per experiment, plus `merge`.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tagsep/errors.hpp"
#include "tagsep/experiments.hpp"
#include "tagsep/report.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tagsep::ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw tagsep::ConfigError(path + ": " + e.what());
  }
}

std::uint64_t parse_seed(const std::string& text, const std::string& origin) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used, 10);
    if (used != text.size() || text.front() == '-') throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw tagsep::ConfigError(origin + ": seed must be a nonnegative integer, got '" + text + "'");
  }
}

struct Overrides {
  std::string config_path;
  std::optional<std::string> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<double> horizon;
  std::optional<std::size_t> replicas;
  std::optional<std::size_t> cycles;
  bool snapshots = false;
};

tagsep::ExperimentConfig build_config(const std::string& experiment, const Overrides& o) {
  tagsep::ExperimentConfig c;
  if (!o.config_path.empty()) c = tagsep::config_from_json(load_json(o.config_path));
  c.experiment = experiment;
  if (const char* env = std::getenv("TAGSEP_SEED"); env && *env) c.seed = parse_seed(env, "TAGSEP_SEED");
  if (o.seed) c.seed = parse_seed(*o.seed, "--seed");
  if (o.out) c.output_dir = *o.out;
  if (o.threads) c.threads = *o.threads;
  if (o.horizon) c.horizon = *o.horizon;
  if (o.replicas) c.replicas = *o.replicas;
  if (o.cycles) c.cycles = *o.cycles;
  if (o.snapshots) c.exchangeability.emit_snapshots = true;
  return c;
}

void print_verdicts(const tagsep::RunReport& rep) {
  for (const auto& [key, v] : rep.verdicts)
    std::cout << (v.pass ? "PASS " : "FAIL ") << key << "  " << v.detail << "\n";
  std::cout << (rep.all_pass() ? "overall: PASS" : "overall: FAIL") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven tagged particle in SSEP with removal: experiment runner"};
  app.require_subcommand(1);

  Overrides o;
  std::string selected;
  for (const auto& name : tagsep::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "seed (overrides config and TAGSEP_SEED)");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--threads", o.threads, "worker threads, 0 = all cores");
    sub->add_option("--horizon", o.horizon, "time horizon");
    sub->add_option("--replicas", o.replicas, "number of replicas");
    sub->add_option("--cycles", o.cycles, "number of regeneration cycles");
    if (name == "exchangeability")
      sub->add_flag("--snapshots", o.snapshots, "emit per-replica cup snapshots");
    sub->callback([&selected, name] { selected = name; });
  }

  std::vector<std::string> inputs;
  std::string merge_out = "merged";
  auto* merge = app.add_subcommand("merge", "pool runs that differ only in seed");
  merge->add_option("inputs", inputs, "run directories (tables included) or summary.json files")->required();
  merge->add_option("--out", merge_out, "output directory");
  merge->callback([&selected] { selected = "merge"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    tagsep::RunReport rep;
    std::string out_dir;
    if (selected == "merge") {
      std::vector<tagsep::RunReport> reports;
      for (const auto& in : inputs) {
        const std::filesystem::path p(in);
        if (std::filesystem::is_directory(p))
          reports.push_back(tagsep::read_report(p));
        else
          reports.push_back(tagsep::report_from_json(load_json(p.string())));
      }
      rep = tagsep::merge_reports(reports);
      out_dir = merge_out;
    } else {
      const auto config = build_config(selected, o);
      rep = tagsep::run(config);
      out_dir = config.output_dir;
    }
    tagsep::write_report(rep, out_dir);
    print_verdicts(rep);
    std::cout << "wrote " << out_dir << "\n";
    return rep.all_pass() ? kPass : kFail;
  } catch (const tagsep::RegimeError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kUsage;
  } catch (const tagsep::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const tagsep::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
