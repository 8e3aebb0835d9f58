#include "tagsep/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tagsep/errors.hpp"

namespace tagsep {

bool RunReport::all_pass() const {
  for (const auto& [k, v] : verdicts)
    if (!v.pass) return false;
  return true;
}

void RunReport::add_estimate(const std::string& key, double value, double se, std::size_t n) {
  estimates[key] = Estimate{value, se, n, false};
}

void RunReport::add_exact(const std::string& key, double value) {
  estimates[key] = Estimate{value, 0.0, 0, true};
}

namespace {

void evaluate(Verdict& v, const Estimate& e) {
  const double tol = std::max(v.z_threshold * e.se, v.abs_floor);
  const double dev = std::abs(e.value - v.target);
  v.pass = std::isfinite(e.value) && (dev < tol || dev == 0.0);
  std::ostringstream os;
  os << "|" << format_number(e.value) << " - " << format_number(v.target)
     << "| = " << format_number(dev) << (v.pass ? " < " : " >= ") << format_number(tol);
  v.detail = os.str();
}

}  // namespace

void RunReport::add_tolerance_verdict(const std::string& key, const std::string& estimate,
                                      double target, double z_threshold, double abs_floor,
                                      const std::string& rule) {
  Verdict v;
  v.rule = rule;
  v.estimate = estimate;
  v.target = target;
  v.z_threshold = z_threshold;
  v.abs_floor = abs_floor;
  evaluate(v, estimates.at(estimate));
  verdicts[key] = std::move(v);
}

void RunReport::add_verdict(const std::string& key, bool pass, const std::string& rule,
                            const std::string& detail) {
  Verdict v;
  v.pass = pass;
  v.rule = rule;
  v.detail = detail;
  verdicts[key] = std::move(v);
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  // Prefer the shortest representation that round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char tmp[32];
    std::snprintf(tmp, sizeof tmp, "%.*g", prec, x);
    if (std::strtod(tmp, nullptr) == x) return tmp;
  }
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_row(std::ostringstream& os, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) os << ',';
    os << csv_field(row[i]);
  }
  os << '\n';
}

nlohmann::json estimate_json(const Estimate& e) {
  nlohmann::json j;
  j["value"] = e.value;
  if (e.exact) {
    j["exact"] = true;
  } else {
    j["se"] = e.se;
    j["n"] = e.n;
  }
  return j;
}

}  // namespace

std::string to_csv(const Table& table) {
  std::ostringstream os;
  write_row(os, table.header);
  for (const auto& row : table.rows) write_row(os, row);
  return os.str();
}

Table parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw std::runtime_error("parse_csv: unterminated quoted field");
  if (any) {
    row.push_back(std::move(field));
    records.push_back(std::move(row));
  }
  Table t;
  if (records.empty()) return t;
  t.header = std::move(records.front());
  t.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
  return t;
}

nlohmann::json to_json(const RunReport& report) {
  nlohmann::json j;
  j["experiment"] = report.experiment;
  j["seed"] = report.seed;
  j["config"] = report.config;
  j["estimates"] = nlohmann::json::object();
  for (const auto& [k, e] : report.estimates) j["estimates"][k] = estimate_json(e);
  j["targets"] = nlohmann::json::object();
  for (const auto& [k, v] : report.targets) j["targets"][k] = v;
  j["verdicts"] = nlohmann::json::object();
  for (const auto& [k, v] : report.verdicts) {
    nlohmann::json vj{{"pass", v.pass}, {"rule", v.rule}, {"detail", v.detail}};
    if (!v.estimate.empty()) {
      vj["estimate"] = v.estimate;
      vj["target"] = v.target;
      vj["z_threshold"] = v.z_threshold;
      vj["abs_floor"] = v.abs_floor;
    }
    j["verdicts"][k] = vj;
  }
  j["tables"] = nlohmann::json::object();
  for (const auto& [k, t] : report.tables)
    j["tables"][k] = {{"file", k + ".csv"}, {"rows", t.rows.size()}, {"header", t.header}};
  j["notes"] = report.notes;
  j["pass"] = report.all_pass();
  return j;
}

RunReport report_from_json(const nlohmann::json& j) {
  RunReport r;
  r.experiment = j.at("experiment").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config = j.at("config");
  for (const auto& [k, e] : j.at("estimates").items()) {
    Estimate est;
    est.value = e.at("value").get<double>();
    est.exact = e.value("exact", false);
    if (!est.exact) {
      est.se = e.at("se").get<double>();
      est.n = e.at("n").get<std::size_t>();
    }
    r.estimates[k] = est;
  }
  for (const auto& [k, v] : j.at("targets").items()) r.targets[k] = v.get<double>();
  for (const auto& [k, v] : j.at("verdicts").items()) {
    Verdict vd;
    vd.pass = v.at("pass").get<bool>();
    vd.rule = v.at("rule").get<std::string>();
    vd.detail = v.at("detail").get<std::string>();
    if (v.contains("estimate")) {
      vd.estimate = v.at("estimate").get<std::string>();
      vd.target = v.at("target").get<double>();
      vd.z_threshold = v.at("z_threshold").get<double>();
      vd.abs_floor = v.at("abs_floor").get<double>();
    }
    r.verdicts[k] = vd;
  }
  if (j.contains("tables"))
    for (const auto& [k, t] : j.at("tables").items())
      r.tables[k].header = t.at("header").get<std::vector<std::string>>();
  if (j.contains("notes")) r.notes = j.at("notes");
  return r;
}

void write_report(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
  };
  write(dir / "summary.json", to_json(report).dump(2) + "\n");
  for (const auto& [name, table] : report.tables) write(dir / (name + ".csv"), to_csv(table));
  nlohmann::json timing{{"wall_clock_seconds", report.wall_clock_seconds}};
  write(dir / "timing.json", timing.dump(2) + "\n");
}

RunReport read_report(const std::filesystem::path& dir) {
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  RunReport r = report_from_json(nlohmann::json::parse(slurp(dir / "summary.json")));
  for (auto& [name, table] : r.tables) {
    const auto path = dir / (name + ".csv");
    if (std::filesystem::exists(path)) table = parse_csv(slurp(path));
  }
  return r;
}

RunReport merge_reports(const std::vector<RunReport>& reports) {
  if (reports.empty()) throw ConfigError("merge_reports: empty report list");
  auto strip_seed = [](nlohmann::json c) {
    c.erase("seed");
    return c;
  };
  const auto& first = reports.front();
  for (const auto& r : reports)
    if (r.experiment != first.experiment || strip_seed(r.config) != strip_seed(first.config))
      throw ConfigError("merge_reports: configurations differ beyond the seed");

  RunReport out;
  out.experiment = first.experiment;
  out.seed = first.seed;
  out.config = first.config;
  out.targets = first.targets;
  out.notes = first.notes;
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& r : reports) seeds.push_back(r.seed);
  out.notes["merged_seeds"] = seeds;

  for (const auto& [key, e0] : first.estimates) {
    if (e0.exact) {
      out.estimates[key] = e0;
      continue;
    }
    double weighted = 0.0, var_num = 0.0;
    std::size_t total = 0;
    for (const auto& r : reports) {
      const Estimate& e = r.estimates.at(key);
      const double n = static_cast<double>(e.n);
      weighted += n * e.value;
      var_num += e.se * e.se * n * n;
      total += e.n;
    }
    const double nt = static_cast<double>(total);
    out.estimates[key] = Estimate{total ? weighted / nt : 0.0, total ? std::sqrt(var_num) / nt : 0.0,
                                  total, false};
  }
  for (const auto& [key, v0] : first.verdicts) {
    Verdict v = v0;
    if (!v.estimate.empty()) {
      evaluate(v, out.estimates.at(v.estimate));
    } else {
      v.pass = true;
      for (const auto& r : reports) v.pass = v.pass && r.verdicts.at(key).pass;
      v.detail = "conjunction of " + std::to_string(reports.size()) + " runs";
    }
    out.verdicts[key] = v;
  }
  for (const auto& [name, t0] : first.tables) {
    Table t;
    t.header = t0.header;
    for (const auto& r : reports) {
      const auto& rows = r.tables.at(name).rows;
      t.rows.insert(t.rows.end(), rows.begin(), rows.end());
    }
    out.tables[name] = std::move(t);
  }
  for (const auto& r : reports) out.wall_clock_seconds += r.wall_clock_seconds;
  return out;
}

}  // namespace tagsep
