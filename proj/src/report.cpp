#include "flagcheck/report.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

#include "flagcheck/errors.hpp"

namespace flagcheck {

using ordered_json = nlohmann::ordered_json;

std::map<std::string, std::map<std::string, SummaryCell>> Report::summaries() const {
  std::map<std::string, std::map<std::string, SummaryCell>> out;
  for (const auto& rec : records) {
    SummaryCell& cell = out[rec.check.measure_id][property_name(rec.check.property)];
    switch (rec.check.verdict) {
      case Verdict::holds: ++cell.holds; break;
      case Verdict::violated: ++cell.violated; break;
      case Verdict::inconclusive: ++cell.inconclusive; break;
    }
  }
  return out;
}

namespace {

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["command"] = c.command;
  j["master_seed"] = c.master_seed;
  j["trials"] = c.trials;
  ordered_json dims = ordered_json::array();
  for (Index d : c.dims) dims.push_back(d);
  j["dims"] = std::move(dims);
  j["measures"] = c.measures;
  j["properties"] = c.properties;
  ordered_json tols = ordered_json::object();
  for (const auto& [k, v] : c.tolerances) tols[k] = v;
  j["tolerances"] = std::move(tols);
  j["budget"] = c.budget;
  j["nmax"] = c.nmax;
  j["format"] = c.format;
  if (!c.witness_path.empty()) j["witness"] = c.witness_path;
  return j;
}

ordered_json record_json(const ReportRecord& rec) {
  const CheckResult& r = rec.check;
  ordered_json j;
  j["measure"] = r.measure_id;
  j["property"] = property_name(r.property);
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["residual"] = r.residual;
  j["tol"] = r.tol;
  j["verdict"] = verdict_name(r.verdict);
  j["instance_digest"] = r.instance_digest;
  j["seed"] = r.seed;
  if (!r.note.empty()) j["note"] = r.note;
  if (!rec.witness.empty()) j["witness"] = rec.witness;
  return j;
}

}  // namespace

std::string report_to_json(const Report& report) {
  ordered_json j;
  j["schema_version"] = report.schema_version;
  j["config"] = config_json(report.config);
  ordered_json results = ordered_json::array();
  for (const auto& rec : report.records) results.push_back(record_json(rec));
  j["results"] = std::move(results);

  ordered_json summaries = ordered_json::object();
  for (const auto& [measure, by_property] : report.summaries()) {
    ordered_json m = ordered_json::object();
    for (const auto& [prop, cell] : by_property) {
      m[prop] = {{"holds", cell.holds},
                 {"violated", cell.violated},
                 {"inconclusive", cell.inconclusive}};
    }
    summaries[measure] = std::move(m);
  }
  j["summaries"] = std::move(summaries);

  if (report.search) {
    const SearchSection& s = *report.search;
    j["search"] = {{"measure", s.measure},
                   {"property", s.property},
                   {"best_violation", s.best_violation},
                   {"evaluations", s.evaluations},
                   {"seed", s.seed},
                   {"witness", s.witness}};
  }
  if (!report.regularization.empty()) {
    ordered_json rows = ordered_json::array();
    for (const auto& row : report.regularization) {
      ordered_json entries = ordered_json::array();
      for (const auto& [n, value] : row.per_copy) entries.push_back({{"N", n}, {"value", value}});
      rows.push_back({{"measure", row.measure},
                      {"trial", row.trial},
                      {"state_digest", row.state_digest},
                      {"per_copy", std::move(entries)},
                      {"trend", row.trend}});
    }
    j["regularization"] = std::move(rows);
  }
  j["wall_ms"] = 0;
  return j.dump(2) + "\n";
}

std::string report_to_csv(const Report& report) {
  std::ostringstream ss;
  ss << "measure,property,lhs,rhs,residual,tol,verdict,instance_digest,seed,note\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& rec : report.records) {
    const CheckResult& r = rec.check;
    std::string note = r.note;
    for (auto& c : note) {
      if (c == ',' || c == '\n') c = ';';
    }
    ss << r.measure_id << ',' << property_name(r.property) << ',' << num(r.lhs) << ','
       << num(r.rhs) << ',' << num(r.residual) << ',' << num(r.tol) << ','
       << verdict_name(r.verdict) << ',' << r.instance_digest << ',' << r.seed << ',' << note
       << '\n';
  }
  return ss.str();
}

RunConfig parse_config_text(const std::string& text, RunConfig base) {
  std::istringstream is(text);
  std::string line;
  long lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (eq == std::string::npos) {
      throw ArgumentError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "command") {
        base.command = value;
      } else if (key == "seed") {
        base.master_seed = std::stoull(value);
      } else if (key == "trials") {
        base.trials = std::stol(value);
      } else if (key == "dim") {
        base.dims.clear();
        std::istringstream vs(value);
        std::string part;
        while (std::getline(vs, part, ',')) base.dims.push_back(std::stol(part));
      } else if (key == "measure") {
        base.measures.clear();
        std::istringstream vs(value);
        std::string part;
        while (std::getline(vs, part, ',')) base.measures.push_back(part);
      } else if (key == "property") {
        base.properties.clear();
        std::istringstream vs(value);
        std::string part;
        while (std::getline(vs, part, ',')) base.properties.push_back(part);
      } else if (key == "tol") {
        // either a bare number (all measures) or measure:value pairs
        if (value.find(':') == std::string::npos) {
          base.tolerances.clear();
          base.tolerances["*"] = std::stod(value);
        } else {
          std::istringstream vs(value);
          std::string part;
          while (std::getline(vs, part, ',')) {
            const auto colon = part.find(':');
            base.tolerances[part.substr(0, colon)] = std::stod(part.substr(colon + 1));
          }
        }
      } else if (key == "budget") {
        base.budget = std::stol(value);
      } else if (key == "nmax") {
        base.nmax = std::stoi(value);
      } else if (key == "out") {
        base.output_path = value;
      } else if (key == "format") {
        base.format = value;
      } else if (key == "witness") {
        base.witness_path = value;
      } else {
        throw ArgumentError("config line " + std::to_string(lineno) + ": unknown key " + key);
      }
    } catch (const ArgumentError&) {
      throw;
    } catch (const std::exception&) {
      throw ArgumentError("config line " + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  return base;
}

}  // namespace flagcheck
