#include "flagcheck/runner.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include "flagcheck/errors.hpp"
#include "flagcheck/generators.hpp"
#include "flagcheck/io.hpp"
#include "flagcheck/parallel.hpp"

namespace flagcheck {

namespace {

std::size_t effective_workers(const RunConfig& config) {
  return config.workers > 0 ? config.workers : default_worker_count();
}

double tolerance_for(const RunConfig& config, const MeasureDescriptor& desc) {
  const auto by_name = config.tolerances.find(measure_name(desc.id));
  if (by_name != config.tolerances.end()) return by_name->second;
  const auto star = config.tolerances.find("*");
  if (star != config.tolerances.end()) return star->second;
  return default_tolerance(desc);
}

void validate_common(const RunConfig& config) {
  if (config.trials < 1) throw ArgumentError("trials must be >= 1");
  if (config.measures.empty()) throw ArgumentError("at least one --measure is required");
  for (const auto& name : config.measures) descriptor(name);  // throws on unknown ids
  for (const auto& name : config.properties) property_from_name(name);
  if (config.dims.empty()) throw ArgumentError("at least one --dim is required");
  for (Index d : config.dims) {
    if (d < 2 || d > dimension_cap()) throw ArgumentError("dim out of range");
  }
  if (config.format != "json" && config.format != "csv") {
    throw ArgumentError("format must be json or csv");
  }
}

// One sweep instance: the property decides what gets generated. All draws
// come from a stream keyed by (seed, measure, property, trial), so reports
// are identical at any worker count. The instance is built as a witness and
// run through the replay path, so violated records embed exactly what a
// standalone replay consumes.
ReportRecord run_instance(const MeasureDescriptor& desc, Property prop, const RunConfig& config,
                          std::size_t measure_idx, std::size_t property_idx, long trial) {
  RngStream rng = RngStream::derive(
      config.master_seed,
      {0xc0de + measure_idx, static_cast<std::uint64_t>(property_idx),
       static_cast<std::uint64_t>(trial)});
  CheckOptions opts;
  opts.tol = tolerance_for(config, desc);
  opts.seed = mix_words(config.master_seed,
                        mix_words(measure_idx * 131 + property_idx, static_cast<std::uint64_t>(trial)));
  const Index d = config.dims[static_cast<std::size_t>(trial) % config.dims.size()];
  const Index d_state = desc.theory == Theory::entanglement ? 4 : d;

  Witness w;
  w.measure = measure_name(desc.id);
  w.property = prop;
  switch (prop) {
    case Property::flag_additivity:
    case Property::flag_sup:
    case Property::flag_sub: {
      const std::size_t n = 2 + rng.below(3);
      w.ensemble = random_ensemble(desc.theory, d_state, n, rng);
      w.basis = random_flag_basis(desc.theory, n, rng);
      break;
    }
    case Property::convexity: {
      const std::size_t n = 2 + rng.below(3);
      w.ensemble = random_ensemble(desc.theory, d_state, n, rng);
      break;
    }
    case Property::strong_mono: {
      w.state = random_test_state(desc.theory, d_state, rng);
      w.channel = random_free_channel(desc.theory, w.state->dims(), 2 + rng.below(5), rng);
      break;
    }
    case Property::two_copy:
      w.state = random_test_state(desc.theory, d_state, rng);
      break;
    case Property::n_copy:
      w.state = random_test_state(desc.theory, d_state, rng);
      w.n_copies = 2 + static_cast<int>(
                           rng.below(static_cast<std::uint64_t>(std::max(1, config.nmax - 1))));
      break;
    case Property::full_additivity:
    case Property::omega_identity:
      w.state = random_test_state(desc.theory, d_state, rng);
      w.state2 = random_test_state(desc.theory, d_state, rng);
      break;
    case Property::free_padding: {
      w.state = random_test_state(desc.theory, d_state, rng);
      const Index pad = static_cast<Index>(2 + rng.below(2));
      w.state2 = desc.theory == Theory::coherence
                     ? random_free_state(Theory::coherence, {pad}, rng)
                     : random_free_state(Theory::entanglement, {2, pad}, rng);
      break;
    }
    case Property::sandwich: {
      const Index d_small = desc.theory == Theory::entanglement ? 4 : 2;
      w.state = random_test_state(desc.theory, d_small, rng);
      w.state2 = random_test_state(desc.theory, d_small, rng);
      w.p1 = 0.25 + 0.25 * rng.uniform();
      w.basis = random_flag_basis(desc.theory, 2, rng);
      w.n_copies = 2 + static_cast<int>(rng.below(2));
      w.delta_typ = 0.3;
      break;
    }
  }

  ReportRecord rec;
  rec.check = replay_check(w, opts);
  if (rec.check.verdict == Verdict::violated) rec.witness = witness_to_string(w);
  return rec;
}

bool flag_additivity_implies(Property prop) {
  switch (prop) {
    case Property::flag_additivity:
    case Property::flag_sup:
    case Property::flag_sub:
    case Property::strong_mono:
    case Property::convexity:
    case Property::free_padding:
    case Property::omega_identity:
    case Property::sandwich:
      return true;
    // Tensor-product additivity is not implied by flag additivity; c_l1 is
    // the standing counterexample.
    case Property::two_copy:
    case Property::n_copy:
    case Property::full_additivity:
      return false;
  }
  return false;
}

}  // namespace

Report run_check(const RunConfig& config) {
  validate_common(config);
  Report report;
  report.config = config;
  report.config.command = "check";

  if (!config.witness_path.empty()) {
    // Replay a serialized witness instead of sweeping random instances.
    std::ifstream in(config.witness_path);
    if (!in) throw ArgumentError("cannot open witness file " + config.witness_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const Witness w = witness_from_string(buf.str());
    const MeasureDescriptor& desc = descriptor(w.measure);
    CheckOptions opts;
    opts.tol = tolerance_for(config, desc);
    opts.seed = config.master_seed;
    ReportRecord rec;
    rec.check = replay_check(w, opts);
    rec.witness = witness_to_string(w);
    report.records.push_back(std::move(rec));
    return report;
  }

  if (config.properties.empty()) throw ArgumentError("at least one --property is required");

  struct Task {
    std::size_t measure_idx, property_idx;
    long trial;
  };
  std::vector<Task> tasks;
  for (std::size_t mi = 0; mi < config.measures.size(); ++mi) {
    for (std::size_t pi = 0; pi < config.properties.size(); ++pi) {
      for (long t = 0; t < config.trials; ++t) tasks.push_back({mi, pi, t});
    }
  }
  std::vector<ReportRecord> records(tasks.size());
  parallel_for(tasks.size(), effective_workers(config), [&](std::size_t i) {
    const Task& task = tasks[i];
    const MeasureDescriptor& desc = descriptor(config.measures[task.measure_idx]);
    const Property prop = property_from_name(config.properties[task.property_idx]);
    records[i] = run_instance(desc, prop, config, task.measure_idx, task.property_idx, task.trial);
  });
  report.records = std::move(records);
  return report;
}

Report run_search(const RunConfig& config) {
  validate_common(config);
  if (config.measures.size() != 1 || config.properties.size() != 1) {
    throw ArgumentError("search needs exactly one --measure and one --property");
  }
  const MeasureDescriptor& desc = descriptor(config.measures.front());
  SearchOptions sopts;
  sopts.property = property_from_name(config.properties.front());
  sopts.dim = config.dims.front();
  sopts.budget = config.budget;
  sopts.seed = config.master_seed;
  sopts.workers = effective_workers(config);

  const SearchOutcome outcome = search_violation(desc, sopts);

  Report report;
  report.config = config;
  report.config.command = "search";
  SearchSection section;
  section.measure = measure_name(desc.id);
  section.property = property_name(sopts.property);
  section.best_violation = outcome.best_violation;
  section.evaluations = outcome.evaluations;
  section.seed = outcome.seed;
  section.witness = outcome.instance_text;
  report.search = std::move(section);

  if (!outcome.instance_text.empty()) {
    CheckOptions opts;
    opts.tol = tolerance_for(config, desc);
    opts.seed = config.master_seed;
    ReportRecord rec;
    rec.check = replay_check(outcome.witness(desc, sopts.property), opts);
    rec.witness = outcome.instance_text;
    report.records.push_back(std::move(rec));
  }
  return report;
}

Report run_regularize(const RunConfig& config) {
  validate_common(config);
  if (config.nmax < 1) throw ArgumentError("nmax must be >= 1");
  Report report;
  report.config = config;
  report.config.command = "regularize";

  const bool with_sandwich =
      std::find(config.properties.begin(), config.properties.end(), "sandwich") !=
      config.properties.end();

  struct Slot {
    RegularizationRow row;
    std::vector<ReportRecord> records;
  };
  std::vector<Slot> slots(config.measures.size() * static_cast<std::size_t>(config.trials));
  std::vector<std::pair<std::size_t, long>> tasks;
  for (std::size_t mi = 0; mi < config.measures.size(); ++mi) {
    for (long t = 0; t < config.trials; ++t) tasks.emplace_back(mi, t);
  }
  parallel_for(tasks.size(), effective_workers(config), [&](std::size_t i) {
    const auto [mi, trial] = tasks[i];
    const MeasureDescriptor& desc = descriptor(config.measures[mi]);
    RngStream rng = RngStream::derive(config.master_seed,
                                      {0x4e99, mi, static_cast<std::uint64_t>(trial)});
    CheckOptions opts;
    opts.tol = tolerance_for(config, desc);
    opts.seed = mix_words(config.master_seed, mix_words(mi, static_cast<std::uint64_t>(trial)));

    const Index d = desc.theory == Theory::entanglement ? 4 : 2;
    const DensityMatrix rho = random_test_state(desc.theory, d, rng);
    const RegularizationEstimate est = estimate_regularization(desc, rho, config.nmax, opts);

    Slot slot;
    slot.row.measure = measure_name(desc.id);
    slot.row.trial = trial;
    slot.row.state_digest = digest(rho);
    slot.row.per_copy = est.per_copy;
    switch (est.trend) {
      case Trend::constant: slot.row.trend = "constant"; break;
      case Trend::increasing: slot.row.trend = "increasing"; break;
      case Trend::decreasing: slot.row.trend = "decreasing"; break;
      case Trend::mixed: slot.row.trend = "mixed"; break;
    }
    for (int n = 2; n <= config.nmax; ++n) {
      ReportRecord rec;
      rec.check = check_n_copy(desc, rho, n, opts);
      slot.records.push_back(std::move(rec));
    }
    if (with_sandwich) {
      const DensityMatrix rho2 = random_test_state(desc.theory, d, rng);
      const double p1 = (trial % 2 == 0) ? 0.5 : 0.3;
      const FlagBasis basis = random_flag_basis(desc.theory, 2, rng);
      ReportRecord rec;
      rec.check = check_sandwich(desc, rho, rho2, p1, basis, std::min(config.nmax, 4), 0.3, opts);
      slot.records.push_back(std::move(rec));
    }
    slots[i] = std::move(slot);
  });

  for (auto& slot : slots) {
    report.regularization.push_back(std::move(slot.row));
    for (auto& rec : slot.records) report.records.push_back(std::move(rec));
  }
  return report;
}

int exit_code_for(const Report& report) {
  for (const auto& rec : report.records) {
    if (rec.check.verdict != Verdict::violated) continue;
    const MeasureDescriptor& desc = descriptor(rec.check.measure_id);
    if (desc.known_flag_additive && flag_additivity_implies(rec.check.property)) {
      return 2;
    }
  }
  return 0;
}

std::string emit_report(const Report& report, std::ostream& fallback) {
  const std::string bytes =
      report.config.format == "csv" ? report_to_csv(report) : report_to_json(report);
  if (report.config.output_path.empty()) {
    fallback << bytes;
  } else {
    std::ofstream out(report.config.output_path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write report to " + report.config.output_path);
    out << bytes;
  }
  return bytes;
}

}  // namespace flagcheck
