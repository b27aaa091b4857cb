#include <doctest.h>

#include <cmath>

#include "flagcheck/errors.hpp"
#include "flagcheck/generators.hpp"
#include "flagcheck/report.hpp"
#include "flagcheck/runner.hpp"
#include "flagcheck/search.hpp"

using namespace flagcheck;

TEST_CASE("config text parsing mirrors the flags") {
  const std::string text =
      "# sweep configuration\n"
      "command = check\n"
      "measure = c_rel_ent,c_l1\n"
      "property = flag_additivity\n"
      "dim = 3,4\n"
      "trials = 7\n"
      "seed = 99\n"
      "tol = c_tr:1e-5,c_l1:1e-8\n"
      "budget = 1234\n"
      "nmax = 3\n"
      "format = csv\n";
  const RunConfig config = parse_config_text(text);
  CHECK(config.measures == std::vector<std::string>{"c_rel_ent", "c_l1"});
  CHECK(config.properties == std::vector<std::string>{"flag_additivity"});
  CHECK(config.dims == std::vector<Index>{3, 4});
  CHECK(config.trials == 7);
  CHECK(config.master_seed == 99);
  CHECK(config.tolerances.at("c_tr") == 1e-5);
  CHECK(config.tolerances.at("c_l1") == 1e-8);
  CHECK(config.budget == 1234);
  CHECK(config.nmax == 3);
  CHECK(config.format == "csv");
  CHECK_THROWS_AS(parse_config_text("bogus line without equals\n"), ArgumentError);
  CHECK_THROWS_AS(parse_config_text("unknown_key = 3\n"), ArgumentError);
}

TEST_CASE("check sweep produces per-cell counts and exit code zero") {
  RunConfig config;
  config.master_seed = 5;
  config.trials = 4;
  config.dims = {3};
  config.measures = {"c_rel_ent"};
  config.properties = {"flag_additivity", "convexity"};
  config.workers = 1;
  const Report report = run_check(config);
  CHECK(report.records.size() == 8);
  const auto summaries = report.summaries();
  CHECK(summaries.at("c_rel_ent").at("flag_additivity").holds == 4);
  CHECK(summaries.at("c_rel_ent").at("convexity").holds == 4);
  CHECK(exit_code_for(report) == 0);
}

TEST_CASE("reports are byte-identical across runs and worker counts") {
  RunConfig config;
  config.master_seed = 17;
  config.trials = 6;
  config.dims = {3};
  config.measures = {"c_l1", "c_tr"};
  config.properties = {"flag_sub", "convexity", "two_copy"};
  config.workers = 1;
  const std::string serial = report_to_json(run_check(config));
  config.workers = 3;
  const std::string parallel = report_to_json(run_check(config));
  CHECK(serial == parallel);
  const std::string again = report_to_json(run_check(config));
  CHECK(serial == again);
}

TEST_CASE("violated records embed a standalone-replayable witness") {
  RunConfig config;
  config.master_seed = 23;
  config.trials = 3;
  config.dims = {2};
  config.measures = {"c_l1"};
  config.properties = {"two_copy"};
  config.workers = 1;
  const Report report = run_check(config);
  long replayed = 0;
  for (const auto& rec : report.records) {
    REQUIRE(rec.check.verdict == Verdict::violated);  // coherent qubits violate two_copy
    REQUIRE_FALSE(rec.witness.empty());
    const Witness w = witness_from_string(rec.witness);
    CheckOptions opts;
    opts.tol = rec.check.tol;
    opts.seed = rec.check.seed;
    const CheckResult replay = replay_check(w, opts);
    CHECK(replay.residual == doctest::Approx(rec.check.residual).epsilon(1e-12));
    ++replayed;
  }
  CHECK(replayed == 3);
  // two_copy violations are outside the flag-additivity implications.
  CHECK(exit_code_for(report) == 0);
}

TEST_CASE("exit code policy flags unexpected violations only") {
  Report report;
  ReportRecord rec;
  rec.check.measure_id = "c_l1";
  rec.check.property = Property::two_copy;
  rec.check.verdict = Verdict::violated;
  report.records.push_back(rec);
  CHECK(exit_code_for(report) == 0);  // expected: additivity is not implied

  rec.check.property = Property::flag_additivity;
  report.records.push_back(rec);
  CHECK(exit_code_for(report) == 2);  // flag-additive measure must not violate this

  Report expected_violation;
  rec.check.measure_id = "c_tr";
  rec.check.property = Property::flag_sup;
  expected_violation.records.push_back(rec);
  CHECK(exit_code_for(expected_violation) == 0);
}

TEST_CASE("search command emits a replayable witness section") {
  RunConfig config;
  config.master_seed = 1;
  config.trials = 1;
  config.dims = {2};
  config.measures = {"c_l1"};
  config.properties = {"two_copy"};
  config.budget = 400;
  config.workers = 1;
  const Report report = run_search(config);
  REQUIRE(report.search.has_value());
  CHECK(report.search->best_violation > 1e-3);
  REQUIRE_FALSE(report.search->witness.empty());
  REQUIRE(report.records.size() == 1);
  CHECK(report.records.front().check.verdict == Verdict::violated);

  const Witness w = witness_from_string(report.search->witness);
  CheckOptions opts;
  opts.tol = 1e-9;
  CHECK(std::abs(replay_violation(w, opts) - report.search->best_violation) <= 1e-9);
}

TEST_CASE("regularize command tabulates per-copy rates") {
  RunConfig config;
  config.master_seed = 3;
  config.trials = 2;
  config.dims = {2};
  config.measures = {"c_rel_ent"};
  config.nmax = 3;
  config.workers = 1;
  const Report report = run_regularize(config);
  REQUIRE(report.regularization.size() == 2);
  for (const auto& row : report.regularization) {
    REQUIRE(row.per_copy.size() == 3);
    CHECK(row.trend == "constant");
    const double first = row.per_copy.front().second;
    for (const auto& [n, value] : row.per_copy) {
      (void)n;
      CHECK(std::abs(value - first) <= 1e-9);
    }
  }
  for (const auto& rec : report.records) {
    CHECK(rec.check.verdict == Verdict::holds);
  }
}

TEST_CASE("config validation catches usage errors") {
  RunConfig config;
  config.measures = {};
  config.properties = {"flag_additivity"};
  CHECK_THROWS_AS(run_check(config), ArgumentError);
  config.measures = {"c_l1"};
  config.properties = {};
  CHECK_THROWS_AS(run_check(config), ArgumentError);
  config.properties = {"flag_additivity"};
  config.measures = {"not_a_measure"};
  CHECK_THROWS_AS(run_check(config), ArgumentError);
  config.measures = {"c_l1", "c_tr"};
  CHECK_THROWS_AS(run_search(config), ArgumentError);  // search wants one measure
}

TEST_CASE("csv report has one row per record") {
  RunConfig config;
  config.master_seed = 7;
  config.trials = 2;
  config.dims = {3};
  config.measures = {"c_l1"};
  config.properties = {"convexity"};
  config.format = "csv";
  config.workers = 1;
  const Report report = run_check(config);
  const std::string csv = report_to_csv(report);
  const long rows = std::count(csv.begin(), csv.end(), '\n');
  CHECK(rows == 3);  // header + 2 records
  CHECK(csv.rfind("measure,property,lhs,rhs,residual,tol,verdict", 0) == 0);
}

TEST_CASE("witness serialization round-trips every instance kind") {
  RngStream rng(11);
  // strong_mono: state + channel
  Witness mono;
  mono.measure = "c_l1";
  mono.property = Property::strong_mono;
  mono.state = random_density(3, 3, rng);
  mono.channel = random_incoherent_channel(3, 2, rng);
  const Witness mono2 = witness_from_string(witness_to_string(mono));
  CHECK(mono2.measure == "c_l1");
  CHECK(max_abs_diff(mono2.state->matrix(), mono.state->matrix()) == 0.0);
  CHECK(mono2.channel->size() == 2);

  // ensemble property with basis
  Witness sup;
  sup.measure = "c_rel_ent";
  sup.property = Property::flag_sup;
  sup.ensemble = random_ensemble(Theory::coherence, 3, 3, rng);
  sup.basis = random_flag_basis(Theory::coherence, 3, rng);
  const Witness sup2 = witness_from_string(witness_to_string(sup));
  REQUIRE(sup2.ensemble.has_value());
  REQUIRE(sup2.basis.has_value());
  CHECK(sup2.ensemble->size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(sup2.ensemble->weights[i] == sup.ensemble->weights[i]);
    CHECK(max_abs_diff(sup2.basis->vectors()[i].amplitudes().asDiagonal().toDenseMatrix(),
                       sup.basis->vectors()[i].amplitudes().asDiagonal().toDenseMatrix()) == 0.0);
  }

  // sandwich carries the scalar parameters
  Witness sw;
  sw.measure = "c_rel_ent";
  sw.property = Property::sandwich;
  sw.state = random_density(2, 2, rng);
  sw.state2 = random_density(2, 2, rng);
  sw.basis = computational_flag_basis(Theory::coherence, 2, {2});
  sw.n_copies = 3;
  sw.p1 = 0.3;
  sw.delta_typ = 0.5;
  const Witness sw2 = witness_from_string(witness_to_string(sw));
  CHECK(sw2.n_copies == 3);
  CHECK(sw2.p1 == 0.3);
  CHECK(sw2.delta_typ == 0.5);
  REQUIRE(sw2.state2.has_value());
}
