// Acceptance suite: one self-contained scenario per numbered criterion,
// printing a PASS/FAIL line each. Returns nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flagcheck/checks.hpp"
#include "flagcheck/generators.hpp"
#include "flagcheck/io.hpp"
#include "flagcheck/report.hpp"
#include "flagcheck/runner.hpp"
#include "flagcheck/search.hpp"
#include "flagcheck/state.hpp"

using namespace flagcheck;
using clock_type = std::chrono::steady_clock;

namespace {

struct Scenario {
  std::string label;
  double time_limit_s = 0.0;
  bool passed = true;
  std::vector<std::string> failures;
  double seconds = 0.0;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      passed = false;
      if (failures.size() < 8) failures.push_back(what);
    }
  }
  void require_le(double value, double bound, const std::string& what) {
    if (!(value <= bound)) {
      std::ostringstream msg;
      msg << what << " (" << value << " > " << bound << ")";
      require(false, msg.str());
    }
  }
};

std::vector<Scenario> g_results;

template <typename Fn>
void run_scenario(const std::string& label, double time_limit_s, Fn&& body) {
  Scenario s;
  s.label = label;
  s.time_limit_s = time_limit_s;
  const auto start = clock_type::now();
  try {
    body(s);
  } catch (const std::exception& e) {
    s.require(false, std::string("exception: ") + e.what());
  }
  s.seconds = std::chrono::duration<double>(clock_type::now() - start).count();
  if (time_limit_s > 0.0) {
    s.require_le(s.seconds, time_limit_s, "runtime budget exceeded");
  }
  std::printf("[%s] %s (%.1f s)\n", s.passed ? "PASS" : "FAIL", s.label.c_str(), s.seconds);
  for (const auto& f : s.failures) std::printf("       - %s\n", f.c_str());
  std::fflush(stdout);
  g_results.push_back(std::move(s));
}

double binomial_window_oracle(int n, double p, long k_lo, long k_hi) {
  // Independent of the library path: enumerate all 2^n outcome strings.
  double total = 0.0;
  for (long bits = 0; bits < (1L << n); ++bits) {
    const int k = __builtin_popcountl(static_cast<unsigned long>(bits));
    if (k < k_lo || k > k_hi) continue;
    total += std::pow(p, k) * std::pow(1.0 - p, n - k);
  }
  return total;
}

// ---------------------------------------------------------------------------

void criterion1(Scenario& s) {
  const long trials = 1000;
  for (const char* name : {"c_l1", "c_rel_ent"}) {
    const MeasureDescriptor& m = descriptor(name);
    long held = 0;
    for (long t = 0; t < trials; ++t) {
      RngStream rng = RngStream::derive(0xC1, {static_cast<std::uint64_t>(t),
                                               static_cast<std::uint64_t>(name[2])});
      CheckOptions opts;
      opts.tol = 1e-7;
      opts.seed = static_cast<std::uint64_t>(t);

      const Index d = 2 + static_cast<Index>(t % 3);
      const std::size_t n = 2 + rng.below(3);
      const Ensemble ens = random_ensemble(Theory::coherence, d, n, rng);
      const FlagBasis basis = random_flag_basis(Theory::coherence, n, rng);
      const CheckResult fa = check_flag_additivity(m, ens, basis, opts);

      const DensityMatrix rho = random_test_state(Theory::coherence, d, rng);
      const KrausChannel ch = random_incoherent_channel(d, 2 + rng.below(5), rng);
      const CheckResult mono = check_strong_mono(m, rho, ch, opts);

      const CheckResult conv = check_convexity(m, ens, opts);

      const bool ok = fa.verdict == Verdict::holds && std::abs(fa.residual) <= 1e-7 &&
                      mono.verdict == Verdict::holds && mono.residual >= -1e-7 &&
                      conv.verdict == Verdict::holds && conv.residual >= -1e-7;
      if (ok) {
        ++held;
      } else if (held == t) {
        std::ostringstream msg;
        msg << name << " trial " << t << ": fa=" << fa.residual << " mono=" << mono.residual
            << " conv=" << conv.residual;
        s.require(false, msg.str());
      }
    }
    s.require(held == trials, std::string(name) + ": not all instances passed");
  }
}

void criterion2(Scenario& s) {
  const MeasureDescriptor& m = descriptor("c_tr");

  SearchOptions sopts;
  sopts.property = Property::strong_mono;
  sopts.dim = 3;
  sopts.budget = 100000;
  sopts.seed = 11;
  const SearchOutcome found = search_violation(m, sopts);
  s.require(found.evaluations <= 100000 + 64, "search exceeded its evaluation budget");
  s.require_le(1e-3, found.best_violation, "strong-monotonicity violation below 1e-3");
  s.require(found.state.has_value() && found.channel.has_value(), "search witness incomplete");
  if (!found.state || !found.channel) return;

  CheckOptions opts;
  opts.tol = 1e-6;
  opts.seed = 11;
  const Ensemble outcomes = selective_apply(*found.channel, *found.state);
  const FlagBasis basis = computational_flag_basis(
      Theory::coherence, outcomes.size(), {static_cast<Index>(outcomes.size())});
  const auto [ens, sup] = bridge_mono_violation_to_flag(m, *found.state, *found.channel,
                                                        basis, opts);
  const CheckResult mono = check_strong_mono(m, *found.state, *found.channel, opts);
  const double v_mono = -mono.residual;
  const double v_sup = -sup.residual;
  s.require(sup.verdict == Verdict::violated, "bridge did not produce a flag_sup violation");
  // Magnitude preservation across the bridge. Measuring the flag first can
  // only enlarge the violation (the flagged channel is free), so the sound
  // two-sided statement pairs the one-sided bound with the round trip, which
  // is tight up to free padding.
  s.require(v_sup >= v_mono - 2e-6, "bridged violation lost magnitude beyond 2e-6");
  const MonoBridge back = bridge_flag_violation_to_mono(m, ens, basis, opts);
  const double v_round = -back.result.residual;
  s.require_le(std::abs(v_round - v_sup), 2e-6, "round-trip magnitude drifted beyond 2e-6");

  long held = 0;
  const long trials = 1000;
  for (long t = 0; t < trials; ++t) {
    RngStream rng = RngStream::derive(0xC2, {static_cast<std::uint64_t>(t)});
    CheckOptions copts;
    copts.tol = 1e-6;
    copts.seed = static_cast<std::uint64_t>(t);
    const std::size_t n = 2 + rng.below(3);
    const Ensemble e = random_ensemble(Theory::coherence, 3, n, rng);
    const FlagBasis b = random_flag_basis(Theory::coherence, n, rng);
    const CheckResult sub = check_flag_sub(m, e, b, copts);
    const CheckResult conv = check_convexity(m, e, copts);
    if (sub.verdict == Verdict::holds && conv.verdict == Verdict::holds) {
      ++held;
    } else if (held == t) {
      std::ostringstream msg;
      msg << "trial " << t << ": flag_sub " << verdict_name(sub.verdict) << " (" << sub.residual
          << "), convexity " << verdict_name(conv.verdict) << " (" << conv.residual << ")";
      s.require(false, msg.str());
    }
  }
  s.require(held == trials, "c_tr flag_sub/convexity sweep had failures");
}

void criterion3(Scenario& s) {
  const FlagBasis basis = computational_flag_basis(Theory::coherence, 2, {2});
  const long pairs = 500;
  for (long t = 0; t < pairs; ++t) {
    RngStream rng = RngStream::derive(0xC3, {static_cast<std::uint64_t>(t)});
    const DensityMatrix rho = random_density(2, 2, rng);
    const DensityMatrix sigma = random_density(2, 2, rng);
    const DensityMatrix w = omega(rho, sigma, basis);

    const double m_r = c_rel_ent(rho);
    const double m_s = c_rel_ent(sigma);
    const double m_w = c_rel_ent(w);
    const double m_rr = c_rel_ent(tensor(rho, rho));
    const double m_rs = c_rel_ent(tensor(rho, sigma));
    const double m_sr = c_rel_ent(tensor(sigma, rho));
    const double m_ss = c_rel_ent(tensor(sigma, sigma));
    const double m_ww = c_rel_ent(tensor(w, w));

    const double omega_mix = std::abs(m_w - 0.5 * m_r - 0.5 * m_s);
    const double expansion =
        std::abs(m_ww - (0.25 * m_rr + 0.25 * m_rs + 0.25 * m_sr + 0.25 * m_ss));
    const double identity = std::abs(m_rs - (4.0 * m_w - m_r - m_s));
    if (omega_mix > 1e-9 || expansion > 1e-9 || identity > 1e-8) {
      std::ostringstream msg;
      msg << "pair " << t << ": omega_mix=" << omega_mix << " expansion=" << expansion
          << " identity=" << identity;
      s.require(false, msg.str());
      return;
    }
  }

  const MeasureDescriptor& l1 = descriptor("c_l1");
  for (long t = 0; t < pairs; ++t) {
    RngStream rng = RngStream::derive(0xC3F, {static_cast<std::uint64_t>(t)});
    const DensityMatrix rho = random_resourceful_state(Theory::coherence, rng, 2);
    const DensityMatrix sigma = random_resourceful_state(Theory::coherence, rng, 2);
    CheckOptions opts;
    opts.tol = 1e-9;
    opts.seed = static_cast<std::uint64_t>(t);
    const CheckResult tc = check_two_copy(l1, rho, opts);
    if (tc.verdict != Verdict::violated) {
      s.require(false, "c_l1 two-copy additivity unexpectedly held on a coherent state");
      return;
    }
    const double lhs = 1.0 + c_l1(tensor(rho, sigma));
    const double rhs = (1.0 + c_l1(rho)) * (1.0 + c_l1(sigma));
    if (std::abs(lhs - rhs) > 1e-9) {
      s.require(false, "c_l1 multiplicativity identity failed");
      return;
    }
  }
}

void criterion4(Scenario& s) {
  const MeasureDescriptor& m = descriptor("negativity");
  const long trials = 500;
  for (long t = 0; t < trials; ++t) {
    RngStream rng = RngStream::derive(0xC4, {static_cast<std::uint64_t>(t)});
    CheckOptions opts;
    opts.tol = 1e-9;
    opts.seed = static_cast<std::uint64_t>(t);
    const std::size_t n = 2 + rng.below(3);
    const Ensemble ens = random_ensemble(Theory::entanglement, 4, n, rng);
    const FlagBasis basis = random_flag_basis(Theory::entanglement, n, rng);
    const CheckResult fa = check_flag_additivity(m, ens, basis, opts);
    if (fa.verdict != Verdict::holds || std::abs(fa.residual) > 1e-9) {
      std::ostringstream msg;
      msg << "trial " << t << ": residual " << fa.residual;
      s.require(false, msg.str());
      return;
    }
  }

  ComplexVector bell = ComplexVector::Zero(4);
  bell[0] = 1.0 / std::sqrt(2.0);
  bell[3] = 1.0 / std::sqrt(2.0);
  const DensityMatrix bell_state = PureState(bell, {2, 2}).projector();
  // Oracle route: the partial-transpose spectrum is {-1/2, 1/2, 1/2, 1/2}.
  const RealVector pt_spectrum = eigvalsh(partial_transpose(bell_state, 1));
  s.require_le(std::abs(pt_spectrum[0] - 0.5), 1e-12, "Bell PT spectrum (top)");
  s.require_le(std::abs(pt_spectrum[1] - 0.5), 1e-12, "Bell PT spectrum (second)");
  s.require_le(std::abs(pt_spectrum[2] - 0.5), 1e-12, "Bell PT spectrum (third)");
  s.require_le(std::abs(pt_spectrum[3] + 0.5), 1e-12, "Bell PT spectrum (bottom)");
  s.require_le(std::abs(negativity_cut(bell_state, 1) - 0.5), 1e-12, "Bell negativity");
}

void criterion5(Scenario& s) {
  // Per-copy constancy of the relative entropy of coherence.
  const MeasureDescriptor& rel = descriptor("c_rel_ent");
  for (long t = 0; t < 10; ++t) {
    RngStream rng = RngStream::derive(0xC5A, {static_cast<std::uint64_t>(t)});
    const DensityMatrix rho = random_density(2, 2, rng);
    CheckOptions opts;
    opts.seed = static_cast<std::uint64_t>(t);
    const RegularizationEstimate est = estimate_regularization(rel, rho, 5, opts);
    const double first = est.per_copy.front().second;
    for (const auto& [n, value] : est.per_copy) {
      (void)n;
      if (std::abs(value - first) > 1e-9) {
        s.require(false, "c_rel_ent per-copy sequence not constant at 1e-9");
        return;
      }
    }
  }

  // Typicality grid: exact reconstruction, oracle tail mass, and the
  // sandwich for both flag-additive coherence measures.
  RngStream rng = RngStream::derive(0xC5B, {7});
  const DensityMatrix r1 = random_density(2, 2, rng);
  const DensityMatrix r2 = random_density(2, 2, rng);
  const FlagBasis basis = computational_flag_basis(Theory::coherence, 2, {2});
  for (double p1 : {0.3, 0.5}) {
    const DensityMatrix base = flagged_state(Ensemble({p1, 1.0 - p1}, {r1, r2}), basis);
    for (int n = 2; n <= 6; ++n) {
      const DensityMatrix power = tensor_power(base, n);
      for (double delta : {0.0, 0.3, 0.5}) {
        const TypicalDecomposition dec = typical_decomposition(r1, r2, p1, basis, n, delta);

        const double oracle_eps = 1.0 - binomial_window_oracle(n, p1, dec.k_lo, dec.k_hi);
        if (std::abs(dec.epsilon - oracle_eps) > 1e-12) {
          s.require(false, "epsilon disagrees with the binomial-tail oracle");
          return;
        }
        if (dec.epsilon > 1e-12) {
          const ComplexMatrix atypical =
              (power.matrix() - (1.0 - dec.epsilon) * dec.rho_typ.matrix()) / dec.epsilon;
          if (hermiticity_defect(atypical) > 1e-12 ||
              std::abs(atypical.trace().real() - 1.0) > 1e-10 ||
              eigvalsh(atypical).minCoeff() < -1e-10) {
            s.require(false, "atypical complement is not a state");
            return;
          }
          const ComplexMatrix rebuilt =
              (1.0 - dec.epsilon) * dec.rho_typ.matrix() + dec.epsilon * atypical;
          if (max_abs_diff(rebuilt, power.matrix()) > 1e-12) {
            s.require(false, "typical reconstruction exceeded 1e-12 entrywise");
            return;
          }
        } else if (max_abs_diff(dec.rho_typ.matrix(), power.matrix()) > 1e-12) {
          s.require(false, "full-window rho_typ drifted from the tensor power");
          return;
        }

        for (const char* name : {"c_rel_ent", "c_l1"}) {
          const MeasureDescriptor& m = descriptor(name);
          CheckOptions opts;
          opts.tol = 1e-9;
          opts.seed = static_cast<std::uint64_t>(n);
          const CheckResult sandwich = check_sandwich(m, r1, r2, p1, basis, n, delta, opts);
          if (sandwich.verdict != Verdict::holds) {
            std::ostringstream msg;
            msg << name << " sandwich failed at p1=" << p1 << " N=" << n << " delta=" << delta
                << ": " << sandwich.note;
            s.require(false, msg.str());
            return;
          }
        }
      }
    }
  }
}

void criterion6(Scenario& s) {
  RunConfig config;
  config.master_seed = 2026;
  config.trials = 10;
  config.dims = {3};
  config.measures = {"c_l1", "c_tr"};
  config.properties = {"flag_additivity", "flag_sub", "convexity", "two_copy"};

  config.workers = 1;
  const std::string serial_bytes = report_to_json(run_check(config));
  config.workers = 4;
  const std::string parallel_bytes = report_to_json(run_check(config));
  s.require(serial_bytes == parallel_bytes, "reports differ across worker counts");

  // Regenerate from the echoed config alone.
  const auto echoed = nlohmann::json::parse(serial_bytes);
  RunConfig regen;
  regen.master_seed = echoed["config"]["master_seed"].get<std::uint64_t>();
  regen.trials = echoed["config"]["trials"].get<long>();
  regen.dims.clear();
  for (const auto& d : echoed["config"]["dims"]) regen.dims.push_back(d.get<Index>());
  regen.measures = echoed["config"]["measures"].get<std::vector<std::string>>();
  regen.properties = echoed["config"]["properties"].get<std::vector<std::string>>();
  regen.workers = 2;
  const std::string regenerated = report_to_json(run_check(regen));
  s.require(serial_bytes == regenerated, "regenerated report is not byte-identical");

  // Search reports regenerate identically too.
  RunConfig search_config;
  search_config.master_seed = 77;
  search_config.dims = {2};
  search_config.measures = {"c_l1"};
  search_config.properties = {"two_copy"};
  search_config.budget = 400;
  search_config.workers = 1;
  const std::string s1 = report_to_json(run_search(search_config));
  search_config.workers = 3;
  const std::string s2 = report_to_json(run_search(search_config));
  s.require(s1 == s2, "search reports differ across worker counts");
}

void criterion7(Scenario& s) {
  const long trials = 500;
  for (const auto& m : all_measures()) {
    const std::string name = measure_name(m.id);
    long bad = 0;
    std::string first_failure;
    for (long t = 0; t < trials; ++t) {
      RngStream rng = RngStream::derive(0xC7, {static_cast<std::uint64_t>(t),
                                               static_cast<std::uint64_t>(m.id)});
      CheckOptions opts;
      opts.tol = 1e-6;
      opts.seed = static_cast<std::uint64_t>(t);
      EvalContext ctx;
      ctx.solver_seed = opts.seed;

      // (M1) faithfulness: ~0 on free states, strictly positive off them.
      const std::vector<Index> dims =
          m.theory == Theory::entanglement ? std::vector<Index>{2, 2} : std::vector<Index>{3};
      const DensityMatrix free_state = random_free_state(m.theory, dims, rng);
      const DensityMatrix hot = random_resourceful_state(m.theory, rng, 3);
      const double on_free = evaluate(m, free_state, ctx).value;
      const double on_hot = evaluate(m, hot, ctx).value;
      bool ok = on_free <= 1e-6 && on_free >= -1e-9 && on_hot > 1e-6;

      // (M2) deterministic monotonicity under a free channel.
      const DensityMatrix rho =
          random_test_state(m.theory, m.theory == Theory::entanglement ? 4 : 3, rng);
      const KrausChannel ch = random_free_channel(m.theory, rho.dims(), 2 + rng.below(3), rng);
      const double before = evaluate(m, rho, ctx).value;
      const double after = evaluate(m, apply(ch, rho), ctx).value;
      ok = ok && after <= before + 1e-6;

      // Free padding, where the capability domain allows it.
      if (m.id != MeasureId::eof_2q) {
        const DensityMatrix delta =
            m.theory == Theory::coherence
                ? random_free_state(Theory::coherence, {2}, rng)
                : random_free_state(Theory::entanglement, {2, 2}, rng);
        const CheckResult pad = check_free_padding(m, rho, delta, opts);
        ok = ok && pad.verdict == Verdict::holds;
      }

      if (!ok && ++bad == 1) {
        std::ostringstream msg;
        msg << name << " trial " << t << ": free=" << on_free << " hot=" << on_hot
            << " before=" << before << " after=" << after;
        first_failure = msg.str();
      }
    }
    s.require(bad == 0, name + ": " + std::to_string(bad) + " failures; first: " + first_failure);
  }
}

}  // namespace

int main() {
  std::printf("flagcheck acceptance suite\n");
  run_scenario("criterion 1: Theorem 1 positive controls (c_l1, c_rel_ent)", 60.0, criterion1);
  run_scenario("criterion 2: c_tr violation search, bridges, and convex-side sweeps", 600.0,
               criterion2);
  run_scenario("criterion 3: omega identity chain and the c_l1 separation", 60.0, criterion3);
  run_scenario("criterion 4: negativity flag additivity and Bell value", 30.0, criterion4);
  run_scenario("criterion 5: regularization and typicality", 300.0, criterion5);
  run_scenario("criterion 6: byte-identical deterministic reports", 0.0, criterion6);
  run_scenario("criterion 7: measure axiom suite (M1, M2, free padding)", 120.0, criterion7);

  long failed = 0;
  for (const auto& s : g_results) {
    if (!s.passed) ++failed;
  }
  std::printf("%ld/%zu criteria passed\n", static_cast<long>(g_results.size()) - failed,
              g_results.size());
  return failed == 0 ? 0 : 1;
}
