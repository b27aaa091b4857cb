#include "flagcheck/checks.hpp"

#include <algorithm>
#include <mutex>
#include <cmath>
#include <sstream>

#include "flagcheck/errors.hpp"
#include "flagcheck/generators.hpp"
#include "flagcheck/io.hpp"
#include "flagcheck/parallel.hpp"
#include "flagcheck/search.hpp"

namespace flagcheck {

std::string property_name(Property p) {
  switch (p) {
    case Property::flag_additivity: return "flag_additivity";
    case Property::flag_sup: return "flag_sup";
    case Property::flag_sub: return "flag_sub";
    case Property::strong_mono: return "strong_mono";
    case Property::convexity: return "convexity";
    case Property::two_copy: return "two_copy";
    case Property::n_copy: return "n_copy";
    case Property::full_additivity: return "full_additivity";
    case Property::omega_identity: return "omega_identity";
    case Property::sandwich: return "sandwich";
    case Property::free_padding: return "free_padding";
  }
  throw ArgumentError("unknown property");
}

Property property_from_name(const std::string& name) {
  static const std::vector<Property> all = {
      Property::flag_additivity, Property::flag_sup,       Property::flag_sub,
      Property::strong_mono,     Property::convexity,      Property::two_copy,
      Property::n_copy,          Property::full_additivity, Property::omega_identity,
      Property::sandwich,        Property::free_padding};
  for (Property p : all) {
    if (property_name(p) == name) return p;
  }
  throw ArgumentError("unknown property: " + name);
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
  }
  throw ArgumentError("unknown verdict");
}

double default_tolerance(const MeasureDescriptor& desc) {
  return desc.id == MeasureId::c_tr ? 1e-6 : 1e-9;
}

namespace {

EvalContext context_of(const CheckOptions& opts) {
  EvalContext ctx;
  ctx.cut = opts.cut;
  ctx.solver = opts.solver;
  ctx.solver_seed = opts.seed;
  return ctx;
}

// A state together with its B-side subsystems (for entanglement measures;
// empty for coherence). Tensoring tracks the mask so products of bipartite
// factors are cut correctly.
struct Part {
  DensityMatrix state;
  std::vector<std::size_t> b_side;
};

Part make_part(const MeasureDescriptor& desc, const DensityMatrix& st, std::size_t cut) {
  Part p{st, {}};
  if (desc.theory == Theory::entanglement) {
    for (std::size_t s = cut; s < st.subsystems(); ++s) p.b_side.push_back(s);
  }
  return p;
}

Part tensor_parts(const Part& x, const Part& y) {
  Part out{tensor(x.state, y.state), x.b_side};
  const std::size_t offset = x.state.subsystems();
  for (std::size_t s : y.b_side) out.b_side.push_back(s + offset);
  return out;
}

Part part_power(const Part& x, int n) {
  if (n < 0) throw ArgumentError("part_power: negative exponent");
  if (n == 0) return Part{DensityMatrix(ComplexMatrix::Identity(1, 1), {1}), {}};
  Part out = x;
  for (int i = 1; i < n; ++i) out = tensor_parts(out, x);
  return out;
}

struct EvalOut {
  double value = 0.0;
  double gap = 0.0;
  bool ok = false;
  std::string err;
};

EvalOut eval_part(const MeasureDescriptor& desc, const Part& part, const CheckOptions& opts) {
  EvalOut out;
  try {
    if (desc.id == MeasureId::negativity) {
      if (part.state.dim() > desc.max_dim) {
        throw CapabilityError("negativity: dimension exceeds capability");
      }
      if (part.b_side.empty() || part.b_side.size() >= part.state.subsystems()) {
        throw CapabilityError("negativity: instance has no proper bipartition");
      }
      out.value = negativity(part.state, part.b_side);
    } else {
      const SolverReport rep = evaluate(desc, part.state, context_of(opts));
      out.value = rep.value;
      out.gap = rep.gap_estimate;
      if (!rep.converged) {
        out.err = measure_name(desc.id) + " solver did not converge (gap " +
                  std::to_string(rep.gap_estimate) + ")";
        return out;
      }
    }
    out.ok = true;
  } catch (const CapabilityError& e) {
    out.err = e.what();
  }
  return out;
}

CheckResult base_result(const MeasureDescriptor& desc, Property prop, const CheckOptions& opts,
                        std::string digest_text) {
  CheckResult r;
  r.measure_id = measure_name(desc.id);
  r.property = prop;
  r.tol = opts.tol;
  r.seed = opts.seed;
  r.instance_digest = digest_hex(digest_text);
  return r;
}

enum class Relation { equality, lhs_ge_rhs, lhs_le_rhs };

void finish(CheckResult& r, Relation rel, const EvalOut& lhs, const EvalOut& rhs) {
  if (!lhs.ok || !rhs.ok) {
    r.verdict = Verdict::inconclusive;
    r.note = !lhs.ok ? lhs.err : rhs.err;
    return;
  }
  r.lhs = lhs.value;
  r.rhs = rhs.value;
  r.residual = lhs.value - rhs.value;
  switch (rel) {
    case Relation::equality:
      r.verdict = std::abs(r.residual) <= r.tol ? Verdict::holds : Verdict::violated;
      break;
    case Relation::lhs_ge_rhs:
      r.verdict = r.residual >= -r.tol ? Verdict::holds : Verdict::violated;
      break;
    case Relation::lhs_le_rhs:
      r.verdict = r.residual <= r.tol ? Verdict::holds : Verdict::violated;
      break;
  }
}

std::string serialize_ensemble(const Ensemble& ens) {
  std::ostringstream ss;
  ss << "weights";
  for (double w : ens.weights) ss << ' ' << w;
  ss << '\n';
  for (const auto& st : ens.states) ss << qstate_to_string(st);
  return ss.str();
}

std::string serialize_basis(const FlagBasis& basis) {
  std::ostringstream ss;
  ss << "basis " << theory_name(basis.theory()) << '\n';
  for (const auto& v : basis.vectors()) {
    for (Index i = 0; i < v.dim(); ++i) {
      if (i > 0) ss << ' ';
      ss << format_complex(v.amplitudes()[i]);
    }
    ss << '\n';
  }
  return ss.str();
}

// Weighted sum of per-member evaluations; fails softly on capability gaps.
EvalOut weighted_member_sum(const MeasureDescriptor& desc, const Ensemble& ens,
                            const CheckOptions& opts) {
  EvalOut acc;
  acc.ok = true;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const EvalOut e = eval_part(desc, make_part(desc, ens.states[i], opts.cut), opts);
    if (!e.ok) return e;
    acc.value += ens.weights[i] * e.value;
    acc.gap += ens.weights[i] * e.gap;
  }
  return acc;
}

bool is_one_local(const KrausChannel& ch, std::size_t cut) {
  const auto& dims = ch.in_dims();
  if (ch.in_dims() != ch.out_dims() || cut < 1 || cut >= dims.size()) return false;
  Index da = 1, db = 1;
  for (std::size_t s = 0; s < dims.size(); ++s) {
    (s < cut ? da : db) *= dims[s];
  }
  constexpr double tol = 1e-12;
  auto a_local = [&](const ComplexMatrix& k) {
    ComplexMatrix ka(da, da);
    for (Index a = 0; a < da; ++a) {
      for (Index ap = 0; ap < da; ++ap) ka(a, ap) = k(a * db, ap * db);
    }
    const ComplexMatrix rebuilt = kron(ka, ComplexMatrix::Identity(db, db));
    return (rebuilt - k).cwiseAbs().maxCoeff() <= tol;
  };
  auto b_local = [&](const ComplexMatrix& k) {
    ComplexMatrix kb(db, db);
    for (Index b = 0; b < db; ++b) {
      for (Index bp = 0; bp < db; ++bp) kb(b, bp) = k(b, bp);
    }
    const ComplexMatrix rebuilt = kron(ComplexMatrix::Identity(da, da), kb);
    return (rebuilt - k).cwiseAbs().maxCoeff() <= tol;
  };
  bool all_a = true, all_b = true;
  for (const auto& k : ch.kraus_ops()) {
    all_a = all_a && a_local(k);
    all_b = all_b && b_local(k);
    if (!all_a && !all_b) return false;
  }
  return all_a || all_b;
}

bool is_free_channel(Theory theory, const KrausChannel& ch, std::size_t cut) {
  return theory == Theory::coherence ? is_incoherent(ch) : is_one_local(ch, cut);
}

}  // namespace

CheckResult check_flag_additivity(const MeasureDescriptor& m, const Ensemble& ens,
                                  const FlagBasis& basis, const CheckOptions& opts) {
  const DensityMatrix flagged = flagged_state(ens, basis);
  CheckResult r = base_result(m, Property::flag_additivity, opts,
                              serialize_ensemble(ens) + serialize_basis(basis));
  const EvalOut lhs = eval_part(m, make_part(m, flagged, opts.cut), opts);
  const EvalOut rhs = weighted_member_sum(m, ens, opts);
  finish(r, Relation::equality, lhs, rhs);
  return r;
}

CheckResult check_flag_sup(const MeasureDescriptor& m, const Ensemble& ens,
                           const FlagBasis& basis, const CheckOptions& opts) {
  CheckResult r = check_flag_additivity(m, ens, basis, opts);
  r.property = Property::flag_sup;
  if (r.verdict != Verdict::inconclusive) {
    r.verdict = r.residual >= -r.tol ? Verdict::holds : Verdict::violated;
  }
  return r;
}

CheckResult check_flag_sub(const MeasureDescriptor& m, const Ensemble& ens,
                           const FlagBasis& basis, const CheckOptions& opts) {
  CheckResult r = check_flag_additivity(m, ens, basis, opts);
  r.property = Property::flag_sub;
  if (r.verdict != Verdict::inconclusive) {
    r.verdict = r.residual <= r.tol ? Verdict::holds : Verdict::violated;
  }
  return r;
}

CheckResult check_strong_mono(const MeasureDescriptor& m, const DensityMatrix& rho,
                              const KrausChannel& ch, const CheckOptions& opts) {
  if (!is_free_channel(m.theory, ch, opts.cut)) {
    throw ArgumentError("check_strong_mono: channel fails the freeness predicate of " +
                        std::string(theory_name(m.theory)));
  }
  const Ensemble outcomes = selective_apply(ch, rho);
  CheckResult r = base_result(m, Property::strong_mono, opts,
                              qstate_to_string(rho) + kraus_to_string(ch));
  const EvalOut lhs = eval_part(m, make_part(m, rho, opts.cut), opts);
  const EvalOut rhs = weighted_member_sum(m, outcomes, opts);
  finish(r, Relation::lhs_ge_rhs, lhs, rhs);
  return r;
}

CheckResult check_convexity(const MeasureDescriptor& m, const Ensemble& ens,
                            const CheckOptions& opts) {
  CheckResult r = base_result(m, Property::convexity, opts, serialize_ensemble(ens));
  const EvalOut lhs = weighted_member_sum(m, ens, opts);
  const EvalOut rhs = eval_part(m, make_part(m, ens.average(), opts.cut), opts);
  finish(r, Relation::lhs_ge_rhs, lhs, rhs);
  return r;
}

CheckResult check_two_copy(const MeasureDescriptor& m, const DensityMatrix& rho,
                           const CheckOptions& opts) {
  CheckResult r = base_result(m, Property::two_copy, opts, qstate_to_string(rho));
  const Part p = make_part(m, rho, opts.cut);
  const EvalOut lhs = eval_part(m, tensor_parts(p, p), opts);
  EvalOut rhs = eval_part(m, p, opts);
  rhs.value *= 2.0;
  rhs.gap *= 2.0;
  finish(r, Relation::equality, lhs, rhs);
  return r;
}

CheckResult check_n_copy(const MeasureDescriptor& m, const DensityMatrix& rho, int n,
                         const CheckOptions& opts) {
  if (n < 1) throw ArgumentError("check_n_copy: n must be >= 1");
  CheckResult r = base_result(m, Property::n_copy, opts, qstate_to_string(rho));
  const Part p = make_part(m, rho, opts.cut);
  const EvalOut lhs = eval_part(m, part_power(p, n), opts);
  EvalOut rhs = eval_part(m, p, opts);
  rhs.value *= n;
  rhs.gap *= n;
  finish(r, Relation::equality, lhs, rhs);
  r.note = "N=" + std::to_string(n);
  return r;
}

CheckResult check_full_additivity(const MeasureDescriptor& m, const DensityMatrix& rho,
                                  const DensityMatrix& sigma, const CheckOptions& opts) {
  CheckResult r = base_result(m, Property::full_additivity, opts,
                              qstate_to_string(rho) + qstate_to_string(sigma));
  const Part pr = make_part(m, rho, opts.cut);
  const Part ps = make_part(m, sigma, opts.cut);
  const EvalOut lhs = eval_part(m, tensor_parts(pr, ps), opts);
  const EvalOut er = eval_part(m, pr, opts);
  const EvalOut es = eval_part(m, ps, opts);
  EvalOut rhs;
  rhs.ok = er.ok && es.ok;
  rhs.err = er.ok ? es.err : er.err;
  rhs.value = er.value + es.value;
  rhs.gap = er.gap + es.gap;
  finish(r, Relation::equality, lhs, rhs);
  return r;
}

CheckResult check_free_padding(const MeasureDescriptor& m, const DensityMatrix& rho,
                               const DensityMatrix& delta_free, const CheckOptions& opts) {
  CheckResult r = base_result(m, Property::free_padding, opts,
                              qstate_to_string(rho) + qstate_to_string(delta_free));
  const Part p = make_part(m, rho, opts.cut);
  // The appended free register joins party B.
  Part padded{tensor(rho, delta_free), p.b_side};
  for (std::size_t s = rho.subsystems(); s < padded.state.subsystems(); ++s) {
    padded.b_side.push_back(s);
  }
  const EvalOut lhs = eval_part(m, padded, opts);
  const EvalOut rhs = eval_part(m, p, opts);
  finish(r, Relation::equality, lhs, rhs);
  return r;
}

CheckResult check_omega_identity(const MeasureDescriptor& m, const DensityMatrix& rho,
                                 const DensityMatrix& sigma, const CheckOptions& opts) {
  const FlagBasis basis = computational_flag_basis(m.theory, 2, {2});
  CheckResult r = base_result(m, Property::omega_identity, opts,
                              qstate_to_string(rho) + qstate_to_string(sigma));

  const Ensemble half({0.5, 0.5}, {rho, sigma});
  const CheckResult fa = check_flag_additivity(m, half, basis, opts);
  if (fa.verdict != Verdict::holds) {
    r.verdict = Verdict::inconclusive;
    r.note = "prerequisite flag_additivity " + verdict_name(fa.verdict);
    return r;
  }
  const DensityMatrix w = omega(rho, sigma, basis);
  for (const auto& [name, st] : {std::pair<const char*, const DensityMatrix&>{"rho", rho},
                                 {"sigma", sigma},
                                 {"omega", w}}) {
    const CheckResult tc = check_two_copy(m, st, opts);
    if (tc.verdict != Verdict::holds) {
      r.verdict = Verdict::inconclusive;
      r.note = std::string("prerequisite two_copy(") + name + ") " + verdict_name(tc.verdict);
      return r;
    }
  }

  const Part pr = make_part(m, rho, opts.cut);
  const Part ps = make_part(m, sigma, opts.cut);
  const Part pw = make_part(m, w, opts.cut);

  const EvalOut m_rr = eval_part(m, tensor_parts(pr, pr), opts);
  const EvalOut m_rs = eval_part(m, tensor_parts(pr, ps), opts);
  const EvalOut m_sr = eval_part(m, tensor_parts(ps, pr), opts);
  const EvalOut m_ss = eval_part(m, tensor_parts(ps, ps), opts);
  const EvalOut m_ww = eval_part(m, tensor_parts(pw, pw), opts);
  const EvalOut m_w = eval_part(m, pw, opts);
  const EvalOut m_r = eval_part(m, pr, opts);
  const EvalOut m_s = eval_part(m, ps, opts);
  for (const EvalOut* e : {&m_rr, &m_rs, &m_sr, &m_ss, &m_ww, &m_w, &m_r, &m_s}) {
    if (!e->ok) {
      r.verdict = Verdict::inconclusive;
      r.note = e->err;
      return r;
    }
  }

  // Four-term expansion of M(omega ⊗ omega).
  const double expansion =
      0.25 * m_rr.value + 0.25 * m_rs.value + 0.25 * m_sr.value + 0.25 * m_ss.value;
  const double residual_expansion = m_ww.value - expansion;
  // M(rho ⊗ sigma) = 4 M(omega) - M(rho) - M(sigma).
  r.lhs = m_rs.value;
  r.rhs = 4.0 * m_w.value - m_r.value - m_s.value;
  r.residual = r.lhs - r.rhs;
  const double worst = std::max(std::abs(r.residual), std::abs(residual_expansion));
  r.verdict = worst <= r.tol ? Verdict::holds : Verdict::violated;
  std::ostringstream note;
  note << "expansion_residual=" << residual_expansion;
  r.note = note.str();
  return r;
}

std::pair<Ensemble, CheckResult> bridge_mono_violation_to_flag(const MeasureDescriptor& m,
                                                               const DensityMatrix& rho,
                                                               const KrausChannel& ch,
                                                               const FlagBasis& basis,
                                                               const CheckOptions& opts) {
  const CheckResult mono = check_strong_mono(m, rho, ch, opts);
  if (mono.verdict != Verdict::violated) {
    throw ArgumentError("bridge_mono_violation_to_flag: instance does not violate strong "
                        "monotonicity (verdict " +
                        verdict_name(mono.verdict) + ")");
  }
  const Ensemble outcomes = selective_apply(ch, rho);
  if (basis.size() != outcomes.size()) {
    throw ArgumentError("bridge_mono_violation_to_flag: basis length must match outcome count");
  }
  CheckResult sup = check_flag_sup(m, outcomes, basis, opts);
  const double v_mono = -mono.residual;
  const double v_sup = -sup.residual;
  // Sigma p_i M(rho_i) is shared between both checks (instance-keyed solves),
  // so only M(rho) and M(flagged) carry solver slack.
  const double slack =
      1e-9 + (m.id == MeasureId::c_tr ? 2.0 * opts.solver.tol : 0.0);
  if (sup.verdict == Verdict::violated && v_sup < v_mono - slack) {
    throw std::logic_error("bridge_mono_violation_to_flag: flag violation smaller than the "
                           "monotonicity violation beyond certified slack");
  }
  std::ostringstream note;
  note << "strong_mono_violation=" << v_mono << " flag_sup_violation=" << v_sup;
  sup.note = note.str();
  return {outcomes, sup};
}

MonoBridge bridge_flag_violation_to_mono(const MeasureDescriptor& m, const Ensemble& ens,
                                         const FlagBasis& basis, const CheckOptions& opts) {
  const CheckResult sup = check_flag_sup(m, ens, basis, opts);
  if (sup.verdict != Verdict::violated) {
    throw ArgumentError("bridge_flag_violation_to_mono: instance does not violate flag "
                        "supadditivity (verdict " +
                        verdict_name(sup.verdict) + ")");
  }
  // Free-padding precondition on the members: M(rho_i ⊗ phi_i) must track
  // M(rho_i) within the padding tolerance.
  constexpr double padding_tol = 1e-6;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const DensityMatrix padded = tensor(ens.states[i], basis.vectors()[i].projector());
    Part pp = make_part(m, ens.states[i], opts.cut);
    Part padded_part{padded, pp.b_side};
    for (std::size_t s = ens.states[i].subsystems(); s < padded.subsystems(); ++s) {
      padded_part.b_side.push_back(s);
    }
    const EvalOut a = eval_part(m, padded_part, opts);
    const EvalOut b = eval_part(m, pp, opts);
    if (!a.ok || !b.ok) {
      throw ArgumentError("bridge_flag_violation_to_mono: member evaluation failed: " +
                          (a.ok ? b.err : a.err));
    }
    if (std::abs(a.value - b.value) > padding_tol) {
      throw ArgumentError("bridge_flag_violation_to_mono: free padding exceeds tolerance on "
                          "ensemble member " +
                          std::to_string(i));
    }
  }
  DensityMatrix flagged = flagged_state(ens, basis);
  KrausChannel measurement =
      flag_measurement_channel(ens.states.front().dims(), basis);
  CheckResult mono = check_strong_mono(m, flagged, measurement, opts);
  const double v_sup = -sup.residual;
  const double v_mono = -mono.residual;
  std::ostringstream note;
  note << "flag_sup_violation=" << v_sup << " strong_mono_violation=" << v_mono;
  mono.note = note.str();
  return MonoBridge{std::move(flagged), std::move(measurement), std::move(mono)};
}

AuditSummary audit_theorem1(const MeasureDescriptor& m, const AuditOptions& audit_opts) {
  AuditSummary summary;
  const std::vector<Property> swept = {Property::flag_additivity, Property::flag_sup,
                                       Property::flag_sub, Property::convexity,
                                       Property::strong_mono};
  for (Property p : swept) summary.counts[p] = AuditCell{};

  std::optional<std::pair<Ensemble, FlagBasis>> sup_violation;
  std::optional<std::pair<DensityMatrix, KrausChannel>> mono_violation;
  std::optional<std::pair<Ensemble, FlagBasis>> sub_violation;
  bool convexity_violated = false;

  std::vector<std::vector<CheckResult>> per_trial(static_cast<std::size_t>(audit_opts.trials));
  std::mutex witness_lock;
  parallel_for(static_cast<std::size_t>(audit_opts.trials), audit_opts.workers, [&](std::size_t t) {
    RngStream rng = RngStream::derive(audit_opts.seed, {0xa1d17u, t});
    CheckOptions opts;
    opts.tol = audit_opts.tol;
    opts.seed = mix_words(audit_opts.seed, t);

    const std::size_t n = 2 + rng.below(3);
    const Ensemble ens = random_ensemble(m.theory, audit_opts.dim, n, rng);
    const FlagBasis basis = random_flag_basis(m.theory, n, rng);
    const DensityMatrix rho = random_test_state(m.theory, audit_opts.dim, rng);
    const KrausChannel ch =
        random_free_channel(m.theory, rho.dims(), 2 + rng.below(5), rng);

    std::vector<CheckResult> results;
    results.push_back(check_flag_additivity(m, ens, basis, opts));
    results.push_back(check_flag_sup(m, ens, basis, opts));
    results.push_back(check_flag_sub(m, ens, basis, opts));
    results.push_back(check_convexity(m, ens, opts));
    results.push_back(check_strong_mono(m, rho, ch, opts));

    {
      std::lock_guard<std::mutex> lock(witness_lock);
      if (results[1].verdict == Verdict::violated && !sup_violation) {
        sup_violation = {ens, basis};
      }
      if (results[2].verdict == Verdict::violated && !sub_violation) {
        sub_violation = {ens, basis};
      }
      if (results[3].verdict == Verdict::violated) convexity_violated = true;
      if (results[4].verdict == Verdict::violated && !mono_violation) {
        mono_violation = {rho, ch};
      }
    }
    per_trial[t] = std::move(results);
  });

  for (const auto& results : per_trial) {
    for (const auto& r : results) {
      AuditCell& cell = summary.counts[r.property];
      switch (r.verdict) {
        case Verdict::holds: ++cell.holds; break;
        case Verdict::violated: ++cell.violated; break;
        case Verdict::inconclusive: ++cell.inconclusive; break;
      }
    }
  }

  // Optional search phase for violations random sampling misses.
  if (audit_opts.search_budget > 0) {
    SearchOptions sopts;
    sopts.budget = audit_opts.search_budget;
    sopts.seed = mix_words(audit_opts.seed, 0x5ea4c4u);
    sopts.dim = audit_opts.dim;
    for (Property p : {Property::strong_mono, Property::flag_sup, Property::flag_sub,
                       Property::convexity}) {
      sopts.property = p;
      const SearchOutcome found = search_violation(m, sopts);
      summary.search_evaluations += found.evaluations;
      if (found.best_violation > audit_opts.tol) {
        ++summary.counts[p].violated;
        if (p == Property::strong_mono && !mono_violation && found.state && found.channel) {
          mono_violation = {*found.state, *found.channel};
        }
        if (p == Property::flag_sup && !sup_violation && found.ensemble && found.basis) {
          sup_violation = {*found.ensemble, *found.basis};
        }
        if (p == Property::flag_sub && !sub_violation && found.ensemble && found.basis) {
          sub_violation = {*found.ensemble, *found.basis};
        }
        if (p == Property::convexity) convexity_violated = true;
      }
    }
  }

  CheckOptions opts;
  opts.tol = audit_opts.tol;
  opts.seed = audit_opts.seed;

  // Bridge across the Theorem 1 pairing: a violation on one side must be
  // convertible into one on the other side.
  bool has_mono = mono_violation.has_value();
  bool has_sup = sup_violation.has_value();
  std::ostringstream note;
  if (has_mono && !has_sup) {
    const auto& [rho, ch] = *mono_violation;
    const auto n_outcomes = selective_apply(ch, rho).size();
    const FlagBasis basis =
        computational_flag_basis(m.theory, n_outcomes,
                                 {static_cast<Index>(n_outcomes)});
    const auto [ens, bridged] = bridge_mono_violation_to_flag(m, rho, ch, basis, opts);
    (void)ens;
    if (bridged.verdict == Verdict::violated) {
      has_sup = true;
      note << "flag_sup violation obtained by bridging; ";
    }
  }
  if (has_sup && !has_mono) {
    const auto& [ens, basis] = *sup_violation;
    const MonoBridge bridged = bridge_flag_violation_to_mono(m, ens, basis, opts);
    if (bridged.result.verdict == Verdict::violated) {
      has_mono = true;
      note << "strong_mono violation obtained by bridging; ";
    }
  }

  // Corollary pairing: flag subadditivity vs convexity. A flag_sub violation
  // yields a convexity violation on the padded ensemble whose average is the
  // flagged state.
  bool has_sub = sub_violation.has_value();
  bool has_conv = convexity_violated;
  if (has_sub && !has_conv) {
    const auto& [ens, basis] = *sub_violation;
    std::vector<DensityMatrix> padded;
    for (std::size_t i = 0; i < ens.size(); ++i) {
      padded.push_back(tensor(ens.states[i], basis.vectors()[i].projector()));
    }
    const CheckResult conv = check_convexity(m, Ensemble(ens.weights, padded), opts);
    if (conv.verdict == Verdict::violated) {
      has_conv = true;
      note << "convexity violation obtained by bridging; ";
    }
  }

  summary.consistent = (has_mono == has_sup) && (has_sub == has_conv);
  note << "strong_mono=" << (has_mono ? "violated" : "clean")
       << " flag_sup=" << (has_sup ? "violated" : "clean")
       << " convexity=" << (has_conv ? "violated" : "clean")
       << " flag_sub=" << (has_sub ? "violated" : "clean");
  summary.note = note.str();
  return summary;
}

RegularizationEstimate estimate_regularization(const MeasureDescriptor& m,
                                               const DensityMatrix& rho, int n_max,
                                               const CheckOptions& opts) {
  if (n_max < 1) throw ArgumentError("estimate_regularization: n_max must be >= 1");
  Index dim_check = 1;
  for (int i = 0; i < n_max; ++i) {
    dim_check *= rho.dim();
    if (dim_check > dimension_cap()) {
      throw CapacityError("estimate_regularization: n_max exceeds the dimension cap");
    }
  }
  if (dim_check > m.max_dim) {
    throw CapabilityError("estimate_regularization: measure cannot evaluate d^n_max");
  }

  RegularizationEstimate est;
  const Part base = make_part(m, rho, opts.cut);
  Part power = base;
  for (int n = 1; n <= n_max; ++n) {
    if (n > 1) power = tensor_parts(power, base);
    const EvalOut e = eval_part(m, power, opts);
    if (!e.ok) throw CapabilityError(e.err);
    est.per_copy.emplace_back(n, e.value / n);
  }

  constexpr double trend_tol = 1e-9;
  bool any_up = false, any_down = false;
  for (std::size_t i = 1; i < est.per_copy.size(); ++i) {
    const double step = est.per_copy[i].second - est.per_copy[i - 1].second;
    if (step > trend_tol) any_up = true;
    if (step < -trend_tol) any_down = true;
  }
  est.trend = any_up && any_down ? Trend::mixed
              : any_up           ? Trend::increasing
              : any_down         ? Trend::decreasing
                                 : Trend::constant;
  return est;
}

CheckResult check_sandwich(const MeasureDescriptor& m, const DensityMatrix& rho1,
                           const DensityMatrix& rho2, double p1, const FlagBasis& basis, int n,
                           double delta_typ, const CheckOptions& opts) {
  CheckResult r = base_result(m, Property::sandwich, opts,
                              qstate_to_string(rho1) + qstate_to_string(rho2) +
                                  serialize_basis(basis) + std::to_string(p1) +
                                  std::to_string(n) + std::to_string(delta_typ));

  // Theorem hypothesis: the measure is flag additive on this instance.
  const Ensemble two({p1, 1.0 - p1}, {rho1, rho2});
  const CheckResult fa = check_flag_additivity(m, two, basis, opts);
  if (fa.verdict != Verdict::holds) {
    r.verdict = Verdict::inconclusive;
    r.note = "prerequisite flag_additivity " + verdict_name(fa.verdict);
    return r;
  }

  const TypicalDecomposition decomp = typical_decomposition(rho1, rho2, p1, basis, n, delta_typ);

  // rho_typ lives on n copies of (state ⊗ flag); for entanglement the flag
  // registers join party B in every copy.
  Part typ{decomp.rho_typ, {}};
  if (m.theory == Theory::entanglement) {
    const std::size_t copy_len = rho1.subsystems() + basis.flag_dims().size();
    for (int c = 0; c < n; ++c) {
      const std::size_t off = static_cast<std::size_t>(c) * copy_len;
      for (std::size_t s = opts.cut; s < copy_len; ++s) typ.b_side.push_back(off + s);
    }
  }
  const EvalOut mid = eval_part(m, typ, opts);

  const double p2 = 1.0 - p1;
  const auto exponent = [n](double p, double delta, bool upper) {
    const double x = n * p * (upper ? 1.0 + delta : 1.0 - delta);
    const long e = upper ? static_cast<long>(std::ceil(x)) : static_cast<long>(std::floor(x));
    return static_cast<int>(std::max(0L, e));
  };
  const Part b1 = make_part(m, rho1, opts.cut);
  const Part b2 = make_part(m, rho2, opts.cut);
  const EvalOut lower = eval_part(
      m,
      tensor_parts(part_power(b1, exponent(p1, delta_typ, false)),
                   part_power(b2, exponent(p2, delta_typ, false))),
      opts);
  const EvalOut upper = eval_part(
      m,
      tensor_parts(part_power(b1, exponent(p1, delta_typ, true)),
                   part_power(b2, exponent(p2, delta_typ, true))),
      opts);

  if (!mid.ok || !lower.ok || !upper.ok) {
    r.verdict = Verdict::inconclusive;
    r.note = !mid.ok ? mid.err : (!lower.ok ? lower.err : upper.err);
    return r;
  }
  r.lhs = mid.value;
  r.rhs = upper.value;
  r.residual = std::max(lower.value - mid.value, mid.value - upper.value);
  r.verdict = r.residual <= r.tol ? Verdict::holds : Verdict::violated;
  std::ostringstream note;
  note << "lower=" << lower.value << " mid=" << mid.value << " upper=" << upper.value
       << " epsilon=" << decomp.epsilon;
  r.note = note.str();
  return r;
}

}  // namespace flagcheck
