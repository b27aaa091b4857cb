#include "flagcheck/search.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>

#include "flagcheck/errors.hpp"
#include "flagcheck/generators.hpp"
#include "flagcheck/io.hpp"
#include "flagcheck/parallel.hpp"

namespace flagcheck {

namespace {

constexpr double kPenalty = -1e9;

// ---------------------------------------------------------------------------
// Witness serialization
// ---------------------------------------------------------------------------

std::string basis_line(const FlagBasis& basis) {
  std::ostringstream ss;
  ss << "basis theory=" << theory_name(basis.theory()) << " n=" << basis.size() << " dims=";
  const auto& fd = basis.flag_dims();
  for (std::size_t i = 0; i < fd.size(); ++i) {
    if (i > 0) ss << ',';
    ss << fd[i];
  }
  ss << " vectors=";
  for (std::size_t v = 0; v < basis.size(); ++v) {
    if (v > 0) ss << ';';
    const auto& amps = basis.vectors()[v].amplitudes();
    bool first = true;
    for (Index i = 0; i < amps.size(); ++i) {
      if (std::abs(amps[i]) > 1e-12) {
        if (!first) ss << '|';
        ss << i << ':' << format_complex(amps[i]);
        first = false;
      }
    }
  }
  return ss.str();
}

FlagBasis parse_basis_line(const std::string& line) {
  std::istringstream ss(line);
  std::string tag, theory_field, n_field, dims_field, vectors_field;
  ss >> tag >> theory_field >> n_field >> dims_field >> vectors_field;
  if (tag != "basis") throw IoError("witness: expected basis line");
  auto value_of = [](const std::string& field, const char* key) {
    const std::string prefix = std::string(key) + "=";
    if (field.rfind(prefix, 0) != 0) throw IoError("witness basis: expected " + prefix);
    return field.substr(prefix.size());
  };
  const Theory theory =
      value_of(theory_field, "theory") == "coherence" ? Theory::coherence : Theory::entanglement;
  const std::size_t n = std::stoul(value_of(n_field, "n"));
  std::vector<Index> dims;
  {
    std::istringstream ds(value_of(dims_field, "dims"));
    std::string part;
    while (std::getline(ds, part, ',')) dims.push_back(std::stol(part));
  }
  Index df = 1;
  for (Index d : dims) df *= d;
  std::vector<PureState> vecs;
  std::istringstream vs(value_of(vectors_field, "vectors"));
  std::string vec_text;
  while (std::getline(vs, vec_text, ';')) {
    ComplexVector v = ComplexVector::Zero(df);
    std::istringstream es(vec_text);
    std::string entry;
    while (std::getline(es, entry, '|')) {
      const auto colon = entry.find(':');
      if (colon == std::string::npos) throw IoError("witness basis: malformed vector entry");
      v[std::stol(entry.substr(0, colon))] = parse_complex(entry.substr(colon + 1));
    }
    vecs.emplace_back(std::move(v), dims);
  }
  if (vecs.size() != n) throw IoError("witness basis: vector count mismatch");
  return FlagBasis(std::move(vecs), theory);
}

}  // namespace

std::string witness_to_string(const Witness& w) {
  std::ostringstream ss;
  ss << "witness 1 measure=" << w.measure << " property=" << property_name(w.property) << '\n';
  {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "params n=%d p1=%.17g delta=%.17g", w.n_copies, w.p1,
                  w.delta_typ);
    ss << buf << '\n';
  }
  if (w.state) {
    ss << "state\n" << qstate_to_string(*w.state);
  }
  if (w.state2) {
    ss << "state2\n" << qstate_to_string(*w.state2);
  }
  if (w.channel) {
    ss << "channel\n" << kraus_to_string(*w.channel);
  }
  if (w.ensemble) {
    ss << "ensemble n=" << w.ensemble->size() << " weights=";
    for (std::size_t i = 0; i < w.ensemble->size(); ++i) {
      if (i > 0) ss << ',';
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", w.ensemble->weights[i]);
      ss << buf;
    }
    ss << '\n';
    for (const auto& st : w.ensemble->states) ss << qstate_to_string(st);
  }
  if (w.basis) {
    ss << basis_line(*w.basis) << '\n';
  }
  return ss.str();
}

Witness witness_from_string(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty witness");
  std::istringstream header(line);
  std::string magic, version, measure_field, property_field;
  header >> magic >> version >> measure_field >> property_field;
  if (magic != "witness" || version != "1") throw IoError("not a witness block: " + line);
  Witness w;
  if (measure_field.rfind("measure=", 0) != 0 || property_field.rfind("property=", 0) != 0) {
    throw IoError("witness header needs measure= and property=");
  }
  w.measure = measure_field.substr(8);
  w.property = property_from_name(property_field.substr(9));

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("params", 0) == 0) {
      std::istringstream ps(line);
      std::string tag, n_field, p1_field, delta_field;
      ps >> tag >> n_field >> p1_field >> delta_field;
      if (n_field.rfind("n=", 0) != 0 || p1_field.rfind("p1=", 0) != 0 ||
          delta_field.rfind("delta=", 0) != 0) {
        throw IoError("witness params: malformed line");
      }
      w.n_copies = std::stoi(n_field.substr(2));
      w.p1 = std::stod(p1_field.substr(3));
      w.delta_typ = std::stod(delta_field.substr(6));
    } else if (line == "state") {
      w.state = read_qstate(is);
    } else if (line == "state2") {
      w.state2 = read_qstate(is);
    } else if (line == "channel") {
      w.channel = read_kraus(is);
    } else if (line.rfind("ensemble", 0) == 0) {
      std::istringstream es(line);
      std::string tag, n_field, weights_field;
      es >> tag >> n_field >> weights_field;
      if (n_field.rfind("n=", 0) != 0 || weights_field.rfind("weights=", 0) != 0) {
        throw IoError("witness ensemble: malformed header");
      }
      const std::size_t n = std::stoul(n_field.substr(2));
      std::vector<double> weights;
      std::istringstream ws(weights_field.substr(8));
      std::string part;
      while (std::getline(ws, part, ',')) weights.push_back(std::stod(part));
      if (weights.size() != n) throw IoError("witness ensemble: weight count mismatch");
      std::vector<DensityMatrix> states;
      for (std::size_t i = 0; i < n; ++i) states.push_back(read_qstate(is));
      w.ensemble.emplace(std::move(weights), std::move(states));
    } else if (line.rfind("basis", 0) == 0) {
      w.basis = parse_basis_line(line);
    } else {
      throw IoError("witness: unexpected line: " + line);
    }
  }
  return w;
}

CheckResult replay_check(const Witness& w, const CheckOptions& opts) {
  const MeasureDescriptor& m = descriptor(w.measure);
  switch (w.property) {
    case Property::strong_mono:
      if (!w.state || !w.channel) throw ArgumentError("witness lacks (state, channel)");
      return check_strong_mono(m, *w.state, *w.channel, opts);
    case Property::flag_sup:
      if (!w.ensemble || !w.basis) throw ArgumentError("witness lacks (ensemble, basis)");
      return check_flag_sup(m, *w.ensemble, *w.basis, opts);
    case Property::flag_sub:
      if (!w.ensemble || !w.basis) throw ArgumentError("witness lacks (ensemble, basis)");
      return check_flag_sub(m, *w.ensemble, *w.basis, opts);
    case Property::flag_additivity:
      if (!w.ensemble || !w.basis) throw ArgumentError("witness lacks (ensemble, basis)");
      return check_flag_additivity(m, *w.ensemble, *w.basis, opts);
    case Property::convexity:
      if (!w.ensemble) throw ArgumentError("witness lacks an ensemble");
      return check_convexity(m, *w.ensemble, opts);
    case Property::two_copy:
      if (!w.state) throw ArgumentError("witness lacks a state");
      return check_two_copy(m, *w.state, opts);
    case Property::n_copy:
      if (!w.state) throw ArgumentError("witness lacks a state");
      return check_n_copy(m, *w.state, w.n_copies, opts);
    case Property::full_additivity:
      if (!w.state || !w.state2) throw ArgumentError("witness lacks a state pair");
      return check_full_additivity(m, *w.state, *w.state2, opts);
    case Property::omega_identity:
      if (!w.state || !w.state2) throw ArgumentError("witness lacks a state pair");
      return check_omega_identity(m, *w.state, *w.state2, opts);
    case Property::free_padding:
      if (!w.state || !w.state2) throw ArgumentError("witness lacks a state pair");
      return check_free_padding(m, *w.state, *w.state2, opts);
    case Property::sandwich:
      if (!w.state || !w.state2 || !w.basis) {
        throw ArgumentError("witness lacks (state pair, basis)");
      }
      return check_sandwich(m, *w.state, *w.state2, w.p1, *w.basis, w.n_copies, w.delta_typ,
                            opts);
  }
  throw ArgumentError("witness replay not supported for property " + property_name(w.property));
}

double replay_violation(const Witness& w, const CheckOptions& opts) {
  const CheckResult r = replay_check(w, opts);
  if (r.verdict == Verdict::inconclusive) return -std::numeric_limits<double>::infinity();
  switch (w.property) {
    case Property::flag_sub:
    case Property::sandwich:
      return r.residual;  // positive residual is the violation
    case Property::convexity:
    case Property::strong_mono:
    case Property::flag_sup:
      return -r.residual;  // violated when lhs falls below rhs
    default:
      return std::abs(r.residual);  // equality properties
  }
}

Witness SearchOutcome::witness(const MeasureDescriptor& m, Property p) const {
  Witness w;
  w.measure = measure_name(m.id);
  w.property = p;
  w.state = state;
  w.channel = channel;
  w.ensemble = ensemble;
  w.basis = basis;
  return w;
}

namespace {

// ---------------------------------------------------------------------------
// Parameterization
// ---------------------------------------------------------------------------

DensityMatrix state_from_params(const double* x, Index d, Index rank,
                                const std::vector<Index>& dims, bool& ok) {
  ComplexMatrix g(d, rank);
  for (Index j = 0; j < rank; ++j) {
    for (Index i = 0; i < d; ++i) {
      g(i, j) = Complex(x[2 * (j * d + i)], x[2 * (j * d + i) + 1]);
    }
  }
  ComplexMatrix m = g * g.adjoint();
  m = Complex(0.5) * (m + m.adjoint().eval());
  const double tr = m.trace().real();
  if (!(tr > 1e-10) || !all_finite(m)) {
    ok = false;
    return DensityMatrix(ComplexMatrix::Identity(d, d) / static_cast<double>(d), dims);
  }
  m /= tr;
  ok = true;
  return DensityMatrix(std::move(m), dims);
}

std::vector<double> softmax(const double* x, std::size_t n) {
  double hi = x[0];
  for (std::size_t i = 1; i < n; ++i) hi = std::max(hi, x[i]);
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(std::min(x[i] - hi, 0.0));
    total += w[i];
  }
  for (auto& v : w) v /= total;
  return w;
}

// Incoherent channel from per-column amplitude parameters and fixed
// per-operator row permutations (frozen per restart).
KrausChannel incoherent_channel_from_params(const double* x, Index d, std::size_t n_kraus,
                                            const std::vector<std::vector<std::size_t>>& perms,
                                            bool& ok) {
  std::vector<ComplexMatrix> ops(n_kraus, ComplexMatrix::Zero(d, d));
  for (Index j = 0; j < d; ++j) {
    ComplexVector a(n_kraus);
    for (std::size_t n = 0; n < n_kraus; ++n) {
      const std::size_t base = 2 * (static_cast<std::size_t>(j) * n_kraus + n);
      a[static_cast<Index>(n)] = Complex(x[base], x[base + 1]);
    }
    const double norm = a.norm();
    if (!(norm > 1e-10)) {
      ok = false;
      return identity_channel({d});
    }
    a /= norm;
    for (std::size_t n = 0; n < n_kraus; ++n) {
      ops[n](static_cast<Index>(perms[n][j]), j) = a[static_cast<Index>(n)];
    }
  }
  ok = true;
  return KrausChannel(std::move(ops), {d}, {d});
}

// 1-local channel on party A from a raw matrix, via QR in the Stinespring
// picture. Used for entanglement-theory searches.
KrausChannel local_channel_from_params(const double* x, Index da, Index db, std::size_t n_kraus,
                                       bool& ok) {
  const Index rows = static_cast<Index>(n_kraus) * da;
  ComplexMatrix g(rows, da);
  for (Index j = 0; j < da; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const std::size_t base = 2 * static_cast<std::size_t>(j * rows + i);
      g(i, j) = Complex(x[base], x[base + 1]);
    }
  }
  if (!all_finite(g) || g.colwise().norm().minCoeff() < 1e-10) {
    ok = false;
    return identity_channel({da, db});
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix v = qr.householderQ() * ComplexMatrix::Identity(rows, da);
  std::vector<ComplexMatrix> ops;
  for (std::size_t n = 0; n < n_kraus; ++n) {
    ops.push_back(v.block(static_cast<Index>(n) * da, 0, da, da));
  }
  ok = true;
  return embed_local(KrausChannel(std::move(ops), {da}, {da}), db, EmbedSide::right);
}

// ---------------------------------------------------------------------------
// Nelder-Mead (maximization via negated objective)
// ---------------------------------------------------------------------------

struct NelderMeadResult {
  std::vector<double> best_x;
  double best_f = -std::numeric_limits<double>::infinity();
  long evals = 0;
};

NelderMeadResult nelder_mead_max(const std::function<double(const std::vector<double>&)>& f,
                                 const std::vector<double>& x0, double step, long max_evals) {
  const std::size_t n = x0.size();
  NelderMeadResult out;
  std::vector<std::pair<double, std::vector<double>>> simplex;
  simplex.reserve(n + 1);

  auto eval = [&](const std::vector<double>& x) {
    ++out.evals;
    const double v = f(x);
    if (v > out.best_f) {
      out.best_f = v;
      out.best_x = x;
    }
    return v;
  };

  simplex.emplace_back(eval(x0), x0);
  for (std::size_t i = 0; i < n && out.evals < max_evals; ++i) {
    std::vector<double> x = x0;
    x[i] += step;
    simplex.emplace_back(eval(x), x);
  }
  if (simplex.size() < n + 1) return out;

  const double alpha = 1.0, gamma = 2.0, beta = 0.5, delta = 0.5;
  while (out.evals < max_evals) {
    // Sort descending: best first (maximization).
    std::sort(simplex.begin(), simplex.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i].second[j];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);

    auto& worst = simplex[n];
    std::vector<double> reflected(n);
    for (std::size_t j = 0; j < n; ++j) {
      reflected[j] = centroid[j] + alpha * (centroid[j] - worst.second[j]);
    }
    const double fr = eval(reflected);
    if (fr > simplex[0].first) {
      std::vector<double> expanded(n);
      for (std::size_t j = 0; j < n; ++j) {
        expanded[j] = centroid[j] + gamma * (reflected[j] - centroid[j]);
      }
      const double fe = eval(expanded);
      worst = fe > fr ? std::make_pair(fe, expanded) : std::make_pair(fr, reflected);
    } else if (fr > simplex[n - 1].first) {
      worst = {fr, reflected};
    } else {
      std::vector<double> contracted(n);
      for (std::size_t j = 0; j < n; ++j) {
        contracted[j] = centroid[j] + beta * (worst.second[j] - centroid[j]);
      }
      const double fc = eval(contracted);
      if (fc > worst.first) {
        worst = {fc, contracted};
      } else {
        for (std::size_t i = 1; i <= n && out.evals < max_evals; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            simplex[i].second[j] =
                simplex[0].second[j] + delta * (simplex[i].second[j] - simplex[0].second[j]);
          }
          simplex[i].first = eval(simplex[i].second);
        }
      }
    }
  }
  return out;
}

struct RestartPlan {
  std::vector<double> x0;
  std::function<double(const std::vector<double>&)> objective;
  std::function<Witness()> materialize_best;
};

}  // namespace

SearchOutcome search_violation(const MeasureDescriptor& m, const SearchOptions& opts) {
  switch (opts.property) {
    case Property::strong_mono:
    case Property::flag_sup:
    case Property::flag_sub:
    case Property::convexity:
    case Property::two_copy:
      break;
    default:
      throw ArgumentError("search_violation: unsupported property " +
                          property_name(opts.property));
  }

  CheckOptions light;
  light.tol = default_tolerance(m);
  light.solver = opts.light_solver;
  light.seed = opts.seed;
  light.cut = opts.cut;

  const long restarts = std::max(1L, opts.budget / std::max(1L, opts.evals_per_restart));

  struct RestartBest {
    double violation = -std::numeric_limits<double>::infinity();
    std::vector<double> x;
    long evals = 0;
  };
  std::vector<RestartBest> bests(static_cast<std::size_t>(restarts));

  // Restart-local structure (rank, Kraus count, permutations) is sampled from
  // the restart stream; the continuous parameters go to Nelder-Mead.
  auto build_plan = [&](std::size_t r, RngStream& rng) -> RestartPlan {
    RestartPlan plan;
    const Index d = opts.dim;
    const std::vector<Index> dims =
        m.theory == Theory::entanglement ? std::vector<Index>{2, 2} : std::vector<Index>{d};

    if (opts.property == Property::strong_mono) {
      const Index rank = (r % 2 == 0) ? 1 : static_cast<Index>(1 + rng.below(d));
      const std::size_t n_kraus = 2 + rng.below(2);
      if (m.theory == Theory::coherence) {
        std::vector<std::vector<std::size_t>> perms;
        for (std::size_t n = 0; n < n_kraus; ++n) perms.push_back(rng.permutation(d));
        const std::size_t n_state = 2 * static_cast<std::size_t>(d * rank);
        const std::size_t n_chan = 2 * static_cast<std::size_t>(d) * n_kraus;
        plan.x0.resize(n_state + n_chan);
        for (auto& v : plan.x0) v = rng.gaussian();
        auto materialize = [=](const std::vector<double>& x, bool& ok)
            -> std::pair<DensityMatrix, KrausChannel> {
          bool ok_state = false, ok_chan = false;
          DensityMatrix rho = state_from_params(x.data(), d, rank, dims, ok_state);
          KrausChannel ch =
              incoherent_channel_from_params(x.data() + n_state, d, n_kraus, perms, ok_chan);
          ok = ok_state && ok_chan;
          return {std::move(rho), std::move(ch)};
        };
        plan.objective = [=](const std::vector<double>& x) {
          bool ok = false;
          const auto [rho, ch] = materialize(x, ok);
          if (!ok) return kPenalty;
          Witness w;
          w.measure = measure_name(m.id);
          w.property = Property::strong_mono;
          w.state = rho;
          w.channel = ch;
          return replay_violation(w, light);
        };
        plan.materialize_best = [materialize, &bests, r, id = m.id]() {
          bool ok = false;
          const auto [rho, ch] = materialize(bests[r].x, ok);
          Witness w;
          w.measure = measure_name(id);
          w.property = Property::strong_mono;
          w.state = rho;
          w.channel = ch;
          return w;
        };
      } else {
        const Index da = dims[0], db = dims[1];
        const std::size_t n_state = 2 * static_cast<std::size_t>(da * db * rank);
        const std::size_t n_chan =
            2 * static_cast<std::size_t>(n_kraus) * static_cast<std::size_t>(da * da);
        plan.x0.resize(n_state + n_chan);
        for (auto& v : plan.x0) v = rng.gaussian();
        auto materialize = [=](const std::vector<double>& x, bool& ok)
            -> std::pair<DensityMatrix, KrausChannel> {
          bool ok_state = false, ok_chan = false;
          DensityMatrix rho = state_from_params(x.data(), da * db, rank, dims, ok_state);
          KrausChannel ch =
              local_channel_from_params(x.data() + n_state, da, db, n_kraus, ok_chan);
          ok = ok_state && ok_chan;
          return {std::move(rho), std::move(ch)};
        };
        plan.objective = [=](const std::vector<double>& x) {
          bool ok = false;
          const auto [rho, ch] = materialize(x, ok);
          if (!ok) return kPenalty;
          Witness w;
          w.measure = measure_name(m.id);
          w.property = Property::strong_mono;
          w.state = rho;
          w.channel = ch;
          return replay_violation(w, light);
        };
        plan.materialize_best = [materialize, &bests, r, id = m.id]() {
          bool ok = false;
          const auto [rho, ch] = materialize(bests[r].x, ok);
          Witness w;
          w.measure = measure_name(id);
          w.property = Property::strong_mono;
          w.state = rho;
          w.channel = ch;
          return w;
        };
      }
    } else if (opts.property == Property::two_copy) {
      const Index rank = (r % 2 == 0) ? 1 : static_cast<Index>(1 + rng.below(d));
      const Index d_total = m.theory == Theory::entanglement ? 4 : d;
      const std::size_t n_state = 2 * static_cast<std::size_t>(d_total * rank);
      plan.x0.resize(n_state);
      for (auto& v : plan.x0) v = rng.gaussian();
      auto materialize = [=](const std::vector<double>& x, bool& ok) {
        return state_from_params(x.data(), d_total, rank, dims, ok);
      };
      plan.objective = [=](const std::vector<double>& x) {
        bool ok = false;
        DensityMatrix rho = materialize(x, ok);
        if (!ok) return kPenalty;
        Witness w;
        w.measure = measure_name(m.id);
        w.property = Property::two_copy;
        w.state = std::move(rho);
        return replay_violation(w, light);
      };
      plan.materialize_best = [materialize, &bests, r, id = m.id, p = opts.property]() {
        bool ok = false;
        Witness w;
        w.measure = measure_name(id);
        w.property = p;
        w.state = materialize(bests[r].x, ok);
        return w;
      };
    } else {
      // Ensemble properties: softmax weights + one factor per member.
      const std::size_t n_members = opts.ensemble_size;
      const FlagBasis basis = random_flag_basis(m.theory, n_members, rng);
      const Index d_total = m.theory == Theory::entanglement ? 4 : d;
      const Index rank = (r % 2 == 0) ? 1 : static_cast<Index>(1 + rng.below(d_total));
      const std::size_t per_state = 2 * static_cast<std::size_t>(d_total * rank);
      plan.x0.resize(n_members + n_members * per_state);
      for (auto& v : plan.x0) v = rng.gaussian();
      auto materialize = [=](const std::vector<double>& x, bool& ok) -> Ensemble {
        const auto weights = softmax(x.data(), n_members);
        std::vector<DensityMatrix> states;
        ok = true;
        for (std::size_t i = 0; i < n_members; ++i) {
          bool ok_i = false;
          states.push_back(
              state_from_params(x.data() + n_members + i * per_state, d_total, rank, dims, ok_i));
          ok = ok && ok_i;
        }
        return Ensemble(weights, std::move(states));
      };
      plan.objective = [=](const std::vector<double>& x) {
        bool ok = false;
        Ensemble ens = materialize(x, ok);
        if (!ok) return kPenalty;
        Witness w;
        w.measure = measure_name(m.id);
        w.property = opts.property;
        w.ensemble = std::move(ens);
        if (opts.property != Property::convexity) w.basis = basis;
        return replay_violation(w, light);
      };
      plan.materialize_best = [materialize, basis, &bests, r, id = m.id, p = opts.property]() {
        bool ok = false;
        Witness w;
        w.measure = measure_name(id);
        w.property = p;
        w.ensemble = materialize(bests[r].x, ok);
        if (p != Property::convexity) w.basis = basis;
        return w;
      };
    }
    return plan;
  };

  parallel_for(static_cast<std::size_t>(restarts), opts.workers, [&](std::size_t r) {
    RngStream rng = RngStream::derive(opts.seed, {0x5eacc4u, r});
    RestartPlan plan = build_plan(r, rng);
    const NelderMeadResult nm =
        nelder_mead_max(plan.objective, plan.x0, 0.25, opts.evals_per_restart);
    bests[r].violation = nm.best_f;
    bests[r].x = nm.best_x;
    bests[r].evals = nm.evals;
  });

  // Deterministic best-of reduction: highest violation, ties to the lowest
  // restart index.
  std::size_t winner = 0;
  long total_evals = 0;
  for (std::size_t r = 0; r < bests.size(); ++r) {
    total_evals += bests[r].evals;
    if (bests[r].violation > bests[winner].violation) winner = r;
  }

  SearchOutcome out;
  out.seed = opts.seed;
  out.evaluations = total_evals;
  if (bests[winner].x.empty()) {
    out.best_violation = 0.0;
    return out;
  }

  // Rebuild the winning witness and confirm at strict settings.
  RngStream rng = RngStream::derive(opts.seed, {0x5eacc4u, winner});
  RestartPlan plan = build_plan(winner, rng);
  const Witness w = plan.materialize_best();
  CheckOptions strict = light;
  strict.solver = opts.strict_solver;
  out.best_violation = replay_violation(w, strict);
  out.instance_text = witness_to_string(w);
  out.state = w.state;
  out.channel = w.channel;
  out.ensemble = w.ensemble;
  out.basis = w.basis;
  return out;
}

}  // namespace flagcheck
