#include "flagcheck/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "flagcheck/errors.hpp"
#include "flagcheck/detail/nelder_mead.hpp"
#include "flagcheck/io.hpp"

namespace flagcheck {

namespace {

const std::vector<MeasureDescriptor> kMeasures = {
    {MeasureId::c_l1, Theory::coherence, 4096, true, true},
    {MeasureId::c_rel_ent, Theory::coherence, 4096, true, true},
    {MeasureId::c_tr, Theory::coherence, 16, true, false},
    {MeasureId::negativity, Theory::entanglement, 4096, true, true},
    {MeasureId::eof_2q, Theory::entanglement, 4, false, true},
};

}  // namespace

const MeasureDescriptor& descriptor(MeasureId id) {
  for (const auto& d : kMeasures) {
    if (d.id == id) return d;
  }
  throw ArgumentError("unknown measure id");
}

const MeasureDescriptor& descriptor(const std::string& name) {
  for (const auto& d : kMeasures) {
    if (measure_name(d.id) == name) return d;
  }
  throw ArgumentError("unknown measure: " + name);
}

const std::vector<MeasureDescriptor>& all_measures() { return kMeasures; }

std::string measure_name(MeasureId id) {
  switch (id) {
    case MeasureId::c_l1: return "c_l1";
    case MeasureId::c_rel_ent: return "c_rel_ent";
    case MeasureId::c_tr: return "c_tr";
    case MeasureId::negativity: return "negativity";
    case MeasureId::eof_2q: return "eof_2q";
  }
  throw ArgumentError("unknown measure id");
}

double c_l1(const DensityMatrix& rho) {
  const ComplexMatrix& m = rho.matrix();
  double total = 0.0;
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (i != j) total += std::abs(m(i, j));
    }
  }
  return total;
}

double c_rel_ent(const DensityMatrix& rho) {
  return von_neumann_entropy(dephase(rho)) - von_neumann_entropy(rho);
}

namespace {

// Euclidean projection onto the probability simplex.
RealVector project_simplex(RealVector v) {
  const Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0;
  double theta = 0.0;
  Index rho_idx = 0;
  for (Index i = 0; i < n; ++i) {
    css += u[static_cast<std::size_t>(i)];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[static_cast<std::size_t>(i)] - t > 0.0) {
      rho_idx = i;
      theta = t;
    }
  }
  (void)rho_idx;
  for (Index i = 0; i < n; ++i) v[i] = std::max(v[i] - theta, 0.0);
  return v;
}

struct SubgradientEval {
  double f = 0.0;
  RealVector grad;
};

SubgradientEval eval_trace_norm_objective(const ComplexMatrix& rho_m, const RealVector& q) {
  ComplexMatrix x = rho_m;
  x.diagonal() -= q.cast<Complex>();
  const Eigensystem es = eigh(x);

  SubgradientEval out;
  out.f = es.values.cwiseAbs().sum();
  // W = V sign(Lambda) V'; d f / d q_j = -W_jj. Near-zero eigenvalues take
  // sign 0, a valid subgradient choice.
  const Index n = q.size();
  RealVector signs(n);
  for (Index k = 0; k < n; ++k) {
    signs[k] = (std::abs(es.values[k]) < 1e-12) ? 0.0 : (es.values[k] > 0.0 ? 1.0 : -1.0);
  }
  out.grad.resize(n);
  for (Index j = 0; j < n; ++j) {
    double w = 0.0;
    for (Index k = 0; k < n; ++k) {
      w += signs[k] * std::norm(es.vectors(j, k));
    }
    out.grad[j] = -w;
  }
  return out;
}

// Dual certificate: any Hermitian W with spectrum in [-1, 1] gives the lower
// bound tr(W rho) - max_j W_jj, with equality at the optimum. The candidate
// W = sum_k w_k v_k v_k† is parameterized by per-eigenvector weights (all of
// them free: the diagonal-max term couples otherwise independent blocks, so
// even weights on large eigenvalues can sit strictly inside [-1, 1]).
// Maximized by exact coordinate ascent on the concave piecewise-linear bound
// plus Polyak supergradient steps against the primal value.
double dual_bound_polished(const ComplexMatrix& rho_m, const RealVector& q, double f_upper) {
  ComplexMatrix x = rho_m;
  x.diagonal() -= q.cast<Complex>();
  const Eigensystem es = eigh(x);
  const Index n = q.size();

  // a_k = <v_k| rho |v_k>, column profiles |v_jk|^2.
  RealVector a(n);
  Eigen::MatrixXd profile(n, n);
  for (Index k = 0; k < n; ++k) {
    const ComplexVector v = es.vectors.col(k);
    a[k] = std::real(v.dot(rho_m * v));
    for (Index j = 0; j < n; ++j) profile(j, k) = std::norm(v[j]);
  }

  RealVector w(n);
  for (Index k = 0; k < n; ++k) {
    w[k] = (std::abs(es.values[k]) < 1e-12) ? 0.0 : (es.values[k] > 0.0 ? 1.0 : -1.0);
  }
  auto bound_at = [&](const RealVector& weights) {
    const double lin = a.dot(weights);
    double peak = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < n; ++j) peak = std::max(peak, profile.row(j).dot(weights));
    return lin - peak;
  };
  double best = bound_at(w);

  RealVector iterate = w;
  RealVector best_w = w;
  auto coordinate_passes = [&](int passes) {
    for (int pass = 0; pass < passes; ++pass) {
      const double before = best;
      for (Index k = 0; k < n; ++k) {
        RealVector base_rows(n);
        for (Index j = 0; j < n; ++j) {
          base_rows[j] = profile.row(j).dot(iterate) - profile(j, k) * iterate[k];
        }
        const double lin_rest = a.dot(iterate) - a[k] * iterate[k];
        auto value_at = [&](double wk) {
          double peak = -std::numeric_limits<double>::infinity();
          for (Index j = 0; j < n; ++j) {
            peak = std::max(peak, base_rows[j] + profile(j, k) * wk);
          }
          return lin_rest + a[k] * wk - peak;
        };
        double cand_w = iterate[k];
        double cand_v = value_at(cand_w);
        auto consider = [&](double wk) {
          if (wk < -1.0 || wk > 1.0) return;
          const double v = value_at(wk);
          if (v > cand_v) {
            cand_v = v;
            cand_w = wk;
          }
        };
        consider(-1.0);
        consider(1.0);
        // Envelope breakpoints of the coupled max term.
        for (Index i = 0; i < n; ++i) {
          for (Index j = i + 1; j < n; ++j) {
            const double denom = profile(j, k) - profile(i, k);
            if (std::abs(denom) < 1e-15) continue;
            consider((base_rows[i] - base_rows[j]) / denom);
          }
        }
        iterate[k] = cand_w;
      }
      const double now = bound_at(iterate);
      if (now > best) {
        best = now;
        best_w = iterate;
      }
      if (now - before <= 1e-15) break;
    }
  };

  coordinate_passes(12);

  // Supergradient ascent with Polyak steps toward the primal value, which
  // upper-bounds the dual optimum; escapes coordinate-wise corners.
  iterate = best_w;
  for (int t = 0; t < 120; ++t) {
    Index peak_row = 0;
    double peak = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < n; ++j) {
      const double v = profile.row(j).dot(iterate);
      if (v > peak) {
        peak = v;
        peak_row = j;
      }
    }
    const double value = a.dot(iterate) - peak;
    if (value > best) {
      best = value;
      best_w = iterate;
    }
    RealVector g(n);
    for (Index k = 0; k < n; ++k) g[k] = a[k] - profile(peak_row, k);
    const double gnorm2 = g.squaredNorm();
    if (gnorm2 < 1e-24) break;
    const double target_gap = f_upper - value;
    if (target_gap <= 0.0) break;
    const double step = target_gap / gnorm2;
    for (Index k = 0; k < n; ++k) iterate[k] = std::clamp(iterate[k] + step * g[k], -1.0, 1.0);
  }
  iterate = best_w;
  coordinate_passes(6);
  return best;
}

}  // namespace

namespace {

// Newton minimization of the pseudo-Huber smoothing of ||rho - diag(q)||_1
// with a log barrier on q >= 0 and the trace equality handled by a KKT
// system. Smoothing and barrier shrink jointly; the multi-kink optima that
// flagged states produce leave subgradient methods stalled at ~1e-4, while
// the smoothed Newton path lands within ~mu of the optimizer.
struct NewtonOutcome {
  RealVector q;
  long eigensolves = 0;
  // Certified lower bound: W = h'_mu(X) at a path point is dual feasible
  // (spectrum strictly inside [-1, 1]), and near the KKT point its bound
  // tr(W rho) - max_j W_jj sits within d (mu/2 + tau) of the optimum.
  double dual_bound = -std::numeric_limits<double>::infinity();
};

NewtonOutcome newton_smoothed_path(const ComplexMatrix& m, RealVector q) {
  const Index d = m.rows();
  const RealVector ones = RealVector::Ones(d);
  // Strictly interior start.
  q = (q.array() + 1e-3).matrix();
  q /= q.sum();

  NewtonOutcome out;
  auto barrier_value = [&](const RealVector& point, double mu, double tau) {
    ComplexMatrix x = m;
    x.diagonal() -= point.cast<Complex>();
    const RealVector ev = eigvalsh(x);
    ++out.eigensolves;
    double value = 0.0;
    for (Index i = 0; i < d; ++i) value += std::sqrt(ev[i] * ev[i] + mu * mu);
    for (Index a = 0; a < d; ++a) value -= tau * std::log(point[a]);
    return value;
  };

  auto stage_dual_bound = [&](const RealVector& point, double mu) {
    ComplexMatrix x = m;
    x.diagonal() -= point.cast<Complex>();
    const Eigensystem es = eigh(x);
    ++out.eigensolves;
    ComplexMatrix w = ComplexMatrix::Zero(d, d);
    for (Index i = 0; i < d; ++i) {
      const double lam = es.values[i];
      const double weight = lam / std::sqrt(lam * lam + mu * mu);
      w.noalias() += weight * (es.vectors.col(i) * es.vectors.col(i).adjoint());
    }
    const double lin = (w * m).trace().real();
    double peak = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < d; ++j) peak = std::max(peak, w(j, j).real());
    return lin - peak;
  };

  for (double mu = 1e-2; mu >= 0.9e-10; mu *= 0.1) {
    const double tau = mu;
    for (int step = 0; step < 60; ++step) {
      ComplexMatrix x = m;
      x.diagonal() -= q.cast<Complex>();
      const Eigensystem es = eigh(x);
      ++out.eigensolves;

      RealVector hp(d), gamma_diag(d);
      for (Index i = 0; i < d; ++i) {
        const double lam = es.values[i];
        const double root = std::sqrt(lam * lam + mu * mu);
        hp[i] = lam / root;
        gamma_diag[i] = mu * mu / (root * root * root);
      }
      // grad_a = -[V h' V†]_aa - tau / q_a
      RealVector grad(d);
      for (Index a = 0; a < d; ++a) {
        double s = 0.0;
        for (Index i = 0; i < d; ++i) s += hp[i] * std::norm(es.vectors(a, i));
        grad[a] = -s - tau / q[a];
      }
      // Daleckii-Krein second difference table.
      Eigen::MatrixXd gamma(d, d);
      for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
          const double diff = es.values[i] - es.values[j];
          gamma(i, j) = std::abs(diff) > 1e-11 ? (hp[i] - hp[j]) / diff
                                               : gamma_diag[i];
        }
      }
      Eigen::MatrixXd hess(d, d);
      for (Index a = 0; a < d; ++a) {
        for (Index b = a; b < d; ++b) {
          Complex acc = 0.0;
          for (Index i = 0; i < d; ++i) {
            Complex row = 0.0;
            for (Index j = 0; j < d; ++j) {
              row += gamma(i, j) * es.vectors(a, j) * std::conj(es.vectors(b, j));
            }
            acc += std::conj(es.vectors(a, i)) * es.vectors(b, i) * row;
          }
          hess(a, b) = acc.real();
          hess(b, a) = acc.real();
        }
      }
      for (Index a = 0; a < d; ++a) hess(a, a) += tau / (q[a] * q[a]);

      // KKT step for the trace constraint.
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(d + 1, d + 1);
      kkt.topLeftCorner(d, d) = hess;
      kkt.topRightCorner(d, 1) = ones;
      kkt.bottomLeftCorner(1, d) = ones.transpose();
      Eigen::VectorXd rhs(d + 1);
      rhs.head(d) = -grad;
      rhs[d] = 1.0 - q.sum();
      const Eigen::VectorXd sol = kkt.ldlt().solve(rhs);
      RealVector dq = sol.head(d);
      if (!dq.allFinite()) break;

      // Fraction to boundary, then Armijo backtracking on the barrier value.
      double alpha = 1.0;
      for (Index a = 0; a < d; ++a) {
        if (dq[a] < 0.0) alpha = std::min(alpha, -0.95 * q[a] / dq[a]);
      }
      const double slope = grad.dot(dq);
      const double phi0 = barrier_value(q, mu, tau);
      RealVector accepted = q;
      bool moved = false;
      while (alpha > 1e-12) {
        const RealVector trial = q + alpha * dq;
        if (barrier_value(trial, mu, tau) <= phi0 + 1e-4 * alpha * slope) {
          accepted = trial;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) break;
      q = accepted;
      if (alpha * dq.cwiseAbs().maxCoeff() < 1e-13) break;
    }
    out.dual_bound = std::max(out.dual_bound, stage_dual_bound(q, mu));
  }
  out.q = q;
  return out;
}

}  // namespace

SolverReport c_tr(const DensityMatrix& rho, const SolverOptions& opts, RngStream& rng) {
  const Index d = rho.dim();
  if (d > 16) throw CapabilityError("c_tr: solver limited to dimension <= 16");
  const ComplexMatrix& m = rho.matrix();

  // Deterministic start list: the dephased diagonal, the uniform point, then
  // random simplex points.
  std::vector<RealVector> starts;
  RealVector diag = m.diagonal().real();
  starts.push_back(project_simplex(diag));
  starts.push_back(RealVector::Constant(d, 1.0 / static_cast<double>(d)));
  for (int r = 2; r < opts.restarts; ++r) {
    const auto w = rng.dirichlet(static_cast<std::size_t>(d));
    RealVector q(d);
    for (Index i = 0; i < d; ++i) q[i] = w[static_cast<std::size_t>(i)];
    starts.push_back(std::move(q));
  }

  double f_best = std::numeric_limits<double>::infinity();
  RealVector q_best = starts.front();
  // Sign-0 rounding can inflate the minorant by at most d * 1e-12.
  const double minorant_slack = static_cast<double>(d) * 1e-12;
  double lower_best = -std::numeric_limits<double>::infinity();
  long iterations = 0;
  bool converged = false;

  auto refresh_certificate = [&] {
    lower_best = std::max(lower_best, dual_bound_polished(m, q_best, f_best) - minorant_slack);
    converged = f_best - lower_best <= opts.tol;
  };

  // The dual certificate needs a very accurate primal point when the optimum
  // is smooth (the W-diagonal spread tracks |q - q*|), so each subgradient
  // phase is followed by a local simplex polish of q_best.
  auto local_polish = [&](long eval_cap) {
    if (eval_cap <= 8) return;
    std::vector<double> x0(q_best.data(), q_best.data() + d);
    const auto objective = [&](const std::vector<double>& x) {
      RealVector q(d);
      for (Index i = 0; i < d; ++i) q[i] = x[static_cast<std::size_t>(i)];
      q = project_simplex(q);
      ComplexMatrix xm = m;
      xm.diagonal() -= q.cast<Complex>();
      return -eigvalsh(xm).cwiseAbs().sum();
    };
    const double radius = std::max(1e-6, std::min(1e-2, f_best - std::max(lower_best, 0.0)));
    const detail::NelderMeadResult nm =
        detail::nelder_mead_max(objective, x0, radius, eval_cap);
    iterations += nm.evals;
    if (-nm.best_f < f_best) {
      f_best = -nm.best_f;
      RealVector q(d);
      for (Index i = 0; i < d; ++i) q[i] = nm.best_x[static_cast<std::size_t>(i)];
      q_best = project_simplex(q);
    }
  };

  // Newton on the smoothed objective from the dephased-diagonal start does
  // the heavy lifting; the subgradient phases below remain as a fallback for
  // the rare instance the certificate still misses.
  for (std::size_t s = 0; s < starts.size() && !converged; ++s) {
    if (iterations >= opts.max_iterations) break;
    const NewtonOutcome newton = newton_smoothed_path(m, starts[s]);
    iterations += newton.eigensolves;
    ComplexMatrix x = m;
    x.diagonal() -= newton.q.cast<Complex>();
    const double f_newton = eigvalsh(x).cwiseAbs().sum();
    ++iterations;
    if (f_newton < f_best) {
      f_best = f_newton;
      q_best = newton.q;
    }
    lower_best = std::max(lower_best, newton.dual_bound);
    converged = f_best - lower_best <= opts.tol;
    if (converged) break;
    refresh_certificate();
    if (s == 0 && !converged) {
      // One tiny local polish pass cleans up the barrier bias before giving
      // the certificate a second chance.
      local_polish(std::min(300L, opts.max_iterations - iterations));
      refresh_certificate();
    }
  }

  // Interleave short subgradient bursts, certificate refreshes and local
  // polish chunks. A tighter lower bound sharpens the Polyak step, which in
  // turn improves the next certificate.
  const long phase_budget =
      std::max(opts.max_iterations / static_cast<long>(starts.size()), 64L);
  for (std::size_t s = 0; s < starts.size(); ++s) {
    if (converged || iterations >= opts.max_iterations) break;
    RealVector q = starts[s];
    const long phase_end = std::min(iterations + phase_budget, opts.max_iterations);
    while (!converged && iterations < phase_end) {
      const double f_before = f_best;
      const double lower_before = lower_best;
      const long burst_end = std::min(iterations + 50, phase_end);
      while (iterations < burst_end) {
        ++iterations;
        const SubgradientEval ev = eval_trace_norm_objective(m, q);
        if (ev.f < f_best) {
          f_best = ev.f;
          q_best = q;
        }
        const double minorant =
            ev.f + ev.grad.minCoeff() - ev.grad.dot(q) - minorant_slack;
        lower_best = std::max(lower_best, minorant);
        if (f_best - lower_best <= opts.tol) {
          converged = true;
          break;
        }
        const double gnorm2 = ev.grad.squaredNorm();
        if (gnorm2 <= 1e-24) break;  // stationary: flat subgradient
        const double step = (ev.f - std::max(lower_best, 0.0)) / gnorm2;
        if (step <= 0.0) break;
        q = project_simplex(q - step * ev.grad);
      }
      if (converged) break;
      refresh_certificate();
      if (converged) break;
      local_polish(std::min(250L, phase_end - iterations));
      refresh_certificate();
      q = q_best;
      const bool stagnant =
          f_before - f_best <= 1e-14 && lower_best - lower_before <= 1e-14;
      if (stagnant) break;  // next restart
    }
  }

  SolverReport report;
  report.value = f_best;
  report.iterations = iterations;
  report.gap_estimate = f_best - std::max(lower_best, 0.0);
  report.converged = converged || report.gap_estimate <= opts.tol;
  return report;
}

double negativity(const DensityMatrix& rho, const std::vector<std::size_t>& b_side) {
  if (b_side.empty() || b_side.size() >= rho.subsystems()) {
    throw ArgumentError("negativity: bipartition must be a proper nonempty subsystem split");
  }
  const ComplexMatrix pt = partial_transpose(rho, b_side);
  return (trace_norm(pt) - 1.0) / 2.0;
}

double negativity_cut(const DensityMatrix& rho, std::size_t cut) {
  if (cut < 1 || cut >= rho.subsystems()) {
    throw ArgumentError("negativity: invalid bipartition cut");
  }
  std::vector<std::size_t> b_side;
  for (std::size_t s = cut; s < rho.subsystems(); ++s) b_side.push_back(s);
  return negativity(rho, b_side);
}

namespace {

double binary_entropy(double x) {
  double s = 0.0;
  if (x > 0.0) s -= x * std::log2(x);
  if (x < 1.0) s -= (1.0 - x) * std::log2(1.0 - x);
  return s;
}

ComplexMatrix matrix_sqrt_psd(const ComplexMatrix& h) {
  const Eigensystem es = eigh(h);
  RealVector root = es.values;
  for (Index i = 0; i < root.size(); ++i) root[i] = std::sqrt(std::max(root[i], 0.0));
  return es.vectors * root.asDiagonal() * es.vectors.adjoint();
}

}  // namespace

double eof_2q(const DensityMatrix& rho) {
  if (rho.dim() != 4 || rho.dims() != std::vector<Index>{2, 2}) {
    throw CapabilityError("eof_2q: requires a two-qubit state with dims (2,2)");
  }
  // sigma_y ⊗ sigma_y has entries ±1 on the anti-diagonal.
  ComplexMatrix yy = ComplexMatrix::Zero(4, 4);
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;

  const ComplexMatrix& m = rho.matrix();
  const ComplexMatrix spin_flipped = yy * m.conjugate() * yy;
  // Wootters lambdas via the Hermitian form sqrt(rho) rho~ sqrt(rho).
  const ComplexMatrix root = matrix_sqrt_psd(m);
  ComplexMatrix inner = root * spin_flipped * root;
  inner = Complex(0.5) * (inner + inner.adjoint().eval());
  RealVector mu = eigvalsh(inner);
  RealVector lambda(4);
  for (Index i = 0; i < 4; ++i) lambda[i] = std::sqrt(std::max(mu[i], 0.0));

  const double concurrence = std::max(0.0, lambda[0] - lambda[1] - lambda[2] - lambda[3]);
  return binary_entropy(0.5 * (1.0 + std::sqrt(1.0 - concurrence * concurrence)));
}

SolverReport evaluate(const MeasureDescriptor& desc, const DensityMatrix& rho,
                      const EvalContext& ctx) {
  if (rho.dim() > desc.max_dim) {
    std::ostringstream msg;
    msg << measure_name(desc.id) << ": dimension " << rho.dim() << " exceeds capability "
        << desc.max_dim;
    throw CapabilityError(msg.str());
  }
  SolverReport report;
  switch (desc.id) {
    case MeasureId::c_l1:
      report.value = c_l1(rho);
      break;
    case MeasureId::c_rel_ent:
      report.value = c_rel_ent(rho);
      break;
    case MeasureId::c_tr: {
      std::uint64_t key = 0;
      for (char c : digest(rho)) key = mix_words(key, static_cast<std::uint64_t>(c));
      RngStream rng = RngStream::derive(ctx.solver_seed, {key});
      report = c_tr(rho, ctx.solver, rng);
      break;
    }
    case MeasureId::negativity: {
      if (rho.subsystems() < 2) {
        throw CapabilityError("negativity: state has no bipartition");
      }
      report.value = negativity_cut(rho, ctx.cut);
      break;
    }
    case MeasureId::eof_2q:
      report.value = eof_2q(rho);
      break;
  }
  return report;
}

}  // namespace flagcheck
