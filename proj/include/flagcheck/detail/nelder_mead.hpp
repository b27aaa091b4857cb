#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace flagcheck::detail {

struct NelderMeadResult {
  std::vector<double> best_x;
  double best_f = -std::numeric_limits<double>::infinity();
  long evals = 0;
};

// Standard Nelder-Mead simplex ascent (maximization). Deterministic; stops
// after max_evals objective calls.
inline NelderMeadResult nelder_mead_max(
    const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x0,
    double step, long max_evals) {
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
  // An iteration spends up to two evaluations before the shrink loop's own
  // per-evaluation guard kicks in; budget them so max_evals is a hard cap.
  while (out.evals + 2 <= max_evals) {
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

}  // namespace flagcheck::detail
