/**
 * Copyright 2026 The Sparse Forge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sforge/bfgs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sforge/error.hpp"

namespace sforge {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Dense inverse-Hessian approximation, row-major n x n.
struct InverseHessian {
  std::size_t n;
  std::vector<double> h;

  explicit InverseHessian(std::size_t dim) : n(dim), h(dim * dim, 0.0) { reset(1.0); }

  void reset(double diag) {
    std::fill(h.begin(), h.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) h[i * n + i] = diag;
  }

  std::vector<double> apply(std::span<const double> v) const {
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out[i] += h[i * n + j] * v[j];
    return out;
  }

  // H+ = (I - rho s y^T) H (I - rho y s^T) + rho s s^T
  void update(std::span<const double> s, std::span<const double> y, double sy) {
    const double rho = 1.0 / sy;
    const std::vector<double> hy = apply(y);
    const double yhy = dot(y, hy);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        h[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
  }
};

}  // namespace

std::vector<double> central_gradient(const Objective &f, std::span<const double> x, double fd_step) {
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = fd_step * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

BfgsResult minimize_bfgs(const Objective &f, std::vector<double> x0, const BfgsOptions &opts) {
  const std::size_t n = x0.size();
  if (n == 0) throw InvalidInput("minimize_bfgs: empty parameter vector");

  BfgsResult res;
  res.x = std::move(x0);
  res.objective = f(res.x);
  if (!std::isfinite(res.objective)) throw InvalidInput("minimize_bfgs: objective is not finite at the start point");

  InverseHessian hinv(n);
  bool fresh = true;  // hinv is a (scaled) identity
  std::vector<double> g = central_gradient(f, res.x, opts.fd_step);
  std::vector<double> trial(n);

  for (int it = 0; it < opts.max_iterations; ++it) {
    res.iterations = it;
    if (inf_norm(g) < opts.gradient_tolerance) {
      res.status = BfgsStatus::converged;
      return res;
    }

    std::vector<double> dir = hinv.apply(g);
    for (double &d : dir) d = -d;
    double slope = dot(g, dir);
    if (!(slope < 0.0)) {
      hinv.reset(1.0);
      fresh = true;
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      slope = dot(g, dir);
    }

    // Armijo backtracking; on failure retry once along steepest descent.
    double step = 1.0;
    double f_trial = 0.0;
    bool accepted = false;
    while (true) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = res.x[i] + step * dir[i];
      f_trial = f(trial);
      if (std::isfinite(f_trial) && f_trial <= res.objective + opts.armijo_c * step * slope) {
        accepted = true;
        break;
      }
      step *= opts.shrink;
      if (step < opts.min_step) break;
    }
    if (!accepted) {
      if (fresh) {
        res.status = BfgsStatus::stalled;
        return res;
      }
      hinv.reset(1.0);
      fresh = true;
      continue;
    }

    std::vector<double> s(n), y(n);
    std::vector<double> g_new = central_gradient(f, trial, opts.fd_step);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = trial[i] - res.x[i];
      y[i] = g_new[i] - g[i];
    }
    res.x = trial;
    res.objective = f_trial;
    g = std::move(g_new);

    const double sy = dot(s, y);
    const double yy = dot(y, y);
    if (sy > 1e-14 * std::sqrt(dot(s, s) * yy) && sy > 0.0) {
      if (fresh) {
        hinv.reset(sy / yy);
        fresh = false;
      }
      hinv.update(s, y, sy);
    }
  }

  res.iterations = opts.max_iterations;
  res.status = inf_norm(g) < opts.gradient_tolerance ? BfgsStatus::converged : BfgsStatus::max_iterations;
  return res;
}

BfgsResult minimize_multistart(const Objective &f, const std::vector<std::vector<double>> &starts,
                               const BfgsOptions &opts) {
  if (starts.empty()) throw InvalidInput("minimize_multistart: no start points");
  std::vector<BfgsResult> runs(starts.size());
  const long count = static_cast<long>(starts.size());

#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) runs[i] = minimize_bfgs(f, starts[i], opts);

  std::size_t best = runs.size();
  std::size_t best_any = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].objective < runs[best_any].objective) best_any = i;
    if (runs[i].terminated() && (best == runs.size() || runs[i].objective < runs[best].objective)) best = i;
  }
  if (best == runs.size())
    throw ConvergenceError("no start converged within " + std::to_string(opts.max_iterations) + " iterations",
                           runs[best_any].x, runs[best_any].objective);
  return runs[best];
}

}  // namespace sforge
