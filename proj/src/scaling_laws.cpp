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

#include "sforge/scaling_laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "sforge/error.hpp"

namespace sforge::scaling {

namespace {

void require_positive_finite(double v, const char *what) {
  if (!std::isfinite(v) || v <= 0.0) throw InvalidInput(std::string(what) + " must be positive and finite");
}

double mean_of(const std::vector<double> &v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double PowerLawFit::operator()(double compute) const { return coefficient * std::pow(compute, exponent); }

double huber_loss(double residual, double delta) {
  if (!std::isfinite(residual)) throw InvalidInput("huber_loss: residual is not finite");
  if (!(delta > 0.0)) throw InvalidInput("huber_loss: delta must be positive");
  const double r = std::abs(residual);
  if (r <= delta) return 0.5 * r * r;
  return delta * (r - 0.5 * delta);
}

PowerLawFit fit_power_law(std::span<const ScalingPoint> points, double delta, const BfgsOptions &opts) {
  if (points.size() < 2) throw InvalidInput("fit_power_law: need at least 2 points");
  if (!(delta > 0.0)) throw InvalidInput("fit_power_law: delta must be positive");

  std::vector<double> lc, ly;
  std::set<double> distinct;
  for (const auto &p : points) {
    require_positive_finite(p.compute, "fit_power_law: compute");
    require_positive_finite(p.value, "fit_power_law: value");
    lc.push_back(std::log(p.compute));
    ly.push_back(std::log(p.value));
    distinct.insert(p.compute);
  }
  if (distinct.size() < 2) throw InvalidInput("fit_power_law: need at least 2 distinct compute values");

  // Optimize (u, e) with log y = u + e * (log C - c0); log coefficient = u - e * c0.
  const double c0 = mean_of(lc);
  const double y0 = mean_of(ly);
  Objective f = [&](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < lc.size(); ++i) s += huber_loss(ly[i] - (x[0] + x[1] * (lc[i] - c0)), delta);
    return s;
  };

  std::vector<std::vector<double>> starts;
  for (double du : {-1.0, 0.0, 1.0})
    for (double e : {-1.0, 0.0, 1.0}) starts.push_back({y0 + du, e});

  BfgsResult best;
  try {
    best = minimize_multistart(f, starts, opts);
  } catch (const ConvergenceError &err) {
    const auto &x = err.best_params();
    throw ConvergenceError(std::string("fit_power_law: ") + err.what(),
                           {std::exp(x[0] - x[1] * c0), x[1]}, err.best_objective());
  }

  PowerLawFit fit;
  fit.exponent = best.x[1];
  fit.coefficient = std::exp(best.x[0] - best.x[1] * c0);
  fit.residual = best.objective;
  return fit;
}

HyperParams predict_hparams(const PowerLawFit &lr_fit, const PowerLawFit &bs_fit, double compute) {
  require_positive_finite(compute, "predict_hparams: compute");
  HyperParams hp;
  hp.learning_rate = lr_fit(compute);
  const double bs = bs_fit(compute);
  if (!std::isfinite(bs) || bs <= 0.0) throw InvalidInput("predict_hparams: batch-size law is not positive");
  hp.batch_size = static_cast<std::uint64_t>(std::max(1.0, std::ceil(bs)));
  return hp;
}

Allocation predict_allocation(const PowerLawFit &m_fit, const PowerLawFit &d_fit, double compute) {
  require_positive_finite(compute, "predict_allocation: compute");
  Allocation a;
  a.flops_per_token = m_fit(compute);
  a.tokens = d_fit(compute);
  if (!(a.flops_per_token > 0.0) || !(a.tokens > 0.0))
    throw InvalidInput("predict_allocation: allocation laws must be positive");
  if (std::abs(a.flops_per_token * a.tokens - compute) > 0.01 * compute) {
    a.tokens = compute / a.flops_per_token;
    a.adjusted = true;
  }
  return a;
}

double activation_transform(double activation_ratio, double saturation) {
  if (!(activation_ratio > 0.0) || activation_ratio > 1.0)
    throw InvalidInput("activation ratio must lie in (0, 1]");
  require_positive_finite(saturation, "saturation");
  if (activation_ratio == 1.0) return 1.0;
  return (saturation + 1.0) / (saturation * activation_ratio + 1.0);
}

namespace {

void validate_arch(const ArchPoint &p) {
  require_positive_finite(p.compute, "compute");
  if (!(p.activation_ratio > 0.0) || p.activation_ratio > 1.0)
    throw InvalidInput("activation ratio must lie in (0, 1]");
  if (!std::isfinite(p.granularity) || p.granularity < 1.0) throw InvalidInput("granularity must be >= 1");
}

double el_exponent(const ElLawParams &prm, double log_c, double log_g) {
  return prm.a + prm.d * log_c + prm.gamma * log_g * log_g + prm.beta * log_g;
}

}  // namespace

double el_predict(const ElLawParams &params, const ArchPoint &arch) {
  validate_arch(arch);
  const double a_hat = activation_transform(arch.activation_ratio, params.saturation);
  if (a_hat == 1.0) return 1.0;
  return std::pow(a_hat, el_exponent(params, std::log(arch.compute), std::log(arch.granularity)));
}

double el_residual(const ElLawParams &params, std::span<const ArchPoint> points, double delta) {
  double s = 0.0;
  for (const auto &p : points) {
    require_positive_finite(p.observed, "observed EL");
    const double log_pred = std::log(activation_transform(p.activation_ratio, params.saturation)) *
                            el_exponent(params, std::log(p.compute), std::log(p.granularity));
    s += huber_loss(std::log(p.observed) - log_pred, delta);
  }
  return s;
}

ElFit fit_el_law(std::span<const ArchPoint> points, double delta, double saturation, const BfgsOptions &opts) {
  if (points.size() < 5) throw InvalidInput("fit_el_law: need at least 5 points");
  if (!(delta > 0.0)) throw InvalidInput("fit_el_law: delta must be positive");
  require_positive_finite(saturation, "fit_el_law: saturation");

  std::set<double> da, dg, dc;
  std::vector<double> log_ahat, lc, lg, target;
  for (const auto &p : points) {
    validate_arch(p);
    require_positive_finite(p.observed, "fit_el_law: observed EL");
    da.insert(p.activation_ratio);
    dg.insert(p.granularity);
    dc.insert(p.compute);
    log_ahat.push_back(std::log(activation_transform(p.activation_ratio, saturation)));
    lc.push_back(std::log(p.compute));
    lg.push_back(std::log(p.granularity));
    target.push_back(std::log(p.observed));
  }
  if (da.size() < 2 || dg.size() < 2 || dc.size() < 2)
    throw InvalidInput("fit_el_law: points must span at least 2 distinct values of A, G and C");

  // Centered parametrization: exponent = q0 + q1*(lc-c0) + q2*(lg-g0) + q3*(lg-g0)^2,
  // a linear reparametrization of (a, d, beta, gamma).
  const double c0 = mean_of(lc);
  const double g0 = mean_of(lg);
  Objective f = [&](std::span<const double> q) {
    double s = 0.0;
    for (std::size_t i = 0; i < lc.size(); ++i) {
      const double x = lc[i] - c0;
      const double y = lg[i] - g0;
      s += huber_loss(target[i] - log_ahat[i] * (q[0] + q[1] * x + q[2] * y + q[3] * y * y), delta);
    }
    return s;
  };
  auto to_params = [&](std::span<const double> q) {
    ElLawParams p;
    p.saturation = saturation;
    p.gamma = q[3];
    p.beta = q[2] - 2.0 * p.gamma * g0;
    p.d = q[1];
    p.a = q[0] - p.d * c0 - p.beta * g0 - p.gamma * g0 * g0;
    return p;
  };

  std::vector<std::vector<double>> starts;
  for (double q0 : {0.0, 0.5, 1.0})
    for (double q1 : {-0.05, 0.0, 0.05})
      for (double q2 : {-0.5, 0.0, 0.5})
        for (double q3 : {-0.1, 0.0, 0.1}) starts.push_back({q0, q1, q2, q3});

  BfgsResult best;
  try {
    best = minimize_multistart(f, starts, opts);
  } catch (const ConvergenceError &err) {
    const ElLawParams p = to_params(err.best_params());
    throw ConvergenceError(std::string("fit_el_law: ") + err.what(), {p.a, p.d, p.beta, p.gamma},
                           err.best_objective());
  }
  return {to_params(best.x), best.objective};
}

double invert_power_law(const PowerLawFit &law, double target) {
  require_positive_finite(target, "invert_power_law: target");
  require_positive_finite(law.coefficient, "invert_power_law: coefficient");
  if (!std::isfinite(law.exponent) || law.exponent <= 0.0)
    throw InvalidInput("invert_power_law: law must be increasing (exponent > 0)");

  // log law(C) = log coefficient + exponent * log C is increasing in log C.
  const double log_coef = std::log(law.coefficient);
  const double log_target = std::log(target);
  double lo = -2000.0, hi = 2000.0;
  if (log_coef + law.exponent * lo > log_target || log_coef + law.exponent * hi < log_target)
    throw InvalidInput("invert_power_law: target outside the invertible range");
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (log_coef + law.exponent * mid < log_target)
      lo = mid;
    else
      hi = mid;
  }
  const double lhs = std::abs(log_coef + law.exponent * lo - log_target);
  const double rhs = std::abs(log_coef + law.exponent * hi - log_target);
  return std::exp(lhs <= rhs ? lo : hi);
}

WindTunnelPlan plan_wind_tunnel(double min_flops_per_token, double max_flops_per_token, std::size_t n_models,
                                const PowerLawFit &lr_fit, const PowerLawFit &bs_fit, const PowerLawFit &m_fit,
                                const PowerLawFit &d_fit) {
  if (n_models < 2) throw InvalidInput("plan_wind_tunnel: need at least 2 models");
  require_positive_finite(min_flops_per_token, "plan_wind_tunnel: min size");
  require_positive_finite(max_flops_per_token, "plan_wind_tunnel: max size");
  if (!(min_flops_per_token < max_flops_per_token)) throw InvalidInput("plan_wind_tunnel: need min < max");
  if (!(m_fit.exponent > 0.0))
    throw InvalidInput("plan_wind_tunnel: model-size law is not invertible (exponent <= 0)");

  const double ratio = std::pow(max_flops_per_token / min_flops_per_token, 1.0 / static_cast<double>(n_models - 1));
  WindTunnelPlan plan;
  for (std::size_t i = 0; i < n_models; ++i) {
    WindTunnelEntry e;
    e.flops_per_token = min_flops_per_token * std::pow(ratio, static_cast<double>(i));
    const double compute = invert_power_law(m_fit, e.flops_per_token);
    Allocation alloc = predict_allocation(m_fit, d_fit, compute);
    e.train_tokens = alloc.adjusted ? compute / e.flops_per_token : alloc.tokens;
    e.total_compute = e.flops_per_token * e.train_tokens;
    const HyperParams hp = predict_hparams(lr_fit, bs_fit, e.total_compute);
    e.learning_rate = hp.learning_rate;
    e.batch_size = hp.batch_size;
    plan.entries.push_back(e);
  }
  return plan;
}

std::vector<LossPoint> filter_near_optimal(std::span<const LossPoint> points, double tolerance) {
  if (!(tolerance >= 0.0)) throw InvalidInput("filter_near_optimal: tolerance must be non-negative");
  std::map<double, double> best;
  for (const auto &p : points) {
    auto [it, inserted] = best.emplace(p.compute, p.loss);
    if (!inserted) it->second = std::min(it->second, p.loss);
  }
  std::vector<LossPoint> kept;
  for (const auto &p : points)
    if (p.loss <= best[p.compute] * (1.0 + tolerance)) kept.push_back(p);
  return kept;
}

}  // namespace sforge::scaling
