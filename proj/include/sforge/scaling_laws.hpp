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

#ifndef SFORGE_SCALING_LAWS_HPP_
#define SFORGE_SCALING_LAWS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "sforge/bfgs.hpp"

namespace sforge::scaling {

inline constexpr double kDefaultHuberDelta = 1e-3;
inline constexpr double kDefaultSaturation = 255.0;
/// Loss within this fraction of the per-budget minimum counts as near-optimal.
inline constexpr double kNearOptimalTolerance = 0.0025;

/// y(C) = coefficient * C^exponent, C in FLOPs.
struct PowerLawFit {
  double coefficient = 1.0;
  double exponent = 0.0;
  double residual = 0.0;

  double operator()(double compute) const;
};

struct ScalingPoint {
  double compute = 0.0;
  double value = 0.0;
};

/// One architecture/compute observation; `observed` is the measured EL for
/// EL fits.
struct ArchPoint {
  double compute = 0.0;
  double activation_ratio = 1.0;
  double granularity = 1.0;
  double observed = 1.0;
};

struct ElLawParams {
  double a = 0.0;
  double d = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double saturation = kDefaultSaturation;
};

struct ElFit {
  ElLawParams params;
  double residual = 0.0;
};

struct HyperParams {
  double learning_rate = 0.0;
  std::uint64_t batch_size = 0;
};

struct Allocation {
  double flops_per_token = 0.0;
  double tokens = 0.0;
  /// True when tokens were rescaled so that flops_per_token * tokens == C.
  bool adjusted = false;
};

struct WindTunnelEntry {
  double flops_per_token = 0.0;
  double train_tokens = 0.0;
  double learning_rate = 0.0;
  std::uint64_t batch_size = 0;
  double total_compute = 0.0;
};

struct WindTunnelPlan {
  std::vector<WindTunnelEntry> entries;
};

/// A candidate configuration at some compute budget, used for the
/// near-optimal filter.
struct LossPoint {
  double compute = 0.0;
  double value = 0.0;
  double loss = 0.0;
};

double huber_loss(double residual, double delta);

PowerLawFit fit_power_law(std::span<const ScalingPoint> points, double delta = kDefaultHuberDelta,
                          const BfgsOptions &opts = {});

HyperParams predict_hparams(const PowerLawFit &lr_fit, const PowerLawFit &bs_fit, double compute);

Allocation predict_allocation(const PowerLawFit &m_fit, const PowerLawFit &d_fit, double compute);

/// Saturating activation-ratio transform (S+1)/(S*A+1); equals 1 at A = 1.
double activation_transform(double activation_ratio, double saturation);

double el_predict(const ElLawParams &params, const ArchPoint &arch);

ElFit fit_el_law(std::span<const ArchPoint> points, double delta = kDefaultHuberDelta,
                 double saturation = kDefaultSaturation, const BfgsOptions &opts = {});

/// Objective value of `params` on `points` (sum of Huber losses of log-EL
/// residuals).
double el_residual(const ElLawParams &params, std::span<const ArchPoint> points, double delta = kDefaultHuberDelta);

/// Smallest compute C with law(C) = target, found by bisection in log space.
/// The law must be increasing (exponent > 0).
double invert_power_law(const PowerLawFit &law, double target);

WindTunnelPlan plan_wind_tunnel(double min_flops_per_token, double max_flops_per_token, std::size_t n_models,
                                const PowerLawFit &lr_fit, const PowerLawFit &bs_fit, const PowerLawFit &m_fit,
                                const PowerLawFit &d_fit);

/// Keeps points whose loss is within `tolerance` (relative) of the minimum
/// loss observed at the same compute budget.
std::vector<LossPoint> filter_near_optimal(std::span<const LossPoint> points,
                                           double tolerance = kNearOptimalTolerance);

}  // namespace sforge::scaling

#endif  // SFORGE_SCALING_LAWS_HPP_
