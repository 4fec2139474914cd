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

#include "sforge/wsm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sforge/error.hpp"

namespace sforge::wsm {

namespace {

constexpr double kSumTolerance = 1e-12;

}  // namespace

void validate(const GradientWeights &w) {
  const auto &v = w.w;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw InvalidInput("gradient weight w_" + std::to_string(i + 1) + " is not finite");
    if (i == 0 && v[i] > 1.0) throw InvalidInput("gradient weight w_1 exceeds 1");
    if (v[i] < 0.0) throw InvalidInput("gradient weight w_" + std::to_string(i + 1) + " is negative");
    if (i > 0 && v[i] > v[i - 1])
      throw InvalidInput("gradient weights must be non-increasing: w_" + std::to_string(i + 1) + " > w_" +
                         std::to_string(i));
  }
}

void validate(const MergeWeights &c) {
  if (c.c.empty()) throw InvalidInput("merge weights are empty");
  double sum = 0.0;
  for (std::size_t j = 0; j < c.c.size(); ++j) {
    if (!std::isfinite(c.c[j]) || c.c[j] < 0.0)
      throw InvalidInput("merge weight c_" + std::to_string(j) + " is negative or not finite");
    sum += c.c[j];
  }
  if (std::abs(sum - 1.0) > kSumTolerance * static_cast<double>(c.c.size()))
    throw InvalidInput("merge weights must sum to 1 (got " + std::to_string(sum) + ")");
}

void validate(const CheckpointSeries &series) {
  if (series.vectors.empty()) throw InvalidInput("checkpoint series is empty");
  const std::size_t dim = series.vectors.front().size();
  if (dim == 0) throw InvalidInput("checkpoint dimension must be at least 1");
  for (std::size_t j = 0; j < series.vectors.size(); ++j)
    if (series.vectors[j].size() != dim)
      throw InvalidInput("checkpoint " + std::to_string(j) + " has dimension " +
                         std::to_string(series.vectors[j].size()) + ", expected " + std::to_string(dim));
}

MergeWeights decay_to_merge_weights(const GradientWeights &w) {
  validate(w);
  const auto &v = w.w;
  const std::size_t k = v.size();
  MergeWeights out;
  out.c.assign(k + 1, 0.0);
  if (k == 0) {
    out.c[0] = 1.0;
    return out;
  }
  out.c[0] = 1.0 - v[0];
  for (std::size_t j = 1; j < k; ++j) out.c[j] = v[j - 1] - v[j];
  out.c[k] = v[k - 1];
  return out;
}

GradientWeights merge_to_gradient_weights(const MergeWeights &c) {
  validate(c);
  const std::size_t k = c.c.size() - 1;
  GradientWeights out;
  out.w.assign(k, 0.0);
  double suffix = 0.0;
  for (std::size_t i = k; i >= 1; --i) {
    suffix += c.c[i];
    out.w[i - 1] = suffix;
  }
  // Suffix sums of a simplex are <= 1 up to rounding.
  for (double &x : out.w) x = std::min(x, 1.0);
  return out;
}

namespace {

void check_merge_inputs(const CheckpointSeries &series, const MergeWeights &c) {
  validate(series);
  validate(c);
  if (c.c.size() != series.vectors.size())
    throw InvalidInput("merge weights have " + std::to_string(c.c.size()) + " entries for " +
                       std::to_string(series.vectors.size()) + " checkpoints");
}

}  // namespace

Vector merge_checkpoints_serial(const CheckpointSeries &series, const MergeWeights &c) {
  check_merge_inputs(series, c);
  const std::size_t dim = series.dimension();
  Vector out(dim, 0.0);
  for (std::size_t j = 0; j < series.vectors.size(); ++j) {
    const double cj = c.c[j];
    const auto &v = series.vectors[j];
    for (std::size_t x = 0; x < dim; ++x) out[x] += cj * v[x];
  }
  return out;
}

Vector merge_checkpoints(const CheckpointSeries &series, const MergeWeights &c) {
  check_merge_inputs(series, c);
  const long dim = static_cast<long>(series.dimension());
  const std::size_t count = series.vectors.size();
  Vector out(static_cast<std::size_t>(dim), 0.0);
  // Each coordinate accumulates in checkpoint order, matching the serial path bit for bit.
#pragma omp parallel for schedule(static)
  for (long x = 0; x < dim; ++x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < count; ++j) acc += c.c[j] * series.vectors[j][x];
    out[x] = acc;
  }
  return out;
}

Vector top_n_average(std::span<const Checkpoint> checkpoints, std::size_t n) {
  if (checkpoints.empty()) throw InvalidInput("top_n_average: no checkpoints");
  if (n < 1 || n > checkpoints.size())
    throw InvalidInput("top_n_average: n = " + std::to_string(n) + " out of range [1, " +
                       std::to_string(checkpoints.size()) + "]");
  const std::size_t dim = checkpoints.front().params.size();
  for (const auto &cp : checkpoints)
    if (cp.params.size() != dim) throw InvalidInput("top_n_average: checkpoint dimensions differ");

  std::vector<std::size_t> order(checkpoints.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (checkpoints[a].score != checkpoints[b].score) return checkpoints[a].score > checkpoints[b].score;
    return a > b;
  });

  Vector out(dim, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto &v = checkpoints[order[r]].params;
    for (std::size_t x = 0; x < dim; ++x) out[x] += v[x];
  }
  for (double &x : out) x /= static_cast<double>(n);
  return out;
}

EquivalenceReport simulate_equivalence(std::span<const Vector> gradients, const Vector &theta_n,
                                       const GradientWeights &w) {
  validate(w);
  const std::size_t k = gradients.size();
  if (w.w.size() != k)
    throw InvalidInput("simulate_equivalence: " + std::to_string(k) + " gradients but " +
                       std::to_string(w.w.size()) + " weights");
  const std::size_t dim = theta_n.size();
  if (dim == 0) throw InvalidInput("simulate_equivalence: empty parameter vector");
  for (std::size_t i = 0; i < k; ++i)
    if (gradients[i].size() != dim)
      throw InvalidInput("simulate_equivalence: gradient " + std::to_string(i) + " has wrong dimension");

  CheckpointSeries series;
  series.vectors.reserve(k + 1);
  series.vectors.push_back(theta_n);
  for (std::size_t j = 1; j <= k; ++j) {
    Vector next = series.vectors.back();
    for (std::size_t x = 0; x < dim; ++x) next[x] -= gradients[j - 1][x];
    series.vectors.push_back(std::move(next));
  }

  EquivalenceReport rep;
  rep.merged = merge_checkpoints(series, decay_to_merge_weights(w));
  rep.decayed = theta_n;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t x = 0; x < dim; ++x) rep.decayed[x] -= w.w[i] * gradients[i][x];
  for (std::size_t x = 0; x < dim; ++x)
    rep.max_abs_diff = std::max(rep.max_abs_diff, std::abs(rep.merged[x] - rep.decayed[x]));
  return rep;
}

}  // namespace sforge::wsm
