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

#ifndef SFORGE_WSM_HPP_
#define SFORGE_WSM_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace sforge::wsm {

using Vector = std::vector<double>;

/// Gradient decay coefficients w_1..w_k with 1 >= w_1 >= ... >= w_k >= 0.
struct GradientWeights {
  std::vector<double> w;
};

/// Checkpoint weights c_0..c_k, non-negative, summing to one.
struct MergeWeights {
  std::vector<double> c;
};

/// Checkpoints theta_n .. theta_{n+k}, all of the same dimension.
struct CheckpointSeries {
  std::uint64_t base_index = 0;
  std::vector<Vector> vectors;

  std::size_t dimension() const { return vectors.empty() ? 0 : vectors.front().size(); }
};

struct Checkpoint {
  Vector params;
  double score = 0.0;
};

struct EquivalenceReport {
  Vector merged;
  Vector decayed;
  double max_abs_diff = 0.0;
};

void validate(const GradientWeights &w);
void validate(const MergeWeights &c);
void validate(const CheckpointSeries &series);

/// c_k = w_k, c_j = w_j - w_{j+1}, c_0 = 1 - w_1.
MergeWeights decay_to_merge_weights(const GradientWeights &w);

/// w_i = sum_{j >= i} c_j.
GradientWeights merge_to_gradient_weights(const MergeWeights &c);

/// Elementwise sum_j c_j * theta_{n+j}, parallel over coordinates.
Vector merge_checkpoints(const CheckpointSeries &series, const MergeWeights &c);
/// Single-threaded reference for merge_checkpoints.
Vector merge_checkpoints_serial(const CheckpointSeries &series, const MergeWeights &c);

/// Uniform average of the n highest-scoring checkpoints; on equal scores the
/// later checkpoint wins.
Vector top_n_average(std::span<const Checkpoint> checkpoints, std::size_t n);

/// Builds theta_{n+j} = theta_n - sum_{i<=j} g_{n+i-1} from fixed
/// (learning-rate scaled) steps, then compares merging with
/// decay_to_merge_weights(w) against the decayed update directly.
EquivalenceReport simulate_equivalence(std::span<const Vector> gradients, const Vector &theta_n,
                                       const GradientWeights &w);

}  // namespace sforge::wsm

#endif  // SFORGE_WSM_HPP_
