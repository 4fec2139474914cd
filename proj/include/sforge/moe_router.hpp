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

#ifndef SFORGE_MOE_ROUTER_HPP_
#define SFORGE_MOE_ROUTER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sforge::router {

struct RouterConfig {
  std::size_t n_experts = 256;
  std::size_t top_k = 8;
  std::size_t n_groups = 8;
  std::size_t top_groups = 4;
  double gate_scale = 2.5;
  double update_rate = 1e-3;
  std::size_t alignment = 16;

  void validate() const;
  std::size_t group_size() const { return n_experts / n_groups; }
  /// How many of a group's best biased scores are summed into its group
  /// score: ceil(top_k / top_groups), capped at the group size.
  std::size_t group_score_width() const;
};

struct BiasState {
  std::vector<double> b;

  static BiasState zeros(std::size_t n) { return {std::vector<double>(n, 0.0)}; }
  /// Compensated sum of the biases.
  double total() const;
};

/// Routing of a single token: top_k distinct experts, ordered by biased
/// score, and their scaled gate values.
struct RoutingDecision {
  std::vector<std::uint32_t> experts;
  std::vector<double> gates;
};

struct LoadStats {
  std::vector<std::uint64_t> counts;
  /// Violation error e_i = mean count - count_i: positive for underloaded
  /// experts, so the sign update raises their bias.
  std::vector<double> violation;
  double mean_count = 0.0;
  std::uint64_t max_count = 0;
  std::uint64_t min_count = 0;
  double max_violation_ratio = 0.0;
};

/// Token x expert routing map with the router probability of every entry.
struct RoutingMap {
  std::size_t tokens = 0;
  std::size_t experts = 0;
  std::vector<std::uint8_t> selected;
  std::vector<double> prob;

  RoutingMap() = default;
  RoutingMap(std::size_t n_tokens, std::size_t n_experts)
      : tokens(n_tokens), experts(n_experts), selected(n_tokens * n_experts, 0), prob(n_tokens * n_experts, 0.0) {}

  bool is_selected(std::size_t t, std::size_t e) const { return selected[t * experts + e] != 0; }
  double probability(std::size_t t, std::size_t e) const { return prob[t * experts + e]; }
  std::vector<std::uint64_t> counts() const;
};

struct PaddingResult {
  RoutingMap map;
  std::vector<std::uint64_t> counts;
  std::size_t added = 0;
};

RoutingDecision route_topk(std::span<const double> scores, const BiasState &bias, const RouterConfig &cfg);

/// Routes a tokens x n_experts row-major score matrix, parallel over tokens.
std::vector<RoutingDecision> route_batch(std::span<const double> scores, const BiasState &bias,
                                         const RouterConfig &cfg);
/// Single-threaded reference for route_batch.
std::vector<RoutingDecision> route_batch_serial(std::span<const double> scores, const BiasState &bias,
                                                const RouterConfig &cfg);

/// b_i += u * (sign(e_i) - mean(sign(e))), with sign(0) = 0.
BiasState update_bias(const BiasState &bias, const LoadStats &stats, double u);

LoadStats load_stats(std::span<const RoutingDecision> decisions, std::size_t n_experts);

/// Makes every expert's token count a multiple of `alignment` by enabling
/// unselected entries whose routing probability is exactly zero (lowest
/// token index first). Throws CapacityError if an expert runs out of such
/// slots.
PaddingResult pad_routing_map(std::span<const std::uint64_t> counts, const RoutingMap &map, std::size_t alignment);

/// Per-expert score offsets used by simulate_balance: a linear ramp over
/// [-skew, +skew] assigned to experts in a seeded random order.
std::vector<double> skew_offsets(std::size_t n_experts, double skew, std::uint64_t seed);

/// Routes `tokens_per_step` tokens per step with N(0,1) scores plus the fixed
/// skew offsets, updating the bias after each step. Entry s holds the load
/// of step s + 1 (routed with the bias before that step's update).
std::vector<LoadStats> simulate_balance(const RouterConfig &cfg, std::size_t steps, std::size_t tokens_per_step,
                                        double skew, std::uint64_t seed);

}  // namespace sforge::router

#endif  // SFORGE_MOE_ROUTER_HPP_
