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

#include "sforge/moe_router.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "sforge/error.hpp"
#include "sforge/rng.hpp"

namespace sforge::router {

void RouterConfig::validate() const {
  if (n_experts == 0 || n_groups == 0) throw InvalidInput("router: n_experts and n_groups must be positive");
  if (n_experts % n_groups != 0) throw InvalidInput("router: n_experts must be divisible by n_groups");
  if (top_groups == 0 || top_groups > n_groups) throw InvalidInput("router: top_groups must lie in [1, n_groups]");
  if (top_k == 0 || top_k > group_size() * top_groups)
    throw InvalidInput("router: top_k must lie in [1, group_size * top_groups]");
  if (!(gate_scale > 0.0) || !std::isfinite(gate_scale)) throw InvalidInput("router: gate_scale must be positive");
  if (!(update_rate >= 0.0) || !std::isfinite(update_rate))
    throw InvalidInput("router: update_rate must be non-negative");
  if (alignment == 0) throw InvalidInput("router: alignment must be at least 1");
}

std::size_t RouterConfig::group_score_width() const {
  return std::min(group_size(), (top_k + top_groups - 1) / top_groups);
}

double BiasState::total() const {
  // Neumaier summation.
  double sum = 0.0, comp = 0.0;
  for (double x : b) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

std::vector<std::uint64_t> RoutingMap::counts() const {
  std::vector<std::uint64_t> c(experts, 0);
  for (std::size_t t = 0; t < tokens; ++t)
    for (std::size_t e = 0; e < experts; ++e) c[e] += selected[t * experts + e] ? 1 : 0;
  return c;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Descending by value, ascending by index on ties.
struct ByScore {
  const double *v;
  bool operator()(std::uint32_t a, std::uint32_t b) const { return v[a] != v[b] ? v[a] > v[b] : a < b; }
};

RoutingDecision route_one(const double *scores, const double *bias, const RouterConfig &cfg,
                          std::vector<double> &biased, std::vector<std::uint32_t> &scratch) {
  const std::size_t n = cfg.n_experts;
  const std::size_t gsize = cfg.group_size();
  const std::size_t width = cfg.group_score_width();

  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(scores[i])) throw InvalidInput("route_topk: score " + std::to_string(i) + " is not finite");
    biased[i] = scores[i] + bias[i];
  }

  std::vector<double> group_score(cfg.n_groups, 0.0);
  scratch.resize(gsize);
  for (std::size_t g = 0; g < cfg.n_groups; ++g) {
    for (std::size_t j = 0; j < gsize; ++j) scratch[j] = static_cast<std::uint32_t>(g * gsize + j);
    std::partial_sort(scratch.begin(), scratch.begin() + static_cast<long>(width), scratch.end(),
                      ByScore{biased.data()});
    double s = 0.0;
    for (std::size_t j = 0; j < width; ++j) s += biased[scratch[j]];
    group_score[g] = s;
  }

  std::vector<std::uint32_t> groups(cfg.n_groups);
  std::iota(groups.begin(), groups.end(), 0u);
  std::partial_sort(groups.begin(), groups.begin() + static_cast<long>(cfg.top_groups), groups.end(),
                    ByScore{group_score.data()});

  scratch.clear();
  for (std::size_t r = 0; r < cfg.top_groups; ++r)
    for (std::size_t j = 0; j < gsize; ++j) scratch.push_back(static_cast<std::uint32_t>(groups[r] * gsize + j));
  std::partial_sort(scratch.begin(), scratch.begin() + static_cast<long>(cfg.top_k), scratch.end(),
                    ByScore{biased.data()});

  RoutingDecision d;
  d.experts.assign(scratch.begin(), scratch.begin() + static_cast<long>(cfg.top_k));
  d.gates.resize(cfg.top_k);
  double norm = 0.0;
  for (std::size_t j = 0; j < cfg.top_k; ++j) {
    d.gates[j] = sigmoid(scores[d.experts[j]]);
    norm += d.gates[j];
  }
  for (double &g : d.gates) g = g / norm * cfg.gate_scale;
  return d;
}

void check_shapes(std::span<const double> scores, const BiasState &bias, const RouterConfig &cfg) {
  cfg.validate();
  if (bias.b.size() != cfg.n_experts)
    throw InvalidInput("router: bias has " + std::to_string(bias.b.size()) + " entries, expected " +
                       std::to_string(cfg.n_experts));
  if (scores.size() % cfg.n_experts != 0) throw InvalidInput("router: score matrix width does not match n_experts");
}

}  // namespace

RoutingDecision route_topk(std::span<const double> scores, const BiasState &bias, const RouterConfig &cfg) {
  check_shapes(scores, bias, cfg);
  if (scores.size() != cfg.n_experts) throw InvalidInput("route_topk: expected one score per expert");
  std::vector<double> biased(cfg.n_experts);
  std::vector<std::uint32_t> scratch;
  return route_one(scores.data(), bias.b.data(), cfg, biased, scratch);
}

std::vector<RoutingDecision> route_batch_serial(std::span<const double> scores, const BiasState &bias,
                                                const RouterConfig &cfg) {
  check_shapes(scores, bias, cfg);
  const std::size_t tokens = scores.size() / cfg.n_experts;
  std::vector<RoutingDecision> out(tokens);
  std::vector<double> biased(cfg.n_experts);
  std::vector<std::uint32_t> scratch;
  for (std::size_t t = 0; t < tokens; ++t)
    out[t] = route_one(scores.data() + t * cfg.n_experts, bias.b.data(), cfg, biased, scratch);
  return out;
}

std::vector<RoutingDecision> route_batch(std::span<const double> scores, const BiasState &bias,
                                         const RouterConfig &cfg) {
  check_shapes(scores, bias, cfg);
  for (double s : scores)
    if (!std::isfinite(s)) throw InvalidInput("route_batch: score matrix contains a non-finite value");
  const long tokens = static_cast<long>(scores.size() / cfg.n_experts);
  std::vector<RoutingDecision> out(static_cast<std::size_t>(tokens));
#pragma omp parallel
  {
    std::vector<double> biased(cfg.n_experts);
    std::vector<std::uint32_t> scratch;
#pragma omp for schedule(static)
    for (long t = 0; t < tokens; ++t)
      out[t] = route_one(scores.data() + t * cfg.n_experts, bias.b.data(), cfg, biased, scratch);
  }
  return out;
}

BiasState update_bias(const BiasState &bias, const LoadStats &stats, double u) {
  const std::size_t n = bias.b.size();
  if (stats.violation.size() != n)
    throw InvalidInput("update_bias: " + std::to_string(stats.violation.size()) + " violations for " +
                       std::to_string(n) + " biases");
  if (!(u >= 0.0) || !std::isfinite(u)) throw InvalidInput("update_bias: update rate must be non-negative");
  if (n == 0) return bias;

  std::vector<int> sign(n);
  long sign_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = stats.violation[i];
    sign[i] = (e > 0.0) - (e < 0.0);
    sign_sum += sign[i];
  }
  // The three possible increments sum to exactly zero in real arithmetic;
  // n * sign_i - sign_sum is an exact integer, so only the final scaling rounds.
  const double scale = u / static_cast<double>(n);
  BiasState out = bias;
  for (std::size_t i = 0; i < n; ++i)
    out.b[i] += scale * static_cast<double>(static_cast<long>(n) * sign[i] - sign_sum);
  return out;
}

LoadStats load_stats(std::span<const RoutingDecision> decisions, std::size_t n_experts) {
  if (decisions.empty()) throw InvalidInput("load_stats: no routing decisions");
  if (n_experts == 0) throw InvalidInput("load_stats: n_experts must be positive");
  LoadStats st;
  st.counts.assign(n_experts, 0);
  std::uint64_t total = 0;
  for (const auto &d : decisions) {
    for (auto e : d.experts) {
      if (e >= n_experts) throw InvalidInput("load_stats: expert index " + std::to_string(e) + " out of range");
      ++st.counts[e];
      ++total;
    }
  }
  st.mean_count = static_cast<double>(total) / static_cast<double>(n_experts);
  st.violation.resize(n_experts);
  for (std::size_t i = 0; i < n_experts; ++i) st.violation[i] = st.mean_count - static_cast<double>(st.counts[i]);
  st.max_count = *std::max_element(st.counts.begin(), st.counts.end());
  st.min_count = *std::min_element(st.counts.begin(), st.counts.end());
  st.max_violation_ratio = st.mean_count > 0.0 ? static_cast<double>(st.max_count) / st.mean_count : 0.0;
  return st;
}

PaddingResult pad_routing_map(std::span<const std::uint64_t> counts, const RoutingMap &map, std::size_t alignment) {
  if (alignment == 0) throw InvalidInput("pad_routing_map: alignment must be at least 1");
  if (map.selected.size() != map.tokens * map.experts || map.prob.size() != map.tokens * map.experts)
    throw InvalidInput("pad_routing_map: routing map storage does not match its shape");
  if (counts.size() != map.experts)
    throw InvalidInput("pad_routing_map: " + std::to_string(counts.size()) + " counts for " +
                       std::to_string(map.experts) + " experts");
  const auto actual = map.counts();
  for (std::size_t e = 0; e < map.experts; ++e)
    if (actual[e] != counts[e])
      throw InvalidInput("pad_routing_map: count for expert " + std::to_string(e) + " disagrees with the map");

  PaddingResult res{map, std::vector<std::uint64_t>(counts.begin(), counts.end()), 0};
  for (std::size_t e = 0; e < map.experts; ++e) {
    std::uint64_t need = (alignment - counts[e] % alignment) % alignment;
    for (std::size_t t = 0; t < map.tokens && need > 0; ++t) {
      const std::size_t idx = t * map.experts + e;
      if (!res.map.selected[idx] && res.map.prob[idx] == 0.0) {
        res.map.selected[idx] = 1;
        --need;
        ++res.counts[e];
        ++res.added;
      }
    }
    if (need > 0)
      throw CapacityError("pad_routing_map: expert " + std::to_string(e) + " lacks " + std::to_string(need) +
                              " zero-probability slots",
                          e);
  }
  return res;
}

std::vector<double> skew_offsets(std::size_t n_experts, double skew, std::uint64_t seed) {
  std::vector<double> ramp(n_experts, 0.0);
  if (n_experts > 1)
    for (std::size_t i = 0; i < n_experts; ++i)
      ramp[i] = skew * (1.0 - 2.0 * static_cast<double>(i) / static_cast<double>(n_experts - 1));
  // Fisher-Yates with the pinned generator; offset stream is separate from the score stream.
  Xoshiro256 rng(seed ^ 0x5eed0ff5e7ULL);
  for (std::size_t i = n_experts; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(ramp[i - 1], ramp[j]);
  }
  return ramp;
}

std::vector<LoadStats> simulate_balance(const RouterConfig &cfg, std::size_t steps, std::size_t tokens_per_step,
                                        double skew, std::uint64_t seed) {
  cfg.validate();
  if (steps < 1) throw InvalidInput("simulate_balance: steps must be at least 1");
  if (tokens_per_step < 1) throw InvalidInput("simulate_balance: tokens_per_step must be at least 1");
  if (!std::isfinite(skew)) throw InvalidInput("simulate_balance: skew must be finite");

  const std::size_t n = cfg.n_experts;
  const std::vector<double> offsets = skew_offsets(n, skew, seed);
  Xoshiro256 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  BiasState bias = BiasState::zeros(n);
  std::vector<double> scores(tokens_per_step * n);
  std::vector<LoadStats> series;
  series.reserve(steps);

  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t t = 0; t < tokens_per_step; ++t)
      for (std::size_t e = 0; e < n; ++e) scores[t * n + e] = normal(rng) + offsets[e];
    const auto decisions = route_batch(scores, bias, cfg);
    LoadStats st = load_stats(decisions, n);
    bias = update_bias(bias, st, cfg.update_rate);
    series.push_back(std::move(st));
  }
  return series;
}

}  // namespace sforge::router
