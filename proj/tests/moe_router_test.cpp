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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "gen.hpp"
#include "sforge/error.hpp"

namespace sforge::router {
namespace {

RouterConfig tiny(std::size_t n, std::size_t k, std::size_t groups = 1, std::size_t top_groups = 1) {
  RouterConfig c;
  c.n_experts = n;
  c.top_k = k;
  c.n_groups = groups;
  c.top_groups = top_groups;
  return c;
}

TEST(Route, BiasSteersSelectionNotGates) {
  const auto d = route_topk(std::vector<double>{0.9, 0.1}, {{-5.0, 0.0}}, tiny(2, 1));
  ASSERT_EQ(d.experts.size(), 1u);
  EXPECT_EQ(d.experts[0], 1u);
  EXPECT_DOUBLE_EQ(d.gates[0], 2.5);
}

TEST(Route, ZeroBiasPicksArgmaxAndTiesGoLow) {
  const auto d = route_topk(std::vector<double>{0.1, 0.7, 0.3, 0.7}, BiasState::zeros(4), tiny(4, 1));
  EXPECT_EQ(d.experts[0], 1u);
}

TEST(Route, GatesFollowSigmoidOfRawScores) {
  testing::Gen g(1);
  const RouterConfig cfg;
  const auto scores = g.normals(256);
  BiasState bias{g.normals(256, 0.1)};
  const auto d = route_topk(scores, bias, cfg);
  double norm = 0.0;
  for (auto e : d.experts) norm += 1.0 / (1.0 + std::exp(-scores[e]));
  for (std::size_t j = 0; j < d.experts.size(); ++j)
    EXPECT_NEAR(d.gates[j], 2.5 / (1.0 + std::exp(-scores[d.experts[j]])) / norm, 1e-12);
}

// Brute-force oracle: rank groups by the sum of their top-2 biased scores,
// keep the best 4, then take the best 8 experts inside them.
std::set<std::uint32_t> oracle_select(const std::vector<double> &s, const std::vector<double> &b) {
  std::vector<std::pair<double, int>> groups;
  for (int g = 0; g < 8; ++g) {
    std::vector<double> v;
    for (int j = 0; j < 32; ++j) v.push_back(s[g * 32 + j] + b[g * 32 + j]);
    std::sort(v.rbegin(), v.rend());
    groups.push_back({-(v[0] + v[1]), g});
  }
  std::sort(groups.begin(), groups.end());
  std::vector<std::pair<double, std::uint32_t>> cand;
  for (int r = 0; r < 4; ++r)
    for (int j = 0; j < 32; ++j) {
      const auto e = static_cast<std::uint32_t>(groups[r].second * 32 + j);
      cand.push_back({-(s[e] + b[e]), e});
    }
  std::sort(cand.begin(), cand.end());
  std::set<std::uint32_t> out;
  for (int i = 0; i < 8; ++i) out.insert(cand[i].second);
  return out;
}

TEST(Route, MatchesOracleAndRespectsGroups) {
  testing::Gen g(2);
  const RouterConfig cfg;
  for (int t = 0; t < 500; ++t) {
    const auto s = g.normals(256);
    const auto b = g.normals(256, 0.3);
    const auto d = route_topk(s, {b}, cfg);
    const std::set<std::uint32_t> got(d.experts.begin(), d.experts.end());
    ASSERT_EQ(got.size(), 8u);
    EXPECT_EQ(got, oracle_select(s, b)) << "trial " << t;
    std::set<std::uint32_t> groups;
    for (auto e : d.experts) groups.insert(e / 32);
    EXPECT_LE(groups.size(), 4u);
    double sum = 0.0;
    for (double x : d.gates) sum += x;
    EXPECT_NEAR(sum, 2.5, 1e-9);
  }
}

TEST(Route, UniformBiasShiftInvariance) {
  testing::Gen g(3);
  const RouterConfig cfg;
  for (int t = 0; t < 300; ++t) {
    const auto s = g.normals(256);
    BiasState b{g.normals(256, 0.2)};
    BiasState shifted = b;
    const double c = g.uniform(-3, 3);
    for (double &x : shifted.b) x += c;
    const auto d1 = route_topk(s, b, cfg), d2 = route_topk(s, shifted, cfg);
    EXPECT_EQ(d1.experts, d2.experts);
    EXPECT_EQ(d1.gates, d2.gates);
  }
}

TEST(Route, BatchParallelMatchesSerial) {
  testing::Gen g(4);
  const RouterConfig cfg;
  const auto s = g.normals(256 * 300);
  const BiasState b{g.normals(256, 0.1)};
  const auto a = route_batch(s, b, cfg), r = route_batch_serial(s, b, cfg);
  ASSERT_EQ(a.size(), r.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(a[t].experts, r[t].experts);
    EXPECT_EQ(a[t].gates, r[t].gates);
  }
}

TEST(Route, RejectsBadInput) {
  EXPECT_THROW(route_topk(std::vector<double>{NAN, 0.0}, BiasState::zeros(2), tiny(2, 1)), InvalidInput);
  EXPECT_THROW(route_topk(std::vector<double>{0.0, 0.0}, BiasState::zeros(3), tiny(2, 1)), InvalidInput);
  EXPECT_THROW(tiny(6, 1, 4, 1).validate(), InvalidInput);
  EXPECT_THROW(tiny(8, 5, 4, 2).validate(), InvalidInput);
}

TEST(Bias, UpdateExamples) {
  LoadStats st;
  st.violation = {2.0, -2.0};
  const auto b = update_bias(BiasState::zeros(2), st, 0.001);
  EXPECT_DOUBLE_EQ(b.b[0], 0.001);
  EXPECT_DOUBLE_EQ(b.b[1], -0.001);
  st.violation = {3.0, 3.0, 3.0};
  EXPECT_EQ(update_bias(BiasState::zeros(3), st, 0.001).b, std::vector<double>(3, 0.0));
  st.violation = {1.0, 0.0};
  EXPECT_THROW(update_bias(BiasState::zeros(3), st, 0.001), InvalidInput);
}

TEST(Bias, SumConservedOverManyUpdates) {
  testing::Gen g(5);
  BiasState b = BiasState::zeros(256);
  LoadStats st;
  st.violation.resize(256);
  for (int step = 0; step < 20000; ++step) {
    for (auto &e : st.violation) e = static_cast<double>(g.range(-2, 2));
    b = update_bias(b, st, 0.001);
  }
  EXPECT_LE(std::abs(b.total()), 1e-12);
}

TEST(LoadStatsTest, Examples) {
  std::vector<RoutingDecision> ds(4, RoutingDecision{{0}, {2.5}});
  const auto st = load_stats(ds, 4);
  EXPECT_EQ(st.counts, (std::vector<std::uint64_t>{4, 0, 0, 0}));
  // Violation is mean - count (positive means under-loaded).
  EXPECT_EQ(st.violation, (std::vector<double>{-3, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(st.max_violation_ratio, 4.0);
  std::vector<RoutingDecision> uniform{{{0}, {1}}, {{1}, {1}}, {{2}, {1}}, {{3}, {1}}};
  const auto u = load_stats(uniform, 4);
  EXPECT_EQ(u.violation, std::vector<double>(4, 0.0));
  EXPECT_DOUBLE_EQ(u.max_violation_ratio, 1.0);
  EXPECT_THROW(load_stats(std::vector<RoutingDecision>{}, 4), InvalidInput);
}

TEST(LoadStatsTest, ZeroSumAndDropless) {
  testing::Gen g(6);
  const RouterConfig cfg;
  const auto s = g.normals(256 * 200);
  const auto ds = route_batch(s, BiasState::zeros(256), cfg);
  const auto st = load_stats(ds, 256);
  std::uint64_t total = 0;
  double esum = 0.0;
  for (std::size_t i = 0; i < 256; ++i) {
    total += st.counts[i];
    esum += st.violation[i];
  }
  EXPECT_EQ(total, 200u * 8u);
  EXPECT_NEAR(esum, 0.0, 1e-9);
}

RoutingMap random_map(testing::Gen &g, std::size_t tokens, std::size_t experts, std::size_t k) {
  RoutingMap m(tokens, experts);
  for (std::size_t t = 0; t < tokens; ++t) {
    std::vector<std::size_t> idx(experts);
    for (std::size_t e = 0; e < experts; ++e) idx[e] = e;
    std::shuffle(idx.begin(), idx.end(), g.engine());
    for (std::size_t j = 0; j < k; ++j) {
      m.selected[t * experts + idx[j]] = 1;
      m.prob[t * experts + idx[j]] = g.uniform(0.01, 1.0);
    }
    // A few unselected entries carry positive probability and must stay off.
    for (std::size_t j = k; j < std::min(experts, k + 2); ++j) m.prob[t * experts + idx[j]] = g.uniform(0.0, 0.01);
  }
  return m;
}

TEST(Padding, Example) {
  RoutingMap m(32, 2);
  for (std::size_t t = 0; t < 5; ++t) {
    m.selected[t * 2] = 1;
    m.prob[t * 2] = 0.5;
  }
  for (std::size_t t = 5; t < 8; ++t) {
    m.selected[t * 2 + 1] = 1;
    m.prob[t * 2 + 1] = 0.5;
  }
  const auto res = pad_routing_map(std::vector<std::uint64_t>{5, 3}, m, 16);
  EXPECT_EQ(res.counts, (std::vector<std::uint64_t>{16, 16}));
  EXPECT_EQ(res.added, 24u);
  for (std::size_t i = 0; i < m.selected.size(); ++i)
    if (m.selected[i]) EXPECT_TRUE(res.map.selected[i]);
  EXPECT_EQ(res.map.prob, m.prob);
}

TEST(Padding, IdempotentAndAlignmentOne) {
  testing::Gen g(7);
  const auto m = random_map(g, 64, 8, 2);
  const auto once = pad_routing_map(m.counts(), m, 16);
  const auto twice = pad_routing_map(once.counts, once.map, 16);
  EXPECT_EQ(twice.added, 0u);
  EXPECT_EQ(twice.map.selected, once.map.selected);
  const auto one = pad_routing_map(m.counts(), m, 1);
  EXPECT_EQ(one.map.selected, m.selected);
}

TEST(Padding, Property) {
  testing::Gen g(8);
  for (int t = 0; t < 200; ++t) {
    const auto experts = static_cast<std::size_t>(g.range(2, 16));
    const auto tokens = static_cast<std::size_t>(g.range(40, 120));
    const auto m = random_map(g, tokens, experts, static_cast<std::size_t>(g.range(1, 2)));
    PaddingResult res;
    try {
      res = pad_routing_map(m.counts(), m, 16);
    } catch (const CapacityError &e) {
      // Only legitimate when that expert really lacks zero-probability slots.
      const auto x = e.expert();
      std::uint64_t free = 0;
      for (std::size_t tok = 0; tok < tokens; ++tok)
        free += !m.selected[tok * experts + x] && m.prob[tok * experts + x] == 0.0;
      EXPECT_LT(free, (16 - m.counts()[x] % 16) % 16);
      continue;
    }
    for (auto c : res.counts) EXPECT_EQ(c % 16, 0u);
    EXPECT_EQ(res.counts, res.map.counts());
    for (std::size_t i = 0; i < m.selected.size(); ++i) {
      if (m.prob[i] > 0.0) EXPECT_EQ(res.map.selected[i], m.selected[i]);
      if (res.map.selected[i] && !m.selected[i]) EXPECT_EQ(m.prob[i], 0.0);
    }
  }
}

TEST(Padding, CapacityErrorNamesExpert) {
  RoutingMap m(4, 2);
  for (std::size_t t = 0; t < 4; ++t) m.prob[t * 2 + 1] = 0.1;
  m.selected[1] = 1;
  try {
    pad_routing_map(m.counts(), m, 16);
    FAIL();
  } catch (const CapacityError &e) {
    EXPECT_EQ(e.expert(), 1u);
  }
  EXPECT_THROW(pad_routing_map(std::vector<std::uint64_t>{0, 0}, m, 16), InvalidInput);
}

TEST(Balance, DeterministicAndNoUpdateControl) {
  RouterConfig cfg;
  const auto a = simulate_balance(cfg, 5, 256, 2.0, 42), b = simulate_balance(cfg, 5, 256, 2.0, 42);
  for (std::size_t s = 0; s < a.size(); ++s) EXPECT_EQ(a[s].counts, b[s].counts);
  cfg.update_rate = 0.0;
  const auto frozen = simulate_balance(cfg, 30, 512, 2.0, 1);
  double first = 0.0, last = 0.0;
  for (int s = 0; s < 10; ++s) first += frozen[s].max_violation_ratio / 10;
  for (int s = 20; s < 30; ++s) last += frozen[s].max_violation_ratio / 10;
  EXPECT_NEAR(first, last, 0.25 * first);
}

TEST(Balance, NoSkewIsBalanced) {
  // The max of 256 binomial counts crosses 1.2x the mean in a few percent of
  // steps, so the check is on the frequency and the average.
  const auto series = simulate_balance(RouterConfig{}, 30, 10000, 0.0, 3);
  int over = 0;
  double mean = 0.0;
  for (const auto &st : series) {
    over += st.max_violation_ratio >= 1.2;
    mean += st.max_violation_ratio / 30.0;
  }
  EXPECT_LE(over, 3);
  EXPECT_LT(mean, 1.2);
}

TEST(Balance, SkewImprovesOverTime) {
  const auto series = simulate_balance(RouterConfig{}, 200, 512, 2.0, 7);
  EXPECT_LT(series.back().max_violation_ratio, series.front().max_violation_ratio);
}

TEST(Balance, SkewOffsetsAreAPermutedRamp) {
  auto off = skew_offsets(256, 2.0, 9);
  std::sort(off.begin(), off.end());
  EXPECT_DOUBLE_EQ(off.front(), -2.0);
  EXPECT_DOUBLE_EQ(off.back(), 2.0);
  EXPECT_NE(skew_offsets(256, 2.0, 9), skew_offsets(256, 2.0, 10));
}

}  // namespace
}  // namespace sforge::router
