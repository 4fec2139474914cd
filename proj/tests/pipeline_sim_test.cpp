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

#include "sforge/pipeline_sim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "gen.hpp"
#include "sforge/error.hpp"

namespace sforge::pipe {
namespace {

std::vector<LayerSpec> homogeneous(std::size_t n) {
  return std::vector<LayerSpec>(n, CostModel{}.make(LayerKind::MoE));
}

PartitionPlan one_per_stage(std::size_t p, std::size_t v) {
  std::vector<std::vector<std::size_t>> stages(p * v);
  for (std::size_t s = 0; s < p * v; ++s) stages[s] = {s};
  return plan_from_stages(p, v, stages, "homog");
}

SimOptions opts(std::size_t m, double comm = 0.0) {
  SimOptions o;
  o.micro_batches = m;
  o.comm_latency = comm;
  return o;
}

TEST(Model, BuildAndSplit) {
  const auto model = build_model(3, 15, 1);
  ASSERT_EQ(model.size(), 21u);
  EXPECT_EQ(model.front().kind, LayerKind::Embedding);
  EXPECT_EQ(model[19].kind, LayerKind::MTPBlock);
  EXPECT_DOUBLE_EQ(model[19].fwd_cost, 1.7);
  EXPECT_DOUBLE_EQ(model[1].fwd_cost, 0.5);
  EXPECT_DOUBLE_EQ(model[4].bwd_cost, 2.0);
  const auto split = split_mtp(model);
  ASSERT_EQ(split.size(), 22u);
  EXPECT_EQ(split[19].kind, LayerKind::MTPTransformer);
  EXPECT_EQ(split[20].kind, LayerKind::MTPLoss);
  EXPECT_NEAR(split[19].fwd_cost, 1.19, 1e-12);
  EXPECT_NEAR(split[20].fwd_cost, 0.51, 1e-12);
  EXPECT_NEAR(split[19].fwd_cost + split[20].fwd_cost, 1.7, 1e-12);
  const auto deep = split_mtp(build_model(0, 2, 2));
  EXPECT_EQ(std::count_if(deep.begin(), deep.end(), [](auto &l) { return l.kind == LayerKind::MTPTransformer; }), 2);
  auto twice = model;
  twice.insert(twice.end() - 1, model[19]);
  EXPECT_THROW(split_mtp(twice), InvalidInput);
}

TEST(Recompute, Costs) {
  const CostModel cm;
  EXPECT_DOUBLE_EQ(recompute_cost(cm.make(LayerKind::MoE), RecomputeMode::none), 0.0);
  EXPECT_DOUBLE_EQ(recompute_cost(cm.make(LayerKind::MoE), RecomputeMode::full), 1.0);
  EXPECT_DOUBLE_EQ(recompute_cost(cm.make(LayerKind::MoE), RecomputeMode::fast_expert), 0.5);
  EXPECT_DOUBLE_EQ(recompute_cost(cm.make(LayerKind::MTPLoss), RecomputeMode::mtp_partial), 0.0);
}

TEST(Order, SingleRankAlternates) {
  const auto order = build_instruction_order(1, 1, 3, 0);
  const std::vector<Instruction> want{{Phase::Forward, 0, 0}, {Phase::Backward, 0, 0}, {Phase::Forward, 1, 0},
                                      {Phase::Backward, 1, 0}, {Phase::Forward, 2, 0}, {Phase::Backward, 2, 0}};
  EXPECT_EQ(order, want);
}

TEST(Order, WarmupCounts) {
  const auto order = build_instruction_order(4, 1, 8, 0);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(order[i].phase, Phase::Forward);
  for (std::size_t i = 3; i + 3 < order.size(); i += 2) {
    EXPECT_EQ(order[i].phase, Phase::Forward);
    EXPECT_EQ(order[i + 1].phase, Phase::Backward);
  }
  const auto inter = build_instruction_order(2, 2, 2, 0);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(inter[i].phase, Phase::Forward);
  EXPECT_THROW(build_instruction_order(2, 2, 3, 0), InvalidInput);
}

TEST(Order, EveryUnitOnce) {
  for (std::size_t p : {1, 2, 3, 4}) {
    for (std::size_t v : {1, 2, 3}) {
      const std::size_t m = 2 * p;
      for (std::size_t r = 0; r < p; ++r) {
        const auto order = build_instruction_order(p, v, m, r);
        ASSERT_EQ(order.size(), 2 * m * v);
        std::set<std::tuple<int, std::size_t, std::size_t>> seen;
        for (const auto &ins : order) seen.insert({static_cast<int>(ins.phase), ins.micro_batch, ins.chunk});
        EXPECT_EQ(seen.size(), order.size());
      }
    }
  }
}

TEST(Simulate, SingleStageHasNoBubble) {
  const auto plan = one_per_stage(1, 1);
  const auto res = simulate_schedule(plan, homogeneous(1), opts(5));
  EXPECT_EQ(res.bubble_max, 0.0);
  EXPECT_EQ(res.makespan, 15000);
}

TEST(Simulate, ClosedFormBubble) {
  for (std::size_t p = 2; p <= 8; ++p) {
    for (std::size_t m = p; m <= 4 * p; ++m) {
      const auto plan = one_per_stage(p, 1);
      const auto layers = homogeneous(p);
      const auto res = simulate_schedule(plan, layers, opts(m));
      const double want = static_cast<double>(p - 1) / static_cast<double>(m + p - 1);
      for (double b : res.bubble_ratio) EXPECT_NEAR(b, want, 1e-15) << p << " " << m;
      EXPECT_EQ(res.makespan, static_cast<Ticks>((m + p - 1) * 3000));
      EXPECT_TRUE(validate_schedule(plan, layers, opts(m), res.events).empty());
    }
  }
}

TEST(Simulate, InterleavingShrinksBubble) {
  const auto layers = homogeneous(8);
  const auto flat = simulate_schedule(balanced_plan(layers, 4, 1), layers, opts(8));
  const auto inter = simulate_schedule(balanced_plan(layers, 4, 2), layers, opts(8));
  EXPECT_LT(inter.makespan, flat.makespan);
  EXPECT_TRUE(validate_schedule(balanced_plan(layers, 4, 2), layers, opts(8), inter.events).empty());
}

TEST(Simulate, ConservationAndValidity) {
  testing::Gen g(21);
  for (int t = 0; t < 40; ++t) {
    const auto p = static_cast<std::size_t>(g.range(1, 4));
    const auto v = static_cast<std::size_t>(g.range(1, 2));
    const std::size_t m = p * static_cast<std::size_t>(g.range(1, 3));
    auto layers = split_mtp(build_model(static_cast<std::size_t>(g.range(0, 3)), static_cast<std::size_t>(g.range(2, 12)), 1));
    for (auto &l : layers) {
      l.fwd_cost *= g.uniform(0.5, 1.5);
      l.bwd_cost *= g.uniform(0.5, 1.5);
    }
    RecomputePolicy rc;
    rc.default_mode = g.coin() ? RecomputeMode::full : RecomputeMode::none;
    const auto plan = g.coin() ? balanced_plan(layers, p, v, rc) : uniform_plan(layers, p, v, rc);
    const auto o = opts(m, g.coin() ? 0.0 : g.uniform(0.0, 0.3));
    const auto res = simulate_schedule(plan, layers, o);
    const auto sc = stage_costs(plan, layers, o);
    const Ticks total = std::accumulate(sc.fwd.begin(), sc.fwd.end(), Ticks{0}) +
                        std::accumulate(sc.bwd.begin(), sc.bwd.end(), Ticks{0});
    EXPECT_EQ(std::accumulate(res.busy.begin(), res.busy.end(), Ticks{0}), static_cast<Ticks>(m) * total);
    EXPECT_EQ(res.events.size(), 2 * m * p * v);
    const auto problems = validate_schedule(plan, layers, o, res.events);
    EXPECT_TRUE(problems.empty()) << (problems.empty() ? "" : problems.front());
  }
}

TEST(Simulate, Monotone) {
  testing::Gen g(22);
  for (int t = 0; t < 30; ++t) {
    auto layers = build_model(1, 10, 1);
    const auto plan = balanced_plan(layers, 4, 1);
    const auto base = simulate_schedule(plan, layers, opts(8));
    const auto slow = simulate_schedule(plan, layers, opts(8, 0.2));
    EXPECT_GE(slow.makespan, base.makespan);
    layers[g.index(layers.size())].fwd_cost += g.uniform(0.0, 2.0);
    EXPECT_GE(simulate_schedule(plan, layers, opts(8)).makespan, base.makespan);
  }
}

TEST(Simulate, ValidatorCatchesTampering) {
  const auto plan = one_per_stage(2, 1);
  const auto layers = homogeneous(2);
  auto res = simulate_schedule(plan, layers, opts(2));
  auto events = res.events;
  events[0].start += 1;
  EXPECT_FALSE(validate_schedule(plan, layers, opts(2), events).empty());
  events = res.events;
  events.pop_back();
  EXPECT_FALSE(validate_schedule(plan, layers, opts(2), events).empty());
}

TEST(Simulate, MemoryAndOom) {
  const auto layers = homogeneous(4);
  const auto plan = one_per_stage(4, 1);
  auto o = opts(8);
  const auto res = simulate_schedule(plan, layers, o);
  // Rank 0 holds p activations at its 1F1B peak.
  EXPECT_DOUBLE_EQ(res.peak_memory[0], 4.0);
  EXPECT_DOUBLE_EQ(res.peak_memory[3], 1.0);
  o.memory_limit = 3.0;
  EXPECT_TRUE(simulate_schedule(plan, layers, o).oom);
  auto rplan = plan;
  rplan.recompute.default_mode = RecomputeMode::full;
  const auto r = simulate_schedule(rplan, layers, o);
  EXPECT_FALSE(r.oom);
  EXPECT_GT(r.makespan, res.makespan);
}

TEST(Plans, EmptyStagesAndValidation) {
  const auto layers = homogeneous(3);
  const auto plan = balanced_plan(layers, 2, 2);
  std::size_t empty = 0;
  for (std::size_t s = 0; s < 4; ++s) empty += plan.stage_layers(s).empty();
  EXPECT_EQ(empty, 1u);
  EXPECT_TRUE(validate_schedule(plan, layers, opts(2), simulate_schedule(plan, layers, opts(2)).events).empty());
  EXPECT_THROW(validate_plan(plan_from_stages(2, 1, {{1}, {0, 2}}), 3), PlanError);
  EXPECT_THROW(validate_plan(plan_from_stages(2, 1, {{0}, {1}}), 3), PlanError);
}

TEST(Plans, BalancedNeverWorseThanUniform) {
  testing::Gen g(23);
  for (int t = 0; t < 30; ++t) {
    const auto layers = split_mtp(build_model(static_cast<std::size_t>(g.range(0, 4)), static_cast<std::size_t>(g.range(4, 20)), 1));
    const auto p = static_cast<std::size_t>(g.range(2, 5));
    const auto b = stage_costs(balanced_plan(layers, p, 1), layers, opts(p));
    const auto u = stage_costs(uniform_plan(layers, p, 1), layers, opts(p));
    Ticks bmax = 0, umax = 0;
    for (std::size_t s = 0; s < p; ++s) {
      bmax = std::max(bmax, b.fwd[s] + b.bwd[s]);
      umax = std::max(umax, u.fwd[s] + u.bwd[s]);
    }
    EXPECT_LE(bmax, umax);
  }
}

TEST(Plans, HeterogeneousInstance) {
  const auto model = build_model(3, 15, 1);
  const auto split = split_mtp(model);
  const auto o = opts(20);
  const auto base = simulate_schedule(uniform_plan(model, 5, 1), model, o);
  const auto het = simulate_schedule(balanced_plan(split, 5, 1), split, o);
  EXPECT_LT(het.makespan, base.makespan);
  EXPECT_LT(het.bubble_max, base.bubble_max);
}

TEST(Compare, RankingAndImprovement) {
  const auto layers = build_model(3, 15, 1);
  const std::vector<PartitionPlan> same{uniform_plan(layers, 5, 1), uniform_plan(layers, 5, 1, {}, "copy")};
  const auto c = compare_plans(same, layers, opts(10));
  EXPECT_EQ(c.outcomes[1].relative_improvement, 0.0);
  EXPECT_EQ(c.ranking, (std::vector<std::size_t>{0, 1}));
  const std::vector<PartitionPlan> mixed{uniform_plan(layers, 5, 1), balanced_plan(layers, 5, 1),
                                         plan_from_stages(2, 1, {{0}, {1}})};
  const auto d = compare_plans(mixed, layers, opts(10));
  EXPECT_GT(d.outcomes[1].relative_improvement, 0.0);
  EXPECT_EQ(d.ranking, (std::vector<std::size_t>{1, 0, 2}));
  EXPECT_FALSE(d.outcomes[2].error.empty());
}

TEST(Compare, PerPlanLayers) {
  const auto model = build_model(3, 15, 1);
  const auto split = split_mtp(model);
  const std::vector<PartitionPlan> plans{uniform_plan(model, 5, 1), balanced_plan(split, 5, 1)};
  const std::vector<std::vector<LayerSpec>> layers{model, split};
  const auto c = compare_plans(plans, layers, opts(20));
  EXPECT_EQ(c.ranking, (std::vector<std::size_t>{1, 0}));
  EXPECT_GT(c.outcomes[1].relative_improvement, 0.0);
  EXPECT_THROW(compare_plans(plans, std::vector<std::vector<LayerSpec>>{model}, opts(20)), InvalidInput);
}

TEST(SaveIntervalTest, Examples) {
  const auto s = optimal_save_interval(4, 5);
  EXPECT_EQ(s.interval_minutes, 48.0);
  EXPECT_EQ(s.daily_overhead_minutes, 240.0);
  EXPECT_DOUBLE_EQ(optimal_save_interval(16, 5).interval_minutes, 96.0);
  EXPECT_EQ(failover_overhead(4, 5, 10, 48), 290.0);
  EXPECT_THROW(optimal_save_interval(0, 5), InvalidInput);
  EXPECT_THROW(failover_overhead(4, 5, 10, 0), InvalidInput);
}

TEST(SaveIntervalTest, Optimality) {
  testing::Gen g(24);
  for (int t = 0; t < 1000; ++t) {
    const double c = g.log_uniform(0.1, 60), f = g.log_uniform(0.1, 50), a = g.uniform(0, 30);
    const auto s = optimal_save_interval(c, f);
    const double best = failover_overhead(c, f, a, s.interval_minutes);
    EXPECT_NEAR(best - f * a, 2.0 * std::sqrt(720.0 * c * f), 1e-9 * best);
    for (double k : {0.5, 0.9, 1.1, 2.0}) EXPECT_LE(best, failover_overhead(c, f, a, k * s.interval_minutes));
  }
}

}  // namespace
}  // namespace sforge::pipe
