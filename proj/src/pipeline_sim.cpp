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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "sforge/error.hpp"

namespace sforge::pipe {

namespace {

constexpr std::pair<LayerKind, const char *> kKindNames[] = {
    {LayerKind::Embedding, "Embedding"}, {LayerKind::Dense, "Dense"},   {LayerKind::MoE, "MoE"},
    {LayerKind::MTPBlock, "MTPBlock"},   {LayerKind::MTPTransformer, "MTPTransformer"},
    {LayerKind::MTPLoss, "MTPLoss"},     {LayerKind::LMLoss, "LMLoss"},
};

constexpr std::pair<RecomputeMode, const char *> kModeNames[] = {
    {RecomputeMode::none, "none"},
    {RecomputeMode::full, "full"},
    {RecomputeMode::mtp_partial, "mtp_partial"},
    {RecomputeMode::fast_expert, "fast_expert"},
};

Ticks to_ticks(double cost, std::int64_t resolution) {
  const double t = std::round(cost * static_cast<double>(resolution));
  if (!std::isfinite(t) || t < 0.0 || t > 9e15) throw InvalidInput("layer cost out of range");
  return static_cast<Ticks>(t);
}

void validate_layer(const LayerSpec &l, std::size_t index) {
  if (!(l.fwd_cost >= 0.0) || !(l.bwd_cost >= 0.0) || !(l.act_memory >= 0.0) || !std::isfinite(l.fwd_cost) ||
      !std::isfinite(l.bwd_cost) || !std::isfinite(l.act_memory))
    throw InvalidInput("layer " + std::to_string(index) + ": costs must be finite and non-negative");
}

}  // namespace

const char *to_string(LayerKind kind) {
  for (const auto &[k, n] : kKindNames)
    if (k == kind) return n;
  return "?";
}

const char *to_string(RecomputeMode mode) {
  for (const auto &[k, n] : kModeNames)
    if (k == mode) return n;
  return "?";
}

const char *to_string(Phase phase) { return phase == Phase::Forward ? "F" : "B"; }

std::optional<LayerKind> parse_layer_kind(const std::string &s) {
  for (const auto &[k, n] : kKindNames)
    if (s == n) return k;
  return std::nullopt;
}

std::optional<RecomputeMode> parse_recompute_mode(const std::string &s) {
  for (const auto &[k, n] : kModeNames)
    if (s == n) return k;
  return std::nullopt;
}

LayerSpec CostModel::make(LayerKind kind, int mtp_depth) const {
  LayerSpec l;
  l.kind = kind;
  auto it = fwd.find(kind);
  l.fwd_cost = it == fwd.end() ? 1.0 : it->second;
  auto b = bwd_override.find(kind);
  l.bwd_cost = b == bwd_override.end() ? bwd_ratio * l.fwd_cost : b->second;
  auto m = act_memory_override.find(kind);
  l.act_memory = m == act_memory_override.end() ? l.fwd_cost : m->second;
  l.mtp_depth = kind == LayerKind::MTPBlock ? std::max(1, mtp_depth) : 0;
  return l;
}

std::vector<LayerSpec> build_model(std::size_t dense_layers, std::size_t moe_layers, int mtp_depth,
                                   const CostModel &costs) {
  std::vector<LayerSpec> layers;
  layers.push_back(costs.make(LayerKind::Embedding));
  for (std::size_t i = 0; i < dense_layers; ++i) layers.push_back(costs.make(LayerKind::Dense));
  for (std::size_t i = 0; i < moe_layers; ++i) layers.push_back(costs.make(LayerKind::MoE));
  if (mtp_depth > 0) layers.push_back(costs.make(LayerKind::MTPBlock, mtp_depth));
  layers.push_back(costs.make(LayerKind::LMLoss));
  return layers;
}

std::vector<LayerSpec> split_mtp(std::span<const LayerSpec> layers, double transformer_fraction) {
  if (!(transformer_fraction > 0.0 && transformer_fraction < 1.0))
    throw InvalidInput("split_mtp: transformer fraction must lie in (0, 1)");
  const auto blocks = std::count_if(layers.begin(), layers.end(),
                                    [](const LayerSpec &l) { return l.kind == LayerKind::MTPBlock; });
  if (blocks > 1) throw InvalidInput("split_mtp: at most one MTP block is supported");

  std::vector<LayerSpec> out;
  for (const auto &l : layers) {
    if (l.kind != LayerKind::MTPBlock) {
      out.push_back(l);
      continue;
    }
    if (l.mtp_depth < 1) throw InvalidInput("split_mtp: MTP block needs at least one transformer sublayer");
    const double k = l.mtp_depth;
    LayerSpec sub{LayerKind::MTPTransformer, l.fwd_cost * transformer_fraction / k,
                  l.bwd_cost * transformer_fraction / k, l.act_memory * transformer_fraction / k, 0};
    for (int i = 0; i < l.mtp_depth; ++i) out.push_back(sub);
    // The loss part takes the remainder so the totals are conserved.
    out.push_back(LayerSpec{LayerKind::MTPLoss, l.fwd_cost - sub.fwd_cost * k, l.bwd_cost - sub.bwd_cost * k,
                            l.act_memory - sub.act_memory * k, 0});
  }
  return out;
}

RecomputeMode RecomputePolicy::mode_for(LayerKind kind) const {
  auto it = overrides.find(kind);
  return it == overrides.end() ? default_mode : it->second;
}

double recompute_cost(const LayerSpec &layer, RecomputeMode mode, double mtp_transformer_fraction) {
  switch (mode) {
    case RecomputeMode::none:
      return 0.0;
    case RecomputeMode::full:
      return layer.fwd_cost;
    case RecomputeMode::fast_expert:
      return layer.kind == LayerKind::MoE ? 0.5 * layer.fwd_cost : layer.fwd_cost;
    case RecomputeMode::mtp_partial:
      if (layer.kind == LayerKind::MTPTransformer) return layer.fwd_cost;
      if (layer.kind == LayerKind::MTPBlock) return layer.fwd_cost * mtp_transformer_fraction;
      return 0.0;
  }
  return 0.0;
}

void validate_plan(const PartitionPlan &plan, std::size_t layer_count) {
  if (plan.p < 1 || plan.v < 1) throw PlanError("plan: p and v must be at least 1");
  if (plan.assignment.size() != plan.p)
    throw PlanError("plan: assignment has " + std::to_string(plan.assignment.size()) + " ranks, expected " +
                    std::to_string(plan.p));
  for (std::size_t r = 0; r < plan.p; ++r)
    if (plan.assignment[r].size() != plan.v)
      throw PlanError("plan: rank " + std::to_string(r) + " has " + std::to_string(plan.assignment[r].size()) +
                      " chunks, expected " + std::to_string(plan.v));
  std::size_t next = 0;
  for (std::size_t s = 0; s < plan.stage_count(); ++s)
    for (std::size_t idx : plan.stage_layers(s)) {
      if (idx != next)
        throw PlanError("plan: stage " + std::to_string(s) + " holds layer " + std::to_string(idx) + " where layer " +
                        std::to_string(next) + " was expected (stages must cover layers in model order)");
      ++next;
    }
  if (next != layer_count)
    throw PlanError("plan: covers " + std::to_string(next) + " of " + std::to_string(layer_count) + " layers");
}

PartitionPlan plan_from_stages(std::size_t p, std::size_t v, const std::vector<std::vector<std::size_t>> &stages,
                               std::string name) {
  if (p < 1 || v < 1) throw PlanError("plan: p and v must be at least 1");
  if (stages.size() != p * v)
    throw PlanError("plan: " + std::to_string(stages.size()) + " stages for p*v = " + std::to_string(p * v));
  PartitionPlan plan;
  plan.name = std::move(name);
  plan.p = p;
  plan.v = v;
  plan.assignment.assign(p, std::vector<std::vector<std::size_t>>(v));
  for (std::size_t s = 0; s < stages.size(); ++s) plan.assignment[s % p][s / p] = stages[s];
  return plan;
}

namespace {

std::vector<Ticks> layer_ticks(std::span<const LayerSpec> layers, const RecomputePolicy &rc, std::int64_t res) {
  std::vector<Ticks> t;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    validate_layer(layers[i], i);
    const auto &l = layers[i];
    t.push_back(to_ticks(l.fwd_cost, res) + to_ticks(l.bwd_cost, res) +
                to_ticks(recompute_cost(l, rc.mode_for(l.kind)), res));
  }
  return t;
}

}  // namespace

PartitionPlan balanced_plan(std::span<const LayerSpec> layers, std::size_t p, std::size_t v,
                            const RecomputePolicy &recompute, std::string name) {
  if (p < 1 || v < 1) throw PlanError("plan: p and v must be at least 1");
  const std::size_t stages = p * v;
  const std::size_t n = layers.size();
  const std::vector<Ticks> cost = layer_ticks(layers, recompute, 1000);
  std::vector<Ticks> prefix(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + cost[i];

  // best[s][i]: (max stage, sum of squares) covering the first i layers with s stages.
  using Score = std::pair<Ticks, double>;
  const Score inf{std::numeric_limits<Ticks>::max(), 0.0};
  std::vector<std::vector<Score>> best(stages + 1, std::vector<Score>(n + 1, inf));
  std::vector<std::vector<std::size_t>> cut(stages + 1, std::vector<std::size_t>(n + 1, 0));
  best[0][0] = {0, 0.0};
  for (std::size_t s = 1; s <= stages; ++s)
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        if (best[s - 1][j] == inf) continue;
        const Ticks seg = prefix[i] - prefix[j];
        const Score cand{std::max(best[s - 1][j].first, seg),
                         best[s - 1][j].second + static_cast<double>(seg) * static_cast<double>(seg)};
        if (cand < best[s][i]) {
          best[s][i] = cand;
          cut[s][i] = j;
        }
      }

  std::vector<std::vector<std::size_t>> stage_layers(stages);
  std::size_t end = n;
  for (std::size_t s = stages; s >= 1; --s) {
    const std::size_t begin = cut[s][end];
    for (std::size_t i = begin; i < end; ++i) stage_layers[s - 1].push_back(i);
    end = begin;
  }
  PartitionPlan plan = plan_from_stages(p, v, stage_layers, std::move(name));
  plan.recompute = recompute;
  return plan;
}

PartitionPlan uniform_plan(std::span<const LayerSpec> layers, std::size_t p, std::size_t v,
                           const RecomputePolicy &recompute, std::string name) {
  if (p < 1 || v < 1) throw PlanError("plan: p and v must be at least 1");
  const std::size_t stages = p * v;
  const std::size_t n = layers.size();
  std::size_t head = 0;
  while (head < n && layers[head].kind == LayerKind::Embedding) ++head;
  std::size_t tail = n;
  while (tail > head && layers[tail - 1].kind != LayerKind::Dense && layers[tail - 1].kind != LayerKind::MoE) --tail;

  const std::size_t body = tail - head;
  const std::size_t base = body / stages, extra = body % stages;
  std::vector<std::vector<std::size_t>> st(stages);
  std::size_t next = 0;
  for (; next < head; ++next) st[0].push_back(next);
  for (std::size_t s = 0; s < stages; ++s)
    for (std::size_t i = 0; i < base + (s < extra ? 1 : 0); ++i) st[s].push_back(next++);
  for (; next < n; ++next) st[stages - 1].push_back(next);
  PartitionPlan plan = plan_from_stages(p, v, st, std::move(name));
  plan.recompute = recompute;
  return plan;
}

std::vector<Instruction> build_instruction_order(std::size_t p, std::size_t v, std::size_t m, std::size_t rank) {
  if (p < 1 || v < 1) throw InvalidInput("instruction order: p and v must be at least 1");
  if (m < 1) throw InvalidInput("instruction order: need at least one micro-batch");
  if (rank >= p) throw InvalidInput("instruction order: rank out of range");
  if (v > 1 && m % p != 0)
    throw InvalidInput("instruction order: interleaving needs micro-batches (" + std::to_string(m) +
                       ") divisible by p (" + std::to_string(p) + ")");

  const std::size_t total = m * v;
  const std::size_t warmup =
      v == 1 ? std::min(m, p - rank - 1) : std::min(total, 2 * (p - rank - 1) + (v - 1) * p);

  auto forward = [&](std::size_t f) {
    return Instruction{Phase::Forward, (f / (p * v)) * p + f % p, (f / p) % v};
  };
  auto backward = [&](std::size_t b) {
    return Instruction{Phase::Backward, (b / (p * v)) * p + b % p, v - 1 - (b / p) % v};
  };

  std::vector<Instruction> order;
  order.reserve(2 * total);
  for (std::size_t f = 0; f < warmup; ++f) order.push_back(forward(f));
  for (std::size_t i = 0; i + warmup < total; ++i) {
    order.push_back(forward(warmup + i));
    order.push_back(backward(i));
  }
  for (std::size_t b = total - warmup; b < total; ++b) order.push_back(backward(b));
  return order;
}

StageCosts stage_costs(const PartitionPlan &plan, std::span<const LayerSpec> layers, const SimOptions &opts) {
  validate_plan(plan, layers.size());
  if (opts.tick_resolution < 1) throw InvalidInput("tick resolution must be at least 1");
  StageCosts sc;
  for (std::size_t s = 0; s < plan.stage_count(); ++s) {
    Ticks f = 0, b = 0;
    double mem = 0.0;
    for (std::size_t idx : plan.stage_layers(s)) {
      const auto &l = layers[idx];
      validate_layer(l, idx);
      const double rc = recompute_cost(l, plan.recompute.mode_for(l.kind), opts.mtp_transformer_fraction);
      f += to_ticks(l.fwd_cost, opts.tick_resolution);
      b += to_ticks(l.bwd_cost, opts.tick_resolution) + to_ticks(rc, opts.tick_resolution);
      mem += rc > 0.0 ? l.act_memory * plan.recompute.checkpoint_fraction : l.act_memory;
    }
    sc.fwd.push_back(f);
    sc.bwd.push_back(b);
    sc.memory.push_back(mem);
  }
  return sc;
}

SimResult simulate_schedule(const PartitionPlan &plan, std::span<const LayerSpec> layers, const SimOptions &opts) {
  const StageCosts sc = stage_costs(plan, layers, opts);
  if (!(opts.comm_latency >= 0.0)) throw InvalidInput("comm latency must be non-negative");
  const Ticks comm = to_ticks(opts.comm_latency, opts.tick_resolution);
  const std::size_t p = plan.p, v = plan.v, m = opts.micro_batches, stages = plan.stage_count();

  std::vector<std::vector<Instruction>> order(p);
  for (std::size_t r = 0; r < p; ++r) order[r] = build_instruction_order(p, v, m, r);

  constexpr Ticks kPending = -1;
  std::vector<Ticks> fwd_end(m * stages, kPending), bwd_end(m * stages, kPending);
  auto slot = [&](std::size_t mb, std::size_t s) { return mb * stages + s; };
  auto hop = [&](std::size_t a, std::size_t b) { return a % p == b % p ? Ticks{0} : comm; };

  SimResult res;
  res.tick_resolution = opts.tick_resolution;
  res.busy.assign(p, 0);
  res.peak_memory.assign(p, 0.0);
  std::vector<double> live(p, 0.0);
  std::vector<Ticks> free_at(p, 0);
  std::vector<std::size_t> pc(p, 0);
  std::size_t remaining = 0;
  for (const auto &o : order) remaining += o.size();

  // Start times are fixed by the dependency DAG, so the sweep order over ranks
  // does not affect the result.
  while (remaining > 0) {
    bool progressed = false;
    for (std::size_t r = 0; r < p; ++r) {
      while (pc[r] < order[r].size()) {
        const Instruction &ins = order[r][pc[r]];
        const std::size_t s = ins.chunk * p + r;
        Ticks ready = free_at[r];
        if (ins.phase == Phase::Forward) {
          if (s > 0) {
            const Ticks dep = fwd_end[slot(ins.micro_batch, s - 1)];
            if (dep == kPending) break;
            ready = std::max(ready, dep + hop(s - 1, s));
          }
        } else {
          const Ticks own = fwd_end[slot(ins.micro_batch, s)];
          if (own == kPending) break;
          ready = std::max(ready, own);
          if (s + 1 < stages) {
            const Ticks dep = bwd_end[slot(ins.micro_batch, s + 1)];
            if (dep == kPending) break;
            ready = std::max(ready, dep + hop(s + 1, s));
          }
        }
        const Ticks dur = ins.phase == Phase::Forward ? sc.fwd[s] : sc.bwd[s];
        const Ticks end = ready + dur;
        (ins.phase == Phase::Forward ? fwd_end : bwd_end)[slot(ins.micro_batch, s)] = end;
        res.events.push_back({r, ready, end, ins.micro_batch, ins.chunk, ins.phase});
        res.busy[r] += dur;
        free_at[r] = end;
        if (ins.phase == Phase::Forward) {
          live[r] += sc.memory[s];
          res.peak_memory[r] = std::max(res.peak_memory[r], live[r]);
        } else {
          live[r] -= sc.memory[s];
        }
        ++pc[r];
        --remaining;
        progressed = true;
      }
    }
    if (!progressed) throw PlanError("schedule deadlock: no rank can make progress (cyclic dependencies)");
  }

  std::sort(res.events.begin(), res.events.end(), [](const ScheduleEvent &a, const ScheduleEvent &b) {
    return std::tie(a.start, a.rank, a.end) < std::tie(b.start, b.rank, b.end);
  });
  for (Ticks t : free_at) res.makespan = std::max(res.makespan, t);
  res.bubble_ratio.resize(p);
  double sum = 0.0;
  for (std::size_t r = 0; r < p; ++r) {
    res.bubble_ratio[r] =
        res.makespan == 0 ? 0.0 : static_cast<double>(res.makespan - res.busy[r]) / static_cast<double>(res.makespan);
    res.bubble_max = std::max(res.bubble_max, res.bubble_ratio[r]);
    sum += res.bubble_ratio[r];
  }
  res.bubble_mean = sum / static_cast<double>(p);
  if (opts.memory_limit)
    res.oom = std::any_of(res.peak_memory.begin(), res.peak_memory.end(),
                          [&](double mem) { return mem > *opts.memory_limit; });
  return res;
}

std::vector<std::string> validate_schedule(const PartitionPlan &plan, std::span<const LayerSpec> layers,
                                           const SimOptions &opts, std::span<const ScheduleEvent> events) {
  std::vector<std::string> problems;
  const StageCosts sc = stage_costs(plan, layers, opts);
  const Ticks comm = to_ticks(opts.comm_latency, opts.tick_resolution);
  const std::size_t p = plan.p, stages = plan.stage_count(), m = opts.micro_batches;

  std::vector<const ScheduleEvent *> fwd(m * stages, nullptr), bwd(m * stages, nullptr);
  for (const auto &e : events) {
    const std::string tag = std::string(to_string(e.phase)) + "(mb " + std::to_string(e.micro_batch) + ", chunk " +
                            std::to_string(e.chunk) + ", rank " + std::to_string(e.rank) + ")";
    if (e.rank >= p || e.chunk >= plan.v || e.micro_batch >= m) {
      problems.push_back("event out of range: " + tag);
      continue;
    }
    if (e.end < e.start) problems.push_back("negative duration: " + tag);
    const std::size_t s = e.chunk * p + e.rank;
    const Ticks want = e.phase == Phase::Forward ? sc.fwd[s] : sc.bwd[s];
    if (e.end - e.start != want) problems.push_back("wrong duration: " + tag);
    auto &cell = (e.phase == Phase::Forward ? fwd : bwd)[e.micro_batch * stages + s];
    if (cell) problems.push_back("duplicate event: " + tag);
    cell = &e;
  }

  for (std::size_t mb = 0; mb < m; ++mb)
    for (std::size_t s = 0; s < stages; ++s) {
      const auto *f = fwd[mb * stages + s];
      const auto *b = bwd[mb * stages + s];
      const std::string where = "mb " + std::to_string(mb) + " stage " + std::to_string(s);
      if (!f || !b) {
        problems.push_back("missing event at " + where);
        continue;
      }
      if (b->start < f->end) problems.push_back("backward before own forward at " + where);
      if (s > 0 && fwd[mb * stages + s - 1]) {
        const auto *prev = fwd[mb * stages + s - 1];
        const Ticks lat = (s - 1) % p == s % p ? 0 : comm;
        if (f->start < prev->end + lat) problems.push_back("forward dependency violated at " + where);
      }
      if (s + 1 < stages && bwd[mb * stages + s + 1]) {
        const auto *next = bwd[mb * stages + s + 1];
        const Ticks lat = (s + 1) % p == s % p ? 0 : comm;
        if (b->start < next->end + lat) problems.push_back("backward dependency violated at " + where);
      }
    }

  std::vector<std::vector<const ScheduleEvent *>> per_rank(p);
  for (const auto &e : events)
    if (e.rank < p) per_rank[e.rank].push_back(&e);
  for (std::size_t r = 0; r < p; ++r) {
    auto &v = per_rank[r];
    std::sort(v.begin(), v.end(), [](auto *a, auto *b) { return std::tie(a->start, a->end) < std::tie(b->start, b->end); });
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i]->start < v[i - 1]->end) problems.push_back("overlapping events on rank " + std::to_string(r));
  }
  return problems;
}

Comparison compare_plans(std::span<const PartitionPlan> plans, std::span<const LayerSpec> layers,
                         const SimOptions &opts) {
  const std::vector<std::vector<LayerSpec>> shared(plans.size(), std::vector<LayerSpec>(layers.begin(), layers.end()));
  return compare_plans(plans, shared, opts);
}

Comparison compare_plans(std::span<const PartitionPlan> plans, std::span<const std::vector<LayerSpec>> layers,
                         const SimOptions &opts) {
  if (plans.empty()) throw InvalidInput("compare_plans: no plans");
  if (layers.size() != plans.size()) throw InvalidInput("compare_plans: one layer list per plan required");
  Comparison cmp;
  cmp.outcomes.resize(plans.size());
  const long count = static_cast<long>(plans.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    auto &out = cmp.outcomes[i];
    out.index = static_cast<std::size_t>(i);
    out.name = plans[i].name.empty() ? "plan" + std::to_string(i) : plans[i].name;
    try {
      out.result = simulate_schedule(plans[i], layers[i], opts);
    } catch (const Error &e) {
      out.error = e.what();
    }
  }

  const auto &base = cmp.outcomes.front().result;
  for (auto &o : cmp.outcomes)
    if (o.result && base && base->makespan > 0)
      o.relative_improvement =
          static_cast<double>(base->makespan - o.result->makespan) / static_cast<double>(base->makespan);

  cmp.ranking.resize(plans.size());
  std::iota(cmp.ranking.begin(), cmp.ranking.end(), 0);
  auto peak = [](const SimResult &r) { return *std::max_element(r.peak_memory.begin(), r.peak_memory.end()); };
  std::stable_sort(cmp.ranking.begin(), cmp.ranking.end(), [&](std::size_t a, std::size_t b) {
    const auto &ra = cmp.outcomes[a].result;
    const auto &rb = cmp.outcomes[b].result;
    if (!ra || !rb) return ra.has_value() && !rb.has_value();
    return std::make_tuple(ra->makespan, ra->bubble_max, peak(*ra)) <
           std::make_tuple(rb->makespan, rb->bubble_max, peak(*rb));
  });
  return cmp;
}

SaveInterval optimal_save_interval(double save_cost, double failures_per_day) {
  if (!(save_cost > 0.0) || !(failures_per_day > 0.0) || !std::isfinite(save_cost) || !std::isfinite(failures_per_day))
    throw InvalidInput("save interval: save cost and failure rate must be positive");
  return {std::sqrt(2880.0 * save_cost / failures_per_day), 2.0 * std::sqrt(720.0 * save_cost * failures_per_day)};
}

double failover_overhead(double save_cost, double failures_per_day, double failover_cost, double interval) {
  if (!(interval > 0.0)) throw InvalidInput("failover overhead: interval must be positive");
  if (!(save_cost > 0.0) || !(failures_per_day > 0.0) || !(failover_cost >= 0.0))
    throw InvalidInput("failover overhead: costs and failure rate must be positive");
  return 1440.0 * save_cost / interval + failures_per_day * interval / 2.0 + failures_per_day * failover_cost;
}

}  // namespace sforge::pipe
