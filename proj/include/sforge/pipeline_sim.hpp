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

#ifndef SFORGE_PIPELINE_SIM_HPP_
#define SFORGE_PIPELINE_SIM_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sforge::pipe {

/// Simulated time. One cost unit is `tick_resolution` ticks.
using Ticks = std::int64_t;

enum class LayerKind {
  Embedding,
  Dense,
  MoE,
  MTPBlock,  // unsplit MTP: k transformer sublayers plus the loss block
  MTPTransformer,
  MTPLoss,
  LMLoss,
};

enum class RecomputeMode { none, full, mtp_partial, fast_expert };

enum class Phase { Forward, Backward };

const char *to_string(LayerKind kind);
const char *to_string(RecomputeMode mode);
const char *to_string(Phase phase);
std::optional<LayerKind> parse_layer_kind(const std::string &s);
std::optional<RecomputeMode> parse_recompute_mode(const std::string &s);

struct LayerSpec {
  LayerKind kind = LayerKind::MoE;
  double fwd_cost = 1.0;
  double bwd_cost = 2.0;
  double act_memory = 1.0;
  /// Transformer sublayers inside an MTPBlock.
  int mtp_depth = 0;
};

/// Default per-kind costs in MoE-forward units: dense:MoE forward 1:2, MTP
/// 1.7x a MoE layer, embedding and LM loss 0.5 each; backward = 2x forward;
/// activation memory equal to the forward cost.
struct CostModel {
  std::map<LayerKind, double> fwd = {
      {LayerKind::Embedding, 0.5}, {LayerKind::Dense, 0.5},  {LayerKind::MoE, 1.0},   {LayerKind::MTPBlock, 1.7},
      {LayerKind::MTPTransformer, 1.7 * 0.7}, {LayerKind::MTPLoss, 1.7 * 0.3}, {LayerKind::LMLoss, 0.5},
  };
  std::map<LayerKind, double> bwd_override;
  std::map<LayerKind, double> act_memory_override;
  double bwd_ratio = 2.0;
  /// Share of an MTP block's cost carried by its transformer sublayers.
  double mtp_transformer_fraction = 0.7;

  LayerSpec make(LayerKind kind, int mtp_depth = 0) const;
};

/// Embedding, dense_layers Dense, moe_layers MoE, one MTPBlock (if
/// mtp_depth > 0) and the LM loss, in model order.
std::vector<LayerSpec> build_model(std::size_t dense_layers, std::size_t moe_layers, int mtp_depth,
                                   const CostModel &costs = {});

/// Replaces the single MTPBlock with mtp_depth MTPTransformer layers and one
/// MTPLoss layer, splitting every cost by `transformer_fraction`.
std::vector<LayerSpec> split_mtp(std::span<const LayerSpec> layers, double transformer_fraction = 0.7);

struct RecomputePolicy {
  RecomputeMode default_mode = RecomputeMode::none;
  std::map<LayerKind, RecomputeMode> overrides;
  /// Activation share a recomputed layer still keeps resident.
  double checkpoint_fraction = 0.1;

  RecomputeMode mode_for(LayerKind kind) const;
};

/// Extra backward cost of recomputing `layer` under `mode`.
double recompute_cost(const LayerSpec &layer, RecomputeMode mode, double mtp_transformer_fraction = 0.7);

struct PartitionPlan {
  std::string name;
  std::size_t p = 1;
  std::size_t v = 1;
  /// assignment[rank][chunk] = ordered layer indices (possibly empty).
  std::vector<std::vector<std::vector<std::size_t>>> assignment;
  RecomputePolicy recompute;

  std::size_t stage_count() const { return p * v; }
  /// Pipeline stage s lives on rank s % p as chunk s / p.
  const std::vector<std::size_t> &stage_layers(std::size_t stage) const { return assignment[stage % p][stage / p]; }
};

void validate_plan(const PartitionPlan &plan, std::size_t layer_count);

/// Builds a plan from per-stage layer lists given in pipeline order.
PartitionPlan plan_from_stages(std::size_t p, std::size_t v, const std::vector<std::vector<std::size_t>> &stages,
                               std::string name = {});

/// Contiguous partition into p*v stages minimizing the most expensive stage
/// (forward + backward + recompute); stages may be empty.
PartitionPlan balanced_plan(std::span<const LayerSpec> layers, std::size_t p, std::size_t v,
                            const RecomputePolicy &recompute = {}, std::string name = "balanced");

/// Conventional layout: embedding on the first stage, everything after the
/// last MoE/Dense layer (MTP and losses) on the last stage, transformer
/// layers spread evenly with earlier stages taking the remainder.
PartitionPlan uniform_plan(std::span<const LayerSpec> layers, std::size_t p, std::size_t v,
                           const RecomputePolicy &recompute = {}, std::string name = "uniform");

struct Instruction {
  Phase phase = Phase::Forward;
  std::size_t micro_batch = 0;
  std::size_t chunk = 0;

  bool operator==(const Instruction &) const = default;
};

/// Interleaved 1F1B instruction order of one rank (non-interleaved when v = 1).
std::vector<Instruction> build_instruction_order(std::size_t p, std::size_t v, std::size_t m, std::size_t rank);

struct ScheduleEvent {
  std::size_t rank = 0;
  Ticks start = 0;
  Ticks end = 0;
  std::size_t micro_batch = 0;
  std::size_t chunk = 0;
  Phase phase = Phase::Forward;
};

struct SimOptions {
  std::size_t micro_batches = 1;
  double comm_latency = 0.0;
  std::int64_t tick_resolution = 1000;
  double mtp_transformer_fraction = 0.7;
  /// Peak memory above this (if set) raises SimResult::oom.
  std::optional<double> memory_limit;
};

struct SimResult {
  Ticks makespan = 0;
  std::int64_t tick_resolution = 1000;
  std::vector<Ticks> busy;
  std::vector<double> bubble_ratio;
  double bubble_max = 0.0;
  double bubble_mean = 0.0;
  std::vector<double> peak_memory;
  bool oom = false;
  std::vector<ScheduleEvent> events;

  double makespan_units() const { return static_cast<double>(makespan) / static_cast<double>(tick_resolution); }
};

struct StageCosts {
  std::vector<Ticks> fwd;
  std::vector<Ticks> bwd;  // includes recompute
  std::vector<double> memory;
};

StageCosts stage_costs(const PartitionPlan &plan, std::span<const LayerSpec> layers, const SimOptions &opts);

SimResult simulate_schedule(const PartitionPlan &plan, std::span<const LayerSpec> layers, const SimOptions &opts);

/// Checks an event stream against the plan: one event per (micro-batch,
/// stage, phase) on the right rank with the right duration, no overlap on a
/// rank, and every cross-stage dependency (plus latency) respected. Returns
/// the list of violations (empty when valid).
std::vector<std::string> validate_schedule(const PartitionPlan &plan, std::span<const LayerSpec> layers,
                                           const SimOptions &opts, std::span<const ScheduleEvent> events);

struct PlanOutcome {
  std::size_t index = 0;
  std::string name;
  std::optional<SimResult> result;
  std::string error;
  /// (baseline makespan - makespan) / baseline makespan, baseline = plan 0.
  double relative_improvement = 0.0;
};

struct Comparison {
  std::vector<PlanOutcome> outcomes;  // input order
  std::vector<std::size_t> ranking;   // best first; failed plans last
};

/// Ranks by makespan, then max bubble, then peak memory, then input order.
Comparison compare_plans(std::span<const PartitionPlan> plans, std::span<const LayerSpec> layers,
                         const SimOptions &opts);
/// Same, with each plan carrying its own layer list (e.g. split vs unsplit MTP).
Comparison compare_plans(std::span<const PartitionPlan> plans, std::span<const std::vector<LayerSpec>> layers,
                         const SimOptions &opts);

struct SaveInterval {
  double interval_minutes = 0.0;
  double daily_overhead_minutes = 0.0;
};

/// s = sqrt(2880 C / F) minimizes 1440 C / s + F s / 2, whose minimum is
/// 2 sqrt(720 C F).
SaveInterval optimal_save_interval(double save_cost, double failures_per_day);

/// E = 1440 C / s + F s / 2 + F A, in minutes per day.
double failover_overhead(double save_cost, double failures_per_day, double failover_cost, double interval);

}  // namespace sforge::pipe

#endif  // SFORGE_PIPELINE_SIM_HPP_
