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


#ifndef SFORGE_IO_HPP_
#define SFORGE_IO_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sforge/fp8.hpp"
#include "sforge/moe_router.hpp"
#include "sforge/pipeline_sim.hpp"
#include "sforge/post_rewards.hpp"
#include "sforge/scaling_laws.hpp"

// File formats. Parsers throw InvalidInput on malformed content; the file
// helpers throw IoError when a path cannot be read or written.
namespace sforge::io {

using Json = nlohmann::ordered_json;

std::string read_file(const std::string &path);
void write_file(const std::string &path, std::string_view content);

/// Shortest text that parses back to the same double.
std::string format_double(double x);
/// Strict decimal/scientific parse of the whole string.
double parse_double(std::string_view s, std::string_view context);
/// Integral values become JSON integers, everything else stays a double.
Json number(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a required column.
  std::size_t column(const std::string &name) const;
};

/// Comma-separated, first row is the header, blank lines skipped, CRLF accepted.
CsvTable parse_csv(std::string_view text, std::string_view what);

std::vector<scaling::ScalingPoint> read_scaling_points(std::string_view csv);
std::vector<scaling::ArchPoint> read_arch_points(std::string_view csv);
std::string wind_tunnel_csv(const scaling::WindTunnelPlan &plan);
Json power_fit_json(const scaling::PowerLawFit &fit);
scaling::PowerLawFit power_fit_from_json(const Json &j);

/// One-row schedule CSV (`w1,w2,...` or `c0,c1,...`).
std::vector<double> parse_row(std::string_view text);
std::string format_row(std::span<const double> values);

std::string encode_wsm1(std::span<const double> values);
std::vector<double> decode_wsm1(std::string_view bytes);

struct TensorFile {
  fp8::Matrix matrix;
  fp8::Layout layout = fp8::Layout::act_grad;
};
std::string encode_fp8t(const fp8::Matrix &m, fp8::Layout layout);
TensorFile decode_fp8t(std::string_view bytes);
std::string audit_csv(std::span<const fp8::PrecisionReport> reports);

std::string router_series_csv(std::span<const router::LoadStats> series);
std::string routing_map_csv(const router::RoutingMap &map);
router::RoutingMap read_routing_map_csv(std::string_view csv, std::size_t tokens, std::size_t experts);

/// A pipeline plan file resolved into layers, plan and simulation options.
struct PlanFile {
  std::vector<pipe::LayerSpec> layers;
  pipe::PartitionPlan plan;
  pipe::SimOptions options;
};
PlanFile parse_plan_json(std::string_view text);
std::string events_csv(std::span<const pipe::ScheduleEvent> events);
Json summary_json(const pipe::SimResult &result);

struct Rollout {
  std::vector<reward::Response> responses;
  std::vector<std::string> texts;
};
Rollout parse_rollout_json(std::string_view text, const reward::SegmentOptions &seg = {});
Json lpo_report_json(const reward::LpoReport &report);
reward::ArenaOutcome read_arena_csv(std::string_view csv);

/// Parses JSON with a readable "line L, column C" message on failure.
Json parse_json(std::string_view text, std::string_view what);

}  // namespace sforge::io

#endif  // SFORGE_IO_HPP_
