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

#include "sforge/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "sforge/error.hpp"

namespace sforge::io {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t p = line.find(sep, start);
    out.push_back(trim(line.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start)));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

void check_keys(const Json &obj, std::initializer_list<const char *> allowed, std::string_view what) {
  if (!obj.is_object()) throw InvalidInput(std::string(what) + ": expected a JSON object");
  for (const auto &item : obj.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char *k) { return item.key() == k; });
    if (!ok) throw InvalidInput(std::string(what) + ": unknown key \"" + item.key() + "\"");
  }
}

double get_number(const Json &j, std::string_view what) {
  if (!j.is_number()) throw InvalidInput(std::string(what) + ": expected a number");
  return j.get<double>();
}

std::uint64_t get_count(const Json &j, std::string_view what) {
  if (!j.is_number_integer() || (j.is_number_integer() && j.get<std::int64_t>() < 0))
    throw InvalidInput(std::string(what) + ": expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::vector<double> get_numbers(const Json &j, std::string_view what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto &x : j) out.push_back(get_number(x, what));
  return out;
}

template <typename T>
void put_le(std::string &out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::string_view bytes, std::size_t &pos, std::string_view what) {
  if (pos + sizeof(T) > bytes.size()) throw InvalidInput(std::string(what) + ": truncated file");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<T>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
  pos += sizeof(T);
  return v;
}

pipe::LayerKind kind_of(const std::string &s) {
  auto k = pipe::parse_layer_kind(s);
  if (!k) throw InvalidInput("plan: unknown layer kind \"" + s + "\"");
  return *k;
}

pipe::RecomputeMode mode_of(const Json &j) {
  if (!j.is_string()) throw InvalidInput("plan: recompute mode must be a string");
  auto m = pipe::parse_recompute_mode(j.get<std::string>());
  if (!m) throw InvalidInput("plan: unknown recompute mode \"" + j.get<std::string>() + "\"");
  return *m;
}

std::vector<std::size_t> index_list(const Json &j, std::string_view what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + ": expected an array of layer indices");
  std::vector<std::size_t> out;
  for (const auto &x : j) out.push_back(get_count(x, what));
  return out;
}

}  // namespace

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path);
  return ss.str();
}

void write_file(const std::string &path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("cannot write " + path);
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, std::string_view context) {
  std::string t = trim(s);
  std::string_view v = t;
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  double x = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw InvalidInput(std::string(context) + ": cannot parse number \"" + t + "\"");
  return x;
}

Json number(double x) {
  if (std::isfinite(x) && x == std::trunc(x) && std::abs(x) < 9007199254740992.0)
    return Json(static_cast<std::int64_t>(x));
  return Json(x);
}

Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error &e) {
    // e.what() carries "parse error at line L, column C: ...".
    std::string msg = e.what();
    const auto pos = msg.find("parse error");
    throw InvalidInput(std::string(what) + ": " + (pos == std::string::npos ? msg : msg.substr(pos)));
  }
}

std::size_t CsvTable::column(const std::string &name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InvalidInput("csv: missing column \"" + name + "\"");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(std::string_view text, std::string_view what) {
  CsvTable t;
  std::size_t start = 0, line_no = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++line_no;
    if (!trim(line).empty()) {
      auto fields = split(line, ',');
      if (t.header.empty()) {
        t.header = std::move(fields);
      } else {
        if (fields.size() != t.header.size())
          throw InvalidInput(std::string(what) + ": line " + std::to_string(line_no) + " has " +
                             std::to_string(fields.size()) + " fields, expected " + std::to_string(t.header.size()));
        t.rows.push_back(std::move(fields));
      }
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  if (t.header.empty()) throw InvalidInput(std::string(what) + ": empty CSV");
  return t;
}

std::vector<scaling::ScalingPoint> read_scaling_points(std::string_view csv) {
  const CsvTable t = parse_csv(csv, "scaling csv");
  const std::size_t c = t.column("compute"), v = t.column("value");
  std::vector<scaling::ScalingPoint> out;
  for (const auto &r : t.rows) out.push_back({parse_double(r[c], "compute"), parse_double(r[v], "value")});
  return out;
}

std::vector<scaling::ArchPoint> read_arch_points(std::string_view csv) {
  const CsvTable t = parse_csv(csv, "EL csv");
  const std::size_t c = t.column("compute"), a = t.column("activation_ratio"), g = t.column("granularity"),
                    o = t.column("observed");
  std::vector<scaling::ArchPoint> out;
  for (const auto &r : t.rows)
    out.push_back({parse_double(r[c], "compute"), parse_double(r[a], "activation_ratio"),
                   parse_double(r[g], "granularity"), parse_double(r[o], "observed")});
  return out;
}

std::string wind_tunnel_csv(const scaling::WindTunnelPlan &plan) {
  std::string out = "flops_per_token,train_tokens,learning_rate,batch_size,total_compute\n";
  for (const auto &e : plan.entries)
    out += format_double(e.flops_per_token) + ',' + format_double(e.train_tokens) + ',' +
           format_double(e.learning_rate) + ',' + std::to_string(e.batch_size) + ',' + format_double(e.total_compute) +
           '\n';
  return out;
}

Json power_fit_json(const scaling::PowerLawFit &fit) {
  Json j;
  j["coefficient"] = number(fit.coefficient);
  j["exponent"] = number(fit.exponent);
  j["residual"] = number(fit.residual);
  return j;
}

scaling::PowerLawFit power_fit_from_json(const Json &j) {
  check_keys(j, {"coefficient", "exponent", "residual"}, "power-law fit");
  if (!j.contains("coefficient") || !j.contains("exponent"))
    throw InvalidInput("power-law fit: needs coefficient and exponent");
  scaling::PowerLawFit f;
  f.coefficient = get_number(j.at("coefficient"), "coefficient");
  f.exponent = get_number(j.at("exponent"), "exponent");
  if (j.contains("residual")) f.residual = get_number(j.at("residual"), "residual");
  return f;
}

std::vector<double> parse_row(std::string_view text) {
  std::string t = trim(text);
  while (!t.empty() && (t.back() == '\n' || t.back() == '\r')) t.pop_back();
  if (t.find('\n') != std::string::npos) throw InvalidInput("schedule csv: expected a single row");
  if (t.empty()) return {};
  std::vector<double> out;
  for (const auto &f : split(t, ',')) out.push_back(parse_double(f, "schedule csv"));
  return out;
}

std::string format_row(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_double(values[i]);
  return out + '\n';
}

std::string encode_wsm1(std::span<const double> values) {
  std::string out = "WSM1";
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint64_t>(out, values.size());
  for (double v : values) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

std::vector<double> decode_wsm1(std::string_view bytes) {
  if (bytes.substr(0, 4) != "WSM1") throw InvalidInput("checkpoint file: bad magic (expected WSM1)");
  std::size_t pos = 4;
  const auto version = get_le<std::uint32_t>(bytes, pos, "checkpoint file");
  if (version != 1) throw InvalidInput("checkpoint file: unsupported version " + std::to_string(version));
  const auto count = get_le<std::uint64_t>(bytes, pos, "checkpoint file");
  if ((bytes.size() - pos) / 8 != count || (bytes.size() - pos) % 8 != 0)
    throw InvalidInput("checkpoint file: payload size does not match the element count");
  std::vector<double> out(count);
  for (auto &v : out) v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos, "checkpoint file"));
  return out;
}

std::string encode_fp8t(const fp8::Matrix &m, fp8::Layout layout) {
  if (m.rows > 0xFFFFFFFFu || m.cols > 0xFFFFFFFFu) throw InvalidInput("tensor file: dimensions exceed 32 bits");
  std::string out = "FP8T";
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols));
  out.push_back(static_cast<char>(layout));
  for (double v : m.data) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

TensorFile decode_fp8t(std::string_view bytes) {
  if (bytes.substr(0, 4) != "FP8T") throw InvalidInput("tensor file: bad magic (expected FP8T)");
  std::size_t pos = 4;
  const auto version = get_le<std::uint32_t>(bytes, pos, "tensor file");
  if (version != 1) throw InvalidInput("tensor file: unsupported version " + std::to_string(version));
  const auto rows = get_le<std::uint32_t>(bytes, pos, "tensor file");
  const auto cols = get_le<std::uint32_t>(bytes, pos, "tensor file");
  const auto tag = get_le<std::uint8_t>(bytes, pos, "tensor file");
  if (tag > 1) throw InvalidInput("tensor file: unknown layout tag " + std::to_string(tag));
  const std::uint64_t n = std::uint64_t{rows} * cols;
  if (bytes.size() - pos != n * 8) throw InvalidInput("tensor file: payload size does not match rows x cols");
  TensorFile t;
  t.layout = static_cast<fp8::Layout>(tag);
  t.matrix = fp8::Matrix(rows, cols);
  for (auto &v : t.matrix.data) v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos, "tensor file"));
  return t;
}

std::string audit_csv(std::span<const fp8::PrecisionReport> reports) {
  std::string out = "layer,underflow_rate,distortion,flag\n";
  for (const auto &r : reports) {
    std::string flag = "ok";
    if (!r.error.empty())
      flag = "error";
    else if (r.underflow_flag && r.distortion_flag)
      flag = "underflow+distortion";
    else if (r.underflow_flag)
      flag = "underflow";
    else if (r.distortion_flag)
      flag = "distortion";
    out += r.layer + ',' + format_double(r.underflow_rate) + ',' + format_double(r.distortion) + ',' + flag + '\n';
  }
  return out;
}

std::string router_series_csv(std::span<const router::LoadStats> series) {
  std::string out = "step,max_violation_ratio,mean_count,max_count,min_count\n";
  for (std::size_t s = 0; s < series.size(); ++s)
    out += std::to_string(s + 1) + ',' + format_double(series[s].max_violation_ratio) + ',' +
           format_double(series[s].mean_count) + ',' + std::to_string(series[s].max_count) + ',' +
           std::to_string(series[s].min_count) + '\n';
  return out;
}

std::string routing_map_csv(const router::RoutingMap &map) {
  std::string out = "token,expert,probability,selected\n";
  for (std::size_t t = 0; t < map.tokens; ++t)
    for (std::size_t e = 0; e < map.experts; ++e) {
      if (!map.is_selected(t, e) && map.probability(t, e) == 0.0) continue;
      out += std::to_string(t) + ',' + std::to_string(e) + ',' + format_double(map.probability(t, e)) + ',' +
             (map.is_selected(t, e) ? "1" : "0") + '\n';
    }
  return out;
}

router::RoutingMap read_routing_map_csv(std::string_view csv, std::size_t tokens, std::size_t experts) {
  const CsvTable t = parse_csv(csv, "routing map csv");
  const std::size_t ct = t.column("token"), ce = t.column("expert"), cp = t.column("probability"),
                    cs = t.column("selected");
  router::RoutingMap map(tokens, experts);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto &r : t.rows) {
    const double tok = parse_double(r[ct], "token"), ex = parse_double(r[ce], "expert");
    if (tok < 0 || ex < 0 || tok != std::trunc(tok) || ex != std::trunc(ex) || tok >= static_cast<double>(tokens) ||
        ex >= static_cast<double>(experts))
      throw InvalidInput("routing map csv: entry (" + r[ct] + "," + r[ce] + ") out of range");
    const auto ti = static_cast<std::size_t>(tok), ei = static_cast<std::size_t>(ex);
    if (!seen.insert({ti, ei}).second)
      throw InvalidInput("routing map csv: duplicate entry (" + r[ct] + "," + r[ce] + ")");
    if (r[cs] != "0" && r[cs] != "1") throw InvalidInput("routing map csv: selected must be 0 or 1");
    map.prob[ti * experts + ei] = parse_double(r[cp], "probability");
    map.selected[ti * experts + ei] = r[cs] == "1" ? 1 : 0;
  }
  return map;
}

PlanFile parse_plan_json(std::string_view text) {
  const Json j = parse_json(text, "plan");
  check_keys(j,
             {"name", "p", "v", "layers", "model", "split_mtp", "assignment", "stages", "recompute", "costs",
              "tick_resolution", "comm_latency", "micro_batches", "memory_limit"},
             "plan");
  PlanFile pf;

  pipe::CostModel costs;
  if (j.contains("costs")) {
    for (const auto &item : j.at("costs").items()) {
      if (item.key() == "bwd_ratio")
        costs.bwd_ratio = get_number(item.value(), "costs.bwd_ratio");
      else if (item.key() == "mtp_transformer_fraction")
        costs.mtp_transformer_fraction = get_number(item.value(), "costs.mtp_transformer_fraction");
      else
        costs.fwd[kind_of(item.key())] = get_number(item.value(), "costs." + item.key());
    }
  }
  pf.options.mtp_transformer_fraction = costs.mtp_transformer_fraction;

  if (j.contains("layers") == j.contains("model")) throw InvalidInput("plan: give exactly one of layers or model");
  if (j.contains("model")) {
    const Json &m = j.at("model");
    check_keys(m, {"dense", "moe", "mtp_depth"}, "plan.model");
    pf.layers = pipe::build_model(m.contains("dense") ? get_count(m.at("dense"), "model.dense") : 0,
                                  m.contains("moe") ? get_count(m.at("moe"), "model.moe") : 0,
                                  m.contains("mtp_depth") ? static_cast<int>(get_count(m.at("mtp_depth"), "mtp_depth")) : 0,
                                  costs);
  } else {
    if (!j.at("layers").is_array()) throw InvalidInput("plan: layers must be an array");
    for (const auto &l : j.at("layers")) {
      check_keys(l, {"kind", "fwd", "bwd", "memory", "mtp_depth"}, "plan.layers[]");
      if (!l.contains("kind") || !l.at("kind").is_string()) throw InvalidInput("plan: every layer needs a kind");
      const int depth = l.contains("mtp_depth") ? static_cast<int>(get_count(l.at("mtp_depth"), "mtp_depth")) : 1;
      pipe::LayerSpec s = costs.make(kind_of(l.at("kind").get<std::string>()), depth);
      if (l.contains("fwd")) {
        s.fwd_cost = get_number(l.at("fwd"), "layer fwd");
        s.bwd_cost = costs.bwd_ratio * s.fwd_cost;
        s.act_memory = s.fwd_cost;
      }
      if (l.contains("bwd")) s.bwd_cost = get_number(l.at("bwd"), "layer bwd");
      if (l.contains("memory")) s.act_memory = get_number(l.at("memory"), "layer memory");
      pf.layers.push_back(s);
    }
  }
  if (j.contains("split_mtp")) {
    if (!j.at("split_mtp").is_boolean()) throw InvalidInput("plan: split_mtp must be true or false");
    if (j.at("split_mtp").get<bool>()) pf.layers = pipe::split_mtp(pf.layers, costs.mtp_transformer_fraction);
  }

  pipe::RecomputePolicy rc;
  if (j.contains("recompute")) {
    const Json &r = j.at("recompute");
    check_keys(r, {"default", "overrides", "checkpoint_fraction"}, "plan.recompute");
    if (r.contains("default")) rc.default_mode = mode_of(r.at("default"));
    if (r.contains("overrides")) {
      if (!r.at("overrides").is_object()) throw InvalidInput("plan: recompute.overrides must be an object");
      for (const auto &item : r.at("overrides").items()) rc.overrides[kind_of(item.key())] = mode_of(item.value());
    }
    if (r.contains("checkpoint_fraction")) {
      rc.checkpoint_fraction = get_number(r.at("checkpoint_fraction"), "checkpoint_fraction");
      if (!(rc.checkpoint_fraction >= 0.0 && rc.checkpoint_fraction <= 1.0))
        throw InvalidInput("plan: checkpoint_fraction must lie in [0, 1]");
    }
  }

  if (!j.contains("p") || !j.contains("v")) throw InvalidInput("plan: p and v are required");
  const std::size_t p = get_count(j.at("p"), "p"), v = get_count(j.at("v"), "v");
  const std::string name = j.contains("name") && j.at("name").is_string() ? j.at("name").get<std::string>() : "plan";

  if (j.contains("assignment") == j.contains("stages")) throw InvalidInput("plan: give exactly one of assignment or stages");
  if (j.contains("stages")) {
    if (!j.at("stages").is_array()) throw InvalidInput("plan: stages must be an array of layer lists");
    std::vector<std::vector<std::size_t>> stages;
    for (const auto &s : j.at("stages")) stages.push_back(index_list(s, "plan.stages"));
    pf.plan = pipe::plan_from_stages(p, v, stages, name);
    pf.plan.recompute = rc;
  } else if (const Json &a = j.at("assignment"); a.is_string()) {
    if (a == "balanced")
      pf.plan = pipe::balanced_plan(pf.layers, p, v, rc, name);
    else if (a == "uniform")
      pf.plan = pipe::uniform_plan(pf.layers, p, v, rc, name);
    else
      throw InvalidInput("plan: assignment must be \"balanced\", \"uniform\" or a [rank][chunk] array");
  } else {
    if (!a.is_array()) throw InvalidInput("plan: assignment must be an array");
    pf.plan.name = name;
    pf.plan.p = p;
    pf.plan.v = v;
    pf.plan.recompute = rc;
    for (const auto &rank : a) {
      if (!rank.is_array()) throw InvalidInput("plan: assignment[rank] must be an array of chunks");
      std::vector<std::vector<std::size_t>> chunks;
      for (const auto &c : rank) chunks.push_back(index_list(c, "plan.assignment"));
      pf.plan.assignment.push_back(std::move(chunks));
    }
  }
  pipe::validate_plan(pf.plan, pf.layers.size());

  if (j.contains("tick_resolution")) {
    pf.options.tick_resolution = static_cast<std::int64_t>(get_count(j.at("tick_resolution"), "tick_resolution"));
    if (pf.options.tick_resolution < 1) throw InvalidInput("plan: tick_resolution must be at least 1");
  }
  if (j.contains("comm_latency")) pf.options.comm_latency = get_number(j.at("comm_latency"), "comm_latency");
  if (j.contains("micro_batches")) pf.options.micro_batches = get_count(j.at("micro_batches"), "micro_batches");
  if (j.contains("memory_limit")) pf.options.memory_limit = get_number(j.at("memory_limit"), "memory_limit");
  return pf;
}

std::string events_csv(std::span<const pipe::ScheduleEvent> events) {
  std::string out = "rank,start,end,micro_batch,chunk,phase\n";
  for (const auto &e : events)
    out += std::to_string(e.rank) + ',' + std::to_string(e.start) + ',' + std::to_string(e.end) + ',' +
           std::to_string(e.micro_batch) + ',' + std::to_string(e.chunk) + ',' + pipe::to_string(e.phase) + '\n';
  return out;
}

Json summary_json(const pipe::SimResult &r) {
  Json j;
  j["makespan"] = number(r.makespan_units());
  j["makespan_ticks"] = r.makespan;
  j["tick_resolution"] = r.tick_resolution;
  j["bubble_max"] = number(r.bubble_max);
  j["bubble_mean"] = number(r.bubble_mean);
  Json bubbles = Json::array(), mem = Json::array();
  for (double b : r.bubble_ratio) bubbles.push_back(number(b));
  for (double m : r.peak_memory) mem.push_back(number(m));
  j["bubble_per_rank"] = bubbles;
  j["peak_memory_per_rank"] = mem;
  j["oom"] = r.oom;
  return j;
}

Rollout parse_rollout_json(std::string_view text, const reward::SegmentOptions &seg) {
  const Json j = parse_json(text, "rollout");
  check_keys(j, {"responses"}, "rollout");
  if (!j.contains("responses") || !j.at("responses").is_array())
    throw InvalidInput("rollout: responses must be an array");
  Rollout out;
  std::size_t idx = 0;
  for (const auto &r : j.at("responses")) {
    const std::string who = "rollout.responses[" + std::to_string(idx++) + "]";
    check_keys(r, {"old_logprobs", "new_logprobs", "text", "tokens", "reward", "correct"}, who);
    for (const char *k : {"old_logprobs", "new_logprobs", "text", "reward"})
      if (!r.contains(k)) throw InvalidInput(who + ": missing " + k);
    reward::Response resp;
    resp.old_logprobs = get_numbers(r.at("old_logprobs"), who + ".old_logprobs");
    resp.new_logprobs = get_numbers(r.at("new_logprobs"), who + ".new_logprobs");
    resp.reward = get_number(r.at("reward"), who + ".reward");
    if (r.contains("correct")) {
      if (r.at("correct").is_boolean())
        resp.correct = r.at("correct").get<bool>();
      else
        resp.correct = get_number(r.at("correct"), who + ".correct") != 0.0;
    }
    if (!r.at("text").is_string()) throw InvalidInput(who + ": text must be a string");
    const std::string txt = r.at("text").get<std::string>();
    std::vector<std::string> tokens;
    if (r.contains("tokens")) {
      if (!r.at("tokens").is_array()) throw InvalidInput(who + ": tokens must be an array of strings");
      for (const auto &t : r.at("tokens")) {
        if (!t.is_string()) throw InvalidInput(who + ": tokens must be an array of strings");
        tokens.push_back(t.get<std::string>());
      }
    } else {
      tokens = reward::simple_tokenize(txt);
    }
    if (tokens.size() != resp.old_logprobs.size())
      throw InvalidInput(who + ": " + std::to_string(tokens.size()) + " tokens but " +
                         std::to_string(resp.old_logprobs.size()) + " log-probs");
    resp.sentences = reward::segment_sentences(tokens, txt, seg);
    out.responses.push_back(std::move(resp));
    out.texts.push_back(txt);
  }
  return out;
}

Json lpo_report_json(const reward::LpoReport &report) {
  Json j;
  j["objective"] = number(report.objective);
  Json adv = Json::array();
  for (double a : report.advantages) adv.push_back(number(a));
  j["advantages"] = adv;
  Json per = Json::array();
  for (const auto &s : report.sentences) {
    Json e;
    e["response"] = s.response;
    e["span"] = Json::array({s.span.begin, s.span.end});
    e["ratio"] = number(s.ratio);
    e["clipped"] = s.clipped;
    per.push_back(e);
  }
  j["per_sentence"] = per;
  return j;
}

reward::ArenaOutcome read_arena_csv(std::string_view csv) {
  const CsvTable t = parse_csv(csv, "arena csv");
  const std::size_t ci = t.column("i"), cj = t.column("j"), cr = t.column("result");
  reward::ArenaOutcome out;
  std::size_t g = 0;
  for (const auto &r : t.rows) {
    const double i = parse_double(r[ci], "i"), jj = parse_double(r[cj], "j");
    if (i < 0 || jj < 0 || i != std::trunc(i) || jj != std::trunc(jj))
      throw InvalidInput("arena csv: indices must be non-negative integers");
    auto res = reward::parse_match_result(r[cr]);
    if (!res) throw InvalidInput("arena csv: result must be win, loss or tie (got \"" + r[cr] + "\")");
    const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(jj);
    if (out.results.count({a, b})) throw InvalidInput("arena csv: duplicate pair (" + r[ci] + "," + r[cj] + ")");
    out.set(a, b, *res);
    g = std::max({g, a + 1, b + 1});
  }
  out.group_size = g;
  return out;
}

}  // namespace sforge::io
