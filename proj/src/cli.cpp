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

#include "sforge/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <set>

#include "sforge/error.hpp"
#include "sforge/fp8.hpp"
#include "sforge/moe_router.hpp"
#include "sforge/pipeline_sim.hpp"
#include "sforge/post_rewards.hpp"
#include "sforge/rng.hpp"
#include "sforge/scaling_laws.hpp"
#include "sforge/wsm.hpp"

namespace sforge::cli {

namespace {

using io::Json;

const std::set<std::string> kParamKeys = {
    "alignment", "alpha", "alpha_per_task", "comm_latency", "delta", "dim", "distortion_threshold", "epsilon",
    "experts", "failover_cost", "failures", "micro_batches", "save_cost", "saturation", "skew", "steps", "tokens",
    "underflow_threshold",
};
const std::set<std::string> kRouterKeys = {"n_experts", "top_k",       "n_groups", "top_groups",
                                           "gate_scale", "update_rate", "alignment"};

struct Ctx {
  std::ostream &out;
  RunConfig cfg;
  std::uint64_t seed = 0;
  std::optional<std::string> format;
  std::optional<std::string> out_path;

  std::string format_or(const std::string &fallback) const { return format.value_or(fallback); }

  void emit(const std::string &text) const {
    if (out_path)
      io::write_file(*out_path, text);
    else
      out << text;
  }
  void emit_json(const Json &j) const { emit(j.dump() + "\n"); }

  const std::string &require_out(const std::string &what) const {
    if (!out_path) throw InvalidInput(what + " writes a binary file and needs --out");
    return *out_path;
  }
};

/// A flag whose value may also come from the config file.
template <typename T>
struct Flag {
  T value{};
  CLI::Option *opt = nullptr;
  std::string key;

  T get(const Ctx &c) const {
    if (opt->count() > 0 || !c.cfg.params.contains(key)) return value;
    try {
      return c.cfg.params.at(key).template get<T>();
    } catch (const nlohmann::json::exception &) {
      throw InvalidInput("config: bad value for \"" + key + "\"");
    }
  }
  bool given(const Ctx &c) const { return opt->count() > 0 || c.cfg.params.contains(key); }
};

template <typename T>
void add_flag(CLI::App *app, Flag<T> &f, const std::string &name, T def, const std::string &help) {
  f.value = def;
  f.key = name;
  std::replace(f.key.begin(), f.key.end(), '-', '_');
  if (!kParamKeys.count(f.key)) throw std::logic_error("flag without config key: " + name);
  f.opt = app->add_option("--" + name, f.value, help)->capture_default_str();
}

using Runner = std::function<void(Ctx &)>;
struct Command {
  CLI::App *app;
  Runner run;
};

std::vector<double> list_or_file(const std::string &inline_list, const std::string &file, const std::string &what) {
  if (!inline_list.empty() && !file.empty()) throw InvalidInput("give either --" + what + " or --" + what + "-file");
  if (!file.empty()) return io::parse_row(io::read_file(file));
  return io::parse_row(inline_list);
}

Json array_of(const std::vector<double> &v) {
  Json a = Json::array();
  for (double x : v) a.push_back(io::number(x));
  return a;
}

std::string check_format(const std::string &f, std::initializer_list<const char *> allowed) {
  for (const char *a : allowed)
    if (f == a) return f;
  throw InvalidInput("unsupported --format \"" + f + "\" for this command");
}

scaling::PowerLawFit read_fit(const std::string &path) {
  return io::power_fit_from_json(io::parse_json(io::read_file(path), path));
}

// ---------------------------------------------------------------- scaling

void add_scaling(CLI::App &root, std::vector<Command> &cmds) {
  auto *grp = root.add_subcommand("scaling", "Scaling-law fits and wind-tunnel planning");
  grp->require_subcommand(1);

  {
    auto s = std::make_shared<std::pair<std::string, Flag<double>>>();
    auto *app = grp->add_subcommand("fit-power", "Fit y = a * C^b to a compute,value CSV");
    app->add_option("--in", s->first, "CSV with columns compute,value")->required();
    add_flag(app, s->second, "delta", scaling::kDefaultHuberDelta, "Huber delta on log residuals");
    cmds.push_back({app, [s](Ctx &c) {
                      const auto pts = io::read_scaling_points(io::read_file(s->first));
                      const auto fit = scaling::fit_power_law(pts, s->second.get(c));
                      if (check_format(c.format_or("json"), {"json", "csv"}) == "csv")
                        c.emit("coefficient,exponent,residual\n" + io::format_double(fit.coefficient) + ',' +
                               io::format_double(fit.exponent) + ',' + io::format_double(fit.residual) + '\n');
                      else
                        c.emit_json(io::power_fit_json(fit));
                    }});
  }
  {
    struct S {
      std::string in;
      Flag<double> delta, saturation;
    };
    auto s = std::make_shared<S>();
    auto *app = grp->add_subcommand("fit-el", "Fit the efficiency-leverage law");
    app->add_option("--in", s->in, "CSV with columns compute,activation_ratio,granularity,observed")->required();
    add_flag(app, s->delta, "delta", scaling::kDefaultHuberDelta, "Huber delta on log residuals");
    add_flag(app, s->saturation, "saturation", scaling::kDefaultSaturation, "Activation saturation S");
    cmds.push_back({app, [s](Ctx &c) {
                      check_format(c.format_or("json"), {"json"});
                      const auto pts = io::read_arch_points(io::read_file(s->in));
                      const auto fit = scaling::fit_el_law(pts, s->delta.get(c), s->saturation.get(c));
                      Json j;
                      j["a"] = io::number(fit.params.a);
                      j["d"] = io::number(fit.params.d);
                      j["beta"] = io::number(fit.params.beta);
                      j["gamma"] = io::number(fit.params.gamma);
                      j["saturation"] = io::number(fit.params.saturation);
                      j["residual"] = io::number(fit.residual);
                      c.emit_json(j);
                    }});
  }
  {
    struct S {
      std::string lr, bs, m, d;
      double compute = 0.0;
    };
    auto s = std::make_shared<S>();
    auto *app = grp->add_subcommand("predict", "Predict hyperparameters (and allocation) at a compute budget");
    app->add_option("--lr-fit", s->lr, "Learning-rate fit JSON")->required();
    app->add_option("--bs-fit", s->bs, "Batch-size fit JSON")->required();
    app->add_option("--m-fit", s->m, "Model-size (FLOPs/token) fit JSON");
    app->add_option("--d-fit", s->d, "Data-size fit JSON");
    app->add_option("--compute", s->compute, "Compute budget in FLOPs")->required();
    cmds.push_back({app, [s](Ctx &c) {
                      check_format(c.format_or("json"), {"json"});
                      if (s->m.empty() != s->d.empty()) throw InvalidInput("give both --m-fit and --d-fit, or neither");
                      const auto hp = scaling::predict_hparams(read_fit(s->lr), read_fit(s->bs), s->compute);
                      Json j;
                      j["compute"] = io::number(s->compute);
                      j["learning_rate"] = io::number(hp.learning_rate);
                      j["batch_size"] = hp.batch_size;
                      if (!s->m.empty()) {
                        const auto a = scaling::predict_allocation(read_fit(s->m), read_fit(s->d), s->compute);
                        j["flops_per_token"] = io::number(a.flops_per_token);
                        j["tokens"] = io::number(a.tokens);
                        j["adjusted"] = a.adjusted;
                      }
                      c.emit_json(j);
                    }});
  }
  {
    struct S {
      std::string lr, bs, m, d;
      double min_size = 0.0, max_size = 0.0;
      std::size_t models = 0;
    };
    auto s = std::make_shared<S>();
    auto *app = grp->add_subcommand("wind-tunnel", "Plan a power-law-spaced ladder of small runs");
    app->add_option("--lr-fit", s->lr, "Learning-rate fit JSON")->required();
    app->add_option("--bs-fit", s->bs, "Batch-size fit JSON")->required();
    app->add_option("--m-fit", s->m, "Model-size (FLOPs/token) fit JSON")->required();
    app->add_option("--d-fit", s->d, "Data-size fit JSON")->required();
    app->add_option("--min-size", s->min_size, "Smallest FLOPs/token")->required();
    app->add_option("--max-size", s->max_size, "Largest FLOPs/token")->required();
    app->add_option("--models", s->models, "Number of runs")->required();
    cmds.push_back({app, [s](Ctx &c) {
                      check_format(c.format_or("csv"), {"csv"});
                      const auto plan = scaling::plan_wind_tunnel(s->min_size, s->max_size, s->models, read_fit(s->lr),
                                                                  read_fit(s->bs), read_fit(s->m), read_fit(s->d));
                      c.emit(io::wind_tunnel_csv(plan));
                    }});
  }
}

// ---------------------------------------------------------------- wsm

void add_wsm(CLI::App &root, std::vector<Command> &cmds) {
  auto *grp = root.add_subcommand("wsm", "Checkpoint merging");
  grp->require_subcommand(1);

  struct Sched {
    std::string w, c, w_file, c_file;
  };
  auto add_sched = [](CLI::App *app, Sched &s) {
    app->add_option("--w", s.w, "Gradient decay weights w1,...,wk");
    app->add_option("--c", s.c, "Merge weights c0,...,ck");
    app->add_option("--w-file", s.w_file, "One-row CSV of w");
    app->add_option("--c-file", s.c_file, "One-row CSV of c");
  };
  // Resolves the schedule to merge weights; `from_w` reports which side was given.
  auto resolve = [](const Sched &s, bool *from_w) {
    const bool has_w = !s.w.empty() || !s.w_file.empty();
    const bool has_c = !s.c.empty() || !s.c_file.empty();
    if (has_w == has_c) throw InvalidInput("give exactly one of --w/--w-file or --c/--c-file");
    if (from_w) *from_w = has_w;
    if (has_w) return wsm::decay_to_merge_weights({list_or_file(s.w, s.w_file, "w")});
    wsm::MergeWeights m{list_or_file(s.c, s.c_file, "c")};
    wsm::validate(m);
    return m;
  };

  {
    auto s = std::make_shared<Sched>();
    auto *app = grp->add_subcommand("convert", "Convert between gradient-decay weights w and merge weights c");
    add_sched(app, *s);
    cmds.push_back({app, [s, resolve](Ctx &c) {
                      bool from_w = false;
                      const auto m = resolve(*s, &from_w);
                      const auto values = from_w ? m.c : wsm::merge_to_gradient_weights(m).w;
                      if (check_format(c.format_or("json"), {"json", "csv"}) == "csv") {
                        c.emit(io::format_row(values));
                      } else {
                        Json j;
                        j[from_w ? "c" : "w"] = array_of(values);
                        c.emit_json(j);
                      }
                    }});
  }
  {
    struct S {
      Sched sched;
      std::vector<std::string> checkpoints;
    };
    auto s = std::make_shared<S>();
    auto *app = grp->add_subcommand("merge", "Merge WSM1 checkpoint files theta_n..theta_n+k into one");
    add_sched(app, s->sched);
    app->add_option("--checkpoint", s->checkpoints, "Checkpoint files in training order (repeatable)")->required();
    cmds.push_back({app, [s, resolve](Ctx &c) {
                      const std::string &path = c.require_out("wsm merge");
                      const auto m = resolve(s->sched, nullptr);
                      wsm::CheckpointSeries series;
                      for (const auto &f : s->checkpoints) series.vectors.push_back(io::decode_wsm1(io::read_file(f)));
                      io::write_file(path, io::encode_wsm1(wsm::merge_checkpoints(series, m)));
                    }});
  }
  {
    struct S {
      Sched sched;
      Flag<std::size_t> dim;
    };
    auto s = std::make_shared<S>();
    auto *app = grp->add_subcommand("simulate", "Check merge/decay equivalence on seeded random updates");
    add_sched(app, s->sched);
    add_flag<std::size_t>(app, s->dim, "dim", 1000, "Parameter dimension");
    cmds.push_back({app, [s, resolve](Ctx &c) {
                      check_format(c.format_or("json"), {"json"});
                      const auto m = resolve(s->sched, nullptr);
                      const auto w = wsm::merge_to_gradient_weights(m);
                      const std::size_t dim = s->dim.get(c);
                      Xoshiro256 rng(c.seed);
                      std::normal_distribution<double> normal(0.0, 1.0);
                      wsm::Vector theta(dim);
                      for (auto &x : theta) x = normal(rng);
                      std::vector<wsm::Vector> grads(w.w.size(), wsm::Vector(dim));
                      for (auto &g : grads)
                        for (auto &x : g) x = 1e-3 * normal(rng);
                      const auto rep = wsm::simulate_equivalence(grads, theta, w);
                      Json j;
                      j["k"] = w.w.size();
                      j["dim"] = dim;
                      j["max_abs_diff"] = io::number(rep.max_abs_diff);
                      c.emit_json(j);
                    }});
  }
}

// ---------------------------------------------------------------- router

void add_router(CLI::App &root, std::vector<Command> &cmds) {
  auto *grp = root.add_subcommand("router", "MoE routing and load balancing");
  grp->require_subcommand(1);

  {
    struct S {
      Flag<std::size_t> steps, tokens, experts;
      Flag<double> skew;
      std::size_t top_k = 8, groups = 8, top_groups = 4;
      double update_rate = 1e-3, gate_scale = 2.5;
      CLI::Option *top_k_opt, *groups_opt, *top_groups_opt, *update_opt, *gate_opt;
    };
    auto s = std::make_shared<S>();
    auto *app = grp->add_subcommand("simulate", "Simulate bias-based load balancing; emits per-step CSV");
    add_flag<std::size_t>(app, s->steps, "steps", 200, "Number of steps");
    add_flag<std::size_t>(app, s->tokens, "tokens", 1024, "Tokens per step");
    add_flag<std::size_t>(app, s->experts, "experts", 256, "Routed experts");
    add_flag(app, s->skew, "skew", 2.0, "Half-width of the per-expert score offsets");
    s->top_k_opt = app->add_option("--top-k", s->top_k, "Experts per token")->capture_default_str();
    s->groups_opt = app->add_option("--groups", s->groups, "Expert groups")->capture_default_str();
    s->top_groups_opt = app->add_option("--top-groups", s->top_groups, "Groups kept per token")->capture_default_str();
    s->update_opt = app->add_option("--update-rate", s->update_rate, "Bias update rate u")->capture_default_str();
    s->gate_opt = app->add_option("--gate-scale", s->gate_scale, "Gate scaling factor")->capture_default_str();
    cmds.push_back({app, [s](Ctx &c) {
                      router::RouterConfig rc;
                      if (c.cfg.params.contains("router")) {
                        const Json &r = c.cfg.params.at("router");
                        try {
                          if (r.contains("n_experts")) rc.n_experts = r.at("n_experts").get<std::size_t>();
                          if (r.contains("top_k")) rc.top_k = r.at("top_k").get<std::size_t>();
                          if (r.contains("n_groups")) rc.n_groups = r.at("n_groups").get<std::size_t>();
                          if (r.contains("top_groups")) rc.top_groups = r.at("top_groups").get<std::size_t>();
                          if (r.contains("gate_scale")) rc.gate_scale = r.at("gate_scale").get<double>();
                          if (r.contains("update_rate")) rc.update_rate = r.at("update_rate").get<double>();
                          if (r.contains("alignment")) rc.alignment = r.at("alignment").get<std::size_t>();
                        } catch (const nlohmann::json::exception &) {
                          throw InvalidInput("config: bad value in \"router\"");
                        }
                      }
                      if (s->experts.given(c)) rc.n_experts = s->experts.get(c);
                      if (s->top_k_opt->count()) rc.top_k = s->top_k;
                      if (s->groups_opt->count()) rc.n_groups = s->groups;
                      if (s->top_groups_opt->count()) rc.top_groups = s->top_groups;
                      if (s->update_opt->count()) rc.update_rate = s->update_rate;
                      if (s->gate_opt->count()) rc.gate_scale = s->gate_scale;
                      const auto series =
                          router::simulate_balance(rc, s->steps.get(c), s->tokens.get(c), s->skew.get(c), c.seed);
                      if (check_format(c.format_or("csv"), {"csv", "json"}) == "csv") {
                        c.emit(io::router_series_csv(series));
                      } else {
                        Json a = Json::array();
                        for (std::size_t i = 0; i < series.size(); ++i)
                          a.push_back({{"step", i + 1},
                                       {"max_violation_ratio", io::number(series[i].max_violation_ratio)},
                                       {"mean_count", io::number(series[i].mean_count)},
                                       {"max_count", series[i].max_count},
                                       {"min_count", series[i].min_count}});
                        c.emit_json(a);
                      }
                    }});
  }
  {
    struct S {
      std::string map;
      std::size_t tokens = 0;
      Flag<std::size_t> experts, alignment;
    };
    auto s = std::make_shared<S>();
    auto *app = grp->add_subcommand("pad", "Pad a routing map so every expert count is a multiple of --alignment");
    app->add_option("--map", s->map, "Routing map CSV token,expert,probability,selected")->required();
    app->add_option("--tokens", s->tokens, "Number of tokens in the map")->required();
    add_flag<std::size_t>(app, s->experts, "experts", 256, "Number of experts in the map");
    add_flag<std::size_t>(app, s->alignment, "alignment", 16, "Required count multiple");
    cmds.push_back({app, [s](Ctx &c) {
                      const auto map = io::read_routing_map_csv(io::read_file(s->map), s->tokens, s->experts.get(c));
                      const auto counts = map.counts();
                      const auto res = router::pad_routing_map(counts, map, s->alignment.get(c));
                      if (check_format(c.format_or("csv"), {"csv", "json"}) == "csv") {
                        c.emit(io::routing_map_csv(res.map));
                      } else {
                        Json j;
                        j["added"] = res.added;
                        j["counts"] = res.counts;
                        c.emit_json(j);
                      }
                    }});
  }
}

// ---------------------------------------------------------------- fp8

fp8::Layout parse_layout(const std::string &s) {
  if (s == "act_grad") return fp8::Layout::act_grad;
  if (s == "weight") return fp8::Layout::weight;
  throw InvalidInput("unknown layout \"" + s + "\" (expected act_grad or weight)");
}

void add_fp8(CLI::App &root, std::vector<Command> &cmds) {
  auto *grp = root.add_subcommand("fp8", "FP8 E4M3 block quantization");
  grp->require_subcommand(1);

  {
    struct S {
      std::vector<std::string> tensors;
      Flag<double> underflow, distortion;
    };
    auto s = std::make_shared<S>();
    auto *app = grp->add_subcommand("audit", "Per-layer underflow and distortion report (CSV)");
    app->add_option("--tensor", s->tensors, "FP8T tensor files (repeatable); the file stem names the layer")
        ->required();
    add_flag(app, s->underflow, "underflow-threshold", 0.01, "Flag layers whose underflow rate exceeds this");
    add_flag(app, s->distortion, "distortion-threshold", 0.999, "Flag layers whose distortion falls below this");
    cmds.push_back({app, [s](Ctx &c) {
                      std::vector<fp8::AuditLayer> layers;
                      for (const auto &f : s->tensors) {
                        auto t = io::decode_fp8t(io::read_file(f));
                        layers.push_back({std::filesystem::path(f).stem().string(), std::move(t.matrix), t.layout});
                      }
                      const auto reports = fp8::audit(layers, {s->underflow.get(c), s->distortion.get(c)});
                      if (check_format(c.format_or("csv"), {"csv", "json"}) == "csv") {
                        c.emit(io::audit_csv(reports));
                      } else {
                        Json a = Json::array();
                        for (const auto &r : reports)
                          a.push_back({{"layer", r.layer},
                                       {"underflow_rate", io::number(r.underflow_rate)},
                                       {"distortion", io::number(r.distortion)},
                                       {"flagged", r.flagged()},
                                       {"error", r.error}});
                        c.emit_json(a);
                      }
                    }});
  }
  {
    struct S {
      std::string in, layout;
    };
    auto s = std::make_shared<S>();
    auto *app = grp->add_subcommand("roundtrip", "Quantize and dequantize a tensor file; writes the result to --out");
    app->add_option("--in", s->in, "FP8T tensor file")->required();
    app->add_option("--layout", s->layout, "Override the stored layout (act_grad or weight)");
    cmds.push_back({app, [s](Ctx &c) {
                      check_format(c.format_or("json"), {"json"});
                      const std::string &path = c.require_out("fp8 roundtrip");
                      auto t = io::decode_fp8t(io::read_file(s->in));
                      if (!s->layout.empty()) t.layout = parse_layout(s->layout);
                      const auto q = fp8::quantize(t.matrix, t.layout);
                      const auto d = fp8::dequantize(q);
                      io::write_file(path, io::encode_fp8t(d.values, t.layout));
                      Json j;
                      j["layout"] = fp8::layout_name(t.layout);
                      j["underflow_rate"] = io::number(fp8::underflow_rate(t.matrix, q));
                      j["distortion"] = io::number(fp8::distortion(t.matrix, d.values));
                      j["has_nan"] = d.has_nan;
                      c.out << j.dump() << "\n";
                    }});
  }
}

// ---------------------------------------------------------------- pipe / ops

/// Total forward and backward work; splitting a layer keeps it unchanged.
double total_work(const std::vector<pipe::LayerSpec> &layers) {
  double t = 0.0;
  for (const auto &l : layers) t += l.fwd_cost + l.bwd_cost;
  return t;
}

void add_pipe(CLI::App &root, std::vector<Command> &cmds) {
  auto *grp = root.add_subcommand("pipe", "Pipeline schedule simulation");
  grp->require_subcommand(1);

  struct Common {
    Flag<std::size_t> micro_batches;
    Flag<double> comm_latency;
  };
  auto add_common = [](CLI::App *app, Common &s) {
    add_flag<std::size_t>(app, s.micro_batches, "micro-batches", 0, "Micro-batches (0 keeps the plan file value)");
    add_flag(app, s.comm_latency, "comm-latency", -1.0, "Cross-rank latency (negative keeps the plan value)");
  };
  auto apply_common = [](const Common &s, const Ctx &c, pipe::SimOptions &o) {
    if (s.micro_batches.given(c) && s.micro_batches.get(c) > 0) o.micro_batches = s.micro_batches.get(c);
    if (s.comm_latency.given(c) && s.comm_latency.get(c) >= 0.0) o.comm_latency = s.comm_latency.get(c);
  };

  {
    struct S {
      std::string plan, events;
      Common common;
    };
    auto s = std::make_shared<S>();
    auto *app = grp->add_subcommand("simulate", "Simulate one plan; summary JSON plus optional events CSV");
    app->add_option("--plan", s->plan, "Plan JSON")->required();
    app->add_option("--events", s->events, "Write the event list CSV here");
    add_common(app, s->common);
    cmds.push_back({app, [s, apply_common](Ctx &c) {
                      auto pf = io::parse_plan_json(io::read_file(s->plan));
                      apply_common(s->common, c, pf.options);
                      const auto res = pipe::simulate_schedule(pf.plan, pf.layers, pf.options);
                      if (!s->events.empty()) io::write_file(s->events, io::events_csv(res.events));
                      if (check_format(c.format_or("json"), {"json", "csv"}) == "csv") {
                        c.emit(io::events_csv(res.events));
                      } else {
                        Json j;
                        j["name"] = pf.plan.name;
                        j.update(io::summary_json(res));
                        c.emit_json(j);
                      }
                    }});
  }
  {
    struct S {
      std::vector<std::string> plans;
      Common common;
    };
    auto s = std::make_shared<S>();
    auto *app = grp->add_subcommand("compare", "Simulate several plans of one model and rank them");
    app->add_option("--plan", s->plans, "Plan JSON files; the first is the baseline (repeatable)")->required();
    add_common(app, s->common);
    cmds.push_back({app, [s, apply_common](Ctx &c) {
                      check_format(c.format_or("json"), {"json"});
                      std::vector<pipe::PartitionPlan> plans;
                      std::vector<std::vector<pipe::LayerSpec>> layers;
                      pipe::SimOptions opts;
                      for (std::size_t i = 0; i < s->plans.size(); ++i) {
                        auto pf = io::parse_plan_json(io::read_file(s->plans[i]));
                        const double work = total_work(pf.layers);
                        if (i == 0) {
                          opts = pf.options;
                        } else if (std::abs(work - total_work(layers.front())) > 1e-9 * work) {
                          throw InvalidInput("compare: " + s->plans[i] + " describes a model with different total cost");
                        } else if (pf.options.micro_batches != opts.micro_batches ||
                                   pf.options.tick_resolution != opts.tick_resolution ||
                                   pf.options.comm_latency != opts.comm_latency) {
                          throw InvalidInput("compare: " + s->plans[i] + " uses different simulation options");
                        }
                        plans.push_back(std::move(pf.plan));
                        layers.push_back(std::move(pf.layers));
                      }
                      apply_common(s->common, c, opts);
                      const auto cmp = pipe::compare_plans(plans, layers, opts);
                      Json out, arr = Json::array(), rank = Json::array();
                      for (const auto &o : cmp.outcomes) {
                        Json e;
                        e["name"] = o.name;
                        if (o.result) {
                          e.update(io::summary_json(*o.result));
                          e["relative_improvement"] = io::number(o.relative_improvement);
                        } else {
                          e["error"] = o.error;
                        }
                        arr.push_back(e);
                      }
                      for (std::size_t i : cmp.ranking) rank.push_back(cmp.outcomes[i].name);
                      out["ranking"] = rank;
                      out["plans"] = arr;
                      c.emit_json(out);
                    }});
  }
}

void add_ops(CLI::App &root, std::vector<Command> &cmds) {
  auto *grp = root.add_subcommand("ops", "Operational planning");
  grp->require_subcommand(1);
  struct S {
    Flag<double> save_cost, failures, failover_cost;
  };
  auto s = std::make_shared<S>();
  auto *app = grp->add_subcommand("save-interval", "Checkpoint interval minimizing daily overhead (minutes)");
  add_flag(app, s->save_cost, "save-cost", 0.0, "Minutes lost per checkpoint save");
  add_flag(app, s->failures, "failures", 0.0, "Failures per day");
  add_flag(app, s->failover_cost, "failover-cost", 0.0, "Minutes per failover (optional)");
  cmds.push_back({app, [s](Ctx &c) {
                    check_format(c.format_or("json"), {"json"});
                    const double C = s->save_cost.get(c), F = s->failures.get(c);
                    const auto si = pipe::optimal_save_interval(C, F);
                    Json j;
                    j["interval_minutes"] = io::number(si.interval_minutes);
                    j["daily_overhead_minutes"] = io::number(si.daily_overhead_minutes);
                    if (s->failover_cost.given(c))
                      j["daily_overhead_with_failover_minutes"] = io::number(
                          pipe::failover_overhead(C, F, s->failover_cost.get(c), si.interval_minutes));
                    c.emit_json(j);
                  }});
}

// ---------------------------------------------------------------- reward

void add_reward(CLI::App &root, std::vector<Command> &cmds) {
  auto *grp = root.add_subcommand("reward", "Post-training rewards and objectives");
  grp->require_subcommand(1);

  {
    struct S {
      std::string rollout;
      Flag<double> epsilon;
    };
    auto s = std::make_shared<S>();
    auto *app = grp->add_subcommand("lpo", "Sentence-level clipped objective of a rollout group");
    app->add_option("--rollout", s->rollout, "Rollout group JSON")->required();
    add_flag(app, s->epsilon, "epsilon", 0.03, "Clip range");
    cmds.push_back({app, [s](Ctx &c) {
                      check_format(c.format_or("json"), {"json"});
                      const double eps = s->epsilon.get(c);
                      if (!(eps > 0.0 && eps < 1.0)) throw InvalidInput("--epsilon must lie in (0, 1)");
                      const auto r = io::parse_rollout_json(io::read_file(s->rollout));
                      c.emit_json(io::lpo_report_json(reward::lpo_objective(r.responses, {eps})));
                    }});
  }
  {
    auto s = std::make_shared<std::string>();
    auto *app = grp->add_subcommand("gar", "Round-robin arena scores from judged pairs");
    app->add_option("--arena", *s, "CSV i,j,result with result in win|loss|tie")->required();
    cmds.push_back({app, [s](Ctx &c) {
                      check_format(c.format_or("json"), {"json"});
                      const auto scores = reward::gar_scores(io::read_arena_csv(io::read_file(*s)));
                      Json j;
                      j["scores"] = array_of(scores);
                      c.emit_json(j);
                    }});
  }
  {
    struct S {
      std::string lengths, text, task, task_rewards;
      std::size_t index = 0;
      bool correct = false, think = false;
      Flag<double> alpha;
    };
    auto s = std::make_shared<S>();
    auto *app = grp->add_subcommand("length", "Composite reward with the group-relative length term");
    app->add_option("--lengths", s->lengths, "Group response lengths l1,l2,...")->required();
    app->add_option("--index", s->index, "Response to score (0-based)")->required();
    app->add_flag("--correct", s->correct, "The response is correct");
    app->add_flag("--think-marker", s->think, "The response contains an explicit reasoning marker");
    app->add_option("--text", s->text, "Response text, scanned for the reasoning marker");
    app->add_option("--task", s->task, "Task name for the per-task alpha map");
    app->add_option("--task-rewards", s->task_rewards, "Extra task-specific rewards r1,r2,...");
    add_flag(app, s->alpha, "alpha", 0.5, "Length reward weight");
    cmds.push_back({app, [s](Ctx &c) {
                      check_format(c.format_or("json"), {"json"});
                      reward::AlphaSchedule sched;
                      if (c.cfg.params.contains("alpha_per_task")) {
                        const Json &m = c.cfg.params.at("alpha_per_task");
                        if (!m.is_object()) throw InvalidInput("config: alpha_per_task must be an object");
                        for (const auto &it : m.items()) {
                          if (!it.value().is_number()) throw InvalidInput("config: alpha_per_task values must be numbers");
                          sched.per_task[it.key()] = it.value().get<double>();
                        }
                      }
                      sched.default_alpha = s->alpha.get(c);
                      const double alpha = s->alpha.opt->count() ? s->alpha.value : sched.alpha_for(s->task);
                      const auto lengths = io::parse_row(s->lengths);
                      const auto tasks = io::parse_row(s->task_rewards);
                      const bool marker = s->think || reward::contains_think_marker(s->text);
                      const auto r = reward::composite_reward(s->correct, lengths, s->index, alpha, marker, tasks);
                      Json j;
                      j["correctness"] = io::number(r.correctness);
                      j["length"] = io::number(r.length);
                      j["format"] = io::number(r.format);
                      j["task_specific"] = array_of(r.task_specific);
                      j["total"] = io::number(r.total);
                      c.emit_json(j);
                    }});
  }
  {
    struct S {
      std::size_t n = 0, c = 0, k = 0;
    };
    auto s = std::make_shared<S>();
    auto *app = grp->add_subcommand("pass-at-k", "Unbiased pass@k estimate");
    app->add_option("--n", s->n, "Samples")->required();
    app->add_option("--c", s->c, "Correct samples")->required();
    app->add_option("--k", s->k, "k")->required();
    cmds.push_back({app, [s](Ctx &c) {
                      check_format(c.format_or("json"), {"json"});
                      Json j;
                      j["pass_at_k"] = io::number(reward::pass_at_k(s->n, s->c, s->k));
                      c.emit_json(j);
                    }});
  }
}

std::uint64_t parse_seed(const std::string &s, const std::string &where) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidInput(where + ": seed must be an unsigned 64-bit integer (got \"" + s + "\")");
  return v;
}

}  // namespace

RunConfig parse_config(const std::string &text) {
  const Json j = io::parse_json(text, "config");
  if (!j.is_object()) throw InvalidInput("config: expected a JSON object");
  RunConfig cfg;
  for (const auto &item : j.items()) {
    const std::string &k = item.key();
    const Json &v = item.value();
    if (k == "seed") {
      if (!v.is_number_unsigned()) throw InvalidInput("config: seed must be a non-negative integer");
      cfg.seed = v.get<std::uint64_t>();
    } else if (k == "format") {
      if (!v.is_string()) throw InvalidInput("config: format must be a string");
      cfg.format = v.get<std::string>();
    } else if (k == "out") {
      if (!v.is_string()) throw InvalidInput("config: out must be a string");
      cfg.out = v.get<std::string>();
    } else if (k == "router") {
      if (!v.is_object()) throw InvalidInput("config: router must be an object");
      for (const auto &r : v.items())
        if (!kRouterKeys.count(r.key())) throw InvalidInput("config: unknown key \"router." + r.key() + "\"");
      cfg.params[k] = v;
    } else if (kParamKeys.count(k)) {
      cfg.params[k] = v;
    } else {
      throw InvalidInput("config: unknown key \"" + k + "\"");
    }
  }
  return cfg;
}

RunConfig load_config(const std::string &path) { return parse_config(io::read_file(path)); }

int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Sparse-model training toolkit: scaling laws, checkpoint merging, MoE routing, FP8, pipelines, rewards",
               "sforge"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string config_path, format, out_path;
  std::uint64_t seed = 0;
  auto *config_opt = app.add_option("--config", config_path, "JSON config file");
  auto *seed_opt = app.add_option("--seed", seed, "RNG seed (default: $SPARSE_FORGE_SEED, else 0)");
  auto *format_opt = app.add_option("--format", format, "Output format: json or csv");
  auto *out_opt = app.add_option("--out", out_path, "Write the output here instead of stdout");

  std::vector<Command> cmds;
  add_scaling(app, cmds);
  add_wsm(app, cmds);
  add_router(app, cmds);
  add_fp8(app, cmds);
  add_pipe(app, cmds);
  add_ops(app, cmds);
  add_reward(app, cmds);

  if (args.empty()) {
    err << app.help();
    return kExitInvalid;
  }
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitInvalid;
  }

  try {
    Ctx ctx{out, {}, 0, std::nullopt, std::nullopt};
    if (config_opt->count()) ctx.cfg = load_config(config_path);
    if (seed_opt->count()) {
      ctx.seed = seed;
    } else if (ctx.cfg.seed) {
      ctx.seed = *ctx.cfg.seed;
    } else if (const char *env = std::getenv("SPARSE_FORGE_SEED"); env && *env) {
      ctx.seed = parse_seed(env, "SPARSE_FORGE_SEED");
    }
    if (format_opt->count())
      ctx.format = format;
    else
      ctx.format = ctx.cfg.format;
    if (ctx.format && *ctx.format != "json" && *ctx.format != "csv")
      throw InvalidInput("--format must be json or csv");
    if (out_opt->count())
      ctx.out_path = out_path;
    else
      ctx.out_path = ctx.cfg.out;

    for (auto &cmd : cmds)
      if (cmd.app->parsed()) {
        cmd.run(ctx);
        return kExitOk;
      }
    err << app.help();
    return kExitInvalid;
  } catch (const IoError &e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

}  // namespace sforge::cli
