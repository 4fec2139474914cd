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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "gen.hpp"
#include "sforge/error.hpp"

namespace sforge::io {
namespace {

TEST(Numbers, ShortestRoundTrip) {
  testing::Gen g(41);
  for (int t = 0; t < 5000; ++t) {
    const double x = g.normal() * std::pow(10.0, static_cast<double>(g.range(-30, 30)));
    EXPECT_EQ(parse_double(format_double(x), "x"), x);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(number(3.0).dump(), "3");
  EXPECT_EQ(number(0.5).dump(), "0.5");
}

TEST(Numbers, StrictParse) {
  EXPECT_EQ(parse_double("+2.5", "x"), 2.5);
  EXPECT_EQ(parse_double("1e-3", "x"), 1e-3);
  EXPECT_EQ(parse_double(" 1 ", "x"), 1.0);
  for (const char *bad : {"", "1.0x", "abc", "1 2", "--1"}) EXPECT_THROW(parse_double(bad, "x"), InvalidInput) << bad;
}

TEST(Json, ErrorsNameLineAndColumn) {
  try {
    parse_json("{\n  \"a\": ,\n}", "config");
    FAIL();
  } catch (const InvalidInput &e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Csv, ParsesAndChecksColumns) {
  const auto t = parse_csv("compute,value\r\n1,2\n\n3,4\n", "pts");
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.column("value"), 1u);
  EXPECT_THROW(t.column("nope"), InvalidInput);
  const auto pts = read_scaling_points("value,compute\n2,1\n");
  EXPECT_EQ(pts[0].compute, 1.0);
  EXPECT_EQ(pts[0].value, 2.0);
  EXPECT_THROW(read_scaling_points("compute,value\n1\n"), InvalidInput);
}

TEST(Fit, JsonRoundTrip) {
  scaling::PowerLawFit f{0.3, -0.125, 1e-9};
  const auto back = power_fit_from_json(power_fit_json(f));
  EXPECT_EQ(back.coefficient, f.coefficient);
  EXPECT_EQ(back.exponent, f.exponent);
  EXPECT_THROW(power_fit_from_json(Json::parse(R"({"coefficient":1,"exponent":0,"extra":1})")), InvalidInput);
}

TEST(Row, RoundTrip) {
  const std::vector<double> v{1, 2.0 / 3.0, 1e-300};
  EXPECT_EQ(parse_row(format_row(v)), v);
  EXPECT_THROW(parse_row("1,,2"), InvalidInput);
}

TEST(Wsm1, RoundTripAndCorruption) {
  testing::Gen g(42);
  const auto v = g.normals(33);
  const auto bytes = encode_wsm1(v);
  EXPECT_EQ(decode_wsm1(bytes), v);
  EXPECT_THROW(decode_wsm1(bytes.substr(0, bytes.size() - 1)), InvalidInput);
  EXPECT_THROW(decode_wsm1("XXXX" + bytes.substr(4)), InvalidInput);
}

TEST(Fp8t, RoundTripAndCorruption) {
  testing::Gen g(43);
  fp8::Matrix m(3, 5);
  for (auto &x : m.data) x = g.normal();
  const auto bytes = encode_fp8t(m, fp8::Layout::weight);
  EXPECT_EQ(bytes.substr(0, 4), "FP8T");
  EXPECT_EQ(bytes.size(), 4 + 4 + 4 + 4 + 1 + 15 * 8u);
  const auto back = decode_fp8t(bytes);
  EXPECT_EQ(back.matrix.data, m.data);
  EXPECT_EQ(back.layout, fp8::Layout::weight);
  EXPECT_THROW(decode_fp8t(bytes.substr(0, 20)), InvalidInput);
  auto bad = bytes;
  bad[16] = 9;
  EXPECT_THROW(decode_fp8t(bad), InvalidInput);
}

TEST(RoutingMapCsv, RoundTrip) {
  router::RoutingMap m(3, 4);
  m.selected[1] = 1;
  m.prob[1] = 0.25;
  m.prob[6] = 0.5;
  m.selected[11] = 1;
  const auto back = read_routing_map_csv(routing_map_csv(m), 3, 4);
  EXPECT_EQ(back.selected, m.selected);
  EXPECT_EQ(back.prob, m.prob);
  EXPECT_THROW(read_routing_map_csv("token,expert,probability,selected\n5,0,0.1,1\n", 3, 4), InvalidInput);
}

TEST(PlanJson, ModelShorthand) {
  const auto pf = parse_plan_json(R"({"p": 5, "v": 1, "model": {"dense": 3, "moe": 15, "mtp_depth": 1},
      "split_mtp": true, "assignment": "balanced", "micro_batches": 10, "comm_latency": 0.1})");
  EXPECT_EQ(pf.layers.size(), 22u);
  EXPECT_EQ(pf.plan.p, 5u);
  EXPECT_EQ(pf.options.micro_batches, 10u);
  EXPECT_EQ(pf.options.comm_latency, 0.1);
  pipe::validate_plan(pf.plan, pf.layers.size());
}

TEST(PlanJson, ExplicitLayersAndStages) {
  const auto pf = parse_plan_json(R"({"p": 2, "v": 1, "layers": [{"kind": "MoE"}, {"kind": "Dense", "fwd": 2}],
      "stages": [[0], [1]], "recompute": {"default": "full", "overrides": {"Dense": "none"}}})");
  EXPECT_EQ(pf.layers[1].fwd_cost, 2.0);
  EXPECT_EQ(pf.plan.recompute.mode_for(pipe::LayerKind::MoE), pipe::RecomputeMode::full);
  EXPECT_EQ(pf.plan.recompute.mode_for(pipe::LayerKind::Dense), pipe::RecomputeMode::none);
}

TEST(PlanJson, Rejections) {
  EXPECT_THROW(parse_plan_json(R"({"p": 1, "v": 1, "model": {"moe": 2}, "assignment": "uniform", "typo": 1})"),
               InvalidInput);
  EXPECT_THROW(parse_plan_json(R"({"p": 1, "v": 1, "layers": [{"kind": "Bogus"}], "stages": [[0]]})"), InvalidInput);
  EXPECT_THROW(parse_plan_json(R"({"p": 2, "v": 1, "model": {"moe": 2}})"), InvalidInput);
}

TEST(Rollout, ParsesWithAndWithoutTokens) {
  const auto r = parse_rollout_json(R"({"responses": [
      {"text": "A. B.", "tokens": ["A.", " B."], "old_logprobs": [-1, -1], "new_logprobs": [-1, -1], "reward": 1},
      {"text": "Hi.", "old_logprobs": [-1, -2], "new_logprobs": [-1, -2], "reward": 0, "correct": false}]})");
  ASSERT_EQ(r.responses.size(), 2u);
  EXPECT_EQ(r.responses[0].sentences.size(), 2u);
  EXPECT_EQ(r.responses[1].sentences.size(), 1u);
  EXPECT_THROW(parse_rollout_json(R"({"responses": [{"text": "Hi.", "old_logprobs": [-1], "new_logprobs": [-1],
      "reward": 0}]})"),
               InvalidInput);
}

TEST(Arena, ReadsAndRejects) {
  const auto o = read_arena_csv("i,j,result\n0,1,win\n1,0,loss\n");
  EXPECT_EQ(o.group_size, 2u);
  EXPECT_EQ(reward::gar_scores(o), (std::vector<double>{2, 0}));
  EXPECT_THROW(read_arena_csv("i,j,result\n0,1,maybe\n"), InvalidInput);
  EXPECT_THROW(read_arena_csv("i,j,result\n0,1,win\n0,1,win\n"), InvalidInput);
}

TEST(Files, MissingPathIsIoError) {
  EXPECT_THROW(read_file("/nonexistent/dir/file.csv"), IoError);
  EXPECT_THROW(write_file("/nonexistent/dir/file.csv", "x"), IoError);
  const auto path = (std::filesystem::temp_directory_path() / "sforge_io_test.bin").string();
  write_file(path, std::string("a\0b", 3));
  EXPECT_EQ(read_file(path), std::string("a\0b", 3));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace sforge::io
