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

#include "sforge/bfgs.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "gen.hpp"
#include "sforge/error.hpp"

namespace sforge {
namespace {

double rosenbrock(std::span<const double> x) {
  return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
}

TEST(Bfgs, QuadraticBowl) {
  auto f = [](std::span<const double> x) { return std::pow(x[0] - 3.0, 2) + 4.0 * std::pow(x[1] + 1.0, 2); };
  const auto r = minimize_bfgs(f, {0.0, 0.0});
  EXPECT_EQ(r.status, BfgsStatus::converged);
  EXPECT_NEAR(r.x[0], 3.0, 1e-6);
  EXPECT_NEAR(r.x[1], -1.0, 1e-6);
}

TEST(Bfgs, Rosenbrock) {
  const auto r = minimize_bfgs(rosenbrock, {-1.2, 1.0});
  ASSERT_TRUE(r.terminated());
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], 1.0, 1e-4);
}

TEST(Bfgs, CentralGradientMatchesAnalytic) {
  testing::Gen g(3);
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> x{g.uniform(-2, 2), g.uniform(-2, 2)};
    const auto grad = central_gradient(rosenbrock, x, 1e-6);
    const double gx = -400.0 * x[0] * (x[1] - x[0] * x[0]) - 2.0 * (1.0 - x[0]);
    const double gy = 200.0 * (x[1] - x[0] * x[0]);
    EXPECT_NEAR(grad[0], gx, 1e-4 * (1.0 + std::abs(gx)));
    EXPECT_NEAR(grad[1], gy, 1e-4 * (1.0 + std::abs(gy)));
  }
}

TEST(Bfgs, IterationCapReportsStatus) {
  BfgsOptions opts;
  opts.max_iterations = 2;
  const auto r = minimize_bfgs(rosenbrock, {-1.2, 1.0}, opts);
  EXPECT_EQ(r.status, BfgsStatus::max_iterations);
  EXPECT_FALSE(r.terminated());
}

TEST(Bfgs, MultistartThrowsWithBestSoFar) {
  BfgsOptions opts;
  opts.max_iterations = 1;
  try {
    minimize_multistart(rosenbrock, {{-1.2, 1.0}, {0.5, 0.5}}, opts);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError &e) {
    EXPECT_EQ(e.best_params().size(), 2u);
    EXPECT_TRUE(std::isfinite(e.best_objective()));
  }
}

TEST(Bfgs, MultistartPicksLowestObjective) {
  // Two basins; the right one is deeper.
  auto f = [](std::span<const double> x) { return std::pow(x[0] * x[0] - 1.0, 2) - 0.1 * x[0]; };
  const auto r = minimize_multistart(f, {{-2.0}, {2.0}});
  EXPECT_GT(r.x[0], 0.9);
  const auto again = minimize_multistart(f, {{-2.0}, {2.0}});
  EXPECT_EQ(r.x, again.x);
}

TEST(Bfgs, MultistartTieGoesToLowestIndex) {
  auto flat = [](std::span<const double>) { return 0.0; };
  EXPECT_EQ(minimize_multistart(flat, {{3.0}, {-5.0}}).x, std::vector<double>{3.0});
  EXPECT_EQ(minimize_multistart(flat, {{-5.0}, {3.0}}).x, std::vector<double>{-5.0});
}

TEST(Bfgs, RejectsBadInput) {
  EXPECT_THROW(minimize_bfgs(rosenbrock, {}), InvalidInput);
  auto nan = [](std::span<const double>) { return std::nan(""); };
  EXPECT_THROW(minimize_bfgs(nan, {1.0}), InvalidInput);
  EXPECT_THROW(minimize_multistart(rosenbrock, {}), InvalidInput);
}

}  // namespace
}  // namespace sforge
