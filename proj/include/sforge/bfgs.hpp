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

#ifndef SFORGE_BFGS_HPP_
#define SFORGE_BFGS_HPP_

#include <functional>
#include <span>
#include <vector>

namespace sforge {

using Objective = std::function<double(std::span<const double>)>;

/// Controls for the quasi-Newton minimizer. The defaults are the pinned
/// values used by every scaling-law fit.
struct BfgsOptions {
  double armijo_c = 1e-4;
  double shrink = 0.5;
  /// Central-difference step, relative to max(1, |x_i|).
  double fd_step = 1e-6;
  int max_iterations = 500;
  /// Converged once the gradient infinity-norm drops below this.
  double gradient_tolerance = 1e-8;
  /// Backtracking gives up below this step length.
  double min_step = 1e-20;
};

enum class BfgsStatus {
  converged,       // gradient below tolerance
  stalled,         // no descent step found along steepest descent
  max_iterations,  // ran out of iterations
};

struct BfgsResult {
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
  BfgsStatus status = BfgsStatus::max_iterations;

  bool terminated() const noexcept { return status != BfgsStatus::max_iterations; }
};

std::vector<double> central_gradient(const Objective &f, std::span<const double> x, double fd_step);

BfgsResult minimize_bfgs(const Objective &f, std::vector<double> x0, const BfgsOptions &opts = {});

/// Runs minimize_bfgs from every start (in parallel) and returns the best
/// terminated run. Ties go to the lowest objective, then the lowest start
/// index, so the result does not depend on thread count. Throws
/// ConvergenceError carrying the best point if no start terminated.
BfgsResult minimize_multistart(const Objective &f, const std::vector<std::vector<double>> &starts,
                               const BfgsOptions &opts = {});

}  // namespace sforge

#endif  // SFORGE_BFGS_HPP_
