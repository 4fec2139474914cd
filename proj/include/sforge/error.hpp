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

#ifndef SFORGE_ERROR_HPP_
#define SFORGE_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sforge {

/// Base class of every error raised by the library. The CLI maps IoError to
/// exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// An iterative fit ran out of iterations. Carries the best point seen so far.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string &what, std::vector<double> best_params, double best_objective)
      : Error(what), best_params_(std::move(best_params)), best_objective_(best_objective) {}

  const std::vector<double> &best_params() const noexcept { return best_params_; }
  double best_objective() const noexcept { return best_objective_; }

 private:
  std::vector<double> best_params_;
  double best_objective_;
};

class CapacityError : public Error {
 public:
  CapacityError(const std::string &what, std::size_t expert) : Error(what), expert_(expert) {}
  std::size_t expert() const noexcept { return expert_; }

 private:
  std::size_t expert_;
};

class PlanError : public Error {
 public:
  using Error::Error;
};

class SegmentationError : public Error {
 public:
  SegmentationError(const std::string &what, std::size_t offset) : Error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sforge

#endif  // SFORGE_ERROR_HPP_
