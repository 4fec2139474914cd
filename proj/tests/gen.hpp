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

// Hand-rolled generators for property tests. Deliberately built on
// std::mt19937_64 rather than the library's own RNG.
#ifndef SFORGE_TESTS_GEN_HPP_
#define SFORGE_TESTS_GEN_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace sforge::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double normal(double mean = 0.0, double sd = 1.0) { return std::normal_distribution<double>(mean, sd)(eng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  /// Integer in [lo, hi].
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(eng_);
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(range(0, static_cast<std::int64_t>(n) - 1)); }
  bool coin(double p = 0.5) { return uniform() < p; }

  std::vector<double> normals(std::size_t n, double sd = 1.0) {
    std::vector<double> v(n);
    for (auto &x : v) x = normal(0.0, sd);
    return v;
  }

  /// 1 >= w_1 >= ... >= w_k >= 0, with occasional exact ties, ones and zeros.
  std::vector<double> monotone_schedule(std::size_t k) {
    std::vector<double> w(k);
    for (auto &x : w) {
      const double r = uniform();
      x = r < 0.05 ? 0.0 : r < 0.1 ? 1.0 : uniform();
    }
    std::sort(w.begin(), w.end(), std::greater<>());
    if (k > 1 && coin(0.2)) w[1] = w[0];
    return w;
  }

  /// Random point of the probability simplex with k+1 entries.
  std::vector<double> simplex(std::size_t n) {
    std::vector<double> c(n);
    double sum = 0.0;
    for (auto &x : c) sum += (x = coin(0.1) ? 0.0 : -std::log(uniform(1e-12, 1.0)));
    if (sum == 0.0) {
      c[index(n)] = 1.0;
      return c;
    }
    for (auto &x : c) x /= sum;
    return c;
  }

  std::mt19937_64 &engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace sforge::testing

#endif  // SFORGE_TESTS_GEN_HPP_
