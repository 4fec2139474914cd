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

#ifndef SFORGE_FP8_HPP_
#define SFORGE_FP8_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sforge::fp8 {

/// One FP8 E4M3 byte: 1 sign, 4 exponent (bias 7), 3 mantissa bits. No
/// infinities; S.1111.111 is NaN; largest finite magnitude is 448.
using E4M3Code = std::uint8_t;

inline constexpr double kMaxE4M3 = 448.0;
inline constexpr double kMinSubnormal = 0x1.0p-9;
inline constexpr E4M3Code kMaxCode = 0x7E;
inline constexpr E4M3Code kNaNCode = 0x7F;

/// Round-to-nearest-even onto the E4M3 grid, saturating at +-448. Keeps the
/// sign of zeros and NaNs.
E4M3Code e4m3_encode(double x);
double e4m3_decode(E4M3Code code);

enum class Layout : std::uint8_t {
  act_grad = 0,  // [1, 128] blocks
  weight = 1,    // [128, 128] blocks
};

struct BlockShape {
  std::size_t rows;
  std::size_t cols;
};

constexpr BlockShape block_shape(Layout layout) {
  return layout == Layout::act_grad ? BlockShape{1, 128} : BlockShape{128, 128};
}

const char *layout_name(Layout layout);

/// Dense row-major matrix of reals.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double &operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  Matrix transposed() const;
};

/// Block-quantized tensor: row-major codes plus one float scale per block,
/// blocks laid out row-major over the block grid. Edge blocks may be partial.
struct QuantTensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Layout layout = Layout::act_grad;
  std::vector<E4M3Code> codes;
  std::vector<float> scales;

  std::size_t grid_rows() const;
  std::size_t grid_cols() const;
  float scale_at(std::size_t r, std::size_t c) const;
};

struct Dequantized {
  Matrix values;
  /// Set when a NaN code was decoded.
  bool has_nan = false;
};

QuantTensor quantize(const Matrix &tensor, Layout layout);
/// Single-threaded reference for quantize.
QuantTensor quantize_serial(const Matrix &tensor, Layout layout);

Dequantized dequantize(const QuantTensor &q);
Dequantized dequantize_serial(const QuantTensor &q);

/// Elements that were nonzero and dequantize to zero, over all elements.
double underflow_rate(const Matrix &original, const QuantTensor &q);
/// Same count over nonzero elements only (0 when there are none).
double underflow_rate_nonzero(const Matrix &original, const QuantTensor &q);

/// Cosine similarity of the flattened matrices; 1 if both are all-zero, 0 if
/// exactly one is.
double distortion(const Matrix &original, const Matrix &reconstructed);
double distortion(const Matrix &original, const QuantTensor &q);
/// Mean of per-block cosine similarities.
double distortion_per_block(const Matrix &original, const QuantTensor &q);

/// Transposes a weight-layout tensor by moving codes and block scales;
/// nothing is requantized.
QuantTensor transpose_quantized(const QuantTensor &q);

struct AuditLayer {
  std::string name;
  Matrix original;
  Layout layout = Layout::act_grad;
};

struct AuditThresholds {
  double underflow = 0.01;
  double distortion = 0.999;
};

struct PrecisionReport {
  std::string layer;
  double underflow_rate = 0.0;
  double distortion = 1.0;
  bool underflow_flag = false;
  bool distortion_flag = false;
  /// Non-empty when the layer could not be audited.
  std::string error;

  bool flagged() const { return underflow_flag || distortion_flag || !error.empty(); }
};

/// Audits every layer; a failing layer records its error and the rest still run.
std::vector<PrecisionReport> audit(std::span<const AuditLayer> layers, const AuditThresholds &thresholds = {});

}  // namespace sforge::fp8

#endif  // SFORGE_FP8_HPP_
