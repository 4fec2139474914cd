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

#include "sforge/fp8.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sforge/error.hpp"

namespace sforge::fp8 {

E4M3Code e4m3_encode(double x) {
  const E4M3Code sign = std::signbit(x) ? 0x80 : 0x00;
  if (std::isnan(x)) return sign | kNaNCode;
  const double a = std::fabs(x);
  if (a >= kMaxE4M3) return sign | kMaxCode;
  if (a == 0.0) return sign;

  int exp2 = 0;
  std::frexp(a, &exp2);
  const int e = exp2 - 1;  // a in [2^e, 2^(e+1))
  // Quantum is 2^-9 in the subnormal range and 2^(e-3) for normals.
  const int quantum = std::max(e, -6) - 3;
  const auto q = static_cast<int>(std::nearbyint(std::ldexp(a, -quantum)));
  int mag = e < -6 ? q : ((e + 7) << 3) + (q - 8);
  mag = std::min(mag, static_cast<int>(kMaxCode));
  return static_cast<E4M3Code>(sign | mag);
}

double e4m3_decode(E4M3Code code) {
  const bool negative = (code & 0x80) != 0;
  const int e = (code >> 3) & 0xF;
  const int m = code & 0x7;
  double v;
  if (e == 0xF && m == 0x7)
    v = std::numeric_limits<double>::quiet_NaN();
  else if (e == 0)
    v = std::ldexp(static_cast<double>(m), -9);
  else
    v = std::ldexp(static_cast<double>(8 + m), e - 10);
  return negative ? -v : v;
}

const char *layout_name(Layout layout) { return layout == Layout::act_grad ? "act_grad" : "weight"; }

Matrix Matrix::transposed() const {
  Matrix t(cols, rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
  return t;
}

std::size_t QuantTensor::grid_rows() const {
  const auto b = block_shape(layout);
  return (rows + b.rows - 1) / b.rows;
}

std::size_t QuantTensor::grid_cols() const {
  const auto b = block_shape(layout);
  return (cols + b.cols - 1) / b.cols;
}

float QuantTensor::scale_at(std::size_t r, std::size_t c) const {
  const auto b = block_shape(layout);
  return scales[(r / b.rows) * grid_cols() + c / b.cols];
}

namespace {

void check_matrix(const Matrix &m) {
  if (m.data.size() != m.rows * m.cols) throw InvalidInput("matrix storage does not match its shape");
}

void check_finite(const Matrix &m) {
  check_matrix(m);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c)
      if (!std::isfinite(m(r, c)))
        throw InvalidInput("quantize: non-finite entry at (" + std::to_string(r) + ", " + std::to_string(c) + ")");
}

QuantTensor empty_like(const Matrix &t, Layout layout) {
  QuantTensor q;
  q.rows = t.rows;
  q.cols = t.cols;
  q.layout = layout;
  q.codes.assign(t.rows * t.cols, 0);
  q.scales.assign(q.grid_rows() * q.grid_cols(), 1.0f);
  return q;
}

float block_scale(double amax) {
  if (amax == 0.0) return 1.0f;
  const float s = static_cast<float>(amax / kMaxE4M3);
  if (!std::isfinite(s)) throw InvalidInput("quantize: block scale overflows 32-bit float");
  return s > 0.0f ? s : std::numeric_limits<float>::denorm_min();
}

void quantize_block(const Matrix &t, QuantTensor &q, std::size_t br, std::size_t bc) {
  const auto b = block_shape(q.layout);
  const std::size_t r0 = br * b.rows, r1 = std::min(t.rows, r0 + b.rows);
  const std::size_t c0 = bc * b.cols, c1 = std::min(t.cols, c0 + b.cols);
  double amax = 0.0;
  for (std::size_t r = r0; r < r1; ++r)
    for (std::size_t c = c0; c < c1; ++c) amax = std::max(amax, std::fabs(t(r, c)));
  const float scale = block_scale(amax);
  q.scales[br * q.grid_cols() + bc] = scale;
  const auto s = static_cast<double>(scale);
  for (std::size_t r = r0; r < r1; ++r)
    for (std::size_t c = c0; c < c1; ++c) q.codes[r * t.cols + c] = e4m3_encode(t(r, c) / s);
}

void check_quant(const QuantTensor &q) {
  if (q.codes.size() != q.rows * q.cols) throw InvalidInput("quantized tensor: code count does not match shape");
  if (q.scales.size() != q.grid_rows() * q.grid_cols())
    throw InvalidInput("quantized tensor: scale count does not match block grid");
}

void check_same_shape(const Matrix &m, const QuantTensor &q) {
  check_matrix(m);
  check_quant(q);
  if (m.rows != q.rows || m.cols != q.cols)
    throw InvalidInput("shape mismatch: " + std::to_string(m.rows) + "x" + std::to_string(m.cols) + " vs " +
                       std::to_string(q.rows) + "x" + std::to_string(q.cols));
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 && nb == 0.0) return 1.0;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace

QuantTensor quantize_serial(const Matrix &tensor, Layout layout) {
  check_finite(tensor);
  QuantTensor q = empty_like(tensor, layout);
  for (std::size_t br = 0; br < q.grid_rows(); ++br)
    for (std::size_t bc = 0; bc < q.grid_cols(); ++bc) quantize_block(tensor, q, br, bc);
  return q;
}

QuantTensor quantize(const Matrix &tensor, Layout layout) {
  check_finite(tensor);
  QuantTensor q = empty_like(tensor, layout);
  const long gr = static_cast<long>(q.grid_rows());
  const long gc = static_cast<long>(q.grid_cols());
  // Blocks write disjoint codes and their own scale slot.
#pragma omp parallel for collapse(2) schedule(static)
  for (long br = 0; br < gr; ++br)
    for (long bc = 0; bc < gc; ++bc) quantize_block(tensor, q, br, bc);
  return q;
}

Dequantized dequantize_serial(const QuantTensor &q) {
  check_quant(q);
  Dequantized out{Matrix(q.rows, q.cols), false};
  for (std::size_t r = 0; r < q.rows; ++r)
    for (std::size_t c = 0; c < q.cols; ++c) {
      const double v = e4m3_decode(q.codes[r * q.cols + c]) * static_cast<double>(q.scale_at(r, c));
      out.has_nan = out.has_nan || std::isnan(v);
      out.values(r, c) = v;
    }
  return out;
}

Dequantized dequantize(const QuantTensor &q) {
  check_quant(q);
  Dequantized out{Matrix(q.rows, q.cols), false};
  const long rows = static_cast<long>(q.rows);
  bool nan_seen = false;
#pragma omp parallel for schedule(static) reduction(|| : nan_seen)
  for (long r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < q.cols; ++c) {
      const double v = e4m3_decode(q.codes[r * q.cols + c]) * static_cast<double>(q.scale_at(r, c));
      nan_seen = nan_seen || std::isnan(v);
      out.values(r, c) = v;
    }
  out.has_nan = nan_seen;
  return out;
}

double underflow_rate(const Matrix &original, const QuantTensor &q) {
  check_same_shape(original, q);
  if (original.data.empty()) return 0.0;
  const Matrix deq = dequantize(q).values;
  std::size_t zeroed = 0;
  for (std::size_t i = 0; i < original.data.size(); ++i)
    if (original.data[i] != 0.0 && deq.data[i] == 0.0) ++zeroed;
  return static_cast<double>(zeroed) / static_cast<double>(original.data.size());
}

double underflow_rate_nonzero(const Matrix &original, const QuantTensor &q) {
  check_same_shape(original, q);
  const Matrix deq = dequantize(q).values;
  std::size_t zeroed = 0, nonzero = 0;
  for (std::size_t i = 0; i < original.data.size(); ++i) {
    if (original.data[i] == 0.0) continue;
    ++nonzero;
    if (deq.data[i] == 0.0) ++zeroed;
  }
  return nonzero == 0 ? 0.0 : static_cast<double>(zeroed) / static_cast<double>(nonzero);
}

double distortion(const Matrix &original, const Matrix &reconstructed) {
  check_matrix(original);
  check_matrix(reconstructed);
  if (original.rows != reconstructed.rows || original.cols != reconstructed.cols)
    throw InvalidInput("distortion: shape mismatch");
  return cosine(original.data, reconstructed.data);
}

double distortion(const Matrix &original, const QuantTensor &q) {
  check_same_shape(original, q);
  return distortion(original, dequantize(q).values);
}

double distortion_per_block(const Matrix &original, const QuantTensor &q) {
  check_same_shape(original, q);
  const Matrix deq = dequantize(q).values;
  const auto b = block_shape(q.layout);
  double total = 0.0;
  std::size_t blocks = 0;
  std::vector<double> xa, xb;
  for (std::size_t br = 0; br < q.grid_rows(); ++br)
    for (std::size_t bc = 0; bc < q.grid_cols(); ++bc) {
      xa.clear();
      xb.clear();
      for (std::size_t r = br * b.rows; r < std::min(q.rows, (br + 1) * b.rows); ++r)
        for (std::size_t c = bc * b.cols; c < std::min(q.cols, (bc + 1) * b.cols); ++c) {
          xa.push_back(original(r, c));
          xb.push_back(deq(r, c));
        }
      total += cosine(xa, xb);
      ++blocks;
    }
  return blocks == 0 ? 1.0 : total / static_cast<double>(blocks);
}

QuantTensor transpose_quantized(const QuantTensor &q) {
  check_quant(q);
  if (q.layout != Layout::weight)
    throw InvalidInput("transpose_quantized: act_grad [1,128] blocks do not commute with transpose");
  QuantTensor t;
  t.rows = q.cols;
  t.cols = q.rows;
  t.layout = q.layout;
  t.codes.resize(q.codes.size());
  for (std::size_t r = 0; r < q.rows; ++r)
    for (std::size_t c = 0; c < q.cols; ++c) t.codes[c * t.cols + r] = q.codes[r * q.cols + c];
  const std::size_t gr = q.grid_rows(), gc = q.grid_cols();
  t.scales.resize(q.scales.size());
  for (std::size_t br = 0; br < gr; ++br)
    for (std::size_t bc = 0; bc < gc; ++bc) t.scales[bc * gr + br] = q.scales[br * gc + bc];
  return t;
}

std::vector<PrecisionReport> audit(std::span<const AuditLayer> layers, const AuditThresholds &thresholds) {
  std::vector<PrecisionReport> out;
  out.reserve(layers.size());
  for (const auto &layer : layers) {
    PrecisionReport rep;
    rep.layer = layer.name;
    try {
      const QuantTensor q = quantize(layer.original, layer.layout);
      rep.underflow_rate = underflow_rate(layer.original, q);
      rep.distortion = distortion(layer.original, q);
      rep.underflow_flag = rep.underflow_rate > thresholds.underflow;
      rep.distortion_flag = rep.distortion < thresholds.distortion;
    } catch (const Error &e) {
      rep.error = e.what();
    }
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace sforge::fp8
