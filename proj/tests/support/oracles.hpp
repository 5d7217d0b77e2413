// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0
//
// Independent reference computations used by the tests. Nothing here calls
// into the library's numeric kernels: values go in and out as doubles.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "layergraph/tensor.hpp"

namespace layergraph::testing {

inline std::vector<double> loop_matmul(const std::vector<double>& a, const std::vector<double>& b,
                                       std::size_t m, std::size_t k, std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] = s;
    }
  }
  return c;
}

// y[i,j] = sum_k x[i,k] W[k,j] + b[j]
inline std::vector<double> loop_linear(const std::vector<double>& x, const std::vector<double>& w,
                                       const std::vector<double>& b, std::size_t rows,
                                       std::size_t in, std::size_t out) {
  std::vector<double> y = loop_matmul(x, w, rows, in, out);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < out; ++j) y[i * out + j] += b[j];
  }
  return y;
}

inline double loop_mse(const std::vector<double>& p, const std::vector<double>& t) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - t[i]) * (p[i] - t[i]);
  return s / static_cast<double>(p.size());
}

// Textbook form without the max shift; only valid for moderate logits.
inline double naive_softmax_xent(const std::vector<double>& logits, const std::vector<double>& t,
                                 std::size_t batch, std::size_t classes) {
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    double z = 0.0;
    for (std::size_t j = 0; j < classes; ++j) z += std::exp(logits[b * classes + j]);
    for (std::size_t j = 0; j < classes; ++j) {
      total -= t[b * classes + j] * std::log(std::exp(logits[b * classes + j]) / z);
    }
  }
  return total / static_cast<double>(batch);
}

inline double central_difference(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-12});
  return std::abs(a - b) / scale;
}

inline std::vector<double> uniform_values(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                          double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

inline Tensor random_tensor(std::mt19937_64& rng, Shape shape, DType dtype = DType::kFloat64,
                            double lo = -1.0, double hi = 1.0) {
  const std::vector<double> v = uniform_values(rng, shape.numel(), lo, hi);
  return Tensor::from_doubles(std::move(shape), v, dtype);
}

inline Tensor random_indices(std::mt19937_64& rng, Shape shape, std::int64_t vocab) {
  std::uniform_int_distribution<std::int64_t> dist(0, vocab - 1);
  std::vector<std::int64_t> v(shape.numel());
  for (auto& x : v) x = dist(rng);
  return Tensor(std::move(shape), std::move(v));
}

}  // namespace layergraph::testing
