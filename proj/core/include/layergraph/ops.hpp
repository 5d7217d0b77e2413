// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "layergraph/tensor.hpp"

// Numeric primitives over dense tensors. All functions are pure; mixed
// dtypes raise DtypeMismatch and non-conforming shapes ShapeMismatch.
// Floating reductions and products accumulate in double before rounding
// to the element type.
namespace layergraph {

enum class UnaryOp { kIdentity, kTanh, kRelu, kSigmoid, kExp, kLog, kNeg };

std::string_view unary_op_name(UnaryOp op) noexcept;
std::optional<UnaryOp> parse_unary_op(std::string_view name) noexcept;

/// [m,k] x [k,n] -> [m,n].
Tensor matmul(const Tensor& a, const Tensor& b);

/// Same-shape sum, or `b` rank-1 of length a.shape().last() added to every
/// trailing row of `a`. No other broadcasting.
Tensor add_broadcast(const Tensor& a, const Tensor& b);

Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scalar_mul(const Tensor& a, double s);

/// log raises DomainError on a non-positive element. Floating dtypes only.
Tensor unary(UnaryOp op, const Tensor& x);

/// Output shape is indices.shape ++ [table.shape[1]].
Tensor gather_rows(const Tensor& table, const Tensor& indices);
/// Adjoint of gather_rows: sums each row of `rows` into position indices[i]
/// of a zero [vocab, d] table.
Tensor scatter_add_rows(const Tensor& indices, const Tensor& rows, std::size_t vocab);

/// Elements in [low, high); pure function of its arguments.
Tensor random_uniform(const Shape& shape, double low, double high, std::uint64_t seed,
                      DType dtype = DType::kFloat32);

Tensor transpose_2d(const Tensor& a);
/// Removes `axis`.
Tensor reduce_sum(const Tensor& a, std::size_t axis);
Tensor reduce_mean(const Tensor& a, std::size_t axis);
/// int64 indices of the first maximum along `axis`; removes `axis`.
Tensor argmax(const Tensor& a, std::size_t axis);
/// Along the last axis, max-shifted.
Tensor softmax(const Tensor& a);
Tensor log_softmax(const Tensor& a);
Tensor cast(const Tensor& a, DType dtype);

inline Tensor zeros(Shape shape, DType dtype = DType::kFloat32) {
  return Tensor::zeros(std::move(shape), dtype);
}
inline Tensor ones(Shape shape, DType dtype = DType::kFloat32) {
  return Tensor::ones(std::move(shape), dtype);
}

/// Sum of all elements, accumulated in double.
double sum_all(const Tensor& a);
bool all_finite(const Tensor& a);

}  // namespace layergraph
