// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "layergraph/error.hpp"

namespace layergraph {

enum class DType : std::uint8_t { kFloat32, kFloat64, kInt64 };

std::string_view dtype_name(DType dtype) noexcept;
bool is_floating(DType dtype) noexcept;

template <class T>
concept Element = std::same_as<T, float> || std::same_as<T, double> ||
                  std::same_as<T, std::int64_t>;

template <Element T>
constexpr DType dtype_of() noexcept {
  if constexpr (std::same_as<T, float>) {
    return DType::kFloat32;
  } else if constexpr (std::same_as<T, double>) {
    return DType::kFloat64;
  } else {
    return DType::kInt64;
  }
}

/// Ordered list of extents. Rank 0 is a scalar with one element.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims) : dims_(dims) {}
  explicit Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {}

  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t numel() const noexcept;
  std::size_t operator[](std::size_t axis) const { return dims_.at(axis); }
  // Throws ShapeMismatch on a scalar.
  std::size_t last() const;
  std::span<const std::size_t> dims() const noexcept { return dims_; }
  const std::vector<std::size_t>& vec() const noexcept { return dims_; }

  std::string to_string() const;

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::vector<std::size_t> dims_;
};

/// Immutable dense row-major tensor. Copies share the underlying buffer.
class Tensor {
 public:
  using Storage = std::variant<std::vector<float>, std::vector<double>,
                               std::vector<std::int64_t>>;

  /// float32 scalar zero.
  Tensor();

  template <Element T>
  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)),
        storage_(std::make_shared<const Storage>(std::move(data))) {
    check_length();
  }

  static Tensor zeros(Shape shape, DType dtype = DType::kFloat32);
  static Tensor ones(Shape shape, DType dtype = DType::kFloat32);
  static Tensor full(Shape shape, double value, DType dtype = DType::kFloat32);
  static Tensor scalar(double value, DType dtype = DType::kFloat32);
  /// Converts each value into the target dtype.
  static Tensor from_doubles(Shape shape, std::span<const double> values,
                             DType dtype = DType::kFloat32);

  const Shape& shape() const noexcept { return shape_; }
  DType dtype() const noexcept;
  std::size_t numel() const noexcept { return shape_.numel(); }
  std::size_t rank() const noexcept { return shape_.rank(); }
  bool is_floating() const noexcept { return layergraph::is_floating(dtype()); }

  /// Typed view; throws DtypeMismatch when T is not the stored type.
  template <Element T>
  std::span<const T> values() const {
    const auto* v = std::get_if<std::vector<T>>(storage_.get());
    if (v == nullptr) {
      throw Error(ErrorCode::kDtypeMismatch,
                  std::string("requested ") + std::string(dtype_name(dtype_of<T>())) +
                      " view of " + std::string(dtype_name(dtype())) + " tensor");
    }
    return *v;
  }

  /// Calls f with a std::span<const T> of the stored elements.
  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(
        [&](const auto& v) -> decltype(auto) {
          using T = typename std::decay_t<decltype(v)>::value_type;
          return f(std::span<const T>(v));
        },
        *storage_);
  }

  double item(std::size_t flat_index) const;
  std::vector<double> to_doubles() const;

  /// Same buffer, new shape of equal element count.
  Tensor reshape(Shape shape) const;
  /// Copy with one element replaced (value converted to this dtype).
  Tensor with_value(std::size_t flat_index, double value) const;

  /// Same dtype, same shape and identical bytes.
  bool bitwise_equal(const Tensor& other) const;

  std::string to_string() const;

 private:
  void check_length() const;

  Shape shape_;
  std::shared_ptr<const Storage> storage_;
};

}  // namespace layergraph
