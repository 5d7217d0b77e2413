// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#include "layergraph/tensor.hpp"

#include <cstring>
#include <sstream>

namespace layergraph {

std::string_view dtype_name(DType dtype) noexcept {
  switch (dtype) {
    case DType::kFloat32: return "float32";
    case DType::kFloat64: return "float64";
    case DType::kInt64: return "int64";
  }
  return "unknown";
}

bool is_floating(DType dtype) noexcept {
  return dtype == DType::kFloat32 || dtype == DType::kFloat64;
}

std::size_t Shape::numel() const noexcept {
  std::size_t n = 1;
  for (std::size_t d : dims_) n *= d;
  return n;
}

std::size_t Shape::last() const {
  if (dims_.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "scalar has no last axis");
  }
  return dims_.back();
}

std::string Shape::to_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(dims_[i]);
  }
  out += "]";
  return out;
}

namespace {

template <Element T>
Tensor filled(Shape shape, double value) {
  std::vector<T> data(shape.numel(), static_cast<T>(value));
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace

Tensor::Tensor() : Tensor(Shape{}, std::vector<float>{0.0F}) {}

Tensor Tensor::full(Shape shape, double value, DType dtype) {
  switch (dtype) {
    case DType::kFloat32: return filled<float>(std::move(shape), value);
    case DType::kFloat64: return filled<double>(std::move(shape), value);
    case DType::kInt64: return filled<std::int64_t>(std::move(shape), value);
  }
  throw Error(ErrorCode::kDtypeMismatch, "unknown dtype");
}

Tensor Tensor::zeros(Shape shape, DType dtype) { return full(std::move(shape), 0.0, dtype); }
Tensor Tensor::ones(Shape shape, DType dtype) { return full(std::move(shape), 1.0, dtype); }
Tensor Tensor::scalar(double value, DType dtype) { return full(Shape{}, value, dtype); }

Tensor Tensor::from_doubles(Shape shape, std::span<const double> values, DType dtype) {
  auto convert = [&]<Element T>() {
    std::vector<T> data(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) data[i] = static_cast<T>(values[i]);
    return Tensor(std::move(shape), std::move(data));
  };
  switch (dtype) {
    case DType::kFloat32: return convert.operator()<float>();
    case DType::kFloat64: return convert.operator()<double>();
    case DType::kInt64: return convert.operator()<std::int64_t>();
  }
  throw Error(ErrorCode::kDtypeMismatch, "unknown dtype");
}

DType Tensor::dtype() const noexcept {
  switch (storage_->index()) {
    case 0: return DType::kFloat32;
    case 1: return DType::kFloat64;
    default: return DType::kInt64;
  }
}

void Tensor::check_length() const {
  const std::size_t n = visit([](auto v) { return v.size(); });
  if (n != shape_.numel()) {
    throw Error(ErrorCode::kShapeMismatch,
                "buffer of " + std::to_string(n) + " elements for shape " + shape_.to_string());
  }
}

double Tensor::item(std::size_t flat_index) const {
  if (flat_index >= numel()) {
    throw Error(ErrorCode::kIndexOutOfRange, "flat index " + std::to_string(flat_index) +
                                                 " outside " + shape_.to_string());
  }
  return visit([&](auto v) { return static_cast<double>(v[flat_index]); });
}

std::vector<double> Tensor::to_doubles() const {
  return visit([](auto v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]);
    return out;
  });
}

Tensor Tensor::reshape(Shape shape) const {
  if (shape.numel() != numel()) {
    throw Error(ErrorCode::kShapeMismatch,
                "cannot reshape " + shape_.to_string() + " to " + shape.to_string());
  }
  Tensor out = *this;
  out.shape_ = std::move(shape);
  return out;
}

Tensor Tensor::with_value(std::size_t flat_index, double value) const {
  if (flat_index >= numel()) {
    throw Error(ErrorCode::kIndexOutOfRange, "flat index " + std::to_string(flat_index) +
                                                 " outside " + shape_.to_string());
  }
  return visit([&](auto v) {
    using T = typename decltype(v)::element_type;
    std::vector<std::remove_const_t<T>> data(v.begin(), v.end());
    data[flat_index] = static_cast<std::remove_const_t<T>>(value);
    return Tensor(shape_, std::move(data));
  });
}

bool Tensor::bitwise_equal(const Tensor& other) const {
  if (dtype() != other.dtype() || shape_ != other.shape_) return false;
  if (storage_ == other.storage_) return true;
  return visit([&](auto v) {
    using T = std::remove_const_t<typename decltype(v)::element_type>;
    auto w = other.values<T>();
    return std::memcmp(v.data(), w.data(), v.size() * sizeof(T)) == 0;
  });
}

std::string Tensor::to_string() const {
  std::ostringstream os;
  os << dtype_name(dtype()) << shape_.to_string() << " {";
  const std::size_t shown = std::min<std::size_t>(numel(), 16);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i > 0) os << ", ";
    os << item(i);
  }
  if (shown < numel()) os << ", ...";
  os << "}";
  return os.str();
}

}  // namespace layergraph
