// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#include "layergraph/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

#include "layergraph/rng.hpp"

namespace layergraph {

namespace {

template <class T>
using Acc = std::conditional_t<std::is_floating_point_v<T>, double, std::int64_t>;

template <class Span>
using ElemOf = std::remove_const_t<typename Span::element_type>;

void require_same_dtype(const Tensor& a, const Tensor& b, std::string_view op) {
  if (a.dtype() != b.dtype()) {
    throw Error(ErrorCode::kDtypeMismatch, std::string(op) + ": " +
                                               std::string(dtype_name(a.dtype())) + " vs " +
                                               std::string(dtype_name(b.dtype())));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, std::string_view op) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(op) + ": " + a.shape().to_string() + " vs " + b.shape().to_string());
  }
}

void require_floating(const Tensor& a, std::string_view op) {
  if (!a.is_floating()) {
    throw Error(ErrorCode::kDtypeMismatch,
                std::string(op) + " requires a floating tensor, got " +
                    std::string(dtype_name(a.dtype())));
  }
}

template <class F>
Tensor zip_same(const Tensor& a, const Tensor& b, std::string_view op, F f) {
  require_same_dtype(a, b, op);
  require_same_shape(a, b, op);
  return a.visit([&](auto av) {
    using T = ElemOf<decltype(av)>;
    auto bv = b.values<T>();
    std::vector<T> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i], bv[i]);
    return Tensor(a.shape(), std::move(out));
  });
}

// Splits a shape around `axis` into (outer, extent, inner).
struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
  Shape reduced;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis, std::string_view op) {
  if (axis >= shape.rank()) {
    throw Error(ErrorCode::kShapeMismatch, std::string(op) + ": axis " + std::to_string(axis) +
                                               " out of range for " + shape.to_string());
  }
  AxisSplit s;
  std::vector<std::size_t> reduced;
  for (std::size_t i = 0; i < shape.rank(); ++i) {
    if (i < axis) s.outer *= shape[i];
    if (i > axis) s.inner *= shape[i];
    if (i != axis) reduced.push_back(shape[i]);
  }
  s.extent = shape[axis];
  s.reduced = Shape(std::move(reduced));
  return s;
}

template <class T>
T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace

std::string_view unary_op_name(UnaryOp op) noexcept {
  switch (op) {
    case UnaryOp::kIdentity: return "identity";
    case UnaryOp::kTanh: return "tanh";
    case UnaryOp::kRelu: return "relu";
    case UnaryOp::kSigmoid: return "sigmoid";
    case UnaryOp::kExp: return "exp";
    case UnaryOp::kLog: return "log";
    case UnaryOp::kNeg: return "neg";
  }
  return "unknown";
}

std::optional<UnaryOp> parse_unary_op(std::string_view name) noexcept {
  for (UnaryOp op : {UnaryOp::kIdentity, UnaryOp::kTanh, UnaryOp::kRelu, UnaryOp::kSigmoid,
                     UnaryOp::kExp, UnaryOp::kLog, UnaryOp::kNeg}) {
    if (unary_op_name(op) == name) return op;
  }
  return std::nullopt;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_same_dtype(a, b, "matmul");
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
    throw Error(ErrorCode::kShapeMismatch,
                "matmul: " + a.shape().to_string() + " @ " + b.shape().to_string());
  }
  const std::size_t m = a.shape()[0];
  const std::size_t k = a.shape()[1];
  const std::size_t n = b.shape()[1];
  return a.visit([&](auto av) {
    using T = ElemOf<decltype(av)>;
    auto bv = b.values<T>();
    std::vector<Acc<T>> acc(n);
    std::vector<T> out(m * n);
    for (std::size_t i = 0; i < m; ++i) {
      std::fill(acc.begin(), acc.end(), Acc<T>(0));
      for (std::size_t p = 0; p < k; ++p) {
        const Acc<T> aip = av[i * k + p];
        const T* brow = bv.data() + p * n;
        for (std::size_t j = 0; j < n; ++j) acc[j] += aip * static_cast<Acc<T>>(brow[j]);
      }
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] = static_cast<T>(acc[j]);
    }
    return Tensor(Shape{m, n}, std::move(out));
  });
}

Tensor add_broadcast(const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) {
    return zip_same(a, b, "add", [](auto x, auto y) { return x + y; });
  }
  require_same_dtype(a, b, "add");
  if (b.rank() != 1 || a.rank() == 0 || a.shape().last() != b.shape()[0]) {
    throw Error(ErrorCode::kShapeMismatch,
                "add: cannot broadcast " + b.shape().to_string() + " onto " + a.shape().to_string());
  }
  const std::size_t width = b.shape()[0];
  return a.visit([&](auto av) {
    using T = ElemOf<decltype(av)>;
    auto bv = b.values<T>();
    std::vector<T> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i % width];
    return Tensor(a.shape(), std::move(out));
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return zip_same(a, b, "sub", [](auto x, auto y) { return x - y; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return zip_same(a, b, "mul", [](auto x, auto y) { return x * y; });
}

Tensor scalar_mul(const Tensor& a, double s) {
  return a.visit([&](auto av) {
    using T = ElemOf<decltype(av)>;
    const T factor = static_cast<T>(s);
    std::vector<T> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * factor;
    return Tensor(a.shape(), std::move(out));
  });
}

Tensor unary(UnaryOp op, const Tensor& x) {
  require_floating(x, unary_op_name(op));
  return x.visit([&](auto xv) -> Tensor {
    using T = ElemOf<decltype(xv)>;
    if constexpr (std::is_floating_point_v<T>) {
      std::vector<T> out(xv.size());
      for (std::size_t i = 0; i < xv.size(); ++i) {
        const T v = xv[i];
        switch (op) {
          case UnaryOp::kIdentity: out[i] = v; break;
          case UnaryOp::kTanh: out[i] = std::tanh(v); break;
          case UnaryOp::kRelu: out[i] = v > T(0) ? v : T(0); break;
          case UnaryOp::kSigmoid: out[i] = sigmoid(v); break;
          case UnaryOp::kExp: out[i] = std::exp(v); break;
          case UnaryOp::kNeg: out[i] = -v; break;
          case UnaryOp::kLog:
            if (!(v > T(0))) {
              throw Error(ErrorCode::kDomainError, "log of non-positive element " +
                                                       std::to_string(v) + " at index " +
                                                       std::to_string(i));
            }
            out[i] = std::log(v);
            break;
        }
      }
      return Tensor(x.shape(), std::move(out));
    } else {
      throw Error(ErrorCode::kDtypeMismatch, "unary op on integer tensor");
    }
  });
}

Tensor gather_rows(const Tensor& table, const Tensor& indices) {
  if (table.rank() != 2) {
    throw Error(ErrorCode::kShapeMismatch, "gather_rows: table must be rank-2, got " +
                                               table.shape().to_string());
  }
  if (indices.dtype() != DType::kInt64) {
    throw Error(ErrorCode::kDtypeMismatch, "gather_rows: indices must be int64");
  }
  if (indices.rank() == 0) {
    throw Error(ErrorCode::kShapeMismatch, "gather_rows: indices must have rank >= 1");
  }
  const std::size_t vocab = table.shape()[0];
  const std::size_t width = table.shape()[1];
  auto idx = indices.values<std::int64_t>();
  std::vector<std::size_t> dims = indices.shape().vec();
  dims.push_back(width);
  return table.visit([&](auto tv) {
    using T = ElemOf<decltype(tv)>;
    std::vector<T> out(idx.size() * width);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const std::int64_t row = idx[i];
      if (row < 0 || static_cast<std::size_t>(row) >= vocab) {
        throw Error(ErrorCode::kIndexOutOfRange, "gather_rows: index " + std::to_string(row) +
                                                     " outside table of " +
                                                     std::to_string(vocab) + " rows");
      }
      std::copy_n(tv.data() + static_cast<std::size_t>(row) * width, width,
                  out.data() + i * width);
    }
    return Tensor(Shape(dims), std::move(out));
  });
}

Tensor scatter_add_rows(const Tensor& indices, const Tensor& rows, std::size_t vocab) {
  if (indices.dtype() != DType::kInt64) {
    throw Error(ErrorCode::kDtypeMismatch, "scatter_add_rows: indices must be int64");
  }
  auto idx = indices.values<std::int64_t>();
  if (rows.rank() == 0 || rows.numel() != idx.size() * rows.shape().last()) {
    throw Error(ErrorCode::kShapeMismatch, "scatter_add_rows: rows " + rows.shape().to_string() +
                                               " do not match indices " +
                                               indices.shape().to_string());
  }
  const std::size_t width = rows.shape().last();
  return rows.visit([&](auto rv) {
    using T = ElemOf<decltype(rv)>;
    std::vector<T> out(vocab * width, T(0));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const std::int64_t row = idx[i];
      if (row < 0 || static_cast<std::size_t>(row) >= vocab) {
        throw Error(ErrorCode::kIndexOutOfRange, "scatter_add_rows: index " +
                                                     std::to_string(row) + " outside " +
                                                     std::to_string(vocab));
      }
      T* dst = out.data() + static_cast<std::size_t>(row) * width;
      for (std::size_t j = 0; j < width; ++j) dst[j] += rv[i * width + j];
    }
    return Tensor(Shape{vocab, width}, std::move(out));
  });
}

Tensor random_uniform(const Shape& shape, double low, double high, std::uint64_t seed,
                      DType dtype) {
  if (!(low < high)) {
    throw Error(ErrorCode::kInvalidRange, "random_uniform: low " + std::to_string(low) +
                                              " >= high " + std::to_string(high));
  }
  if (!is_floating(dtype)) {
    throw Error(ErrorCode::kDtypeMismatch, "random_uniform: floating dtype required");
  }
  const CounterRng rng(seed);
  auto fill = [&]<class T>() {
    std::vector<T> out(shape.numel());
    const T lo = static_cast<T>(low);
    const T hi = static_cast<T>(high);
    for (std::size_t i = 0; i < out.size(); ++i) {
      T v = static_cast<T>(low + (high - low) * rng.uniform(i));
      // Rounding into the element type can land on `high`.
      if (v >= hi) v = std::nextafter(hi, lo);
      if (v < lo) v = lo;
      out[i] = v;
    }
    return Tensor(shape, std::move(out));
  };
  return dtype == DType::kFloat32 ? fill.operator()<float>() : fill.operator()<double>();
}

Tensor transpose_2d(const Tensor& a) {
  if (a.rank() != 2) {
    throw Error(ErrorCode::kShapeMismatch, "transpose_2d: rank-2 required, got " +
                                               a.shape().to_string());
  }
  const std::size_t m = a.shape()[0];
  const std::size_t n = a.shape()[1];
  return a.visit([&](auto av) {
    using T = ElemOf<decltype(av)>;
    std::vector<T> out(av.size());
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
    }
    return Tensor(Shape{n, m}, std::move(out));
  });
}

Tensor reduce_sum(const Tensor& a, std::size_t axis) {
  const AxisSplit s = split_axis(a.shape(), axis, "reduce_sum");
  return a.visit([&](auto av) {
    using T = ElemOf<decltype(av)>;
    std::vector<T> out(s.outer * s.inner);
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t in = 0; in < s.inner; ++in) {
        Acc<T> acc = 0;
        for (std::size_t e = 0; e < s.extent; ++e) {
          acc += av[(o * s.extent + e) * s.inner + in];
        }
        out[o * s.inner + in] = static_cast<T>(acc);
      }
    }
    return Tensor(s.reduced, std::move(out));
  });
}

Tensor reduce_mean(const Tensor& a, std::size_t axis) {
  require_floating(a, "reduce_mean");
  const AxisSplit s = split_axis(a.shape(), axis, "reduce_mean");
  return a.visit([&](auto av) {
    using T = ElemOf<decltype(av)>;
    std::vector<T> out(s.outer * s.inner);
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t in = 0; in < s.inner; ++in) {
        double acc = 0;
        for (std::size_t e = 0; e < s.extent; ++e) {
          acc += static_cast<double>(av[(o * s.extent + e) * s.inner + in]);
        }
        out[o * s.inner + in] = static_cast<T>(acc / static_cast<double>(s.extent));
      }
    }
    return Tensor(s.reduced, std::move(out));
  });
}

Tensor argmax(const Tensor& a, std::size_t axis) {
  const AxisSplit s = split_axis(a.shape(), axis, "argmax");
  if (s.extent == 0) {
    throw Error(ErrorCode::kShapeMismatch, "argmax over an empty axis");
  }
  return a.visit([&](auto av) {
    std::vector<std::int64_t> out(s.outer * s.inner);
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t in = 0; in < s.inner; ++in) {
        std::size_t best = 0;
        for (std::size_t e = 1; e < s.extent; ++e) {
          if (av[(o * s.extent + e) * s.inner + in] > av[(o * s.extent + best) * s.inner + in]) {
            best = e;
          }
        }
        out[o * s.inner + in] = static_cast<std::int64_t>(best);
      }
    }
    return Tensor(s.reduced, std::move(out));
  });
}

namespace {

template <bool kLog>
Tensor softmax_impl(const Tensor& a, std::string_view op) {
  require_floating(a, op);
  if (a.rank() == 0) {
    throw Error(ErrorCode::kShapeMismatch, std::string(op) + " of a scalar");
  }
  const std::size_t width = a.shape().last();
  const std::size_t rows = width == 0 ? 0 : a.numel() / width;
  return a.visit([&](auto av) {
    using T = ElemOf<decltype(av)>;
    std::vector<T> out(av.size());
    for (std::size_t r = 0; r < rows; ++r) {
      const auto* row = av.data() + r * width;
      double peak = row[0];
      for (std::size_t j = 1; j < width; ++j) peak = std::max<double>(peak, row[j]);
      double total = 0;
      for (std::size_t j = 0; j < width; ++j) total += std::exp(double(row[j]) - peak);
      const double log_total = std::log(total);
      for (std::size_t j = 0; j < width; ++j) {
        const double shifted = double(row[j]) - peak;
        out[r * width + j] = static_cast<T>(kLog ? shifted - log_total : std::exp(shifted) / total);
      }
    }
    return Tensor(a.shape(), std::move(out));
  });
}

}  // namespace

Tensor softmax(const Tensor& a) { return softmax_impl<false>(a, "softmax"); }
Tensor log_softmax(const Tensor& a) { return softmax_impl<true>(a, "log_softmax"); }

Tensor cast(const Tensor& a, DType dtype) {
  if (a.dtype() == dtype) return a;
  return a.visit([&](auto av) {
    auto convert = [&]<class U>() {
      std::vector<U> out(av.size());
      for (std::size_t i = 0; i < av.size(); ++i) out[i] = static_cast<U>(av[i]);
      return Tensor(a.shape(), std::move(out));
    };
    switch (dtype) {
      case DType::kFloat32: return convert.template operator()<float>();
      case DType::kFloat64: return convert.template operator()<double>();
      case DType::kInt64: return convert.template operator()<std::int64_t>();
    }
    throw Error(ErrorCode::kDtypeMismatch, "cast: unknown dtype");
  });
}

double sum_all(const Tensor& a) {
  return a.visit([](auto av) {
    double acc = 0;
    for (auto v : av) acc += static_cast<double>(v);
    return acc;
  });
}

bool all_finite(const Tensor& a) {
  return a.visit([](auto av) {
    for (auto v : av) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  });
}

}  // namespace layergraph
