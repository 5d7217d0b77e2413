// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#include "layergraph/tensor_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace layergraph {

std::string format_number(double value, DType dtype) {
  char buf[64];
  switch (dtype) {
    case DType::kFloat32:
      std::snprintf(buf, sizeof buf, "%.9g", value);
      break;
    case DType::kFloat64:
      std::snprintf(buf, sizeof buf, "%.17g", value);
      break;
    case DType::kInt64:
      std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(value));
      break;
  }
  return buf;
}

void write_tensor(std::ostream& os, const Tensor& tensor) {
  const auto& dims = tensor.shape().vec();
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i > 0) os << ' ';
    os << dims[i];
  }
  os << '\n';
  const std::size_t width = dims.empty() ? 1 : dims.back();
  if (width == 0) return;
  tensor.visit([&](auto v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      os << format_number(static_cast<double>(v[i]), tensor.dtype());
      os << ((i + 1) % width == 0 ? '\n' : ' ');
    }
  });
}

std::string format_tensor(const Tensor& tensor) {
  std::ostringstream os;
  write_tensor(os, tensor);
  return os.str();
}

void save_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  write_tensor(out, tensor);
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

Tensor parse_tensor(std::string_view text, DType dtype) {
  const std::size_t eol = text.find('\n');
  const std::string_view header = text.substr(0, eol);
  std::vector<std::size_t> dims;
  for (std::string_view tok : split_ws(header)) {
    std::size_t d = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw Error(ErrorCode::kParseError, "line 1: bad dimension '" + std::string(tok) + "'");
    }
    dims.push_back(d);
  }
  Shape shape(std::move(dims));
  std::vector<double> values;
  values.reserve(shape.numel());
  std::size_t line_no = 1;
  std::string_view rest = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
  while (!rest.empty()) {
    ++line_no;
    const std::size_t next = rest.find('\n');
    const std::string_view line = rest.substr(0, next);
    for (std::string_view tok : split_ws(line)) {
      // strtod handles inf/nan and exponents uniformly across libstdc++ versions.
      std::string owned(tok);
      char* end = nullptr;
      const double v = std::strtod(owned.c_str(), &end);
      if (end != owned.c_str() + owned.size()) {
        throw Error(ErrorCode::kParseError,
                    "line " + std::to_string(line_no) + ": bad value '" + owned + "'");
      }
      values.push_back(v);
    }
    rest = next == std::string_view::npos ? std::string_view{} : rest.substr(next + 1);
  }
  if (values.size() != shape.numel()) {
    throw Error(ErrorCode::kParseError, "expected " + std::to_string(shape.numel()) +
                                            " values for shape " + shape.to_string() + ", found " +
                                            std::to_string(values.size()));
  }
  return Tensor::from_doubles(std::move(shape), values, dtype);
}

Tensor load_tensor(const std::filesystem::path& path, DType dtype) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_tensor(buf.str(), dtype);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParseError) throw;
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.message());
  }
}

}  // namespace layergraph
