// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "layergraph/tensor.hpp"

// `.tsr` text format: the first line holds the space-separated dims (empty
// for a scalar); each following line holds one row of the last axis in
// row-major order. float32 values are written with 9 significant digits,
// float64 with 17, so both round-trip exactly.
namespace layergraph {

std::string format_tensor(const Tensor& tensor);
void write_tensor(std::ostream& os, const Tensor& tensor);
void save_tensor(const std::filesystem::path& path, const Tensor& tensor);

/// Throws ParseError on malformed text or an element count that does not
/// match the dims line.
Tensor parse_tensor(std::string_view text, DType dtype = DType::kFloat32);
Tensor load_tensor(const std::filesystem::path& path, DType dtype = DType::kFloat32);

/// Fixed-precision rendering shared by the text formats.
std::string format_number(double value, DType dtype);

}  // namespace layergraph
