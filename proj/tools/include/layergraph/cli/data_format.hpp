// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "layergraph/graph.hpp"
#include "layergraph/train.hpp"

// Delimiter-separated example file:
//
//   version: 1
//   columns: x:2 | target:1
//   0,0,0
//   0,1,1
//
// Groups left of '|' feed graph inputs, the single group right of it is the
// target. Each row holds the groups' values in header order.
namespace layergraph::cli {

struct ColumnGroup {
  std::string name;
  std::size_t width = 0;

  friend bool operator==(const ColumnGroup&, const ColumnGroup&) = default;
};

struct DataTable {
  std::vector<ColumnGroup> inputs;
  ColumnGroup target;
  std::vector<std::vector<double>> rows;

  std::size_t row_width() const;
};

/// Errors: ParseError with line numbers.
DataTable parse_data(std::string_view text);
DataTable load_data(const std::filesystem::path& path);
std::string render_data(const DataTable& table);

/// Splits the rows into consecutive batches of at most `batch_size` rows (all
/// rows when zero). Tensors take the dtype of the graph input or prediction
/// they feed. Errors: FeedShapeMismatch when a group width disagrees with the
/// node, MissingInput when a graph input has no column group.
Dataset to_dataset(const DataTable& table, const Graph& graph, DType target_dtype,
                   std::size_t batch_size = 0);

}  // namespace layergraph::cli
