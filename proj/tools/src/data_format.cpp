// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#include "layergraph/cli/data_format.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "layergraph/tensor_io.hpp"

namespace layergraph::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + what);
}

ColumnGroup parse_group(std::string_view tok, std::size_t line) {
  const std::size_t colon = tok.find(':');
  if (colon == std::string_view::npos || colon == 0) fail(line, "expected name:width, got '" + std::string(tok) + "'");
  std::size_t width = 0;
  const std::string_view w = tok.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), width);
  if (ec != std::errc() || ptr != w.data() + w.size() || width == 0) {
    fail(line, "bad width in '" + std::string(tok) + "'");
  }
  return {std::string(tok.substr(0, colon)), width};
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::size_t DataTable::row_width() const {
  std::size_t w = target.width;
  for (const auto& g : inputs) w += g.width;
  return w;
}

DataTable parse_data(std::string_view text) {
  DataTable table;
  bool seen_version = false;
  bool seen_columns = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (!seen_version) {
      if (line != "version: 1") fail(line_no, "expected 'version: 1'");
      seen_version = true;
      continue;
    }
    if (!seen_columns) {
      if (line.substr(0, 8) != "columns:") fail(line_no, "expected a 'columns:' header");
      const std::string_view spec = line.substr(8);
      const std::size_t bar = spec.find('|');
      if (bar == std::string_view::npos) fail(line_no, "columns need '|' between inputs and target");
      for (auto tok : split_ws(spec.substr(0, bar))) table.inputs.push_back(parse_group(tok, line_no));
      const auto right = split_ws(spec.substr(bar + 1));
      if (table.inputs.empty()) fail(line_no, "no input columns");
      if (right.size() != 1) fail(line_no, "exactly one target group expected");
      table.target = parse_group(right[0], line_no);
      seen_columns = true;
      continue;
    }
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t comma = std::min(line.find(',', start), line.size());
      const std::string cell(trim(line.substr(start, comma - start)));
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size()) fail(line_no, "bad value '" + cell + "'");
      row.push_back(v);
      start = comma + 1;
    }
    if (row.size() != table.row_width()) {
      fail(line_no, "expected " + std::to_string(table.row_width()) + " values, found " +
                        std::to_string(row.size()));
    }
    table.rows.push_back(std::move(row));
  }
  if (!seen_columns) fail(line_no, "missing 'version: 1' and 'columns:' header");
  return table;
}

DataTable load_data(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_data(buf.str());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParseError) throw;
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.message());
  }
}

std::string render_data(const DataTable& table) {
  std::ostringstream os;
  os << "version: 1\ncolumns:";
  for (const auto& g : table.inputs) os << ' ' << g.name << ':' << g.width;
  os << " | " << table.target.name << ':' << table.target.width << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << format_number(row[i], DType::kFloat64);
    }
    os << '\n';
  }
  return os.str();
}

Dataset to_dataset(const DataTable& table, const Graph& graph, DType target_dtype,
                   std::size_t batch_size) {
  if (table.rows.empty()) throw Error(ErrorCode::kEmptyDataset, "data file has no rows");
  // Column offset of each group within a row.
  std::vector<std::size_t> offset;
  std::size_t acc = 0;
  for (const auto& g : table.inputs) {
    offset.push_back(acc);
    acc += g.width;
  }
  const std::size_t target_offset = acc;

  std::vector<std::pair<std::size_t, DType>> used;  // (group, dtype)
  for (const auto& in : graph.inputs()) {
    bool found = false;
    for (std::size_t g = 0; g < table.inputs.size(); ++g) {
      if (table.inputs[g].name != in->name()) continue;
      if (table.inputs[g].width != in->n_units()) {
        throw Error(ErrorCode::kFeedShapeMismatch,
                    "column group '" + in->name() + "' has width " +
                        std::to_string(table.inputs[g].width) + ", input expects " +
                        std::to_string(in->n_units()));
      }
      used.emplace_back(g, in->dtype());
      found = true;
    }
    if (!found) throw Error(ErrorCode::kMissingInput, "no column group for input '" + in->name() + "'");
  }

  const std::size_t n = table.rows.size();
  const std::size_t step = batch_size == 0 ? n : batch_size;
  Dataset out;
  for (std::size_t begin = 0; begin < n; begin += step) {
    const std::size_t end = std::min(n, begin + step);
    const std::size_t rows = end - begin;
    auto slice = [&](std::size_t off, std::size_t width, DType dtype) {
      std::vector<double> v;
      v.reserve(rows * width);
      for (std::size_t r = begin; r < end; ++r) {
        v.insert(v.end(), table.rows[r].begin() + static_cast<std::ptrdiff_t>(off),
                 table.rows[r].begin() + static_cast<std::ptrdiff_t>(off + width));
      }
      return Tensor::from_doubles(Shape{rows, width}, v, dtype);
    };
    Feed feed;
    for (const auto& [g, dtype] : used) {
      feed.emplace(table.inputs[g].name, slice(offset[g], table.inputs[g].width, dtype));
    }
    feed.emplace(table.target.name, slice(target_offset, table.target.width, target_dtype));
    out.push_back(std::move(feed));
  }
  return out;
}

}  // namespace layergraph::cli
