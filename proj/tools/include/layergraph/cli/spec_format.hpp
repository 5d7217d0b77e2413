// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "layergraph/graph.hpp"
#include "layergraph/layers.hpp"

// Line-oriented graph spec:
//
//   version: 1
//   inputs: x1 x2
//   outputs: l3
//   node l1 kind=Linear inputs=x1 n_units=4 bias=true
//   state l1.weights l1.weights.tsr
//
// Keys after the node name are kind, inputs, n_units, seed, then the kind
// config sorted by key (bias, dtype, fn, p, vocab). Blank lines and lines
// starting with '#' are ignored.
namespace layergraph::cli {

struct NodeSpec {
  std::string name;
  LayerKind kind = LayerKind::kInput;
  std::vector<std::string> inputs;
  std::size_t n_units = 0;
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::string> config;

  friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

struct StateRef {
  std::string node;
  std::string slot;
  std::string file;

  friend bool operator==(const StateRef&, const StateRef&) = default;
};

struct GraphSpec {
  int version = 1;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<NodeSpec> nodes;
  std::vector<StateRef> state;

  const NodeSpec* find(std::string_view name) const;
  friend bool operator==(const GraphSpec&, const GraphSpec&) = default;
};

/// Errors: ParseError (with line and column), DuplicateName, UnknownKind.
GraphSpec parse_spec(std::string_view text);
std::string render_spec(const GraphSpec& spec);
GraphSpec load_spec(const std::filesystem::path& path);

struct BuiltGraph {
  std::map<std::string, LayerPtr> nodes;
  std::vector<LayerPtr> inputs;
  std::vector<LayerPtr> outputs;
  Graph graph;
};

/// Instantiates the layers. Nodes without a seed get
/// derive_seed(run_seed, hash_name(name)). State blobs are resolved relative
/// to `base_dir`. Errors: CycleDetected plus everything the factories and
/// Graph::build raise; ShapeMismatch for incompatible blobs.
BuiltGraph build_graph(const GraphSpec& spec, std::uint64_t run_seed,
                       const std::filesystem::path& base_dir = {});

}  // namespace layergraph::cli
