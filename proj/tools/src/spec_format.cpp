// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#include "layergraph/cli/spec_format.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>

#include "layergraph/rng.hpp"
#include "layergraph/tensor_io.hpp"

namespace layergraph::cli {

namespace {

struct Token {
  std::string_view text;
  std::size_t col = 0;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back({line.substr(i, j - i), i + 1});
    i = j;
  }
  return out;
}

[[noreturn]] void fail(std::size_t line, std::size_t col, const std::string& what) {
  throw Error(ErrorCode::kParseError,
              "line " + std::to_string(line) + ", col " + std::to_string(col) + ": " + what);
}

template <class T>
std::optional<T> parse_uint(std::string_view s) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_double(std::string_view s) {
  std::string owned(s);
  char* end = nullptr;
  const double v = std::strtod(owned.c_str(), &end);
  if (owned.empty() || end != owned.c_str() + owned.size()) return std::nullopt;
  return v;
}

std::optional<DType> parse_dtype(std::string_view s) {
  if (s == "float32") return DType::kFloat32;
  if (s == "float64") return DType::kFloat64;
  if (s == "int64") return DType::kInt64;
  return std::nullopt;
}

const std::vector<std::pair<std::string_view, LayerKind>>& spec_kinds() {
  static const std::vector<std::pair<std::string_view, LayerKind>> kinds = {
      {"Input", LayerKind::kInput},     {"Linear", LayerKind::kLinear},
      {"Activation", LayerKind::kActivation}, {"Add", LayerKind::kAdd},
      {"Dropout", LayerKind::kDropout}, {"Lookup", LayerKind::kLookup},
  };
  return kinds;
}

std::optional<LayerKind> parse_kind(std::string_view s) {
  for (const auto& [name, kind] : spec_kinds()) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

// Rejects a config value that could not be instantiated later.
void check_config_value(std::string_view key, std::string_view value, std::size_t line,
                        std::size_t col) {
  bool ok = false;
  if (key == "bias") {
    ok = value == "true" || value == "false";
  } else if (key == "dtype") {
    ok = parse_dtype(value).has_value();
  } else if (key == "fn") {
    ok = parse_unary_op(value).has_value();
    if (!ok) throw Error(ErrorCode::kUnknownActivation, "line " + std::to_string(line) +
                                                             ", col " + std::to_string(col) +
                                                             ": unknown activation '" +
                                                             std::string(value) + "'");
  } else if (key == "p") {
    ok = parse_double(value).has_value();
  } else if (key == "vocab") {
    ok = parse_uint<std::size_t>(value).has_value();
  } else {
    fail(line, col, "unknown key '" + std::string(key) + "'");
  }
  if (!ok) fail(line, col, "bad value '" + std::string(value) + "' for " + std::string(key));
}

struct Reference {
  std::string name;
  std::size_t line;
  std::size_t col;
};

}  // namespace

const NodeSpec* GraphSpec::find(std::string_view name) const {
  for (const auto& n : nodes) {
    if (n.name == name) return &n;
  }
  return nullptr;
}

GraphSpec parse_spec(std::string_view text) {
  GraphSpec spec;
  std::vector<Reference> refs;
  std::set<std::string, std::less<>> names;
  bool seen_version = false;
  bool seen_outputs = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    const std::vector<Token> toks = tokenize(line);
    if (toks.empty() || toks.front().text.front() == '#') continue;
    const Token& head = toks.front();

    if (!seen_version) {
      if (head.text != "version:" || toks.size() != 2) fail(line_no, head.col, "expected 'version: 1'");
      if (toks[1].text != "1") {
        fail(line_no, toks[1].col, "unsupported version '" + std::string(toks[1].text) + "'");
      }
      seen_version = true;
      continue;
    }

    if (head.text == "inputs:" || head.text == "outputs:") {
      auto& list = head.text == "inputs:" ? spec.inputs : spec.outputs;
      if (!list.empty()) fail(line_no, head.col, "repeated '" + std::string(head.text) + "' line");
      for (std::size_t i = 1; i < toks.size(); ++i) {
        list.emplace_back(toks[i].text);
        refs.push_back({list.back(), line_no, toks[i].col});
      }
      if (head.text == "outputs:") seen_outputs = true;
      continue;
    }

    if (head.text == "state") {
      if (toks.size() != 3) fail(line_no, head.col, "expected 'state <node>.<slot> <file>'");
      const std::string_view target = toks[1].text;
      const std::size_t dot = target.find('.');
      if (dot == std::string_view::npos || dot == 0 || dot + 1 == target.size()) {
        fail(line_no, toks[1].col, "expected <node>.<slot>, got '" + std::string(target) + "'");
      }
      spec.state.push_back({std::string(target.substr(0, dot)), std::string(target.substr(dot + 1)),
                            std::string(toks[2].text)});
      refs.push_back({spec.state.back().node, line_no, toks[1].col});
      continue;
    }

    if (head.text != "node") fail(line_no, head.col, "unknown directive '" + std::string(head.text) + "'");
    if (toks.size() < 2) fail(line_no, head.col, "node needs a name");
    NodeSpec node;
    node.name = std::string(toks[1].text);
    if (node.name.find_first_of("=,.") != std::string::npos) {
      fail(line_no, toks[1].col, "invalid node name '" + node.name + "'");
    }
    if (!names.insert(node.name).second) {
      throw Error(ErrorCode::kDuplicateName, "line " + std::to_string(line_no) + ", col " +
                                                 std::to_string(toks[1].col) + ": node '" +
                                                 node.name + "' declared twice");
    }
    bool has_kind = false;
    for (std::size_t i = 2; i < toks.size(); ++i) {
      const Token& t = toks[i];
      const std::size_t eq = t.text.find('=');
      if (eq == std::string_view::npos || eq == 0) fail(line_no, t.col, "expected key=value");
      const std::string_view key = t.text.substr(0, eq);
      const std::string_view value = t.text.substr(eq + 1);
      const std::size_t value_col = t.col + eq + 1;
      if (key == "kind") {
        auto kind = parse_kind(value);
        if (!kind) {
          throw Error(ErrorCode::kUnknownKind, "line " + std::to_string(line_no) + ", col " +
                                                   std::to_string(value_col) + ": unknown kind '" +
                                                   std::string(value) + "'");
        }
        node.kind = *kind;
        has_kind = true;
      } else if (key == "inputs") {
        std::size_t start = 0;
        while (start <= value.size()) {
          const std::size_t comma = std::min(value.find(',', start), value.size());
          const std::string_view name = value.substr(start, comma - start);
          if (name.empty()) fail(line_no, value_col + start, "empty input name");
          node.inputs.emplace_back(name);
          refs.push_back({node.inputs.back(), line_no, value_col + start});
          start = comma + 1;
        }
      } else if (key == "n_units") {
        auto n = parse_uint<std::size_t>(value);
        if (!n || *n == 0) fail(line_no, value_col, "n_units must be a positive integer");
        node.n_units = *n;
      } else if (key == "seed") {
        auto s = parse_uint<std::uint64_t>(value);
        if (!s) fail(line_no, value_col, "seed must be an unsigned integer");
        node.seed = *s;
      } else {
        check_config_value(key, value, line_no, t.col);
        if (!node.config.emplace(std::string(key), std::string(value)).second) {
          fail(line_no, t.col, "repeated key '" + std::string(key) + "'");
        }
      }
    }
    if (!has_kind) fail(line_no, head.col, "node '" + node.name + "' has no kind");
    spec.nodes.push_back(std::move(node));
  }

  if (!seen_version) fail(1, 1, "expected 'version: 1'");
  if (!seen_outputs || spec.outputs.empty()) fail(line_no, 1, "no outputs declared");
  for (const auto& r : refs) {
    if (!names.count(r.name)) fail(r.line, r.col, "undeclared node '" + r.name + "'");
  }
  return spec;
}

std::string render_spec(const GraphSpec& spec) {
  std::ostringstream os;
  os << "version: " << spec.version << "\n";
  if (!spec.inputs.empty()) {
    os << "inputs:";
    for (const auto& n : spec.inputs) os << ' ' << n;
    os << "\n";
  }
  os << "outputs:";
  for (const auto& n : spec.outputs) os << ' ' << n;
  os << "\n";
  for (const auto& node : spec.nodes) {
    os << "node " << node.name << " kind=" << kind_name(node.kind);
    if (!node.inputs.empty()) {
      os << " inputs=";
      for (std::size_t i = 0; i < node.inputs.size(); ++i) os << (i ? "," : "") << node.inputs[i];
    }
    if (node.n_units != 0) os << " n_units=" << node.n_units;
    if (node.seed) os << " seed=" << *node.seed;
    for (const auto& [k, v] : node.config) os << ' ' << k << '=' << v;
    os << "\n";
  }
  for (const auto& s : spec.state) os << "state " << s.node << '.' << s.slot << ' ' << s.file << "\n";
  return os.str();
}

GraphSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

BuiltGraph build_graph(const GraphSpec& spec, std::uint64_t run_seed,
                       const std::filesystem::path& base_dir) {
  std::unordered_map<std::string_view, const NodeSpec*> by_name;
  for (const auto& n : spec.nodes) by_name.emplace(n.name, &n);

  std::map<std::string, LayerPtr> nodes;
  std::set<std::string_view> on_path;
  std::vector<std::string_view> path;

  std::function<LayerPtr(std::string_view)> ensure = [&](std::string_view name) -> LayerPtr {
    if (auto it = nodes.find(std::string(name)); it != nodes.end()) return it->second;
    if (on_path.count(name)) {
      std::string msg;
      bool in_cycle = false;
      for (auto p : path) {
        if (p == name) in_cycle = true;
        if (in_cycle) msg += std::string(p) + " -> ";
      }
      throw Error(ErrorCode::kCycleDetected, msg + std::string(name));
    }
    auto found = by_name.find(name);
    if (found == by_name.end()) {
      throw Error(ErrorCode::kParseError, "undeclared node '" + std::string(name) + "'");
    }
    const NodeSpec& ns = *found->second;
    on_path.insert(ns.name);
    path.push_back(ns.name);
    std::vector<LayerPtr> ins;
    for (const auto& in : ns.inputs) ins.push_back(ensure(in));
    path.pop_back();
    on_path.erase(ns.name);

    const auto cfg = [&](const char* key) -> std::optional<std::string> {
      auto it = ns.config.find(key);
      return it == ns.config.end() ? std::nullopt : std::optional<std::string>(it->second);
    };
    const DType dtype = parse_dtype(cfg("dtype").value_or("float32")).value_or(DType::kFloat32);
    const std::uint64_t seed = ns.seed.value_or(derive_seed(run_seed, hash_name(ns.name)));
    const auto arity = [&](std::size_t n) {
      if (ins.size() != n) {
        throw Error(ErrorCode::kArityMismatch, "'" + ns.name + "' takes " + std::to_string(n) +
                                                   " input(s), got " + std::to_string(ins.size()));
      }
    };
    const auto require_units = [&] {
      if (ns.n_units == 0) throw Error(ErrorCode::kInvalidArgument, "'" + ns.name + "' needs n_units");
    };

    LayerPtr node;
    switch (ns.kind) {
      case LayerKind::kInput:
        arity(0);
        require_units();
        node = input_layer(ns.n_units, {ns.name, dtype});
        break;
      case LayerKind::kLinear: {
        arity(1);
        require_units();
        LinearOptions o;
        o.name = ns.name;
        o.bias = cfg("bias").value_or("true") == "true";
        o.seed = seed;
        node = linear(ins[0], ns.n_units, o);
        break;
      }
      case LayerKind::kActivation:
        arity(1);
        node = activation(ins[0], cfg("fn").value_or("identity"), ns.name);
        break;
      case LayerKind::kAdd:
        node = add(ins, ns.name);
        break;
      case LayerKind::kDropout:
        arity(1);
        node = dropout(ins[0], parse_double(cfg("p").value_or("0")).value_or(0.0), {ns.name, seed});
        break;
      case LayerKind::kLookup:
        arity(1);
        require_units();
        node = lookup(ins[0], parse_uint<std::size_t>(cfg("vocab").value_or("0")).value_or(0),
                      ns.n_units, {ns.name, cfg("dtype") ? dtype : DType::kFloat32, seed});
        break;
      default:
        throw Error(ErrorCode::kUnknownKind, "kind not supported in specs");
    }
    if (ns.n_units != 0 && node->n_units() != ns.n_units) {
      throw Error(ErrorCode::kShapeMismatch, "'" + ns.name + "' declares n_units=" +
                                                 std::to_string(ns.n_units) + " but produces " +
                                                 std::to_string(node->n_units()));
    }
    nodes.emplace(ns.name, node);
    return node;
  };

  for (const auto& ns : spec.nodes) ensure(ns.name);
  std::vector<LayerPtr> inputs;
  std::vector<LayerPtr> outputs;
  for (const auto& n : spec.inputs) inputs.push_back(nodes.at(n));
  for (const auto& n : spec.outputs) outputs.push_back(nodes.at(n));
  Graph graph = spec.inputs.empty() ? Graph::build(outputs) : Graph::build(outputs, inputs);
  BuiltGraph built{std::move(nodes), std::move(inputs), std::move(outputs), std::move(graph)};

  for (const auto& ref : spec.state) {
    const LayerPtr& node = built.nodes.at(ref.node);
    const StatePtr& state = node->state();
    if (!state->has(ref.slot) || !state->is_set(ref.slot)) {
      throw Error(ErrorCode::kInvalidArgument, "'" + ref.node + "' has no slot '" + ref.slot + "'");
    }
    const Tensor& current = state->get(ref.slot);
    state->set(ref.slot, load_tensor(base_dir / ref.file, current.dtype()));
  }
  return built;
}

}  // namespace layergraph::cli
