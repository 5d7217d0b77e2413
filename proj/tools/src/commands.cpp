// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#include "layergraph/cli/commands.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <string_view>

#include "layergraph/autodiff.hpp"
#include "layergraph/cli/data_format.hpp"
#include "layergraph/cli/spec_format.hpp"
#include "layergraph/tensor_io.hpp"
#include "layergraph/train.hpp"

namespace layergraph::cli {

namespace {

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

const LayerPtr& single_output(const BuiltGraph& built) {
  if (built.outputs.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "training needs exactly one output, spec declares " +
                    std::to_string(built.outputs.size()));
  }
  return built.outputs.front();
}

std::filesystem::path blob_name(const SlotRef& ref) {
  return ref.state->owner() + "." + ref.slot + ".tsr";
}

std::string g9(double v) { return format_number(v, DType::kFloat32); }

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kIoError:
      return kExitIo;
    case ErrorCode::kNonFiniteLoss:
      return kExitNumeric;
    default:
      return kExitValidation;
  }
}

std::uint64_t default_run_seed() {
  const char* env = std::getenv("LAYERGRAPH_SEED");
  if (env == nullptr) return 0;
  const std::string_view s(env);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size() ? v : 0;
}

int cmd_describe(const std::filesystem::path& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const GraphSpec parsed = load_spec(spec);
    const BuiltGraph built = build_graph(parsed, default_run_seed(), spec.parent_path());
    out << describe(built.graph);
    return kExitOk;
  });
}

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.epochs == 0) throw Error(ErrorCode::kInvalidArgument, "--epochs must be at least 1");
    const auto loss = parse_loss(args.loss);
    if (!loss) throw Error(ErrorCode::kInvalidArgument, "unknown loss '" + args.loss + "'");

    const GraphSpec spec = load_spec(args.spec);
    const DataTable table = load_data(args.data);
    const std::uint64_t seed = args.seed.value_or(default_run_seed());
    const BuiltGraph built = build_graph(spec, seed, args.spec.parent_path());
    const LayerPtr& prediction = single_output(built);

    ModelOptions options;
    options.loss = *loss;
    options.compile = args.compile;
    options.target_name = table.target.name;
    options.optimizer.learning_rate = args.lr;
    options.optimizer.momentum = args.momentum;
    options.optimizer.kind = args.momentum > 0.0 ? OptimizerKind::kSgdMomentum : OptimizerKind::kSgd;
    Model model(prediction, options);
    const Dataset data = to_dataset(table, built.graph, prediction->dtype(), args.batch_size);

    FitOptions fit_options;
    fit_options.epochs = args.epochs;
    fit_options.metrics = {Metric::kAccuracy};
    const History history = fit(model, data, fit_options);

    std::filesystem::create_directories(args.out);
    const std::filesystem::path history_path = args.out / "history.tsv";
    {
      std::ofstream f(history_path, std::ios::binary);
      if (!f) throw Error(ErrorCode::kIoError, "cannot write " + history_path.string());
      f << history.to_tsv();
      if (!f) throw Error(ErrorCode::kIoError, "failed writing " + history_path.string());
    }
    for (const SlotRef& ref : trainable_slots(model.inference_graph())) {
      save_tensor(args.out / blob_name(ref), ref.state->get(ref.slot));
    }
    out << "final_loss\t" << g9(history.final_loss()) << "\n";
    out << "accuracy\t" << g9(history.epochs.back().metrics.front()) << "\n";
    return kExitOk;
  });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<Metric> metrics;
    for (const auto& name : args.metrics) {
      auto m = parse_metric(name);
      if (!m) throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + name + "'");
      metrics.push_back(*m);
    }
    const GraphSpec spec = load_spec(args.spec);
    const DataTable table = load_data(args.data);
    const BuiltGraph built = build_graph(spec, args.seed.value_or(default_run_seed()),
                                         args.spec.parent_path());
    const LayerPtr& prediction = single_output(built);
    for (const SlotRef& ref : trainable_slots(built.graph)) {
      const Tensor& current = ref.state->get(ref.slot);
      ref.state->set(ref.slot, load_tensor(args.state_dir / blob_name(ref), current.dtype()));
    }
    ModelOptions options;
    options.target_name = table.target.name;
    options.compile = true;
    const Model model(prediction, options);
    const Dataset data = to_dataset(table, built.graph, prediction->dtype());
    for (const auto& [name, value] : evaluate(model, data, metrics)) {
      out << name << "\t" << g9(value) << "\n";
    }
    return kExitOk;
  });
}

}  // namespace layergraph::cli
