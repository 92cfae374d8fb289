// msdhmm: train, evaluate and benchmark double-stage multi-stream discrete
// HMM gesture recognizers on skeleton data.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msdhmm/bench.hpp"
#include "msdhmm/config.hpp"
#include "msdhmm/dual_stage.hpp"
#include "msdhmm/error.hpp"
#include "msdhmm/evaluation.hpp"
#include "msdhmm/segmenter.hpp"
#include "msdhmm/skeleton_io.hpp"
#include "msdhmm/split.hpp"
#include "msdhmm/synthetic.hpp"

namespace fs = std::filesystem;
using namespace msdhmm;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct CommonArgs {
  std::string config;
  std::string allowlist;
};

RunConfig resolve_config(const CommonArgs& args) {
  return args.config.empty() ? RunConfig{} : load_config(args.config);
}

Dataset resolve_dataset(const std::string& dir, const SkeletonDescriptor& descriptor, const CommonArgs& args) {
  std::optional<fs::path> allowlist;
  if (!args.allowlist.empty()) allowlist = args.allowlist;
  auto dataset = load_dataset(dir, descriptor, allowlist);
  std::cerr << "dataset: " << dataset.instances.size() << " instances, " << dataset.skipped.size()
            << " files skipped, " << dataset.dropped_frames << " frames dropped; allowlist "
            << (dataset.allowlist_applied ? "applied" : "absent, all parseable files used") << '\n';
  return dataset;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::vector<GestureInstance> pick(const std::vector<GestureInstance>& all, const std::vector<std::size_t>& idx) {
  std::vector<GestureInstance> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(all[i]);
  return out;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  CommonArgs common;
  std::string dataset;
  std::string output;
  bool train_part = false;
};

int run_train(const TrainArgs& args) {
  const auto cfg = resolve_config(args.common);
  const auto descriptor = cfg.skeleton();
  const auto dataset = resolve_dataset(args.dataset, descriptor, args.common);
  std::vector<GestureInstance> train = dataset.instances;
  std::string scope = "all instances";
  if (args.train_part) {
    const auto folds = make_split(dataset.instances, cfg.split, cfg.seed);
    train = pick(dataset.instances, folds.front().train);
    scope = "train part of " + cfg.split.describe();
  }
  const auto model = train_pipeline(train, descriptor, cfg.pipeline);
  save_pipeline(model, args.output);

  std::ostringstream manifest;
  manifest << "# msdhmm model manifest\n"
           << "model = " << fs::path(args.output).filename().string() << '\n'
           << "manifest_hash = " << model.manifest_hash() << '\n'
           << "trained_on = " << scope << " (" << train.size() << " instances)\n"
           << cfg.to_text();
  for (int label : model.classes()) {
    manifest << "# class " << label << " " << model.class_name(label) << " -> "
             << to_string(model.groups.at(label)) << '\n';
  }
  write_file(args.output + ".manifest", manifest.str());
  std::cout << "model " << args.output << '\n' << "manifest_hash " << model.manifest_hash() << '\n';
  return kOk;
}

// ---- eval-offline ---------------------------------------------------------

struct EvalOfflineArgs {
  CommonArgs common;
  std::string dataset;
  std::string model;
  std::string split;
  std::string report_prefix;
  bool no_fn = false;
  bool no_wms = false;
};

int run_eval_offline(const EvalOfflineArgs& args) {
  auto cfg = resolve_config(args.common);
  if (!args.split.empty()) {
    const auto subjects = cfg.split.train_subjects;
    cfg.split = SplitSpec::parse(args.split);
    cfg.split.train_subjects = subjects;
  }
  if (args.no_fn) cfg.pipeline.feature_normalization = false;
  if (args.no_wms) cfg.pipeline.weighted_streams = false;
  const auto descriptor = cfg.skeleton();
  const auto dataset = resolve_dataset(args.dataset, descriptor, args.common);
  const auto folds = make_split(dataset.instances, cfg.split, cfg.seed);

  EvalReport report;
  if (!args.model.empty()) {
    if (folds.size() != 1) throw DataError("--model needs a single-fold split");
    const auto model = load_pipeline(args.model);
    if (model.joint_count != descriptor.joint_count() || model.descriptor_name != descriptor.name()) {
      throw DataError("model skeleton descriptor does not match the dataset");
    }
    report = evaluate_model(model, pick(dataset.instances, folds.front().test), cfg.split.describe());
  } else {
    report = evaluate_offline(dataset.instances, folds, descriptor, cfg.pipeline, cfg.split.describe());
  }
  std::cout << report.to_text();
  if (!args.report_prefix.empty()) {
    write_file(args.report_prefix + ".txt", report.to_text());
    write_file(args.report_prefix + ".records", report.to_records());
    write_file(args.report_prefix + ".stage1.csv", report.stage1.to_csv());
    write_file(args.report_prefix + ".confusion.csv", report.stage2.to_csv());
  }
  return kOk;
}

// ---- eval-online ----------------------------------------------------------

struct EvalOnlineArgs {
  CommonArgs common;
  std::string model;
  std::string stream;
  std::string truth;
  std::string events;
  std::string report_prefix;
  std::optional<double> sigma;
};

int run_eval_online(const EvalOnlineArgs& args) {
  const auto cfg = resolve_config(args.common);
  const auto model = load_pipeline(args.model);
  const auto frames = load_stream(args.stream, model.joint_count);
  const auto truth = load_sidecar(args.truth);
  validate_truth(truth, frames.size());

  const auto events = run_stream(frames, model, cfg.segmenter);
  auto report = score_online(truth, events, args.sigma.value_or(cfg.sigma));
  report.model_hash = model.manifest_hash();
  std::cout << report.to_text();
  if (!args.events.empty()) {
    std::ostringstream out;
    for (const auto& e : events) out << format_event(e) << '\n';
    write_file(args.events, out.str());
  }
  if (!args.report_prefix.empty()) {
    write_file(args.report_prefix + ".txt", report.to_text());
    write_file(args.report_prefix + ".records", report.to_records());
  }
  return kOk;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
  CommonArgs common;
  std::string model;
  std::string dataset;
  std::size_t repetitions = 100;
  std::vector<std::size_t> sweep{5, 10, 15, 20};
};

int run_bench_cmd(const BenchArgs& args) {
  const auto cfg = resolve_config(args.common);
  const auto model = load_pipeline(args.model);
  const auto descriptor = model.descriptor();

  std::vector<GestureInstance> instances;
  if (!args.dataset.empty()) {
    instances = resolve_dataset(args.dataset, descriptor, args.common).instances;
  } else {
    SyntheticOptions synth;
    synth.classes = std::min(kSyntheticClassLimit, std::max<std::size_t>(model.classes().size(), 1));
    synth.subjects = 2;
    synth.episodes = 2;
    instances = synthetic_dataset(descriptor, synth);
  }
  std::vector<std::vector<SkeletonFrame>> gestures;
  for (const auto& g : instances) gestures.push_back(g.frames);
  const auto stream = merge_into_stream(instances, cfg.gap);

  const auto report = run_bench(model, gestures, stream.frames, cfg.segmenter, args.sweep, args.repetitions);
  std::cout << report.to_text();
  return kOk;
}

// ---- export-stream --------------------------------------------------------

struct ExportArgs {
  CommonArgs common;
  std::string dataset;
  std::string output;
  std::string truth;
  std::string part = "all";
  std::optional<std::size_t> gap;
};

int run_export(const ExportArgs& args) {
  const auto cfg = resolve_config(args.common);
  const auto descriptor = cfg.skeleton();
  const auto dataset = resolve_dataset(args.dataset, descriptor, args.common);
  std::vector<GestureInstance> selected = dataset.instances;
  if (args.part != "all") {
    const auto folds = make_split(dataset.instances, cfg.split, cfg.seed);
    selected = pick(dataset.instances, args.part == "train" ? folds.front().train : folds.front().test);
  }
  const auto merged = merge_into_stream(selected, args.gap.value_or(cfg.gap));
  save_stream(args.output, merged.frames);
  std::ofstream truth(args.truth);
  if (!truth) throw DataError("cannot write " + args.truth);
  write_sidecar(truth, merged.truth);
  std::cout << "stream " << args.output << " frames " << merged.frames.size() << " segments "
            << merged.truth.size() << '\n';
  return kOk;
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string output;
  std::string descriptor = "msr";
  SyntheticOptions options;
};

int run_synth(const SynthArgs& args) {
  const auto descriptor = SkeletonDescriptor::preset(args.descriptor);
  fs::create_directories(args.output);
  const auto instances = synthetic_dataset(descriptor, args.options);
  for (const auto& instance : instances) {
    save_msr_skeleton(fs::path(args.output) / msr_file_name(instance), instance);
  }
  std::cout << "wrote " << instances.size() << " instances to " << args.output << '\n';
  return kOk;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config, "Key-value config file")->check(CLI::ExistingFile);
  cmd->add_option("--allowlist", args.allowlist, "Valid-file list (default: <dataset>/allowlist.txt)")
      ->check(CLI::ExistingFile);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-stage multi-stream discrete HMM gesture recognition"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a pipeline model on a skeleton dataset");
  add_common(train_cmd, train.common);
  train_cmd->add_option("-d,--dataset", train.dataset, "Dataset directory")->required();
  train_cmd->add_option("-o,--output", train.output, "Output model file")->required();
  train_cmd->add_flag("--train-part", train.train_part, "Train only on the train side of the configured split");

  EvalOfflineArgs offline;
  auto* offline_cmd = app.add_subcommand("eval-offline", "Classify pre-segmented instances under a split protocol");
  add_common(offline_cmd, offline.common);
  offline_cmd->add_option("-d,--dataset", offline.dataset, "Dataset directory")->required();
  offline_cmd->add_option("-m,--model", offline.model, "Evaluate this model instead of training per fold")
      ->check(CLI::ExistingFile);
  offline_cmd->add_option("-s,--split", offline.split, "1/3, 2/3, cross-subject or loso");
  offline_cmd->add_option("-r,--report", offline.report_prefix, "Write <prefix>.txt/.records/.confusion.csv");
  offline_cmd->add_flag("--no-fn", offline.no_fn, "Disable feature normalization");
  offline_cmd->add_flag("--no-wms", offline.no_wms, "Force unit stream weights");

  EvalOnlineArgs online;
  auto* online_cmd = app.add_subcommand("eval-online", "Segment and classify a continuous stream");
  add_common(online_cmd, online.common);
  online_cmd->add_option("-m,--model", online.model, "Model file")->required()->check(CLI::ExistingFile);
  online_cmd->add_option("-i,--stream", online.stream, "Stream file")->required()->check(CLI::ExistingFile);
  online_cmd->add_option("-t,--truth", online.truth, "Ground-truth sidecar")->required()->check(CLI::ExistingFile);
  online_cmd->add_option("--sigma", online.sigma, "IoU threshold (default from config, 0.5)");
  online_cmd->add_option("-e,--events", online.events, "Write detected events here");
  online_cmd->add_option("-r,--report", online.report_prefix, "Write <prefix>.txt/.records");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Measure classification latency and online throughput");
  add_common(bench_cmd, bench.common);
  bench_cmd->add_option("-m,--model", bench.model, "Model file")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("-d,--dataset", bench.dataset, "Dataset directory (default: synthetic gestures)");
  bench_cmd->add_option("-n,--repetitions", bench.repetitions, "Classifications per measurement")
      ->check(CLI::Range(std::size_t{100}, std::size_t{1000000}));
  bench_cmd->add_option("--sweep", bench.sweep, "Class counts for the latency sweep")->delimiter(',');

  ExportArgs exporter;
  auto* export_cmd = app.add_subcommand("export-stream", "Merge instances into a stream plus ground-truth sidecar");
  add_common(export_cmd, exporter.common);
  export_cmd->add_option("-d,--dataset", exporter.dataset, "Dataset directory")->required();
  export_cmd->add_option("-o,--output", exporter.output, "Stream file to write")->required();
  export_cmd->add_option("-t,--truth", exporter.truth, "Sidecar file to write")->required();
  export_cmd->add_option("--gap", exporter.gap, "Idle frames between instances (default 30)");
  export_cmd->add_option("--part", exporter.part, "all, train or test side of the configured split")
      ->check(CLI::IsMember({"all", "train", "test"}));

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic toy dataset in skeleton text format");
  synth_cmd->add_option("-o,--output", synth.output, "Output directory")->required();
  synth_cmd->add_option("--descriptor", synth.descriptor, "msr or kinect");
  synth_cmd->add_option("--classes", synth.options.classes, "Number of classes (max 20)")
      ->check(CLI::Range(std::size_t{1}, kSyntheticClassLimit));
  synth_cmd->add_option("--subjects", synth.options.subjects, "Subjects");
  synth_cmd->add_option("--episodes", synth.options.episodes, "Repetitions per subject");
  synth_cmd->add_option("--seed", synth.options.seed, "Generator seed");
  synth_cmd->add_option("--noise", synth.options.noise, "Per-coordinate noise (m)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) return run_train(train);
    if (*offline_cmd) return run_eval_offline(offline);
    if (*online_cmd) return run_eval_online(online);
    if (*bench_cmd) return run_bench_cmd(bench);
    if (*export_cmd) return run_export(exporter);
    if (*synth_cmd) return run_synth(synth);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
