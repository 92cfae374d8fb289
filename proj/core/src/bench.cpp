#include "msdhmm/bench.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "msdhmm/error.hpp"

namespace msdhmm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string hardware_note() {
  std::string cpu = "unknown cpu";
  std::ifstream info("/proc/cpuinfo");
  std::string line;
  while (std::getline(info, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(colon + 2);
      break;
    }
  }
  return cpu + ", " + std::to_string(std::thread::hardware_concurrency()) + " hardware threads";
}

double measure_latency(const DualStageModel& model,
                       const std::vector<std::vector<SkeletonFrame>>& gestures,
                       std::size_t repetitions) {
  if (gestures.empty()) throw DataError("bench: no gestures to classify");
  std::size_t frames = 0;
  int sink = 0;
  const auto start = Clock::now();
  for (std::size_t k = 0; k < std::max<std::size_t>(repetitions, 1); ++k) {
    const auto& g = gestures[k % gestures.size()];
    sink += classify(model, g).label;
    frames += g.size();
  }
  const double elapsed = seconds_since(start);
  if (sink == -1) std::puts("");  // keeps the loop observable
  return elapsed / static_cast<double>(frames) * kMeanGestureFrames;
}

double measure_fps(const DualStageModel& model, std::span<const SkeletonFrame> stream,
                   const SegmenterConfig& config) {
  if (stream.empty()) throw DataError("bench: empty stream");
  const auto start = Clock::now();
  const auto events = run_stream(stream, model, config);
  const double elapsed = seconds_since(start);
  if (events.size() == static_cast<std::size_t>(-1)) std::puts("");
  return static_cast<double>(stream.size()) / std::max(elapsed, 1e-9);
}

BenchReport run_bench(const DualStageModel& model,
                      const std::vector<std::vector<SkeletonFrame>>& gestures,
                      std::span<const SkeletonFrame> stream, const SegmenterConfig& config,
                      const std::vector<std::size_t>& sweep_sizes, std::size_t repetitions) {
  BenchReport report;
  report.stage1_models = model.stage1.size();
  for (const auto& [group, bank] : model.stage2) report.stage2_models += bank.size();
  report.classifications = std::max<std::size_t>(repetitions, 1);
  report.latency_seconds = measure_latency(model, gestures, repetitions);
  report.online_fps = measure_fps(model, stream, config);
  report.stream_frames = stream.size();
  report.hardware = hardware_note();

  const auto classes = model.classes();
  for (std::size_t size : sweep_sizes) {
    if (size == 0 || size > classes.size()) continue;
    const auto subset = restrict_classes(model, std::vector<int>(classes.begin(), classes.begin() + static_cast<std::ptrdiff_t>(size)));
    report.sweep.push_back({size, measure_latency(subset, gestures, repetitions)});
  }
  return report;
}

std::string BenchReport::to_text() const {
  std::ostringstream out;
  out << "hardware            " << hardware << '\n'
      << "models per stage    " << stage1_models << " / " << stage2_models << '\n'
      << "classifications     " << classifications << '\n'
      << "latency per gesture " << sci(latency_seconds) << " s  (reference " << sci(kReferenceLatencySeconds)
      << " s, 20 classes, i7-4790)\n"
      << "online throughput   " << fixed2(online_fps) << " fps  (reference " << fixed2(kReferenceFramesPerSecond)
      << " fps) over " << stream_frames << " frames\n";
  if (!sweep.empty()) {
    out << "\nclasses  latency per gesture (s, normalized to " << kMeanGestureFrames << " frames)\n";
    for (const auto& p : sweep) {
      char line[64];
      std::snprintf(line, sizeof(line), "%7zu  %s\n", p.classes, sci(p.latency_seconds).c_str());
      out << line;
    }
  }
  return out.str();
}

std::string BenchReport::to_records() const {
  std::ostringstream out;
  out << "kind bench\n"
      << "stage1_models " << stage1_models << '\n'
      << "stage2_models " << stage2_models << '\n'
      << "latency_seconds " << sci(latency_seconds) << '\n'
      << "reference_latency_seconds " << sci(kReferenceLatencySeconds) << '\n'
      << "online_fps " << fixed2(online_fps) << '\n'
      << "reference_fps " << fixed2(kReferenceFramesPerSecond) << '\n';
  for (const auto& p : sweep) out << "sweep " << p.classes << ' ' << sci(p.latency_seconds) << '\n';
  return out.str();
}

}  // namespace msdhmm
