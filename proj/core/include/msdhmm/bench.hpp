#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "msdhmm/dual_stage.hpp"
#include "msdhmm/segmenter.hpp"

namespace msdhmm {

// Reference figures for a 20-class model on an i7-4790.
inline constexpr double kReferenceLatencySeconds = 4.4e-2;
inline constexpr double kReferenceFramesPerSecond = 80.35;
inline constexpr double kMeanGestureFrames = 41.0;

struct SweepPoint {
  std::size_t classes = 0;
  double latency_seconds = 0.0;  // per gesture, normalized to 41 frames
};

struct BenchReport {
  std::size_t stage1_models = 0;
  std::size_t stage2_models = 0;
  std::size_t classifications = 0;
  double latency_seconds = 0.0;  // per gesture, normalized to 41 frames
  double online_fps = 0.0;
  std::size_t stream_frames = 0;
  std::vector<SweepPoint> sweep;
  std::string hardware;

  std::string to_text() const;
  std::string to_records() const;
};

std::string hardware_note();

// Mean offline classification time per frame times 41, over at least
// `repetitions` classifications cycling through `gestures`.
double measure_latency(const DualStageModel& model,
                       const std::vector<std::vector<SkeletonFrame>>& gestures,
                       std::size_t repetitions = 100);

// Frames per second of run_stream over `stream`.
double measure_fps(const DualStageModel& model, std::span<const SkeletonFrame> stream,
                   const SegmenterConfig& config);

BenchReport run_bench(const DualStageModel& model,
                      const std::vector<std::vector<SkeletonFrame>>& gestures,
                      std::span<const SkeletonFrame> stream, const SegmenterConfig& config,
                      const std::vector<std::size_t>& sweep_sizes = {5, 10, 15, 20},
                      std::size_t repetitions = 100);

}  // namespace msdhmm
