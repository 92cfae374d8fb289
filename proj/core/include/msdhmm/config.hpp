#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "msdhmm/dual_stage.hpp"
#include "msdhmm/segmenter.hpp"
#include "msdhmm/skeleton.hpp"
#include "msdhmm/split.hpp"

namespace msdhmm {

// Flat `key = value` file, `#` comments. Unknown keys are errors.
//
//   N, L, max_jump, iterations, tolerance, smoothing   HMM training
//   feature_normalization, weighted_streams, dominance pipeline
//   descriptor, global_joints, group.<class>, name.<class>
//   th, v, min_duration, max_duration, refractory      online segmenter
//   sigma, split, train_subjects, seed, gap, threads   evaluation
struct RunConfig {
  std::string descriptor = "msr";
  PipelineOptions pipeline;
  SegmenterConfig segmenter;
  double sigma = 0.5;
  SplitSpec split;
  std::uint64_t seed = 1;
  std::size_t gap = 30;

  SkeletonDescriptor skeleton() const { return SkeletonDescriptor::preset(descriptor); }
  // Canonical rendering, one key per line in a fixed order.
  std::string to_text() const;
};

RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace msdhmm
