#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "msdhmm/skeleton.hpp"

namespace msdhmm {

inline constexpr std::size_t kFeaturesPerJoint = 9;

using ObservationVector = std::vector<double>;
using Symbol = std::uint16_t;
using QuantizedObservation = std::vector<Symbol>;
using ObservationSequence = std::vector<ObservationVector>;
using SymbolSequence = std::vector<QuantizedObservation>;

struct FeatureConfig {
  std::vector<int> joints;  // ordered joint indices, G entries
  int reference_joint = 0;
  int levels = 10;          // quantization levels L

  std::size_t dimension() const noexcept { return joints.size() * kFeaturesPerJoint; }
  void validate(std::size_t joint_count) const;
  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

// Per-joint features, joint-major: position relative to the reference
// joint, first backward difference, second backward difference. Missing
// past frames are taken to equal frame 0.
ObservationSequence extract(std::span<const SkeletonFrame> frames, const FeatureConfig& config);

// Causal form of `extract` for streaming input. Feeding frames one at a
// time yields exactly the rows `extract` would produce for the prefix.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(FeatureConfig config);

  ObservationVector push(const SkeletonFrame& frame);
  void reset();
  const FeatureConfig& config() const noexcept { return config_; }

 private:
  FeatureConfig config_;
  std::vector<double> prev1_;  // joint positions at t-1, xyz per joint
  std::vector<double> prev2_;  // at t-2
  bool primed_ = false;
};

class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(std::vector<double> min, std::vector<double> max);

  // Maps every value to itself, clamped to [-1, 1]. Used when feature
  // normalization is disabled.
  static Normalizer identity(std::size_t dimension);

  std::size_t dimension() const noexcept { return min_.size(); }
  bool is_identity() const noexcept { return identity_; }
  bool is_constant(std::size_t d) const { return !identity_ && max_[d] == min_[d]; }
  const std::vector<double>& min() const noexcept { return min_; }
  const std::vector<double>& max() const noexcept { return max_; }

  ObservationVector apply(std::span<const double> v) const;

 private:
  std::vector<double> min_;
  std::vector<double> max_;
  bool identity_ = false;
};

Normalizer fit_normalizer(const std::vector<ObservationSequence>& training);

inline ObservationVector normalize(std::span<const double> v, const Normalizer& n) {
  return n.apply(v);
}

// Equal-width bins over [-1, 1]: floor((v + 1) / 2 * L), with v = 1 -> L - 1.
Symbol quantize_value(double v, int levels) noexcept;
QuantizedObservation quantize(std::span<const double> v, int levels);

// extract -> normalize -> quantize for a whole sequence.
SymbolSequence encode(std::span<const SkeletonFrame> frames, const FeatureConfig& config,
                      const Normalizer& normalizer);

}  // namespace msdhmm
