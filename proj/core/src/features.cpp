#include "msdhmm/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msdhmm/error.hpp"

namespace msdhmm {

void FeatureConfig::validate(std::size_t joint_count) const {
  if (joints.empty()) throw DataError("feature config: empty joint subset");
  if (levels < 2 || levels > std::numeric_limits<Symbol>::max()) {
    throw DataError("feature config: quantization levels must be in [2, 65535]");
  }
  auto in_range = [&](int j) { return j >= 0 && static_cast<std::size_t>(j) < joint_count; };
  if (!in_range(reference_joint)) throw DataError("feature config: reference joint out of range");
  for (int j : joints) {
    if (!in_range(j)) throw DataError("feature config: joint " + std::to_string(j) + " out of range");
  }
}

FeatureExtractor::FeatureExtractor(FeatureConfig config) : config_(std::move(config)) {
  prev1_.assign(config_.joints.size() * 3, 0.0);
  prev2_.assign(config_.joints.size() * 3, 0.0);
}

void FeatureExtractor::reset() { primed_ = false; }

ObservationVector FeatureExtractor::push(const SkeletonFrame& frame) {
  const auto require = [&](int j) -> const Joint3D& {
    if (static_cast<std::size_t>(j) >= frame.joints.size() ||
        (static_cast<std::size_t>(j) < frame.valid.size() && !frame.valid[j])) {
      throw DataError("frame " + std::to_string(frame.index) + ": joint " + std::to_string(j) +
                      " is invalid");
    }
    return frame.joints[j];
  };

  const Joint3D& ref = require(config_.reference_joint);
  const std::size_t g = config_.joints.size();
  std::vector<double> cur(g * 3);
  for (std::size_t i = 0; i < g; ++i) {
    const Joint3D& p = require(config_.joints[i]);
    cur[3 * i] = p.x;
    cur[3 * i + 1] = p.y;
    cur[3 * i + 2] = p.z;
  }
  if (!primed_) {
    prev1_ = cur;
    prev2_ = cur;
    primed_ = true;
  }

  ObservationVector out(g * kFeaturesPerJoint);
  const double ref_xyz[3] = {ref.x, ref.y, ref.z};
  for (std::size_t i = 0; i < g; ++i) {
    double* o = out.data() + i * kFeaturesPerJoint;
    for (std::size_t k = 0; k < 3; ++k) {
      const double c = cur[3 * i + k];
      const double p1 = prev1_[3 * i + k];
      const double p2 = prev2_[3 * i + k];
      o[k] = c - ref_xyz[k];
      o[3 + k] = c - p1;
      o[6 + k] = c - 2.0 * p1 + p2;
    }
  }
  prev2_.swap(prev1_);
  prev1_ = std::move(cur);
  return out;
}

ObservationSequence extract(std::span<const SkeletonFrame> frames, const FeatureConfig& config) {
  if (frames.empty()) throw DataError("cannot extract features from an empty frame list");
  config.validate(frames.front().joints.size());
  FeatureExtractor extractor(config);
  ObservationSequence out;
  out.reserve(frames.size());
  for (const auto& frame : frames) out.push_back(extractor.push(frame));
  return out;
}

Normalizer::Normalizer(std::vector<double> min, std::vector<double> max)
    : min_(std::move(min)), max_(std::move(max)) {
  if (min_.size() != max_.size()) throw DataError("normalizer: min/max length mismatch");
  for (std::size_t d = 0; d < min_.size(); ++d) {
    if (!(max_[d] >= min_[d])) throw DataError("normalizer: max < min in dimension " + std::to_string(d));
  }
}

Normalizer Normalizer::identity(std::size_t dimension) {
  Normalizer n(std::vector<double>(dimension, -1.0), std::vector<double>(dimension, 1.0));
  n.identity_ = true;
  return n;
}

ObservationVector Normalizer::apply(std::span<const double> v) const {
  if (v.size() != min_.size()) {
    throw DataError("normalizer: dimension mismatch (" + std::to_string(v.size()) + " vs " +
                    std::to_string(min_.size()) + ")");
  }
  ObservationVector out(v.size());
  for (std::size_t d = 0; d < v.size(); ++d) {
    double x;
    if (identity_) {
      x = v[d];
    } else if (max_[d] == min_[d]) {
      x = 0.0;
    } else {
      x = 2.0 * (v[d] - min_[d]) / (max_[d] - min_[d]) - 1.0;
    }
    out[d] = std::clamp(x, -1.0, 1.0);
  }
  return out;
}

Normalizer fit_normalizer(const std::vector<ObservationSequence>& training) {
  std::vector<double> lo;
  std::vector<double> hi;
  for (const auto& sequence : training) {
    for (const auto& v : sequence) {
      if (lo.empty()) {
        lo = v;
        hi = v;
        continue;
      }
      if (v.size() != lo.size()) throw DataError("fit_normalizer: inconsistent dimensions");
      for (std::size_t d = 0; d < v.size(); ++d) {
        lo[d] = std::min(lo[d], v[d]);
        hi[d] = std::max(hi[d], v[d]);
      }
    }
  }
  if (lo.empty()) throw DataError("fit_normalizer: no training vectors");
  return Normalizer(std::move(lo), std::move(hi));
}

Symbol quantize_value(double v, int levels) noexcept {
  if (!(v > -1.0)) return 0;
  if (v >= 1.0) return static_cast<Symbol>(levels - 1);
  const double bin = std::floor((v + 1.0) / 2.0 * levels);
  return static_cast<Symbol>(std::clamp(bin, 0.0, static_cast<double>(levels - 1)));
}

QuantizedObservation quantize(std::span<const double> v, int levels) {
  QuantizedObservation out(v.size());
  for (std::size_t d = 0; d < v.size(); ++d) out[d] = quantize_value(v[d], levels);
  return out;
}

SymbolSequence encode(std::span<const SkeletonFrame> frames, const FeatureConfig& config,
                      const Normalizer& normalizer) {
  const auto features = extract(frames, config);
  SymbolSequence out;
  out.reserve(features.size());
  for (const auto& v : features) out.push_back(quantize(normalizer.apply(v), config.levels));
  return out;
}

}  // namespace msdhmm
