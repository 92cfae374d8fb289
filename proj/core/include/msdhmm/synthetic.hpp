#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "msdhmm/skeleton.hpp"

namespace msdhmm {

// Toy skeleton gestures for tests, benchmarks and demos. Class c moves one
// effector (right hand, left hand, both hands, right foot, left foot) along
// one of four trajectories (raise, forward reach, side reach, circle),
// starting and ending in a rest pose. Each gesture is framed by raising both
// hands to a ready pose and lowering them again.
struct SyntheticOptions {
  std::size_t classes = 10;
  std::size_t subjects = 10;
  std::size_t episodes = 3;
  std::size_t min_frames = 30;
  std::size_t max_frames = 50;
  std::size_t rest_frames = 4;  // still frames before and after the motion
  double noise = 0.004;         // per-coordinate gaussian noise, meters
  std::uint64_t seed = 7;
};

inline constexpr std::size_t kSyntheticClassLimit = 20;

// Rest pose of a standing subject, about 1.75 m tall, scaled by `scale`.
SkeletonFrame rest_pose(const SkeletonDescriptor& descriptor, double scale = 1.0);

GestureInstance synthetic_gesture(int label, int subject, int episode,
                                  const SkeletonDescriptor& descriptor,
                                  const SyntheticOptions& options);

// classes x subjects x episodes instances, labels 1..classes, subjects 1..subjects.
std::vector<GestureInstance> synthetic_dataset(const SkeletonDescriptor& descriptor,
                                               const SyntheticOptions& options);

// `count` idle frames holding `pose` with sensor noise.
std::vector<SkeletonFrame> idle_frames(const SkeletonFrame& pose, std::size_t count, double noise,
                                       std::uint64_t seed);

}  // namespace msdhmm
