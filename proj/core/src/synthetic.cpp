#include "msdhmm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "msdhmm/error.hpp"

namespace msdhmm {

namespace {

using R = JointRole;

struct Vec3 {
  double x, y, z;
};

Vec3 rest_position(JointRole role) {
  switch (role) {
    case R::HipCenter: return {0.0, 0.0, 2.5};
    case R::Spine: return {0.0, 0.2, 2.5};
    case R::ShoulderCenter: return {0.0, 0.45, 2.5};
    case R::Head: return {0.0, 0.65, 2.48};
    case R::ShoulderLeft: return {0.18, 0.40, 2.5};
    case R::ElbowLeft: return {0.22, 0.15, 2.5};
    case R::WristLeft: return {0.24, -0.08, 2.48};
    case R::HandLeft: return {0.25, -0.15, 2.47};
    case R::ShoulderRight: return {-0.18, 0.40, 2.5};
    case R::ElbowRight: return {-0.22, 0.15, 2.5};
    case R::WristRight: return {-0.24, -0.08, 2.48};
    case R::HandRight: return {-0.25, -0.15, 2.47};
    case R::HipLeft: return {0.10, -0.05, 2.5};
    case R::KneeLeft: return {0.11, -0.50, 2.49};
    case R::AnkleLeft: return {0.12, -0.90, 2.5};
    case R::FootLeft: return {0.12, -0.95, 2.42};
    case R::HipRight: return {-0.10, -0.05, 2.5};
    case R::KneeRight: return {-0.11, -0.50, 2.49};
    case R::AnkleRight: return {-0.12, -0.90, 2.5};
    case R::FootRight: return {-0.12, -0.95, 2.42};
  }
  return {0.0, 0.0, 0.0};
}

struct Chain {
  JointRole joints[4];
  double outward;  // +1 for the subject's left side (positive x)
  bool upper;
};

constexpr Chain kRightArm{{R::HandRight, R::WristRight, R::ElbowRight, R::ShoulderRight}, -1.0, true};
constexpr Chain kLeftArm{{R::HandLeft, R::WristLeft, R::ElbowLeft, R::ShoulderLeft}, 1.0, true};
constexpr Chain kRightLeg{{R::FootRight, R::AnkleRight, R::KneeRight, R::HipRight}, -1.0, false};
constexpr Chain kLeftLeg{{R::FootLeft, R::AnkleLeft, R::KneeLeft, R::HipLeft}, 1.0, false};
constexpr double kChainGain[4] = {1.0, 0.9, 0.5, 0.05};

// Every gesture opens by bringing both hands up to a ready pose in front of
// the chest and closes by lowering them; the class-specific motion happens
// in between.
constexpr Vec3 kReady{0.0, 0.1, -0.1};
constexpr double kReadyShare = 0.25;  // of the motion, for raising and again for lowering

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

// Effector displacement at phase s in [0, 1]; zero at both ends.
Vec3 trajectory(int pattern, const Chain& chain, double s, double amplitude) {
  const double env = std::sin(std::numbers::pi * s);
  const double k = chain.upper ? 1.0 : 0.8;
  Vec3 d{0.0, 0.0, 0.0};
  switch (pattern) {
    case 0:  // raise
      d = {0.0, 0.7 * k * env, -0.05 * env};
      break;
    case 1:  // forward reach
      d = {0.0, 0.3 * k * env, -0.5 * env};
      break;
    case 2:  // side reach
      d = {chain.outward * 0.5 * k * env, 0.3 * k * env, 0.0};
      break;
    default: {  // circle in the frontal plane
      const double r = 0.25 * k;
      const double a = 2.0 * std::numbers::pi * s;
      d = {chain.outward * r * std::sin(a), r * (1.0 - std::cos(a)), -0.1 * env};
      break;
    }
  }
  return {d.x * amplitude, d.y * amplitude, d.z * amplitude};
}

std::vector<const Chain*> chains_for(int effector) {
  switch (effector) {
    case 0: return {&kRightArm};
    case 1: return {&kLeftArm};
    case 2: return {&kRightArm, &kLeftArm};
    case 3: return {&kRightLeg};
    default: return {&kLeftLeg};
  }
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void add_noise(SkeletonFrame& frame, double noise, std::mt19937_64& rng) {
  if (noise <= 0.0) return;
  std::normal_distribution<double> gauss(0.0, noise);
  for (auto& j : frame.joints) {
    j.x += gauss(rng);
    j.y += gauss(rng);
    j.z += gauss(rng);
  }
}

}  // namespace

SkeletonFrame rest_pose(const SkeletonDescriptor& descriptor, double scale) {
  SkeletonFrame frame;
  frame.joints.resize(descriptor.joint_count());
  frame.valid.assign(descriptor.joint_count(), true);
  const Vec3 root = rest_position(R::HipCenter);
  for (std::size_t r = 0; r < kJointRoleCount; ++r) {
    const auto role = static_cast<JointRole>(r);
    const Vec3 p = rest_position(role);
    auto& j = frame.joints[static_cast<std::size_t>(descriptor.index_of(role))];
    j.x = root.x + (p.x - root.x) * scale;
    j.y = root.y + (p.y - root.y) * scale;
    j.z = root.z + (p.z - root.z) * scale;
  }
  return frame;
}

GestureInstance synthetic_gesture(int label, int subject, int episode,
                                  const SkeletonDescriptor& descriptor,
                                  const SyntheticOptions& options) {
  if (label < 1 || label > static_cast<int>(kSyntheticClassLimit)) {
    throw DataError("synthetic gestures support labels 1.." + std::to_string(kSyntheticClassLimit));
  }
  const int c = label - 1;
  const int effector = c / 4;
  const int pattern = c % 4;

  std::mt19937_64 subject_rng(mix(options.seed, static_cast<std::uint64_t>(subject)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double scale = 0.9 + 0.2 * unit(subject_rng);
  const Vec3 offset{0.6 * unit(subject_rng) - 0.3, 0.0, 0.6 * unit(subject_rng) - 0.3};

  std::mt19937_64 rng(mix(mix(options.seed, static_cast<std::uint64_t>(label)),
                          mix(static_cast<std::uint64_t>(subject), static_cast<std::uint64_t>(episode))));
  const double amplitude = scale * (0.85 + 0.3 * unit(rng));
  const double warp = 0.8 + 0.45 * unit(rng);
  const auto span = options.max_frames - options.min_frames;
  const std::size_t motion = options.min_frames + (span ? static_cast<std::size_t>(rng() % (span + 1)) : 0);

  SkeletonFrame base = rest_pose(descriptor, scale);
  for (auto& j : base.joints) {
    j.x += offset.x;
    j.z += offset.z;
  }

  GestureInstance instance;
  instance.label = label;
  instance.subject = subject;
  instance.episode = episode;
  auto emit = [&](SkeletonFrame frame) {
    frame.index = instance.frames.size();
    add_noise(frame, options.noise, rng);
    instance.frames.push_back(std::move(frame));
  };

  for (std::size_t k = 0; k < options.rest_frames; ++k) emit(base);
  for (std::size_t k = 0; k < motion; ++k) {
    const double s = std::pow(motion > 1 ? static_cast<double>(k) / static_cast<double>(motion - 1) : 0.0, warp);
    SkeletonFrame frame = base;
    const double ready = smoothstep(s / kReadyShare) * smoothstep((1.0 - s) / kReadyShare);
    const double u = std::clamp((s - kReadyShare) / (1.0 - 2.0 * kReadyShare), 0.0, 1.0);
    for (const Chain* arm : {&kRightArm, &kLeftArm}) {
      for (int i = 0; i < 4; ++i) {
        auto& j = frame.joints[static_cast<std::size_t>(descriptor.index_of(arm->joints[i]))];
        j.y += kChainGain[i] * kReady.y * scale * ready;
        j.z += kChainGain[i] * kReady.z * scale * ready;
      }
    }
    for (const Chain* chain : chains_for(effector)) {
      const Vec3 d = trajectory(pattern, *chain, u, amplitude);
      for (int i = 0; i < 4; ++i) {
        auto& j = frame.joints[static_cast<std::size_t>(descriptor.index_of(chain->joints[i]))];
        j.x += kChainGain[i] * d.x;
        j.y += kChainGain[i] * d.y;
        j.z += kChainGain[i] * d.z;
      }
    }
    emit(std::move(frame));
  }
  for (std::size_t k = 0; k < options.rest_frames; ++k) emit(base);
  return instance;
}

std::vector<GestureInstance> synthetic_dataset(const SkeletonDescriptor& descriptor,
                                               const SyntheticOptions& options) {
  std::vector<GestureInstance> out;
  out.reserve(options.classes * options.subjects * options.episodes);
  for (std::size_t c = 1; c <= options.classes; ++c) {
    for (std::size_t s = 1; s <= options.subjects; ++s) {
      for (std::size_t e = 1; e <= options.episodes; ++e) {
        out.push_back(synthetic_gesture(static_cast<int>(c), static_cast<int>(s), static_cast<int>(e),
                                        descriptor, options));
      }
    }
  }
  return out;
}

std::vector<SkeletonFrame> idle_frames(const SkeletonFrame& pose, std::size_t count, double noise,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SkeletonFrame> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    SkeletonFrame frame = pose;
    frame.index = k;
    add_noise(frame, noise, rng);
    out.push_back(std::move(frame));
  }
  return out;
}

}  // namespace msdhmm
