#include "msdhmm/skeleton.hpp"

#include <algorithm>
#include <cmath>

#include "msdhmm/error.hpp"

namespace msdhmm {

namespace {

constexpr std::string_view kRoleNames[kJointRoleCount] = {
    "hip_center",  "spine",       "shoulder_center", "head",       "shoulder_left",
    "elbow_left",  "wrist_left",  "hand_left",       "shoulder_right", "elbow_right",
    "wrist_right", "hand_right",  "hip_left",        "knee_left",  "ankle_left",
    "foot_left",   "hip_right",   "knee_right",      "ankle_right", "foot_right",
};

std::array<int, kJointRoleCount> invert(const std::array<JointRole, kJointRoleCount>& order) {
  std::array<int, kJointRoleCount> map{};
  map.fill(-1);
  for (std::size_t i = 0; i < order.size(); ++i) {
    map[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
  }
  return map;
}

}  // namespace

bool Joint3D::looks_valid() const noexcept {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) return false;
  return !(x == 0.0 && y == 0.0 && z == 0.0);
}

std::size_t SkeletonFrame::invalid_count() const noexcept {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), false));
}

std::string_view to_string(JointRole role) { return kRoleNames[static_cast<std::size_t>(role)]; }

std::optional<JointRole> joint_role_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kJointRoleCount; ++i) {
    if (kRoleNames[i] == name) return static_cast<JointRole>(i);
  }
  return std::nullopt;
}

SkeletonDescriptor::SkeletonDescriptor(std::string name, std::size_t joint_count,
                                       std::array<int, kJointRoleCount> role_to_index,
                                       JointRole reference)
    : name_(std::move(name)),
      joint_count_(joint_count),
      role_to_index_(role_to_index),
      reference_(reference) {
  for (int index : role_to_index_) {
    if (index >= static_cast<int>(joint_count_)) {
      throw DataError("skeleton descriptor '" + name_ + "': joint index out of range");
    }
  }
  reference_joint();
  global_subset();
}

SkeletonDescriptor SkeletonDescriptor::msr_action3d() {
  using R = JointRole;
  const std::array<JointRole, kJointRoleCount> order = {
      R::ShoulderRight, R::ShoulderLeft, R::ShoulderCenter, R::Spine,     R::HipRight,
      R::HipLeft,       R::HipCenter,    R::ElbowRight,     R::ElbowLeft, R::WristRight,
      R::WristLeft,     R::HandRight,    R::HandLeft,       R::KneeRight, R::KneeLeft,
      R::AnkleRight,    R::AnkleLeft,    R::FootRight,      R::FootLeft,  R::Head,
  };
  return SkeletonDescriptor("msr", kJointRoleCount, invert(order), JointRole::HipCenter);
}

SkeletonDescriptor SkeletonDescriptor::kinect_sdk() {
  std::array<JointRole, kJointRoleCount> order{};
  for (std::size_t i = 0; i < kJointRoleCount; ++i) order[i] = static_cast<JointRole>(i);
  return SkeletonDescriptor("kinect", kJointRoleCount, invert(order), JointRole::HipCenter);
}

SkeletonDescriptor SkeletonDescriptor::preset(std::string_view name) {
  if (name == "msr") return msr_action3d();
  if (name == "kinect") return kinect_sdk();
  throw DataError("unknown skeleton descriptor '" + std::string(name) + "'");
}

int SkeletonDescriptor::index_of(JointRole role) const {
  const int index = role_to_index_[static_cast<std::size_t>(role)];
  if (index < 0) {
    throw DataError("skeleton descriptor '" + name_ + "' has no joint " +
                    std::string(to_string(role)));
  }
  return index;
}

std::optional<JointRole> SkeletonDescriptor::role_at(int index) const {
  for (std::size_t r = 0; r < kJointRoleCount; ++r) {
    if (role_to_index_[r] == index) return static_cast<JointRole>(r);
  }
  return std::nullopt;
}

std::vector<int> SkeletonDescriptor::global_subset() const {
  return {index_of(JointRole::Head), index_of(JointRole::HandLeft),
          index_of(JointRole::HandRight), index_of(JointRole::FootLeft),
          index_of(JointRole::FootRight)};
}

}  // namespace msdhmm
