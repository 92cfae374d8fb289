#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace msdhmm {

struct Joint3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double confidence = 1.0;

  // Non-finite or exactly-zero coordinates mark a joint the tracker lost.
  bool looks_valid() const noexcept;
};

struct SkeletonFrame {
  std::size_t index = 0;
  std::vector<Joint3D> joints;
  std::vector<bool> valid;

  std::size_t joint_count() const noexcept { return joints.size(); }
  std::size_t invalid_count() const noexcept;
};

struct GestureInstance {
  std::vector<SkeletonFrame> frames;
  int label = 0;
  int subject = 0;
  int episode = 0;
  std::string source;  // file the instance was read from, if any
};

// Kinect-v1 body joints. The numeric value is not a file index; the
// descriptor maps roles to indices for a given dataset layout.
enum class JointRole : int {
  HipCenter,
  Spine,
  ShoulderCenter,
  Head,
  ShoulderLeft,
  ElbowLeft,
  WristLeft,
  HandLeft,
  ShoulderRight,
  ElbowRight,
  WristRight,
  HandRight,
  HipLeft,
  KneeLeft,
  AnkleLeft,
  FootLeft,
  HipRight,
  KneeRight,
  AnkleRight,
  FootRight,
};

inline constexpr std::size_t kJointRoleCount = 20;

std::string_view to_string(JointRole role);
std::optional<JointRole> joint_role_from_string(std::string_view name);

class SkeletonDescriptor {
 public:
  // Joint order of the MSRAction3D / UTKinect skeleton text files.
  static SkeletonDescriptor msr_action3d();
  // Joint order of the Kinect for Windows SDK v1 (NUI_SKELETON_POSITION_*).
  static SkeletonDescriptor kinect_sdk();
  // Look up a preset by name ("msr" or "kinect").
  static SkeletonDescriptor preset(std::string_view name);

  SkeletonDescriptor(std::string name, std::size_t joint_count,
                     std::array<int, kJointRoleCount> role_to_index,
                     JointRole reference);

  const std::string& name() const noexcept { return name_; }
  std::size_t joint_count() const noexcept { return joint_count_; }
  int index_of(JointRole role) const;
  // Role stored at `index`, if any.
  std::optional<JointRole> role_at(int index) const;
  int reference_joint() const { return index_of(reference_); }
  JointRole reference_role() const noexcept { return reference_; }

  // Head, both hands, both feet.
  std::vector<int> global_subset() const;

 private:
  std::string name_;
  std::size_t joint_count_;
  std::array<int, kJointRoleCount> role_to_index_;
  JointRole reference_;
};

}  // namespace msdhmm
