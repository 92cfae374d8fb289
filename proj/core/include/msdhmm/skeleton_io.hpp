#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "msdhmm/skeleton.hpp"

namespace msdhmm {

// Reads one MSRAction3D "skeleton3D" text file: an optional header line,
// then `joint_count` lines of `x y z confidence` per frame. Every frame is
// returned; joints with all-zero or non-finite coordinates are flagged
// invalid but left untouched. Label/subject/episode are parsed from an
// `aXX_sYY_eZZ` file name when present.
GestureInstance load_msr_skeleton(const std::filesystem::path& path,
                                  const SkeletonDescriptor& descriptor);
GestureInstance parse_msr_skeleton(std::istream& in, const std::string& source,
                                   const SkeletonDescriptor& descriptor);

// Writes `frames` in the same text layout, without a header line.
void write_msr_skeleton(std::ostream& out, const GestureInstance& instance);
void save_msr_skeleton(const std::filesystem::path& path, const GestureInstance& instance);
// aXX_sYY_eZZ_skeleton3D.txt
std::string msr_file_name(const GestureInstance& instance);

struct CleanStats {
  std::size_t dropped_frames = 0;
  std::size_t filled_joints = 0;
};

// Drops frames with more than half of their joints invalid and fills the
// remaining invalid joints by holding the last valid position of that joint.
// Joints invalid since the first kept frame are filled from the next valid
// observation. A joint that is never valid stays flagged.
CleanStats clean_instance(GestureInstance& instance);

// Generic stream format: one frame per line, `index` then joint_count*3
// floats. Frames are validated against `joint_count` when non-zero,
// otherwise the first line fixes it.
std::vector<SkeletonFrame> load_stream(const std::filesystem::path& path,
                                       std::size_t joint_count = 0);
std::vector<SkeletonFrame> parse_stream(std::istream& in, const std::string& source,
                                        std::size_t joint_count = 0);
void write_stream(std::ostream& out, const std::vector<SkeletonFrame>& frames);
void save_stream(const std::filesystem::path& path,
                 const std::vector<SkeletonFrame>& frames);

// Ground-truth interval, [start, end) in frame positions of the stream.
struct Segment {
  int label = 0;
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - start; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

std::vector<Segment> load_sidecar(const std::filesystem::path& path);
std::vector<Segment> parse_sidecar(std::istream& in, const std::string& source);
void write_sidecar(std::ostream& out, const std::vector<Segment>& segments);

// One relative file name per line; `#` starts a comment.
std::set<std::string> load_allowlist(const std::filesystem::path& path);
std::set<std::string> parse_allowlist(std::istream& in);

struct Dataset {
  std::vector<GestureInstance> instances;
  std::vector<std::string> skipped;  // files rejected by allowlist or cleaning
  bool allowlist_applied = false;
  std::size_t dropped_frames = 0;
};

// Loads every `*.txt` skeleton file in `dir` (sorted by name), cleans each
// instance and discards instances left empty. `allowlist` defaults to
// `dir/allowlist.txt` when that file exists.
Dataset load_dataset(const std::filesystem::path& dir, const SkeletonDescriptor& descriptor,
                     const std::optional<std::filesystem::path>& allowlist = std::nullopt);

struct StreamExport {
  std::vector<SkeletonFrame> frames;
  std::vector<Segment> truth;
};

// Concatenates instances into one stream separated by `gap` frames that
// hold the previous instance's last pose. Frame indices are renumbered.
StreamExport merge_into_stream(const std::vector<GestureInstance>& instances,
                               std::size_t gap = 30);

}  // namespace msdhmm
