#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msdhmm/features.hpp"
#include "msdhmm/msd_hmm.hpp"
#include "msdhmm/skeleton.hpp"

namespace msdhmm {

// Body-area gesture clusters. The first four are local areas, the last
// four are macro areas made of two local areas each.
enum class GestureGroup { RUP, LUP, RLP, LLP, UP, BP, RP, LP };

inline constexpr GestureGroup kLocalGroups[] = {GestureGroup::RUP, GestureGroup::LUP,
                                                GestureGroup::RLP, GestureGroup::LLP};
inline constexpr GestureGroup kMacroGroups[] = {GestureGroup::UP, GestureGroup::BP,
                                                GestureGroup::RP, GestureGroup::LP};

std::string_view to_string(GestureGroup group);
std::optional<GestureGroup> gesture_group_from_string(std::string_view name);
bool is_local(GestureGroup group) noexcept;
// The two local areas a macro area combines; a local area maps to itself.
std::vector<GestureGroup> local_parts(GestureGroup group);

// Upper areas: hand, wrist, elbow, shoulder of one side. Lower areas: foot,
// ankle, knee, hip of one side. Macro areas are unions.
std::vector<int> group_joints(GestureGroup group, const SkeletonDescriptor& descriptor);

struct StreamWeights {
  std::vector<double> alpha;  // one per feature stream
};

// Mean per-frame displacement norm of every listed joint, pooled over all
// frames of all instances.
std::vector<double> joint_motion(std::span<const GestureInstance> instances,
                                 std::span<const int> joints);

// Every stream of joint i gets a weight proportional to its mean motion,
// rescaled to mean 1; all-static input gives unit weights.
StreamWeights compute_stream_weights(std::span<const GestureInstance> instances,
                                     const FeatureConfig& config);

using ClassInstances = std::map<int, std::vector<GestureInstance>>;

// Motion energy is summed per local area. A local area holding more than
// `dominance` of the total wins; otherwise the best macro area does.
// Overrides always win.
std::map<int, GestureGroup> assign_groups(const ClassInstances& training,
                                          const SkeletonDescriptor& descriptor,
                                          const std::map<int, GestureGroup>& overrides = {},
                                          double dominance = 0.6);

struct PipelineOptions {
  TrainOptions hmm;
  bool feature_normalization = true;
  bool weighted_streams = true;
  double dominance = 0.6;
  std::map<int, GestureGroup> overrides;
  std::vector<int> global_joints;  // empty: head, hands, feet
  std::map<int, std::string> class_names;
  int threads = 0;                 // 0: hardware concurrency
};

// One bank of per-class models sharing a feature space.
struct StageBank {
  FeatureConfig features;
  Normalizer normalizer;
  std::vector<int> classes;  // ascending
  std::vector<MsdHmm> models;

  std::size_t size() const noexcept { return classes.size(); }
  SymbolSequence encode(std::span<const SkeletonFrame> frames) const;
  std::vector<double> score(const SymbolSequence& symbols) const;
  std::vector<double> score(std::span<const SkeletonFrame> frames) const { return score(encode(frames)); }
};

struct DualStageModel {
  std::string descriptor_name;
  std::size_t joint_count = 0;
  PipelineOptions options;
  StageBank stage1;
  std::map<int, GestureGroup> groups;
  std::map<GestureGroup, StageBank> stage2;

  std::vector<int> classes() const { return stage1.classes; }
  std::string class_name(int label) const;
  SkeletonDescriptor descriptor() const;
  // Throws InvariantError if the banks do not partition the class set.
  void check_invariants() const;

  std::string serialize() const;
  static DualStageModel deserialize(std::string_view text);
  // FNV-1a of the serialized document, as 16 hex digits.
  std::string manifest_hash() const;
};

DualStageModel train_pipeline(std::span<const GestureInstance> train,
                              const SkeletonDescriptor& descriptor,
                              const PipelineOptions& options);

// Keeps only `classes` in both stages; groups left empty are removed.
DualStageModel restrict_classes(const DualStageModel& model, const std::vector<int>& classes);

struct ScoredClass {
  int label = 0;
  double log_likelihood = 0.0;
};

struct Classification {
  int label = 0;         // final decision
  int stage1_label = 0;  // argmax of the stage-1 bank
  GestureGroup group = GestureGroup::UP;
  std::vector<ScoredClass> stage1_scores;
  std::vector<ScoredClass> stage2_scores;  // members of `group` only
};

enum class ClassifyMode { DualStage, Stage1Only };

// Index of the largest score; ties go to the lowest index.
std::size_t argmax(std::span<const double> scores);

Classification classify(const DualStageModel& model, std::span<const SkeletonFrame> frames,
                        ClassifyMode mode = ClassifyMode::DualStage);
// Stage-2 refinement given a stage-1 winner.
Classification refine(const DualStageModel& model, std::span<const SkeletonFrame> frames,
                      int stage1_label);

void save_pipeline(const DualStageModel& model, const std::string& path);
DualStageModel load_pipeline(const std::string& path);

}  // namespace msdhmm
