#include "msdhmm/dual_stage.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <optional>
#include <cmath>
#include <set>
#include <thread>

#include "msdhmm/error.hpp"
#include "parallel.hpp"

namespace msdhmm {

namespace {

constexpr std::string_view kGroupNames[] = {"RUP", "LUP", "RLP", "LLP", "UP", "BP", "RP", "LP"};

bool frames_have_joints(const GestureInstance& instance, const std::vector<int>& joints) {
  for (const auto& frame : instance.frames) {
    for (int j : joints) {
      if (static_cast<std::size_t>(j) >= frame.joints.size()) return false;
      if (static_cast<std::size_t>(j) < frame.valid.size() && !frame.valid[j]) return false;
    }
  }
  return !instance.frames.empty();
}

double distance(const Joint3D& a, const Joint3D& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

StageBank train_bank(const FeatureConfig& features,
                     const std::vector<std::pair<int, std::vector<const GestureInstance*>>>& members,
                     const PipelineOptions& options) {
  StageBank bank;
  bank.features = features;

  std::vector<std::vector<ObservationSequence>> observations(members.size());
  for (std::size_t c = 0; c < members.size(); ++c) {
    for (const auto* instance : members[c].second) {
      observations[c].push_back(extract(instance->frames, features));
    }
  }
  if (options.feature_normalization) {
    std::vector<ObservationSequence> pooled;
    for (const auto& per_class : observations) pooled.insert(pooled.end(), per_class.begin(), per_class.end());
    bank.normalizer = fit_normalizer(pooled);
  } else {
    bank.normalizer = Normalizer::identity(features.dimension());
  }

  bank.classes.resize(members.size());
  std::vector<std::optional<MsdHmm>> models(members.size());
  detail::parallel_for(members.size(), options.threads, [&](std::size_t c) {
    std::vector<SymbolSequence> sequences;
    for (const auto& seq : observations[c]) {
      SymbolSequence symbols;
      symbols.reserve(seq.size());
      for (const auto& v : seq) symbols.push_back(quantize(bank.normalizer.apply(v), features.levels));
      sequences.push_back(std::move(symbols));
    }
    TrainOptions hmm = options.hmm;
    hmm.levels = features.levels;
    if (options.weighted_streams) {
      std::vector<GestureInstance> copies;
      for (const auto* instance : members[c].second) copies.push_back(*instance);
      hmm.weights = compute_stream_weights(copies, features).alpha;
    } else {
      hmm.weights.clear();
    }
    models[c] = train(sequences, features.dimension(), hmm).model;
    bank.classes[c] = members[c].first;
  });
  for (auto& m : models) bank.models.push_back(std::move(*m));
  return bank;
}

}  // namespace

std::string_view to_string(GestureGroup group) { return kGroupNames[static_cast<int>(group)]; }

std::optional<GestureGroup> gesture_group_from_string(std::string_view name) {
  for (int i = 0; i < 8; ++i) {
    if (kGroupNames[i] == name) return static_cast<GestureGroup>(i);
  }
  return std::nullopt;
}

bool is_local(GestureGroup group) noexcept { return static_cast<int>(group) < 4; }

std::vector<GestureGroup> local_parts(GestureGroup group) {
  using G = GestureGroup;
  switch (group) {
    case G::UP:
      return {G::RUP, G::LUP};
    case G::BP:
      return {G::RLP, G::LLP};
    case G::RP:
      return {G::RUP, G::RLP};
    case G::LP:
      return {G::LUP, G::LLP};
    default:
      return {group};
  }
}

std::vector<int> group_joints(GestureGroup group, const SkeletonDescriptor& descriptor) {
  using R = JointRole;
  static constexpr std::array<std::array<R, 4>, 4> kAreaRoles = {{
      {R::HandRight, R::WristRight, R::ElbowRight, R::ShoulderRight},
      {R::HandLeft, R::WristLeft, R::ElbowLeft, R::ShoulderLeft},
      {R::FootRight, R::AnkleRight, R::KneeRight, R::HipRight},
      {R::FootLeft, R::AnkleLeft, R::KneeLeft, R::HipLeft},
  }};
  std::vector<int> joints;
  for (GestureGroup part : local_parts(group)) {
    for (R role : kAreaRoles[static_cast<std::size_t>(part)]) joints.push_back(descriptor.index_of(role));
  }
  return joints;
}

std::vector<double> joint_motion(std::span<const GestureInstance> instances,
                                 std::span<const int> joints) {
  std::vector<double> sum(joints.size(), 0.0);
  std::vector<std::size_t> count(joints.size(), 0);
  for (const auto& instance : instances) {
    for (std::size_t t = 1; t < instance.frames.size(); ++t) {
      const auto& prev = instance.frames[t - 1];
      const auto& cur = instance.frames[t];
      for (std::size_t i = 0; i < joints.size(); ++i) {
        const auto j = static_cast<std::size_t>(joints[i]);
        if (j >= cur.joints.size() || j >= prev.joints.size()) continue;
        if ((j < cur.valid.size() && !cur.valid[j]) || (j < prev.valid.size() && !prev.valid[j])) continue;
        sum[i] += distance(cur.joints[j], prev.joints[j]);
        ++count[i];
      }
    }
  }
  for (std::size_t i = 0; i < joints.size(); ++i) {
    if (count[i] > 0) sum[i] /= static_cast<double>(count[i]);
  }
  return sum;
}

StreamWeights compute_stream_weights(std::span<const GestureInstance> instances,
                                     const FeatureConfig& config) {
  const auto motion = joint_motion(instances, config.joints);
  double total = 0.0;
  for (double m : motion) total += m;
  StreamWeights weights;
  weights.alpha.assign(config.dimension(), 1.0);
  if (!(total > 0.0)) return weights;
  const double scale = static_cast<double>(motion.size()) / total;
  for (std::size_t i = 0; i < motion.size(); ++i) {
    std::fill_n(weights.alpha.begin() + static_cast<std::ptrdiff_t>(i * kFeaturesPerJoint),
                kFeaturesPerJoint, motion[i] * scale);
  }
  return weights;
}

std::map<int, GestureGroup> assign_groups(const ClassInstances& training,
                                          const SkeletonDescriptor& descriptor,
                                          const std::map<int, GestureGroup>& overrides,
                                          double dominance) {
  std::map<int, GestureGroup> groups;
  for (const auto& [label, instances] : training) {
    if (instances.empty()) throw DataError("class " + std::to_string(label) + " has no training instances");
    if (auto it = overrides.find(label); it != overrides.end()) {
      groups[label] = it->second;
      continue;
    }
    double energy[4];
    double total = 0.0;
    for (int a = 0; a < 4; ++a) {
      const auto joints = group_joints(kLocalGroups[a], descriptor);
      const auto motion = joint_motion(instances, joints);
      energy[a] = 0.0;
      for (double m : motion) energy[a] += m;
      total += energy[a];
    }
    const int best_local = static_cast<int>(std::max_element(energy, energy + 4) - energy);
    if (total > 0.0 && energy[best_local] > dominance * total) {
      groups[label] = kLocalGroups[best_local];
      continue;
    }
    GestureGroup best = GestureGroup::UP;
    double best_energy = -1.0;
    for (GestureGroup macro : kMacroGroups) {
      double e = 0.0;
      for (GestureGroup part : local_parts(macro)) e += energy[static_cast<int>(part)];
      if (e > best_energy) {
        best_energy = e;
        best = macro;
      }
    }
    groups[label] = best;
  }
  return groups;
}

SymbolSequence StageBank::encode(std::span<const SkeletonFrame> frames) const {
  return msdhmm::encode(frames, features, normalizer);
}

std::vector<double> StageBank::score(const SymbolSequence& symbols) const {
  std::vector<double> scores(models.size());
  for (std::size_t c = 0; c < models.size(); ++c) scores[c] = log_likelihood(models[c], symbols);
  return scores;
}

std::string DualStageModel::class_name(int label) const {
  if (auto it = options.class_names.find(label); it != options.class_names.end()) return it->second;
  return "class" + std::to_string(label);
}

SkeletonDescriptor DualStageModel::descriptor() const { return SkeletonDescriptor::preset(descriptor_name); }

void DualStageModel::check_invariants() const {
  auto fail = [](const std::string& what) { throw InvariantError("dual-stage model: " + what); };
  if (stage1.classes.size() != stage1.models.size()) fail("stage-1 class/model count mismatch");
  if (!std::is_sorted(stage1.classes.begin(), stage1.classes.end())) fail("stage-1 classes unsorted");
  std::set<int> seen;
  std::size_t total = 0;
  for (const auto& [group, bank] : stage2) {
    if (bank.classes.size() != bank.models.size()) fail("stage-2 class/model count mismatch");
    for (int label : bank.classes) {
      if (!seen.insert(label).second) fail("class " + std::to_string(label) + " in two stage-2 banks");
      auto it = groups.find(label);
      if (it == groups.end() || it->second != group) fail("class " + std::to_string(label) + " in the wrong bank");
    }
    total += bank.classes.size();
  }
  if (total != stage1.classes.size() || seen != std::set<int>(stage1.classes.begin(), stage1.classes.end())) {
    fail("stage-2 banks do not partition the stage-1 classes");
  }
  if (stage1.features.joints.size() != 5) fail("stage-1 must use the five global joints");
}

DualStageModel train_pipeline(std::span<const GestureInstance> train,
                              const SkeletonDescriptor& descriptor,
                              const PipelineOptions& options) {
  if (train.empty()) throw DataError("train_pipeline: empty training set");

  DualStageModel model;
  model.descriptor_name = descriptor.name();
  model.joint_count = descriptor.joint_count();
  model.options = options;
  if (model.options.global_joints.empty()) model.options.global_joints = descriptor.global_subset();
  const int reference = descriptor.reference_joint();
  const int levels = options.hmm.levels;

  ClassInstances by_class;
  for (const auto& instance : train) by_class[instance.label].push_back(instance);
  model.groups = assign_groups(by_class, descriptor, options.overrides, options.dominance);

  // Per class, the instances whose frames carry every joint both stages read.
  std::map<int, std::vector<const GestureInstance*>> usable;
  for (const auto& [label, instances] : by_class) {
    auto required = group_joints(model.groups.at(label), descriptor);
    required.insert(required.end(), model.options.global_joints.begin(), model.options.global_joints.end());
    required.push_back(reference);
    for (const auto& instance : instances) {
      if (frames_have_joints(instance, required)) usable[label].push_back(&instance);
    }
    if (usable[label].empty()) {
      throw DataError("class " + std::to_string(label) + " has no instance with all required joints valid");
    }
  }

  FeatureConfig global{model.options.global_joints, reference, levels};
  global.validate(descriptor.joint_count());
  std::vector<std::pair<int, std::vector<const GestureInstance*>>> all(usable.begin(), usable.end());
  model.stage1 = train_bank(global, all, options);

  std::map<GestureGroup, std::vector<std::pair<int, std::vector<const GestureInstance*>>>> per_group;
  for (const auto& [label, members] : usable) per_group[model.groups.at(label)].emplace_back(label, members);
  for (const auto& [group, members] : per_group) {
    FeatureConfig local{group_joints(group, descriptor), reference, levels};
    model.stage2.emplace(group, train_bank(local, members, options));
  }
  model.check_invariants();
  return model;
}

DualStageModel restrict_classes(const DualStageModel& model, const std::vector<int>& classes) {
  const std::set<int> keep(classes.begin(), classes.end());
  auto filter = [&](const StageBank& bank) {
    StageBank out;
    out.features = bank.features;
    out.normalizer = bank.normalizer;
    for (std::size_t c = 0; c < bank.classes.size(); ++c) {
      if (!keep.contains(bank.classes[c])) continue;
      out.classes.push_back(bank.classes[c]);
      out.models.push_back(bank.models[c]);
    }
    return out;
  };
  DualStageModel out;
  out.descriptor_name = model.descriptor_name;
  out.joint_count = model.joint_count;
  out.options = model.options;
  out.stage1 = filter(model.stage1);
  if (out.stage1.classes.empty()) throw DataError("restrict_classes: no class left");
  for (const auto& [label, group] : model.groups) {
    if (keep.contains(label)) out.groups[label] = group;
  }
  for (const auto& [group, bank] : model.stage2) {
    auto filtered = filter(bank);
    if (!filtered.classes.empty()) out.stage2.emplace(group, std::move(filtered));
  }
  out.check_invariants();
  return out;
}

std::size_t argmax(std::span<const double> scores) {
  if (scores.empty()) throw DataError("argmax of an empty score list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

Classification refine(const DualStageModel& model, std::span<const SkeletonFrame> frames,
                      int stage1_label) {
  Classification result;
  result.stage1_label = stage1_label;
  result.group = model.groups.at(stage1_label);
  const StageBank& bank = model.stage2.at(result.group);
  const auto scores = bank.score(frames);
  for (std::size_t c = 0; c < scores.size(); ++c) result.stage2_scores.push_back({bank.classes[c], scores[c]});
  result.label = bank.classes[argmax(scores)];
  return result;
}

Classification classify(const DualStageModel& model, std::span<const SkeletonFrame> frames,
                        ClassifyMode mode) {
  if (frames.empty()) throw DataError("classify: empty instance");
  const auto scores = model.stage1.score(frames);
  const int stage1_label = model.stage1.classes[argmax(scores)];

  Classification result;
  if (mode == ClassifyMode::Stage1Only) {
    result.label = stage1_label;
    result.stage1_label = stage1_label;
    result.group = model.groups.at(stage1_label);
  } else {
    result = refine(model, frames, stage1_label);
  }
  for (std::size_t c = 0; c < scores.size(); ++c) {
    result.stage1_scores.push_back({model.stage1.classes[c], scores[c]});
  }
  return result;
}

}  // namespace msdhmm
