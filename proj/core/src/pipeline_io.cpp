#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json_codec.hpp"
#include "msdhmm/dual_stage.hpp"
#include "msdhmm/error.hpp"

namespace msdhmm {

namespace {

using nlohmann::json;

constexpr int kPipelineFormatVersion = 1;

json bank_to_json(const StageBank& bank) {
  json doc;
  doc["features"] = {{"joints", bank.features.joints},
                     {"reference_joint", bank.features.reference_joint},
                     {"levels", bank.features.levels}};
  doc["normalizer"] = {{"identity", bank.normalizer.is_identity()},
                       {"min", bank.normalizer.min()},
                       {"max", bank.normalizer.max()}};
  doc["classes"] = bank.classes;
  json models = json::array();
  for (const auto& m : bank.models) models.push_back(detail::hmm_to_json(m));
  doc["models"] = std::move(models);
  return doc;
}

StageBank bank_from_json(const json& doc) {
  StageBank bank;
  const auto& f = doc.at("features");
  bank.features.joints = f.at("joints").get<std::vector<int>>();
  bank.features.reference_joint = f.at("reference_joint").get<int>();
  bank.features.levels = f.at("levels").get<int>();
  const auto& n = doc.at("normalizer");
  if (n.at("identity").get<bool>()) {
    bank.normalizer = Normalizer::identity(bank.features.dimension());
  } else {
    bank.normalizer = Normalizer(n.at("min").get<std::vector<double>>(), n.at("max").get<std::vector<double>>());
  }
  if (bank.normalizer.dimension() != bank.features.dimension()) {
    throw DataError("normalizer dimension does not match the feature config");
  }
  bank.classes = doc.at("classes").get<std::vector<int>>();
  for (const auto& m : doc.at("models")) {
    bank.models.push_back(detail::hmm_from_json(m));
    if (bank.models.back().streams() != bank.features.dimension()) {
      throw DataError("model stream count does not match the feature config");
    }
  }
  return bank;
}

json manifest_of(const DualStageModel& model) {
  json manifest;
  manifest["descriptor"] = model.descriptor_name;
  manifest["joint_count"] = model.joint_count;
  const auto& o = model.options;
  manifest["hyperparameters"] = {
      {"N", o.hmm.states},
      {"L", o.hmm.levels},
      {"max_jump", o.hmm.max_jump},
      {"iterations", o.hmm.max_iterations},
      {"tolerance", o.hmm.tolerance},
      {"smoothing", o.hmm.smoothing},
      {"feature_normalization", o.feature_normalization},
      {"weighted_streams", o.weighted_streams},
      {"dominance", o.dominance},
      {"global_joints", o.global_joints},
  };
  json classes = json::array();
  for (int label : model.stage1.classes) {
    classes.push_back({{"id", label},
                       {"name", model.class_name(label)},
                       {"group", std::string(to_string(model.groups.at(label)))}});
  }
  manifest["classes"] = std::move(classes);
  return manifest;
}

}  // namespace

std::string DualStageModel::serialize() const {
  json stage2_doc = json::array();
  for (const auto& [group, bank] : stage2) {
    json entry = bank_to_json(bank);
    entry["group"] = std::string(to_string(group));
    stage2_doc.push_back(std::move(entry));
  }
  // Readable manifest first, bulky parameter arrays compact on their own lines.
  std::ostringstream out;
  out << "{\n"
      << "\"format\": \"msdhmm-pipeline\",\n"
      << "\"version\": " << kPipelineFormatVersion << ",\n"
      << "\"manifest\": " << manifest_of(*this).dump(2) << ",\n"
      << "\"stage1\": " << bank_to_json(stage1).dump() << ",\n"
      << "\"stage2\": " << stage2_doc.dump() << "\n"
      << "}\n";
  return out.str();
}

DualStageModel DualStageModel::deserialize(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "msdhmm-pipeline") throw DataError("not an msdhmm pipeline model");
    if (doc.at("version").get<int>() != kPipelineFormatVersion) {
      throw DataError("unsupported pipeline model version " + doc.at("version").dump());
    }
    DualStageModel model;
    const auto& manifest = doc.at("manifest");
    model.descriptor_name = manifest.at("descriptor").get<std::string>();
    model.joint_count = manifest.at("joint_count").get<std::size_t>();
    const auto& h = manifest.at("hyperparameters");
    auto& o = model.options;
    o.hmm.states = h.at("N").get<std::size_t>();
    o.hmm.levels = h.at("L").get<int>();
    o.hmm.max_jump = h.at("max_jump").get<int>();
    o.hmm.max_iterations = h.at("iterations").get<int>();
    o.hmm.tolerance = h.at("tolerance").get<double>();
    o.hmm.smoothing = h.at("smoothing").get<double>();
    o.feature_normalization = h.at("feature_normalization").get<bool>();
    o.weighted_streams = h.at("weighted_streams").get<bool>();
    o.dominance = h.at("dominance").get<double>();
    o.global_joints = h.at("global_joints").get<std::vector<int>>();
    for (const auto& c : manifest.at("classes")) {
      const int label = c.at("id").get<int>();
      const auto name = c.at("name").get<std::string>();
      if (name != "class" + std::to_string(label)) o.class_names[label] = name;
      const auto group = gesture_group_from_string(c.at("group").get<std::string>());
      if (!group) throw DataError("unknown gesture group " + c.at("group").dump());
      model.groups[label] = *group;
    }
    model.stage1 = bank_from_json(doc.at("stage1"));
    for (const auto& entry : doc.at("stage2")) {
      const auto group = gesture_group_from_string(entry.at("group").get<std::string>());
      if (!group) throw DataError("unknown gesture group " + entry.at("group").dump());
      model.stage2.emplace(*group, bank_from_json(entry));
    }
    model.descriptor();  // rejects unknown descriptor names
    model.check_invariants();
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed pipeline model: ") + e.what());
  } catch (const InvariantError& e) {
    throw DataError(std::string("inconsistent pipeline model: ") + e.what());
  }
}

std::string DualStageModel::manifest_hash() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize()) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void save_pipeline(const DualStageModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << model.serialize();
  if (!out) throw DataError("failed writing " + path);
}

DualStageModel load_pipeline(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return DualStageModel::deserialize(buffer.str());
}

}  // namespace msdhmm
