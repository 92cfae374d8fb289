#include "msdhmm/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "msdhmm/error.hpp"

namespace msdhmm {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

template <typename T>
T parse_number(const std::string& value, const std::string& key) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw DataError("config: bad value '" + value + "' for " + key);
  return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw DataError("config: bad boolean '" + value + "' for " + key);
}

std::string join(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + std::to_string(values[i]);
  return out;
}

std::string number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::vector<std::string> global_joint_names;
  bool have_train_subjects = false;
  std::vector<int> train_subjects;

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"N", [&](auto& v, auto& k) { cfg.pipeline.hmm.states = parse_number<std::size_t>(v, k); }},
      {"L", [&](auto& v, auto& k) { cfg.pipeline.hmm.levels = parse_number<int>(v, k); }},
      {"max_jump", [&](auto& v, auto& k) { cfg.pipeline.hmm.max_jump = parse_number<int>(v, k); }},
      {"iterations", [&](auto& v, auto& k) { cfg.pipeline.hmm.max_iterations = parse_number<int>(v, k); }},
      {"tolerance", [&](auto& v, auto& k) { cfg.pipeline.hmm.tolerance = parse_number<double>(v, k); }},
      {"smoothing", [&](auto& v, auto& k) { cfg.pipeline.hmm.smoothing = parse_number<double>(v, k); }},
      {"feature_normalization", [&](auto& v, auto& k) { cfg.pipeline.feature_normalization = parse_bool(v, k); }},
      {"weighted_streams", [&](auto& v, auto& k) { cfg.pipeline.weighted_streams = parse_bool(v, k); }},
      {"dominance", [&](auto& v, auto& k) { cfg.pipeline.dominance = parse_number<double>(v, k); }},
      {"threads", [&](auto& v, auto& k) { cfg.pipeline.threads = parse_number<int>(v, k); }},
      {"descriptor", [&](auto& v, auto&) { cfg.descriptor = v; }},
      {"global_joints", [&](auto& v, auto&) { global_joint_names = split_list(v); }},
      {"th", [&](auto& v, auto& k) { cfg.segmenter.threshold = parse_number<double>(v, k); }},
      {"v", [&](auto& v, auto& k) { cfg.segmenter.vote_fraction = parse_number<double>(v, k); }},
      {"min_duration", [&](auto& v, auto& k) { cfg.segmenter.min_duration = parse_number<std::size_t>(v, k); }},
      {"max_duration", [&](auto& v, auto& k) { cfg.segmenter.max_duration = parse_number<std::size_t>(v, k); }},
      {"refractory", [&](auto& v, auto& k) { cfg.segmenter.refractory = parse_number<std::size_t>(v, k); }},
      {"sigma", [&](auto& v, auto& k) { cfg.sigma = parse_number<double>(v, k); }},
      {"split", [&](auto& v, auto&) { cfg.split.kind = SplitSpec::parse(v).kind; }},
      {"train_subjects",
       [&](auto& v, auto& k) {
         have_train_subjects = true;
         train_subjects.clear();
         for (const auto& item : split_list(v)) train_subjects.push_back(parse_number<int>(item, k));
       }},
      {"seed", [&](auto& v, auto& k) { cfg.seed = parse_number<std::uint64_t>(v, k); }},
      {"gap", [&](auto& v, auto& k) { cfg.gap = parse_number<std::size_t>(v, k); }},
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    try {
      if (key.starts_with("group.")) {
        const int label = parse_number<int>(key.substr(6), key);
        const auto group = gesture_group_from_string(value);
        if (!group) throw DataError("config: unknown gesture group '" + value + "'");
        cfg.pipeline.overrides[label] = *group;
      } else if (key.starts_with("name.")) {
        cfg.pipeline.class_names[parse_number<int>(key.substr(5), key)] = value;
      } else if (auto it = setters.find(key); it != setters.end()) {
        it->second(value, key);
      } else {
        throw DataError("config: unknown key '" + key + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const DataError& e) {
      throw ParseError(source, line_no, e.what());
    }
  }

  if (have_train_subjects) cfg.split.train_subjects = train_subjects;
  const auto descriptor = cfg.skeleton();
  if (!global_joint_names.empty()) {
    for (const auto& name : global_joint_names) {
      const auto role = joint_role_from_string(name);
      if (!role) throw DataError("config: unknown joint '" + name + "' in global_joints");
      cfg.pipeline.global_joints.push_back(descriptor.index_of(*role));
    }
  }
  if (cfg.pipeline.hmm.states == 0) throw DataError("config: N must be positive");
  if (cfg.pipeline.hmm.levels < 2) throw DataError("config: L must be at least 2");
  cfg.segmenter.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  return parse_config(in, path.string());
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  const auto& h = pipeline.hmm;
  out << "descriptor = " << descriptor << '\n'
      << "N = " << h.states << '\n'
      << "L = " << h.levels << '\n'
      << "max_jump = " << h.max_jump << '\n'
      << "iterations = " << h.max_iterations << '\n'
      << "tolerance = " << number(h.tolerance) << '\n'
      << "smoothing = " << number(h.smoothing) << '\n'
      << "feature_normalization = " << (pipeline.feature_normalization ? "true" : "false") << '\n'
      << "weighted_streams = " << (pipeline.weighted_streams ? "true" : "false") << '\n'
      << "dominance = " << number(pipeline.dominance) << '\n';
  if (!pipeline.global_joints.empty()) {
    const auto d = skeleton();
    out << "global_joints = ";
    for (std::size_t i = 0; i < pipeline.global_joints.size(); ++i) {
      const auto role = d.role_at(pipeline.global_joints[i]);
      if (!role) throw InvariantError("config: global joint without a role");
      out << (i ? "," : "") << to_string(*role);
    }
    out << '\n';
  }
  out << "th = " << number(segmenter.threshold) << '\n'
      << "v = " << number(segmenter.vote_fraction) << '\n'
      << "min_duration = " << segmenter.min_duration << '\n'
      << "max_duration = " << segmenter.max_duration << '\n'
      << "refractory = " << segmenter.refractory << '\n'
      << "sigma = " << number(sigma) << '\n'
      << "split = " << split.describe().substr(0, split.describe().find('(')) << '\n'
      << "train_subjects = " << join(split.train_subjects) << '\n'
      << "seed = " << seed << '\n'
      << "gap = " << gap << '\n';
  for (const auto& [label, group] : pipeline.overrides) out << "group." << label << " = " << to_string(group) << '\n';
  for (const auto& [label, name] : pipeline.class_names) out << "name." << label << " = " << name << '\n';
  return out.str();
}

}  // namespace msdhmm
