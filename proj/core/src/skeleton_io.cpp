#include "msdhmm/skeleton_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>

#include "msdhmm/error.hpp"

namespace msdhmm {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

template <typename Int>
bool parse_int(std::string_view token, Int& out) {
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

void append_double(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

void parse_instance_name(const std::string& name, GestureInstance& instance) {
  static const std::regex pattern(R"(a(\d+)_s(\d+)_e(\d+))");
  std::smatch match;
  if (std::regex_search(name, match, pattern)) {
    instance.label = std::stoi(match[1].str());
    instance.subject = std::stoi(match[2].str());
    instance.episode = std::stoi(match[3].str());
  }
}

}  // namespace

GestureInstance parse_msr_skeleton(std::istream& in, const std::string& source,
                                   const SkeletonDescriptor& descriptor) {
  const std::size_t joints = descriptor.joint_count();
  GestureInstance instance;
  instance.source = source;
  parse_instance_name(std::filesystem::path(source).filename().string(), instance);

  std::string line;
  std::size_t line_no = 0;
  std::size_t data_lines = 0;
  std::size_t last_data_line = 0;
  bool first = true;
  SkeletonFrame frame;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (first) {
      first = false;
      if (tokens.size() != 4) {
        // Header line, e.g. "<frames> <joints>".
        for (auto token : tokens) {
          double ignored = 0.0;
          if (!parse_double(token, ignored)) {
            throw ParseError(source, line_no, "non-numeric token '" + std::string(token) + "'");
          }
        }
        continue;
      }
    }
    if (tokens.size() != 4) {
      throw ParseError(source, line_no,
                       "expected 4 values (x y z confidence), got " + std::to_string(tokens.size()));
    }
    Joint3D joint;
    double* slots[4] = {&joint.x, &joint.y, &joint.z, &joint.confidence};
    for (std::size_t k = 0; k < 4; ++k) {
      if (!parse_double(tokens[k], *slots[k])) {
        throw ParseError(source, line_no, "non-numeric token '" + std::string(tokens[k]) + "'");
      }
    }
    frame.joints.push_back(joint);
    frame.valid.push_back(joint.looks_valid());
    ++data_lines;
    last_data_line = line_no;
    if (frame.joints.size() == joints) {
      frame.index = instance.frames.size();
      instance.frames.push_back(std::move(frame));
      frame = SkeletonFrame{};
    }
  }
  if (data_lines % joints != 0) {
    throw ParseError(source, last_data_line,
                     "joint line count " + std::to_string(data_lines) +
                         " is not a multiple of the joint count " + std::to_string(joints));
  }
  return instance;
}

GestureInstance load_msr_skeleton(const std::filesystem::path& path,
                                  const SkeletonDescriptor& descriptor) {
  auto in = open_input(path);
  return parse_msr_skeleton(in, path.string(), descriptor);
}

void write_msr_skeleton(std::ostream& out, const GestureInstance& instance) {
  std::string line;
  for (const auto& frame : instance.frames) {
    for (const auto& joint : frame.joints) {
      line.clear();
      for (double v : {joint.x, joint.y, joint.z, joint.confidence}) {
        if (!line.empty()) line.push_back(' ');
        append_double(line, v);
      }
      line.push_back('\n');
      out << line;
    }
  }
}

void save_msr_skeleton(const std::filesystem::path& path, const GestureInstance& instance) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_msr_skeleton(out, instance);
}

std::string msr_file_name(const GestureInstance& instance) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "a%02d_s%02d_e%02d_skeleton3D.txt", instance.label, instance.subject,
                instance.episode);
  return buf;
}

CleanStats clean_instance(GestureInstance& instance) {
  CleanStats stats;
  auto& frames = instance.frames;
  const auto before = frames.size();
  std::erase_if(frames, [](const SkeletonFrame& f) { return 2 * f.invalid_count() > f.joint_count(); });
  stats.dropped_frames = before - frames.size();
  if (frames.empty()) return stats;

  const std::size_t joints = frames.front().joint_count();
  for (std::size_t j = 0; j < joints; ++j) {
    std::optional<Joint3D> last;
    std::size_t leading = 0;
    for (auto& frame : frames) {
      if (frame.valid[j]) {
        last = frame.joints[j];
      } else if (last) {
        frame.joints[j] = *last;
        frame.valid[j] = true;
        ++stats.filled_joints;
      } else {
        ++leading;
      }
    }
    if (leading > 0 && leading < frames.size()) {
      const Joint3D first_valid = frames[leading].joints[j];
      for (std::size_t t = 0; t < leading; ++t) {
        frames[t].joints[j] = first_valid;
        frames[t].valid[j] = true;
        ++stats.filled_joints;
      }
    }
  }
  return stats;
}

std::vector<SkeletonFrame> parse_stream(std::istream& in, const std::string& source,
                                        std::size_t joint_count) {
  std::vector<SkeletonFrame> frames;
  std::string line;
  std::size_t line_no = 0;
  static constexpr const char* kAxis[3] = {"x", "y", "z"};
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if ((tokens.size() - 1) % 3 != 0 || tokens.size() < 4) {
      throw ParseError(source, line_no,
                       "field count " + std::to_string(tokens.size()) +
                           " is not 1 + 3 * joints");
    }
    const std::size_t joints = (tokens.size() - 1) / 3;
    if (joint_count == 0) joint_count = joints;
    if (joints != joint_count) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(joint_count) + " joints, got " +
                           std::to_string(joints));
    }
    SkeletonFrame frame;
    if (!parse_int(tokens[0], frame.index)) {
      throw ParseError(source, line_no, "field 'index': not a frame index: '" +
                                            std::string(tokens[0]) + "'");
    }
    if (!frames.empty() && frame.index <= frames.back().index) {
      throw ParseError(source, line_no, "field 'index': frame indices must increase");
    }
    frame.joints.resize(joints);
    frame.valid.resize(joints);
    for (std::size_t j = 0; j < joints; ++j) {
      double* slots[3] = {&frame.joints[j].x, &frame.joints[j].y, &frame.joints[j].z};
      for (std::size_t k = 0; k < 3; ++k) {
        const auto token = tokens[1 + 3 * j + k];
        if (!parse_double(token, *slots[k])) {
          throw ParseError(source, line_no,
                           "field 'joint " + std::to_string(j) + " " + kAxis[k] +
                               "': non-numeric token '" + std::string(token) + "'");
        }
      }
      frame.valid[j] = frame.joints[j].looks_valid();
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::vector<SkeletonFrame> load_stream(const std::filesystem::path& path,
                                       std::size_t joint_count) {
  auto in = open_input(path);
  return parse_stream(in, path.string(), joint_count);
}

void write_stream(std::ostream& out, const std::vector<SkeletonFrame>& frames) {
  std::string line;
  for (const auto& frame : frames) {
    line = std::to_string(frame.index);
    for (const auto& joint : frame.joints) {
      for (double v : {joint.x, joint.y, joint.z}) {
        line.push_back(' ');
        append_double(line, v);
      }
    }
    line.push_back('\n');
    out << line;
  }
}

void save_stream(const std::filesystem::path& path, const std::vector<SkeletonFrame>& frames) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_stream(out, frames);
}

std::vector<Segment> parse_sidecar(std::istream& in, const std::string& source) {
  std::vector<Segment> segments;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 3) {
      throw ParseError(source, line_no, "expected 'class_id start_frame end_frame'");
    }
    Segment s;
    if (!parse_int(tokens[0], s.label) || !parse_int(tokens[1], s.start) ||
        !parse_int(tokens[2], s.end)) {
      throw ParseError(source, line_no, "non-numeric field");
    }
    if (s.end <= s.start) throw ParseError(source, line_no, "end_frame must exceed start_frame");
    segments.push_back(s);
  }
  return segments;
}

std::vector<Segment> load_sidecar(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_sidecar(in, path.string());
}

void write_sidecar(std::ostream& out, const std::vector<Segment>& segments) {
  for (const auto& s : segments) out << s.label << ' ' << s.start << ' ' << s.end << '\n';
}

std::set<std::string> parse_allowlist(std::istream& in) {
  std::set<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto tokens = split_ws(line);
    if (!tokens.empty()) names.emplace(tokens.front());
  }
  return names;
}

std::set<std::string> load_allowlist(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_allowlist(in);
}

Dataset load_dataset(const std::filesystem::path& dir, const SkeletonDescriptor& descriptor,
                     const std::optional<std::filesystem::path>& allowlist) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("dataset directory not found: " + dir.string());

  Dataset dataset;
  std::optional<std::set<std::string>> allowed;
  const fs::path default_list = dir / "allowlist.txt";
  if (allowlist) {
    allowed = load_allowlist(*allowlist);
  } else if (fs::exists(default_list)) {
    allowed = load_allowlist(default_list);
  }
  dataset.allowlist_applied = allowed.has_value();

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    if (entry.path().filename() == "allowlist.txt") continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  for (const auto& file : files) {
    const auto name = file.filename().string();
    if (allowed && !allowed->contains(name)) {
      dataset.skipped.push_back(name + " (not in allowlist)");
      continue;
    }
    auto instance = load_msr_skeleton(file, descriptor);
    const auto stats = clean_instance(instance);
    dataset.dropped_frames += stats.dropped_frames;
    if (instance.frames.empty()) {
      dataset.skipped.push_back(name + " (no usable frames)");
      continue;
    }
    dataset.instances.push_back(std::move(instance));
  }
  if (dataset.instances.empty()) throw DataError("no usable skeleton files in " + dir.string());
  return dataset;
}

StreamExport merge_into_stream(const std::vector<GestureInstance>& instances, std::size_t gap) {
  StreamExport out;
  auto hold = [&](const SkeletonFrame pose) {
    for (std::size_t k = 0; k < gap; ++k) {
      SkeletonFrame f = pose;
      f.index = out.frames.size();
      out.frames.push_back(std::move(f));
    }
  };
  for (const auto& instance : instances) {
    if (instance.frames.empty()) continue;
    hold(out.frames.empty() ? instance.frames.front() : out.frames.back());
    Segment segment{instance.label, out.frames.size(), 0};
    for (const auto& frame : instance.frames) {
      SkeletonFrame f = frame;
      f.index = out.frames.size();
      out.frames.push_back(std::move(f));
    }
    segment.end = out.frames.size();
    out.truth.push_back(segment);
  }
  if (!out.frames.empty()) hold(out.frames.back());
  return out;
}

}  // namespace msdhmm
