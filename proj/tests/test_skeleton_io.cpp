#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "msdhmm/error.hpp"
#include "msdhmm/skeleton_io.hpp"
#include "msdhmm/synthetic.hpp"
#include "support/fixtures.hpp"

using namespace msdhmm;
using testing_support::TempDir;

namespace {

std::string msr_text(std::size_t frames, std::size_t joints = 20) {
  std::ostringstream out;
  for (std::size_t f = 0; f < frames; ++f)
    for (std::size_t j = 0; j < joints; ++j)
      out << 0.1 * static_cast<double>(j + 1) << ' ' << 0.2 + 0.01 * static_cast<double>(f) << " 2.5 1\n";
  return out.str();
}

}  // namespace

TEST(MsrSkeleton, ParsesFramesOfTwentyJoints) {
  std::istringstream in(msr_text(2));
  const auto g = parse_msr_skeleton(in, "mem", SkeletonDescriptor::msr_action3d());
  ASSERT_EQ(g.frames.size(), 2u);
  for (const auto& f : g.frames) {
    EXPECT_EQ(f.joints.size(), 20u);
    EXPECT_EQ(f.invalid_count(), 0u);
  }
  EXPECT_EQ(g.frames[1].index, 1u);
}

TEST(MsrSkeleton, AcceptsHeaderLine) {
  std::istringstream in("2 20\n" + msr_text(2));
  EXPECT_EQ(parse_msr_skeleton(in, "mem", SkeletonDescriptor::msr_action3d()).frames.size(), 2u);
}

TEST(MsrSkeleton, NullJointIsFlaggedInvalid) {
  std::string text = msr_text(1);
  std::istringstream lines(text);
  std::ostringstream patched;
  std::string line;
  for (int k = 0; std::getline(lines, line); ++k) patched << (k == 5 ? "0 0 0 0" : line) << '\n';
  std::istringstream in(patched.str());
  const auto g = parse_msr_skeleton(in, "mem", SkeletonDescriptor::msr_action3d());
  EXPECT_FALSE(g.frames[0].valid[5]);
  EXPECT_TRUE(g.frames[0].valid[4]);
  EXPECT_EQ(g.frames[0].joints[5].x, 0.0);  // left untouched
}

TEST(MsrSkeleton, LineCountNotMultipleOfJointsReportsLine) {
  std::string text = msr_text(2);
  text += "1 2 3 4\n";
  std::istringstream in(text);
  try {
    parse_msr_skeleton(in, "mem", SkeletonDescriptor::msr_action3d());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 41u);
  }
}

TEST(MsrSkeleton, NonNumericTokenReportsLine) {
  std::string text = msr_text(1);
  text.replace(text.find("2.5", text.find('\n') + 1), 3, "abc");
  std::istringstream in(text);
  try {
    parse_msr_skeleton(in, "mem", SkeletonDescriptor::msr_action3d());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("abc"), std::string::npos);
  }
}

TEST(MsrSkeleton, FileNameCarriesLabelSubjectEpisode) {
  TempDir dir;
  const auto path = dir / "a07_s03_e02_skeleton3D.txt";
  std::ofstream(path) << msr_text(3);
  const auto g = load_msr_skeleton(path, SkeletonDescriptor::msr_action3d());
  EXPECT_EQ(g.label, 7);
  EXPECT_EQ(g.subject, 3);
  EXPECT_EQ(g.episode, 2);
}

TEST(MsrSkeleton, WriteThenLoadRoundTrips) {
  const auto d = SkeletonDescriptor::msr_action3d();
  SyntheticOptions opt;
  const auto g = synthetic_gesture(3, 2, 1, d, opt);
  TempDir dir;
  const auto path = dir / msr_file_name(g);
  save_msr_skeleton(path, g);
  const auto back = load_msr_skeleton(path, d);
  ASSERT_EQ(back.frames.size(), g.frames.size());
  EXPECT_EQ(back.label, 3);
  EXPECT_EQ(back.subject, 2);
  for (std::size_t t = 0; t < g.frames.size(); ++t)
    for (std::size_t j = 0; j < d.joint_count(); ++j) {
      EXPECT_EQ(back.frames[t].joints[j].x, g.frames[t].joints[j].x);
      EXPECT_EQ(back.frames[t].joints[j].z, g.frames[t].joints[j].z);
    }
}

// Checked against a plain line count of the published file when the
// dataset is available locally.
TEST(MsrSkeleton, PublishedFileFrameCount) {
  const char* root = std::getenv("MSR_ACTION3D_DIR");
  if (!root) GTEST_SKIP() << "MSR_ACTION3D_DIR not set";
  const std::filesystem::path path = std::filesystem::path(root) / "a01_s01_e01_skeleton3D.txt";
  if (!std::filesystem::exists(path)) GTEST_SKIP() << path << " missing";
  std::ifstream in(path);
  std::string line;
  std::size_t data_lines = 0;
  bool first = true;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    int n = 0;
    while (ls >> tok) ++n;
    if (n == 0) continue;
    if (first && n != 4) {
      first = false;
      continue;
    }
    first = false;
    ++data_lines;
  }
  const auto g = load_msr_skeleton(path, SkeletonDescriptor::msr_action3d());
  EXPECT_EQ(g.frames.size(), data_lines / 20);
}

TEST(Clean, DropsMostlyInvalidFramesAndHoldsLastValid) {
  std::mt19937_64 rng(3);
  GestureInstance g;
  for (int t = 0; t < 4; ++t) {
    auto f = testing_support::random_frame(20, rng);
    f.index = static_cast<std::size_t>(t);
    g.frames.push_back(f);
  }
  for (std::size_t j = 0; j < 11; ++j) g.frames[1].valid[j] = false;  // > 50 %
  g.frames[2].valid[4] = false;
  const Joint3D held = g.frames[0].joints[4];
  const auto stats = clean_instance(g);
  EXPECT_EQ(stats.dropped_frames, 1u);
  ASSERT_EQ(g.frames.size(), 3u);
  EXPECT_TRUE(g.frames[1].valid[4]);
  EXPECT_EQ(g.frames[1].joints[4].x, held.x);
  EXPECT_EQ(g.frames[1].joints[4].y, held.y);
}

TEST(Stream, EmptyFileGivesNoFrames) {
  std::istringstream in("");
  EXPECT_TRUE(parse_stream(in, "mem").empty());
}

TEST(Stream, RoundTripIsByteIdentical) {
  std::mt19937_64 rng(11);
  std::vector<SkeletonFrame> frames;
  for (std::size_t t = 0; t < 7; ++t) {
    auto f = testing_support::random_frame(20, rng);
    f.index = 3 * t;
    frames.push_back(f);
  }
  std::ostringstream first;
  write_stream(first, frames);
  std::istringstream in(first.str());
  const auto back = parse_stream(in, "mem", 20);
  std::ostringstream second;
  write_stream(second, back);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(back[2].index, 6u);
}

TEST(Stream, ConcatenationKeepsAllFrames) {
  const auto d = SkeletonDescriptor::msr_action3d();
  SyntheticOptions opt;
  const auto a = synthetic_gesture(1, 1, 1, d, opt);
  const auto b = synthetic_gesture(2, 1, 1, d, opt);
  const auto merged = merge_into_stream({a, b}, 0);
  EXPECT_EQ(merged.frames.size(), a.frames.size() + b.frames.size());
  TempDir dir;
  save_stream(dir / "s.txt", merged.frames);
  EXPECT_EQ(load_stream(dir / "s.txt").size(), merged.frames.size());
}

TEST(Stream, SchemaMismatchNamesField) {
  std::istringstream bad_index("x 1 2 3\n");
  EXPECT_THROW(
      {
        try {
          parse_stream(bad_index, "mem");
        } catch (const ParseError& e) {
          EXPECT_NE(std::string(e.what()).find("index"), std::string::npos);
          throw;
        }
      },
      ParseError);
  std::istringstream bad_coord("0 1 2 3 4 q 6\n");
  try {
    parse_stream(bad_coord, "mem");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("joint 1 y"), std::string::npos);
  }
  std::istringstream short_row("0 1 2\n");
  EXPECT_THROW(parse_stream(short_row, "mem"), ParseError);
}

TEST(Stream, SidecarIntervalsLieInsideStream) {
  const auto d = SkeletonDescriptor::msr_action3d();
  SyntheticOptions opt;
  opt.classes = 3;
  opt.subjects = 1;
  opt.episodes = 1;
  const auto merged = merge_into_stream(synthetic_dataset(d, opt), 30);
  ASSERT_EQ(merged.truth.size(), 3u);
  for (const auto& s : merged.truth) {
    EXPECT_LT(s.start, s.end);
    EXPECT_LE(s.end, merged.frames.size());
  }
  std::ostringstream out;
  write_sidecar(out, merged.truth);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_sidecar(in, "mem"), merged.truth);
}

TEST(Dataset, AllowlistRestrictsFiles) {
  const auto d = SkeletonDescriptor::msr_action3d();
  SyntheticOptions opt;
  opt.classes = 2;
  opt.subjects = 2;
  opt.episodes = 1;
  TempDir dir;
  for (const auto& g : synthetic_dataset(d, opt)) save_msr_skeleton(dir / msr_file_name(g), g);
  std::ofstream(dir / "allowlist.txt") << "# valid files\na01_s01_e01_skeleton3D.txt\na02_s02_e01_skeleton3D.txt\n";
  const auto ds = load_dataset(dir.path(), d);
  EXPECT_TRUE(ds.allowlist_applied);
  EXPECT_EQ(ds.instances.size(), 2u);

  std::filesystem::remove(dir / "allowlist.txt");
  const auto all = load_dataset(dir.path(), d);
  EXPECT_FALSE(all.allowlist_applied);
  EXPECT_EQ(all.instances.size(), 4u);
}
