#include <gtest/gtest.h>

#include <sstream>

#include "msdhmm/config.hpp"
#include "msdhmm/error.hpp"

using namespace msdhmm;

TEST(Config, DefaultsFollowPublishedOperatingPoint) {
  std::istringstream in("");
  const auto cfg = parse_config(in);
  EXPECT_EQ(cfg.pipeline.hmm.states, 8u);
  EXPECT_EQ(cfg.pipeline.hmm.levels, 10);
  EXPECT_EQ(cfg.segmenter.threshold, 0.9);
  EXPECT_EQ(cfg.sigma, 0.5);
}

TEST(Config, ParsesKnownKeys) {
  std::istringstream in(
      "# comment\n"
      "N = 6\nL=12\nth = 0.8\nv = 0.6\nsigma = 0.4\nsplit = 2/3\n"
      "weighted_streams = false\ngroup.3 = LP\nname.3 = kick\n"
      "train_subjects = 2,4\nglobal_joints = head, hand_left\n");
  const auto cfg = parse_config(in);
  EXPECT_EQ(cfg.pipeline.hmm.states, 6u);
  EXPECT_EQ(cfg.pipeline.hmm.levels, 12);
  EXPECT_EQ(cfg.segmenter.threshold, 0.8);
  EXPECT_EQ(cfg.segmenter.vote_fraction, 0.6);
  EXPECT_EQ(cfg.sigma, 0.4);
  EXPECT_EQ(cfg.split.kind, SplitKind::FractionTwoThirds);
  EXPECT_FALSE(cfg.pipeline.weighted_streams);
  EXPECT_EQ(cfg.pipeline.overrides.at(3), GestureGroup::LP);
  EXPECT_EQ(cfg.pipeline.class_names.at(3), "kick");
  EXPECT_EQ(cfg.split.train_subjects, (std::vector<int>{2, 4}));
  EXPECT_EQ(cfg.pipeline.global_joints.size(), 2u);
}

TEST(Config, UnknownKeyFailsWithLine) {
  std::istringstream in("N = 8\nstates = 8\n");
  try {
    parse_config(in, "run.cfg");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("states"), std::string::npos);
  }
}

TEST(Config, BadValuesFail) {
  std::istringstream a("N = eight\n");
  EXPECT_THROW(parse_config(a), DataError);
  std::istringstream b("weighted_streams = maybe\n");
  EXPECT_THROW(parse_config(b), DataError);
  std::istringstream c("group.1 = XX\n");
  EXPECT_THROW(parse_config(c), DataError);
  std::istringstream d("no equals sign\n");
  EXPECT_THROW(parse_config(d), ParseError);
}

TEST(Config, CanonicalTextParsesBack) {
  std::istringstream in("N = 5\nth = 0.75\ngroup.2 = RUP\n");
  const auto cfg = parse_config(in);
  std::istringstream again(cfg.to_text());
  EXPECT_EQ(parse_config(again).to_text(), cfg.to_text());
}
