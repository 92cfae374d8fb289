#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "msdhmm/skeleton.hpp"

namespace msdhmm {

enum class SplitKind { FractionOneThird, FractionTwoThirds, CrossSubject, LeaveOneSequenceOut };

struct SplitSpec {
  SplitKind kind = SplitKind::CrossSubject;
  std::vector<int> train_subjects{1, 3, 5, 7, 9};

  static SplitSpec parse(std::string_view text);
  std::string describe() const;
};

// Indices into the instance list handed to make_split.
struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Fraction splits are stratified per class and shuffled deterministically
// from `seed`; cross-subject yields one fold; leave-one-sequence-out yields
// one fold per instance.
std::vector<Fold> make_split(const std::vector<GestureInstance>& instances, const SplitSpec& spec,
                             std::uint64_t seed);

}  // namespace msdhmm
