#include "msdhmm/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "msdhmm/error.hpp"

namespace msdhmm {

SplitSpec SplitSpec::parse(std::string_view text) {
  SplitSpec spec;
  if (text == "1/3" || text == "fraction-1/3") {
    spec.kind = SplitKind::FractionOneThird;
  } else if (text == "2/3" || text == "fraction-2/3") {
    spec.kind = SplitKind::FractionTwoThirds;
  } else if (text == "cross" || text == "cross-subject") {
    spec.kind = SplitKind::CrossSubject;
  } else if (text == "loso" || text == "leave-one-sequence-out") {
    spec.kind = SplitKind::LeaveOneSequenceOut;
  } else {
    throw DataError("unknown split '" + std::string(text) + "'");
  }
  return spec;
}

std::string SplitSpec::describe() const {
  switch (kind) {
    case SplitKind::FractionOneThird:
      return "fraction-1/3";
    case SplitKind::FractionTwoThirds:
      return "fraction-2/3";
    case SplitKind::LeaveOneSequenceOut:
      return "leave-one-sequence-out";
    case SplitKind::CrossSubject:
      break;
  }
  std::ostringstream out;
  out << "cross-subject(train=";
  for (std::size_t i = 0; i < train_subjects.size(); ++i) {
    out << (i ? "," : "") << train_subjects[i];
  }
  out << ")";
  return out.str();
}

namespace {

std::vector<Fold> fraction_split(const std::vector<GestureInstance>& instances, double fraction,
                                 std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < instances.size(); ++i) by_class[instances[i].label].push_back(i);

  std::mt19937_64 engine(seed);
  Fold fold;
  std::vector<int> too_small;
  for (auto& [label, members] : by_class) {
    const std::size_t n = members.size();
    const auto train_count = static_cast<std::size_t>(std::lround(static_cast<double>(n) * fraction));
    if (train_count < 1 || train_count >= n) {
      too_small.push_back(label);
      continue;
    }
    // Fisher-Yates with raw engine output, identical on every standard library.
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(members[i], members[engine() % (i + 1)]);
    }
    fold.train.insert(fold.train.end(), members.begin(), members.begin() + train_count);
    fold.test.insert(fold.test.end(), members.begin() + train_count, members.end());
  }
  if (!too_small.empty()) {
    std::ostringstream msg;
    msg << "classes with too few instances for the split:";
    for (int label : too_small) msg << ' ' << label;
    throw DataError(msg.str());
  }
  std::sort(fold.train.begin(), fold.train.end());
  std::sort(fold.test.begin(), fold.test.end());
  return {fold};
}

}  // namespace

std::vector<Fold> make_split(const std::vector<GestureInstance>& instances, const SplitSpec& spec,
                             std::uint64_t seed) {
  if (instances.empty()) throw DataError("cannot split an empty instance list");
  switch (spec.kind) {
    case SplitKind::FractionOneThird:
      return fraction_split(instances, 1.0 / 3.0, seed);
    case SplitKind::FractionTwoThirds:
      return fraction_split(instances, 2.0 / 3.0, seed);
    case SplitKind::CrossSubject: {
      const std::set<int> train_subjects(spec.train_subjects.begin(), spec.train_subjects.end());
      Fold fold;
      for (std::size_t i = 0; i < instances.size(); ++i) {
        if (instances[i].subject <= 0) {
          throw DataError("cross-subject split needs subject ids; missing for " +
                          (instances[i].source.empty() ? "instance " + std::to_string(i)
                                                       : instances[i].source));
        }
        (train_subjects.contains(instances[i].subject) ? fold.train : fold.test).push_back(i);
      }
      if (fold.train.empty() || fold.test.empty()) {
        throw DataError("cross-subject split leaves the train or test side empty");
      }
      return {fold};
    }
    case SplitKind::LeaveOneSequenceOut: {
      if (instances.size() < 2) throw DataError("leave-one-sequence-out needs two instances");
      std::vector<Fold> folds(instances.size());
      for (std::size_t i = 0; i < instances.size(); ++i) {
        folds[i].test = {i};
        folds[i].train.reserve(instances.size() - 1);
        for (std::size_t k = 0; k < instances.size(); ++k) {
          if (k != i) folds[i].train.push_back(k);
        }
      }
      return folds;
    }
  }
  throw InvariantError("unhandled split kind");
}

}  // namespace msdhmm
