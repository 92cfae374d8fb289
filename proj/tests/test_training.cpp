#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "msdhmm/error.hpp"
#include "msdhmm/msd_hmm.hpp"
#include "support/oracles.hpp"

using namespace msdhmm;

namespace {

void expect_stochastic(const MsdHmm& m, double tol) {
  double pi = 0.0;
  for (double p : m.initial()) pi += p;
  EXPECT_NEAR(pi, 1.0, tol);
  for (std::size_t i = 0; i < m.states(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m.states(); ++j) row += m.transition(i, j);
    EXPECT_NEAR(row, 1.0, tol);
    for (std::size_t d = 0; d < m.streams(); ++d) {
      double h = 0.0;
      for (int l = 0; l < m.levels(); ++l) h += m.emission(i, d, static_cast<Symbol>(l));
      EXPECT_NEAR(h, 1.0, tol);
    }
  }
}

std::vector<SymbolSequence> random_set(std::size_t count, std::size_t streams, int levels,
                                       std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> len(3, 25);
  std::vector<SymbolSequence> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(oracle::random_sequence(len(rng), streams, levels, rng));
  return out;
}

}  // namespace

TEST(Training, EveryIterationKeepsDistributionsAndZeroPattern) {
  std::mt19937_64 rng(1);
  const auto data = random_set(6, 3, 5, rng);
  TrainOptions opt;
  opt.states = 5;
  opt.levels = 5;
  opt.max_jump = 2;
  auto m = initial_model(data, 3, opt);
  for (int it = 0; it < 10; ++it) {
    baum_welch_iteration(m, data);
    expect_stochastic(m, 1e-12);
    for (std::size_t i = 0; i < m.states(); ++i)
      for (std::size_t j = 0; j < m.states(); ++j)
        if (!m.transition_allowed(i, j)) EXPECT_EQ(m.transition(i, j), 0.0);
    EXPECT_EQ(m.initial(0), 1.0);
  }
}

TEST(Training, RepeatedSequenceLikelihoodNeverDrops) {
  std::mt19937_64 rng(2);
  const auto seq = oracle::random_sequence(30, 2, 4, rng);
  const std::vector<SymbolSequence> data(4, seq);
  TrainOptions opt;
  opt.states = 4;
  opt.levels = 4;
  auto m = initial_model(data, 2, opt);
  double prev = -INFINITY;
  for (int it = 0; it < 20; ++it) {
    const double ll = baum_welch_iteration(m, data);
    EXPECT_GE(ll, prev - 1e-8) << "iteration " << it;
    prev = ll;
  }
}

TEST(Training, TraceIsMonotoneAndStopsOnTolerance) {
  std::mt19937_64 rng(3);
  const auto data = random_set(8, 2, 4, rng);
  TrainOptions opt;
  opt.states = 3;
  opt.levels = 4;
  opt.max_iterations = 200;
  opt.tolerance = 1e-6;
  const auto r = train(data, 2, opt);
  ASSERT_FALSE(r.log_likelihood_trace.empty());
  for (std::size_t k = 1; k < r.log_likelihood_trace.size(); ++k)
    EXPECT_GE(r.log_likelihood_trace[k], r.log_likelihood_trace[k - 1] - 1e-8);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.log_likelihood_trace.size(), 200u);
}

TEST(Training, SmoothingFloorsEveryEmission) {
  std::mt19937_64 rng(4);
  const auto data = random_set(3, 2, 10, rng);  // most symbols never seen per state
  TrainOptions opt;
  opt.states = 8;
  opt.levels = 10;
  opt.smoothing = 1e-3;
  const auto m = train(data, 2, opt).model;
  const double floor = opt.smoothing / (1.0 + opt.smoothing * opt.levels);
  for (double h : m.emissions()) EXPECT_GE(h, floor * (1.0 - 1e-12));
  expect_stochastic(m, 1e-12);
}

TEST(Training, InitialModelSegmentsTimeUniformly) {
  // Two states, one stream; first half symbol 0, second half symbol 1.
  const SymbolSequence seq{{0}, {0}, {0}, {1}, {1}, {1}};
  TrainOptions opt;
  opt.states = 2;
  opt.levels = 2;
  opt.smoothing = 0.0;
  const auto m = initial_model({seq}, 1, opt);
  EXPECT_EQ(m.emission(0, 0, 0), 1.0);
  EXPECT_EQ(m.emission(1, 0, 1), 1.0);
  EXPECT_EQ(m.transition(0, 0), 0.5);
}

TEST(Training, RejectsBadInput) {
  TrainOptions opt;
  opt.states = 2;
  opt.levels = 3;
  EXPECT_THROW(train({}, 1, opt), DataError);
  EXPECT_THROW(train({SymbolSequence{}}, 1, opt), DataError);
  EXPECT_THROW(train({SymbolSequence{{7}}}, 1, opt), DataError);
}

TEST(Training, Deterministic) {
  std::mt19937_64 rng(5);
  const auto data = random_set(5, 3, 6, rng);
  TrainOptions opt;
  opt.states = 4;
  opt.levels = 6;
  EXPECT_EQ(train(data, 3, opt).model.serialize(), train(data, 3, opt).model.serialize());
}
