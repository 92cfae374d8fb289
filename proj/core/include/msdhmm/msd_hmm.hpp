#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msdhmm/features.hpp"

namespace msdhmm {

// Discrete left-right HMM whose observation is a vector of D symbols, one
// per stream. Streams are independent given the state and each contributes
// its emission probability raised to a per-stream weight:
//
//   b_j(o) = prod_d h_j^d(o^d)^w_d
//
// Transitions are restricted to i -> i .. i + max_jump.
class MsdHmm {
 public:
  // Left-right model with uniform allowed transitions, all initial mass on
  // state 0, uniform emissions and unit stream weights.
  MsdHmm(std::size_t states, std::size_t streams, int levels, int max_jump = 1);

  // Validates every invariant; throws InvariantError on violation.
  MsdHmm(std::vector<double> initial, std::vector<double> transitions,
         std::vector<double> emissions, std::vector<double> weights, std::size_t streams,
         int levels, int max_jump);

  std::size_t states() const noexcept { return states_; }
  std::size_t streams() const noexcept { return streams_; }
  int levels() const noexcept { return levels_; }
  int max_jump() const noexcept { return max_jump_; }

  const std::vector<double>& initial() const noexcept { return initial_; }
  const std::vector<double>& transitions() const noexcept { return transitions_; }
  const std::vector<double>& emissions() const noexcept { return emissions_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  double initial(std::size_t i) const { return initial_[i]; }
  double transition(std::size_t from, std::size_t to) const {
    return transitions_[from * states_ + to];
  }
  double emission(std::size_t state, std::size_t stream, Symbol symbol) const {
    return emissions_[emission_offset(state, stream) + symbol];
  }
  bool transition_allowed(std::size_t from, std::size_t to) const noexcept {
    return to >= from && to <= from + static_cast<std::size_t>(max_jump_);
  }

  void set_weights(std::vector<double> weights);
  void set_initial(std::vector<double> initial);
  void set_transitions(std::vector<double> transitions);
  void set_emissions(std::vector<double> emissions);

  // Mixes every emission table and every allowed transition row with the
  // uniform distribution: p' = (p + eps) / (1 + eps * K), K the support size.
  void smooth(double eps);

  // sum_d w_d * log h_state^d(symbols[d])
  double emission_log_prob(std::size_t state, std::span<const Symbol> symbols) const;
  void emission_log_probs(std::span<const Symbol> symbols, std::span<double> out) const;

  // Throws InvariantError when a distribution does not sum to one within
  // `tolerance`, a forbidden transition is non-zero or a weight is negative.
  void check_invariants(double tolerance = 1e-9) const;

  std::string serialize() const;
  static MsdHmm deserialize(std::string_view text);

 private:
  std::size_t emission_offset(std::size_t state, std::size_t stream) const noexcept {
    return (state * streams_ + stream) * static_cast<std::size_t>(levels_);
  }
  void refresh_log_emissions();

  std::size_t states_;
  std::size_t streams_;
  int levels_;
  int max_jump_;
  std::vector<double> initial_;
  std::vector<double> transitions_;  // row-major states x states
  std::vector<double> emissions_;    // states x streams x levels
  std::vector<double> log_emissions_;
  std::vector<double> weights_;
};

// Incremental forward recursion. `posterior` is the scaled forward variable,
// i.e. P(q_t = j | o_1..o_t); `log_likelihood` accumulates log P(o_1..o_t).
struct ForwardState {
  std::vector<double> posterior;
  double log_likelihood = 0.0;
  std::size_t steps = 0;

  bool empty() const noexcept { return steps == 0; }
  void reset() noexcept {
    posterior.clear();
    log_likelihood = 0.0;
    steps = 0;
  }
};

struct ForwardTrellis {
  std::vector<std::vector<double>> posteriors;  // one normalized vector per step
  std::vector<double> log_scales;               // log P(o_t | o_1..o_{t-1})
  double log_likelihood = 0.0;
};

// Advances `state` by one observation and returns that step's log scale.
double forward_step(const MsdHmm& model, ForwardState& state, std::span<const Symbol> symbols);

ForwardTrellis forward(const MsdHmm& model, const SymbolSequence& sequence);

// log P(O | model) without keeping the trellis.
double log_likelihood(const MsdHmm& model, const SymbolSequence& sequence);

struct TrainOptions {
  std::size_t states = 8;
  int levels = 10;
  int max_jump = 1;
  int max_iterations = 30;
  double tolerance = 1e-6;   // stop when relative improvement drops below
  double smoothing = 1e-3;
  std::vector<double> weights;  // empty means unit weights
};

struct TrainResult {
  MsdHmm model;
  std::vector<double> log_likelihood_trace;  // total training log-likelihood per iteration
  bool converged = false;
};

// Left-right initialization: uniform allowed transitions, initial mass on
// state 0, emissions counted from a uniform time segmentation of every
// sequence across the states, then smoothed.
MsdHmm initial_model(const std::vector<SymbolSequence>& sequences, std::size_t streams,
                     const TrainOptions& options);

// One Baum-Welch re-estimation of pi, A and the per-stream emission tables
// (stream weights are left untouched). Returns the total log-likelihood of
// `sequences` under the model passed in.
double baum_welch_iteration(MsdHmm& model, const std::vector<SymbolSequence>& sequences);

// initial_model, then Baum-Welch until the iteration cap or convergence;
// smoothing is applied to the final estimate.
TrainResult train(const std::vector<SymbolSequence>& sequences, std::size_t streams,
                  const TrainOptions& options);

}  // namespace msdhmm
