#include <algorithm>
#include <cmath>
#include <limits>

#include "msdhmm/error.hpp"
#include "msdhmm/msd_hmm.hpp"

namespace msdhmm {

namespace {

void validate_training_set(const std::vector<SymbolSequence>& sequences, std::size_t streams,
                           int levels) {
  if (sequences.empty()) throw DataError("train: no training sequences");
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    if (sequences[s].empty()) {
      throw DataError("train: sequence " + std::to_string(s) + " is empty");
    }
    for (const auto& obs : sequences[s]) {
      if (obs.size() != streams) {
        throw DataError("train: sequence " + std::to_string(s) + " has wrong stream count");
      }
      for (Symbol sym : obs) {
        if (sym >= levels) {
          throw DataError("train: symbol " + std::to_string(sym) + " out of range in sequence " +
                          std::to_string(s));
        }
      }
    }
  }
}

// Scaled forward/backward quantities of one sequence.
struct SequencePass {
  std::vector<double> alpha;     // T x N, normalized per step
  std::vector<double> beta;      // T x N, scaled by the forward scales
  std::vector<double> emission;  // T x N, exp(log b - max_j log b)
  std::vector<double> scale;     // c_t for the shifted emissions
  double log_likelihood = 0.0;
};

SequencePass forward_backward(const MsdHmm& model, const SymbolSequence& seq) {
  const std::size_t n = model.states();
  const std::size_t t_len = seq.size();
  const auto jump = static_cast<std::size_t>(model.max_jump());
  SequencePass pass;
  pass.alpha.assign(t_len * n, 0.0);
  pass.beta.assign(t_len * n, 0.0);
  pass.emission.assign(t_len * n, 0.0);
  pass.scale.assign(t_len, 0.0);

  std::vector<double> log_b(n);
  for (std::size_t t = 0; t < t_len; ++t) {
    model.emission_log_probs(seq[t], log_b);
    const double shift = *std::max_element(log_b.begin(), log_b.end());
    double* e = pass.emission.data() + t * n;
    double* a = pass.alpha.data() + t * n;
    double c = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      e[j] = std::isinf(log_b[j]) ? 0.0 : std::exp(log_b[j] - shift);
      double predicted = 0.0;
      if (t == 0) {
        predicted = model.initial(j);
      } else {
        const double* prev = pass.alpha.data() + (t - 1) * n;
        for (std::size_t i = (j > jump ? j - jump : 0); i <= j; ++i) {
          predicted += prev[i] * model.transition(i, j);
        }
      }
      a[j] = predicted * e[j];
      c += a[j];
    }
    if (!(c > 0.0) || std::isinf(shift)) {
      pass.log_likelihood = -std::numeric_limits<double>::infinity();
      return pass;
    }
    for (std::size_t j = 0; j < n; ++j) a[j] /= c;
    pass.scale[t] = c;
    pass.log_likelihood += std::log(c) + shift;
  }

  std::fill(pass.beta.begin() + (t_len - 1) * n, pass.beta.end(), 1.0);
  for (std::size_t t = t_len - 1; t-- > 0;) {
    const double* next_beta = pass.beta.data() + (t + 1) * n;
    const double* next_e = pass.emission.data() + (t + 1) * n;
    double* b = pass.beta.data() + t * n;
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      const std::size_t last = std::min(n - 1, i + jump);
      for (std::size_t j = i; j <= last; ++j) sum += model.transition(i, j) * next_e[j] * next_beta[j];
      b[i] = sum / pass.scale[t + 1];
    }
  }
  return pass;
}

}  // namespace

MsdHmm initial_model(const std::vector<SymbolSequence>& sequences, std::size_t streams,
                     const TrainOptions& options) {
  validate_training_set(sequences, streams, options.levels);
  MsdHmm model(options.states, streams, options.levels, options.max_jump);
  const std::size_t n = options.states;
  const auto levels = static_cast<std::size_t>(options.levels);

  std::vector<double> counts(n * streams * levels, 0.0);
  for (const auto& seq : sequences) {
    const std::size_t t_len = seq.size();
    for (std::size_t t = 0; t < t_len; ++t) {
      const std::size_t state = t * n / t_len;
      for (std::size_t d = 0; d < streams; ++d) counts[(state * streams + d) * levels + seq[t][d]] += 1.0;
    }
  }
  for (std::size_t k = 0; k < n * streams; ++k) {
    double* h = counts.data() + k * levels;
    double total = 0.0;
    for (std::size_t l = 0; l < levels; ++l) total += h[l];
    for (std::size_t l = 0; l < levels; ++l) h[l] = total > 0.0 ? h[l] / total : 1.0 / levels;
  }
  model.set_emissions(std::move(counts));
  if (!options.weights.empty()) model.set_weights(options.weights);
  model.smooth(options.smoothing);
  return model;
}

double baum_welch_iteration(MsdHmm& model, const std::vector<SymbolSequence>& sequences) {
  const std::size_t n = model.states();
  const std::size_t streams = model.streams();
  const auto levels = static_cast<std::size_t>(model.levels());
  const auto jump = static_cast<std::size_t>(model.max_jump());

  std::vector<double> initial_acc(n, 0.0);
  std::vector<double> transition_acc(n * n, 0.0);
  std::vector<double> emission_acc(n * streams * levels, 0.0);
  std::vector<double> occupancy(n, 0.0);
  double total = 0.0;

  for (const auto& seq : sequences) {
    const auto pass = forward_backward(model, seq);
    total += pass.log_likelihood;
    if (!std::isfinite(pass.log_likelihood)) continue;
    const std::size_t t_len = seq.size();
    for (std::size_t t = 0; t < t_len; ++t) {
      const double* a = pass.alpha.data() + t * n;
      const double* b = pass.beta.data() + t * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double gamma = a[j] * b[j];
        if (gamma == 0.0) continue;
        if (t == 0) initial_acc[j] += gamma;
        occupancy[j] += gamma;
        for (std::size_t d = 0; d < streams; ++d) {
          emission_acc[(j * streams + d) * levels + seq[t][d]] += gamma;
        }
      }
      if (t + 1 == t_len) continue;
      const double* next_e = pass.emission.data() + (t + 1) * n;
      const double* next_b = pass.beta.data() + (t + 1) * n;
      const double inv_c = 1.0 / pass.scale[t + 1];
      for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == 0.0) continue;
        const std::size_t last = std::min(n - 1, i + jump);
        for (std::size_t j = i; j <= last; ++j) {
          transition_acc[i * n + j] += a[i] * model.transition(i, j) * next_e[j] * next_b[j] * inv_c;
        }
      }
    }
  }

  double initial_total = 0.0;
  for (double v : initial_acc) initial_total += v;
  if (initial_total > 0.0) {
    for (double& v : initial_acc) v /= initial_total;
    model.set_initial(std::move(initial_acc));
  }

  std::vector<double> transitions = model.transitions();
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += transition_acc[i * n + j];
    if (row <= 0.0) continue;  // state never left before a sequence ended
    for (std::size_t j = 0; j < n; ++j) transitions[i * n + j] = transition_acc[i * n + j] / row;
  }
  model.set_transitions(std::move(transitions));

  std::vector<double> emissions = model.emissions();
  for (std::size_t j = 0; j < n; ++j) {
    if (occupancy[j] <= 0.0) continue;
    for (std::size_t d = 0; d < streams; ++d) {
      const std::size_t base = (j * streams + d) * levels;
      double row = 0.0;
      for (std::size_t l = 0; l < levels; ++l) row += emission_acc[base + l];
      for (std::size_t l = 0; l < levels; ++l) emissions[base + l] = emission_acc[base + l] / row;
    }
  }
  model.set_emissions(std::move(emissions));
  return total;
}

TrainResult train(const std::vector<SymbolSequence>& sequences, std::size_t streams,
                  const TrainOptions& options) {
  TrainResult result{initial_model(sequences, streams, options), {}, false};
  double previous = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < options.max_iterations; ++it) {
    const double ll = baum_welch_iteration(result.model, sequences);
    result.log_likelihood_trace.push_back(ll);
    if (it > 0 && std::isfinite(previous) && ll - previous <= options.tolerance * std::abs(previous)) {
      result.converged = true;
      break;
    }
    previous = ll;
  }
  result.model.smooth(options.smoothing);
  result.model.check_invariants();
  return result;
}

}  // namespace msdhmm
