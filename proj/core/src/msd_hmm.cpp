#include "msdhmm/msd_hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "json_codec.hpp"

#include "msdhmm/error.hpp"

namespace msdhmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kHmmFormatVersion = 1;

void require(bool condition, const std::string& what) {
  if (!condition) throw InvariantError("msd-hmm: " + what);
}

}  // namespace

MsdHmm::MsdHmm(std::size_t states, std::size_t streams, int levels, int max_jump)
    : states_(states), streams_(streams), levels_(levels), max_jump_(max_jump) {
  if (states == 0 || streams == 0 || levels < 2 || max_jump < 0) {
    throw DataError("msd-hmm: need states >= 1, streams >= 1, levels >= 2, max_jump >= 0");
  }
  initial_.assign(states_, 0.0);
  initial_[0] = 1.0;
  transitions_.assign(states_ * states_, 0.0);
  for (std::size_t i = 0; i < states_; ++i) {
    const std::size_t last = std::min(states_ - 1, i + static_cast<std::size_t>(max_jump_));
    const double p = 1.0 / static_cast<double>(last - i + 1);
    for (std::size_t j = i; j <= last; ++j) transitions_[i * states_ + j] = p;
  }
  emissions_.assign(states_ * streams_ * static_cast<std::size_t>(levels_), 1.0 / levels_);
  weights_.assign(streams_, 1.0);
  refresh_log_emissions();
}

MsdHmm::MsdHmm(std::vector<double> initial, std::vector<double> transitions,
               std::vector<double> emissions, std::vector<double> weights, std::size_t streams,
               int levels, int max_jump)
    : states_(initial.size()),
      streams_(streams),
      levels_(levels),
      max_jump_(max_jump),
      initial_(std::move(initial)),
      transitions_(std::move(transitions)),
      emissions_(std::move(emissions)),
      weights_(std::move(weights)) {
  require(states_ > 0 && streams_ > 0 && levels_ >= 2 && max_jump_ >= 0, "bad dimensions");
  require(transitions_.size() == states_ * states_, "transition matrix size");
  require(emissions_.size() == states_ * streams_ * static_cast<std::size_t>(levels_),
          "emission table size");
  require(weights_.size() == streams_, "weight count");
  check_invariants();
  refresh_log_emissions();
}

void MsdHmm::set_weights(std::vector<double> weights) {
  if (weights.size() != streams_) throw DataError("msd-hmm: weight count mismatch");
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DataError("msd-hmm: stream weights must be >= 0");
  }
  weights_ = std::move(weights);
  refresh_log_emissions();
}

void MsdHmm::set_initial(std::vector<double> initial) {
  require(initial.size() == states_, "initial size");
  initial_ = std::move(initial);
}

void MsdHmm::set_transitions(std::vector<double> transitions) {
  require(transitions.size() == states_ * states_, "transition matrix size");
  transitions_ = std::move(transitions);
}

void MsdHmm::set_emissions(std::vector<double> emissions) {
  require(emissions.size() == emissions_.size(), "emission table size");
  emissions_ = std::move(emissions);
  refresh_log_emissions();
}

void MsdHmm::refresh_log_emissions() {
  log_emissions_.resize(emissions_.size());
  const auto levels = static_cast<std::size_t>(levels_);
  for (std::size_t j = 0; j < states_; ++j) {
    for (std::size_t d = 0; d < streams_; ++d) {
      const std::size_t base = emission_offset(j, d);
      for (std::size_t l = 0; l < levels; ++l) {
        // Zero-weight streams contribute nothing, even for zero probabilities.
        log_emissions_[base + l] =
            weights_[d] == 0.0 ? 0.0 : weights_[d] * std::log(emissions_[base + l]);
      }
    }
  }
}

void MsdHmm::smooth(double eps) {
  if (eps <= 0.0) return;
  const auto levels = static_cast<std::size_t>(levels_);
  for (std::size_t k = 0; k < states_ * streams_; ++k) {
    double* h = emissions_.data() + k * levels;
    for (std::size_t l = 0; l < levels; ++l) h[l] = (h[l] + eps) / (1.0 + eps * levels);
  }
  for (std::size_t i = 0; i < states_; ++i) {
    std::size_t support = 0;
    for (std::size_t j = 0; j < states_; ++j) support += transition_allowed(i, j) ? 1 : 0;
    for (std::size_t j = 0; j < states_; ++j) {
      if (!transition_allowed(i, j)) continue;
      double& a = transitions_[i * states_ + j];
      a = (a + eps) / (1.0 + eps * static_cast<double>(support));
    }
  }
  refresh_log_emissions();
}

double MsdHmm::emission_log_prob(std::size_t state, std::span<const Symbol> symbols) const {
  if (state >= states_) throw DataError("msd-hmm: state out of range");
  if (symbols.size() != streams_) throw DataError("msd-hmm: observation has wrong stream count");
  const double* table = log_emissions_.data() + emission_offset(state, 0);
  const auto levels = static_cast<std::size_t>(levels_);
  double sum = 0.0;
  for (std::size_t d = 0; d < streams_; ++d) {
    if (symbols[d] >= levels) throw DataError("msd-hmm: symbol out of range");
    sum += table[d * levels + symbols[d]];
  }
  return sum;
}

void MsdHmm::emission_log_probs(std::span<const Symbol> symbols, std::span<double> out) const {
  if (symbols.size() != streams_) throw DataError("msd-hmm: observation has wrong stream count");
  const auto levels = static_cast<std::size_t>(levels_);
  for (Symbol s : symbols) {
    if (s >= levels) throw DataError("msd-hmm: symbol out of range");
  }
  for (std::size_t j = 0; j < states_; ++j) {
    const double* table = log_emissions_.data() + emission_offset(j, 0);
    double sum = 0.0;
    for (std::size_t d = 0; d < streams_; ++d) sum += table[d * levels + symbols[d]];
    out[j] = sum;
  }
}

void MsdHmm::check_invariants(double tolerance) const {
  auto sums_to_one = [&](const double* p, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (!(p[k] >= 0.0) || !std::isfinite(p[k])) return false;
      s += p[k];
    }
    return std::abs(s - 1.0) <= tolerance;
  };
  require(sums_to_one(initial_.data(), states_), "initial distribution does not sum to 1");
  for (std::size_t i = 1; i < states_; ++i) {
    require(initial_[i] == 0.0, "initial mass outside state 0");
  }
  for (std::size_t i = 0; i < states_; ++i) {
    require(sums_to_one(transitions_.data() + i * states_, states_),
            "transition row " + std::to_string(i) + " does not sum to 1");
    for (std::size_t j = 0; j < states_; ++j) {
      if (!transition_allowed(i, j)) {
        require(transitions_[i * states_ + j] == 0.0, "non-zero forbidden transition");
      }
    }
  }
  const auto levels = static_cast<std::size_t>(levels_);
  for (std::size_t k = 0; k < states_ * streams_; ++k) {
    require(sums_to_one(emissions_.data() + k * levels, levels),
            "emission table " + std::to_string(k) + " does not sum to 1");
  }
  for (double w : weights_) require(w >= 0.0 && std::isfinite(w), "negative stream weight");
}

std::string MsdHmm::serialize() const { return detail::hmm_to_json(*this).dump(); }

MsdHmm MsdHmm::deserialize(std::string_view text) {
  try {
    return detail::hmm_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed msd-hmm document: ") + e.what());
  }
}

nlohmann::json detail::hmm_to_json(const MsdHmm& model) {
  using nlohmann::json;
  const std::size_t states_ = model.states();
  const std::size_t streams_ = model.streams();
  const int levels_ = model.levels();
  const auto& transitions_ = model.transitions();
  const auto& emissions_ = model.emissions();
  json doc;
  doc["format"] = "msd-hmm";
  doc["version"] = kHmmFormatVersion;
  doc["states"] = states_;
  doc["streams"] = streams_;
  doc["levels"] = levels_;
  doc["topology"] = {{"kind", "left-right"}, {"max_jump", model.max_jump()}};
  doc["initial"] = model.initial();
  json rows = json::array();
  for (std::size_t i = 0; i < states_; ++i) {
    rows.push_back(std::vector<double>(transitions_.begin() + i * states_,
                                       transitions_.begin() + (i + 1) * states_));
  }
  doc["transitions"] = std::move(rows);
  json emissions = json::array();
  const auto levels = static_cast<std::size_t>(levels_);
  for (std::size_t j = 0; j < states_; ++j) {
    json per_state = json::array();
    for (std::size_t d = 0; d < streams_; ++d) {
      const auto begin = emissions_.begin() + static_cast<std::ptrdiff_t>((j * streams_ + d) * levels);
      per_state.push_back(std::vector<double>(begin, begin + levels));
    }
    emissions.push_back(std::move(per_state));
  }
  doc["emissions"] = std::move(emissions);
  doc["weights"] = model.weights();
  return doc;
}

MsdHmm detail::hmm_from_json(const nlohmann::json& doc) {
  using nlohmann::json;
  try {
    if (doc.at("format") != "msd-hmm") throw DataError("not an msd-hmm document");
    if (doc.at("version").get<int>() != kHmmFormatVersion) {
      throw DataError("unsupported msd-hmm version " + doc.at("version").dump());
    }
    const auto states = doc.at("states").get<std::size_t>();
    const auto streams = doc.at("streams").get<std::size_t>();
    const int levels = doc.at("levels").get<int>();
    if (doc.at("topology").at("kind") != "left-right") throw DataError("unknown topology");
    const int max_jump = doc.at("topology").at("max_jump").get<int>();

    std::vector<double> transitions;
    for (const auto& row : doc.at("transitions")) {
      const auto r = row.get<std::vector<double>>();
      if (r.size() != states) throw DataError("transition row length");
      transitions.insert(transitions.end(), r.begin(), r.end());
    }
    std::vector<double> emissions;
    for (const auto& per_state : doc.at("emissions")) {
      for (const auto& table : per_state) {
        const auto h = table.get<std::vector<double>>();
        if (h.size() != static_cast<std::size_t>(levels)) throw DataError("emission table length");
        emissions.insert(emissions.end(), h.begin(), h.end());
      }
    }
    return MsdHmm(doc.at("initial").get<std::vector<double>>(), std::move(transitions),
                  std::move(emissions), doc.at("weights").get<std::vector<double>>(), streams,
                  levels, max_jump);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed msd-hmm document: ") + e.what());
  } catch (const InvariantError& e) {
    throw DataError(std::string("invalid msd-hmm document: ") + e.what());
  }
}

double forward_step(const MsdHmm& model, ForwardState& state, std::span<const Symbol> symbols) {
  const std::size_t n = model.states();
  thread_local std::vector<double> log_b;
  thread_local std::vector<double> alpha;
  log_b.resize(n);
  alpha.resize(n);
  model.emission_log_probs(symbols, log_b);
  const double shift = *std::max_element(log_b.begin(), log_b.end());

  const auto jump = static_cast<std::size_t>(model.max_jump());
  double scale = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double predicted;
    if (state.empty()) {
      predicted = model.initial(j);
    } else {
      predicted = 0.0;
      const std::size_t first = j > jump ? j - jump : 0;
      for (std::size_t i = first; i <= j; ++i) predicted += state.posterior[i] * model.transition(i, j);
    }
    alpha[j] = log_b[j] == kNegInf ? 0.0 : predicted * std::exp(log_b[j] - shift);
    scale += alpha[j];
  }

  double log_scale;
  if (scale > 0.0 && shift != kNegInf) {
    log_scale = std::log(scale) + shift;
    state.posterior.resize(n);
    for (std::size_t j = 0; j < n; ++j) state.posterior[j] = alpha[j] / scale;
  } else {
    // Observation impossible under every reachable state; only unsmoothed
    // models can get here.
    log_scale = kNegInf;
    if (state.posterior.empty()) state.posterior = model.initial();
  }
  state.log_likelihood += log_scale;
  ++state.steps;
  return log_scale;
}

ForwardTrellis forward(const MsdHmm& model, const SymbolSequence& sequence) {
  if (sequence.empty()) throw DataError("forward: empty observation sequence");
  ForwardTrellis trellis;
  trellis.posteriors.reserve(sequence.size());
  trellis.log_scales.reserve(sequence.size());
  ForwardState state;
  for (const auto& symbols : sequence) {
    trellis.log_scales.push_back(forward_step(model, state, symbols));
    trellis.posteriors.push_back(state.posterior);
  }
  trellis.log_likelihood = state.log_likelihood;
  return trellis;
}

double log_likelihood(const MsdHmm& model, const SymbolSequence& sequence) {
  if (sequence.empty()) throw DataError("forward: empty observation sequence");
  ForwardState state;
  for (const auto& symbols : sequence) forward_step(model, state, symbols);
  return state.log_likelihood;
}

}  // namespace msdhmm
