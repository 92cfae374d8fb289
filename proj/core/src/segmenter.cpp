#include "msdhmm/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "msdhmm/error.hpp"

namespace msdhmm {

void SegmenterConfig::validate() const {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw DataError("segmenter: th must lie in [0, 1]");
  if (!(vote_fraction > 0.0 && vote_fraction <= 1.0)) throw DataError("segmenter: v must lie in (0, 1]");
  if (max_duration < min_duration) throw DataError("segmenter: max_duration < min_duration");
}

std::string format_event(const SegmentEvent& event) {
  std::ostringstream out;
  switch (event.kind) {
    case EventKind::Begin:
      out << "begin " << event.start << "    ";
      break;
    case EventKind::End:
      out << "end " << event.start << ' ' << event.end << ' ' << event.label << ' '
          << event.refined_label << ' ';
      break;
    case EventKind::Rejected:
      out << "rejected " << event.start << ' ' << event.end << "   " << event.reason;
      break;
  }
  return out.str();
}

OnlineSegmenter::OnlineSegmenter(const DualStageModel& model, SegmenterConfig config)
    : model_(&model), config_(config), extractor_(model.stage1.features) {
  config_.validate();
  if (model.stage1.models.empty()) throw DataError("segmenter: model has no stage-1 classes");
  trellises_.resize(model.stage1.models.size());
  window_log_likelihood_.assign(trellises_.size(), 0.0);
  step_log_likelihood_.assign(trellises_.size(), 0.0);
  voting_for_.assign(trellises_.size(), 0);
  history_.resize(trellises_.size());
  last_valid_.resize(model.joint_count);
  seen_.assign(model.joint_count, false);
}

void OnlineSegmenter::reset() {
  extractor_.reset();
  phase_ = Phase::Idle;
  clock_ = 0;
  start_ = 0;
  refractory_left_ = 0;
  for (auto& t : trellises_) t.reset();
  for (auto& h : history_) h.clear();
  std::fill(voting_for_.begin(), voting_for_.end(), 0);
  window_frames_.clear();
  std::fill(seen_.begin(), seen_.end(), false);
}

bool OnlineSegmenter::repair(SkeletonFrame& frame) {
  const std::size_t joints = frame.joints.size();
  if (joints != model_->joint_count) {
    throw DataError("segmenter: frame has " + std::to_string(joints) + " joints, model expects " +
                    std::to_string(model_->joint_count));
  }
  if (frame.valid.size() != joints) {
    frame.valid.resize(joints);
    for (std::size_t j = 0; j < joints; ++j) frame.valid[j] = frame.joints[j].looks_valid();
  }
  if (2 * frame.invalid_count() > joints) return false;
  for (std::size_t j = 0; j < joints; ++j) {
    if (frame.valid[j]) {
      last_valid_[j] = frame.joints[j];
      seen_[j] = true;
    } else if (seen_[j]) {
      frame.joints[j] = last_valid_[j];
      frame.valid[j] = true;
    }
  }
  auto ok = [&](int j) { return frame.valid[static_cast<std::size_t>(j)]; };
  if (!ok(model_->stage1.features.reference_joint)) return false;
  for (int j : model_->stage1.features.joints) {
    if (!ok(j)) return false;
  }
  for (const auto& [group, bank] : model_->stage2) {
    for (int j : bank.features.joints) {
      if (!ok(j)) return false;
    }
  }
  return true;
}

std::size_t OnlineSegmenter::best_model() const {
  return argmax(window_log_likelihood_);
}

std::vector<bool> OnlineSegmenter::visited() const {
  if (phase_ == Phase::Idle) return {};
  const std::size_t best = best_model();
  const std::size_t n = model_->stage1.models[best].states();
  std::vector<bool> flags(n, false);
  const auto& h = history_[best];
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (h[k] >= config_.threshold) flags[k % n] = true;
  }
  return flags;
}

void OnlineSegmenter::open_gesture() {
  phase_ = Phase::InGesture;
  start_ = clock_ - 1;
}

void OnlineSegmenter::close_gesture() {
  phase_ = Phase::Idle;
  for (auto& t : trellises_) t.reset();
  for (auto& h : history_) h.clear();
  std::fill(voting_for_.begin(), voting_for_.end(), 0);
  window_frames_.clear();
  refractory_left_ = config_.refractory;
}

std::optional<SegmentEvent> OnlineSegmenter::evaluate_window(std::size_t best, bool at_end) {
  SegmentEvent event;
  event.start = start_;
  event.end = clock_;
  event.kind = EventKind::Rejected;
  const std::size_t n = model_->stage1.models[best].states();
  const auto flags = visited();
  const auto count = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
  const auto needed = static_cast<std::size_t>(std::ceil(2.0 * static_cast<double>(n) / 3.0));
  const bool second_to_last = n < 2 || flags[n - 2];

  if (event.end - event.start < config_.min_duration) {
    event.reason = kReasonTooShort;
  } else if (count < needed || !second_to_last) {
    event.reason = kReasonInsufficientVisited;
  } else if (at_end) {
    event.reason = kReasonStreamEnded;
  } else {
    event.kind = EventKind::End;
    event.label = model_->stage1.classes[best];
    event.refined_label = refine(*model_, window_frames_, event.label).label;
  }
  close_gesture();
  return event;
}

std::optional<SegmentEvent> OnlineSegmenter::step(const SkeletonFrame& input) {
  ++clock_;
  SkeletonFrame frame = input;
  if (!repair(frame)) return std::nullopt;

  const auto& bank = model_->stage1;
  const auto symbols = quantize(bank.normalizer.apply(extractor_.push(frame)), bank.features.levels);

  if (refractory_left_ > 0) {
    --refractory_left_;
    return std::nullopt;
  }

  const std::size_t models = trellises_.size();
  if (phase_ == Phase::Idle) {
    std::size_t votes = 0;
    for (std::size_t k = 0; k < models; ++k) {
      step_log_likelihood_[k] = forward_step(bank.models[k], trellises_[k], symbols);
      if (trellises_[k].posterior[0] < config_.threshold) {
        ++votes;
        ++voting_for_[k];
      } else {
        voting_for_[k] = 0;
      }
    }
    if (static_cast<double>(votes) > config_.vote_fraction * static_cast<double>(models)) {
      open_gesture();
      for (std::size_t k = 0; k < models; ++k) {
        window_log_likelihood_[k] = step_log_likelihood_[k];
        history_[k] = trellises_[k].posterior;
      }
      window_frames_.assign(1, frame);
      return SegmentEvent{EventKind::Begin, start_, 0, -1, -1, {}};
    }
    // A model that ran through to its last state, or has been voting for
    // longer than any gesture lasts, goes back to its first state.
    for (std::size_t k = 0; k < models; ++k) {
      auto& t = trellises_[k];
      if (t.posterior.back() >= config_.threshold || voting_for_[k] > config_.max_duration) {
        t.reset();
        voting_for_[k] = 0;
      }
    }
    return std::nullopt;
  }

  for (std::size_t k = 0; k < models; ++k) {
    window_log_likelihood_[k] += forward_step(bank.models[k], trellises_[k], symbols);
    history_[k].insert(history_[k].end(), trellises_[k].posterior.begin(), trellises_[k].posterior.end());
  }
  window_frames_.push_back(std::move(frame));

  const std::size_t best = best_model();
  if (trellises_[best].posterior.back() >= config_.threshold) return evaluate_window(best, false);
  if (clock_ - start_ >= config_.max_duration) {
    SegmentEvent event{EventKind::Rejected, start_, clock_, -1, -1, kReasonTooLong};
    close_gesture();
    return event;
  }
  return std::nullopt;
}

std::optional<SegmentEvent> OnlineSegmenter::finish() {
  if (phase_ != Phase::InGesture) return std::nullopt;
  return evaluate_window(best_model(), true);
}

std::vector<SegmentEvent> run_stream(std::span<const SkeletonFrame> frames,
                                     const DualStageModel& model, const SegmenterConfig& config) {
  OnlineSegmenter segmenter(model, config);
  std::vector<SegmentEvent> events;
  for (const auto& frame : frames) {
    if (auto event = segmenter.step(frame)) events.push_back(std::move(*event));
  }
  if (auto event = segmenter.finish()) events.push_back(std::move(*event));
  return events;
}

}  // namespace msdhmm
