#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msdhmm/dual_stage.hpp"
#include "msdhmm/features.hpp"
#include "msdhmm/msd_hmm.hpp"

namespace msdhmm {

struct SegmenterConfig {
  double threshold = 0.9;       // th
  double vote_fraction = 0.5;   // Begin needs voting/total > vote_fraction
  std::size_t min_duration = 5;
  std::size_t max_duration = 300;
  std::size_t refractory = 3;

  void validate() const;
};

enum class EventKind { Begin, End, Rejected };

struct SegmentEvent {
  EventKind kind = EventKind::Begin;
  std::size_t start = 0;  // t_s
  std::size_t end = 0;    // t_e, exclusive; unused for Begin
  int label = -1;         // stage-1 class, End only
  int refined_label = -1; // stage-2 class, End only
  std::string reason;     // Rejected only
};

inline constexpr const char* kReasonInsufficientVisited = "insufficient visited states";
inline constexpr const char* kReasonTooShort = "too short";
inline constexpr const char* kReasonTooLong = "too long";
inline constexpr const char* kReasonStreamEnded = "stream ended";

// `kind t_s t_e class_id refined_class_id reason`; inapplicable slots empty.
std::string format_event(const SegmentEvent& event);

// Online begin/end detector over the stage-1 bank followed by stage-2
// refinement of each accepted window.
//
// Idle: every model runs its forward recursion; a model whose first-state
// posterior is below th votes, and a vote fraction above `vote_fraction`
// opens a gesture at that frame. Models that reach their last state while
// idle start over from the first state.
// In gesture: forward recursions run from t_s, the best model is the
// log-likelihood argmax, and the window closes when the best model's last
// state posterior reaches th. The window is accepted when at least 2/3 of
// the states, including the second to last, reached th at some frame.
class OnlineSegmenter {
 public:
  enum class Phase { Idle, InGesture };

  OnlineSegmenter(const DualStageModel& model, SegmenterConfig config);

  std::optional<SegmentEvent> step(const SkeletonFrame& frame);
  // Closes an open window at end of stream.
  std::optional<SegmentEvent> finish();
  void reset();

  Phase phase() const noexcept { return phase_; }
  std::size_t clock() const noexcept { return clock_; }
  const ForwardState& trellis(std::size_t model) const { return trellises_[model]; }
  std::size_t model_count() const noexcept { return trellises_.size(); }
  // Visited flags of the current best model; empty while Idle.
  std::vector<bool> visited() const;

 private:
  bool repair(SkeletonFrame& frame);
  void open_gesture();
  void close_gesture();
  std::size_t best_model() const;
  std::optional<SegmentEvent> evaluate_window(std::size_t best, bool at_end);

  const DualStageModel* model_;
  SegmenterConfig config_;
  FeatureExtractor extractor_;
  Phase phase_ = Phase::Idle;
  std::size_t clock_ = 0;
  std::size_t start_ = 0;
  std::size_t refractory_left_ = 0;
  std::vector<ForwardState> trellises_;
  std::vector<double> window_log_likelihood_;
  std::vector<double> step_log_likelihood_;
  std::vector<std::size_t> voting_for_;  // consecutive idle frames spent voting
  // Per model: posteriors of every frame since t_s, flattened.
  std::vector<std::vector<double>> history_;
  std::vector<SkeletonFrame> window_frames_;
  std::vector<Joint3D> last_valid_;
  std::vector<bool> seen_;
};

std::vector<SegmentEvent> run_stream(std::span<const SkeletonFrame> frames,
                                     const DualStageModel& model, const SegmenterConfig& config);

}  // namespace msdhmm
