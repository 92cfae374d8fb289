#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "msdhmm/dual_stage.hpp"
#include "msdhmm/segmenter.hpp"
#include "msdhmm/skeleton_io.hpp"
#include "msdhmm/split.hpp"

namespace msdhmm {

// Temporal intersection over union of two half-open intervals.
double iou(std::size_t a_start, std::size_t a_end, std::size_t b_start, std::size_t b_end);
double iou(const Segment& a, const Segment& b);

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<int> classes = {});

  void add(int truth, int predicted);
  const std::vector<int>& classes() const noexcept { return classes_; }
  std::size_t count(int truth, int predicted) const;
  std::size_t row_total(int truth) const;
  std::size_t total() const;
  std::size_t correct() const;
  double accuracy() const;
  double class_accuracy(int truth) const;
  std::string to_csv() const;

 private:
  std::size_t position(int label) const;

  std::vector<int> classes_;
  std::vector<std::size_t> counts_;
};

struct EvalReport {
  std::string split;
  std::string ablation;  // "full", "no-fn", "no-wms" or "no-fn,no-wms"
  std::size_t folds = 0;
  std::vector<std::string> model_hashes;  // one per fold
  ConfusionMatrix stage1;
  ConfusionMatrix stage2;

  std::string to_text() const;
  std::string to_records() const;
};

// Trains one pipeline per fold on its training part and classifies its
// test part. Per-fold results are reduced in fold order.
EvalReport evaluate_offline(const std::vector<GestureInstance>& instances,
                            const std::vector<Fold>& folds, const SkeletonDescriptor& descriptor,
                            const PipelineOptions& options, const std::string& split_description);

// Classifies `test` with an already trained model.
EvalReport evaluate_model(const DualStageModel& model, std::span<const GestureInstance> test,
                          const std::string& split_description);

struct SegmentMatch {
  std::size_t truth = 0;      // index into truth
  std::size_t detection = 0;  // index into the End events
  double iou = 0.0;
};

struct OnlineReport {
  double sigma = 0.5;
  std::size_t truth_count = 0;
  std::size_t detection_count = 0;  // End events
  std::size_t rejected_count = 0;
  std::vector<SegmentMatch> matches;
  std::size_t recognized = 0;
  double detection_rate = 0.0;
  double recognition_rate = 0.0;
  bool recognition_defined = false;
  std::string model_hash;

  std::string to_text() const;
  std::string to_records() const;
};

// Throws DataError when ground-truth intervals overlap, are empty or, with a
// non-zero frame_count, leave [0, frame_count).
void validate_truth(const std::vector<Segment>& truth, std::size_t frame_count = 0);

// Greedy one-to-one matching by descending IoU over pairs with IoU >= sigma.
// A matched detection is recognized when its refined class equals the class
// of the ground-truth segment it overlaps most (earlier start on ties).
OnlineReport score_online(const std::vector<Segment>& truth,
                          const std::vector<SegmentEvent>& events, double sigma = 0.5);

}  // namespace msdhmm
