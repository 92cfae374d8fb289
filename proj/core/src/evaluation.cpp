#include "msdhmm/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "msdhmm/error.hpp"
#include "parallel.hpp"

namespace msdhmm {

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string ablation_of(const PipelineOptions& options) {
  std::string out;
  if (!options.feature_normalization) out = "no-fn";
  if (!options.weighted_streams) out += out.empty() ? "no-wms" : ",no-wms";
  return out.empty() ? "full" : out;
}

void classify_into(const DualStageModel& model, std::span<const GestureInstance> test,
                   EvalReport& report, int threads) {
  std::vector<Classification> results(test.size());
  detail::parallel_for(test.size(), threads, [&](std::size_t i) {
    results[i] = classify(model, test[i].frames, ClassifyMode::DualStage);
  });
  for (std::size_t i = 0; i < test.size(); ++i) {
    report.stage1.add(test[i].label, results[i].stage1_label);
    report.stage2.add(test[i].label, results[i].label);
  }
}

}  // namespace

double iou(std::size_t a_start, std::size_t a_end, std::size_t b_start, std::size_t b_end) {
  const std::size_t lo = std::max(a_start, b_start);
  const std::size_t hi = std::min(a_end, b_end);
  const std::size_t inter = hi > lo ? hi - lo : 0;
  const std::size_t uni = (a_end - a_start) + (b_end - b_start) - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double iou(const Segment& a, const Segment& b) { return iou(a.start, a.end, b.start, b.end); }

ConfusionMatrix::ConfusionMatrix(std::vector<int> classes) : classes_(std::move(classes)) {
  std::sort(classes_.begin(), classes_.end());
  classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());
  counts_.assign(classes_.size() * classes_.size(), 0);
}

std::size_t ConfusionMatrix::position(int label) const {
  const auto it = std::lower_bound(classes_.begin(), classes_.end(), label);
  if (it == classes_.end() || *it != label) throw DataError("confusion matrix: unknown class " + std::to_string(label));
  return static_cast<std::size_t>(it - classes_.begin());
}

void ConfusionMatrix::add(int truth, int predicted) {
  ++counts_[position(truth) * classes_.size() + position(predicted)];
}

std::size_t ConfusionMatrix::count(int truth, int predicted) const {
  return counts_[position(truth) * classes_.size() + position(predicted)];
}

std::size_t ConfusionMatrix::row_total(int truth) const {
  const std::size_t row = position(truth);
  std::size_t total = 0;
  for (std::size_t c = 0; c < classes_.size(); ++c) total += counts_[row * classes_.size() + c];
  return total;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t total = 0;
  for (auto c : counts_) total += c;
  return total;
}

std::size_t ConfusionMatrix::correct() const {
  std::size_t hits = 0;
  for (std::size_t c = 0; c < classes_.size(); ++c) hits += counts_[c * classes_.size() + c];
  return hits;
}

double ConfusionMatrix::accuracy() const {
  const auto n = total();
  return n == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(n);
}

double ConfusionMatrix::class_accuracy(int truth) const {
  const auto n = row_total(truth);
  return n == 0 ? 0.0 : static_cast<double>(count(truth, truth)) / static_cast<double>(n);
}

std::string ConfusionMatrix::to_csv() const {
  std::ostringstream out;
  out << "truth\\predicted";
  for (int c : classes_) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < classes_.size(); ++r) {
    out << classes_[r];
    for (std::size_t c = 0; c < classes_.size(); ++c) out << ',' << counts_[r * classes_.size() + c];
    out << '\n';
  }
  return out.str();
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out << "split      " << split << '\n'
      << "ablation   " << ablation << '\n'
      << "folds      " << folds << '\n';
  for (std::size_t i = 0; i < model_hashes.size() && i < 5; ++i) out << "model      " << model_hashes[i] << '\n';
  if (model_hashes.size() > 5) out << "model      ... (" << model_hashes.size() << " total)\n";
  out << "instances  " << stage2.total() << '\n'
      << "stage-1 accuracy  " << fixed(stage1.accuracy()) << '\n'
      << "stage-2 accuracy  " << fixed(stage2.accuracy()) << '\n'
      << "\nclass   tested  stage-1  stage-2\n";
  for (int c : stage2.classes()) {
    char line[96];
    std::snprintf(line, sizeof(line), "%5d  %7zu  %7s  %7s\n", c, stage2.row_total(c),
                  fixed(stage1.class_accuracy(c), 3).c_str(), fixed(stage2.class_accuracy(c), 3).c_str());
    out << line;
  }
  return out.str();
}

std::string EvalReport::to_records() const {
  std::ostringstream out;
  out << "kind offline\n"
      << "split " << split << '\n'
      << "ablation " << ablation << '\n'
      << "folds " << folds << '\n';
  for (const auto& h : model_hashes) out << "model_hash " << h << '\n';
  out << "total " << stage2.total() << '\n'
      << "stage1_correct " << stage1.correct() << '\n'
      << "stage2_correct " << stage2.correct() << '\n'
      << "stage1_accuracy " << fixed(stage1.accuracy(), 6) << '\n'
      << "stage2_accuracy " << fixed(stage2.accuracy(), 6) << '\n';
  for (int c : stage2.classes()) {
    out << "class " << c << " tested " << stage2.row_total(c) << " stage1 "
        << fixed(stage1.class_accuracy(c), 6) << " stage2 " << fixed(stage2.class_accuracy(c), 6) << '\n';
  }
  return out.str();
}

EvalReport evaluate_offline(const std::vector<GestureInstance>& instances,
                            const std::vector<Fold>& folds, const SkeletonDescriptor& descriptor,
                            const PipelineOptions& options, const std::string& split_description) {
  std::set<int> labels;
  for (const auto& instance : instances) labels.insert(instance.label);
  EvalReport report;
  report.split = split_description;
  report.ablation = ablation_of(options);
  report.folds = folds.size();
  report.stage1 = ConfusionMatrix({labels.begin(), labels.end()});
  report.stage2 = ConfusionMatrix({labels.begin(), labels.end()});

  for (const auto& fold : folds) {
    std::vector<GestureInstance> train;
    std::vector<GestureInstance> test;
    for (auto i : fold.train) train.push_back(instances.at(i));
    for (auto i : fold.test) test.push_back(instances.at(i));
    const auto model = train_pipeline(train, descriptor, options);
    report.model_hashes.push_back(model.manifest_hash());
    classify_into(model, test, report, options.threads);
  }
  return report;
}

EvalReport evaluate_model(const DualStageModel& model, std::span<const GestureInstance> test,
                          const std::string& split_description) {
  std::set<int> labels(model.stage1.classes.begin(), model.stage1.classes.end());
  for (const auto& instance : test) labels.insert(instance.label);
  EvalReport report;
  report.split = split_description;
  report.ablation = ablation_of(model.options);
  report.folds = 1;
  report.model_hashes.push_back(model.manifest_hash());
  report.stage1 = ConfusionMatrix({labels.begin(), labels.end()});
  report.stage2 = ConfusionMatrix({labels.begin(), labels.end()});
  classify_into(model, test, report, model.options.threads);
  return report;
}

void validate_truth(const std::vector<Segment>& truth, std::size_t frame_count) {
  std::vector<Segment> sorted = truth;
  std::sort(sorted.begin(), sorted.end(),
            [](const Segment& a, const Segment& b) { return a.start < b.start; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].end <= sorted[i].start) throw DataError("ground truth: empty interval");
    if (frame_count > 0 && sorted[i].end > frame_count) {
      throw DataError("ground truth: interval [" + std::to_string(sorted[i].start) + ", " +
                      std::to_string(sorted[i].end) + ") exceeds the stream length " +
                      std::to_string(frame_count));
    }
    if (i > 0 && sorted[i].start < sorted[i - 1].end) {
      throw DataError("ground truth: overlapping intervals at frame " + std::to_string(sorted[i].start));
    }
  }
}

OnlineReport score_online(const std::vector<Segment>& truth,
                          const std::vector<SegmentEvent>& events, double sigma) {
  validate_truth(truth);
  OnlineReport report;
  report.sigma = sigma;
  report.truth_count = truth.size();

  std::vector<const SegmentEvent*> detections;
  for (const auto& e : events) {
    if (e.kind == EventKind::End) detections.push_back(&e);
    if (e.kind == EventKind::Rejected) ++report.rejected_count;
  }
  report.detection_count = detections.size();

  std::vector<SegmentMatch> candidates;
  for (std::size_t g = 0; g < truth.size(); ++g) {
    for (std::size_t d = 0; d < detections.size(); ++d) {
      const double v = iou(truth[g].start, truth[g].end, detections[d]->start, detections[d]->end);
      if (v > 0.0 && v >= sigma) candidates.push_back({g, d, v});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [&](const SegmentMatch& a, const SegmentMatch& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (truth[a.truth].start != truth[b.truth].start) return truth[a.truth].start < truth[b.truth].start;
    return detections[a.detection]->start < detections[b.detection]->start;
  });
  std::vector<bool> truth_used(truth.size(), false);
  std::vector<bool> detection_used(detections.size(), false);
  for (const auto& m : candidates) {
    if (truth_used[m.truth] || detection_used[m.detection]) continue;
    truth_used[m.truth] = true;
    detection_used[m.detection] = true;
    report.matches.push_back(m);
  }
  std::sort(report.matches.begin(), report.matches.end(),
            [](const SegmentMatch& a, const SegmentMatch& b) { return a.truth < b.truth; });

  for (const auto& m : report.matches) {
    const auto* det = detections[m.detection];
    std::size_t best = 0;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < truth.size(); ++g) {
      const double v = iou(truth[g].start, truth[g].end, det->start, det->end);
      if (v > best_iou || (v == best_iou && truth[g].start < truth[best].start)) {
        best_iou = v;
        best = g;
      }
    }
    if (det->refined_label == truth[best].label) ++report.recognized;
  }

  report.detection_rate =
      truth.empty() ? 0.0 : static_cast<double>(report.matches.size()) / static_cast<double>(truth.size());
  report.recognition_defined = !report.matches.empty();
  report.recognition_rate = report.recognition_defined
                                ? static_cast<double>(report.recognized) / static_cast<double>(report.matches.size())
                                : 0.0;
  return report;
}

std::string OnlineReport::to_text() const {
  std::ostringstream out;
  if (!model_hash.empty()) out << "model             " << model_hash << '\n';
  out << "sigma             " << fixed(sigma, 2) << '\n'
      << "ground truth      " << truth_count << '\n'
      << "detections        " << detection_count << '\n'
      << "rejected          " << rejected_count << '\n'
      << "matched           " << matches.size() << '\n'
      << "detection rate    " << fixed(detection_rate, 3) << '\n'
      << "recognition rate  " << fixed(recognition_rate, 3)
      << (recognition_defined ? "" : "  (undefined: no matched detections)") << '\n';
  return out.str();
}

std::string OnlineReport::to_records() const {
  std::ostringstream out;
  out << "kind online\n";
  if (!model_hash.empty()) out << "model_hash " << model_hash << '\n';
  out << "sigma " << fixed(sigma, 6) << '\n'
      << "truth " << truth_count << '\n'
      << "detections " << detection_count << '\n'
      << "rejected " << rejected_count << '\n'
      << "matched " << matches.size() << '\n'
      << "recognized " << recognized << '\n'
      << "detection_rate " << fixed(detection_rate, 6) << '\n'
      << "recognition_rate " << fixed(recognition_rate, 6) << '\n'
      << "recognition_defined " << (recognition_defined ? 1 : 0) << '\n';
  for (const auto& m : matches) {
    out << "match truth " << m.truth << " detection " << m.detection << " iou " << fixed(m.iou, 6) << '\n';
  }
  return out.str();
}

}  // namespace msdhmm
