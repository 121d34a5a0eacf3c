#include "hullscan/eval/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hullscan::eval {

ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> preds) {
  if (labels.empty()) throw std::invalid_argument("confusion: empty input");
  if (labels.size() != preds.size()) throw std::invalid_argument("confusion: length mismatch");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i], p = preds[i];
    if ((l != 0 && l != 1) || (p != 0 && p != 1)) {
      throw std::invalid_argument("confusion: values must be 0 or 1");
    }
    if (l && p) ++cm.tp;
    else if (!l && !p) ++cm.tn;
    else if (p) ++cm.fp;
    else ++cm.fn;
  }
  return cm;
}

ConfusionMatrix confusion(const BinaryMask& pred, const BinaryMask& truth) {
  require_same_shape(pred.rows(), pred.cols(), truth.rows(), truth.cols(), "confusion");
  ConfusionMatrix cm;
  const auto p = pred.data();
  const auto t = truth.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (t[i] && p[i]) ++cm.tp;
    else if (!t[i] && !p[i]) ++cm.tn;
    else if (p[i]) ++cm.fp;
    else ++cm.fn;
  }
  return cm;
}

namespace {

std::optional<double> ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

}  // namespace

Metrics metrics(const ConfusionMatrix& cm) {
  const double tp = cm.tp, tn = cm.tn, fp = cm.fp, fn = cm.fn;
  Metrics m;
  m.accuracy = ratio(tp + tn, tp + tn + fp + fn);
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  const auto tnr = ratio(tn, tn + fp);
  if (m.recall && tnr) m.balanced_accuracy = 0.5 * (*m.recall + *tnr);
  if (m.precision && m.recall) m.f1 = ratio(2.0 * *m.precision * *m.recall, *m.precision + *m.recall);
  return m;
}

std::optional<double> iou(const BinaryMask& pred, const BinaryMask& truth) {
  const std::size_t inter = overlap_count(pred, truth);
  const std::size_t uni = pred.count() + truth.count() - inter;
  return ratio(static_cast<double>(inter), static_cast<double>(uni));
}

std::optional<double> mean_defined(std::span<const std::optional<double>> values) {
  double sum = 0.0;
  int n = 0;
  for (const auto& v : values) {
    if (!v) continue;
    sum += *v;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

IouSummary mean_iou(const SectionMap& pred, const SectionMap& truth) {
  require_same_shape(pred.rows(), pred.cols(), truth.rows(), truth.cols(), "mean_iou");
  IouSummary s;
  for (Section sec : kSections) s.per_class.push_back(iou(section_mask(pred, sec), section_mask(truth, sec)));
  s.mean = mean_defined(s.per_class);
  return s;
}

IouSummary mean_iou(const MaskSet& pred, const MaskSet& truth) {
  IouSummary s;
  for (Defect d : kDefects) s.per_class.push_back(iou(pred[d], truth[d]));
  s.mean = mean_defined(s.per_class);
  return s;
}

CoverageTable aggregate_reports(std::span<const DefectReport> reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate_reports: no reports");
  // Values are summed in sorted order so the result does not depend on report order.
  std::array<std::array<std::vector<double>, 3>, 3> cells;
  for (const auto& r : reports) {
    if (!r.diagnostic.empty()) continue;
    for (int s = 0; s < 3; ++s) {
      if (!r.sections[s].present) continue;
      for (int d = 0; d < 3; ++d) cells[s][d].push_back(r.sections[s].percent[d]);
    }
  }
  CoverageTable t;
  for (int s = 0; s < 3; ++s) {
    for (int d = 0; d < 3; ++d) {
      auto& v = cells[s][d];
      t.count[s][d] = v.size();
      if (v.empty()) continue;
      std::sort(v.begin(), v.end());
      t.mean[s][d] = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    }
  }
  return t;
}

}  // namespace hullscan::eval
