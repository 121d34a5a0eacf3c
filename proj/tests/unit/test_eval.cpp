#include <doctest.h>

#include <vector>

#include "hullscan/eval/metrics.hpp"
#include "hullscan/eval/report.hpp"

using namespace hullscan;
using namespace hullscan::eval;

namespace {

BinaryMask square(int n, int r0, int c0, int side) {
  BinaryMask m(n, n);
  for (int r = r0; r < r0 + side; ++r)
    for (int c = c0; c < c0 + side; ++c) m.set(r, c);
  return m;
}

DefectReport bt_report(double corrosion) {
  DefectReport r;
  r[Section::bt].present = true;
  r[Section::bt].area = 100;
  r[Section::bt].percent[0] = corrosion;
  return r;
}

}  // namespace

TEST_CASE("confusion tallies") {
  const std::vector<int> l{1, 1, 0, 0}, p{1, 1, 0, 0};
  const auto cm = confusion(l, p);
  CHECK(cm.tp == 2);
  CHECK(cm.tn == 2);
  const std::vector<int> wrong{0, 0, 1, 1};
  const auto cw = confusion(l, wrong);
  CHECK(cw.tp == 0);
  CHECK(cw.tn == 0);

  const std::vector<int> labels{1, 1, 1, 0, 0, 0, 0, 0, 1, 0};
  const std::vector<int> preds{1, 1, 0, 0, 1, 1, 0, 0, 1, 0};
  CHECK(confusion(labels, preds) == ConfusionMatrix{3, 4, 2, 1});

  CHECK_THROWS_AS(confusion(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
  CHECK_THROWS_AS(confusion(std::vector<int>{1}, std::vector<int>{1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(confusion(std::vector<int>{2}, std::vector<int>{1}), std::invalid_argument);
}

TEST_CASE("metric formulas") {
  const auto m = metrics({3, 4, 2, 1});
  CHECK(*m.accuracy == doctest::Approx(0.70));
  CHECK(*m.precision == doctest::Approx(0.60));
  CHECK(*m.recall == doctest::Approx(0.75));
  CHECK(*m.f1 == doctest::Approx(2.0 * 0.6 * 0.75 / 1.35));
  CHECK(*m.balanced_accuracy == doctest::Approx((0.75 + 4.0 / 6.0) / 2.0));

  const auto perfect = metrics({5, 5, 0, 0});
  CHECK(*perfect.accuracy == 1.0);
  CHECK(*perfect.balanced_accuracy == 1.0);
  CHECK(*perfect.f1 == 1.0);

  const auto sym = metrics({4, 4, 1, 1});
  CHECK(*sym.accuracy == doctest::Approx(*sym.balanced_accuracy));

  const auto no_pos = metrics({0, 5, 0, 0});
  CHECK_FALSE(no_pos.recall);
  CHECK_FALSE(no_pos.precision);
}

TEST_CASE("iou") {
  const auto a = square(20, 0, 0, 10);
  CHECK(*iou(a, a) == 1.0);
  CHECK(*iou(a, square(20, 10, 10, 10)) == 0.0);
  // Equal 10x10 squares sharing half their area: 50 / 150.
  CHECK(*iou(a, square(20, 0, 5, 10)) == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(iou(BinaryMask(4, 4), BinaryMask(4, 4)));

  SectionMap s(4, 4, Section::ts);
  for (int c = 0; c < 4; ++c) s.at(3, c) = Section::vs;
  const auto summary = mean_iou(s, s);
  CHECK(*summary.per_class[0] == 1.0);
  CHECK_FALSE(summary.per_class[1]);
  CHECK(*summary.mean == 1.0);
}

TEST_CASE("aggregate_reports") {
  CHECK_THROWS_AS(aggregate_reports(std::vector<DefectReport>{}), std::invalid_argument);

  const std::vector<DefectReport> one{bt_report(12.5)};
  const auto t1 = aggregate_reports(one);
  CHECK(*t1.mean[1][0] == 12.5);
  CHECK_FALSE(t1.mean[0][0]);
  CHECK(t1.count[0][0] == 0);

  const std::vector<DefectReport> two{bt_report(10.0), bt_report(30.0)};
  const auto t2 = aggregate_reports(two);
  CHECK(*t2.mean[1][0] == doctest::Approx(20.0));
  CHECK(t2.count[1][0] == 2);

  auto failed = bt_report(90.0);
  failed.diagnostic = "no ship";
  const std::vector<DefectReport> with_failed{bt_report(10.0), failed};
  CHECK(*aggregate_reports(with_failed).mean[1][0] == 10.0);
}

TEST_CASE("report serialization") {
  auto r = bt_report(4.0);
  r.image_id = "scene_0001";
  r[Section::vs].present = true;
  r[Section::vs].area = 50;
  r[Section::vs].percent = {0.0, 1.5, 2.5};
  const auto back = report_from_json(report_to_json(r));
  CHECK(back.image_id == r.image_id);
  for (int s = 0; s < 3; ++s) {
    CHECK(back.sections[s].present == r.sections[s].present);
    if (!r.sections[s].present) continue;
    CHECK(back.sections[s].area == r.sections[s].area);
    for (int d = 0; d < 3; ++d) CHECK(back.sections[s].percent[d] == doctest::Approx(r.sections[s].percent[d]));
  }
  const auto header = coverage_csv_header();
  const auto row = report_csv_row(r);
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
  CHECK(row.rfind("scene_0001", 0) == 0);
}

TEST_CASE("overlays keep the image size") {
  RgbImage img(8, 10);
  MaskSet d(8, 10);
  d[Defect::corrosion].set(1, 1);
  const auto o = render_defect_overlay(img, d);
  CHECK(o.rows() == 8);
  CHECK(o.cols() == 10);
  CHECK(o.at(1, 1, 0) > o.at(1, 1, 1));
  CHECK(o.at(0, 0, 0) == 0);
}
