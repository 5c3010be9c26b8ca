#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"

#include "dshift/error.hpp"
#include "dshift/eval.hpp"
#include "dshift/report.hpp"

using namespace dshift;

namespace {

Dataset line_data() {
  Eigen::MatrixXd x(6, 1);
  x << 0, 1, 2, 3, 4, 5;
  Eigen::VectorXd y(6);
  y << 0.1, 0.9, 2.2, 2.8, 4.1, 5.3;
  return make_dataset(x, y);
}

/// Constant model: predicts `c` for every row.
Model constant_model(double c) {
  Model m;
  m.spec = ModelSpec::linear_ridge();
  m.input_width = 1;
  m.standardizer = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
  m.intercept = c;
  m.coefficients = Eigen::VectorXd::Zero(1);
  return m;
}

Model threshold_classifier() {
  // P(class 1) = sigmoid(50 x): class 1 for x > 0.
  Model m;
  m.spec = ModelSpec::logistic();
  m.input_width = 1;
  m.num_classes = 2;
  m.standardizer = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
  m.coefficients = Eigen::VectorXd::Constant(1, 50.0);
  return m;
}

} // namespace

TEST_CASE("risk values by hand") {
  const Dataset d = line_data();
  const Model m = constant_model(2.0);
  // (3.61 + 1.21 + 0.04 + 0.64 + 4.41 + 10.89) / 6
  CHECK(risk(m, d, ScoreLoss::Squared) == doctest::Approx(20.8 / 6.0));
  Eigen::VectorXd w = Eigen::VectorXd::Zero(6);
  w(5) = 1.0;
  w(0) = 1.0;
  const WeightVector wv = WeightVector::make(w.cwiseMax(1e-300), "t", Normalization::None);
  CHECK(risk(m, d, ScoreLoss::Squared, wv) == doctest::Approx((3.61 + 10.89) / 2.0));

  Eigen::MatrixXd x(4, 1);
  x << -1, 1, 2, -2;
  const Dataset c = make_dataset(x, Eigen::Vector4d(0, 1, 0, 0), 2);
  const Model t = threshold_classifier();
  CHECK(risk(t, c, ScoreLoss::ZeroOne) == doctest::Approx(0.25));
  const Eigen::VectorXd ll = pointwise_loss(t, c, ScoreLoss::LogLoss);
  CHECK(ll(2) == doctest::Approx(-std::log(1e-15))); // 1 - sigmoid(100) underflows to the clip
  CHECK(ll(0) == doctest::Approx(-std::log(1 - sigmoid(-50.0))));

  // Log loss saturates at the clip.
  Model sure = threshold_classifier();
  sure.coefficients(0) = 1e6;
  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  const Dataset wrong = make_dataset(one, Eigen::VectorXd::Zero(1), 2);
  CHECK(pointwise_loss(sure, wrong, ScoreLoss::LogLoss)(0) == doctest::Approx(-std::log(1e-15)));
  CHECK(parse_score_loss("mse") == ScoreLoss::Squared);
  CHECK(parse_score_loss("error") == ScoreLoss::ZeroOne);
  CHECK_THROWS_AS(parse_score_loss("hinge"), InvalidArgument);
}

TEST_CASE("fold plans partition the rows") {
  for (Index n : {10, 11, 23}) {
    for (int k : {2, 3, 5, 10}) {
      const FoldPlan p = make_folds(n, k, RngSeed{static_cast<std::uint64_t>(n * k)});
      std::multiset<Index> all;
      for (int f = 0; f < k; ++f) {
        const auto &t = p.test_rows[static_cast<std::size_t>(f)];
        CHECK(std::is_sorted(t.begin(), t.end()));
        const Index expected = n / k + (f < n % k ? 1 : 0);
        CHECK(static_cast<Index>(t.size()) == expected);
        all.insert(t.begin(), t.end());
        CHECK(static_cast<Index>(p.train_rows(f).size()) == n - expected);
      }
      CHECK(all.size() == static_cast<std::size_t>(n));
      CHECK(std::set<Index>(all.begin(), all.end()).size() == static_cast<std::size_t>(n));
    }
  }
  CHECK(make_folds(20, 4, RngSeed{1}).test_rows == make_folds(20, 4, RngSeed{1}).test_rows);
  CHECK_THROWS_AS(make_folds(5, 1, RngSeed{1}), InvalidArgument);
  CHECK_THROWS_AS(make_folds(5, 6, RngSeed{1}), InvalidArgument);
}

TEST_CASE("leave-one-out CV matches a hand computation") {
  const Dataset d = line_data();
  const CvResult cv = cross_validate(ModelSpec::linear_ridge(), d, 6, RngSeed{3}, ScoreLoss::Squared);
  double oracle = 0;
  const Eigen::VectorXd &y = *d.outputs;
  for (Index i = 0; i < 6; ++i) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (Index j = 0; j < 6; ++j) {
      if (j == i) continue;
      const double x = static_cast<double>(j);
      sx += x; sy += y(j); sxx += x * x; sxy += x * y(j);
    }
    const double b = (5 * sxy - sx * sy) / (5 * sxx - sx * sx);
    const double a = (sy - b * sx) / 5;
    oracle += std::pow(y(i) - (a + b * static_cast<double>(i)), 2) / 6.0;
  }
  CHECK(cv.scores.size() == 6);
  CHECK(cv.mean() == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("importance-weighted CV") {
  Rng rng(RngSeed{4});
  Eigen::MatrixXd x(60, 1);
  Eigen::VectorXd y(60);
  for (Index i = 0; i < 60; ++i) {
    x(i, 0) = rng.normal();
    y(i) = x(i, 0) * x(i, 0) + 0.1 * rng.normal();
  }
  const Dataset d = make_dataset(x, y);
  const ModelSpec spec = ModelSpec::linear_ridge();

  // Uniform weights reduce to plain CV.
  const CvResult plain = cross_validate(spec, d, 5, RngSeed{9}, ScoreLoss::Squared);
  const CvResult iw = importance_weighted_cv(spec, d, WeightVector::uniform(60), 5, RngSeed{9}, ScoreLoss::Squared);
  for (std::size_t f = 0; f < 5; ++f) CHECK(iw.scores[f] == doctest::Approx(plain.scores[f]).epsilon(1e-12));

  // Putting (almost) all mass on one test row makes that fold's score its loss.
  const FoldPlan plan = make_folds(60, 5, RngSeed{9});
  const Index hot = plan.test_rows[2][0];
  Eigen::VectorXd w = Eigen::VectorXd::Constant(60, 1e-12);
  w(hot) = 1.0;
  for (Index r : plan.test_rows[0]) w(r) = 1.0; // keeps fold 2's training side identified
  const CvResult one = importance_weighted_cv(spec, d, WeightVector::make(w, "t", Normalization::None), 5,
                                              RngSeed{9}, ScoreLoss::Squared);
  Eigen::VectorXd tw = w;
  for (Index r : plan.test_rows[2]) tw(r) = 0.0;
  const Model m = fit_weighted(spec, d, tw);
  const Dataset single = d.select_rows(std::vector<Index>{hot});
  CHECK(one.scores[2] == doctest::Approx(risk(m, single, ScoreLoss::Squared)).epsilon(1e-8));
}

TEST_CASE("group k-fold") {
  Dataset d = make_dataset(Eigen::MatrixXd::Zero(5, 1));
  d.groups = std::vector<std::string>{"b", "a", "b", "c", "a"};
  const auto s = group_kfold(d);
  REQUIRE(s.size() == 3);
  CHECK(s[0].group == "a");
  CHECK(s[0].test_rows == std::vector<Index>{1, 4});
  CHECK(s[0].train_rows == std::vector<Index>{0, 2, 3});
  CHECK(s[2].group == "c");
  CHECK(s[2].test_rows == std::vector<Index>{3});
  Dataset one = d;
  one.groups = std::vector<std::string>(5, "a");
  CHECK_THROWS_AS(group_kfold(one), InvalidArgument);
  CHECK_THROWS_AS(group_kfold(make_dataset(Eigen::MatrixXd::Zero(2, 1))), InvalidArgument);
}

TEST_CASE("subgroup report") {
  Eigen::MatrixXd x(6, 1);
  x << -1, 1, -1, 1, -1, 1;
  Dataset d = make_dataset(x, Eigen::VectorXd((Eigen::VectorXd(6) << 0, 1, 1, 1, 1, 0).finished()), 2);
  d.set_covariate("age", (Eigen::VectorXd(6) << 40, 45, 55, 58, 68, 70).finished());
  const Model m = threshold_classifier();
  const SubgroupReport r = subgroup_report(m, d, "age", Bins::equal_width(3), ScoreLoss::ZeroOne);
  REQUIRE(r.bins.size() == 3);
  // bins [40,50): rows 0,1 correct; [50,60): row 2 wrong; [60,70]: both wrong.
  CHECK(r.bins[0].risk == 0.0);
  CHECK(r.bins[1].risk == 0.5);
  CHECK(r.bins[2].risk == 1.0);
  CHECK(r.bins[2].count == 2);
  CHECK(*r.bins[0].accuracy == 1.0);
  CHECK(r.overall_risk == doctest::Approx(0.5));
  CHECK(r.worst_group_risk == 1.0);
  CHECK(r.group_risk_variance == doctest::Approx(1.0 / 6.0));

  // Empty bins are dropped; out-of-range values fall into the end bins.
  const SubgroupReport e =
      subgroup_report(m, d, "age", Bins::explicit_edges({0, 50, 52, 65, 100}), ScoreLoss::ZeroOne);
  CHECK(e.bins.size() == 3);
  const SubgroupReport clamp =
      subgroup_report(m, d, "age", Bins::explicit_edges({50, 60}), ScoreLoss::ZeroOne);
  REQUIRE(clamp.bins.size() == 1);
  CHECK(clamp.bins[0].count == 6);

  CHECK_THROWS_AS(subgroup_report(m, d, "age", Bins::explicit_edges({3, 1}), ScoreLoss::ZeroOne),
                  InvalidArgument);
  CHECK_THROWS_AS(subgroup_report(m, d, "bmi", Bins::equal_width(2), ScoreLoss::ZeroOne),
                  InvalidArgument);
}

TEST_CASE("shift detector verdicts") {
  Rng rng(RngSeed{5});
  auto sample = [&](double shift, Index n) {
    Eigen::MatrixXd x(n, 2);
    for (Index i = 0; i < n; ++i) {
      x(i, 0) = rng.normal() + shift;
      x(i, 1) = rng.normal();
    }
    return make_dataset(x);
  };
  const Dataset a = sample(0, 1000);
  const DetectorResult same = shift_detector(a, sample(0, 1000), FeatureView::x_only(), RngSeed{1});
  CHECK(same.verdict == Verdict::NoEvidenceOfShift);
  const DetectorResult mid = shift_detector(a, sample(1, 1000), FeatureView::x_only(), RngSeed{1});
  CHECK(mid.verdict == Verdict::Shifted);
  CHECK(mid.auc == doctest::Approx(0.76).epsilon(0.05)); // Phi(1 / sqrt 2)
  const DetectorResult far = shift_detector(a, sample(6, 1000), FeatureView::x_only(), RngSeed{1});
  CHECK(far.verdict == Verdict::LowOverlap);
  CHECK(to_string(Verdict::LowOverlap) == "LowOverlap");
  CHECK_THROWS_AS(shift_detector(a, sample(0, 1), FeatureView::x_only(), RngSeed{1}), InvalidArgument);
}

TEST_CASE("report serialization round trip") {
  EvalReport r;
  r.stamp.learner = "logistic";
  r.stamp.train = "young";
  r.stamp.test = "old, \"quoted\"";
  r.add("overall", "accuracy", 0.875);
  r.add("overall", "tiny", 1e-300);
  const CvResult cv{{0.1, 0.2}, make_folds(4, 2, RngSeed{1})};
  r.add_folds(cv, "mse");
  r.add_groups({{"siteA", 0.2}, {"siteB", 0.4}}, "mse");
  r.add_detector({0.7, Verdict::Shifted});
  const EvalReport back = EvalReport::from_jsonl(r.to_jsonl());
  CHECK(back == r);
  CHECK(*r.find("cv", "mse") == doctest::Approx(0.15));
  CHECK(*r.find("groups", "worst_group_risk") == 0.4);
  CHECK(*r.find("groups", "group_risk_variance") == doctest::Approx(0.01));
  CHECK(!r.find("overall", "missing"));
  const std::string csv = r.to_csv();
  CHECK(csv.rfind("learner,strategy,train,test,scope,metric,value,se,count\n", 0) == 0);
  CHECK(csv.find("\"old, \"\"quoted\"\"\"") != std::string::npos);
  CHECK_THROWS_AS(EvalReport::from_jsonl("{not json}\n"), InvalidArgument);
}
