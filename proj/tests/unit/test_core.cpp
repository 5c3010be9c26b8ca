#include <algorithm>
#include <filesystem>
#include <set>

#include "doctest.h"

#include "dshift/csv.hpp"
#include "dshift/dataset.hpp"
#include "dshift/error.hpp"
#include "dshift/rng.hpp"
#include "dshift/stats.hpp"
#include "dshift/weight_vector.hpp"

using namespace dshift;

namespace {

Dataset random_dataset(Rng &rng, Index n, Index d, bool classification) {
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = rng.normal() * std::pow(10.0, rng.below(7) - 3.0);
    y(i) = classification ? static_cast<double>(rng.below(2)) : rng.normal();
  }
  Dataset data = make_dataset(x, y, classification ? 2 : 0);
  Eigen::VectorXd age(n), w(n);
  std::vector<std::string> g;
  for (Index i = 0; i < n; ++i) {
    age(i) = rng.uniform(40, 70);
    w(i) = rng.uniform(0.1, 3.0);
    g.push_back(rng.bernoulli(0.5) ? "siteA" : "siteB");
  }
  data.set_covariate("age", age);
  data.groups = g;
  data.weights = w;
  return data;
}

} // namespace

TEST_CASE("parse a three-row file with two features and an output") {
  const std::string text = "a,b,y\n1,2,3\n4.5,-1e-3,0\n+7,8,9\n";
  const Dataset d = parse_csv(text, Schema::parse("a:feature,b:feature,y:output"));
  CHECK(d.rows() == 3);
  CHECK(d.cols() == 2);
  REQUIRE(d.outputs);
  CHECK((*d.outputs)(2) == 9.0);
  CHECK(d.features(1, 1) == -1e-3);
  CHECK(d.features(2, 0) == 7.0);
}

TEST_CASE("unmapped columns are ignored and CRLF endings are accepted") {
  const std::string text = "junk,x\r\nfoo,1\r\nbar,2\r\n";
  const Dataset d = parse_csv(text, Schema::parse("x:feature"));
  CHECK(d.rows() == 2);
  CHECK(d.features(1, 0) == 2.0);
}

TEST_CASE("CSV errors") {
  const Schema s = Schema::parse("x:feature,y:output,w:weight");
  CHECK_THROWS_WITH_AS(parse_csv("x,y,w\n1,2,-1\n", s), doctest::Contains("negative weight"),
                       InvalidArgument);
  CHECK_THROWS_AS(parse_csv("x,y,w\n1,abc,1\n", s), InvalidArgument);
  CHECK_THROWS_AS(parse_csv("x,y\n1,2\n", s), InvalidArgument);
  CHECK_THROWS_AS(parse_csv("x,y,w\n", s), InvalidArgument);
  CHECK_THROWS_AS(parse_csv("x,y,w\n1,,1\n", s), InvalidArgument);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", s), IoError);
}

TEST_CASE("quoted cells") {
  const auto rows = read_rows("a,b\n\"x,1\",\"he said \"\"hi\"\"\"\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][0] == "x,1");
  CHECK(rows[1][1] == "he said \"hi\"");
  CHECK(csv_escape("x,1") == "\"x,1\"");
  CHECK(csv_escape("plain") == "plain");
}

TEST_CASE("write_csv/load_csv round trip on random datasets") {
  Rng rng(RngSeed{11});
  const auto dir = std::filesystem::temp_directory_path() / "dshift_core_rt";
  std::filesystem::create_directories(dir);
  for (int rep = 0; rep < 10; ++rep) {
    const Dataset d = random_dataset(rng, 1 + static_cast<Index>(rng.below(20)),
                                     1 + static_cast<Index>(rng.below(4)), rep % 2 == 0);
    const auto path = dir / ("d" + std::to_string(rep) + ".csv");
    write_csv(d, path);
    const Dataset back = load_csv(path, Schema::of(d));
    CHECK(back == d);
    // Byte-level: re-serializing gives the same file.
    CHECK(to_csv(back) == read_file(path));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("split sizes, disjointness and determinism") {
  Eigen::MatrixXd x(10, 1);
  for (int i = 0; i < 10; ++i) x(i, 0) = i;
  const Dataset d = make_dataset(x);
  const TrainTest a = split(d, 0.3, RngSeed{5});
  CHECK(a.train.rows() == 7);
  CHECK(a.test.rows() == 3);
  std::set<Index> seen(a.train_rows.begin(), a.train_rows.end());
  for (Index r : a.test_rows) CHECK(seen.insert(r).second);
  CHECK(seen.size() == 10);
  const TrainTest b = split(d, 0.3, RngSeed{5});
  CHECK(a.test_rows == b.test_rows);
  CHECK(a.train == b.train);

  CHECK_THROWS_AS(split(d, 0.0, RngSeed{1}), InvalidArgument);
  CHECK_THROWS_AS(split(d, 1.0, RngSeed{1}), InvalidArgument);
  CHECK_THROWS_AS(split(d, 0.01, RngSeed{1}), InvalidArgument);
  CHECK_THROWS_AS(split(make_dataset(Eigen::MatrixXd::Zero(1, 1)), 0.5, RngSeed{1}),
                  InvalidArgument);
}

TEST_CASE("split preserves the multiset of rows over 20 random splits") {
  Rng rng(RngSeed{21});
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 2 + static_cast<Index>(rng.below(40));
    Eigen::MatrixXd x(n, 2);
    for (Index i = 0; i < n; ++i) {
      x(i, 0) = static_cast<double>(rng.below(5)); // duplicates on purpose
      x(i, 1) = static_cast<double>(rng.below(3));
    }
    const Dataset d = make_dataset(x);
    const double f = rng.uniform(0.2, 0.8);
    const TrainTest tt = split(d, f, RngSeed{rng.below(1000)});
    std::multiset<std::pair<double, double>> orig, joined;
    for (Index i = 0; i < n; ++i) orig.emplace(x(i, 0), x(i, 1));
    for (const Dataset *part : {&tt.train, &tt.test}) {
      for (Index i = 0; i < part->rows(); ++i) {
        joined.emplace(part->features(i, 0), part->features(i, 1));
      }
    }
    CHECK(orig == joined);
    CHECK(tt.test.rows() == static_cast<Index>(std::llround(f * static_cast<double>(n))));
  }
}

TEST_CASE("dataset invariants") {
  CHECK_THROWS_AS(make_dataset(Eigen::MatrixXd::Ones(3, 2), Eigen::Vector3d(0, 1, 2), 2),
                  InvalidArgument);
  Dataset d = make_dataset(Eigen::MatrixXd::Ones(3, 2), Eigen::Vector3d(0, 1, 2), 3);
  CHECK_NOTHROW(d.validate());
  d.weights = Eigen::Vector3d(0, 0, 0);
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
  d.weights = Eigen::Vector3d(0, 1, 0);
  CHECK_NOTHROW(d.validate());
  d.covariates.push_back({"age", Eigen::VectorXd::Ones(2)});
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
}

TEST_CASE("rng streams are reproducible and derived streams differ") {
  Rng a(RngSeed{42}), b(RngSeed{42});
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
  CHECK(derive(RngSeed{1}, {0}).value != derive(RngSeed{1}, {1}).value);
  CHECK(derive(RngSeed{1}, {0, 1}).value != derive(RngSeed{1}, {1, 0}).value);
  const auto p = Rng(RngSeed{3}).permutation(50);
  std::vector<std::size_t> sorted(p);
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("rng moments") {
  Rng rng(RngSeed{8});
  const int n = 200000;
  double s = 0, s2 = 0, g = 0, bsum = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    g += rng.gamma(2.5);
    bsum += rng.beta(2, 5);
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  CHECK(std::abs(g / n - 2.5) < 0.03);
  CHECK(std::abs(bsum / n - 2.0 / 7.0) < 0.005);
}

TEST_CASE("weight vectors") {
  const WeightVector w = WeightVector::make(Eigen::Vector3d(1, 2, 3), "t");
  CHECK(w.values.mean() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w.effective_sample_size == doctest::Approx(36.0 / 14.0));
  CHECK(w.effective_sample_size <= 3.0);
  CHECK_THROWS_AS(WeightVector::make(Eigen::Vector2d(1, 0), "t"), InvalidArgument);
  CHECK_THROWS_AS(WeightVector::make(Eigen::Vector2d(1, NAN), "t"), InvalidArgument);
  const WeightVector u = WeightVector::uniform(4);
  CHECK(u.effective_sample_size == 4.0);
}

TEST_CASE("auc and rank statistics") {
  CHECK(auc(Eigen::Vector4d(0.1, 0.2, 0.3, 0.4), Eigen::Vector4d(0, 0, 1, 1)) == 1.0);
  CHECK(auc(Eigen::Vector4d(0.4, 0.3, 0.2, 0.1), Eigen::Vector4d(0, 0, 1, 1)) == 0.0);
  CHECK(auc(Eigen::Vector4d(1, 1, 1, 1), Eigen::Vector4d(0, 1, 0, 1)) == 0.5);
  const Eigen::Vector4d s(0.1, 0.2, 0.3, 0.2), l(0, 1, 0, 1);
  // positives {0.2, 0.2}, negatives {0.1, 0.3}: wins 2, losses 2 -> 0.5
  CHECK(auc(s, l) == 0.5);
  CHECK(spearman(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(10, 20, 1000)) ==
        doctest::Approx(1.0));
  CHECK(pearson(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(3, 2, 1)) == doctest::Approx(-1.0));
}
