#include <filesystem>

#include "doctest.h"

#include "dshift/eval.hpp"
#include "dshift/experiment.hpp"

using namespace dshift;

namespace {

ExperimentConfig small(std::string_view preset, Index n, int reps) {
  ExperimentConfig c = ExperimentConfig::preset(preset);
  c.scenario.n_source = c.scenario.n_target = n;
  c.repetitions = reps;
  c.threads = 1;
  return c;
}

void check_same_setup(const ExperimentConfig &a, const ExperimentConfig &b) {
  CHECK(a.learners == b.learners);
  CHECK(a.strategies == b.strategies);
  CHECK(a.tasks == b.tasks);
  CHECK(a.population_names == b.population_names);
  CHECK(a.folds == b.folds);
  CHECK(a.repetitions == b.repetitions);
  CHECK(a.scenario.kind == b.scenario.kind);
  CHECK(a.scenario.n_source == b.scenario.n_source);
  CHECK(a.scenario.n_target == b.scenario.n_target);
}

} // namespace

TEST_CASE("shipped preset files match the built-in presets") {
  for (const auto &name : ScenarioConfig::preset_names()) {
    CAPTURE(name);
    const auto path = std::filesystem::path(DSHIFT_SOURCE_DIR) / "presets" / (name + ".conf");
    REQUIRE(std::filesystem::exists(path));
    check_same_setup(ExperimentConfig::from_settings(load_settings(path)),
                     ExperimentConfig::preset(name));
  }
}

TEST_CASE("settings parsing") {
  const auto s = parse_settings("# comment\n a = 1 \nb=x # trailing\n\na = 2\n");
  CHECK(s.at("a") == "2");
  CHECK(s.at("b") == "x");
  CHECK_THROWS_AS(parse_settings("novalue\n"), InvalidArgument);

  ExperimentConfig c = ExperimentConfig::preset("fig1");
  CHECK_THROWS_WITH_AS(c.apply({{"folds", "abc"}}), doctest::Contains("folds"), InvalidArgument);
  CHECK_THROWS_WITH_AS(c.apply({{"bogus", "1"}}), doctest::Contains("bogus"), InvalidArgument);
  CHECK_THROWS_AS(c.apply({{"tasks", "young->middle"}}), InvalidArgument);
  c.apply({{"target_priors", "0.2,0.8"}, {"n", "50"}});
  CHECK(c.scenario.label.target_priors == std::vector<double>{0.2, 0.8});
  CHECK(c.scenario.n_source == 50);
  CHECK(StrategySpec::parse("reweighting:discriminative:xy+Z").to_string() ==
        "reweighting:discriminative:xy+Z");
  CHECK(StrategySpec::parse("regress-out:age").label() == "regress-out");
  CHECK_THROWS_AS(StrategySpec::parse("reweighting:magic"), InvalidArgument);
}

TEST_CASE("one summary per learner x strategy x task") {
  ExperimentConfig c = small("fig1", 200, 2);
  c.strategies = {StrategySpec::parse("baseline"), StrategySpec::parse("reweighting:truth"),
                  StrategySpec::parse("regress-out:age")};
  c.tasks = {c.parse_task("young->young"), c.parse_task("young->old"),
             c.parse_task("old->young"), c.parse_task("old->old")};
  c.learners = {ModelSpec::logistic(), ModelSpec::boosted_stumps(10, 0.3, 1)};
  c.folds = 3;
  const ExperimentResult r = run_experiment(c);
  CHECK(r.cells.size() == 24);
  CHECK(r.metrics == std::vector<std::string>{"accuracy", "logloss", "brier"});
  for (const auto &cell : r.cells) {
    CHECK(cell.per_rep[0].size() == 2);
    CHECK(cell.fold_means[0].size() == 3);
  }
  // Same-population reweighting reduces to the baseline.
  const std::string lr = ModelSpec::logistic().to_string();
  const auto &b = r.cell(lr, "baseline", "old", "old");
  const auto &w = r.cell(lr, "reweighting:truth", "old", "old");
  CHECK(b.per_rep == w.per_rep);
  CHECK_THROWS_AS(r.cell(lr, "baseline", "old", "middle"), InvalidArgument);
}

TEST_CASE("baseline within one population equals plain cross-validation") {
  ExperimentConfig c = small("fig4", 120, 3);
  c.strategies = {StrategySpec::parse("baseline")};
  c.tasks = {c.parse_task("source->source")};
  const ExperimentResult r = run_experiment(c);
  for (std::size_t li = 0; li < c.learners.size(); ++li) {
    const auto &cell = r.cells[li];
    for (int rep = 0; rep < 3; ++rep) {
      const Dataset src = populations(c, rep)[0];
      const CvResult cv = cross_validate(c.learners[li], src, c.folds,
                                         fold_seed(c, rep, Population::Source), ScoreLoss::Squared);
      CHECK(cell.per_rep[0][static_cast<std::size_t>(rep)] == doctest::Approx(cv.mean()).epsilon(1e-12));
    }
  }
}

TEST_CASE("results do not depend on the thread count") {
  ExperimentConfig c = small("fig5", 150, 5);
  const std::string one = run_experiment(c).to_csv();
  c.threads = 3;
  CHECK(run_experiment(c).to_csv() == one);
  c.seed = RngSeed{2};
  CHECK(run_experiment(c).to_csv() != one);
}

TEST_CASE("a failing cell is reported by name") {
  ExperimentConfig c = small("fig4", 60, 1);
  c.strategies = {StrategySpec::parse("regress-out:age")};
  CHECK_THROWS_WITH_AS(run_experiment(c), doctest::Contains("regress-out:age"), CellError);
}

TEST_CASE("report files") {
  const ExperimentResult r = run_experiment(small("fig5", 100, 2));
  const auto dir = std::filesystem::temp_directory_path() / "dshift_exp_report";
  std::filesystem::remove_all(dir);
  write_experiment(r, dir);
  CHECK(std::filesystem::exists(dir / "report.csv"));
  const EvalReport rep = r.to_report();
  CHECK(rep.find("overall", "accuracy").has_value());
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(write_experiment(r, "/proc/dshift_cannot_write"), IoError);
}
