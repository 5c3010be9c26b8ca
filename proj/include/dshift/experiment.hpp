#ifndef DSHIFT_EXPERIMENT_HPP_
#define DSHIFT_EXPERIMENT_HPP_

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dshift/dataset.hpp"
#include "dshift/error.hpp"
#include "dshift/learners.hpp"
#include "dshift/report.hpp"
#include "dshift/sim.hpp"
#include "dshift/weights.hpp"

namespace dshift {

/// A failure inside one experiment cell; the message names the cell.
class CellError : public Error {
public:
  using Error::Error;
};

/// What is done to the training fold before fitting.
///
/// Text forms: "baseline", "reweighting:truth",
/// "reweighting:discriminative[:<view>]", "reweighting:kmm[:<view>]",
/// "reweighting:ulsif[:<view>]", "regress-out:<covariate>",
/// "prior-correction".
struct StrategySpec {
  enum class Kind { Baseline, Reweighting, RegressOut, PriorCorrection };
  Kind kind = Kind::Baseline;
  std::string method;    ///< reweighting: truth | discriminative | kmm | ulsif
  FeatureView view;      ///< reweighting by estimation
  std::string covariate; ///< regress-out

  /// baseline | reweighting | regress-out | prior-correction
  std::string label() const;
  std::string to_string() const;
  static StrategySpec parse(std::string_view text);
  bool operator==(const StrategySpec &o) const {
    return to_string() == o.to_string();
  }
};

enum class Population { Source = 0, Target = 1 };

struct Task {
  Population train = Population::Source;
  Population test = Population::Target;
  bool operator==(const Task &) const = default;
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  /// When set, populations are read from these files instead of simulated.
  std::optional<std::filesystem::path> source_csv;
  std::optional<std::filesystem::path> target_csv;
  std::string schema;
  int num_classes = 0;

  std::vector<ModelSpec> learners;
  std::vector<StrategySpec> strategies;
  std::vector<Task> tasks;
  /// Display names of the source and target populations.
  std::array<std::string, 2> population_names{"source", "target"};
  ModelSpec weight_classifier = ModelSpec::logistic();

  int folds = 5;
  int repetitions = 1;
  RngSeed seed{1};
  /// 0 uses the hardware concurrency.
  int threads = 0;
  std::filesystem::path out_dir = ".";

  void validate() const;

  /// Applies `key = value` settings on top of this config. Unknown keys and
  /// malformed values throw InvalidArgument naming the key.
  void apply(const std::map<std::string, std::string> &settings);

  /// `preset` (if any) selects the starting point, then every other key
  /// overrides it.
  static ExperimentConfig from_settings(const std::map<std::string, std::string> &settings);
  static ExperimentConfig preset(std::string_view name);

  std::string task_name(const Task &t) const;
  Task parse_task(std::string_view text) const;
};

/// Flat "key = value" text; '#' starts a comment; later keys win.
std::map<std::string, std::string> parse_settings(std::string_view text);
std::map<std::string, std::string> load_settings(const std::filesystem::path &path);

/// Seeds used by repetition `rep`; exposed so callers can rebuild any cell.
RngSeed scenario_seed(const ExperimentConfig &config, int rep);
RngSeed fold_seed(const ExperimentConfig &config, int rep, Population pop);

/// Both populations for one repetition.
std::array<Dataset, 2> populations(const ExperimentConfig &config, int rep);

struct CellSummary {
  std::string learner;
  std::string strategy;
  std::string train;
  std::string test;
  /// Per metric: value in each repetition (mean over folds).
  std::vector<std::vector<double>> per_rep;
  /// Per metric, per fold: mean over repetitions.
  std::vector<std::vector<double>> fold_means;
  std::vector<double> mean;
  std::vector<double> se;
};

struct ExperimentResult {
  std::vector<std::string> metrics;
  std::vector<CellSummary> cells;
  int repetitions = 0;

  const CellSummary &cell(std::string_view learner, std::string_view strategy,
                          std::string_view train, std::string_view test) const;
  std::size_t metric_index(std::string_view metric) const;

  /// One row per cell: learner,strategy,train,test,n, then mean/se per metric.
  std::string to_csv() const;
  EvalReport to_report() const;
};

/// Runs every learner x strategy x task cell over all repetitions.
/// Repetitions run concurrently; results do not depend on the thread count.
ExperimentResult run_experiment(const ExperimentConfig &config);

/// Writes report.csv and report.txt into config.out_dir; on failure no
/// partial file is left behind.
void write_experiment(const ExperimentResult &result, const std::filesystem::path &dir);

} // namespace dshift

#endif /* DSHIFT_EXPERIMENT_HPP_ */
