#ifndef DSHIFT_REPORT_HPP_
#define DSHIFT_REPORT_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dshift/eval.hpp"

namespace dshift {

/// One metric value in one scope. Scopes: "overall" (test set), "cv" and
/// "fold:<i>" (cross-validation), "bin:<covariate>:<lo>:<hi>" and "bins"
/// (subgroups), "group:<name>" and "groups" (held-out groups), "detector".
struct ReportRecord {
  std::string learner;
  std::string strategy = "baseline"; ///< baseline | reweighting | regress-out | ...
  std::string train;                 ///< training population
  std::string test;                  ///< test population
  std::string scope = "overall";
  std::string metric;
  double value = 0.0;
  double se = 0.0;  ///< standard error across repetitions, 0 for single runs
  Index count = 1;  ///< repetitions (or rows, for bins) behind `value`

  bool operator==(const ReportRecord &) const = default;
};

struct EvalReport {
  std::vector<ReportRecord> records;

  /// Common labels stamped on records added through the helpers below.
  ReportRecord stamp;

  void add(std::string scope, std::string metric, double value);
  void add_folds(const CvResult &cv, std::string_view metric);
  void add_subgroups(const SubgroupReport &rep);
  /// Per-group risks plus their maximum and population variance.
  void add_groups(const std::vector<std::pair<std::string, double>> &risks,
                  std::string_view metric);
  void add_detector(const DetectorResult &det);

  /// First record matching (scope, metric), or nullopt.
  std::optional<double> find(std::string_view scope, std::string_view metric) const;

  /// One JSON object per line.
  std::string to_jsonl() const;
  static EvalReport from_jsonl(std::string_view text);
  /// learner,strategy,train,test,scope,metric,value,se,count
  std::string to_csv() const;

  bool operator==(const EvalReport &o) const { return records == o.records; }
};

} // namespace dshift

#endif /* DSHIFT_REPORT_HPP_ */
