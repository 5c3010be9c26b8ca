#ifndef DSHIFT_DATASET_HPP_
#define DSHIFT_DATASET_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dshift/rng.hpp"

namespace dshift {

using Index = Eigen::Index;

struct NamedColumn {
  std::string name;
  Eigen::VectorXd values;

  bool operator==(const NamedColumn &other) const {
    return name == other.name && values == other.values;
  }
};

/// Tabular sample: features, optional outputs, named covariates, an optional
/// group (site) column and optional per-row weights.
///
/// Values are treated as immutable once validated; every transformation in
/// the toolkit returns a new Dataset.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<std::string> column_names;

  std::optional<Eigen::VectorXd> outputs;
  std::string output_name = "y";
  /// 0 for regression, K >= 2 for classification with labels in {0..K-1}.
  int num_classes = 0;

  std::vector<NamedColumn> covariates;

  std::optional<std::vector<std::string>> groups;
  std::string group_name = "group";

  std::optional<Eigen::VectorXd> weights;
  std::string weight_name = "weight";

  Index rows() const { return features.rows(); }
  Index cols() const { return features.cols(); }
  bool is_classification() const { return num_classes >= 2; }

  /// Throws InvalidArgument if any invariant is violated.
  void validate() const;

  bool has_covariate(std::string_view name) const;
  const Eigen::VectorXd &covariate(std::string_view name) const;
  /// Adds or replaces a covariate column.
  void set_covariate(std::string name, Eigen::VectorXd values);

  /// Outputs as integer class labels; requires classification.
  std::vector<int> labels() const;
  const Eigen::VectorXd &require_outputs() const;

  Dataset select_rows(std::span<const Index> rows) const;

  bool operator==(const Dataset &other) const;
};

/// Builds a dataset with generated column names x0..x{d-1}.
Dataset make_dataset(Eigen::MatrixXd features,
                     std::optional<Eigen::VectorXd> outputs = std::nullopt,
                     int num_classes = 0);

/// Row-stacks two datasets with identical schemas.
Dataset concat_rows(const Dataset &a, const Dataset &b);

struct TrainTest {
  Dataset train;
  Dataset test;
  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
};

/// Random disjoint partition with |test| = round(test_fraction * n). Row order
/// within each side follows the original order.
TrainTest split(const Dataset &data, double test_fraction, RngSeed seed);

} // namespace dshift

#endif /* DSHIFT_DATASET_HPP_ */
