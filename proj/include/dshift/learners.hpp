#ifndef DSHIFT_LEARNERS_HPP_
#define DSHIFT_LEARNERS_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dshift/dataset.hpp"
#include "dshift/weight_vector.hpp"

namespace dshift {

enum class Family { LinearRidge, Logistic, Polynomial, RbfKernel, BoostedStumps };
enum class Loss { Squared, LogisticLoss };

/// Learner specification.
///
/// All families minimize a weight-normalized empirical risk
///   sum_i w_i L(y_i, f(x_i)) / sum_i w_i + penalty
/// so scaling every weight by a constant leaves the fit unchanged, and integer
/// weights are equivalent to replicating rows.
///
///  - LinearRidge: squared loss, penalty regularization * |beta|^2.
///  - Logistic: logistic loss, penalty regularization / 2 * |beta|^2, Newton.
///  - Polynomial: per-feature powers 1..degree of the standardized inputs
///    with either loss. Polynomial(1) is LinearRidge/Logistic.
///  - RbfKernel: kernel ridge regression (squared loss only), ridge =
///    regularization. Classification fits the +-1 coded labels.
///  - BoostedStumps: gradient-boosted regression trees of depth max_depth
///    with Newton leaf values; regularization is the leaf L2 penalty.
///
/// Intercepts are never penalized. Inputs are standardized with the weighted
/// mean and standard deviation of the training set.
struct ModelSpec {
  Family family = Family::LinearRidge;
  Loss loss = Loss::Squared;
  double regularization = 0.0;
  int degree = 1;
  double bandwidth = 1.0;
  int rounds = 100;
  double learning_rate = 0.1;
  int max_depth = 1;

  static ModelSpec linear_ridge(double regularization = 0.0);
  static ModelSpec logistic(double regularization = 1e-4);
  static ModelSpec polynomial(int degree, double regularization = 0.0,
                              Loss loss = Loss::Squared);
  static ModelSpec rbf_kernel(double bandwidth, double ridge);
  static ModelSpec boosted_stumps(int rounds = 100, double learning_rate = 0.1,
                                  int max_depth = 1,
                                  Loss loss = Loss::LogisticLoss);

  void validate() const;

  /// Compact text form, e.g. "logistic:reg=0.001", "poly:degree=4",
  /// "rbf:bandwidth=0.5,ridge=0.001",
  /// "boost:rounds=100,lr=0.1,depth=2,loss=logistic".
  std::string to_string() const;
  static ModelSpec parse(std::string_view text);

  bool operator==(const ModelSpec &) const = default;
};

struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  Eigen::MatrixXd apply(const Eigen::MatrixXd &x) const;
};

/// Probability map p(class 1) = sigmoid(slope * decision + intercept).
struct Calibration {
  double slope = 1.0;
  double intercept = 0.0;
};

struct TreeNode {
  int feature = -1; ///< -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double evaluate(const Eigen::Ref<const Eigen::RowVectorXd> &x) const;
};

struct SolverReport {
  int iterations = 0;
  double gradient_norm = 0.0;
  double tolerance = 1e-8;
  int max_iterations = 500;
};

/// Fitted predictor.
struct Model {
  ModelSpec spec;
  int input_width = 0;
  int num_classes = 0; ///< 0 for regression
  Standardizer standardizer;

  // Linear and polynomial families: decision = intercept + basis . coefficients
  double intercept = 0.0;
  Eigen::VectorXd coefficients;

  // RbfKernel: decision = intercept + sum_j dual_j k(support_j, x)
  Eigen::MatrixXd support;
  Eigen::VectorXd dual;

  // BoostedStumps: decision = intercept + learning_rate-scaled tree outputs
  std::vector<Tree> trees;
  std::vector<double> tree_scales;
  std::vector<double> training_risk; ///< before round 1, then after each round

  std::optional<Calibration> calibration;
  SolverReport solver;

  bool is_classifier() const { return num_classes >= 2; }

  std::string to_json() const;
  static Model from_json(std::string_view text);
};

/// Fits with the dataset's weight column when present, uniform otherwise.
Model fit(const ModelSpec &spec, const Dataset &data);
Model fit(const ModelSpec &spec, const Dataset &data, const WeightVector &weights);
/// Raw nonnegative weights (zeros allowed, not all zero).
Model fit_weighted(const ModelSpec &spec, const Dataset &data,
                   const Eigen::VectorXd &weights);

/// Decision values: predictions for regression, the uncalibrated score for
/// classifiers (log-odds for logistic loss, +-1 regression for squared loss).
Eigen::VectorXd predict(const Model &model, const Eigen::MatrixXd &features);
/// n x 2 class probabilities; rows sum to one.
Eigen::MatrixXd predict_proba(const Model &model, const Eigen::MatrixXd &features);
/// Argmax of predict_proba (ties go to class 0).
Eigen::VectorXd predict_class(const Model &model, const Eigen::MatrixXd &features);

/// Fits a Platt sigmoid of the decision value by weighted maximum likelihood
/// on the holdout (holdout weight column honoured when present).
Model calibrate_platt(const Model &model, const Dataset &holdout);

struct LinearCoefficients {
  double intercept = 0.0;
  Eigen::VectorXd slopes;
};

/// Coefficients of a degree-1 linear model in the original feature units.
LinearCoefficients raw_linear_coefficients(const Model &model);

double sigmoid(double z);

} // namespace dshift

#endif /* DSHIFT_LEARNERS_HPP_ */
