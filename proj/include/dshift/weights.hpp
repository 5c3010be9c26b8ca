#ifndef DSHIFT_WEIGHTS_HPP_
#define DSHIFT_WEIGHTS_HPP_

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dshift/dataset.hpp"
#include "dshift/learners.hpp"
#include "dshift/sim.hpp"
#include "dshift/weight_vector.hpp"

namespace dshift {

/// Columns a ratio is estimated on: the features (XOnly), features plus the
/// output (XY), and optionally extra named covariates.
struct FeatureView {
  bool features = true;
  bool output = false;
  std::vector<std::string> covariates;

  static FeatureView x_only() { return {}; }
  static FeatureView xy() { return {true, true, {}}; }
  static FeatureView covariates_only(std::vector<std::string> names) {
    return {false, false, std::move(names)};
  }

  Eigen::MatrixXd extract(const Dataset &data) const;
  /// "x", "xy", "x+Z", "covariate:age", "covariate:age+Z", ...
  std::string to_string() const;
  static FeatureView parse(std::string_view text);
};

/// Fitted density-ratio model evaluable at arbitrary rows of its view.
struct RatioModel {
  enum class Method { Discriminative, Ulsif };
  Method method = Method::Discriminative;
  FeatureView view;

  // Discriminative: w = P(T=1|z) / P(T=0|z) * prior_ratio, probabilities
  // clipped to [clip, 1 - clip].
  Model classifier;
  double prior_ratio = 1.0;
  double clip = 1e-6;

  // uLSIF: w = sum_l alpha_l exp(-|z - c_l|^2 / (2 sigma^2)).
  Eigen::MatrixXd centers;
  double sigma = 1.0;
  Eigen::VectorXd alpha;

  /// Unnormalized ratio values at the rows of `view_matrix`.
  Eigen::VectorXd evaluate(const Eigen::MatrixXd &view_matrix) const;
  Eigen::VectorXd evaluate(const Dataset &data) const {
    return evaluate(view.extract(data));
  }
};

/// Exact p_t / p_s per row from scenario truth. Throws PositivityError where
/// the source density is zero.
WeightVector true_weights(const GroundTruth &truth, const Dataset &data,
                          Normalization normalization = Normalization::None);

/// w_i = overall_rate / selection_probs_i.
WeightVector ipw_from_selection(const Eigen::VectorXd &selection_probs,
                                double overall_rate);

struct DiscriminativeOptions {
  double holdout_fraction = 0.2;
  double clip = 1e-6;
  double low_overlap_auc = 0.95;
  Normalization normalization = Normalization::MeanOne;
};

struct DiscriminativeResult {
  WeightVector weights;
  RatioModel model;
  /// AUC of the calibrated source-vs-target classifier on the held-out slice.
  double detector_auc = 0.5;
  bool low_overlap = false;
  Index clipped = 0;
};

/// Fits a calibrated source (T=0) vs target (T=1) classifier on the pooled
/// rows of the view and converts its probabilities into weights at the
/// source rows. The target may lack outputs unless the view needs them.
DiscriminativeResult estimate_weights_discriminative(
    const Dataset &source, const Dataset &target, const FeatureView &view,
    const ModelSpec &classifier, RngSeed seed,
    const DiscriminativeOptions &options = {});

enum class KernelType { Rbf, Linear };

struct KmmOptions {
  KernelType kernel = KernelType::Rbf;
  /// <= 0 selects the median pairwise distance of the pooled sample.
  double bandwidth = 0.0;
  double upper_bound = 1000.0;
  /// < 0 selects (sqrt(n_s) - 1) / sqrt(n_s).
  double slack = -1.0;
  int max_iterations = 10000;
  double tolerance = 1e-8;
};

struct KmmResult {
  WeightVector weights;
  /// Squared kernel-mean discrepancy at the returned weights.
  double objective = 0.0;
  int iterations = 0;
  double bandwidth = 0.0;
};

/// Kernel mean matching: minimizes the squared RKHS distance between the
/// w-weighted source mean embedding and the target mean embedding subject
/// to 0 <= w_i <= B and |mean(w) - 1| <= eps, by accelerated projected
/// gradient (step 1/L, momentum restarted when J increases).
KmmResult estimate_weights_kmm(const Eigen::MatrixXd &source_x,
                               const Eigen::MatrixXd &target_x,
                               const KmmOptions &options = {});

/// J(w) = |1/n_s sum_i w_i phi(s_i) - 1/n_t sum_j phi(t_j)|^2.
double kmm_objective(const Eigen::MatrixXd &source_x,
                     const Eigen::MatrixXd &target_x, const Eigen::VectorXd &w,
                     KernelType kernel, double bandwidth);

struct UlsifOptions {
  Index basis_centers = 100;
  double ridge = 1e-3;
  /// <= 0 selects the median pairwise distance of the pooled sample.
  double bandwidth = 0.0;
  RngSeed seed{};
};

struct UlsifResult {
  WeightVector weights;
  RatioModel model;
};

/// Unconstrained least-squares importance fitting with Gaussian basis
/// functions centered on target points: alpha = (H + ridge I)^-1 h, then
/// negative coefficients are clamped to zero.
UlsifResult estimate_weights_ulsif(const Eigen::MatrixXd &source_x,
                                   const Eigen::MatrixXd &target_x,
                                   const UlsifOptions &options = {});

/// Median Euclidean distance between distinct pairs of rows of the stacked
/// samples (at most 500 rows, chosen deterministically).
double median_pairwise_distance(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b);

/// Values w_i^lambda, renormalized per the vector's mode.
WeightVector flatten_weights(const WeightVector &w, double lambda);

/// n_out draws with replacement, P(row i) proportional to w_i.
Dataset resample_by_weights(const Dataset &data, const WeightVector &w,
                            Index n_out, RngSeed seed);

} // namespace dshift

#endif /* DSHIFT_WEIGHTS_HPP_ */
