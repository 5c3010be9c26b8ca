#ifndef DSHIFT_CORRECTIONS_HPP_
#define DSHIFT_CORRECTIONS_HPP_

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dshift/dataset.hpp"

namespace dshift {

/// Class priors of the population a model was trained on and of the one it
/// is applied to.
struct PriorPair {
  Eigen::VectorXd source_priors;
  Eigen::VectorXd target_priors;

  void validate() const;
  PriorPair reversed() const { return {target_priors, source_priors}; }
};

/// p'_k proportional to p_k * target_k / source_k, rows renormalized.
Eigen::MatrixXd label_shift_correct(const Eigen::MatrixXd &probs,
                                    const PriorPair &priors);

struct PriorEstimate {
  Eigen::VectorXd priors;
  /// Set when fewer than two classes were observed.
  bool degenerate = false;
};

/// Empirical class frequencies over `num_classes` classes (0 = infer from
/// the largest label).
PriorEstimate estimate_priors(const std::vector<int> &labels, int num_classes = 0);

/// OLS fit of each feature on (1, covariate).
struct RegressOutTransform {
  std::string covariate;
  Eigen::VectorXd intercepts;
  Eigen::VectorXd slopes;

  /// Replaces every feature column by its residual under the stored fit.
  Dataset apply(const Dataset &data) const;
};

struct RegressOutResult {
  Dataset data;
  RegressOutTransform transform;
};

/// Fits the residualizing transform on `data` and applies it.
RegressOutResult regress_out(const Dataset &data, std::string_view covariate_name);

} // namespace dshift

#endif /* DSHIFT_CORRECTIONS_HPP_ */
