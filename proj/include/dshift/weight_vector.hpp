#ifndef DSHIFT_WEIGHT_VECTOR_HPP_
#define DSHIFT_WEIGHT_VECTOR_HPP_

#include <string>

#include <Eigen/Dense>

namespace dshift {

enum class Normalization { None, MeanOne };

/// (sum w)^2 / sum w^2.
double effective_sample_size(const Eigen::VectorXd &w);

/// Per-example importance weights aligned to the rows of a source dataset.
///
/// Invariants: every value finite and strictly positive; MeanOne implies
/// mean(values) == 1 up to rounding; ESS lies in (0, n].
struct WeightVector {
  Eigen::VectorXd values;
  std::string method;
  Normalization normalization = Normalization::MeanOne;
  double effective_sample_size = 0.0;

  Eigen::Index size() const { return values.size(); }

  /// Validates, applies the normalization and computes the ESS.
  static WeightVector make(Eigen::VectorXd values, std::string method,
                           Normalization normalization = Normalization::MeanOne);
  static WeightVector uniform(Eigen::Index n);
};

} // namespace dshift

#endif /* DSHIFT_WEIGHT_VECTOR_HPP_ */
