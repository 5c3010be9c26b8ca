#include "dshift/weight_vector.hpp"

#include <cmath>

#include "dshift/error.hpp"

namespace dshift {

double effective_sample_size(const Eigen::VectorXd &w) {
  const double s = w.sum();
  const double s2 = w.squaredNorm();
  return s2 > 0 ? s * s / s2 : 0.0;
}

WeightVector WeightVector::make(Eigen::VectorXd values, std::string method,
                                Normalization normalization) {
  if (values.size() == 0) throw InvalidArgument("empty weight vector");
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values(i))) {
      throw InvalidArgument("non-finite weight at row " + std::to_string(i));
    }
    if (values(i) <= 0.0) {
      throw InvalidArgument("non-positive weight at row " + std::to_string(i));
    }
  }
  if (normalization == Normalization::MeanOne) {
    values /= values.mean();
  }
  WeightVector w;
  w.effective_sample_size = dshift::effective_sample_size(values);
  w.values = std::move(values);
  w.method = std::move(method);
  w.normalization = normalization;
  return w;
}

WeightVector WeightVector::uniform(Eigen::Index n) {
  return make(Eigen::VectorXd::Ones(n), "uniform", Normalization::MeanOne);
}

} // namespace dshift
