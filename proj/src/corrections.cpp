#include "dshift/corrections.hpp"

#include <algorithm>
#include <cmath>

#include "dshift/error.hpp"

namespace dshift {

void PriorPair::validate() const {
  if (source_priors.size() != target_priors.size() || source_priors.size() < 2) {
    throw InvalidArgument("prior vectors must have equal length >= 2");
  }
  for (const auto *p : {&source_priors, &target_priors}) {
    if ((p->array() < 0).any() || !p->allFinite()) {
      throw InvalidArgument("priors must be finite and nonnegative");
    }
    if (std::abs(p->sum() - 1.0) > 1e-12) {
      throw InvalidArgument("priors must sum to 1");
    }
  }
}

Eigen::MatrixXd label_shift_correct(const Eigen::MatrixXd &probs,
                                    const PriorPair &priors) {
  priors.validate();
  if (probs.cols() != priors.source_priors.size()) {
    throw InvalidArgument("probability matrix width does not match priors");
  }
  Eigen::MatrixXd out(probs.rows(), probs.cols());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    if (std::abs(probs.row(i).sum() - 1.0) > 1e-9 || (probs.row(i).array() < 0).any()) {
      throw InvalidArgument("row " + std::to_string(i) + " is not a distribution");
    }
    double total = 0.0;
    for (Eigen::Index k = 0; k < probs.cols(); ++k) {
      const double p = probs(i, k);
      if (priors.source_priors(k) == 0.0) {
        if (p > 0.0) {
          throw InvalidArgument("class " + std::to_string(k) +
                                " has zero source prior but positive probability");
        }
        out(i, k) = 0.0;
        continue;
      }
      out(i, k) = p * priors.target_priors(k) / priors.source_priors(k);
      total += out(i, k);
    }
    if (!(total > 0.0)) {
      throw InvalidArgument("row " + std::to_string(i) +
                            " has no mass under the target priors");
    }
    out.row(i) /= total;
  }
  return out;
}

PriorEstimate estimate_priors(const std::vector<int> &labels, int num_classes) {
  if (labels.empty()) throw InvalidArgument("estimate_priors needs labels");
  int k = num_classes;
  const int top = *std::max_element(labels.begin(), labels.end());
  if (*std::min_element(labels.begin(), labels.end()) < 0) {
    throw InvalidArgument("negative class label");
  }
  if (k <= 0) k = std::max(2, top + 1);
  if (top >= k) throw InvalidArgument("label exceeds number of classes");
  PriorEstimate est;
  est.priors = Eigen::VectorXd::Zero(k);
  for (int y : labels) est.priors(y) += 1.0;
  est.priors /= static_cast<double>(labels.size());
  est.degenerate = (est.priors.array() > 0).count() < 2;
  return est;
}

Dataset RegressOutTransform::apply(const Dataset &data) const {
  if (intercepts.size() != data.cols()) {
    throw InvalidArgument("regress-out transform width does not match data");
  }
  const Eigen::VectorXd &c = data.covariate(covariate);
  Dataset out = data;
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    out.features.col(j).array() -= intercepts(j) + slopes(j) * c.array();
  }
  return out;
}

RegressOutResult regress_out(const Dataset &data, std::string_view covariate_name) {
  const Eigen::VectorXd &c = data.covariate(covariate_name);
  const double n = static_cast<double>(data.rows());
  if (data.rows() < 2) throw InvalidArgument("regress_out needs at least 2 rows");
  const double cbar = c.mean();
  const Eigen::ArrayXd cc = c.array() - cbar;
  const double sxx = (cc * cc).sum();
  if (!(sxx > 1e-12 * std::max(1.0, (c.array() * c.array()).sum()))) {
    throw NumericalError("covariate '" + std::string(covariate_name) +
                         "' is constant; regression is singular");
  }
  RegressOutResult r;
  r.transform.covariate = std::string(covariate_name);
  r.transform.slopes.resize(data.cols());
  r.transform.intercepts.resize(data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    const double xbar = data.features.col(j).sum() / n;
    const double slope = (cc * (data.features.col(j).array() - xbar)).sum() / sxx;
    r.transform.slopes(j) = slope;
    r.transform.intercepts(j) = xbar - slope * cbar;
  }
  r.data = r.transform.apply(data);
  return r;
}

} // namespace dshift
