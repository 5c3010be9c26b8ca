#ifndef DSHIFT_STATS_HPP_
#define DSHIFT_STATS_HPP_

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dshift {

/// Area under the ROC curve of `scores` for binary `labels` (1 = positive),
/// by the Mann-Whitney statistic with tied scores sharing rank.
double auc(const Eigen::VectorXd &scores, const Eigen::VectorXd &labels);

/// Average ranks (1-based), ties sharing the mean rank.
Eigen::VectorXd ranks(const Eigen::VectorXd &x);

double pearson(const Eigen::VectorXd &a, const Eigen::VectorXd &b);
double spearman(const Eigen::VectorXd &a, const Eigen::VectorXd &b);

double mean(std::span<const double> xs);
/// Standard error of the mean (sample sd / sqrt(n)); 0 for n < 2.
double standard_error(std::span<const double> xs);

} // namespace dshift

#endif /* DSHIFT_STATS_HPP_ */
