#include "dshift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dshift/error.hpp"

namespace dshift {

Eigen::VectorXd ranks(const Eigen::VectorXd &x) {
  const Eigen::Index n = x.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return x(a) < x(b); });
  Eigen::VectorXd r(n);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x(order[j + 1]) == x(order[i])) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r(order[k]) = avg;
    i = j + 1;
  }
  return r;
}

double auc(const Eigen::VectorXd &scores, const Eigen::VectorXd &labels) {
  if (scores.size() != labels.size()) {
    throw InvalidArgument("auc: scores and labels differ in length");
  }
  const Eigen::VectorXd r = ranks(scores);
  double pos = 0, rank_sum = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) == 1.0) {
      pos += 1;
      rank_sum += r(i);
    }
  }
  const double neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0 || neg == 0) throw InvalidArgument("auc needs both classes");
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

double pearson(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw InvalidArgument("pearson: need two equal-length samples (n >= 2)");
  }
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double denom = std::sqrt((da * da).sum() * (db * db).sum());
  return denom > 0 ? (da * db).sum() / denom : 0.0;
}

double spearman(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
  return pearson(ranks(a), ranks(b));
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double standard_error(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double n = static_cast<double>(xs.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

} // namespace dshift
