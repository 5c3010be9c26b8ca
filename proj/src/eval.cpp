#include "dshift/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dshift/error.hpp"
#include "dshift/stats.hpp"

namespace dshift {

std::string to_string(ScoreLoss loss) {
  switch (loss) {
  case ScoreLoss::Squared: return "squared";
  case ScoreLoss::LogLoss: return "logloss";
  case ScoreLoss::ZeroOne: return "zero_one";
  }
  return "?";
}

ScoreLoss parse_score_loss(std::string_view text) {
  if (text == "squared" || text == "mse") return ScoreLoss::Squared;
  if (text == "logloss" || text == "log_loss") return ScoreLoss::LogLoss;
  if (text == "zero_one" || text == "error") return ScoreLoss::ZeroOne;
  throw InvalidArgument("unknown loss '" + std::string(text) + "'");
}

std::string to_string(Verdict v) {
  switch (v) {
  case Verdict::NoEvidenceOfShift: return "NoEvidenceOfShift";
  case Verdict::Shifted: return "Shifted";
  case Verdict::LowOverlap: return "LowOverlap";
  }
  return "?";
}

Eigen::VectorXd pointwise_loss(const Model &model, const Dataset &data,
                               ScoreLoss loss) {
  const Eigen::VectorXd &y = data.require_outputs();
  Eigen::VectorXd out(data.rows());
  if (!model.is_classifier()) {
    if (loss != ScoreLoss::Squared) {
      throw InvalidArgument(to_string(loss) + " loss needs a classifier");
    }
    out = (predict(model, data.features) - y).array().square();
    return out;
  }
  const Eigen::MatrixXd p = predict_proba(model, data.features);
  for (Index i = 0; i < data.rows(); ++i) {
    const int c = static_cast<int>(y(i));
    switch (loss) {
    case ScoreLoss::Squared:
      out(i) = (y(i) - p(i, 1)) * (y(i) - p(i, 1));
      break;
    case ScoreLoss::LogLoss:
      out(i) = -std::log(std::max(p(i, c), 1e-15));
      break;
    case ScoreLoss::ZeroOne: {
      const int guess = p(i, 1) > p(i, 0) ? 1 : 0;
      out(i) = guess == c ? 0.0 : 1.0;
      break;
    }
    }
  }
  return out;
}

namespace {

double weighted_mean(const Eigen::VectorXd &values, const Eigen::VectorXd &w) {
  const double total = w.sum();
  if (!(total > 0)) throw InvalidArgument("weights sum to zero");
  return values.dot(w) / total;
}

Eigen::VectorXd take(const Eigen::VectorXd &v, const std::vector<Index> &rows) {
  Eigen::VectorXd out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = v(rows[i]);
  return out;
}

CvResult run_cv(const ModelSpec &spec, const Dataset &data, int k, RngSeed seed,
                ScoreLoss loss, const Eigen::VectorXd &train_w,
                const Eigen::VectorXd &score_w) {
  CvResult out;
  out.folds = make_folds(data.rows(), k, seed);
  for (int f = 0; f < k; ++f) {
    const auto train_rows = out.folds.train_rows(f);
    const auto &test_rows = out.folds.test_rows[static_cast<std::size_t>(f)];
    Dataset train = data.select_rows(train_rows);
    train.weights.reset();
    Dataset test = data.select_rows(test_rows);
    const Model m = fit_weighted(spec, train, take(train_w, train_rows));
    const Eigen::VectorXd l = pointwise_loss(m, test, loss);
    out.scores.push_back(weighted_mean(l, take(score_w, test_rows)));
  }
  return out;
}

} // namespace

double risk(const Model &model, const Dataset &data, ScoreLoss loss) {
  return weighted_mean(pointwise_loss(model, data, loss),
                       Eigen::VectorXd::Ones(data.rows()));
}

double risk(const Model &model, const Dataset &data, ScoreLoss loss,
            const WeightVector &weights) {
  if (weights.size() != data.rows()) {
    throw InvalidArgument("weights are not aligned with the dataset rows");
  }
  return weighted_mean(pointwise_loss(model, data, loss), weights.values);
}

std::vector<Index> FoldPlan::train_rows(int fold) const {
  std::vector<Index> rows;
  for (int f = 0; f < k; ++f) {
    if (f == fold) continue;
    const auto &t = test_rows[static_cast<std::size_t>(f)];
    rows.insert(rows.end(), t.begin(), t.end());
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

FoldPlan make_folds(Index n, int k, RngSeed seed) {
  if (k < 2) throw InvalidArgument("cross-validation needs k >= 2");
  if (k > n) {
    throw InvalidArgument("k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
  }
  Rng rng(seed);
  const auto perm = rng.permutation(static_cast<std::size_t>(n));
  FoldPlan plan;
  plan.k = k;
  plan.test_rows.resize(static_cast<std::size_t>(k));
  const Index base = n / k, extra = n % k;
  Index pos = 0;
  for (int f = 0; f < k; ++f) {
    const Index size = base + (f < extra ? 1 : 0);
    auto &rows = plan.test_rows[static_cast<std::size_t>(f)];
    for (Index i = 0; i < size; ++i) {
      rows.push_back(static_cast<Index>(perm[static_cast<std::size_t>(pos++)]));
    }
    std::sort(rows.begin(), rows.end());
  }
  return plan;
}

double CvResult::mean() const { return dshift::mean(scores); }

CvResult cross_validate(const ModelSpec &spec, const Dataset &data, int k,
                        RngSeed seed, ScoreLoss loss,
                        const std::optional<WeightVector> &train_weights) {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(data.rows());
  if (train_weights && train_weights->size() != data.rows()) {
    throw InvalidArgument("weights are not aligned with the dataset rows");
  }
  return run_cv(spec, data, k, seed, loss,
                train_weights ? train_weights->values : ones, ones);
}

CvResult importance_weighted_cv(const ModelSpec &spec, const Dataset &data,
                                const WeightVector &weights, int k, RngSeed seed,
                                ScoreLoss loss) {
  if (weights.size() != data.rows()) {
    throw InvalidArgument("weights are not aligned with the dataset rows");
  }
  return run_cv(spec, data, k, seed, loss, weights.values, weights.values);
}

std::vector<GroupSplit> group_kfold(const Dataset &data) {
  if (!data.groups) throw InvalidArgument("dataset has no group column");
  std::map<std::string, std::vector<Index>> members;
  for (Index i = 0; i < data.rows(); ++i) {
    members[(*data.groups)[static_cast<std::size_t>(i)]].push_back(i);
  }
  if (members.size() < 2) {
    throw InvalidArgument("group k-fold needs at least 2 distinct groups");
  }
  std::vector<GroupSplit> splits;
  for (const auto &[name, rows] : members) {
    GroupSplit s;
    s.group = name;
    s.test_rows = rows;
    for (const auto &[other, other_rows] : members) {
      if (other != name) s.train_rows.insert(s.train_rows.end(), other_rows.begin(), other_rows.end());
    }
    std::sort(s.train_rows.begin(), s.train_rows.end());
    splits.push_back(std::move(s));
  }
  return splits;
}

SubgroupReport subgroup_report(const Model &model, const Dataset &data,
                               std::string_view covariate, const Bins &bins,
                               ScoreLoss loss) {
  if (data.rows() == 0) throw InvalidArgument("subgroup report on empty data");
  const Eigen::VectorXd &c = data.covariate(covariate);
  std::vector<double> edges = bins.edges;
  if (edges.empty()) {
    if (bins.count < 1) throw InvalidArgument("need at least one bin");
    const double lo = c.minCoeff(), hi = c.maxCoeff();
    for (int b = 0; b <= bins.count; ++b) {
      edges.push_back(lo + (hi - lo) * b / bins.count);
    }
  }
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end())) {
    throw InvalidArgument("bin edges must be ascending with at least 2 entries");
  }
  const auto nbins = edges.size() - 1;
  auto bin_of = [&](double v) {
    const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, v);
    return static_cast<std::size_t>(it - (edges.begin() + 1));
  };
  const Eigen::VectorXd l = pointwise_loss(model, data, loss);
  std::optional<Eigen::VectorXd> correct;
  if (model.is_classifier()) {
    correct = (1.0 - pointwise_loss(model, data, ScoreLoss::ZeroOne).array()).matrix();
  }
  std::vector<double> sum(nbins, 0.0), hits(nbins, 0.0);
  std::vector<Index> count(nbins, 0);
  for (Index i = 0; i < data.rows(); ++i) {
    const auto b = bin_of(c(i));
    sum[b] += l(i);
    ++count[b];
    if (correct) hits[b] += (*correct)(i);
  }
  SubgroupReport rep;
  rep.covariate = std::string(covariate);
  rep.loss = loss;
  rep.overall_risk = l.mean();
  std::vector<double> risks;
  for (std::size_t b = 0; b < nbins; ++b) {
    if (count[b] == 0) continue;
    SubgroupRow row;
    row.lo = edges[b];
    row.hi = edges[b + 1];
    row.count = count[b];
    row.risk = sum[b] / static_cast<double>(count[b]);
    if (correct) row.accuracy = hits[b] / static_cast<double>(count[b]);
    risks.push_back(row.risk);
    rep.bins.push_back(row);
  }
  rep.worst_group_risk = *std::max_element(risks.begin(), risks.end());
  const double m = mean(risks);
  double var = 0.0;
  for (double r : risks) var += (r - m) * (r - m);
  rep.group_risk_variance = var / static_cast<double>(risks.size());
  return rep;
}

DetectorResult shift_detector(const Dataset &source, const Dataset &target,
                              const FeatureView &view, RngSeed seed,
                              const DetectorOptions &options) {
  if (source.rows() < 2 || target.rows() < 2) {
    throw InvalidArgument("shift detection needs at least 2 rows on each side");
  }
  const Eigen::MatrixXd zs = view.extract(source);
  const Eigen::MatrixXd zt = view.extract(target);
  if (zs.cols() != zt.cols()) throw InvalidArgument("views differ in width");
  Eigen::MatrixXd pooled(zs.rows() + zt.rows(), zs.cols());
  pooled << zs, zt;
  Eigen::VectorXd t(pooled.rows());
  t << Eigen::VectorXd::Zero(zs.rows()), Eigen::VectorXd::Ones(zt.rows());
  const Dataset all = make_dataset(pooled, t, 2);

  const int k = static_cast<int>(std::min<Index>(options.folds, all.rows()));
  const FoldPlan plan = make_folds(all.rows(), k, seed);
  Eigen::VectorXd score(all.rows());
  for (int f = 0; f < k; ++f) {
    const Dataset train = all.select_rows(plan.train_rows(f));
    const auto &test_rows = plan.test_rows[static_cast<std::size_t>(f)];
    const Model m = fit(options.classifier, train);
    const Eigen::VectorXd d = predict(m, all.select_rows(test_rows).features);
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      score(test_rows[i]) = d(static_cast<Index>(i));
    }
  }
  DetectorResult r;
  r.auc = auc(score, t);
  r.verdict = r.auc > options.low_overlap_auc ? Verdict::LowOverlap
              : r.auc >= options.shifted_auc  ? Verdict::Shifted
                                              : Verdict::NoEvidenceOfShift;
  return r;
}

} // namespace dshift
