// Exact invariants: replication, weight scaling, flattening, correction round trip,
// group k-fold partition.
#include <algorithm>
#include <set>

#include "acceptance.hpp"
#include "dshift/corrections.hpp"
#include "dshift/eval.hpp"

using namespace dshift;
using namespace acceptance;

namespace {

Dataset draw(Index n, bool classification, RngSeed seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = rng.normal();
    const double f = x(i, 0) - 0.5 * x(i, 1) * x(i, 1);
    y(i) = classification ? (rng.bernoulli(sigmoid(2 * f)) ? 1.0 : 0.0) : f + 0.3 * rng.normal();
  }
  return make_dataset(x, y, classification ? 2 : 0);
}

} // namespace

int main() {
  constexpr double kFitTol = 1e-6;
  constexpr double kExact = 1e-12;
  const RngSeed base{20240609};
  Reporter rep;

  const std::vector<std::pair<ModelSpec, bool>> specs = {
      {ModelSpec::linear_ridge(0.01), false},
      {ModelSpec::polynomial(3, 0.01), false},
      {ModelSpec::rbf_kernel(1.0, 0.01), false},
      {ModelSpec::boosted_stumps(25, 0.2, 2, Loss::Squared), false},
      {ModelSpec::logistic(1e-3), true},
      {ModelSpec::boosted_stumps(25, 0.2, 2), true}};
  double worst_rep = 0, worst_scale = 0;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto &[spec, cls] = specs[k];
    const Dataset d = draw(80, cls, derive(base, {k}));
    Rng rng(derive(base, {k, 1}));
    Eigen::VectorXd w(80);
    std::vector<Index> rows;
    for (Index i = 0; i < 80; ++i) {
      w(i) = static_cast<double>(rng.below(4)); // zeros drop rows
      for (int c = 0; c < static_cast<int>(w(i)); ++c) rows.push_back(i);
    }
    const Eigen::VectorXd pw = predict(fit_weighted(spec, d, w), d.features);
    const Eigen::VectorXd pr = predict(fit(spec, d.select_rows(rows)), d.features);
    const Eigen::VectorXd ps = predict(fit_weighted(spec, d, 13.0 * w), d.features);
    worst_rep = std::max(worst_rep, (pw - pr).cwiseAbs().maxCoeff());
    worst_scale = std::max(worst_scale, (pw - ps).cwiseAbs().maxCoeff());
  }
  rep.check("C9 weighted fit equals replicated fit", worst_rep < kFitTol,
            fmt("max prediction gap over 6 learners %.3g (required < 1e-6)", worst_rep));
  rep.check("C9 fit invariant to weight scaling", worst_scale < kFitTol,
            fmt("max prediction gap over 6 learners %.3g (required < 1e-6)", worst_scale));

  Rng rng(derive(base, {9}));
  Eigen::VectorXd raw(200);
  for (Index i = 0; i < 200; ++i) raw(i) = std::exp(rng.normal());
  const WeightVector w = WeightVector::make(raw, "t");
  const double f0 = (flatten_weights(w, 0.0).values.array() - 1.0).abs().maxCoeff();
  const double f1 = (flatten_weights(w, 1.0).values - w.values).cwiseAbs().maxCoeff();
  rep.check("C9 flattening identities", f0 < kExact && f1 < kExact,
            fmt("lambda=0 gap %.3g, lambda=1 gap %.3g (required < 1e-12)", f0, f1));

  Eigen::MatrixXd p(200, 3);
  for (Index i = 0; i < 200; ++i) {
    for (Index j = 0; j < 3; ++j) p(i, j) = rng.uniform(0.01, 1.0);
    p.row(i) /= p.row(i).sum();
  }
  const PriorPair pp{Eigen::Vector3d(0.2, 0.5, 0.3), Eigen::Vector3d(0.6, 0.1, 0.3)};
  const double rt =
      (label_shift_correct(label_shift_correct(p, pp), pp.reversed()) - p).cwiseAbs().maxCoeff();
  rep.check("C9 correction round trip", rt < kExact,
            fmt("max gap %.3g (required < 1e-12)", rt));

  Dataset g = draw(150, false, derive(base, {10}));
  std::vector<std::string> names;
  for (Index i = 0; i < 150; ++i) names.push_back("site" + std::to_string(rng.below(7)));
  g.groups = names;
  const auto splits = group_kfold(g);
  std::multiset<Index> tested;
  bool ok = true;
  for (const auto &s : splits) {
    std::set<Index> train(s.train_rows.begin(), s.train_rows.end());
    ok = ok && static_cast<Index>(s.train_rows.size() + s.test_rows.size()) == 150;
    for (Index r : s.test_rows) {
      ok = ok && !train.count(r) && names[static_cast<std::size_t>(r)] == s.group;
      tested.insert(r);
    }
    for (Index r : s.train_rows) ok = ok && names[static_cast<std::size_t>(r)] != s.group;
  }
  ok = ok && tested.size() == 150 && std::set<Index>(tested.begin(), tested.end()).size() == 150;
  rep.check("C9 group k-fold partition", ok,
            fmt("%.0f groups; every row tested exactly once, never with its own group in training",
                static_cast<double>(splits.size())));
  return rep.finish();
}
