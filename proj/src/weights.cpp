#include "dshift/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dshift/error.hpp"
#include "dshift/stats.hpp"

namespace dshift {

namespace {

// Estimators may return exact zeros (box constraint, clamped coefficients);
// weights are floored at this fraction of their mean to stay positive.
constexpr double kRelativeFloor = 1e-8;

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b,
                              KernelType kernel, double bandwidth) {
  const Eigen::MatrixXd dot = a * b.transpose();
  if (kernel == KernelType::Linear) return dot;
  Eigen::MatrixXd d2 = -2.0 * dot;
  d2.colwise() += a.rowwise().squaredNorm();
  d2.rowwise() += b.rowwise().squaredNorm().transpose();
  return (-d2.array().max(0.0) / (2.0 * bandwidth * bandwidth)).exp().matrix();
}

Eigen::VectorXd floor_values(Eigen::VectorXd v, const char *method) {
  const double m = v.mean();
  if (!(m > 0) || !v.allFinite()) {
    throw NumericalError(std::string(method) + " produced no positive weight");
  }
  return v.cwiseMax(kRelativeFloor * m);
}

/// Projection onto {0 <= w <= B, lo <= sum(w) <= hi}.
Eigen::VectorXd project_box_sum(const Eigen::VectorXd &v, double bound, double lo,
                                double hi) {
  auto clamped_sum = [&](double tau) {
    return (v.array() - tau).max(0.0).min(bound).sum();
  };
  const double s0 = clamped_sum(0.0);
  double target;
  if (s0 > hi) {
    target = hi;
  } else if (s0 < lo) {
    target = lo;
  } else {
    return v.array().max(0.0).min(bound).matrix();
  }
  // clamped_sum is nonincreasing in tau; bracket then bisect.
  double a = v.minCoeff() - bound, b = v.maxCoeff();
  for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    const double mid = 0.5 * (a + b);
    (clamped_sum(mid) > target ? a : b) = mid;
  }
  double tau = 0.5 * (a + b);
  // Exact shift on the free set.
  double fixed = 0.0, free_sum = 0.0;
  int free_count = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double u = v(i) - tau;
    if (u >= bound) {
      fixed += bound;
    } else if (u > 0.0) {
      free_sum += v(i);
      ++free_count;
    }
  }
  if (free_count > 0) tau = (free_sum + fixed - target) / free_count;
  return (v.array() - tau).max(0.0).min(bound).matrix();
}

double largest_eigenvalue(const Eigen::MatrixXd &k) {
  Eigen::VectorXd x = Eigen::VectorXd::Ones(k.rows()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 300; ++it) {
    Eigen::VectorXd y = k * x;
    const double next = x.dot(y);
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    x = y / norm;
    if (std::abs(next - lambda) <= 1e-12 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  // Power iteration approaches from below.
  return 1.01 * lambda;
}

} // namespace

Eigen::MatrixXd FeatureView::extract(const Dataset &data) const {
  Index width = (features ? data.cols() : 0) + (output ? 1 : 0) +
                static_cast<Index>(covariates.size());
  if (width == 0) throw InvalidArgument("empty feature view");
  Eigen::MatrixXd out(data.rows(), width);
  Index c = 0;
  if (features) {
    out.leftCols(data.cols()) = data.features;
    c += data.cols();
  }
  if (output) {
    out.col(c++) = data.require_outputs();
  }
  for (const auto &name : covariates) out.col(c++) = data.covariate(name);
  return out;
}

std::string FeatureView::to_string() const {
  std::string s;
  if (features) s = output ? "xy" : "x";
  else if (!covariates.empty()) s = "covariate:";
  for (std::size_t k = 0; k < covariates.size(); ++k) {
    if (k > 0 || features) s += "+";
    s += covariates[k];
  }
  return s;
}

FeatureView FeatureView::parse(std::string_view text) {
  FeatureView v;
  std::string_view rest;
  if (text.substr(0, 10) == "covariate:") {
    v.features = false;
    rest = text.substr(10);
    if (rest.empty()) throw InvalidArgument("covariate view needs a name");
  } else {
    const auto plus = text.find('+');
    const auto head = text.substr(0, plus);
    if (head == "x") {
      v.features = true;
    } else if (head == "xy") {
      v.features = true;
      v.output = true;
    } else {
      throw InvalidArgument("unknown view '" + std::string(text) + "'");
    }
    rest = plus == std::string_view::npos ? std::string_view{} : text.substr(plus + 1);
  }
  while (!rest.empty()) {
    const auto plus = rest.find('+');
    v.covariates.emplace_back(rest.substr(0, plus));
    rest = plus == std::string_view::npos ? std::string_view{} : rest.substr(plus + 1);
  }
  return v;
}

Eigen::VectorXd RatioModel::evaluate(const Eigen::MatrixXd &z) const {
  if (method == Method::Discriminative) {
    const Eigen::MatrixXd p = predict_proba(classifier, z);
    Eigen::VectorXd w(z.rows());
    for (Index i = 0; i < z.rows(); ++i) {
      const double q = std::clamp(p(i, 1), clip, 1.0 - clip);
      w(i) = q / (1.0 - q) * prior_ratio;
    }
    return w;
  }
  const Eigen::MatrixXd phi = kernel_matrix(z, centers, KernelType::Rbf, sigma);
  return phi * alpha;
}

WeightVector true_weights(const GroundTruth &truth, const Dataset &data,
                          Normalization normalization) {
  if (!truth.density_ratio) {
    throw InvalidArgument("scenario truth carries no density ratio");
  }
  Eigen::VectorXd w(data.rows());
  for (Index i = 0; i < data.rows(); ++i) {
    w(i) = truth.density_ratio(data, i);
    if (!std::isfinite(w(i))) {
      throw PositivityError("row " + std::to_string(i) +
                            " has zero source density (positivity violated)");
    }
  }
  return WeightVector::make(std::move(w), "true", normalization);
}

WeightVector ipw_from_selection(const Eigen::VectorXd &selection_probs,
                                double overall_rate) {
  if (!(overall_rate > 0.0 && overall_rate <= 1.0)) {
    throw InvalidArgument("overall selection rate must lie in (0, 1]");
  }
  for (Index i = 0; i < selection_probs.size(); ++i) {
    const double p = selection_probs(i);
    if (!(p > 0.0)) {
      throw PositivityError("selection probability at row " + std::to_string(i) +
                            " is not positive");
    }
    if (p > 1.0) throw InvalidArgument("selection probability exceeds 1");
  }
  return WeightVector::make(overall_rate * selection_probs.cwiseInverse(), "ipw",
                            Normalization::None);
}

DiscriminativeResult estimate_weights_discriminative(
    const Dataset &source, const Dataset &target, const FeatureView &view,
    const ModelSpec &classifier, RngSeed seed, const DiscriminativeOptions &options) {
  if (source.rows() == 0 || target.rows() == 0) {
    throw InvalidArgument("source and target must be nonempty");
  }
  const Eigen::MatrixXd zs = view.extract(source);
  const Eigen::MatrixXd zt = view.extract(target);
  if (zs.cols() != zt.cols()) {
    throw InvalidArgument("source and target views differ in width");
  }
  Eigen::MatrixXd pooled(zs.rows() + zt.rows(), zs.cols());
  pooled << zs, zt;
  Eigen::VectorXd t(pooled.rows());
  t << Eigen::VectorXd::Zero(zs.rows()), Eigen::VectorXd::Ones(zt.rows());
  const Dataset all = make_dataset(pooled, t, 2);

  const auto parts = split(all, options.holdout_fraction, seed);
  auto fitted = fit(classifier, parts.train);
  fitted = calibrate_platt(fitted, parts.test);

  DiscriminativeResult out;
  out.detector_auc =
      auc(predict_proba(fitted, parts.test.features).col(1), *parts.test.outputs);
  out.low_overlap = out.detector_auc > options.low_overlap_auc;

  out.model.method = RatioModel::Method::Discriminative;
  out.model.view = view;
  out.model.classifier = fitted;
  out.model.clip = options.clip;
  out.model.prior_ratio =
      static_cast<double>(zs.rows()) / static_cast<double>(zt.rows());

  const Eigen::MatrixXd p = predict_proba(fitted, zs);
  for (Index i = 0; i < p.rows(); ++i) {
    if (p(i, 1) < options.clip || p(i, 1) > 1.0 - options.clip) ++out.clipped;
  }
  if (out.clipped == zs.rows()) {
    throw PositivityError(
        "every source probability hit the clipping floor: no overlap between "
        "source and target");
  }
  out.weights = WeightVector::make(out.model.evaluate(zs), "discriminative",
                                   options.normalization);
  return out;
}

double median_pairwise_distance(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
  Eigen::MatrixXd pooled(a.rows() + b.rows(), a.cols());
  pooled << a, b;
  const Index n = pooled.rows();
  const Index m = std::min<Index>(n, 500);
  // Evenly strided subsample keeps the choice deterministic.
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
  for (Index i = 0; i < m; ++i) {
    const Index ri = i * n / m;
    for (Index j = i + 1; j < m; ++j) {
      d.push_back((pooled.row(ri) - pooled.row(j * n / m)).norm());
    }
  }
  if (d.empty()) return 1.0;
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid > 0 ? *mid : 1.0;
}

double kmm_objective(const Eigen::MatrixXd &source_x, const Eigen::MatrixXd &target_x,
                     const Eigen::VectorXd &w, KernelType kernel, double bandwidth) {
  const double ns = static_cast<double>(source_x.rows());
  const double nt = static_cast<double>(target_x.rows());
  const Eigen::MatrixXd kss = kernel_matrix(source_x, source_x, kernel, bandwidth);
  const Eigen::MatrixXd kst = kernel_matrix(source_x, target_x, kernel, bandwidth);
  const Eigen::MatrixXd ktt = kernel_matrix(target_x, target_x, kernel, bandwidth);
  return w.dot(kss * w) / (ns * ns) - 2.0 * w.dot(kst.rowwise().sum()) / (ns * nt) +
         ktt.sum() / (nt * nt);
}

KmmResult estimate_weights_kmm(const Eigen::MatrixXd &source_x,
                               const Eigen::MatrixXd &target_x,
                               const KmmOptions &options) {
  if (source_x.rows() == 0 || target_x.rows() == 0) {
    throw InvalidArgument("KMM needs nonempty source and target samples");
  }
  if (source_x.cols() != target_x.cols()) {
    throw InvalidArgument("KMM samples differ in width");
  }
  if (!(options.upper_bound > 1.0)) throw InvalidArgument("KMM bound B must be > 1");
  const Index n = source_x.rows();
  const double ns = static_cast<double>(n);
  const double nt = static_cast<double>(target_x.rows());
  const double eps =
      options.slack >= 0.0 ? options.slack : (std::sqrt(ns) - 1.0) / std::sqrt(ns);
  const double bw = options.bandwidth > 0
                        ? options.bandwidth
                        : median_pairwise_distance(source_x, target_x);

  Eigen::MatrixXd k = kernel_matrix(source_x, source_x, options.kernel, bw);
  const Eigen::VectorXd kappa =
      kernel_matrix(source_x, target_x, options.kernel, bw).rowwise().sum() * (ns / nt);
  const double ktt_mean =
      kernel_matrix(target_x, target_x, options.kernel, bw).sum() / (nt * nt);
  // Jitter keeps the quadratic strictly convex for rank-deficient kernels.
  k.diagonal().array() += 1e-10 * std::max(k.diagonal().mean(), 1e-300);

  // J(w) = (w'Kw - 2 w'kappa) / ns^2 + mean(K_tt)
  auto objective = [&](const Eigen::VectorXd &w) {
    return (w.dot(k * w) - 2.0 * w.dot(kappa)) / (ns * ns) + ktt_mean;
  };
  const double lipschitz = 2.0 * largest_eigenvalue(k) / (ns * ns);
  const double step = lipschitz > 0 ? 1.0 / lipschitz : 1.0;
  const double lo = ns * (1.0 - eps), hi = ns * (1.0 + eps);

  Eigen::VectorXd w =
      project_box_sum(Eigen::VectorXd::Ones(n), options.upper_bound, lo, hi);
  double f = objective(w);
  const double scale = std::max(std::abs(f), 1e-12);
  KmmResult out;
  out.bandwidth = bw;
  bool converged = false;
  int it = 0;
  // Accelerated projected gradient; momentum restarts whenever J goes up.
  Eigen::VectorXd y = w;
  double t = 1.0;
  for (; it < options.max_iterations; ++it) {
    const Eigen::VectorXd grad = 2.0 * (k * y - kappa) / (ns * ns);
    const Eigen::VectorXd next =
        project_box_sum(y - step * grad, options.upper_bound, lo, hi);
    const double fn = objective(next);
    if (fn > f) {
      y = w;
      t = 1.0;
      continue;
    }
    const double change = f - fn;
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / tn) * (next - w);
    t = tn;
    w = next;
    f = fn;
    if (change <= options.tolerance * scale) {
      converged = true;
      ++it;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("KMM did not converge within " +
                           std::to_string(options.max_iterations) + " iterations");
  }
  out.iterations = it;
  out.objective = std::max(f, 0.0);
  out.weights = WeightVector::make(floor_values(w, "KMM"), "kmm", Normalization::MeanOne);
  return out;
}

UlsifResult estimate_weights_ulsif(const Eigen::MatrixXd &source_x,
                                   const Eigen::MatrixXd &target_x,
                                   const UlsifOptions &options) {
  if (source_x.rows() == 0 || target_x.rows() == 0) {
    throw InvalidArgument("uLSIF needs nonempty source and target samples");
  }
  if (source_x.cols() != target_x.cols()) {
    throw InvalidArgument("uLSIF samples differ in width");
  }
  if (!(options.ridge > 0.0)) throw InvalidArgument("uLSIF ridge must be > 0");
  if (options.basis_centers < 1 || options.basis_centers > target_x.rows()) {
    throw InvalidArgument("uLSIF basis_centers must lie in [1, target size]");
  }
  const Index b = options.basis_centers;
  Rng rng(options.seed);
  const auto perm = rng.permutation(static_cast<std::size_t>(target_x.rows()));
  Eigen::MatrixXd centers(b, target_x.cols());
  for (Index l = 0; l < b; ++l) centers.row(l) = target_x.row(static_cast<Index>(perm[static_cast<std::size_t>(l)]));

  UlsifResult out;
  out.model.method = RatioModel::Method::Ulsif;
  out.model.centers = centers;
  out.model.sigma = options.bandwidth > 0 ? options.bandwidth
                                          : median_pairwise_distance(source_x, target_x);

  const Eigen::MatrixXd phi_s =
      kernel_matrix(source_x, centers, KernelType::Rbf, out.model.sigma);
  const Eigen::MatrixXd phi_t =
      kernel_matrix(target_x, centers, KernelType::Rbf, out.model.sigma);
  Eigen::MatrixXd h = phi_s.transpose() * phi_s / static_cast<double>(source_x.rows());
  const Eigen::VectorXd hv = phi_t.colwise().mean().transpose();
  h.diagonal().array() += options.ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) throw NumericalError("uLSIF system is singular");
  out.model.alpha = llt.solve(hv).cwiseMax(0.0);
  out.weights = WeightVector::make(floor_values(phi_s * out.model.alpha, "uLSIF"),
                                   "ulsif", Normalization::MeanOne);
  return out;
}

WeightVector flatten_weights(const WeightVector &w, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw InvalidArgument("flattening exponent must lie in [0, 1]");
  }
  Eigen::VectorXd v = w.values.array().pow(lambda).matrix();
  return WeightVector::make(std::move(v), w.method, w.normalization);
}

Dataset resample_by_weights(const Dataset &data, const WeightVector &w, Index n_out,
                            RngSeed seed) {
  if (w.size() != data.rows()) {
    throw InvalidArgument("weights are not aligned with the dataset rows");
  }
  if (n_out < 0) throw InvalidArgument("n_out must be >= 0");
  std::vector<double> cumulative(static_cast<std::size_t>(w.size()));
  std::partial_sum(w.values.data(), w.values.data() + w.size(), cumulative.begin());
  const double total = cumulative.back();
  Rng rng(seed);
  std::vector<Index> rows(static_cast<std::size_t>(n_out));
  for (auto &r : rows) {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    r = std::min<Index>(static_cast<Index>(it - cumulative.begin()), w.size() - 1);
  }
  Dataset out = data.select_rows(rows);
  out.weights.reset();
  return out;
}

} // namespace dshift
