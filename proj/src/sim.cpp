#include "dshift/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "dshift/error.hpp"

namespace dshift {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logistic(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

/// E[g(V)] for V ~ N(0, sd^2) by composite Simpson on +-12 sd.
double normal_expectation(const std::function<double(double)> &g, double sd) {
  constexpr int kIntervals = 4000;
  const double lo = -12.0 * sd, hi = 12.0 * sd;
  const double h = (hi - lo) / kIntervals;
  double acc = 0.0;
  for (int i = 0; i <= kIntervals; ++i) {
    const double x = lo + i * h;
    const double c = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += c * g(x) * normal_pdf(x, 0.0, sd);
  }
  return acc * h / 3.0;
}

void check_probability(double p, const char *what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidArgument(std::string(what) + " must lie in [0, 1]");
  }
}

void check_priors(const std::vector<double> &priors, const char *what) {
  if (priors.size() < 2) {
    throw InvalidArgument(std::string(what) + " needs at least 2 classes");
  }
  double s = 0.0;
  for (double p : priors) {
    check_probability(p, what);
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-9) {
    throw InvalidArgument(std::string(what) + " must sum to 1 (got " +
                          std::to_string(s) + ")");
  }
}

int sample_class(Rng &rng, const std::vector<double> &priors) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < priors.size(); ++k) {
    acc += priors[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(priors.size()) - 1;
}

double selection_probability(const SelectionParams &p, double x, double m,
                             double z) {
  double s = 0.0;
  switch (p.rule) {
  case SelectionRule::Constant: s = p.constant_probability; break;
  case SelectionRule::OnX: s = logistic(p.x_slope * x); break;
  case SelectionRule::OnM: s = logistic(p.m_slope * m); break;
  }
  if (p.z_strength != 0.0) s *= logistic(p.z_strength * z);
  return s;
}

double mixture_density(const AgeShiftParams &p, double t, double old_fraction) {
  return (1.0 - old_fraction) * beta_density(t, p.young_a, p.young_b) +
         old_fraction * beta_density(t, p.old_a, p.old_b);
}

Dataset age_population(const AgeShiftParams &p, Index n, double old_fraction,
                       Rng &rng) {
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n), age(n);
  for (Index i = 0; i < n; ++i) {
    const bool old = rng.bernoulli(old_fraction);
    const double t = old ? rng.beta(p.old_a, p.old_b) : rng.beta(p.young_a, p.young_b);
    const bool sick =
        rng.bernoulli(logistic(p.prevalence_slope * (t - p.prevalence_center)));
    const double u = 2.0 * t - 1.0;
    x(i, 0) = u + (sick ? p.offset[0] : 0.0) + rng.normal(0.0, p.noise_sd);
    x(i, 1) = u * u + (sick ? p.offset[1] : 0.0) + rng.normal(0.0, p.noise_sd);
    y(i) = sick ? 1.0 : 0.0;
    age(i) = t;
  }
  Dataset d = make_dataset(std::move(x), std::move(y), 2);
  d.set_covariate("age", std::move(age));
  return d;
}

} // namespace

double beta_density(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  return std::exp(log_norm + (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x));
}

double Law::density(double x) const {
  if (type == Type::Normal) return normal_pdf(x, a, b);
  return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0;
}

double Law::sample(Rng &rng) const {
  return type == Type::Normal ? rng.normal(a, b) : rng.uniform(a, b);
}

bool Law::covered_by(const Law &other) const {
  if (other.type == Type::Normal) return true;
  if (type == Type::Normal) return false;
  return a >= other.a && b <= other.b;
}

double CovariateShiftParams::true_function(double x) const {
  return coefficients[0] +
         x * (coefficients[1] + x * (coefficients[2] + x * coefficients[3]));
}

void ScenarioConfig::validate() const {
  if (n_source < 1 || n_target < 1) {
    throw InvalidArgument("sample sizes must be >= 1");
  }
  switch (kind) {
  case ScenarioKind::AgeShift: {
    const auto &p = age;
    if (!(p.young_a > 0 && p.young_b > 0 && p.old_a > 0 && p.old_b > 0)) {
      throw InvalidArgument("degenerate age range: Beta parameters must be > 0");
    }
    check_probability(p.source_old_fraction, "source_old_fraction");
    check_probability(p.target_old_fraction, "target_old_fraction");
    if (!std::isfinite(p.offset[0]) || !std::isfinite(p.offset[1])) {
      throw InvalidArgument("class offset must be finite");
    }
    if (!(p.noise_sd > 0)) throw InvalidArgument("noise_sd must be > 0");
    break;
  }
  case ScenarioKind::Selection:
    check_probability(selection.constant_probability, "constant_probability");
    if (!(selection.noise_sd > 0)) throw InvalidArgument("noise scale must be > 0");
    break;
  case ScenarioKind::CovariateShift1D:
    for (const Law *law : {&covariate.source, &covariate.target}) {
      if (law->type == Law::Type::Normal && !(law->b > 0)) {
        throw InvalidArgument("normal law needs sd > 0");
      }
      if (law->type == Law::Type::Uniform && !(law->b > law->a)) {
        throw InvalidArgument("uniform law needs lo < hi");
      }
    }
    if (!(covariate.noise_sd >= 0)) throw InvalidArgument("noise_sd must be >= 0");
    break;
  case ScenarioKind::LabelShift:
    check_priors(label.source_priors, "source priors");
    check_priors(label.target_priors, "target priors");
    if (label.source_priors.size() != label.target_priors.size() ||
        label.means.size() != label.source_priors.size()) {
      throw InvalidArgument("priors and class means must have equal length");
    }
    if (!(label.sd > 0)) throw InvalidArgument("class sd must be > 0");
    break;
  case ScenarioKind::AgeStratifiedReplica:
    check_probability(replica.source_old_fraction, "source_old_fraction");
    check_probability(replica.target_old_fraction, "target_old_fraction");
    if (replica.n_features < 16 || replica.age_linked < 1 ||
        replica.age_linked > 8) {
      throw InvalidArgument("replica needs >= 16 features and 1..8 age-linked");
    }
    if (!(replica.age_max > replica.age_min)) {
      throw InvalidArgument("degenerate age range");
    }
    break;
  }
}

std::vector<std::string> ScenarioConfig::preset_names() {
  return {"fig1", "fig3a", "fig3b", "fig3c", "fig4", "fig5", "appB-replica"};
}

ScenarioConfig ScenarioConfig::preset(std::string_view name) {
  ScenarioConfig c;
  if (name == "fig1") {
    c.kind = ScenarioKind::AgeShift;
  } else if (name == "fig3a" || name == "fig3b" || name == "fig3c") {
    c.kind = ScenarioKind::Selection;
    c.n_target = 2000; // population size; the source is the selected subset
    c.selection.rule = name == "fig3a"   ? SelectionRule::Constant
                       : name == "fig3b" ? SelectionRule::OnX
                                         : SelectionRule::OnM;
  } else if (name == "fig4") {
    c.kind = ScenarioKind::CovariateShift1D;
    c.n_source = 500;
    c.n_target = 500;
  } else if (name == "fig5") {
    c.kind = ScenarioKind::LabelShift;
  } else if (name == "appB-replica") {
    c.kind = ScenarioKind::AgeStratifiedReplica;
    c.n_source = 2000;
    c.n_target = 2000;
  } else {
    throw InvalidArgument("unknown scenario '" + std::string(name) + "'");
  }
  return c;
}

Scenario gen_age_shift(const ScenarioConfig &config) {
  if (config.kind != ScenarioKind::AgeShift) {
    throw InvalidArgument("gen_age_shift needs an AgeShift config");
  }
  config.validate();
  const AgeShiftParams p = config.age;
  Rng src_rng(derive(config.seed, {1, 0}));
  Rng tgt_rng(derive(config.seed, {1, 1}));
  Scenario s;
  s.source = age_population(p, config.n_source, p.source_old_fraction, src_rng);
  s.target = age_population(p, config.n_target, p.target_old_fraction, tgt_rng);
  s.truth.density_ratio = [p](const Dataset &d, Index i) {
    const double t = d.covariate("age")(i);
    const double ps = mixture_density(p, t, p.source_old_fraction);
    if (ps <= 0.0) return kInf;
    return mixture_density(p, t, p.target_old_fraction) / ps;
  };
  s.truth.source_weights.resize(s.source.rows());
  for (Index i = 0; i < s.source.rows(); ++i) {
    s.truth.source_weights(i) = s.truth.density_ratio(s.source, i);
  }
  return s;
}

Scenario gen_selection_scenario(const ScenarioConfig &config) {
  if (config.kind != ScenarioKind::Selection) {
    throw InvalidArgument("gen_selection_scenario needs a Selection config");
  }
  config.validate();
  const SelectionParams p = config.selection;
  const Index n = config.n_target;
  const bool with_z = p.auxiliary_z || p.z_strength != 0.0;

  // Exact P(S=1): the factors depend on independent variables.
  const double x_sd = std::sqrt(2.0 + p.noise_sd * p.noise_sd);
  double rate = 0.0;
  switch (p.rule) {
  case SelectionRule::Constant: rate = p.constant_probability; break;
  case SelectionRule::OnX:
    rate = normal_expectation([&](double x) { return logistic(p.x_slope * x); }, x_sd);
    break;
  case SelectionRule::OnM:
    rate = normal_expectation([&](double m) { return logistic(p.m_slope * m); }, 1.0);
    break;
  }
  if (p.z_strength != 0.0) {
    rate *= normal_expectation([&](double z) { return logistic(p.z_strength * z); },
                               1.0);
  }
  if (rate * static_cast<double>(n) < p.min_expected_selected) {
    throw PositivityError("selection rule selects fewer than " +
                          std::to_string(p.min_expected_selected) +
                          " rows in expectation");
  }

  Rng rng(derive(config.seed, {3}));
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXd y(n), m(n), z(n), prob(n);
  std::vector<Index> selected;
  for (Index i = 0; i < n; ++i) {
    y(i) = rng.normal();
    m(i) = rng.normal();
    x(i, 0) = y(i) + m(i) + rng.normal(0.0, p.noise_sd);
    z(i) = with_z ? rng.normal() : 0.0;
    prob(i) = selection_probability(p, x(i, 0), m(i), z(i));
    if (rng.uniform() < prob(i)) selected.push_back(i);
  }
  if (selected.empty()) throw PositivityError("selection kept zero rows");

  Dataset population = make_dataset(std::move(x), std::move(y));
  population.set_covariate("M", std::move(m));
  if (with_z) population.set_covariate("Z", std::move(z));

  Scenario s;
  s.target = population;
  s.source = population.select_rows(selected);
  s.truth.selection_rate = rate;
  Eigen::VectorXd sel(static_cast<Index>(selected.size()));
  for (std::size_t k = 0; k < selected.size(); ++k) {
    sel(static_cast<Index>(k)) = prob(selected[k]);
  }
  s.truth.selection_probabilities = sel;
  s.truth.density_ratio = [p, rate, with_z](const Dataset &d, Index i) {
    const double zi = with_z ? d.covariate("Z")(i) : 0.0;
    const double ps = selection_probability(p, d.features(i, 0), d.covariate("M")(i), zi);
    if (ps <= 0.0) return kInf;
    return rate / ps;
  };
  s.truth.source_weights = rate * sel.cwiseInverse();
  return s;
}

Scenario gen_covariate_shift(const ScenarioConfig &config) {
  if (config.kind != ScenarioKind::CovariateShift1D) {
    throw InvalidArgument("gen_covariate_shift needs a CovariateShift1D config");
  }
  config.validate();
  const CovariateShiftParams p = config.covariate;
  if (!p.target.covered_by(p.source)) {
    throw PositivityError(
        "target support is not covered by the source support; importance "
        "weighting cannot fix this shift");
  }
  auto sample = [&](const Law &law, Index n, Rng &rng) {
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
      x(i, 0) = law.sample(rng);
      y(i) = p.true_function(x(i, 0)) + rng.normal(0.0, p.noise_sd);
    }
    return make_dataset(std::move(x), std::move(y));
  };
  Rng src_rng(derive(config.seed, {4, 0}));
  Rng tgt_rng(derive(config.seed, {4, 1}));
  Scenario s;
  s.source = sample(p.source, config.n_source, src_rng);
  s.target = sample(p.target, config.n_target, tgt_rng);
  s.truth.density_ratio = [p](const Dataset &d, Index i) {
    const double x = d.features(i, 0);
    const double ps = p.source.density(x);
    if (ps <= 0.0) return kInf;
    if (p.source.type == Law::Type::Normal && p.target.type == Law::Type::Normal) {
      // Log-space form stays finite far in the tails.
      const double zs = (x - p.source.a) / p.source.b;
      const double zt = (x - p.target.a) / p.target.b;
      return p.source.b / p.target.b * std::exp(0.5 * (zs * zs - zt * zt));
    }
    return p.target.density(x) / ps;
  };
  s.truth.regression_function = [p](double x) { return p.true_function(x); };
  s.truth.source_weights.resize(s.source.rows());
  for (Index i = 0; i < s.source.rows(); ++i) {
    s.truth.source_weights(i) = s.truth.density_ratio(s.source, i);
  }
  return s;
}

Scenario gen_label_shift(const ScenarioConfig &config) {
  if (config.kind != ScenarioKind::LabelShift) {
    throw InvalidArgument("gen_label_shift needs a LabelShift config");
  }
  config.validate();
  const LabelShiftParams p = config.label;
  const int k = static_cast<int>(p.source_priors.size());
  auto sample = [&](const std::vector<double> &priors, Index n, Rng &rng) {
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
      const int c = sample_class(rng, priors);
      const auto &mu = p.means[static_cast<std::size_t>(c)];
      x(i, 0) = rng.normal(mu[0], p.sd);
      x(i, 1) = rng.normal(mu[1], p.sd);
      y(i) = c;
    }
    return make_dataset(std::move(x), std::move(y), k);
  };
  Rng src_rng(derive(config.seed, {5, 0}));
  Rng tgt_rng(derive(config.seed, {5, 1}));
  Scenario s;
  s.source = sample(p.source_priors, config.n_source, src_rng);
  s.target = sample(p.target_priors, config.n_target, tgt_rng);
  s.truth.source_priors = p.source_priors;
  s.truth.target_priors = p.target_priors;
  s.truth.posterior = [p](const Eigen::RowVectorXd &x,
                          const std::vector<double> &priors) {
    const auto kk = static_cast<Index>(priors.size());
    Eigen::VectorXd logit(kk);
    for (Index c = 0; c < kk; ++c) {
      const auto &mu = p.means[static_cast<std::size_t>(c)];
      const double d2 = (x(0) - mu[0]) * (x(0) - mu[0]) + (x(1) - mu[1]) * (x(1) - mu[1]);
      logit(c) = std::log(priors[static_cast<std::size_t>(c)]) - d2 / (2.0 * p.sd * p.sd);
    }
    const double top = logit.maxCoeff();
    Eigen::VectorXd e = (logit.array() - top).exp();
    return Eigen::VectorXd(e / e.sum());
  };
  s.truth.density_ratio = [p](const Dataset &d, Index i) {
    const auto c = static_cast<std::size_t>(d.require_outputs()(i));
    if (p.source_priors[c] <= 0.0) return kInf;
    return p.target_priors[c] / p.source_priors[c];
  };
  s.truth.source_weights.resize(s.source.rows());
  for (Index i = 0; i < s.source.rows(); ++i) {
    s.truth.source_weights(i) = s.truth.density_ratio(s.source, i);
  }
  return s;
}

Dataset gen_replica_pool(const ReplicaParams &p, RngSeed seed) {
  Rng rng(seed);
  const Index n = p.pool_size;
  const int d = p.n_features;
  const double rho = p.age_correlation;
  const double resid = std::sqrt(1.0 - rho * rho);
  const double mid = 0.5 * (p.age_min + p.age_max);
  const double half = 0.5 * (p.age_max - p.age_min);
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n), age(n);
  for (Index i = 0; i < n; ++i) {
    age(i) = rng.uniform(p.age_min, p.age_max);
    const double a = (age(i) - mid) / half; // in [-1, 1]
    for (int j = 0; j < d; ++j) {
      x(i, j) = j < p.age_linked ? rho * a * 1.7 + resid * rng.normal() : rng.normal();
    }
    // Outcome log-odds: direct age effect, age-linked markers, an effect of
    // feature 9 whose sign flips with age, and threshold effects.
    const double eta = -0.3 - 2.5 * a + 0.8 * x(i, 0) - 0.6 * x(i, 1) +
                       2.0 * a * x(i, 9) + 1.0 * x(i, 10) +
                       1.5 * (x(i, 11) > 0.5 ? 1.0 : 0.0) -
                       1.2 * (x(i, 12) < -0.3 ? 1.0 : 0.0) +
                       0.8 * x(i, 13) * x(i, 14) + 0.5 * x(i, 15);
    y(i) = rng.bernoulli(logistic(eta)) ? 1.0 : 0.0;
  }
  Dataset pool = make_dataset(std::move(x), std::move(y), 2);
  pool.set_covariate("age", std::move(age));
  return pool;
}

Dataset stratified_age_resample(const Dataset &pool, double old_fraction, Index n,
                                RngSeed seed, std::string_view age_column) {
  check_probability(old_fraction, "old_fraction");
  const auto &age = pool.covariate(age_column);
  const Index total = pool.rows();
  std::vector<Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return age(a) < age(b); });
  const auto stratum = static_cast<std::size_t>(total / 5);
  const auto n_old = static_cast<Index>(std::llround(old_fraction * static_cast<double>(n)));
  const auto n_young = static_cast<Index>(
      std::llround((1.0 - old_fraction) * static_cast<double>(n)));
  if (static_cast<std::size_t>(n_young) > stratum ||
      static_cast<std::size_t>(n_old) > stratum) {
    throw InvalidArgument("strata of size " + std::to_string(stratum) +
                          " are too small for " + std::to_string(n_young) +
                          " young + " + std::to_string(n_old) + " old rows");
  }
  Rng rng(seed);
  auto draw = [&](std::size_t begin, Index count) {
    std::vector<Index> rows;
    const auto perm = rng.permutation(stratum);
    for (Index k = 0; k < count; ++k) {
      rows.push_back(order[begin + perm[static_cast<std::size_t>(k)]]);
    }
    return rows;
  };
  std::vector<Index> rows = draw(0, n_young);
  const auto old_rows = draw(static_cast<std::size_t>(total) - stratum, n_old);
  rows.insert(rows.end(), old_rows.begin(), old_rows.end());
  return pool.select_rows(rows);
}

Scenario gen_replica(const ScenarioConfig &config) {
  if (config.kind != ScenarioKind::AgeStratifiedReplica) {
    throw InvalidArgument("gen_replica needs an AgeStratifiedReplica config");
  }
  config.validate();
  const ReplicaParams p = config.replica;
  const Dataset pool = gen_replica_pool(p, derive(config.seed, {6, 0}));
  Scenario s;
  s.source = stratified_age_resample(pool, p.source_old_fraction, config.n_source,
                                     derive(config.seed, {6, 1}));
  s.target = stratified_age_resample(pool, p.target_old_fraction, config.n_target,
                                     derive(config.seed, {6, 2}));
  // Stratum boundaries of the pool, for the exact ratio.
  std::vector<double> ages(pool.covariate("age").data(),
                           pool.covariate("age").data() + pool.rows());
  std::sort(ages.begin(), ages.end());
  const auto stratum = static_cast<std::size_t>(pool.rows() / 5);
  const double young_max = ages[stratum - 1];
  const double old_min = ages[ages.size() - stratum];
  s.truth.density_ratio = [p, young_max, old_min](const Dataset &d, Index i) {
    const double a = d.covariate("age")(i);
    if (a <= young_max) {
      return p.source_old_fraction >= 1.0
                 ? kInf
                 : (1.0 - p.target_old_fraction) / (1.0 - p.source_old_fraction);
    }
    if (a >= old_min) {
      return p.source_old_fraction <= 0.0
                 ? kInf
                 : p.target_old_fraction / p.source_old_fraction;
    }
    return kInf; // middle ages never enter the source sample
  };
  s.truth.source_weights.resize(s.source.rows());
  for (Index i = 0; i < s.source.rows(); ++i) {
    s.truth.source_weights(i) = s.truth.density_ratio(s.source, i);
  }
  return s;
}

Scenario generate(const ScenarioConfig &config) {
  switch (config.kind) {
  case ScenarioKind::AgeShift: return gen_age_shift(config);
  case ScenarioKind::Selection: return gen_selection_scenario(config);
  case ScenarioKind::CovariateShift1D: return gen_covariate_shift(config);
  case ScenarioKind::LabelShift: return gen_label_shift(config);
  case ScenarioKind::AgeStratifiedReplica: return gen_replica(config);
  }
  throw InvalidArgument("unknown scenario kind");
}

Dataset truth_table(const Scenario &scenario) {
  const Index n = scenario.source.rows();
  const bool with_sel = scenario.truth.selection_probabilities.has_value();
  Eigen::MatrixXd cols(n, with_sel ? 2 : 1);
  cols.col(0) = scenario.truth.source_weights;
  if (with_sel) cols.col(1) = *scenario.truth.selection_probabilities;
  Dataset t;
  t.features = std::move(cols);
  t.column_names = {"true_weight"};
  if (with_sel) t.column_names.push_back("selection_probability");
  return t;
}

} // namespace dshift
