#ifndef DSHIFT_SIM_HPP_
#define DSHIFT_SIM_HPP_

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dshift/dataset.hpp"
#include "dshift/rng.hpp"

namespace dshift {

enum class ScenarioKind {
  AgeShift,
  Selection,
  CovariateShift1D,
  LabelShift,
  AgeStratifiedReplica,
};

enum class SelectionRule {
  Constant, ///< S independent of (X, Y)
  OnX,      ///< P(S=1|x) = logistic(x_slope * x): P(Y|X) preserved
  OnM,      ///< P(S=1|m) = logistic(m_slope * m): P(Y|X) changes
};

/// Two arcs in 2-D indexed by age t in (0, 1): healthy at (u, u^2) with
/// u = 2t - 1, diseased shifted by `offset`, isotropic Gaussian noise.
/// Age follows a two-component Beta mixture; the population-specific part
/// is the weight of the old component.
struct AgeShiftParams {
  double young_a = 2.0, young_b = 5.0;
  double old_a = 5.0, old_b = 2.0;
  double source_old_fraction = 0.1;
  double target_old_fraction = 0.9;
  std::array<double, 2> offset{0.0, 0.35};
  double noise_sd = 0.08;
  /// P(disease | t) = logistic(prevalence_slope * (t - prevalence_center)).
  double prevalence_slope = 8.0;
  double prevalence_center = 0.5;
};

/// Population: Y ~ N(0,1), M ~ N(0,1), eps ~ N(0, noise_sd^2), X := Y + M + eps.
/// Source = selected rows; target = the full population.
struct SelectionParams {
  SelectionRule rule = SelectionRule::OnX;
  double constant_probability = 0.5;
  double noise_sd = 0.5;
  double x_slope = 1.0;
  double m_slope = 2.0;
  /// When nonzero an auxiliary Z ~ N(0,1), independent of (X, Y, M), is
  /// generated and multiplies the selection probability by
  /// logistic(z_strength * z).
  double z_strength = 0.0;
  /// Generates Z even when it does not enter selection.
  bool auxiliary_z = false;
  double min_expected_selected = 2.0;
};

struct Law {
  enum class Type { Normal, Uniform };
  Type type = Type::Normal;
  double a = 0.0; ///< mean, or lower bound
  double b = 1.0; ///< standard deviation, or upper bound

  static Law normal(double mean, double sd) { return {Type::Normal, mean, sd}; }
  static Law uniform(double lo, double hi) { return {Type::Uniform, lo, hi}; }
  double density(double x) const;
  double sample(Rng &rng) const;
  /// True when this law's support is contained in `other`'s.
  bool covered_by(const Law &other) const;
};

/// 1-D covariate shift: y = f(x) + noise with f a cubic polynomial.
struct CovariateShiftParams {
  Law source = Law::normal(0.0, 1.0);
  Law target = Law::normal(2.0, 0.7);
  /// f(x) = c0 + c1 x + c2 x^2 + c3 x^3
  std::array<double, 4> coefficients{0.0, 1.0, -0.5, 0.1};
  double noise_sd = 0.3;

  double true_function(double x) const;
};

/// Class-conditionals N(means[k], sd^2 I) in 2-D; only the priors shift.
struct LabelShiftParams {
  std::vector<double> source_priors{0.5, 0.5};
  std::vector<double> target_priors{0.9, 0.1};
  std::vector<std::array<double, 2>> means{{-1.0, 0.0}, {1.0, 0.0}};
  double sd = 1.0;
};

/// Synthetic pool standing in for a cohort with an age-dependent P(Y | X):
/// age ~ U(age_min, age_max); the first `age_linked` features carry
/// age_correlation of the standardized age, the rest are pure noise; the
/// binary outcome's log-odds mixes a direct age effect, an age-by-feature
/// interaction and threshold effects.
struct ReplicaParams {
  Index pool_size = 20000;
  int n_features = 29;
  int age_linked = 8;
  double age_correlation = 0.7;
  double age_min = 40.0;
  double age_max = 70.0;
  double source_old_fraction = 0.1;
  double target_old_fraction = 0.9;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::AgeShift;
  Index n_source = 1000;
  Index n_target = 1000;
  RngSeed seed{};
  AgeShiftParams age;
  SelectionParams selection;
  CovariateShiftParams covariate;
  LabelShiftParams label;
  ReplicaParams replica;

  void validate() const;

  /// Named presets: fig1, fig3a, fig3b, fig3c, fig4, fig5, appB-replica.
  static ScenarioConfig preset(std::string_view name);
  static std::vector<std::string> preset_names();
};

/// Quantities known by construction, used as test oracles.
struct GroundTruth {
  /// p_t / p_s at a row of a dataset with the scenario's schema. Returns
  /// +infinity where the source density vanishes.
  std::function<double(const Dataset &, Index)> density_ratio;
  /// Ratio at each source row.
  Eigen::VectorXd source_weights;
  /// P(S=1 | row) at each source row (selection scenarios).
  std::optional<Eigen::VectorXd> selection_probabilities;
  std::optional<double> selection_rate;
  std::vector<double> source_priors;
  std::vector<double> target_priors;
  /// Exact P(Y = k | x) under the given priors (label-shift scenario).
  std::function<Eigen::VectorXd(const Eigen::RowVectorXd &, const std::vector<double> &)>
      posterior;
  /// Exact regression function (covariate-shift scenario).
  std::function<double(double)> regression_function;
};

struct Scenario {
  Dataset source;
  Dataset target;
  GroundTruth truth;
};

Scenario gen_age_shift(const ScenarioConfig &config);
Scenario gen_selection_scenario(const ScenarioConfig &config);
Scenario gen_covariate_shift(const ScenarioConfig &config);
Scenario gen_label_shift(const ScenarioConfig &config);
Scenario gen_replica(const ScenarioConfig &config);
/// Dispatches on config.kind.
Scenario generate(const ScenarioConfig &config);

/// Pool for the replica scenario (features, binary outcome, "age" covariate).
Dataset gen_replica_pool(const ReplicaParams &params, RngSeed seed);

/// Samples round((1 - old_fraction) n) rows from the young stratum (the first
/// 20% of rows by age) and round(old_fraction n) from the old stratum (the
/// last 20%), without replacement. Age ties keep row order.
Dataset stratified_age_resample(const Dataset &pool, double old_fraction,
                                Index n, RngSeed seed,
                                std::string_view age_column = "age");

/// One CSV row per source row: true weight, plus selection probability when
/// the scenario defines one.
Dataset truth_table(const Scenario &scenario);

double beta_density(double x, double a, double b);

} // namespace dshift

#endif /* DSHIFT_SIM_HPP_ */
