#ifndef DSHIFT_EVAL_HPP_
#define DSHIFT_EVAL_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dshift/dataset.hpp"
#include "dshift/learners.hpp"
#include "dshift/weight_vector.hpp"
#include "dshift/weights.hpp"

namespace dshift {

enum class ScoreLoss {
  Squared,  ///< (y - f)^2, or (y - p_1)^2 for classifiers
  LogLoss,  ///< -log p_y, probabilities clipped to [1e-15, 1]
  ZeroOne,  ///< misclassification; 1 - accuracy
};

std::string to_string(ScoreLoss loss);
ScoreLoss parse_score_loss(std::string_view text);

/// Per-row losses of a fitted model.
Eigen::VectorXd pointwise_loss(const Model &model, const Dataset &data, ScoreLoss loss);

/// (Weighted) average loss: sum_i w_i L_i / sum_i w_i, uniform when no
/// weights are given.
double risk(const Model &model, const Dataset &data, ScoreLoss loss);
double risk(const Model &model, const Dataset &data, ScoreLoss loss,
            const WeightVector &weights);

/// Fold assignment: a seeded permutation cut into k contiguous blocks, the
/// first n mod k blocks one row longer. Depends on (n, k, seed) only.
struct FoldPlan {
  int k = 0;
  std::vector<std::vector<Index>> test_rows; ///< sorted row indices per fold
  std::vector<Index> train_rows(int fold) const;
};

FoldPlan make_folds(Index n, int k, RngSeed seed);

struct CvResult {
  std::vector<double> scores;
  FoldPlan folds;

  double mean() const;
};

/// Refits `spec` on each fold complement (optionally with training weights)
/// and scores the held-out fold with unweighted average loss.
CvResult cross_validate(const ModelSpec &spec, const Dataset &data, int k,
                        RngSeed seed, ScoreLoss loss,
                        const std::optional<WeightVector> &train_weights = std::nullopt);

/// Importance-weighted CV: weighted training and weighted fold scores.
CvResult importance_weighted_cv(const ModelSpec &spec, const Dataset &data,
                                const WeightVector &weights, int k, RngSeed seed,
                                ScoreLoss loss);

struct GroupSplit {
  std::string group;
  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
};

/// One split per distinct group (sorted by name); the test side is the whole
/// group.
std::vector<GroupSplit> group_kfold(const Dataset &data);

/// Bin specification: `count` equal-width bins over the observed range, or
/// explicit ascending edges (values outside go to the nearest end bin).
struct Bins {
  int count = 0;
  std::vector<double> edges;

  static Bins equal_width(int count) { return {count, {}}; }
  static Bins explicit_edges(std::vector<double> edges) { return {0, std::move(edges)}; }
};

struct SubgroupRow {
  double lo = 0.0;
  double hi = 0.0;
  Index count = 0;
  double risk = 0.0;
  std::optional<double> accuracy;
};

struct SubgroupReport {
  std::string covariate;
  ScoreLoss loss = ScoreLoss::ZeroOne;
  std::vector<SubgroupRow> bins; ///< nonempty bins only
  double overall_risk = 0.0;
  double worst_group_risk = 0.0;
  /// Population variance of the per-bin risks (each bin counted once).
  double group_risk_variance = 0.0;
};

SubgroupReport subgroup_report(const Model &model, const Dataset &data,
                               std::string_view covariate, const Bins &bins,
                               ScoreLoss loss);

enum class Verdict { NoEvidenceOfShift, Shifted, LowOverlap };
std::string to_string(Verdict v);

struct DetectorOptions {
  double shifted_auc = 0.6;     ///< AUC below this: no evidence of shift
  double low_overlap_auc = 0.95; ///< AUC above this: little overlap
  int folds = 5;
  ModelSpec classifier = ModelSpec::logistic();
};

struct DetectorResult {
  double auc = 0.5;
  Verdict verdict = Verdict::NoEvidenceOfShift;
};

/// Out-of-fold AUC of a source-vs-target classifier on the pooled view.
DetectorResult shift_detector(const Dataset &source, const Dataset &target,
                              const FeatureView &view, RngSeed seed,
                              const DetectorOptions &options = {});

} // namespace dshift

#endif /* DSHIFT_EVAL_HPP_ */
