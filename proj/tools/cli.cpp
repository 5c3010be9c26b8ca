#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "dshift/corrections.hpp"
#include "dshift/csv.hpp"
#include "dshift/error.hpp"
#include "dshift/eval.hpp"
#include "dshift/experiment.hpp"
#include "dshift/report.hpp"
#include "dshift/sim.hpp"
#include "dshift/weights.hpp"

namespace dshift::cli {

namespace {

namespace fs = std::filesystem;

/// Bad flag values; reported with exit status 2.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 1;
  std::string out = ".";
  std::string config;
};

void add_common(CLI::App *cmd, Common &c, bool with_config) {
  cmd->add_option("--seed", c.seed, "Seed for every random choice")->capture_default_str();
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  if (with_config) {
    cmd->add_option("--config", c.config, "Flat key = value settings file");
  }
}

using FlagSettings = std::vector<std::tuple<std::string, std::string, std::string>>;

/// Merges the settings file with flag overrides, validating after each flag
/// so a bad value is reported against the flag that introduced it.
ExperimentConfig build_config(const std::string &config_path, const FlagSettings &flags,
                              bool full_validation) {
  std::map<std::string, std::string> merged;
  auto check = [&](const std::string &origin) {
    try {
      ExperimentConfig c = ExperimentConfig::from_settings(merged);
      if (full_validation) {
        c.validate();
      } else {
        c.scenario.validate();
      }
      return c;
    } catch (const Error &e) {
      throw UsageError(origin + ": " + e.what());
    }
  };
  ExperimentConfig cfg;
  if (!config_path.empty()) {
    try {
      merged = load_settings(config_path);
    } catch (const Error &e) {
      throw UsageError(std::string("--config: ") + e.what());
    }
    cfg = check("--config");
  }
  for (const auto &[flag, key, value] : flags) {
    merged[key] = value;
    cfg = check(flag);
  }
  if (flags.empty() && config_path.empty()) cfg = check("configuration");
  return cfg;
}

std::vector<double> parse_vector(const std::string &flag, const std::string &text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto cell = text.substr(start, comma == std::string::npos ? std::string::npos
                                                                    : comma - start);
    try {
      out.push_back(parse_double(cell));
    } catch (const Error &) {
      throw UsageError(flag + ": '" + text + "' is not a comma-separated list of numbers");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double> &v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

/// Loads a CSV. Without an explicit schema, "y" is the output, "weight" the
/// weight column, "group" the group column, x<digits> columns are features
/// and every other column is a covariate.
Dataset load_table(const std::string &path, const std::string &schema_text,
                   const std::string &task) {
  Schema schema;
  if (!schema_text.empty()) {
    try {
      schema = Schema::parse(schema_text);
    } catch (const Error &e) {
      throw UsageError(std::string("--schema: ") + e.what());
    }
  } else {
    const auto rows = read_rows(read_file(path));
    if (rows.empty()) throw InvalidArgument("'" + path + "' is empty");
    for (const auto &name : rows.front()) {
      ColumnRole role;
      if (name == "y") {
        role.role = Role::Output;
      } else if (name == "weight") {
        role.role = Role::Weight;
      } else if (name == "group") {
        role.role = Role::Group;
      } else if (name.size() > 1 && name[0] == 'x' &&
                 std::all_of(name.begin() + 1, name.end(),
                             [](char c) { return c >= '0' && c <= '9'; })) {
        role.role = Role::Feature;
      } else {
        role.role = Role::Covariate;
        role.name = name;
      }
      schema.columns.emplace_back(name, role);
    }
  }
  schema.num_classes = 0;
  Dataset d = load_csv(path, schema);
  if (d.outputs && task != "regression") {
    const Eigen::VectorXd &y = *d.outputs;
    const bool integral = (y.array() == y.array().round()).all() && y.minCoeff() >= 0;
    if (task == "classification" && !integral) {
      throw InvalidArgument("'" + path + "': classification outputs must be labels 0..K-1");
    }
    if (integral && y.maxCoeff() >= 1 && (task == "classification" || y.maxCoeff() < 20)) {
      d.num_classes = static_cast<int>(y.maxCoeff()) + 1;
    }
  }
  d.validate();
  return d;
}

void require_same_schema(const Dataset &a, const Dataset &b) {
  std::vector<std::string> ca, cb;
  for (const auto &c : a.covariates) ca.push_back(c.name);
  for (const auto &c : b.covariates) cb.push_back(c.name);
  if (a.column_names != b.column_names || ca != cb) {
    throw InvalidArgument("schema mismatch: source and target columns differ");
  }
}

FeatureView parse_view(const std::string &text) {
  try {
    return FeatureView::parse(text);
  } catch (const Error &e) {
    throw UsageError(std::string("--view: ") + e.what());
  }
}

ModelSpec parse_spec(const std::string &flag, const std::string &text) {
  try {
    ModelSpec s = ModelSpec::parse(text);
    s.validate();
    return s;
  } catch (const Error &e) {
    throw UsageError(flag + ": " + e.what());
  }
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::string scenario, n, n_source, n_target, source_priors, target_priors,
      source_old, target_old;
  bool seed_given = false;
};

int cmd_simulate(const SimulateArgs &a, std::ostream &out) {
  FlagSettings flags;
  auto flag = [&](const char *name, const char *key, const std::string &v) {
    if (!v.empty()) flags.emplace_back(name, key, v);
  };
  flag("--scenario", "scenario", a.scenario);
  flag("--n", "n", a.n);
  flag("--n-source", "n_source", a.n_source);
  flag("--n-target", "n_target", a.n_target);
  flag("--source-priors", "source_priors", a.source_priors);
  flag("--target-priors", "target_priors", a.target_priors);
  flag("--source-old-fraction", "source_old_fraction", a.source_old);
  flag("--target-old-fraction", "target_old_fraction", a.target_old);
  if (a.scenario.empty() && a.common.config.empty()) {
    throw UsageError("--scenario is required");
  }
  ExperimentConfig cfg = build_config(a.common.config, flags, false);
  cfg.scenario.seed = a.seed_given ? RngSeed{a.common.seed} : cfg.seed;
  const Scenario s = generate(cfg.scenario);
  const fs::path dir = a.common.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  write_csv(s.source, dir / "source.csv");
  write_csv(s.target, dir / "target.csv");
  write_csv(truth_table(s), dir / "truth.csv");
  out << (dir / "source.csv").string() << '\n'
      << (dir / "target.csv").string() << '\n'
      << (dir / "truth.csv").string() << '\n';
  return kOk;
}

struct ExperimentArgs {
  Common common;
  std::string preset;
  std::vector<std::string> sets;
  std::string repetitions, threads;
  bool seed_given = false, out_given = false;
};

int cmd_experiment(const ExperimentArgs &a, std::ostream &out) {
  if (a.preset.empty() && a.common.config.empty()) {
    throw UsageError("experiment needs --config or --preset");
  }
  FlagSettings flags;
  if (!a.preset.empty()) flags.emplace_back("--preset", "preset", a.preset);
  for (const auto &s : a.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--set: '" + s + "' is not key=value");
    auto trim = [](std::string t) {
      t.erase(0, t.find_first_not_of(' '));
      t.erase(t.find_last_not_of(' ') + 1);
      return t;
    };
    flags.emplace_back("--set " + trim(s.substr(0, eq)), trim(s.substr(0, eq)),
                       trim(s.substr(eq + 1)));
  }
  if (a.seed_given) flags.emplace_back("--seed", "seed", std::to_string(a.common.seed));
  if (!a.repetitions.empty()) flags.emplace_back("--repetitions", "repetitions", a.repetitions);
  if (!a.threads.empty()) flags.emplace_back("--threads", "threads", a.threads);
  if (a.out_given) flags.emplace_back("--out", "out", a.common.out);
  const ExperimentConfig cfg = build_config(a.common.config, flags, true);
  const ExperimentResult result = run_experiment(cfg);
  write_experiment(result, cfg.out_dir);
  out << result.to_csv();
  return kOk;
}

struct PairArgs {
  Common common;
  std::string source, target, schema, task = "auto", view = "x";
};

struct WeightArgs : PairArgs {
  std::string method = "discriminative";
  std::string classifier = "logistic";
  double bandwidth = 0.0;
};

int cmd_estimate_weights(const WeightArgs &a, std::ostream &out) {
  const FeatureView view = parse_view(a.view);
  const ModelSpec clf = parse_spec("--classifier", a.classifier);
  if (a.method != "discriminative" && a.method != "kmm" && a.method != "ulsif") {
    throw UsageError("--method: unknown method '" + a.method + "'");
  }
  const Dataset source = load_table(a.source, a.schema, a.task);
  const Dataset target = load_table(a.target, a.schema, a.task);
  require_same_schema(source, target);
  WeightVector w;
  std::string extra;
  if (a.method == "discriminative") {
    const auto r = estimate_weights_discriminative(source, target, view, clf,
                                                   RngSeed{a.common.seed});
    w = r.weights;
    extra = " detector_auc=" + fixed(r.detector_auc) +
            " low_overlap=" + (r.low_overlap ? "true" : "false");
  } else if (a.method == "kmm") {
    KmmOptions o;
    o.bandwidth = a.bandwidth;
    const auto r = estimate_weights_kmm(view.extract(source), view.extract(target), o);
    w = r.weights;
    extra = " objective=" + fixed(r.objective) + " bandwidth=" + fixed(r.bandwidth);
  } else {
    UlsifOptions o;
    o.bandwidth = a.bandwidth;
    o.seed = RngSeed{a.common.seed};
    const auto r = estimate_weights_ulsif(view.extract(source), view.extract(target), o);
    w = r.weights;
    extra = " bandwidth=" + fixed(r.model.sigma);
  }
  std::string csv = "weight\n";
  for (Index i = 0; i < w.size(); ++i) csv += format_double(w.values(i)) + '\n';
  const fs::path dir = a.common.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  write_file(dir / "weights.csv", csv);
  out << "method=" << a.method << " rows=" << w.size()
      << " ess=" << fixed(w.effective_sample_size) << extra << '\n';
  return kOk;
}

int cmd_detect_shift(const PairArgs &a, std::ostream &out) {
  const FeatureView view = parse_view(a.view);
  const Dataset source = load_table(a.source, a.schema, a.task);
  const Dataset target = load_table(a.target, a.schema, a.task);
  require_same_schema(source, target);
  const DetectorResult det = shift_detector(source, target, view, RngSeed{a.common.seed});
  const auto w = estimate_weights_discriminative(source, target, view,
                                                 ModelSpec::logistic(),
                                                 derive(RngSeed{a.common.seed}, {1}));
  out << "verdict=" << to_string(det.verdict) << " auc=" << fixed(det.auc)
      << " ess=" << fixed(w.weights.effective_sample_size) << '\n';
  return kOk;
}

struct EvaluateArgs {
  Common common;
  std::string train, test, schema, task = "auto", learner = "logistic", weights, loss,
      subgroup, bins = "4";
  int folds = 0;
  bool group_cv = false;
};

int cmd_evaluate(const EvaluateArgs &a, std::ostream &out) {
  const ModelSpec spec = parse_spec("--learner", a.learner);
  std::optional<ScoreLoss> loss;
  if (!a.loss.empty()) {
    try {
      loss = parse_score_loss(a.loss);
    } catch (const Error &e) {
      throw UsageError(std::string("--loss: ") + e.what());
    }
  }
  Bins bins;
  {
    const auto edges = parse_vector("--bins", a.bins);
    if (edges.size() == 1) {
      if (edges[0] < 1 || edges[0] != std::floor(edges[0])) {
        throw UsageError("--bins: a bin count must be a positive integer");
      }
      bins = Bins::equal_width(static_cast<int>(edges[0]));
    } else {
      bins = Bins::explicit_edges(edges);
    }
  }
  if (a.folds == 1 || a.folds < 0) throw UsageError("--folds: must be 0 or >= 2");

  const Dataset train = load_table(a.train, a.schema, a.task);
  const Dataset test = load_table(a.test, a.schema, a.task);
  require_same_schema(train, test);
  const ScoreLoss main_loss =
      loss.value_or(train.is_classification() ? ScoreLoss::ZeroOne : ScoreLoss::Squared);

  std::optional<WeightVector> w;
  if (!a.weights.empty()) {
    Schema ws;
    ws.columns.emplace_back("weight", ColumnRole{Role::Feature, {}});
    const Dataset wd = load_csv(a.weights, ws);
    if (wd.rows() != train.rows()) {
      throw InvalidArgument("weights file has " + std::to_string(wd.rows()) +
                            " rows but the training set has " +
                            std::to_string(train.rows()));
    }
    w = WeightVector::make(wd.features.col(0), "file", Normalization::MeanOne);
  }
  Dataset train_plain = train;
  train_plain.weights.reset();
  const Model model = w ? fit(spec, train_plain, *w) : fit(spec, train);

  EvalReport rep;
  rep.stamp.learner = spec.to_string();
  rep.stamp.strategy = w ? "reweighting" : "baseline";
  rep.stamp.train = fs::path(a.train).stem().string();
  rep.stamp.test = fs::path(a.test).stem().string();
  if (model.is_classifier()) {
    rep.add("overall", "accuracy", 1.0 - risk(model, test, ScoreLoss::ZeroOne));
    rep.add("overall", "logloss", risk(model, test, ScoreLoss::LogLoss));
    rep.add("overall", "brier", risk(model, test, ScoreLoss::Squared));
  } else {
    rep.add("overall", "mse", risk(model, test, ScoreLoss::Squared));
  }
  if (a.folds >= 2) {
    const RngSeed seed{a.common.seed};
    const CvResult cv = w ? importance_weighted_cv(spec, train_plain, *w, a.folds, seed, main_loss)
                          : cross_validate(spec, train, a.folds, seed, main_loss);
    rep.add_folds(cv, to_string(main_loss));
  }
  if (!a.subgroup.empty()) {
    rep.add_subgroups(subgroup_report(model, test, a.subgroup, bins, main_loss));
  }
  if (a.group_cv) {
    std::vector<std::pair<std::string, double>> risks;
    for (const auto &g : group_kfold(train)) {
      const Model m = fit(spec, train.select_rows(g.train_rows));
      risks.emplace_back(g.group, risk(m, train.select_rows(g.test_rows), main_loss));
    }
    rep.add_groups(risks, to_string(main_loss));
  }
  rep.add_detector(shift_detector(train, test, FeatureView::x_only(), RngSeed{a.common.seed}));

  const fs::path dir = a.common.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  write_file(dir / "report.txt", rep.to_jsonl());
  write_file(dir / "report.csv", rep.to_csv());
  out << rep.to_jsonl();
  return kOk;
}

struct PriorArgs {
  Common common;
  std::string probs, source_priors, target_priors;
};

int cmd_correct_priors(const PriorArgs &a, std::ostream &out) {
  PriorPair pp{to_vector(parse_vector("--source-priors", a.source_priors)),
               to_vector(parse_vector("--target-priors", a.target_priors))};
  try {
    pp.validate();
  } catch (const Error &e) {
    throw UsageError(std::string("--source-priors/--target-priors: ") + e.what());
  }
  const auto rows = read_rows(read_file(a.probs));
  if (rows.size() < 2) throw InvalidArgument("'" + a.probs + "' has no data rows");
  const auto k = rows.front().size();
  Eigen::MatrixXd p(static_cast<Index>(rows.size() - 1), static_cast<Index>(k));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != k) {
      throw InvalidArgument("row " + std::to_string(i) + " has " +
                            std::to_string(rows[i].size()) + " cells, expected " +
                            std::to_string(k));
    }
    for (std::size_t j = 0; j < k; ++j) {
      p(static_cast<Index>(i - 1), static_cast<Index>(j)) = parse_double(rows[i][j]);
    }
  }
  const Eigen::MatrixXd c = label_shift_correct(p, pp);
  std::string csv;
  for (std::size_t j = 0; j < k; ++j) csv += (j ? "," : "") + csv_escape(rows.front()[j]);
  csv += '\n';
  for (Index i = 0; i < c.rows(); ++i) {
    for (Index j = 0; j < c.cols(); ++j) csv += (j ? "," : "") + format_double(c(i, j));
    csv += '\n';
  }
  const fs::path dir = a.common.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  write_file(dir / "corrected.csv", csv);
  out << csv;
  return kOk;
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Dataset-shift toolkit: simulate shifted populations, estimate "
               "importance weights, evaluate learners and run strategy comparisons."};
  app.name("dshift");
  app.require_subcommand(1);

  SimulateArgs sim;
  auto *c_sim = app.add_subcommand("simulate", "Write source.csv, target.csv and truth.csv");
  add_common(c_sim, sim.common, true);
  c_sim->add_option("--scenario", sim.scenario,
                    "fig1 | fig3a | fig3b | fig3c | fig4 | fig5 | appB-replica");
  c_sim->add_option("--n", sim.n, "Rows per population");
  c_sim->add_option("--n-source", sim.n_source, "Source rows");
  c_sim->add_option("--n-target", sim.n_target, "Target rows (population size for fig3*)");
  c_sim->add_option("--source-priors", sim.source_priors, "Class priors, e.g. 0.5,0.5");
  c_sim->add_option("--target-priors", sim.target_priors, "Class priors, e.g. 0.9,0.1");
  c_sim->add_option("--source-old-fraction", sim.source_old, "Old share in the source");
  c_sim->add_option("--target-old-fraction", sim.target_old, "Old share in the target");

  ExperimentArgs exp;
  auto *c_exp = app.add_subcommand("experiment", "Run a strategy comparison; write report.csv and report.txt");
  add_common(c_exp, exp.common, true);
  c_exp->add_option("--preset", exp.preset,
                    "fig1 | fig3a | fig3b | fig3c | fig4 | fig5 | appB-replica");
  c_exp->add_option("--set", exp.sets, "Override a setting: key=value (repeatable)");
  c_exp->add_option("--repetitions", exp.repetitions, "Number of repetitions");
  c_exp->add_option("--threads", exp.threads, "Worker threads (0: all cores)");

  WeightArgs wa;
  auto *c_w = app.add_subcommand("estimate-weights", "Write weights.csv aligned to the source rows");
  add_common(c_w, wa.common, false);
  c_w->add_option("--source", wa.source, "Source CSV")->required();
  c_w->add_option("--target", wa.target, "Target CSV")->required();
  c_w->add_option("--schema", wa.schema, "col:role,... (default: inferred from the header)");
  c_w->add_option("--task", wa.task, "auto | classification | regression")->capture_default_str();
  c_w->add_option("--method", wa.method, "discriminative | kmm | ulsif")->capture_default_str();
  c_w->add_option("--view", wa.view, "x | xy | x+<cov> | covariate:<cov>")->capture_default_str();
  c_w->add_option("--classifier", wa.classifier, "Classifier for the discriminative method")
      ->capture_default_str();
  c_w->add_option("--bandwidth", wa.bandwidth, "Kernel bandwidth (0: median heuristic)");

  PairArgs da;
  auto *c_d = app.add_subcommand("detect-shift", "Print a shift verdict with AUC and ESS");
  add_common(c_d, da.common, false);
  c_d->add_option("--source", da.source, "Source CSV")->required();
  c_d->add_option("--target", da.target, "Target CSV")->required();
  c_d->add_option("--schema", da.schema, "col:role,... (default: inferred from the header)");
  c_d->add_option("--task", da.task, "auto | classification | regression")->capture_default_str();
  c_d->add_option("--view", da.view, "x | xy | x+<cov> | covariate:<cov>")->capture_default_str();

  EvaluateArgs ea;
  auto *c_e = app.add_subcommand("evaluate", "Fit on --train, report metrics on --test");
  add_common(c_e, ea.common, false);
  c_e->add_option("--train", ea.train, "Training CSV")->required();
  c_e->add_option("--test", ea.test, "Test CSV")->required();
  c_e->add_option("--schema", ea.schema, "col:role,... (default: inferred from the header)");
  c_e->add_option("--task", ea.task, "auto | classification | regression")->capture_default_str();
  c_e->add_option("--learner", ea.learner, "Model spec, e.g. poly:degree=4")->capture_default_str();
  c_e->add_option("--weights", ea.weights, "CSV with a 'weight' column aligned to --train");
  c_e->add_option("--loss", ea.loss, "squared | logloss | zero_one");
  c_e->add_option("--folds", ea.folds, "Cross-validation folds on --train (0: none)");
  c_e->add_option("--subgroup", ea.subgroup, "Covariate to bin the test set by");
  c_e->add_option("--bins", ea.bins, "Bin count or ascending edges")->capture_default_str();
  c_e->add_flag("--group-cv", ea.group_cv, "Leave-one-group-out risks on --train");

  PriorArgs pa;
  auto *c_p = app.add_subcommand("correct-priors", "Adjust class probabilities to new priors");
  add_common(c_p, pa.common, false);
  c_p->add_option("--probs", pa.probs, "CSV of class probabilities, one column per class")
      ->required();
  c_p->add_option("--source-priors", pa.source_priors, "Training priors")->required();
  c_p->add_option("--target-priors", pa.target_priors, "Deployment priors")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }
  sim.seed_given = c_sim->count("--seed") > 0;
  exp.seed_given = c_exp->count("--seed") > 0;
  exp.out_given = c_exp->count("--out") > 0;

  try {
    if (c_sim->parsed()) return cmd_simulate(sim, out);
    if (c_exp->parsed()) return cmd_experiment(exp, out);
    if (c_w->parsed()) return cmd_estimate_weights(wa, out);
    if (c_d->parsed()) return cmd_detect_shift(da, out);
    if (c_e->parsed()) return cmd_evaluate(ea, out);
    if (c_p->parsed()) return cmd_correct_priors(pa, out);
  } catch (const UsageError &e) {
    err << "dshift: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception &e) {
    err << "dshift: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsageError;
}

} // namespace dshift::cli
