#include "dshift/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <functional>
#include <sstream>
#include <thread>

#include "dshift/corrections.hpp"
#include "dshift/csv.hpp"
#include "dshift/stats.hpp"

namespace dshift {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    const std::string item = trim(text.substr(start, pos == std::string_view::npos
                                                         ? std::string_view::npos
                                                         : pos - start));
    if (!item.empty()) out.push_back(item);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

long long parse_integer(const std::string &key, const std::string &value) {
  long long v = 0;
  const auto *end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw InvalidArgument("setting '" + key + "': '" + value + "' is not an integer");
  }
  return v;
}

double parse_real(const std::string &key, const std::string &value) {
  try {
    return parse_double(value);
  } catch (const InvalidArgument &) {
    throw InvalidArgument("setting '" + key + "': '" + value + "' is not a number");
  }
}

std::vector<double> parse_reals(const std::string &key, const std::string &value) {
  std::vector<double> out;
  for (const auto &item : split_list(value, ',')) out.push_back(parse_real(key, item));
  if (out.empty()) throw InvalidArgument("setting '" + key + "' is empty");
  return out;
}

} // namespace

// ---------------------------------------------------------------------------
// StrategySpec

std::string StrategySpec::label() const {
  switch (kind) {
  case Kind::Baseline: return "baseline";
  case Kind::Reweighting: return "reweighting";
  case Kind::RegressOut: return "regress-out";
  case Kind::PriorCorrection: return "prior-correction";
  }
  return "?";
}

std::string StrategySpec::to_string() const {
  switch (kind) {
  case Kind::Reweighting:
    if (method == "truth") return "reweighting:truth";
    return "reweighting:" + method + ":" + view.to_string();
  case Kind::RegressOut: return "regress-out:" + covariate;
  default: return label();
  }
}

StrategySpec StrategySpec::parse(std::string_view text) {
  const std::string t = trim(text);
  StrategySpec s;
  if (t == "baseline") return s;
  if (t == "prior-correction") {
    s.kind = Kind::PriorCorrection;
    return s;
  }
  if (t.rfind("regress-out:", 0) == 0) {
    s.kind = Kind::RegressOut;
    s.covariate = t.substr(12);
    if (s.covariate.empty()) throw InvalidArgument("regress-out needs a covariate");
    return s;
  }
  if (t.rfind("reweighting:", 0) == 0) {
    s.kind = Kind::Reweighting;
    const std::string rest = t.substr(12);
    const auto colon = rest.find(':');
    s.method = rest.substr(0, colon);
    if (s.method != "truth" && s.method != "discriminative" && s.method != "kmm" &&
        s.method != "ulsif") {
      throw InvalidArgument("unknown reweighting method '" + s.method + "'");
    }
    if (colon != std::string::npos) {
      if (s.method == "truth") throw InvalidArgument("truth weights take no view");
      s.view = FeatureView::parse(rest.substr(colon + 1));
    }
    return s;
  }
  throw InvalidArgument("unknown strategy '" + t + "'");
}

// ---------------------------------------------------------------------------
// ExperimentConfig

std::map<std::string, std::string> parse_settings(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) +
                            ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": empty key");
    }
    out[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> load_settings(const std::filesystem::path &path) {
  return parse_settings(read_file(path));
}

std::string ExperimentConfig::task_name(const Task &t) const {
  return population_names[static_cast<int>(t.train)] + "->" +
         population_names[static_cast<int>(t.test)];
}

Task ExperimentConfig::parse_task(std::string_view text) const {
  const std::string t = trim(text);
  const auto arrow = t.find("->");
  if (arrow == std::string::npos) {
    throw InvalidArgument("task '" + t + "' is not of the form train->test");
  }
  auto pop = [&](const std::string &name) {
    if (name == population_names[0] || name == "source") return Population::Source;
    if (name == population_names[1] || name == "target") return Population::Target;
    throw InvalidArgument("unknown population '" + name + "' in task '" + t + "'");
  };
  return {pop(trim(t.substr(0, arrow))), pop(trim(t.substr(arrow + 2)))};
}

void ExperimentConfig::validate() const {
  if (learners.empty()) throw InvalidArgument("experiment needs at least one learner");
  if (strategies.empty()) throw InvalidArgument("experiment needs at least one strategy");
  if (tasks.empty()) throw InvalidArgument("experiment needs at least one task");
  if (repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
  if (folds < 2) throw InvalidArgument("folds must be >= 2");
  if (threads < 0) throw InvalidArgument("threads must be >= 0");
  if (source_csv.has_value() != target_csv.has_value()) {
    throw InvalidArgument("source_csv and target_csv must be given together");
  }
  if (population_names[0] == population_names[1]) {
    throw InvalidArgument("population names must differ");
  }
  for (const auto &l : learners) l.validate();
  for (const auto &s : strategies) {
    if (s.kind == StrategySpec::Kind::Reweighting && s.method == "truth" && source_csv) {
      throw InvalidArgument("truth weights need a simulated scenario");
    }
  }
  if (!source_csv) scenario.validate();
}

void ExperimentConfig::apply(const std::map<std::string, std::string> &settings) {
  // Keys whose meaning depends on others are applied first.
  for (const char *key : {"scenario", "population_names"}) {
    const auto it = settings.find(key);
    if (it == settings.end()) continue;
    if (it->first == "scenario") {
      scenario = ScenarioConfig::preset(it->second);
    } else {
      const auto names = split_list(it->second, ',');
      if (names.size() != 2) {
        throw InvalidArgument("setting 'population_names' needs two names");
      }
      population_names = {names[0], names[1]};
    }
  }
  for (const auto &[key, value] : settings) {
    if (key == "scenario" || key == "population_names" || key == "preset") continue;
    if (key == "n") {
      scenario.n_source = scenario.n_target = parse_integer(key, value);
    } else if (key == "n_source") {
      scenario.n_source = parse_integer(key, value);
    } else if (key == "n_target") {
      scenario.n_target = parse_integer(key, value);
    } else if (key == "seed") {
      seed = RngSeed{static_cast<std::uint64_t>(parse_integer(key, value))};
    } else if (key == "learners") {
      learners.clear();
      for (const auto &item : split_list(value, ';')) learners.push_back(ModelSpec::parse(item));
    } else if (key == "strategies") {
      strategies.clear();
      for (const auto &item : split_list(value, ';')) {
        strategies.push_back(StrategySpec::parse(item));
      }
    } else if (key == "tasks") {
      tasks.clear();
      for (const auto &item : split_list(value, ',')) tasks.push_back(parse_task(item));
    } else if (key == "folds") {
      folds = static_cast<int>(parse_integer(key, value));
    } else if (key == "repetitions") {
      repetitions = static_cast<int>(parse_integer(key, value));
    } else if (key == "threads") {
      threads = static_cast<int>(parse_integer(key, value));
    } else if (key == "out") {
      out_dir = value;
    } else if (key == "source_csv") {
      source_csv = value;
    } else if (key == "target_csv") {
      target_csv = value;
    } else if (key == "schema") {
      schema = value;
    } else if (key == "num_classes") {
      num_classes = static_cast<int>(parse_integer(key, value));
    } else if (key == "weight_classifier") {
      weight_classifier = ModelSpec::parse(value);
    } else if (key == "source_priors") {
      scenario.label.source_priors = parse_reals(key, value);
    } else if (key == "target_priors") {
      scenario.label.target_priors = parse_reals(key, value);
    } else if (key == "source_old_fraction") {
      scenario.age.source_old_fraction = scenario.replica.source_old_fraction =
          parse_real(key, value);
    } else if (key == "target_old_fraction") {
      scenario.age.target_old_fraction = scenario.replica.target_old_fraction =
          parse_real(key, value);
    } else {
      throw InvalidArgument("unknown setting '" + key + "'");
    }
  }
}

ExperimentConfig ExperimentConfig::from_settings(
    const std::map<std::string, std::string> &settings) {
  ExperimentConfig c;
  if (const auto it = settings.find("preset"); it != settings.end()) {
    c = preset(it->second);
  }
  c.apply(settings);
  return c;
}

ExperimentConfig ExperimentConfig::preset(std::string_view name) {
  ExperimentConfig c;
  c.scenario = ScenarioConfig::preset(name);
  std::map<std::string, std::string> s;
  if (name == "fig1") {
    s = {{"population_names", "young,old"},
         {"learners", "logistic;rbf:bandwidth=0.3,ridge=0.001"},
         {"strategies", "baseline;reweighting:truth;regress-out:age"},
         {"tasks", "young->young,young->old"},
         {"folds", "5"},
         {"repetitions", "20"}};
  } else if (name == "fig3a" || name == "fig3b" || name == "fig3c") {
    s = {{"learners", "linear"},
         {"strategies", "baseline;reweighting:truth;reweighting:discriminative:xy"},
         {"tasks", "source->target"},
         {"folds", "5"},
         {"repetitions", "20"}};
  } else if (name == "fig4") {
    s = {{"learners", "linear;poly:degree=4"},
         {"strategies", "baseline;reweighting:truth"},
         {"tasks", "source->target"},
         {"folds", "5"},
         {"repetitions", "20"}};
  } else if (name == "fig5") {
    s = {{"learners", "logistic"},
         {"strategies", "baseline;prior-correction"},
         {"tasks", "source->target"},
         {"folds", "5"},
         {"repetitions", "20"}};
  } else if (name == "appB-replica") {
    s = {{"population_names", "young,old"},
         {"learners", "logistic;boost:rounds=100,lr=0.1,depth=2,loss=logistic"},
         {"strategies", "baseline;reweighting:discriminative:covariate:age;regress-out:age"},
         {"tasks", "young->young,young->old,old->young,old->old"},
         {"folds", "10"},
         {"repetitions", "10"}};
  }
  c.apply(s);
  return c;
}

// ---------------------------------------------------------------------------
// Running

RngSeed scenario_seed(const ExperimentConfig &config, int rep) {
  return derive(config.seed, {static_cast<std::uint64_t>(rep), 0});
}

RngSeed fold_seed(const ExperimentConfig &config, int rep, Population pop) {
  return derive(config.seed,
                {static_cast<std::uint64_t>(rep), 1 + static_cast<std::uint64_t>(pop)});
}

namespace {

struct RepData {
  std::array<Dataset, 2> pops;
  std::optional<GroundTruth> truth;
};

RepData load_rep(const ExperimentConfig &config, int rep) {
  RepData d;
  if (config.source_csv) {
    const Schema schema = Schema::parse(config.schema, config.num_classes);
    d.pops = {load_csv(*config.source_csv, schema), load_csv(*config.target_csv, schema)};
    return d;
  }
  ScenarioConfig sc = config.scenario;
  sc.seed = scenario_seed(config, rep);
  Scenario s = generate(sc);
  d.pops = {std::move(s.source), std::move(s.target)};
  d.truth = std::move(s.truth);
  return d;
}

std::vector<std::string> metric_names(bool classification) {
  if (classification) return {"accuracy", "logloss", "brier"};
  return {"mse"};
}

/// Same conventions as pointwise_loss.
std::vector<double> classification_metrics(const Eigen::MatrixXd &p,
                                           const Eigen::VectorXd &y) {
  double hits = 0.0, logloss = 0.0, brier = 0.0;
  for (Index i = 0; i < p.rows(); ++i) {
    const int c = static_cast<int>(y(i));
    const int guess = p(i, 1) > p(i, 0) ? 1 : 0;
    hits += guess == c ? 1.0 : 0.0;
    logloss += -std::log(std::max(p(i, c), 1e-15));
    brier += (y(i) - p(i, 1)) * (y(i) - p(i, 1));
  }
  const double n = static_cast<double>(p.rows());
  return {hits / n, logloss / n, brier / n};
}

/// values[cell][metric][fold]
using RepValues = std::vector<std::vector<std::vector<double>>>;

class RepRunner {
public:
  RepRunner(const ExperimentConfig &config, int rep)
      : config_(config), rep_(rep), data_(load_rep(config, rep)) {
    for (int p = 0; p < 2; ++p) {
      data_.pops[static_cast<std::size_t>(p)].weights.reset();
      plans_[static_cast<std::size_t>(p)] =
          make_folds(data_.pops[static_cast<std::size_t>(p)].rows(), config.folds,
                     fold_seed(config, rep, static_cast<Population>(p)));
    }
    classification_ = data_.pops[0].is_classification();
    if (data_.pops[1].is_classification() != classification_) {
      throw InvalidArgument("source and target disagree on the task type");
    }
  }

  RepValues run() {
    const std::size_t ncells =
        config_.learners.size() * config_.strategies.size() * config_.tasks.size();
    const std::size_t nmetrics = metric_names(classification_).size();
    RepValues values(ncells, std::vector<std::vector<double>>(
                                 nmetrics, std::vector<double>(
                                               static_cast<std::size_t>(config_.folds))));
    for (int f = 0; f < config_.folds; ++f) {
      models_.clear();
      for (std::size_t t = 0; t < config_.tasks.size(); ++t) {
        for (std::size_t s = 0; s < config_.strategies.size(); ++s) {
          for (std::size_t l = 0; l < config_.learners.size(); ++l) {
            const std::size_t cell = (l * config_.strategies.size() + s) * config_.tasks.size() + t;
            std::vector<double> m;
            try {
              m = run_cell(l, s, t, f);
            } catch (const std::exception &e) {
              throw CellError("cell learner=" + config_.learners[l].to_string() +
                              " strategy=" + config_.strategies[s].to_string() +
                              " task=" + config_.task_name(config_.tasks[t]) +
                              " repetition=" + std::to_string(rep_) +
                              " fold=" + std::to_string(f) + ": " + e.what());
            }
            for (std::size_t k = 0; k < m.size(); ++k) {
              values[cell][k][static_cast<std::size_t>(f)] = m[k];
            }
          }
        }
      }
    }
    return values;
  }

private:
  Dataset part(Population p, int fold, bool test) const {
    const auto &plan = plans_[static_cast<std::size_t>(p)];
    const auto &pop = data_.pops[static_cast<std::size_t>(p)];
    if (test) return pop.select_rows(plan.test_rows[static_cast<std::size_t>(fold)]);
    return pop.select_rows(plan.train_rows(fold));
  }

  const Model &cached(const std::string &key, const std::function<Model()> &make) {
    auto it = models_.find(key);
    if (it == models_.end()) it = models_.emplace(key, make()).first;
    return it->second;
  }

  Eigen::VectorXd weights_for(const StrategySpec &s, const Task &task,
                              const Dataset &train, const Dataset &reference,
                              int fold) const {
    if (s.method == "truth") {
      if (!data_.truth) throw InvalidArgument("truth weights need a simulated scenario");
      Eigen::VectorXd w(train.rows());
      for (Index i = 0; i < train.rows(); ++i) {
        const double r = data_.truth->density_ratio(train, i);
        w(i) = task.train == Population::Source ? r : 1.0 / r;
      }
      if (!w.allFinite() || (w.array() <= 0).any()) {
        throw PositivityError("true density ratio is zero or infinite on training rows");
      }
      return w;
    }
    const RngSeed seed = derive(config_.seed, {static_cast<std::uint64_t>(rep_), 3,
                                               static_cast<std::uint64_t>(fold)});
    if (s.method == "discriminative") {
      return estimate_weights_discriminative(train, reference, s.view,
                                             config_.weight_classifier, seed)
          .weights.values;
    }
    const Eigen::MatrixXd zs = s.view.extract(train);
    const Eigen::MatrixXd zt = s.view.extract(reference);
    if (s.method == "kmm") return estimate_weights_kmm(zs, zt).weights.values;
    UlsifOptions o;
    o.seed = seed;
    return estimate_weights_ulsif(zs, zt, o).weights.values;
  }

  std::vector<double> run_cell(std::size_t l, std::size_t s, std::size_t t, int fold) {
    const ModelSpec &spec = config_.learners[l];
    const StrategySpec &strat = config_.strategies[s];
    const Task &task = config_.tasks[t];
    const bool same = task.train == task.test;
    const std::string learner_key = std::to_string(l) + "/" +
                                    std::to_string(static_cast<int>(task.train));

    Dataset train = part(task.train, fold, false);
    Dataset test = part(task.test, fold, true);
    const Model *model = nullptr;
    std::optional<PriorPair> priors;

    using Kind = StrategySpec::Kind;
    if (strat.kind == Kind::RegressOut) {
      const RegressOutResult ro = regress_out(train, strat.covariate);
      test = ro.transform.apply(test);
      model = &cached("ro:" + strat.covariate + ":" + learner_key,
                      [&] { return fit(spec, ro.data); });
    } else if (strat.kind == Kind::Reweighting && !same) {
      const Dataset reference = part(task.test, fold, false);
      const Eigen::VectorXd w = weights_for(strat, task, train, reference, fold);
      model = &cached("rw:" + std::to_string(s) + ":" + std::to_string(t) + ":" + learner_key,
                      [&] { return fit_weighted(spec, train, w); });
    } else {
      model = &cached("base:" + learner_key, [&] { return fit(spec, train); });
      if (strat.kind == Kind::PriorCorrection) {
        if (!classification_) throw InvalidArgument("prior correction needs a classifier");
        if (!same) {
          const Dataset reference = part(task.test, fold, false);
          priors = PriorPair{estimate_priors(train.labels(), train.num_classes).priors,
                             estimate_priors(reference.labels(), train.num_classes).priors};
        }
      }
    }

    const Eigen::VectorXd &y = test.require_outputs();
    if (!classification_) {
      return {(predict(*model, test.features) - y).squaredNorm() /
              static_cast<double>(test.rows())};
    }
    Eigen::MatrixXd p = predict_proba(*model, test.features);
    if (priors) p = label_shift_correct(p, *priors);
    return classification_metrics(p, y);
  }

  const ExperimentConfig &config_;
  int rep_;
  RepData data_;
  std::array<FoldPlan, 2> plans_;
  bool classification_ = false;
  std::map<std::string, Model> models_;
};

} // namespace

std::array<Dataset, 2> populations(const ExperimentConfig &config, int rep) {
  return load_rep(config, rep).pops;
}

const CellSummary &ExperimentResult::cell(std::string_view learner,
                                          std::string_view strategy,
                                          std::string_view train,
                                          std::string_view test) const {
  for (const auto &c : cells) {
    if (c.learner == learner && c.strategy == strategy && c.train == train &&
        c.test == test) {
      return c;
    }
  }
  throw InvalidArgument("no cell " + std::string(learner) + "/" + std::string(strategy) +
                        "/" + std::string(train) + "->" + std::string(test));
}

std::size_t ExperimentResult::metric_index(std::string_view metric) const {
  const auto it = std::find(metrics.begin(), metrics.end(), metric);
  if (it == metrics.end()) throw InvalidArgument("no metric '" + std::string(metric) + "'");
  return static_cast<std::size_t>(it - metrics.begin());
}

ExperimentResult run_experiment(const ExperimentConfig &config) {
  config.validate();
  const int reps = config.repetitions;
  std::vector<RepValues> outputs(static_cast<std::size_t>(reps));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(reps));
  bool classification = false;
  {
    // Probe the task type on repetition 0 so errors surface before threading.
    classification = populations(config, 0)[0].is_classification();
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= reps) return;
      try {
        outputs[static_cast<std::size_t>(r)] = RepRunner(config, r).run();
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
    }
  };
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int nthreads = std::min(reps, config.threads > 0 ? config.threads : hw);
  {
    std::vector<std::jthread> pool;
    for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
    worker();
  }
  for (const auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentResult result;
  result.metrics = metric_names(classification);
  result.repetitions = reps;
  const std::size_t nm = result.metrics.size();
  const auto nf = static_cast<std::size_t>(config.folds);
  for (std::size_t l = 0; l < config.learners.size(); ++l) {
    for (std::size_t s = 0; s < config.strategies.size(); ++s) {
      for (std::size_t t = 0; t < config.tasks.size(); ++t) {
        const std::size_t idx = (l * config.strategies.size() + s) * config.tasks.size() + t;
        CellSummary c;
        c.learner = config.learners[l].to_string();
        c.strategy = config.strategies[s].to_string();
        c.train = config.population_names[static_cast<int>(config.tasks[t].train)];
        c.test = config.population_names[static_cast<int>(config.tasks[t].test)];
        c.per_rep.assign(nm, {});
        c.fold_means.assign(nm, std::vector<double>(nf, 0.0));
        for (std::size_t m = 0; m < nm; ++m) {
          for (int r = 0; r < reps; ++r) {
            const auto &folds = outputs[static_cast<std::size_t>(r)][idx][m];
            c.per_rep[m].push_back(mean(folds));
            for (std::size_t f = 0; f < nf; ++f) c.fold_means[m][f] += folds[f] / reps;
          }
          c.mean.push_back(mean(c.per_rep[m]));
          c.se.push_back(reps > 1 ? standard_error(c.per_rep[m]) : 0.0);
        }
        result.cells.push_back(std::move(c));
      }
    }
  }
  return result;
}

std::string ExperimentResult::to_csv() const {
  std::string out = "learner,strategy,train,test,n";
  for (const auto &m : metrics) out += "," + m + "_mean," + m + "_se";
  out += '\n';
  for (const auto &c : cells) {
    out += csv_escape(c.learner) + ',' + csv_escape(c.strategy) + ',' + csv_escape(c.train) +
           ',' + csv_escape(c.test) + ',' + std::to_string(repetitions);
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      out += ',' + format_double(c.mean[m]) + ',' + format_double(c.se[m]);
    }
    out += '\n';
  }
  return out;
}

EvalReport ExperimentResult::to_report() const {
  EvalReport rep;
  for (const auto &c : cells) {
    rep.stamp.learner = c.learner;
    rep.stamp.strategy = c.strategy;
    rep.stamp.train = c.train;
    rep.stamp.test = c.test;
    rep.stamp.count = repetitions;
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      rep.add("overall", metrics[m], c.mean[m]);
      rep.records.back().se = c.se[m];
      for (std::size_t f = 0; f < c.fold_means[m].size(); ++f) {
        rep.add("fold:" + std::to_string(f), metrics[m], c.fold_means[m][f]);
      }
    }
  }
  return rep;
}

void write_experiment(const ExperimentResult &result, const std::filesystem::path &dir) {
  const std::array<std::pair<std::string, std::string>, 2> files{
      {{"report.csv", result.to_csv()}, {"report.txt", result.to_report().to_jsonl()}}};
  std::vector<std::filesystem::path> written;
  try {
    std::filesystem::create_directories(dir);
    for (const auto &[name, body] : files) {
      written.push_back(dir / name);
      write_file(dir / name, body);
    }
  } catch (const std::exception &e) {
    std::error_code ec;
    for (const auto &p : written) std::filesystem::remove(p, ec);
    throw IoError("cannot write experiment outputs to '" + dir.string() + "': " + e.what());
  }
}

} // namespace dshift
