#include "dshift/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "json.hpp"

#include "dshift/csv.hpp"
#include "dshift/error.hpp"

namespace dshift {

namespace {

constexpr double kGradientTolerance = 1e-8;
constexpr int kMaxIterations = 500;
// Minimum share of the (normalized) training weight in each tree child.
constexpr double kMinLeafWeight = 2e-3;

bool all_finite(const Eigen::MatrixXd &x) { return x.allFinite(); }

double log1pexp(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

const char *family_name(Family f) {
  switch (f) {
  case Family::LinearRidge: return "linear";
  case Family::Logistic: return "logistic";
  case Family::Polynomial: return "poly";
  case Family::RbfKernel: return "rbf";
  case Family::BoostedStumps: return "boost";
  }
  return "?";
}

Family family_from_name(std::string_view s) {
  if (s == "linear" || s == "ridge") return Family::LinearRidge;
  if (s == "logistic") return Family::Logistic;
  if (s == "poly" || s == "polynomial") return Family::Polynomial;
  if (s == "rbf" || s == "kernel") return Family::RbfKernel;
  if (s == "boost" || s == "boosting") return Family::BoostedStumps;
  throw InvalidArgument("unknown model family '" + std::string(s) + "'");
}

Standardizer fit_standardizer(const Eigen::MatrixXd &x, const Eigen::VectorXd &w) {
  Standardizer s;
  s.mean = (x.transpose() * w);
  s.scale.resize(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean(j)).square().matrix().dot(w);
    const double sd = std::sqrt(std::max(var, 0.0));
    s.scale(j) = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd make_basis(const ModelSpec &spec, const Eigen::MatrixXd &z) {
  const int degree = spec.family == Family::Polynomial ? spec.degree : 1;
  Eigen::MatrixXd out(z.rows(), z.cols() * degree);
  Eigen::MatrixXd power = z;
  for (int p = 0; p < degree; ++p) {
    out.middleCols(p * z.cols(), z.cols()) = power;
    if (p + 1 < degree) power = power.cwiseProduct(z);
  }
  return out;
}

bool uses_logistic_loss(const ModelSpec &spec) {
  return spec.loss == Loss::LogisticLoss;
}

/// Weighted logistic regression by damped Newton. design includes the
/// intercept column first; the penalty skips it.
Eigen::VectorXd newton_logistic(const Eigen::MatrixXd &design,
                                const Eigen::VectorXd &y,
                                const Eigen::VectorXd &w, double penalty,
                                SolverReport &report) {
  const Index p = design.cols();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(p);
  mask(0) = 0.0;

  auto objective = [&](const Eigen::VectorXd &t) {
    const Eigen::VectorXd z = design * t;
    double f = 0.0;
    for (Index i = 0; i < z.size(); ++i) {
      if (w(i) > 0) f += w(i) * (log1pexp(z(i)) - y(i) * z(i));
    }
    return f + 0.5 * penalty * t.cwiseProduct(mask).squaredNorm();
  };

  double f = objective(theta);
  report = SolverReport{};
  for (int it = 0; it < kMaxIterations; ++it) {
    const Eigen::VectorXd z = design * theta;
    Eigen::VectorXd r(z.size()), h(z.size());
    for (Index i = 0; i < z.size(); ++i) {
      const double pr = sigmoid(z(i));
      r(i) = w(i) * (pr - y(i));
      h(i) = w(i) * pr * (1.0 - pr);
    }
    const Eigen::VectorXd grad =
        design.transpose() * r + penalty * theta.cwiseProduct(mask);
    report.iterations = it;
    report.gradient_norm = grad.norm();
    if (report.gradient_norm <= kGradientTolerance) return theta;

    Eigen::MatrixXd hess = design.transpose() * h.asDiagonal() * design;
    hess.diagonal() += penalty * mask;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    Eigen::VectorXd step;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      step = ldlt.solve(grad);
    }
    if (step.size() == 0 || !step.allFinite()) {
      hess.diagonal().array() += 1e-10 + 1e-8 * hess.diagonal().maxCoeff();
      step = hess.ldlt().solve(grad);
    }
    // Backtracking line search (Armijo).
    double t = 1.0;
    const double slope = grad.dot(step);
    Eigen::VectorXd next;
    double fn = f;
    for (int k = 0; k < 60; ++k) {
      next = theta - t * step;
      fn = objective(next);
      if (fn <= f - 1e-4 * t * slope) break;
      t *= 0.5;
    }
    if (!(fn <= f)) {
      // No further decrease representable; accept the current point.
      report.iterations = it + 1;
      return theta;
    }
    theta = next;
    f = fn;
  }
  report.iterations = kMaxIterations;
  return theta;
}

// ---------------------------------------------------------------- ridge ---

void fit_ridge(Model &m, const Eigen::MatrixXd &basis, const Eigen::VectorXd &y,
               const Eigen::VectorXd &w) {
  const Eigen::VectorXd mean = basis.transpose() * w;
  const double ybar = y.dot(w);
  const Index n = basis.rows(), p = basis.cols();
  const double lambda = m.spec.regularization;
  Eigen::MatrixXd a(n + (lambda > 0 ? p : 0), p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(a.rows());
  for (Index i = 0; i < n; ++i) {
    const double s = std::sqrt(w(i));
    a.row(i) = s * (basis.row(i) - mean.transpose());
    b(i) = s * (y(i) - ybar);
  }
  if (lambda > 0) {
    a.bottomRows(p) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(p, p);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-12);
  if (qr.rank() < p) {
    throw NumericalError(
        "singular normal equations; add regularization or remove collinear "
        "features");
  }
  m.coefficients = qr.solve(b);
  m.intercept = ybar - mean.dot(m.coefficients);
}

// --------------------------------------------------------------- kernel ---

Eigen::MatrixXd rbf_matrix(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b,
                           double bandwidth) {
  const Eigen::VectorXd an = a.rowwise().squaredNorm();
  const Eigen::VectorXd bn = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * a * b.transpose();
  d2.colwise() += an;
  d2.rowwise() += bn.transpose();
  const double gamma = 1.0 / (2.0 * bandwidth * bandwidth);
  return (-gamma * d2.array().max(0.0)).exp().matrix();
}

void fit_kernel(Model &m, const Eigen::MatrixXd &z, const Eigen::VectorXd &y,
                const Eigen::VectorXd &w) {
  std::vector<Index> keep;
  for (Index i = 0; i < w.size(); ++i) {
    if (w(i) > 0) keep.push_back(i);
  }
  const auto k = static_cast<Index>(keep.size());
  m.support.resize(k, z.cols());
  Eigen::VectorXd sw(k), yc(k);
  const double ybar = y.dot(w);
  for (Index r = 0; r < k; ++r) {
    m.support.row(r) = z.row(keep[static_cast<std::size_t>(r)]);
    sw(r) = std::sqrt(w(keep[static_cast<std::size_t>(r)]));
    yc(r) = y(keep[static_cast<std::size_t>(r)]) - ybar;
  }
  // (W^1/2 K W^1/2 + ridge I) g = W^1/2 y,  dual = W^1/2 g
  Eigen::MatrixXd sys = rbf_matrix(m.support, m.support, m.spec.bandwidth);
  sys = sw.asDiagonal() * sys * sw.asDiagonal();
  sys.diagonal().array() += m.spec.regularization;
  Eigen::LLT<Eigen::MatrixXd> llt(sys);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("kernel system is singular; increase the ridge");
  }
  const Eigen::VectorXd g = llt.solve(sw.cwiseProduct(yc));
  m.dual = sw.cwiseProduct(g);
  m.intercept = ybar;
}

// ------------------------------------------------------------- boosting ---

struct BoostState {
  const Eigen::MatrixXd &z;
  const Eigen::VectorXd &y;
  const Eigen::VectorXd &w;
  bool logistic;
  std::vector<std::vector<Index>> sorted; ///< positive-weight rows per feature
  std::vector<Index> active;
};

double boost_risk(const BoostState &s, const Eigen::VectorXd &f) {
  double r = 0.0;
  for (Index i : s.active) {
    r += s.logistic ? s.w(i) * (log1pexp(f(i)) - s.y(i) * f(i))
                    : 0.5 * s.w(i) * (f(i) - s.y(i)) * (f(i) - s.y(i));
  }
  return r;
}

Tree build_tree(const BoostState &s, const Eigen::VectorXd &g,
                const Eigen::VectorXd &h, int max_depth, double reg) {
  const double guard = reg + 1e-12;
  Tree tree;
  std::vector<int> node_of(static_cast<std::size_t>(s.z.rows()), -1);
  double g0 = 0, h0 = 0;
  for (Index i : s.active) {
    node_of[static_cast<std::size_t>(i)] = 0;
    g0 += g(i);
    h0 += h(i);
  }
  tree.nodes.push_back(TreeNode{-1, 0.0, -1, -1, -g0 / (h0 + guard)});

  struct Stats {
    double g = 0, h = 0, w = 0;
  };
  struct Best {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
  };
  std::vector<int> frontier{0};
  for (int depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
    std::vector<int> slot(tree.nodes.size(), -1);
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      slot[static_cast<std::size_t>(frontier[k])] = static_cast<int>(k);
    }
    std::vector<Stats> total(frontier.size());
    for (Index i : s.active) {
      const int sl = slot[static_cast<std::size_t>(node_of[static_cast<std::size_t>(i)])];
      if (sl < 0) continue;
      total[static_cast<std::size_t>(sl)].g += g(i);
      total[static_cast<std::size_t>(sl)].h += h(i);
      total[static_cast<std::size_t>(sl)].w += s.w(i);
    }
    std::vector<Best> best(frontier.size());
    for (Index f = 0; f < s.z.cols(); ++f) {
      std::vector<Stats> left(frontier.size());
      std::vector<double> prev(frontier.size(),
                               -std::numeric_limits<double>::infinity());
      std::vector<char> seen(frontier.size(), 0);
      for (Index i : s.sorted[static_cast<std::size_t>(f)]) {
        const int nd = node_of[static_cast<std::size_t>(i)];
        if (nd < 0) continue;
        const int sl = slot[static_cast<std::size_t>(nd)];
        if (sl < 0) continue;
        const auto k = static_cast<std::size_t>(sl);
        const double v = s.z(i, f);
        if (seen[k] && v > prev[k]) {
          const Stats &l = left[k];
          const Stats &t = total[k];
          const double wr = t.w - l.w;
          if (l.w >= kMinLeafWeight && wr >= kMinLeafWeight) {
            const double gr = t.g - l.g, hr = t.h - l.h;
            const double gain = l.g * l.g / (l.h + guard) + gr * gr / (hr + guard) -
                                t.g * t.g / (t.h + guard);
            if (gain > best[k].gain) {
              best[k] = Best{gain, static_cast<int>(f), 0.5 * (prev[k] + v)};
            }
          }
        }
        left[k].g += g(i);
        left[k].h += h(i);
        left[k].w += s.w(i);
        prev[k] = v;
        seen[k] = 1;
      }
    }
    std::vector<int> next;
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      if (best[k].feature < 0 || best[k].gain <= 1e-14) continue;
      const int parent = frontier[k];
      const int left_id = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(TreeNode{});
      tree.nodes.push_back(TreeNode{});
      TreeNode &node = tree.nodes[static_cast<std::size_t>(parent)];
      node.feature = best[k].feature;
      node.threshold = best[k].threshold;
      node.left = left_id;
      node.right = left_id + 1;
      next.push_back(left_id);
      next.push_back(left_id + 1);
    }
    // Route rows to the new children and set leaf values.
    std::map<int, Stats> child_stats;
    for (Index i : s.active) {
      int &nd = node_of[static_cast<std::size_t>(i)];
      if (nd < 0) continue;
      const TreeNode &node = tree.nodes[static_cast<std::size_t>(nd)];
      if (node.feature < 0) {
        nd = -1; // frontier node left unsplit: final leaf
        continue;
      }
      nd = s.z(i, node.feature) < node.threshold ? node.left : node.right;
      auto &st = child_stats[nd];
      st.g += g(i);
      st.h += h(i);
    }
    for (const auto &[id, st] : child_stats) {
      tree.nodes[static_cast<std::size_t>(id)].value = -st.g / (st.h + guard);
    }
    frontier = std::move(next);
  }
  return tree;
}

void fit_boosted(Model &m, const Eigen::MatrixXd &z, const Eigen::VectorXd &y,
                 const Eigen::VectorXd &w) {
  BoostState s{z, y, w, uses_logistic_loss(m.spec), {}, {}};
  for (Index i = 0; i < w.size(); ++i) {
    if (w(i) > 0) s.active.push_back(i);
  }
  s.sorted.resize(static_cast<std::size_t>(z.cols()));
  for (Index f = 0; f < z.cols(); ++f) {
    auto &order = s.sorted[static_cast<std::size_t>(f)];
    order = s.active;
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return z(a, f) < z(b, f); });
  }

  const double ybar = y.dot(w);
  if (s.logistic) {
    m.intercept = std::log(ybar / (1.0 - ybar));
  } else {
    m.intercept = ybar;
  }
  Eigen::VectorXd f = Eigen::VectorXd::Constant(z.rows(), m.intercept);
  double risk = boost_risk(s, f);
  m.training_risk = {risk};
  Eigen::VectorXd g(z.rows()), h(z.rows());
  for (int round = 0; round < m.spec.rounds; ++round) {
    for (Index i : s.active) {
      if (s.logistic) {
        const double p = sigmoid(f(i));
        g(i) = w(i) * (p - y(i));
        h(i) = w(i) * p * (1.0 - p);
      } else {
        g(i) = w(i) * (f(i) - y(i));
        h(i) = w(i);
      }
    }
    Tree tree = build_tree(s, g, h, m.spec.max_depth, m.spec.regularization);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(z.rows());
    for (Index i : s.active) out(i) = tree.evaluate(z.row(i));

    // Shrink the step until the training risk does not increase.
    double step = m.spec.learning_rate;
    double next_risk = boost_risk(s, f + step * out);
    for (int k = 0; k < 40 && next_risk > risk; ++k) {
      step *= 0.5;
      next_risk = boost_risk(s, f + step * out);
    }
    if (next_risk > risk) break;
    f += step * out;
    risk = next_risk;
    m.trees.push_back(std::move(tree));
    m.tree_scales.push_back(step);
    m.training_risk.push_back(risk);
  }
  m.solver.iterations = static_cast<int>(m.trees.size());
}

// ------------------------------------------------------------ json I/O ---

nlohmann::json vec_json(const Eigen::VectorXd &v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd json_vec(const nlohmann::json &j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

nlohmann::json mat_json(const Eigen::MatrixXd &m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    rows.push_back(vec_json(m.row(i).transpose()));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Eigen::MatrixXd json_mat(const nlohmann::json &j) {
  Eigen::MatrixXd m(j.at("rows").get<Index>(), j.at("cols").get<Index>());
  for (Index i = 0; i < m.rows(); ++i) {
    m.row(i) = json_vec(j.at("data").at(static_cast<std::size_t>(i))).transpose();
  }
  return m;
}

void check_features(const Model &model, const Eigen::MatrixXd &x) {
  if (x.cols() != model.input_width) {
    throw InvalidArgument("feature width " + std::to_string(x.cols()) +
                          " does not match model width " +
                          std::to_string(model.input_width));
  }
  if (!all_finite(x)) throw InvalidArgument("non-finite input features");
}

} // namespace

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double Tree::evaluate(const Eigen::Ref<const Eigen::RowVectorXd> &x) const {
  std::size_t k = 0;
  for (;;) {
    const TreeNode &n = nodes[k];
    if (n.feature < 0) return n.value;
    k = static_cast<std::size_t>(x(n.feature) < n.threshold ? n.left : n.right);
  }
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd &x) const {
  return (x.rowwise() - mean.transpose()).array().rowwise() /
         scale.transpose().array();
}

ModelSpec ModelSpec::linear_ridge(double regularization) {
  ModelSpec s;
  s.family = Family::LinearRidge;
  s.loss = Loss::Squared;
  s.regularization = regularization;
  return s;
}

ModelSpec ModelSpec::logistic(double regularization) {
  ModelSpec s;
  s.family = Family::Logistic;
  s.loss = Loss::LogisticLoss;
  s.regularization = regularization;
  return s;
}

ModelSpec ModelSpec::polynomial(int degree, double regularization, Loss loss) {
  ModelSpec s;
  s.family = Family::Polynomial;
  s.degree = degree;
  s.regularization = regularization;
  s.loss = loss;
  return s;
}

ModelSpec ModelSpec::rbf_kernel(double bandwidth, double ridge) {
  ModelSpec s;
  s.family = Family::RbfKernel;
  s.loss = Loss::Squared;
  s.bandwidth = bandwidth;
  s.regularization = ridge;
  return s;
}

ModelSpec ModelSpec::boosted_stumps(int rounds, double learning_rate,
                                    int max_depth, Loss loss) {
  ModelSpec s;
  s.family = Family::BoostedStumps;
  s.rounds = rounds;
  s.learning_rate = learning_rate;
  s.max_depth = max_depth;
  s.loss = loss;
  return s;
}

void ModelSpec::validate() const {
  if (!(regularization >= 0.0) || !std::isfinite(regularization)) {
    throw InvalidArgument("regularization must be a finite value >= 0");
  }
  switch (family) {
  case Family::LinearRidge:
    if (loss != Loss::Squared) {
      throw InvalidArgument("linear ridge uses the squared loss");
    }
    break;
  case Family::Logistic:
    if (loss != Loss::LogisticLoss) {
      throw InvalidArgument("logistic family uses the logistic loss");
    }
    break;
  case Family::Polynomial:
    if (degree < 1) throw InvalidArgument("polynomial degree must be >= 1");
    break;
  case Family::RbfKernel:
    if (!(bandwidth > 0.0)) throw InvalidArgument("bandwidth must be > 0");
    if (loss != Loss::Squared) {
      throw InvalidArgument("kernel learner supports the squared loss only");
    }
    break;
  case Family::BoostedStumps:
    if (rounds < 1) throw InvalidArgument("rounds must be >= 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
      throw InvalidArgument("learning_rate must lie in (0, 1]");
    }
    if (max_depth < 1 || max_depth > 8) {
      throw InvalidArgument("max_depth must lie in [1, 8]");
    }
    break;
  }
}

std::string ModelSpec::to_string() const {
  std::string out = family_name(family);
  std::string sep = ":";
  auto add = [&](const std::string &k, const std::string &v) {
    out += sep + k + "=" + v;
    sep = ",";
  };
  switch (family) {
  case Family::LinearRidge:
  case Family::Logistic:
    add("reg", format_double(regularization));
    break;
  case Family::Polynomial:
    add("degree", std::to_string(degree));
    add("reg", format_double(regularization));
    add("loss", loss == Loss::Squared ? "squared" : "logistic");
    break;
  case Family::RbfKernel:
    add("bandwidth", format_double(bandwidth));
    add("ridge", format_double(regularization));
    break;
  case Family::BoostedStumps:
    add("rounds", std::to_string(rounds));
    add("lr", format_double(learning_rate));
    add("depth", std::to_string(max_depth));
    add("reg", format_double(regularization));
    add("loss", loss == Loss::Squared ? "squared" : "logistic");
    break;
  }
  return out;
}

ModelSpec ModelSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  const Family family = family_from_name(text.substr(0, colon));
  ModelSpec s;
  switch (family) {
  case Family::LinearRidge: s = linear_ridge(); break;
  case Family::Logistic: s = logistic(); break;
  case Family::Polynomial: s = polynomial(1); break;
  case Family::RbfKernel: s = rbf_kernel(1.0, 1e-3); break;
  case Family::BoostedStumps: s = boosted_stumps(); break;
  }
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{}
                                             : rest.substr(comma + 1);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw InvalidArgument("model option '" + std::string(item) +
                              "' must be key=value");
      }
      const auto key = item.substr(0, eq);
      const auto val = item.substr(eq + 1);
      if (key == "reg" || key == "ridge") {
        s.regularization = parse_double(val);
      } else if (key == "degree") {
        s.degree = static_cast<int>(parse_double(val));
      } else if (key == "bandwidth") {
        s.bandwidth = parse_double(val);
      } else if (key == "rounds") {
        s.rounds = static_cast<int>(parse_double(val));
      } else if (key == "lr") {
        s.learning_rate = parse_double(val);
      } else if (key == "depth") {
        s.max_depth = static_cast<int>(parse_double(val));
      } else if (key == "loss") {
        if (val == "squared") {
          s.loss = Loss::Squared;
        } else if (val == "logistic") {
          s.loss = Loss::LogisticLoss;
        } else {
          throw InvalidArgument("unknown loss '" + std::string(val) + "'");
        }
      } else {
        throw InvalidArgument("unknown model option '" + std::string(key) + "'");
      }
    }
  }
  s.validate();
  return s;
}

Model fit_weighted(const ModelSpec &spec, const Dataset &data,
                   const Eigen::VectorXd &weights) {
  spec.validate();
  const auto &y_raw = data.require_outputs();
  const Index n = data.rows();
  if (n == 0) throw InvalidArgument("cannot fit on an empty dataset");
  if (weights.size() != n) {
    throw InvalidArgument("weights have " + std::to_string(weights.size()) +
                          " entries for " + std::to_string(n) + " rows");
  }
  if (!weights.allFinite() || (weights.array() < 0).any() || weights.sum() <= 0) {
    throw InvalidArgument("weights must be finite, nonnegative, not all zero");
  }
  if (!all_finite(data.features)) throw InvalidArgument("non-finite features");

  Model m;
  m.spec = spec;
  m.input_width = static_cast<int>(data.cols());
  m.num_classes = data.num_classes;
  m.solver = SolverReport{};

  const Eigen::VectorXd w = weights / weights.sum();
  Eigen::VectorXd y = y_raw;
  if (data.is_classification()) {
    if (data.num_classes != 2) {
      throw InvalidArgument("classifiers support binary tasks only");
    }
    double mass0 = 0.0, mass1 = 0.0;
    for (Index i = 0; i < n; ++i) (y(i) == 1.0 ? mass1 : mass0) += w(i);
    if (mass0 <= 0.0 || mass1 <= 0.0) {
      throw InvalidArgument("single-class classification data");
    }
    if (!uses_logistic_loss(spec)) {
      y = 2.0 * y.array() - 1.0; // +-1 coding for squared-loss classifiers
    }
  } else if (uses_logistic_loss(spec)) {
    throw InvalidArgument("logistic loss needs classification outputs");
  }

  m.standardizer = fit_standardizer(data.features, w);
  const Eigen::MatrixXd z = m.standardizer.apply(data.features);

  switch (spec.family) {
  case Family::LinearRidge:
  case Family::Logistic:
  case Family::Polynomial: {
    const Eigen::MatrixXd basis = make_basis(spec, z);
    if (uses_logistic_loss(spec)) {
      Eigen::MatrixXd design(n, basis.cols() + 1);
      design << Eigen::VectorXd::Ones(n), basis;
      const Eigen::VectorXd theta =
          newton_logistic(design, y, w, spec.regularization, m.solver);
      m.intercept = theta(0);
      m.coefficients = theta.tail(basis.cols());
    } else {
      fit_ridge(m, basis, y, w);
    }
    break;
  }
  case Family::RbfKernel:
    fit_kernel(m, z, y, w);
    break;
  case Family::BoostedStumps:
    fit_boosted(m, z, y, w);
    break;
  }
  if (!std::isfinite(m.intercept) || !m.coefficients.allFinite() ||
      !m.dual.allFinite()) {
    throw NumericalError("fit produced non-finite parameters");
  }
  return m;
}

Model fit(const ModelSpec &spec, const Dataset &data) {
  if (data.weights) return fit_weighted(spec, data, *data.weights);
  return fit_weighted(spec, data, Eigen::VectorXd::Ones(data.rows()));
}

Model fit(const ModelSpec &spec, const Dataset &data, const WeightVector &weights) {
  return fit_weighted(spec, data, weights.values);
}

Eigen::VectorXd predict(const Model &model, const Eigen::MatrixXd &features) {
  check_features(model, features);
  const Eigen::MatrixXd z = model.standardizer.apply(features);
  switch (model.spec.family) {
  case Family::LinearRidge:
  case Family::Logistic:
  case Family::Polynomial:
    return (make_basis(model.spec, z) * model.coefficients).array() +
           model.intercept;
  case Family::RbfKernel:
    return (rbf_matrix(z, model.support, model.spec.bandwidth) * model.dual)
               .array() +
           model.intercept;
  case Family::BoostedStumps: {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(z.rows(), model.intercept);
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
      for (Index i = 0; i < z.rows(); ++i) {
        out(i) += model.tree_scales[t] * model.trees[t].evaluate(z.row(i));
      }
    }
    return out;
  }
  }
  return {};
}

Eigen::MatrixXd predict_proba(const Model &model, const Eigen::MatrixXd &features) {
  if (!model.is_classifier()) {
    throw InvalidArgument("predict_proba requires a classifier");
  }
  const Eigen::VectorXd d = predict(model, features);
  Eigen::MatrixXd p(d.size(), 2);
  for (Index i = 0; i < d.size(); ++i) {
    double p1;
    if (model.calibration) {
      p1 = sigmoid(model.calibration->slope * d(i) + model.calibration->intercept);
    } else if (model.spec.loss == Loss::LogisticLoss) {
      p1 = sigmoid(d(i));
    } else {
      p1 = std::clamp(0.5 * (1.0 + d(i)), 0.0, 1.0);
    }
    p(i, 0) = 1.0 - p1;
    p(i, 1) = p1;
  }
  return p;
}

Eigen::VectorXd predict_class(const Model &model, const Eigen::MatrixXd &features) {
  const Eigen::MatrixXd p = predict_proba(model, features);
  Eigen::VectorXd c(p.rows());
  for (Index i = 0; i < p.rows(); ++i) c(i) = p(i, 1) > p(i, 0) ? 1.0 : 0.0;
  return c;
}

Model calibrate_platt(const Model &model, const Dataset &holdout) {
  if (!model.is_classifier() || model.num_classes != 2) {
    throw InvalidArgument("Platt calibration needs a binary classifier");
  }
  if (holdout.num_classes != 2) {
    throw InvalidArgument("Platt calibration needs a binary holdout");
  }
  const auto &y = holdout.require_outputs();
  const Index n = holdout.rows();
  Eigen::VectorXd w = holdout.weights ? *holdout.weights : Eigen::VectorXd::Ones(n);
  w /= w.sum();
  double mass0 = 0.0, mass1 = 0.0;
  for (Index i = 0; i < n; ++i) (y(i) == 1.0 ? mass1 : mass0) += w(i);
  if (mass0 <= 0.0 || mass1 <= 0.0) {
    throw InvalidArgument("calibration holdout contains a single class");
  }
  const Eigen::VectorXd d = predict(model, holdout.features);
  Eigen::MatrixXd design(n, 2);
  design << Eigen::VectorXd::Ones(n), d;
  SolverReport report;
  const Eigen::VectorXd theta = newton_logistic(design, y, w, 0.0, report);
  Model out = model;
  out.calibration = Calibration{theta(1), theta(0)};
  return out;
}

LinearCoefficients raw_linear_coefficients(const Model &model) {
  const bool linear = model.spec.family == Family::LinearRidge ||
                      model.spec.family == Family::Logistic ||
                      (model.spec.family == Family::Polynomial &&
                       model.spec.degree == 1);
  if (!linear) throw InvalidArgument("model is not linear in its inputs");
  LinearCoefficients c;
  c.slopes = model.coefficients.cwiseQuotient(model.standardizer.scale);
  c.intercept = model.intercept - c.slopes.dot(model.standardizer.mean);
  return c;
}

std::string Model::to_json() const {
  nlohmann::json j;
  j["spec"] = spec.to_string();
  j["input_width"] = input_width;
  j["num_classes"] = num_classes;
  j["standardizer"] = {{"mean", vec_json(standardizer.mean)},
                       {"scale", vec_json(standardizer.scale)}};
  j["intercept"] = intercept;
  j["coefficients"] = vec_json(coefficients);
  j["support"] = mat_json(support);
  j["dual"] = vec_json(dual);
  nlohmann::json trees_json = nlohmann::json::array();
  for (const auto &t : trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto &n : t.nodes) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    }
    trees_json.push_back(nodes);
  }
  j["trees"] = trees_json;
  j["tree_scales"] = tree_scales;
  j["training_risk"] = training_risk;
  if (calibration) {
    j["calibration"] = {{"slope", calibration->slope},
                        {"intercept", calibration->intercept}};
  }
  j["solver"] = {{"iterations", solver.iterations},
                 {"gradient_norm", solver.gradient_norm},
                 {"tolerance", solver.tolerance},
                 {"max_iterations", solver.max_iterations}};
  return j.dump(1);
}

Model Model::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw InvalidArgument(std::string("malformed model document: ") + e.what());
  }
  Model m;
  try {
    m.spec = ModelSpec::parse(j.at("spec").get<std::string>());
    m.input_width = j.at("input_width").get<int>();
    m.num_classes = j.at("num_classes").get<int>();
    m.standardizer.mean = json_vec(j.at("standardizer").at("mean"));
    m.standardizer.scale = json_vec(j.at("standardizer").at("scale"));
    m.intercept = j.at("intercept").get<double>();
    m.coefficients = json_vec(j.at("coefficients"));
    m.support = json_mat(j.at("support"));
    m.dual = json_vec(j.at("dual"));
    for (const auto &tj : j.at("trees")) {
      Tree t;
      for (const auto &nj : tj) {
        t.nodes.push_back(TreeNode{nj.at(0).get<int>(), nj.at(1).get<double>(),
                                   nj.at(2).get<int>(), nj.at(3).get<int>(),
                                   nj.at(4).get<double>()});
      }
      m.trees.push_back(std::move(t));
    }
    m.tree_scales = j.at("tree_scales").get<std::vector<double>>();
    m.training_risk = j.at("training_risk").get<std::vector<double>>();
    if (j.contains("calibration")) {
      m.calibration = Calibration{j["calibration"].at("slope").get<double>(),
                                  j["calibration"].at("intercept").get<double>()};
    }
    const auto &s = j.at("solver");
    m.solver = SolverReport{s.at("iterations").get<int>(),
                            s.at("gradient_norm").get<double>(),
                            s.at("tolerance").get<double>(),
                            s.at("max_iterations").get<int>()};
  } catch (const nlohmann::json::exception &e) {
    throw InvalidArgument(std::string("malformed model document: ") + e.what());
  }
  return m;
}

} // namespace dshift
