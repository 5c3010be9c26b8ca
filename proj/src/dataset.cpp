#include "dshift/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "dshift/error.hpp"

namespace dshift {

namespace {

void check_length(Index n, Index got, const std::string &what) {
  if (got != n) {
    throw InvalidArgument(what + " has " + std::to_string(got) +
                          " entries, expected " + std::to_string(n));
  }
}

template <typename Vec>
Vec take(const Vec &v, std::span<const Index> rows) {
  Vec out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out(static_cast<Index>(i)) = v(rows[i]);
  }
  return out;
}

} // namespace

void Dataset::validate() const {
  const Index n = rows();
  if (static_cast<Index>(column_names.size()) != cols()) {
    throw InvalidArgument("column_names does not match feature width");
  }
  if (outputs) {
    check_length(n, outputs->size(), "outputs");
    if (num_classes == 1 || num_classes < 0) {
      throw InvalidArgument("classification needs at least 2 classes");
    }
    for (Index i = 0; i < n; ++i) {
      const double y = (*outputs)(i);
      if (!std::isfinite(y)) throw InvalidArgument("non-finite output");
      if (num_classes >= 2 &&
          (y != std::floor(y) || y < 0 || y >= num_classes)) {
        throw InvalidArgument("class label " + std::to_string(y) +
                              " outside {0.." +
                              std::to_string(num_classes - 1) + "}");
      }
    }
  }
  for (const auto &c : covariates) check_length(n, c.values.size(), c.name);
  if (groups) {
    check_length(n, static_cast<Index>(groups->size()), group_name);
  }
  if (weights) {
    check_length(n, weights->size(), weight_name);
    for (Index i = 0; i < n; ++i) {
      const double w = (*weights)(i);
      if (!std::isfinite(w)) throw InvalidArgument("non-finite weight");
      if (w < 0) throw InvalidArgument("negative weight");
    }
    if (n > 0 && weights->sum() <= 0) {
      throw InvalidArgument("weights are all zero");
    }
  }
}

bool Dataset::has_covariate(std::string_view name) const {
  return std::any_of(covariates.begin(), covariates.end(),
                     [&](const NamedColumn &c) { return c.name == name; });
}

const Eigen::VectorXd &Dataset::covariate(std::string_view name) const {
  for (const auto &c : covariates) {
    if (c.name == name) return c.values;
  }
  throw InvalidArgument("covariate '" + std::string(name) + "' not present");
}

void Dataset::set_covariate(std::string name, Eigen::VectorXd values) {
  for (auto &c : covariates) {
    if (c.name == name) {
      c.values = std::move(values);
      return;
    }
  }
  covariates.push_back({std::move(name), std::move(values)});
}

std::vector<int> Dataset::labels() const {
  if (!is_classification()) {
    throw InvalidArgument("dataset is not a classification dataset");
  }
  const auto &y = require_outputs();
  std::vector<int> out(static_cast<std::size_t>(y.size()));
  for (Index i = 0; i < y.size(); ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<int>(y(i));
  }
  return out;
}

const Eigen::VectorXd &Dataset::require_outputs() const {
  if (!outputs) throw InvalidArgument("dataset has no outputs");
  return *outputs;
}

Dataset Dataset::select_rows(std::span<const Index> rows) const {
  Dataset out;
  out.column_names = column_names;
  out.output_name = output_name;
  out.num_classes = num_classes;
  out.group_name = group_name;
  out.weight_name = weight_name;
  out.features.resize(static_cast<Index>(rows.size()), cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Index>(i)) = features.row(rows[i]);
  }
  if (outputs) out.outputs = take(*outputs, rows);
  for (const auto &c : covariates) {
    out.covariates.push_back({c.name, take(c.values, rows)});
  }
  if (groups) {
    std::vector<std::string> g;
    g.reserve(rows.size());
    for (Index r : rows) g.push_back((*groups)[static_cast<std::size_t>(r)]);
    out.groups = std::move(g);
  }
  if (weights) out.weights = take(*weights, rows);
  return out;
}

bool Dataset::operator==(const Dataset &other) const {
  return features.rows() == other.features.rows() &&
         features.cols() == other.features.cols() &&
         features == other.features && column_names == other.column_names &&
         outputs == other.outputs && output_name == other.output_name &&
         num_classes == other.num_classes && covariates == other.covariates &&
         groups == other.groups && group_name == other.group_name &&
         weights == other.weights && weight_name == other.weight_name;
}

Dataset make_dataset(Eigen::MatrixXd features,
                     std::optional<Eigen::VectorXd> outputs, int num_classes) {
  Dataset d;
  d.column_names.reserve(static_cast<std::size_t>(features.cols()));
  for (Index j = 0; j < features.cols(); ++j) {
    d.column_names.push_back("x" + std::to_string(j));
  }
  d.features = std::move(features);
  d.outputs = std::move(outputs);
  d.num_classes = num_classes;
  d.validate();
  return d;
}

Dataset concat_rows(const Dataset &a, const Dataset &b) {
  if (a.cols() != b.cols() || a.outputs.has_value() != b.outputs.has_value() ||
      a.covariates.size() != b.covariates.size() ||
      a.groups.has_value() != b.groups.has_value() ||
      a.weights.has_value() != b.weights.has_value()) {
    throw InvalidArgument("cannot concatenate datasets with different schemas");
  }
  auto stack = [](const Eigen::VectorXd &x, const Eigen::VectorXd &y) {
    Eigen::VectorXd out(x.size() + y.size());
    out << x, y;
    return out;
  };
  Dataset out = a;
  out.num_classes = std::max(a.num_classes, b.num_classes);
  out.features.resize(a.rows() + b.rows(), a.cols());
  out.features << a.features, b.features;
  if (a.outputs) out.outputs = stack(*a.outputs, *b.outputs);
  for (auto &c : out.covariates) c.values = stack(c.values, b.covariate(c.name));
  if (a.groups) out.groups->insert(out.groups->end(), b.groups->begin(),
                                   b.groups->end());
  if (a.weights) out.weights = stack(*a.weights, *b.weights);
  return out;
}

TrainTest split(const Dataset &data, double test_fraction, RngSeed seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidArgument("test_fraction must lie in (0, 1)");
  }
  const Index n = data.rows();
  if (n < 2) throw InvalidArgument("split needs at least 2 rows");
  const auto n_test =
      static_cast<Index>(std::llround(test_fraction * static_cast<double>(n)));
  if (n_test < 1 || n_test > n - 1) {
    throw InvalidArgument("split leaves one side empty (n=" +
                          std::to_string(n) + ")");
  }
  Rng rng(seed);
  const auto perm = rng.permutation(static_cast<std::size_t>(n));
  std::vector<char> is_test(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n_test; ++i) is_test[perm[static_cast<std::size_t>(i)]] = 1;

  TrainTest out;
  for (Index i = 0; i < n; ++i) {
    (is_test[static_cast<std::size_t>(i)] ? out.test_rows : out.train_rows)
        .push_back(i);
  }
  out.train = data.select_rows(out.train_rows);
  out.test = data.select_rows(out.test_rows);
  return out;
}

} // namespace dshift
