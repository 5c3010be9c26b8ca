#include "dshift/report.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

#include "dshift/csv.hpp"
#include "dshift/error.hpp"

namespace dshift {

using nlohmann::json;

void EvalReport::add(std::string scope, std::string metric, double value) {
  ReportRecord r = stamp;
  r.scope = std::move(scope);
  r.metric = std::move(metric);
  r.value = value;
  records.push_back(std::move(r));
}

void EvalReport::add_folds(const CvResult &cv, std::string_view metric) {
  for (std::size_t f = 0; f < cv.scores.size(); ++f) {
    add("fold:" + std::to_string(f), std::string(metric), cv.scores[f]);
  }
  add("cv", std::string(metric), cv.mean());
}

void EvalReport::add_subgroups(const SubgroupReport &rep) {
  const std::string loss = to_string(rep.loss);
  for (const auto &b : rep.bins) {
    const std::string scope =
        "bin:" + rep.covariate + ":" + format_double(b.lo) + ":" + format_double(b.hi);
    add(scope, loss, b.risk);
    records.back().count = b.count;
    if (b.accuracy) {
      add(scope, "accuracy", *b.accuracy);
      records.back().count = b.count;
    }
  }
  add("bins", "worst_group_risk", rep.worst_group_risk);
  add("bins", "group_risk_variance", rep.group_risk_variance);
}

void EvalReport::add_groups(const std::vector<std::pair<std::string, double>> &risks,
                            std::string_view metric) {
  if (risks.empty()) throw InvalidArgument("no group risks to report");
  double worst = risks.front().second, sum = 0.0;
  for (const auto &[name, r] : risks) {
    add("group:" + name, std::string(metric), r);
    worst = std::max(worst, r);
    sum += r;
  }
  const double m = sum / static_cast<double>(risks.size());
  double var = 0.0;
  for (const auto &[name, r] : risks) var += (r - m) * (r - m);
  add("groups", "worst_group_risk", worst);
  add("groups", "group_risk_variance", var / static_cast<double>(risks.size()));
}

void EvalReport::add_detector(const DetectorResult &det) {
  add("detector", "auc", det.auc);
}

std::optional<double> EvalReport::find(std::string_view scope,
                                       std::string_view metric) const {
  for (const auto &r : records) {
    if (r.scope == scope && r.metric == metric) return r.value;
  }
  return std::nullopt;
}

std::string EvalReport::to_jsonl() const {
  std::string out;
  for (const auto &r : records) {
    json j{{"learner", r.learner}, {"strategy", r.strategy}, {"train", r.train},
           {"test", r.test},       {"scope", r.scope},       {"metric", r.metric},
           {"value", r.value},     {"se", r.se},             {"count", r.count}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

EvalReport EvalReport::from_jsonl(std::string_view text) {
  EvalReport rep;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ReportRecord r;
      r.learner = j.at("learner").get<std::string>();
      r.strategy = j.at("strategy").get<std::string>();
      r.train = j.at("train").get<std::string>();
      r.test = j.at("test").get<std::string>();
      r.scope = j.at("scope").get<std::string>();
      r.metric = j.at("metric").get<std::string>();
      r.value = j.at("value").get<double>();
      r.se = j.at("se").get<double>();
      r.count = j.at("count").get<Index>();
      rep.records.push_back(std::move(r));
    } catch (const json::exception &e) {
      throw InvalidArgument("report line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rep;
}

std::string EvalReport::to_csv() const {
  std::string out = "learner,strategy,train,test,scope,metric,value,se,count\n";
  for (const auto &r : records) {
    out += csv_escape(r.learner) + ',' + csv_escape(r.strategy) + ',' +
           csv_escape(r.train) + ',' + csv_escape(r.test) + ',' + csv_escape(r.scope) +
           ',' + csv_escape(r.metric) + ',' + format_double(r.value) + ',' +
           format_double(r.se) + ',' + std::to_string(r.count) + '\n';
  }
  return out;
}

} // namespace dshift
