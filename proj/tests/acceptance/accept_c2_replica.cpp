// Age-stratified replica: same-population training wins; regress-out is worst everywhere.
#include <algorithm>

#include "acceptance.hpp"

using namespace dshift;
using namespace acceptance;

int main() {
  ExperimentConfig c = ExperimentConfig::preset("appB-replica");
  c.repetitions = 10;
  c.folds = 10;
  c.seed = RngSeed{20240602};
  const ExperimentResult r = run_experiment(c);
  Reporter rep;
  const std::string base = "baseline", ro = "regress-out:age";
  const std::array<std::string, 2> pops = c.population_names;

  for (const auto &spec : c.learners) {
    const std::string l = spec.to_string();
    for (std::size_t t = 0; t < 2; ++t) {
      const std::string &test = pops[t], &other = pops[1 - t];
      const double same = mean(per_rep(r, l, base, test, test, "accuracy"));
      const double cross = mean(per_rep(r, l, base, other, test, "accuracy"));
      rep.check("C2 same-population " + l + " on " + test, same > cross,
                test + "->" + test + fmt(" %.4f vs ", same) + other + "->" + test +
                    fmt(" %.4f", cross));
    }
  }

  for (const auto &spec : c.learners) {
    const std::string l = spec.to_string();
    for (const auto &task : c.tasks) {
      const std::string train = c.population_names[static_cast<int>(task.train)];
      const std::string test = c.population_names[static_cast<int>(task.test)];
      const double worst = mean(per_rep(r, l, ro, train, test, "accuracy"));
      double best_other = 1.0;
      std::string detail;
      for (const auto &s : c.strategies) {
        if (s.to_string() == ro) continue;
        const double v = mean(per_rep(r, l, s.to_string(), train, test, "accuracy"));
        best_other = std::min(best_other, v);
        detail += s.to_string() + fmt("=%.4f ", v);
      }
      rep.check("C2 regress-out worst " + l + " " + train + "->" + test, worst < best_other,
                fmt("regress-out=%.4f; ", worst) + detail);
    }
  }
  return rep.finish();
}
