// Age shift: regress-out, reweighting and learner flexibility on the shifted target.
#include "acceptance.hpp"

using namespace dshift;
using namespace acceptance;

int main() {
  // Pinned from a pilot run on a different seed.
  constexpr double kRegressOutGap = 0.10; // accuracy lost by regress-out
  constexpr double kSignificance = 2.0;   // paired z for "improves"

  ExperimentConfig c = ExperimentConfig::preset("fig1");
  c.scenario.n_source = c.scenario.n_target = 1000;
  c.repetitions = 20;
  c.seed = RngSeed{20240601};
  const ExperimentResult r = run_experiment(c);
  const std::string lin = c.learners[0].to_string(), flex = c.learners[1].to_string();
  const std::string base = "baseline", rw = "reweighting:truth", ro = "regress-out:age";
  Reporter rep;

  for (const auto &l : {lin, flex}) {
    for (const char *test : {"young", "old"}) {
      const Paired g = paired(per_rep(r, l, base, "young", test, "accuracy"),
                              per_rep(r, l, ro, "young", test, "accuracy"));
      rep.check("C1(a) " + l + " young->" + test, g.diff > kRegressOutGap,
                fmt("baseline - regress-out accuracy = %.4f (se %.4f), required > %.2f", g.diff,
                    g.se, kRegressOutGap));
    }
  }

  const Paired b = paired(per_rep(r, lin, rw, "young", "old", "accuracy"),
                          per_rep(r, lin, base, "young", "old", "accuracy"));
  rep.check("C1(b) reweighted linear > baseline linear on old", b.diff > 0.0,
            fmt("accuracy gain = %.4f (se %.4f)", b.diff, b.se));

  const Paired f = paired(per_rep(r, flex, base, "young", "old", "accuracy"),
                          per_rep(r, lin, base, "young", "old", "accuracy"));
  rep.check("C1(c) flexible baseline >= linear baseline on old", f.diff >= 0.0,
            fmt("accuracy difference = %.4f (se %.4f)", f.diff, f.se));

  const Paired acc = paired(per_rep(r, flex, rw, "young", "old", "accuracy"),
                            per_rep(r, flex, base, "young", "old", "accuracy"));
  const Paired ll = paired(per_rep(r, flex, rw, "young", "old", "logloss"),
                           per_rep(r, flex, base, "young", "old", "logloss"));
  rep.check("C1(d) reweighting does not improve the flexible learner",
            acc.diff < kSignificance * acc.se && ll.diff >= 0.0,
            fmt("accuracy gain = %.4f (se %.4f, needs < %.1f se); logloss change = %.4f (>= 0)",
                acc.diff, acc.se, kSignificance, ll.diff));
  return rep.finish();
}
