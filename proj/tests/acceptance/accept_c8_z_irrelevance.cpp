// An independent Z in the discriminative view only adds weight variance.
#include "acceptance.hpp"
#include "dshift/eval.hpp"

using namespace dshift;
using namespace acceptance;

namespace {

double variance(const Eigen::VectorXd &v) {
  return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1);
}

} // namespace

int main() {
  constexpr int kSeeds = 30;
  constexpr double kAlpha = 0.05;

  const FeatureView plain = FeatureView::xy(), with_z = FeatureView::parse("xy+Z");
  const ModelSpec linear = ModelSpec::linear_ridge();
  int var_up = 0, err_down = 0;
  double var0 = 0, var1 = 0, err0 = 0, err1 = 0;
  for (int s = 0; s < kSeeds; ++s) {
    const RngSeed base = derive(RngSeed{20240608}, {static_cast<std::uint64_t>(s)});
    ScenarioConfig c = ScenarioConfig::preset("fig3b");
    c.selection.auxiliary_z = true;
    c.seed = derive(base, {0});
    const Scenario sc = generate(c);
    const Model m = fit(linear, sc.source);
    const double target = risk(m, sc.target, ScoreLoss::Squared);

    auto run = [&](const FeatureView &v, double &var, double &err) {
      const auto r = estimate_weights_discriminative(sc.source, sc.target, v,
                                                     ModelSpec::logistic(), derive(base, {1}));
      var = variance(r.weights.values);
      err = std::abs(risk(m, sc.source, ScoreLoss::Squared, r.weights) - target);
    };
    double v0, e0, v1, e1;
    run(plain, v0, e0);
    run(with_z, v1, e1);
    var_up += v1 > v0 ? 1 : 0;
    err_down += e1 < e0 ? 1 : 0;
    var0 += v0 / kSeeds;
    var1 += v1 / kSeeds;
    err0 += e0 / kSeeds;
    err1 += e1 / kSeeds;
  }
  Reporter rep;
  const double p_var = sign_test_upper(var_up, kSeeds);
  rep.check("C8 Z increases weight variance", p_var < kAlpha && var1 > var0,
            fmt("variance up in %.0f of 30 seeds (sign test p = %.4f, required < 0.05); mean "
                "variance %.4f -> %.4f",
                var_up, p_var, var0, var1));
  const double p_err = sign_test_upper(err_down, kSeeds);
  rep.check("C8 Z does not reduce the risk-estimate error", p_err >= kAlpha,
            fmt("error down in %.0f of 30 seeds (sign test p = %.4f, required >= 0.05); mean "
                "|error| %.4f -> %.4f",
                err_down, p_err, err0, err1));
  return rep.finish();
}
