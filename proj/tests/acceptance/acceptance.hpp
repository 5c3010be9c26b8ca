#ifndef DSHIFT_ACCEPTANCE_HPP_
#define DSHIFT_ACCEPTANCE_HPP_

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "dshift/experiment.hpp"

namespace acceptance {

/// Prints one line per criterion and turns failures into the exit status.
class Reporter {
public:
  void check(const std::string &id, bool ok, const std::string &detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str());
    std::fflush(stdout);
    failures_ += ok ? 0 : 1;
  }
  int finish() const { return failures_ == 0 ? 0 : 1; }

private:
  int failures_ = 0;
};

inline std::string fmt(const char *f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

inline double mean(const std::vector<double> &v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Mean and standard error of a - b over paired repetitions.
struct Paired {
  double diff = 0;
  double se = 0;
};

inline Paired paired(const std::vector<double> &a, const std::vector<double> &b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double m = mean(d);
  double ss = 0;
  for (double x : d) ss += (x - m) * (x - m);
  const double n = static_cast<double>(d.size());
  return {m, std::sqrt(ss / (n - 1) / n)};
}

/// P(X >= k) for X ~ Binomial(n, 1/2).
inline double sign_test_upper(int k, int n) {
  double p = 0;
  for (int i = k; i <= n; ++i) {
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) -
                  n * std::log(2.0));
  }
  return p;
}

inline const std::vector<double> &per_rep(const dshift::ExperimentResult &r,
                                          const std::string &learner,
                                          const std::string &strategy,
                                          const std::string &train, const std::string &test,
                                          const std::string &metric) {
  return r.cell(learner, strategy, train, test).per_rep[r.metric_index(metric)];
}

} // namespace acceptance

#endif /* DSHIFT_ACCEPTANCE_HPP_ */
