#ifndef DSHIFT_RNG_HPP_
#define DSHIFT_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace dshift {

/// Seed for all randomness in the toolkit.
struct RngSeed {
  std::uint64_t value = 0;
};

/// One step of the SplitMix64 mixer.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent sub-stream seed from a parent seed and a path of
/// stream identifiers, e.g. derive(seed, {scenario, fold, repetition}).
/// Each identifier is folded in with SplitMix64 so sibling streams differ in
/// every bit.
RngSeed derive(RngSeed parent, std::initializer_list<std::uint64_t> path);

/// Reproducible random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are not (their algorithms are
/// implementation defined), so every variate here is produced by an explicit
/// algorithm and is bit-identical across standard libraries.
class Rng {
public:
  explicit Rng(RngSeed seed);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal (Marsaglia polar method).
  double normal();
  double normal(double mean, double sd);
  bool bernoulli(double p);
  /// Gamma(shape, 1) by Marsaglia-Tsang.
  double gamma(double shape);
  double beta(double a, double b);

  /// Uniform random permutation of 0..n-1 (Fisher-Yates).
  std::vector<std::size_t> permutation(std::size_t n);

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

} // namespace dshift

#endif /* DSHIFT_RNG_HPP_ */
