#pragma once

// Random small instances shared by the unit and acceptance tests.

#include <memory>

#include "oracles.hpp"
#include "sketchnmf/sketching.hpp"

namespace instances {

using namespace sketchnmf;

struct OneSided {
  DenseMatrix x;
  std::shared_ptr<const CompressedOneSided> c;
};

struct TwoSided {
  DenseMatrix x;
  std::shared_ptr<const CompressedTwoSided> c;
};

/// Nonnegative data: a nonnegative low-rank part plus nonnegative noise.
inline DenseMatrix data(oracle::Gen& g, std::size_t m, std::size_t n) {
  const std::size_t r0 = g.integer(1, std::min<std::size_t>(4, std::min(m, n)));
  DenseMatrix x = oracle::mul(g.positive(m, r0, 0.0, 1.0), oracle::tr(g.positive(n, r0, 0.0, 1.0)));
  for (double& v : x.data()) v += g.uniform(0.0, 0.1);
  return x;
}

inline OneSided one_sided(oracle::Gen& g, std::size_t m, std::size_t n, std::size_t k,
                          bool orthonormal) {
  DenseMatrix x = data(g, m, n);
  const std::uint64_t seed = g.integer(0, 1u << 30);
  SketchOperator a = orthonormal ? sample_orthonormal_sketch(k, m, seed)
                                 : sample_gaussian_sketch(k, m, seed);
  auto c = std::make_shared<const CompressedOneSided>(compress_one_sided(x, std::move(a)));
  return {std::move(x), std::move(c)};
}

inline TwoSided two_sided(oracle::Gen& g, std::size_t m, std::size_t n, std::size_t k) {
  DenseMatrix x = data(g, m, n);
  const std::uint64_t seed = g.integer(0, 1u << 30);
  auto c = std::make_shared<const CompressedTwoSided>(compress_two_sided(
      x, sample_gaussian_sketch(k, m, seed), sample_gaussian_sketch(k, n, seed, std::nullopt, Side::right)));
  return {std::move(x), std::move(c)};
}

inline oracle::Factors factors(oracle::Gen& g, std::size_t m, std::size_t n, std::size_t r) {
  return {g.positive(m, r, 0.05, 1.0), g.positive(n, r, 0.05, 1.0)};
}

}  // namespace instances
