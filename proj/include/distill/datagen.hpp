#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>

#include "distill/dataset.hpp"

namespace distill {

// Class-structured Gaussian mixture: every class has a mean on the sphere of
// radius class_separation and modes_per_class offsets ~ N(0, mode_spread^2 I)
// around it; items cycle through the modes and add N(0, noise_sigma^2 I).
struct BenchmarkSpec {
  std::uint32_t classes = 10;
  std::uint32_t per_class = 100;
  std::uint32_t dim = 64;
  std::uint32_t modes_per_class = 4;
  double class_separation = 6.0;
  double mode_spread = 1.5;
  double noise_sigma = 1.0;
  std::uint32_t test_per_class = 50;
  std::uint64_t seed = 0;
  // Seed of the test-set noise; defaults to `seed`.
  std::optional<std::uint64_t> test_seed;

  void validate() const;  // throws ConfigError
};

struct Benchmark {
  EmbeddingSet train;
  EmbeddingSet test;
};

// Mixture parameters, exposed for convergence checks.
struct MixtureModel {
  std::vector<Vector> class_means;
  std::vector<std::vector<Vector>> mode_means;  // [class][mode], absolute
};

MixtureModel benchmark_mixture(const BenchmarkSpec& spec);
Benchmark gen_benchmark(const BenchmarkSpec& spec);

}  // namespace distill
