#include "distill/datagen.hpp"

#include <cmath>

#include "distill/errors.hpp"
#include "distill/rng.hpp"

namespace distill {

namespace {

constexpr std::uint64_t kStructureStream = 0;
constexpr std::uint64_t kTrainStreamBase = 1;
constexpr std::uint64_t kTestStreamBase = 1ULL << 32;

void fill_items(EmbeddingSet& out, const BenchmarkSpec& spec, const MixtureModel& mix,
                std::uint32_t per_class, std::uint64_t seed, std::uint64_t stream_base) {
  out.dim = spec.dim;
  out.num_classes = spec.classes;
  Vector x(spec.dim);
  for (std::uint32_t c = 0; c < spec.classes; ++c) {
    RngStream rng = derive_stream(seed, stream_base + c);
    for (std::uint32_t i = 0; i < per_class; ++i) {
      const Vector& mode = mix.mode_means[c][i % spec.modes_per_class];
      for (std::uint32_t j = 0; j < spec.dim; ++j) x[j] = mode[j] + spec.noise_sigma * rng.normal();
      out.push_back(x, c);
    }
  }
}

}  // namespace

void BenchmarkSpec::validate() const {
  if (classes < 1) throw ConfigError("benchmark: classes must be >= 1");
  if (per_class < 1) throw ConfigError("benchmark: per_class must be >= 1");
  if (dim < 1) throw ConfigError("benchmark: dim must be >= 1");
  if (modes_per_class < 1) throw ConfigError("benchmark: modes_per_class must be >= 1");
  if (modes_per_class > per_class) throw ConfigError("benchmark: modes_per_class exceeds per_class");
  if (test_per_class < 1) throw ConfigError("benchmark: test_per_class must be >= 1");
  for (double v : {class_separation, mode_spread, noise_sigma}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError("benchmark: separation, spread and noise must be positive and finite");
    }
  }
}

MixtureModel benchmark_mixture(const BenchmarkSpec& spec) {
  spec.validate();
  RngStream rng = derive_stream(spec.seed, kStructureStream);
  MixtureModel mix;
  for (std::uint32_t c = 0; c < spec.classes; ++c) {
    Vector mean(spec.dim);
    double len = 0.0;
    while (!(len > 0.0)) {
      for (double& v : mean) v = rng.normal();
      len = norm(mean);
    }
    for (double& v : mean) v *= spec.class_separation / len;

    std::vector<Vector> modes;
    for (std::uint32_t m = 0; m < spec.modes_per_class; ++m) {
      Vector mode = mean;
      for (double& v : mode) v += spec.mode_spread * rng.normal();
      modes.push_back(std::move(mode));
    }
    mix.class_means.push_back(std::move(mean));
    mix.mode_means.push_back(std::move(modes));
  }
  return mix;
}

Benchmark gen_benchmark(const BenchmarkSpec& spec) {
  const MixtureModel mix = benchmark_mixture(spec);
  Benchmark b;
  fill_items(b.train, spec, mix, spec.per_class, spec.seed, kTrainStreamBase);
  fill_items(b.test, spec, mix, spec.test_per_class, spec.test_seed.value_or(spec.seed),
             kTestStreamBase);
  return b;
}

}  // namespace distill
