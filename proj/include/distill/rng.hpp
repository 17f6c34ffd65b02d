#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace distill {

// One step of SplitMix64: advances `state` by the golden-ratio increment and
// returns the finalized output.
std::uint64_t splitmix64_next(std::uint64_t& state);

// SplitMix64 output finalizer (a bijection on 64-bit words).
std::uint64_t splitmix64_mix(std::uint64_t z);

// Deterministic random stream.
//
// Construction (fixed across platforms, see tests/test_linalg.cpp for vectors):
//
//   key    = mix(mix(master_seed) + (stream_id + 1) * 0x9E3779B97F4A7C15)
//   draw_i = SplitMix64 sequence started at `key`, i = 0, 1, ...
//
// where mix is the SplitMix64 finalizer. Distinct stream ids map to distinct
// keys because both steps are bijections. next_u64, uniform and
// uniform_index use only integer arithmetic and exact conversions, so they
// are bit-identical everywhere; normal() additionally goes through libm.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 random bits.
  double uniform();

  // Uniform integer in [0, n). Unbiased (Lemire's multiply-and-reject).
  std::size_t uniform_index(std::size_t n);

  // Standard normal via the Box-Muller transform; the second variate of each
  // pair is cached.
  double normal();

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
  std::optional<double> cached_normal_;
};

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t stream_id);

// First min(k, n) positions of a seeded partial Fisher-Yates shuffle of
// 0..n-1.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    RngStream& rng);

}  // namespace distill
