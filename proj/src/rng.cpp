#include "distill/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace distill {

namespace {

__extension__ typedef unsigned __int128 u128;

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += kGamma;
  return splitmix64_mix(state);
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed),
      stream_id_(stream_id),
      state_(splitmix64_mix(splitmix64_mix(master_seed) + (stream_id + 1) * kGamma)) {}

std::uint64_t RngStream::next_u64() { return splitmix64_next(state_); }

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::size_t RngStream::uniform_index(std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t range = n;
  u128 m = static_cast<u128>(next_u64()) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      m = static_cast<u128>(next_u64()) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

double RngStream::normal() {
  if (cached_normal_) {
    const double v = *cached_normal_;
    cached_normal_.reset();
    return v;
  }
  // 1 - uniform() lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  return r * std::cos(theta);
}

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
  return RngStream(master_seed, stream_id);
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    RngStream& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  const std::size_t take = std::min(k, n);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(perm[i], perm[j]);
  }
  perm.resize(take);
  return perm;
}

}  // namespace distill
