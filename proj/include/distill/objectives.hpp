#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "distill/linalg.hpp"

namespace distill {

struct ObjectiveWeights {
  double lambda_d = 0.0;  // diversity
  double lambda_r = 0.0;  // representativeness
};

// RBF kernel k(a, b) = exp(-gamma * |a - b|^2).
struct KernelParams {
  double gamma = 1.0;
};

// Mean cosine similarity over ordered pairs of distinct selected vectors.
// Lower means more diverse. Requires at least two vectors, all nonzero.
double diversity_loss(std::span<const Vector> selected);

// exp(-(1/N) * sum_t min_{i in S} |x_t - x_i|), evaluated exactly as
// written: larger values mean the selection sits closer to the class.
double representativeness_loss(std::span<const Vector> class_items,
                               std::span<const std::size_t> selected_ids);

// lambda_d * diversity - lambda_r * representativeness. Lower is better.
// The diversity term is dropped for single-item selections.
double combined_objective(std::span<const Vector> class_items,
                          std::span<const std::size_t> selected_ids, const ObjectiveWeights& w);

double rbf_kernel(VectorView a, VectorView b, const KernelParams& kp);

// Unbiased MMD^2 estimate between samples X and Y. Both need >= 2 points.
double mmd2_unbiased(std::span<const Vector> X, std::span<const Vector> Y,
                     const KernelParams& kp);

// gamma = 1 / (2 * median^2) with the median pairwise distance over at most
// 256 points (a seeded subsample when Z is larger). Falls back to gamma = 1
// when the median is zero.
KernelParams median_heuristic(std::span<const Vector> Z, std::uint64_t seed = 0);

}  // namespace distill
