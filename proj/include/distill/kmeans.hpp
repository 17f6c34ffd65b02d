#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "distill/linalg.hpp"
#include "distill/rng.hpp"

namespace distill {

struct KMeansResult {
  std::vector<std::size_t> assignment;  // point -> cluster in [0, k)
  std::vector<Vector> centroids;        // weighted means, one per cluster
  std::size_t iterations = 0;
  bool converged = false;
};

// Weighted k-means++ seeding: first center drawn proportional to weight,
// later ones proportional to weight * D^2. When the remaining mass is zero
// the lowest-index unchosen point is taken.
std::vector<std::size_t> kmeanspp_seed(std::span<const Vector> points,
                                       std::span<const double> weights, std::size_t k,
                                       RngStream& rng);

// Weighted Lloyd iterations from k-means++ seeds until the assignment stops
// changing or `max_iterations` is reached. Empty clusters are repaired by
// moving the point farthest from its centroid (taken from a cluster with at
// least two members). Requires 1 <= k <= points.size() and positive weights.
KMeansResult weighted_kmeans(std::span<const Vector> points, std::span<const double> weights,
                             std::size_t k, RngStream& rng, std::size_t max_iterations = 100);

// Sum over points of weight * squared distance to the assigned centroid.
double weighted_sse(std::span<const Vector> points, std::span<const double> weights,
                    std::span<const std::size_t> assignment,
                    std::span<const Vector> centroids);

// Weighted centroids of a fixed assignment (k clusters, all non-empty).
std::vector<Vector> weighted_centroids(std::span<const Vector> points,
                                       std::span<const double> weights,
                                       std::span<const std::size_t> assignment, std::size_t k);

}  // namespace distill
