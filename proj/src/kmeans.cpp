#include "distill/kmeans.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "distill/errors.hpp"

namespace distill {

namespace {

std::size_t nearest_center(VectorView x, std::span<const Vector> centers) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = squared_l2_distance(x, centers[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

void check_inputs(std::span<const Vector> points, std::span<const double> weights,
                  std::size_t k) {
  if (points.empty()) throw DomainError("k-means: no points");
  if (weights.size() != points.size()) throw DomainError("k-means: weight count mismatch");
  if (k < 1 || k > points.size()) {
    throw DomainError("k-means: k = " + std::to_string(k) + " outside [1, " +
                      std::to_string(points.size()) + "]");
  }
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("k-means: weights must be positive");
  }
}

}  // namespace

std::vector<std::size_t> kmeanspp_seed(std::span<const Vector> points,
                                       std::span<const double> weights, std::size_t k,
                                       RngStream& rng) {
  check_inputs(points, weights, k);
  const std::size_t n = points.size();
  std::vector<std::size_t> seeds;
  std::vector<bool> chosen(n, false);

  auto draw = [&](const std::vector<double>& mass) -> std::size_t {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!chosen[i]) total += mass[i];
    }
    if (!(total > 0.0)) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) return i;
      }
    }
    const double target = rng.uniform() * total;
    double acc = 0.0;
    std::size_t last = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (chosen[i] || !(mass[i] > 0.0)) continue;
      acc += mass[i];
      last = i;
      if (target < acc) return i;
    }
    return last;
  };

  std::vector<double> mass(weights.begin(), weights.end());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (seeds.size() < k) {
    const std::size_t pick = draw(mass);
    seeds.push_back(pick);
    chosen[pick] = true;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_l2_distance(points[i], points[pick]));
      mass[i] = weights[i] * d2[i];
    }
  }
  return seeds;
}

std::vector<Vector> weighted_centroids(std::span<const Vector> points,
                                       std::span<const double> weights,
                                       std::span<const std::size_t> assignment, std::size_t k) {
  const std::size_t dim = points.front().size();
  std::vector<Vector> sums(k, Vector(dim, 0.0));
  std::vector<double> mass(k, 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t c = assignment[i];
    for (std::size_t j = 0; j < dim; ++j) sums[c][j] += weights[i] * points[i][j];
    mass[c] += weights[i];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (!(mass[c] > 0.0)) throw DomainError("weighted_centroids: empty cluster");
    for (double& v : sums[c]) v /= mass[c];
  }
  return sums;
}

double weighted_sse(std::span<const Vector> points, std::span<const double> weights,
                    std::span<const std::size_t> assignment,
                    std::span<const Vector> centroids) {
  double sse = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sse += weights[i] * squared_l2_distance(points[i], centroids[assignment[i]]);
  }
  return sse;
}

KMeansResult weighted_kmeans(std::span<const Vector> points, std::span<const double> weights,
                             std::size_t k, RngStream& rng, std::size_t max_iterations) {
  check_inputs(points, weights, k);
  const std::size_t n = points.size();

  KMeansResult result;
  for (std::size_t s : kmeanspp_seed(points, weights, k, rng)) result.centroids.push_back(points[s]);
  result.assignment.assign(n, k);  // sentinel: nothing assigned yet

  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    std::vector<std::size_t> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = nearest_center(points[i], result.centroids);

    // Repair empty clusters with the point farthest from its centroid.
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t c : next) ++counts[c];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[next[i]] < 2) continue;
        const double d = squared_l2_distance(points[i], result.centroids[next[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --counts[next[far]];
      next[far] = c;
      counts[c] = 1;
    }

    const bool changed = next != result.assignment;
    result.assignment = std::move(next);
    result.centroids = weighted_centroids(points, weights, result.assignment, k);
    result.iterations = iter + 1;
    if (!changed) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace distill
