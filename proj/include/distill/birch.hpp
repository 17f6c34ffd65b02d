#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "distill/linalg.hpp"
#include "distill/rng.hpp"

namespace distill {

// BIRCH sufficient statistic of a point set: count, linear sum and sum of
// squared norms.
struct ClusteringFeature {
  std::size_t n = 0;
  Vector ls;
  double ss = 0.0;

  std::size_t dim() const { return ls.size(); }
  Vector centroid() const;
  // sqrt(ss/n - |ls/n|^2), with small negative rounding clamped to zero.
  double radius() const;
};

ClusteringFeature cf_from_point(VectorView x);
ClusteringFeature cf_merge(const ClusteringFeature& a, const ClusteringFeature& b);
double cf_centroid_distance(const ClusteringFeature& a, const ClusteringFeature& b);

// Leaf-level subcluster. Keeps the ids of the points it absorbed so that
// representatives can be recovered after clustering.
struct LeafEntry {
  ClusteringFeature cf;
  std::vector<std::size_t> members;
};

// Height-balanced CF-tree with radius threshold T and branching factor B
// (the same bound applies to leaf entries and internal children).
//
// Distances are between CF centroids. Insertion descends to the nearest
// child (ties to the lowest index); at the leaf the point is absorbed by the
// nearest entry if the merged radius stays <= T, otherwise it opens a new
// entry. Overflowing nodes split around their farthest pair of entries.
// No rebuilding or outlier handling.
class CFTree {
 public:
  CFTree(double threshold, std::size_t branching_factor);
  ~CFTree();
  CFTree(CFTree&&) noexcept;
  CFTree& operator=(CFTree&&) noexcept;
  CFTree(const CFTree&) = delete;
  CFTree& operator=(const CFTree&) = delete;

  // Throws DomainError for non-finite x, a dimension change or a repeated id.
  void insert(VectorView x, std::size_t id);

  // Leaf entries in left-to-right order.
  std::vector<LeafEntry> leaf_entries() const;

  double threshold() const { return threshold_; }
  std::size_t branching_factor() const { return branching_; }
  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t height() const;
  std::size_t leaf_count() const;
  bool empty() const { return ids_.empty(); }

  // Indented text rendering, one line per node / entry.
  std::string dump() const;

  struct Audit {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
  };
  // Full structural check: fan-out bounds, leaf radii <= T (+1e-9), parent
  // CF == sum of child CFs, leaf CF == fold of member points, equal leaf
  // depth, every inserted id present exactly once. `points[id]` must be the
  // vector inserted under `id`.
  Audit audit(std::span<const Vector> points, double rel_tol = 1e-6) const;

  struct Node;

 private:
  double threshold_;
  std::size_t branching_;
  std::size_t dim_ = 0;
  std::unique_ptr<Node> root_;
  std::unordered_set<std::size_t> ids_;
};

// Assignment of leaf entries to k clusters.
struct GlobalClustering {
  std::vector<std::size_t> entry_cluster;  // entry -> cluster id
  std::vector<Vector> centroids;           // weighted (by entry count) centroids

  std::size_t k() const { return centroids.size(); }
};

// Global refinement over leaf entries. With |entries| <= k every entry is
// its own cluster (effective k = |entries|); otherwise weighted k-means over
// entry centroids, weights = entry counts.
GlobalClustering global_cluster(std::span<const LeafEntry> entries, std::size_t k,
                                RngStream& rng);

}  // namespace distill
