#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "distill/dataset.hpp"
#include "distill/linalg.hpp"
#include "distill/objectives.hpp"
#include "distill/rng.hpp"

namespace distill {

enum class Method { kRandom, kTopScore, kKnapsack, kTacdt, kGreedyObjective, kKMeansMmd };

std::string_view method_name(Method m);
// Throws ConfigError for unknown names.
Method parse_method(std::string_view name);
bool method_needs_scores(Method m);

struct SelectionConfig {
  Method method = Method::kTacdt;
  std::size_t vpc = 1;
  // Unset weights follow the default schedule (see effective_weights).
  std::optional<ObjectiveWeights> weights;
  std::size_t pca_dims = 32;
  double birch_threshold_scale = 0.5;
  std::size_t birch_branching = 50;
  std::uint64_t master_seed = 0;
  std::size_t local_search_max_sweeps = 20;

  // Throws ConfigError.
  void validate() const;
};

// Default (lambda_r, lambda_d): (0.1, 0) for one item per class, (1, 0.1)
// otherwise. lambda_d is forced to 0 when vpc == 1 even if set explicitly.
ObjectiveWeights default_weights(std::size_t vpc);
ObjectiveWeights effective_weights(const SelectionConfig& cfg);

struct SelectionResult {
  std::map<ClassId, std::vector<std::size_t>> per_class;  // global indices
  std::map<ClassId, double> per_class_objective;
  std::map<ClassId, double> wall_seconds;

  std::size_t total_selected() const;
  // Equality of the selected indices; objectives and wall times are ignored.
  bool same_selection(const SelectionResult& other) const;
};

// Per-class strategies. Indices are local to the class (0..N_c-1).

std::vector<std::size_t> select_random(std::size_t class_size, std::size_t vpc, RngStream& rng);

// Largest scores first, ties to the lower index.
std::vector<std::size_t> select_top_score(std::span<const double> scores, std::size_t vpc);

// Exact 0/1 knapsack by dynamic programming over integer capacity. Among
// equal-value solutions the one with more items wins, then the backtrace
// excludes higher indices first. Result is ascending.
std::vector<std::size_t> select_knapsack(std::span<const double> scores,
                                         std::span<const std::uint32_t> costs,
                                         std::uint32_t capacity);

// PCA -> CF-tree -> k-means over leaf entries -> nearest member to each
// cluster centroid. Result is ascending.
std::vector<std::size_t> select_tacdt(std::span<const Vector> class_vectors, std::size_t vpc,
                                      const SelectionConfig& cfg, RngStream& rng);

// Greedy forward selection on the combined objective followed by
// first-improvement swap search. Result is in insertion order.
std::vector<std::size_t> select_greedy_objective(std::span<const Vector> class_vectors,
                                                 std::size_t vpc, const ObjectiveWeights& w,
                                                 const SelectionConfig& cfg);

// Greedy phase alone (exposed for tests of the local search).
std::vector<std::size_t> greedy_forward(std::span<const Vector> class_vectors, std::size_t vpc,
                                        const ObjectiveWeights& w);

struct KMeansMmdTrace {
  std::vector<std::size_t> initial;
  double initial_mmd2 = 0.0;
  double final_mmd2 = 0.0;
};

// k-means on raw vectors, nearest member per cluster, then swap search on
// MMD^2(selection, class). Result is ascending.
std::vector<std::size_t> select_kmeans_mmd(std::span<const Vector> class_vectors, std::size_t vpc,
                                           const SelectionConfig& cfg, RngStream& rng,
                                           KMeansMmdTrace* trace = nullptr);

// Runs the configured method on every class with
// rng = derive_stream(master_seed, class id). `scores` is indexed by global
// item index. `threads` = 0 uses the DISTILL_THREADS default.
SelectionResult distill(const EmbeddingSet& dataset, const SelectionConfig& cfg,
                        std::optional<std::span<const double>> scores = std::nullopt,
                        std::size_t threads = 0);

}  // namespace distill
