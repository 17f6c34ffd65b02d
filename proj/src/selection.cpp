#include "distill/selection.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "distill/birch.hpp"
#include "distill/errors.hpp"
#include "distill/kmeans.hpp"
#include "distill/parallel.hpp"
#include "distill/pca.hpp"

namespace distill {

namespace {

constexpr double kImprovementEps = 1e-12;
constexpr std::size_t kThresholdSample = 512;
constexpr int kMaxThresholdHalvings = 8;

struct MethodEntry {
  Method method;
  std::string_view name;
};

constexpr MethodEntry kMethods[] = {
    {Method::kRandom, "random"},
    {Method::kTopScore, "top_score"},
    {Method::kKnapsack, "knapsack"},
    {Method::kTacdt, "tacdt"},
    {Method::kGreedyObjective, "greedy_objective"},
    {Method::kKMeansMmd, "kmeans_mmd"},
};

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

// Median pairwise distance over all points, or a seeded subsample of 512.
double sampled_median_distance(std::span<const Vector> points, RngStream& rng) {
  std::vector<std::size_t> idx = points.size() <= kThresholdSample
                                     ? all_indices(points.size())
                                     : sample_without_replacement(points.size(), kThresholdSample, rng);
  std::vector<double> d;
  d.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) d.push_back(l2_distance(points[idx[a]], points[idx[b]]));
  }
  return median(std::move(d));
}

// Pairwise tables of one class, used to evaluate the combined objective
// without touching the raw vectors.
class ClassGeometry {
 public:
  ClassGeometry(std::span<const Vector> items, const ObjectiveWeights& w)
      : n_(items.size()), w_(w), dist_(n_ * n_, 0.0) {
    for (std::size_t a = 0; a < n_; ++a) {
      for (std::size_t b = a + 1; b < n_; ++b) {
        const double d = l2_distance(items[a], items[b]);
        dist_[a * n_ + b] = d;
        dist_[b * n_ + a] = d;
      }
    }
    if (w_.lambda_d != 0.0) {
      cos_.assign(n_ * n_, 1.0);
      for (std::size_t a = 0; a < n_; ++a) {
        for (std::size_t b = a + 1; b < n_; ++b) {
          const double c = cosine_similarity(items[a], items[b]);
          cos_[a * n_ + b] = c;
          cos_[b * n_ + a] = c;
        }
      }
    }
  }

  std::size_t size() const { return n_; }
  bool uses_diversity() const { return w_.lambda_d != 0.0; }
  double dist(std::size_t a, std::size_t b) const { return dist_[a * n_ + b]; }
  double cos(std::size_t a, std::size_t b) const { return cos_[a * n_ + b]; }

  double objective(std::span<const std::size_t> sel) const {
    double total = 0.0;
    for (std::size_t t = 0; t < n_; ++t) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i : sel) best = std::min(best, dist(t, i));
      total += best;
    }
    return combine(sel.size(), pair_cos_sum(sel), total);
  }

  double pair_cos_sum(std::span<const std::size_t> sel) const {
    if (w_.lambda_d == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t a = 0; a < sel.size(); ++a) {
      for (std::size_t b = 0; b < sel.size(); ++b) {
        if (a != b) s += cos(sel[a], sel[b]);
      }
    }
    return s;
  }

  // Objective from the ordered-pair cosine sum and the summed nearest
  // distances of a selection of size s.
  double combine(std::size_t s, double pair_cos, double total_min_dist) const {
    const double rep = std::exp(-total_min_dist / static_cast<double>(n_));
    double div = 0.0;
    if (s >= 2 && w_.lambda_d != 0.0) div = pair_cos / static_cast<double>(s * (s - 1));
    return w_.lambda_d * div - w_.lambda_r * rep;
  }

 private:
  std::size_t n_;
  ObjectiveWeights w_;
  std::vector<double> dist_;
  std::vector<double> cos_;
};

std::vector<std::size_t> greedy_on(const ClassGeometry& g, std::size_t vpc) {
  const std::size_t n = g.size();
  std::vector<std::size_t> sel;
  std::vector<bool> in(n, false);
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  double pair_cos = 0.0;

  while (sel.size() < vpc) {
    std::size_t best = n;
    double best_obj = std::numeric_limits<double>::infinity();
    double best_pair = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (in[u]) continue;
      double total = 0.0;
      for (std::size_t t = 0; t < n; ++t) total += std::min(min_dist[t], g.dist(t, u));
      double added = 0.0;
      if (g.uses_diversity()) {
        for (std::size_t i : sel) added += 2.0 * g.cos(u, i);
      }
      const double pc = sel.empty() ? 0.0 : pair_cos + added;
      const double obj = g.combine(sel.size() + 1, pc, total);
      if (obj < best_obj) {
        best_obj = obj;
        best = u;
        best_pair = pc;
      }
    }
    sel.push_back(best);
    in[best] = true;
    pair_cos = best_pair;
    for (std::size_t t = 0; t < n; ++t) min_dist[t] = std::min(min_dist[t], g.dist(t, best));
  }
  return sel;
}

// First-improvement swap search. `objective` evaluates a full selection.
// With `pair_moves`, a sweep that finds no single swap goes on to try
// replacing two selected items at once before giving up.
template <typename Objective>
void swap_search(std::vector<std::size_t>& sel, std::size_t n, std::size_t max_sweeps,
                 const Objective& objective, bool pair_moves = false) {
  std::vector<bool> in(n, false);
  for (std::size_t i : sel) in[i] = true;
  double current = objective(sel);

  auto single_sweep = [&] {
    bool improved = false;
    for (std::size_t p = 0; p < sel.size(); ++p) {
      for (std::size_t u = 0; u < n; ++u) {
        if (in[u]) continue;
        const std::size_t old = sel[p];
        sel[p] = u;
        const double cand = objective(sel);
        if (cand < current - kImprovementEps) {
          current = cand;
          in[old] = false;
          in[u] = true;
          improved = true;
        } else {
          sel[p] = old;
        }
      }
    }
    return improved;
  };

  auto pair_move = [&] {
    for (std::size_t p = 0; p < sel.size(); ++p) {
      for (std::size_t q = p + 1; q < sel.size(); ++q) {
        const std::size_t old_p = sel[p], old_q = sel[q];
        for (std::size_t u = 0; u < n; ++u) {
          if (in[u]) continue;
          for (std::size_t v = u + 1; v < n; ++v) {
            if (in[v]) continue;
            sel[p] = u;
            sel[q] = v;
            const double cand = objective(sel);
            if (cand < current - kImprovementEps) {
              current = cand;
              in[old_p] = in[old_q] = false;
              in[u] = in[v] = true;
              return true;
            }
          }
        }
        sel[p] = old_p;
        sel[q] = old_q;
      }
    }
    return false;
  };

  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    bool improved = single_sweep();
    if (!improved && pair_moves) improved = pair_move();
    if (!improved) break;
  }
}

// Member of `members` nearest to `center`, ties to the lowest index.
std::size_t nearest_member(std::span<const std::size_t> members, std::span<const Vector> points,
                           VectorView center) {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t m : members) {
    const double d = squared_l2_distance(points[m], center);
    if (d < best_d || (d == best_d && m < best)) {
      best_d = d;
      best = m;
    }
  }
  return best;
}

}  // namespace

std::string_view method_name(Method m) {
  for (const MethodEntry& e : kMethods) {
    if (e.method == m) return e.name;
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (const MethodEntry& e : kMethods) {
    if (e.name == name) return e.method;
  }
  throw ConfigError("unknown selection method '" + std::string(name) + "'");
}

bool method_needs_scores(Method m) { return m == Method::kTopScore || m == Method::kKnapsack; }

void SelectionConfig::validate() const {
  if (vpc < 1) throw ConfigError("vpc must be >= 1");
  if (pca_dims < 1) throw ConfigError("pca_dims must be >= 1");
  if (!(birch_threshold_scale > 0.0) || !std::isfinite(birch_threshold_scale)) {
    throw ConfigError("birch_threshold_scale must be positive and finite");
  }
  if (birch_branching < 2) throw ConfigError("birch_branching must be >= 2");
  if (weights) {
    if (!(weights->lambda_d >= 0.0) || !std::isfinite(weights->lambda_d) ||
        !(weights->lambda_r >= 0.0) || !std::isfinite(weights->lambda_r)) {
      throw ConfigError("objective weights must be finite and non-negative");
    }
  }
  if (method == Method::kGreedyObjective) {
    const ObjectiveWeights w = effective_weights(*this);
    if (w.lambda_d == 0.0 && w.lambda_r == 0.0) {
      throw ConfigError("greedy_objective needs a nonzero objective weight");
    }
  }
}

ObjectiveWeights default_weights(std::size_t vpc) {
  if (vpc == 1) return ObjectiveWeights{0.0, 0.1};
  return ObjectiveWeights{0.1, 1.0};
}

ObjectiveWeights effective_weights(const SelectionConfig& cfg) {
  ObjectiveWeights w = cfg.weights.value_or(default_weights(cfg.vpc));
  if (cfg.vpc == 1) w.lambda_d = 0.0;
  return w;
}

std::size_t SelectionResult::total_selected() const {
  std::size_t n = 0;
  for (const auto& [c, idx] : per_class) n += idx.size();
  return n;
}

bool SelectionResult::same_selection(const SelectionResult& other) const {
  return per_class == other.per_class;
}

std::vector<std::size_t> select_random(std::size_t class_size, std::size_t vpc, RngStream& rng) {
  return sample_without_replacement(class_size, vpc, rng);
}

std::vector<std::size_t> select_top_score(std::span<const double> scores, std::size_t vpc) {
  for (double s : scores) {
    if (!std::isfinite(s)) throw DomainError("select_top_score: non-finite score");
  }
  std::vector<std::size_t> order = all_indices(scores.size());
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(std::min(vpc, order.size()));
  return order;
}

std::vector<std::size_t> select_knapsack(std::span<const double> scores,
                                         std::span<const std::uint32_t> costs,
                                         std::uint32_t capacity) {
  const std::size_t n = scores.size();
  if (costs.size() != n) throw DomainError("select_knapsack: costs and scores differ in length");
  for (std::uint32_t c : costs) {
    if (c < 1) throw DomainError("select_knapsack: costs must be >= 1");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw DomainError("select_knapsack: non-finite score");
  }
  if (capacity < 1) throw DomainError("select_knapsack: capacity must be >= 1");
  // Cells order by value, then by item count, so zero-value items still fill
  // spare capacity. Remaining ties resolve in the backtrace.
  struct Cell {
    double value = 0.0;
    std::size_t count = 0;
    bool operator==(const Cell&) const = default;
    bool beats(const Cell& o) const { return value > o.value || (value == o.value && count > o.count); }
  };
  const std::size_t width = static_cast<std::size_t>(capacity) + 1;
  // best[i * width + c]: best cell over items [0, i) within capacity c.
  std::vector<Cell> best((n + 1) * width);
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t w = costs[i - 1];
    for (std::size_t c = 0; c < width; ++c) {
      Cell cell = best[(i - 1) * width + c];
      if (w <= c) {
        const Cell& prev = best[(i - 1) * width + (c - w)];
        const Cell include{prev.value + scores[i - 1], prev.count + 1};
        if (include.beats(cell)) cell = include;
      }
      best[i * width + c] = cell;
    }
  }
  std::vector<std::size_t> chosen;
  std::size_t c = capacity;
  for (std::size_t i = n; i >= 1; --i) {
    if (best[i * width + c] == best[(i - 1) * width + c]) continue;
    chosen.push_back(i - 1);
    c -= costs[i - 1];
  }
  std::reverse(chosen.begin(), chosen.end());
  return chosen;
}

std::vector<std::size_t> select_tacdt(std::span<const Vector> class_vectors, std::size_t vpc,
                                      const SelectionConfig& cfg, RngStream& rng) {
  const std::size_t n = class_vectors.size();
  if (n <= vpc) return all_indices(n);

  const std::size_t d = class_vectors[0].size();
  const std::size_t k = std::min({cfg.pca_dims, n - 1, d});
  const PcaModel model = pca_fit(class_vectors, k);
  const std::vector<Vector> reduced = pca_transform(model, class_vectors);

  const double med = sampled_median_distance(reduced, rng);
  std::vector<LeafEntry> entries;
  if (med > 0.0) {
    double threshold = cfg.birch_threshold_scale * med;
    for (int attempt = 0; attempt <= kMaxThresholdHalvings; ++attempt) {
      CFTree tree(threshold, cfg.birch_branching);
      for (std::size_t i = 0; i < n; ++i) tree.insert(reduced[i], i);
      entries = tree.leaf_entries();
      if (entries.size() >= vpc) break;
      threshold *= 0.5;
    }
  }
  if (entries.size() < vpc) {
    entries.clear();
    for (std::size_t i = 0; i < n; ++i) entries.push_back(LeafEntry{cf_from_point(reduced[i]), {i}});
  }

  const GlobalClustering clustering = global_cluster(entries, vpc, rng);
  std::vector<std::vector<std::size_t>> members(clustering.k());
  for (std::size_t e = 0; e < entries.size(); ++e) {
    auto& m = members[clustering.entry_cluster[e]];
    m.insert(m.end(), entries[e].members.begin(), entries[e].members.end());
  }
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < clustering.k(); ++c) {
    out.push_back(nearest_member(members[c], reduced, clustering.centroids[c]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> greedy_forward(std::span<const Vector> class_vectors, std::size_t vpc,
                                        const ObjectiveWeights& w) {
  const std::size_t n = class_vectors.size();
  if (n <= vpc) return all_indices(n);
  return greedy_on(ClassGeometry(class_vectors, w), vpc);
}

std::vector<std::size_t> select_greedy_objective(std::span<const Vector> class_vectors,
                                                 std::size_t vpc, const ObjectiveWeights& w,
                                                 const SelectionConfig& cfg) {
  const std::size_t n = class_vectors.size();
  if (n <= vpc) return all_indices(n);
  const ClassGeometry g(class_vectors, w);
  std::vector<std::size_t> sel = greedy_on(g, vpc);
  swap_search(
      sel, n, cfg.local_search_max_sweeps,
      [&](std::span<const std::size_t> s) { return g.objective(s); }, true);
  return sel;
}

std::vector<std::size_t> select_kmeans_mmd(std::span<const Vector> class_vectors, std::size_t vpc,
                                           const SelectionConfig& cfg, RngStream& rng,
                                           KMeansMmdTrace* trace) {
  const std::size_t n = class_vectors.size();
  if (n <= vpc) return all_indices(n);

  const std::vector<double> ones(n, 1.0);
  const KMeansResult km = weighted_kmeans(class_vectors, ones, vpc, rng);
  std::vector<std::vector<std::size_t>> members(vpc);
  for (std::size_t i = 0; i < n; ++i) members[km.assignment[i]].push_back(i);
  std::vector<std::size_t> sel;
  for (std::size_t c = 0; c < vpc; ++c) {
    sel.push_back(nearest_member(members[c], class_vectors, km.centroids[c]));
  }
  if (trace) trace->initial = sel;

  if (vpc >= 2) {
    const KernelParams kp = median_heuristic(class_vectors, rng.next_u64());
    std::vector<double> kernel(n * n, 1.0);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        const double v = rbf_kernel(class_vectors[a], class_vectors[b], kp);
        kernel[a * n + b] = v;
        kernel[b * n + a] = v;
      }
    }
    std::vector<double> row_sum(n, 0.0);
    double class_pairs = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        row_sum[a] += kernel[a * n + b];
        if (a != b) class_pairs += kernel[a * n + b];
      }
    }
    const double dn = static_cast<double>(n);
    const double class_term = class_pairs / (dn * (dn - 1.0));
    auto mmd2 = [&](std::span<const std::size_t> s) {
      const double ds = static_cast<double>(s.size());
      double pairs = 0.0;
      double cross = 0.0;
      for (std::size_t a = 0; a < s.size(); ++a) {
        cross += row_sum[s[a]];
        for (std::size_t b = 0; b < s.size(); ++b) {
          if (a != b) pairs += kernel[s[a] * n + s[b]];
        }
      }
      return pairs / (ds * (ds - 1.0)) + class_term - 2.0 * cross / (ds * dn);
    };
    if (trace) trace->initial_mmd2 = mmd2(sel);
    swap_search(sel, n, cfg.local_search_max_sweeps, mmd2);
    if (trace) trace->final_mmd2 = mmd2(sel);
  }
  std::sort(sel.begin(), sel.end());
  return sel;
}

SelectionResult distill(const EmbeddingSet& dataset, const SelectionConfig& cfg,
                        std::optional<std::span<const double>> scores, std::size_t threads) {
  cfg.validate();
  if (method_needs_scores(cfg.method)) {
    if (!scores) {
      throw ConfigError("method '" + std::string(method_name(cfg.method)) + "' requires scores");
    }
    if (scores->size() != dataset.size()) {
      throw ConfigError("score count " + std::to_string(scores->size()) +
                        " does not match item count " + std::to_string(dataset.size()));
    }
    for (double s : *scores) {
      if (!std::isfinite(s) || s < 0.0) throw DataError("scores must be finite and non-negative");
    }
  }
  dataset.validate();

  const ObjectiveWeights weights = effective_weights(cfg);
  const auto by_class = dataset.indices_by_class();
  const std::size_t num_classes = by_class.size();

  struct ClassOutcome {
    std::vector<std::size_t> global;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double seconds = 0.0;
  };
  std::vector<ClassOutcome> outcomes(num_classes);

  parallel_for(num_classes, threads, [&](std::size_t c) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<std::size_t>& idx = by_class[c];
    const std::size_t n = idx.size();
    std::vector<Vector> vectors;
    vectors.reserve(n);
    for (std::size_t i : idx) vectors.push_back(dataset.vector(i));
    RngStream rng = derive_stream(cfg.master_seed, c);

    std::vector<std::size_t> local;
    if (n > 0) {
      switch (cfg.method) {
        case Method::kRandom:
          local = select_random(n, cfg.vpc, rng);
          break;
        case Method::kTopScore:
        case Method::kKnapsack: {
          std::vector<double> class_scores;
          for (std::size_t i : idx) class_scores.push_back((*scores)[i]);
          if (cfg.method == Method::kTopScore) {
            local = select_top_score(class_scores, cfg.vpc);
          } else {
            const std::vector<std::uint32_t> unit(n, 1);
            const auto budget = static_cast<std::uint32_t>(std::min(cfg.vpc, n));
            local = select_knapsack(class_scores, unit, budget);
          }
          break;
        }
        case Method::kTacdt:
          local = select_tacdt(vectors, cfg.vpc, cfg, rng);
          break;
        case Method::kGreedyObjective:
          local = select_greedy_objective(vectors, cfg.vpc, weights, cfg);
          break;
        case Method::kKMeansMmd:
          local = select_kmeans_mmd(vectors, cfg.vpc, cfg, rng);
          break;
      }
    }

    ClassOutcome& out = outcomes[c];
    for (std::size_t i : local) out.global.push_back(idx[i]);
    if (!local.empty()) {
      try {
        out.objective = combined_objective(vectors, local, weights);
      } catch (const DomainError&) {
        // Objective undefined (zero-norm item with a diversity weight).
      }
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  SelectionResult result;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const auto cls = static_cast<ClassId>(c);
    result.per_class[cls] = std::move(outcomes[c].global);
    if (!result.per_class[cls].empty()) result.per_class_objective[cls] = outcomes[c].objective;
    result.wall_seconds[cls] = outcomes[c].seconds;
  }
  return result;
}

}  // namespace distill
