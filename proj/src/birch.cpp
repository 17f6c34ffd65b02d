#include "distill/birch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "distill/errors.hpp"
#include "distill/kmeans.hpp"

namespace distill {

Vector ClusteringFeature::centroid() const {
  Vector c = ls;
  for (double& v : c) v /= static_cast<double>(n);
  return c;
}

double ClusteringFeature::radius() const {
  if (n == 0) return 0.0;
  const double inv = 1.0 / static_cast<double>(n);
  const double r2 = ss * inv - squared_norm(ls) * inv * inv;
  return r2 > 0.0 ? std::sqrt(r2) : 0.0;
}

ClusteringFeature cf_from_point(VectorView x) {
  if (!all_finite(x)) throw DomainError("cf_from_point: non-finite coordinate");
  return ClusteringFeature{1, Vector(x.begin(), x.end()), squared_norm(x)};
}

ClusteringFeature cf_merge(const ClusteringFeature& a, const ClusteringFeature& b) {
  check_same_dim(a.ls, b.ls, "cf_merge");
  ClusteringFeature out{a.n + b.n, a.ls, a.ss + b.ss};
  for (std::size_t j = 0; j < out.ls.size(); ++j) out.ls[j] += b.ls[j];
  return out;
}

double cf_centroid_distance(const ClusteringFeature& a, const ClusteringFeature& b) {
  return l2_distance(a.centroid(), b.centroid());
}

struct CFTree::Node {
  struct Child {
    ClusteringFeature cf;
    std::unique_ptr<Node> node;
  };

  bool leaf = true;
  std::vector<LeafEntry> entries;  // leaf nodes
  std::vector<Child> children;     // internal nodes

  std::size_t fanout() const { return leaf ? entries.size() : children.size(); }

  const ClusteringFeature& cf_at(std::size_t i) const {
    return leaf ? entries[i].cf : children[i].cf;
  }

  ClusteringFeature total() const {
    ClusteringFeature sum = cf_at(0);
    for (std::size_t i = 1; i < fanout(); ++i) sum = cf_merge(sum, cf_at(i));
    return sum;
  }
};

namespace {

using Node = CFTree::Node;

std::size_t nearest_slot(const Node& node, VectorView x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < node.fanout(); ++i) {
    const double d = squared_l2_distance(node.cf_at(i).centroid(), x);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

// Splits an overflowing node around its farthest pair of slots. `node`
// keeps the group of the first seed; the returned sibling takes the rest.
std::unique_ptr<Node> split(Node& node) {
  const std::size_t m = node.fanout();
  std::vector<Vector> centroids(m);
  for (std::size_t i = 0; i < m; ++i) centroids[i] = node.cf_at(i).centroid();

  std::size_t s1 = 0;
  std::size_t s2 = 1;
  double far = -1.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = squared_l2_distance(centroids[i], centroids[j]);
      if (d > far) {
        far = d;
        s1 = i;
        s2 = j;
      }
    }
  }

  std::vector<bool> to_second(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (i == s1) continue;
    if (i == s2) {
      to_second[i] = true;
      continue;
    }
    to_second[i] = squared_l2_distance(centroids[i], centroids[s2]) <
                   squared_l2_distance(centroids[i], centroids[s1]);
  }

  auto sibling = std::make_unique<Node>();
  sibling->leaf = node.leaf;
  if (node.leaf) {
    std::vector<LeafEntry> keep;
    for (std::size_t i = 0; i < m; ++i) {
      (to_second[i] ? sibling->entries : keep).push_back(std::move(node.entries[i]));
    }
    node.entries = std::move(keep);
  } else {
    std::vector<Node::Child> keep;
    for (std::size_t i = 0; i < m; ++i) {
      (to_second[i] ? sibling->children : keep).push_back(std::move(node.children[i]));
    }
    node.children = std::move(keep);
  }
  return sibling;
}

// Inserts into the subtree rooted at `node`; returns the new right sibling
// if `node` had to split.
std::unique_ptr<Node> insert_into(Node& node, const ClusteringFeature& point, std::size_t id,
                                  double threshold, std::size_t branching) {
  if (node.leaf) {
    bool absorbed = false;
    if (!node.entries.empty()) {
      const std::size_t i = nearest_slot(node, point.ls);
      ClusteringFeature merged = cf_merge(node.entries[i].cf, point);
      if (merged.radius() <= threshold) {
        node.entries[i].cf = std::move(merged);
        node.entries[i].members.push_back(id);
        absorbed = true;
      }
    }
    if (!absorbed) node.entries.push_back(LeafEntry{point, {id}});
  } else {
    const std::size_t i = nearest_slot(node, point.ls);
    Node::Child& child = node.children[i];
    std::unique_ptr<Node> sibling = insert_into(*child.node, point, id, threshold, branching);
    if (sibling) {
      child.cf = child.node->total();
      ClusteringFeature sibling_cf = sibling->total();
      node.children.insert(node.children.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                           Node::Child{std::move(sibling_cf), std::move(sibling)});
    } else {
      child.cf = cf_merge(child.cf, point);
    }
  }
  if (node.fanout() > branching) return split(node);
  return nullptr;
}

void collect_leaves(const Node& node, std::vector<LeafEntry>& out) {
  if (node.leaf) {
    out.insert(out.end(), node.entries.begin(), node.entries.end());
    return;
  }
  for (const Node::Child& c : node.children) collect_leaves(*c.node, out);
}

std::size_t count_leaves(const Node& node) {
  if (node.leaf) return 1;
  std::size_t n = 0;
  for (const Node::Child& c : node.children) n += count_leaves(*c.node);
  return n;
}

void format_cf(std::ostringstream& os, const ClusteringFeature& cf) {
  os << "n=" << cf.n << " ss=" << cf.ss << " ls=[";
  for (std::size_t j = 0; j < cf.ls.size(); ++j) os << (j ? "," : "") << cf.ls[j];
  os << "]";
}

void dump_node(const Node& node, int depth, std::ostringstream& os) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  if (node.leaf) {
    os << pad << "leaf (" << node.entries.size() << " entries)\n";
    for (const LeafEntry& e : node.entries) {
      os << pad << "  entry ";
      format_cf(os, e.cf);
      os << " members=[";
      for (std::size_t j = 0; j < e.members.size(); ++j) os << (j ? "," : "") << e.members[j];
      os << "]\n";
    }
    return;
  }
  os << pad << "node (" << node.children.size() << " children)\n";
  for (const Node::Child& c : node.children) {
    os << pad << "  child ";
    format_cf(os, c.cf);
    os << "\n";
    dump_node(*c.node, depth + 2, os);
  }
}

bool cf_close(const ClusteringFeature& a, const ClusteringFeature& b, double rel_tol) {
  if (a.n != b.n || a.ls.size() != b.ls.size()) return false;
  auto close = [&](double x, double y) {
    return std::abs(x - y) <= rel_tol * std::max({1.0, std::abs(x), std::abs(y)});
  };
  if (!close(a.ss, b.ss)) return false;
  for (std::size_t j = 0; j < a.ls.size(); ++j) {
    if (!close(a.ls[j], b.ls[j])) return false;
  }
  return true;
}

}  // namespace

CFTree::CFTree(double threshold, std::size_t branching_factor)
    : threshold_(threshold), branching_(branching_factor) {
  if (!(threshold >= 0.0) || !std::isfinite(threshold)) {
    throw DomainError("CFTree: threshold must be finite and non-negative");
  }
  if (branching_factor < 2) throw DomainError("CFTree: branching factor must be >= 2");
}

CFTree::~CFTree() = default;
CFTree::CFTree(CFTree&&) noexcept = default;
CFTree& CFTree::operator=(CFTree&&) noexcept = default;

void CFTree::insert(VectorView x, std::size_t id) {
  if (x.empty()) throw DomainError("CFTree::insert: empty vector");
  if (!all_finite(x)) throw DomainError("CFTree::insert: non-finite coordinate");
  if (root_ && x.size() != dim_) throw DomainError("CFTree::insert: dimension mismatch");
  if (ids_.contains(id)) throw DomainError("CFTree::insert: id " + std::to_string(id) + " already present");

  if (!root_) {
    root_ = std::make_unique<Node>();
    dim_ = x.size();
  }
  ids_.insert(id);
  std::unique_ptr<Node> sibling = insert_into(*root_, cf_from_point(x), id, threshold_, branching_);
  if (sibling) {
    auto new_root = std::make_unique<Node>();
    new_root->leaf = false;
    ClusteringFeature left_cf = root_->total();
    ClusteringFeature right_cf = sibling->total();
    new_root->children.push_back(Node::Child{std::move(left_cf), std::move(root_)});
    new_root->children.push_back(Node::Child{std::move(right_cf), std::move(sibling)});
    root_ = std::move(new_root);
  }
}

std::vector<LeafEntry> CFTree::leaf_entries() const {
  std::vector<LeafEntry> out;
  if (root_) collect_leaves(*root_, out);
  return out;
}

std::size_t CFTree::height() const {
  if (!root_) return 0;
  std::size_t h = 1;
  for (const Node* n = root_.get(); !n->leaf; n = n->children.front().node.get()) ++h;
  return h;
}

std::size_t CFTree::leaf_count() const { return root_ ? count_leaves(*root_) : 0; }

std::string CFTree::dump() const {
  std::ostringstream os;
  os.precision(9);
  os << "cftree T=" << threshold_ << " B=" << branching_ << " points=" << ids_.size() << "\n";
  if (root_) dump_node(*root_, 1, os);
  return os.str();
}

CFTree::Audit CFTree::audit(std::span<const Vector> points, double rel_tol) const {
  Audit result;
  auto fail = [&](std::string msg) { result.violations.push_back(std::move(msg)); };
  if (!root_) {
    if (!ids_.empty()) fail("empty tree with recorded ids");
    return result;
  }

  std::vector<std::size_t> seen_count(points.size(), 0);
  std::size_t leaf_depth = 0;

  auto walk = [&](auto&& self, const Node& node, std::size_t depth) -> void {
    if (node.fanout() == 0) fail("empty node at depth " + std::to_string(depth));
    if (node.fanout() > branching_) fail("node over branching factor at depth " + std::to_string(depth));
    if (node.leaf) {
      if (leaf_depth == 0) leaf_depth = depth;
      if (depth != leaf_depth) fail("unbalanced leaf depth " + std::to_string(depth));
      for (const LeafEntry& e : node.entries) {
        if (e.members.size() != e.cf.n) fail("member count differs from CF count");
        if (e.cf.radius() > threshold_ + 1e-9) fail("leaf entry radius above threshold");
        if (e.members.empty()) continue;
        ClusteringFeature fold;
        bool valid = true;
        for (std::size_t id : e.members) {
          if (id >= points.size()) {
            fail("member id " + std::to_string(id) + " outside point table");
            valid = false;
            break;
          }
          ++seen_count[id];
          fold = fold.n == 0 ? cf_from_point(points[id]) : cf_merge(fold, cf_from_point(points[id]));
        }
        if (valid && !cf_close(fold, e.cf, rel_tol)) fail("leaf CF differs from fold of its members");
      }
      return;
    }
    for (const Node::Child& c : node.children) {
      if (!cf_close(c.cf, c.node->total(), rel_tol)) {
        fail("parent CF differs from sum of child CFs at depth " + std::to_string(depth));
      }
      self(self, *c.node, depth + 1);
    }
  };
  walk(walk, *root_, 1);

  std::size_t present = 0;
  for (std::size_t id = 0; id < seen_count.size(); ++id) {
    if (seen_count[id] > 1) fail("id " + std::to_string(id) + " appears more than once");
    if (seen_count[id] == 1) {
      ++present;
      if (!ids_.contains(id)) fail("id " + std::to_string(id) + " was never inserted");
    }
  }
  if (present != ids_.size()) fail("inserted ids missing from leaves");
  return result;
}

GlobalClustering global_cluster(std::span<const LeafEntry> entries, std::size_t k,
                                RngStream& rng) {
  if (k < 1) throw DomainError("global_cluster: k must be >= 1");
  if (entries.empty()) throw DomainError("global_cluster: no leaf entries");

  GlobalClustering out;
  if (entries.size() <= k) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      out.entry_cluster.push_back(i);
      out.centroids.push_back(entries[i].cf.centroid());
    }
    return out;
  }
  std::vector<Vector> centroids;
  std::vector<double> weights;
  for (const LeafEntry& e : entries) {
    centroids.push_back(e.cf.centroid());
    weights.push_back(static_cast<double>(e.cf.n));
  }
  KMeansResult km = weighted_kmeans(centroids, weights, k, rng);
  out.entry_cluster = std::move(km.assignment);
  out.centroids = std::move(km.centroids);
  return out;
}

}  // namespace distill
