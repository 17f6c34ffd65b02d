#include "distill/objectives.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "distill/errors.hpp"
#include "distill/rng.hpp"

namespace distill {

double diversity_loss(std::span<const Vector> selected) {
  const std::size_t s = selected.size();
  if (s < 2) throw DomainError("diversity_loss: needs at least 2 selected items");
  double sum = 0.0;
  for (std::size_t t = 0; t < s; ++t) {
    for (std::size_t i = 0; i < s; ++i) {
      if (i != t) sum += cosine_similarity(selected[t], selected[i]);
    }
  }
  return sum / static_cast<double>(s * (s - 1));
}

double representativeness_loss(std::span<const Vector> class_items,
                               std::span<const std::size_t> selected_ids) {
  if (selected_ids.empty()) throw DomainError("representativeness_loss: empty selection");
  if (class_items.empty()) throw DomainError("representativeness_loss: empty class");
  for (std::size_t id : selected_ids) {
    if (id >= class_items.size()) {
      throw DomainError("representativeness_loss: selected id " + std::to_string(id) +
                        " out of range");
    }
  }
  double total = 0.0;
  for (const Vector& x : class_items) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t id : selected_ids) best = std::min(best, l2_distance(x, class_items[id]));
    total += best;
  }
  return std::exp(-total / static_cast<double>(class_items.size()));
}

double combined_objective(std::span<const Vector> class_items,
                          std::span<const std::size_t> selected_ids, const ObjectiveWeights& w) {
  const double rep = representativeness_loss(class_items, selected_ids);
  double div = 0.0;
  if (selected_ids.size() >= 2 && w.lambda_d != 0.0) {
    std::vector<Vector> chosen;
    chosen.reserve(selected_ids.size());
    for (std::size_t id : selected_ids) chosen.push_back(class_items[id]);
    div = diversity_loss(chosen);
  }
  return w.lambda_d * div - w.lambda_r * rep;
}

double rbf_kernel(VectorView a, VectorView b, const KernelParams& kp) {
  return std::exp(-kp.gamma * squared_l2_distance(a, b));
}

double mmd2_unbiased(std::span<const Vector> X, std::span<const Vector> Y,
                     const KernelParams& kp) {
  const std::size_t m = X.size();
  const std::size_t n = Y.size();
  if (m < 2 || n < 2) throw DomainError("mmd2_unbiased: both samples need at least 2 points");
  if (!(kp.gamma > 0.0) || !std::isfinite(kp.gamma)) {
    throw DomainError("mmd2_unbiased: gamma must be positive and finite");
  }

  double kxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) kxx += rbf_kernel(X[i], X[j], kp);
  }
  double kyy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) kyy += rbf_kernel(Y[i], Y[j], kp);
  }
  double kxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) kxy += rbf_kernel(X[i], Y[j], kp);
  }
  const double dm = static_cast<double>(m);
  const double dn = static_cast<double>(n);
  return 2.0 * kxx / (dm * (dm - 1.0)) + 2.0 * kyy / (dn * (dn - 1.0)) - 2.0 * kxy / (dm * dn);
}

KernelParams median_heuristic(std::span<const Vector> Z, std::uint64_t seed) {
  if (Z.size() < 2) throw DomainError("median_heuristic: needs at least 2 points");
  constexpr std::size_t kMaxSample = 256;
  std::vector<std::size_t> idx;
  if (Z.size() <= kMaxSample) {
    for (std::size_t i = 0; i < Z.size(); ++i) idx.push_back(i);
  } else {
    RngStream rng = derive_stream(seed, 0);
    idx = sample_without_replacement(Z.size(), kMaxSample, rng);
  }
  std::vector<double> dists;
  dists.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) dists.push_back(l2_distance(Z[idx[a]], Z[idx[b]]));
  }
  const double med = median(std::move(dists));
  if (!(med > 0.0)) return KernelParams{1.0};
  return KernelParams{1.0 / (2.0 * med * med)};
}

}  // namespace distill
