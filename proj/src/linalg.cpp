#include "distill/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "distill/errors.hpp"

namespace distill {

void check_same_dim(VectorView a, VectorView b, const char* what) {
  if (a.size() != b.size()) {
    throw DomainError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()) + ")");
  }
}

double dot(VectorView a, VectorView b) {
  check_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(VectorView a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

double norm(VectorView a) { return std::sqrt(squared_norm(a)); }

double squared_l2_distance(VectorView a, VectorView b) {
  check_same_dim(a, b, "l2_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double l2_distance(VectorView a, VectorView b) { return std::sqrt(squared_l2_distance(a, b)); }

double cosine_similarity(VectorView a, VectorView b) {
  check_same_dim(a, b, "cosine_similarity");
  const double na = norm(a);
  const double nb = norm(b);
  if (!(na > 0.0)) throw DomainError("cosine_similarity: argument a has zero norm");
  if (!(nb > 0.0)) throw DomainError("cosine_similarity: argument b has zero norm");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

bool all_finite(VectorView a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

}  // namespace distill
