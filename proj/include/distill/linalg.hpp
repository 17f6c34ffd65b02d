#pragma once

#include <span>
#include <vector>

namespace distill {

// Dense feature vector. Every public routine that accepts vectors checks
// dimensions and rejects non-finite input where the contract requires it.
using Vector = std::vector<double>;
using VectorView = std::span<const double>;

double dot(VectorView a, VectorView b);
double squared_norm(VectorView a);
double norm(VectorView a);
double squared_l2_distance(VectorView a, VectorView b);

// Euclidean distance. Throws DomainError on dimension mismatch.
double l2_distance(VectorView a, VectorView b);

// <a,b> / (|a| |b|), clamped to [-1, 1]. Throws DomainError naming the
// argument ("a" or "b") with zero norm.
double cosine_similarity(VectorView a, VectorView b);

bool all_finite(VectorView a);

void check_same_dim(VectorView a, VectorView b, const char* what);

// Median of a non-empty sample (mean of the two middle values for even
// sizes). The input is copied.
double median(std::vector<double> values);

}  // namespace distill
