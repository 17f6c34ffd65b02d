#include "distill/dataset.hpp"

#include <cmath>
#include <string>

#include "distill/errors.hpp"

namespace distill {

std::span<const float> EmbeddingSet::row(std::size_t i) const {
  return std::span<const float>(data).subspan(i * dim, dim);
}

Vector EmbeddingSet::vector(std::size_t i) const {
  const auto r = row(i);
  return Vector(r.begin(), r.end());
}

void EmbeddingSet::push_back(VectorView x, ClassId label) {
  if (x.size() != dim) throw DomainError("EmbeddingSet::push_back: dimension mismatch");
  labels.push_back(label);
  for (double v : x) data.push_back(static_cast<float>(v));
}

std::vector<std::vector<std::size_t>> EmbeddingSet::indices_by_class() const {
  std::vector<std::vector<std::size_t>> out(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) out.at(labels[i]).push_back(i);
  return out;
}

void EmbeddingSet::validate() const {
  if (data.size() != labels.size() * static_cast<std::size_t>(dim)) {
    throw DataError("embedding set: data size does not match N x D");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) {
      throw DataError("embedding set: label " + std::to_string(labels[i]) + " of item " +
                      std::to_string(i) + " is not below C = " + std::to_string(num_classes));
    }
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw DataError("embedding set: non-finite value in item " + std::to_string(i / dim));
    }
  }
}

EmbeddingSet EmbeddingSet::subset(std::span<const std::size_t> indices) const {
  EmbeddingSet out;
  out.dim = dim;
  out.num_classes = num_classes;
  out.labels.reserve(indices.size());
  out.data.reserve(indices.size() * dim);
  for (std::size_t i : indices) {
    out.labels.push_back(labels.at(i));
    const auto r = row(i);
    out.data.insert(out.data.end(), r.begin(), r.end());
  }
  return out;
}

}  // namespace distill
