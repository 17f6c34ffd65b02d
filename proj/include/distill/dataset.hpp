#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "distill/linalg.hpp"

namespace distill {

using ClassId = std::uint32_t;

// N items x D float features with labels in [0, C). Features are kept in
// single precision so that the binary file round-trips exactly; accessors
// widen to double.
struct EmbeddingSet {
  std::uint32_t dim = 0;
  std::uint32_t num_classes = 0;
  std::vector<ClassId> labels;
  std::vector<float> data;  // row-major, labels.size() * dim

  std::size_t size() const { return labels.size(); }
  std::span<const float> row(std::size_t i) const;
  Vector vector(std::size_t i) const;
  void push_back(VectorView x, ClassId label);

  // Item indices grouped by class, ascending within each class.
  std::vector<std::vector<std::size_t>> indices_by_class() const;

  // Throws DataError on inconsistent sizes, labels >= C or non-finite values.
  void validate() const;

  // Subset in the given index order.
  EmbeddingSet subset(std::span<const std::size_t> indices) const;

  bool operator==(const EmbeddingSet&) const = default;
};

}  // namespace distill
