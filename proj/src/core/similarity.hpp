#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace authdrift {

struct SparseEntry {
  std::uint32_t index = 0;
  double weight = 0.0;

  bool operator==(const SparseEntry&) const = default;
};

// Non-negative weights at strictly increasing indices, no stored zeros.
class SparseVector {
 public:
  SparseVector() = default;

  // Sorts by index and drops zero weights. Throws on negative or non-finite
  // weights and on repeated indices.
  static SparseVector FromEntries(std::vector<SparseEntry> entries);
  static SparseVector FromDense(std::span<const double> dense);

  std::span<const SparseEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  double L2Norm() const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::vector<SparseEntry> entries_;
};

// Ruzicka similarity: sum(min) / sum(max). Both empty -> 0.
double MinMaxSimilarity(const SparseVector& x, const SparseVector& y);

// Same, counting only features whose mask byte is non-zero. The mask must
// cover every index present in x and y.
double MinMaxSimilarity(const SparseVector& x, const SparseVector& y,
                        std::span<const std::uint8_t> feature_mask);

}  // namespace authdrift
