#include "core/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace authdrift {
namespace {

struct AlwaysOn {
  bool operator()(std::uint32_t) const { return true; }
};

struct MaskLookup {
  std::span<const std::uint8_t> mask;
  bool operator()(std::uint32_t i) const { return mask[i] != 0; }
};

template <typename Keep>
double MinMax(const SparseVector& x, const SparseVector& y, Keep keep) {
  const auto a = x.entries();
  const auto b = y.entries();
  double num = 0.0;
  double den = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].index == b[j].index) {
      if (keep(a[i].index)) {
        num += std::min(a[i].weight, b[j].weight);
        den += std::max(a[i].weight, b[j].weight);
      }
      ++i;
      ++j;
    } else if (a[i].index < b[j].index) {
      if (keep(a[i].index)) den += a[i].weight;
      ++i;
    } else {
      if (keep(b[j].index)) den += b[j].weight;
      ++j;
    }
  }
  for (; i < a.size(); ++i) {
    if (keep(a[i].index)) den += a[i].weight;
  }
  for (; j < b.size(); ++j) {
    if (keep(b[j].index)) den += b[j].weight;
  }
  if (den <= 0.0) return 0.0;
  return std::min(1.0, num / den);
}

}  // namespace

SparseVector SparseVector::FromEntries(std::vector<SparseEntry> entries) {
  for (const auto& e : entries) {
    if (!std::isfinite(e.weight) || e.weight < 0.0) {
      Fail(ErrorKind::kInvalidArgument, "sparse weights must be finite and non-negative");
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const SparseEntry& l, const SparseEntry& r) { return l.index < r.index; });
  for (std::size_t k = 1; k < entries.size(); ++k) {
    if (entries[k].index == entries[k - 1].index) {
      Fail(ErrorKind::kInvalidArgument, "repeated sparse index " + std::to_string(entries[k].index));
    }
  }
  std::erase_if(entries, [](const SparseEntry& e) { return e.weight == 0.0; });
  SparseVector v;
  v.entries_ = std::move(entries);
  return v;
}

SparseVector SparseVector::FromDense(std::span<const double> dense) {
  std::vector<SparseEntry> entries;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) entries.push_back({static_cast<std::uint32_t>(i), dense[i]});
  }
  return FromEntries(std::move(entries));
}

double SparseVector::L2Norm() const {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.weight * e.weight;
  return std::sqrt(sum);
}

double MinMaxSimilarity(const SparseVector& x, const SparseVector& y) {
  return MinMax(x, y, AlwaysOn{});
}

double MinMaxSimilarity(const SparseVector& x, const SparseVector& y,
                        std::span<const std::uint8_t> feature_mask) {
  return MinMax(x, y, MaskLookup{feature_mask});
}

}  // namespace authdrift
