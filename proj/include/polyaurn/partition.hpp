// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <numeric>
#include <unordered_map>
#include <utility>
#include <vector>

#include "polyaurn/errors.hpp"

namespace polyaurn {

// Enumerating set partitions of {1,...,i} is Bell(i) work; Bell(13) is
// already ~2.8e7, so 12 is the default ceiling. Callers may override.
inline constexpr int kDefaultEnumerationCap = 12;

/// A partition of {1,...,i} in order-of-first-appearance canonical form.
/// assignment is a restricted-growth string: assignment[0] == 0 and each
/// label is at most 1 + max of the labels before it. block_sizes[j] is
/// the cardinality of cluster j, clusters numbered by first appearance.
struct Partition {
  std::vector<int> assignment;
  std::vector<int> block_sizes;
  int n_blocks = 0;

  int size() const { return static_cast<int>(assignment.size()); }
  bool empty() const { return assignment.empty(); }

  /// Appends one element: label in [0, n_blocks], where label == n_blocks
  /// opens a new block.
  void push_label(int label) {
    if (label < 0 || label > n_blocks)
      throw ParameterError("label breaks restricted-growth form");
    assignment.push_back(label);
    if (label == n_blocks) {
      block_sizes.push_back(1);
      ++n_blocks;
    } else {
      ++block_sizes[label];
    }
  }

  static Partition empty_partition() { return {}; }

  /// Builds from an assignment that must already be in restricted-growth
  /// form; throws ParameterError otherwise.
  static Partition from_assignment(const std::vector<int>& assignment) {
    Partition p;
    p.assignment.reserve(assignment.size());
    for (int label : assignment) p.push_label(label);
    return p;
  }

  /// Canonical partition with the given block sizes: block j occupies the
  /// next block_sizes[j] positions. Sufficient for any quantity that
  /// depends on the partition only through its block sizes.
  static Partition from_block_sizes(const std::vector<int>& sizes) {
    Partition p;
    for (std::size_t j = 0; j < sizes.size(); ++j) {
      if (sizes[j] <= 0) throw ParameterError("block sizes must be positive");
      for (int k = 0; k < sizes[j]; ++k) p.push_label(static_cast<int>(j));
    }
    return p;
  }
};

inline bool is_restricted_growth(const std::vector<int>& labels) {
  int next = 0;
  for (int label : labels) {
    if (label < 0 || label > next) return false;
    if (label == next) ++next;
  }
  return true;
}

/// Relabels an arbitrary label sequence by order of first appearance,
/// preserving the induced set partition.
inline Partition canonicalize_labels(const std::vector<int>& labels) {
  Partition p;
  std::unordered_map<int, int> relabel;
  relabel.reserve(labels.size());
  for (int label : labels) {
    auto [it, inserted] = relabel.emplace(label, p.n_blocks);
    p.push_label(it->second);
  }
  return p;
}

/// Bell numbers by the Bell-triangle recurrence. Exact in 64 bits up to
/// i == 25; larger arguments are rejected.
inline std::uint64_t bell_number(int i) {
  if (i < 0 || i > 25) throw SizeGuardError("bell_number supports 0 <= i <= 25");
  if (i == 0) return 1;
  std::vector<std::uint64_t> row{1};
  for (int n = 1; n <= i; ++n) {
    std::vector<std::uint64_t> next(n + 1);
    next[0] = row.back();
    for (int k = 1; k <= n; ++k) next[k] = next[k - 1] + row[k - 1];
    row = std::move(next);
  }
  return row[0];
}

/// Visits every restricted-growth string of length i exactly once, in
/// lexicographic order; the same Partition object is reused between
/// calls, so callers must copy whatever they keep. Single consumer.
template <typename Fn>
void for_each_partition(int i, Fn&& fn, int cap = kDefaultEnumerationCap) {
  if (i < 1) throw ParameterError("sequence length must be >= 1");
  if (i > cap) throw SizeGuardError("enumeration size exceeds cap");

  std::vector<int> labels(i, 0);
  std::vector<int> prefix_max(i, 0);  // max label over positions [0, k)
  Partition scratch;
  for (;;) {
    scratch.assignment = labels;
    scratch.block_sizes.clear();
    scratch.n_blocks = 0;
    for (int label : labels) {
      if (label == scratch.n_blocks) {
        scratch.block_sizes.push_back(1);
        ++scratch.n_blocks;
      } else {
        ++scratch.block_sizes[label];
      }
    }
    fn(static_cast<const Partition&>(scratch));

    int k = i - 1;
    while (k > 0 && labels[k] > prefix_max[k]) --k;
    if (k == 0) return;
    ++labels[k];
    for (int j = k + 1; j < i; ++j) {
      labels[j] = 0;
      prefix_max[j] = std::max(prefix_max[j - 1], labels[j - 1]);
    }
  }
}

/// Materialized list of all partitions of {1,...,i}. Convenience for
/// small i; the count is Bell(i).
inline std::vector<Partition> all_partitions(int i, int cap = kDefaultEnumerationCap) {
  std::vector<Partition> out;
  for_each_partition(i, [&](const Partition& p) { out.push_back(p); }, cap);
  return out;
}

/// Visits every multiset of block sizes (integer partition of i), sizes
/// in non-increasing order.
template <typename Fn>
void for_each_shape(int i, Fn&& fn) {
  if (i < 1) throw ParameterError("shape size must be >= 1");
  std::vector<int> sizes;
  auto recurse = [&](auto&& self, int remaining, int largest) -> void {
    if (remaining == 0) {
      fn(static_cast<const std::vector<int>&>(sizes));
      return;
    }
    for (int next = std::min(remaining, largest); next >= 1; --next) {
      sizes.push_back(next);
      self(self, remaining - next, next);
      sizes.pop_back();
    }
  };
  recurse(recurse, i, i);
}

}  // namespace polyaurn
