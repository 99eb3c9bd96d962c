// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "polyaurn/errors.hpp"
#include "polyaurn/partition.hpp"
#include "polyaurn/rational.hpp"
#include "polyaurn/scheme.hpp"

namespace polyaurn {

// All-permutation checking is i! x Bell(i) work when done naively; the
// orbit reduction below brings it to Bell(i), but the guard stays.
inline constexpr int kDefaultExchangeabilityCap = 8;

/// Probability that a sequence from the urn induces exactly this
/// partition, computed as the product of normalized step weights. The
/// base measure is non-atomic, so fresh draws never collide and the
/// base factors integrate out. Strict mode verifies the declared total
/// at every evaluated step; lenient mode normalizes by the actual sum,
/// which is what the prediction rule itself does. A step where every
/// weight vanishes has no defined next draw and raises
/// ConditionViolation (distinct from an ordinary zero-probability
/// partition, which returns 0).
inline Rational sequence_probability(const WeightScheme& scheme, const Partition& partition,
                                     WeightCheck check = WeightCheck::strict) {
  Rational prob = 1;
  Partition prefix;
  for (int k = 0; k < partition.size(); ++k) {
    int label = partition.assignment[k];
    if (k > 0) {
      PredictiveWeights w = predictive_weights(scheme, prefix, check);
      if (w.total == 0)
        throw ConditionViolation("all predictive weights vanished at step " + std::to_string(k));
      const Rational& numer = label == prefix.n_blocks ? w.q0 : w.q[label];
      if (numer == 0) return 0;  // impossible transition; later steps are moot
      prob *= numer / w.total;
    }
    prefix.push_label(label);
  }
  return prob;
}

/// Closed-form partition probability: the product of new-block weights
/// at block counts 1..n-1 and of growth weights psi(1)...psi(e_j - 1)
/// per block, normalized by xi(1)...xi(i-1). Equals
/// sequence_probability whenever the scheme's weight-sum condition
/// holds; empty products are 1.
inline Rational eppf(const WeightScheme& scheme, const Partition& partition) {
  int i = partition.size();
  if (i < 1) throw ParameterError("eppf requires a nonempty partition");
  Rational numer = 1;
  for (int k = 1; k < partition.n_blocks; ++k) numer *= scheme.psi0(k);
  for (int size : partition.block_sizes)
    for (int e = 1; e < size; ++e) numer *= scheme.psi(e);
  Rational denom = 1;
  for (int step = 1; step < i; ++step) denom *= scheme.xi(step);
  return numer / denom;
}

/// Exact expected number of blocks after i draws, by enumeration over
/// all partitions of {1,...,i}.
inline Rational expected_cluster_count_exact(const WeightScheme& scheme, int i, int cap = 10) {
  if (i < 1) throw ParameterError("i must be >= 1");
  if (i > cap) throw SizeGuardError("expected_cluster_count_exact: i exceeds cap");
  Rational total = 0;
  for_each_partition(i, [&](const Partition& p) {
    Rational prob = sequence_probability(scheme, p);
    if (prob != 0) total += prob * p.n_blocks;
  }, cap);
  return total;
}

/// A purely atomic base measure on atoms {1,...,r}.
struct AtomicBase {
  std::vector<Rational> weights;  // weights[l-1] is the mass of atom l; sums to 1

  static AtomicBase uniform(int r) {
    if (r < 1) throw ParameterError("atomic base needs at least one atom");
    AtomicBase base;
    base.weights.assign(r, Rational(1, r));
    return base;
  }
  static AtomicBase from_weights(std::vector<Rational> weights) {
    if (weights.empty()) throw ParameterError("atomic base needs at least one atom");
    Rational sum = 0;
    for (const Rational& w : weights) {
      if (w <= 0) throw ParameterError("atomic base weights must be positive");
      sum += w;
    }
    if (sum != 1) throw ParameterError("atomic base weights must sum to 1");
    AtomicBase base;
    base.weights = std::move(weights);
    return base;
  }
  int size() const { return static_cast<int>(weights.size()); }
};

/// Probability of observing exactly the given atom values, in order,
/// when the urn draws fresh values from an atomic base. A fresh draw
/// that lands on an already-seen atom merges with that cluster, so at
/// each step the next value x is reached with probability
/// q0 * base(x) + psi(e_x), over the actual weight sum; clusters are
/// identified by observed value.
inline Rational atomic_sequence_probability(const WeightScheme& scheme, const AtomicBase& base,
                                            const std::vector<int>& values) {
  if (values.empty()) throw ParameterError("values must be nonempty");
  std::map<int, int> cluster_size;  // atom value -> observed count
  Rational prob = 1;
  for (std::size_t k = 0; k < values.size(); ++k) {
    int x = values[k];
    if (x < 1 || x > base.size()) throw ParameterError("atom index out of range");
    int n = static_cast<int>(cluster_size.size());
    Rational q0 = scheme.psi0(n);
    Rational total = q0;
    for (const auto& [value, size] : cluster_size) total += scheme.psi(size);
    if (total == 0)
      throw ConditionViolation("all predictive weights vanished at step " + std::to_string(k));
    Rational numer = q0 * base.weights[x - 1];
    if (auto it = cluster_size.find(x); it != cluster_size.end()) numer += scheme.psi(it->second);
    if (numer == 0) return 0;
    prob *= numer / total;
    ++cluster_size[x];
  }
  return prob;
}

struct ExchangeabilityWitness {
  std::vector<int> sequence;            // original canonical label sequence
  std::vector<int> permutation;         // position permutation sigma
  std::vector<int> permuted_canonical;  // canonicalize(sequence o sigma)
  Rational p_original;
  Rational p_permuted;
};

struct ExchangeabilityReport {
  int max_i = 0;
  bool pass = true;
  std::optional<ExchangeabilityWitness> witness;
  std::uint64_t sequences_checked = 0;
};

namespace detail {

// Permuting positions maps a partition to some partition with the same
// block-size multiset, and every same-shape partition arises this way;
// one explicit such permutation, built by pairing same-size blocks in
// order and matching their positions: applying it to `from` and
// canonicalizing yields exactly `to`.
inline std::vector<int> permutation_between(const Partition& from, const Partition& to) {
  auto blocks_of = [](const Partition& p) {
    std::vector<std::vector<int>> blocks(p.n_blocks);
    for (int pos = 0; pos < p.size(); ++pos) blocks[p.assignment[pos]].push_back(pos);
    return blocks;
  };
  auto from_blocks = blocks_of(from);
  auto to_blocks = blocks_of(to);

  // For each size, pair off blocks in order of first appearance.
  std::map<int, std::vector<int>> from_by_size;
  for (int j = 0; j < from.n_blocks; ++j)
    from_by_size[from.block_sizes[j]].push_back(j);
  std::map<int, std::size_t> cursor;
  std::vector<int> sigma(to.size(), -1);
  for (int j = 0; j < to.n_blocks; ++j) {
    int size = to.block_sizes[j];
    auto& pool = from_by_size.at(size);
    int mate = pool.at(cursor[size]++);
    for (int k = 0; k < size; ++k) sigma[to_blocks[j][k]] = from_blocks[mate][k];
  }
  return sigma;
}

}  // namespace detail

/// Brute-force exchangeability check: for every label sequence of each
/// length i <= max_i and every position permutation, the probability of
/// the canonicalized permuted sequence must equal the original's. The
/// permutation orbit of a partition is exactly its block-size shape
/// class, so the check groups canonical sequences by shape and compares
/// within groups; a failing pair is reported together with an explicit
/// permutation realizing it. Weight sums are taken as-is (lenient), so
/// schemes that break the weight-sum condition are checkable.
inline ExchangeabilityReport exchangeability_check(const WeightScheme& scheme, int max_i,
                                                  int threads = 1,
                                                  int cap = kDefaultExchangeabilityCap) {
  if (max_i < 1) throw ParameterError("max_i must be >= 1");
  if (max_i > cap) throw SizeGuardError("exchangeability_check: max_i exceeds cap");
  ExchangeabilityReport report;
  report.max_i = max_i;

  for (int i = 1; i <= max_i && report.pass; ++i) {
    std::vector<Partition> partitions = all_partitions(i, cap <= kDefaultEnumerationCap
                                                              ? kDefaultEnumerationCap
                                                              : cap);
    std::vector<Rational> probs(partitions.size());
    auto compute = [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k)
        probs[k] = sequence_probability(scheme, partitions[k], WeightCheck::lenient);
    };
    if (threads <= 1 || partitions.size() < 64) {
      compute(0, partitions.size());
    } else {
      std::vector<std::thread> pool;
      std::size_t chunk = (partitions.size() + threads - 1) / threads;
      for (int t = 0; t < threads; ++t) {
        std::size_t begin = std::min(partitions.size(), t * chunk);
        std::size_t end = std::min(partitions.size(), begin + chunk);
        if (begin < end) pool.emplace_back(compute, begin, end);
      }
      for (auto& th : pool) th.join();
    }
    report.sequences_checked += partitions.size();

    std::map<std::vector<int>, std::size_t> shape_rep;  // sorted sizes -> first index
    for (std::size_t k = 0; k < partitions.size() && report.pass; ++k) {
      std::vector<int> shape = partitions[k].block_sizes;
      std::sort(shape.begin(), shape.end());
      auto [it, inserted] = shape_rep.emplace(std::move(shape), k);
      if (inserted) continue;
      std::size_t rep = it->second;
      if (probs[k] != probs[rep]) {
        report.pass = false;
        ExchangeabilityWitness w;
        w.sequence = partitions[rep].assignment;
        w.permutation = detail::permutation_between(partitions[rep], partitions[k]);
        w.permuted_canonical = partitions[k].assignment;
        w.p_original = probs[rep];
        w.p_permuted = probs[k];
        report.witness = std::move(w);
      }
    }
  }
  return report;
}

struct CounterexampleReport {
  int r = 0;
  Rational theta;
  Rational alpha;
  Rational p_121;  // P{X1=1, X2=2, X3=1}, urn engine
  Rational p_112;  // P{X1=1, X2=1, X3=2}, urn engine
  Rational p_121_closed;
  Rational p_112_closed;
  bool equal = false;         // p_121 == p_112 (expected iff alpha == 0)
  bool routes_agree = false;  // engine vs closed form, both orders
};

/// Reproduces the atomic-base counter-example for the two-parameter
/// prediction rule over a uniform base on r atoms: the probabilities of
/// the value patterns (1,2,1) and (1,1,2) are computed both by the
/// sequential atomic engine and by the closed forms
///   P{1,2,1} = (theta+alpha) ((theta+2 alpha)/r + 1-alpha) / (r^2 (theta+1)(theta+2))
///   P{1,1,2} = ((theta+alpha)/r + 1-alpha) (theta+alpha) / (r^2 (theta+1)(theta+2))
/// which coincide exactly when alpha == 0.
inline CounterexampleReport counterexample_report(int r, const Rational& theta,
                                                 const Rational& alpha) {
  if (r < 2) throw ParameterError("counterexample: r must be >= 2");
  WeightScheme scheme = WeightScheme::pitman_yor(alpha, theta);  // validates alpha, theta
  AtomicBase base = AtomicBase::uniform(r);

  CounterexampleReport report;
  report.r = r;
  report.theta = theta;
  report.alpha = alpha;
  report.p_121 = atomic_sequence_probability(scheme, base, {1, 2, 1});
  report.p_112 = atomic_sequence_probability(scheme, base, {1, 1, 2});

  Rational denom = Rational(r) * r * (theta + 1) * (theta + 2);
  report.p_121_closed = (theta + alpha) * ((theta + 2 * alpha) / r + 1 - alpha) / denom;
  report.p_112_closed = ((theta + alpha) / r + 1 - alpha) * (theta + alpha) / denom;

  report.routes_agree =
      report.p_121 == report.p_121_closed && report.p_112 == report.p_112_closed;
  if (!report.routes_agree)
    throw std::logic_error("atomic engine disagrees with closed-form counter-example");
  report.equal = report.p_121 == report.p_112;
  return report;
}

}  // namespace polyaurn
