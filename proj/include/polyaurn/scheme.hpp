// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polyaurn/errors.hpp"
#include "polyaurn/partition.hpp"
#include "polyaurn/rational.hpp"

namespace polyaurn {

enum class SchemeKind { iid, random_n, blackwell_macqueen, pitman_yor, fisher, custom };

inline const char* scheme_kind_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::iid: return "iid";
    case SchemeKind::random_n: return "random_n";
    case SchemeKind::blackwell_macqueen: return "blackwell_macqueen";
    case SchemeKind::pitman_yor: return "pitman_yor";
    case SchemeKind::fisher: return "fisher";
    case SchemeKind::custom: return "custom";
  }
  return "?";
}

/// Parameters for the built-in families; only the fields relevant to a
/// scheme are meaningful.
struct SchemeParams {
  Rational alpha = 0;     // discount, 0 <= alpha < 1
  Rational theta = 0;     // strength, theta > -alpha
  int N = 0;              // atom budget for random_n / fisher
  Rational mu_total = 0;  // total base mass for blackwell_macqueen
};

/// Custom weight tables. psi[j] is the existing-cluster weight for a
/// cluster of size j+1; psi0[j] is the new-value weight given j+1
/// blocks (the weight at zero blocks is fixed to 1: the first draw
/// always comes from the base); xi[j] is the declared total weight at
/// step j+1. Requests past the end of a table are rejected.
struct CustomTables {
  std::vector<Rational> psi;
  std::vector<Rational> psi0;
  std::vector<Rational> xi;
};

/// A prediction rule: the weight on each existing cluster is a function
/// of its size, the weight on a fresh base-measure draw is a function of
/// the block count, and their sum is declared to be a fixed function of
/// the step index. Immutable after construction.
class WeightScheme {
 public:
  static WeightScheme iid() {
    return WeightScheme(SchemeKind::iid, {});
  }
  /// Urn restricted to at most N distinct values, uniform cluster weights.
  static WeightScheme random_n(int N) {
    if (N < 1) throw ParameterError("random_n: N must be >= 1");
    SchemeParams params;
    params.N = N;
    return WeightScheme(SchemeKind::random_n, params);
  }
  static WeightScheme blackwell_macqueen(Rational mu_total) {
    if (mu_total <= 0) throw ParameterError("blackwell_macqueen: mu_total must be > 0");
    SchemeParams params;
    params.mu_total = std::move(mu_total);
    return WeightScheme(SchemeKind::blackwell_macqueen, params);
  }
  static WeightScheme pitman_yor(Rational alpha, Rational theta) {
    if (alpha < 0 || alpha >= 1) throw ParameterError("pitman_yor: alpha must be in [0,1)");
    if (theta <= -alpha) throw ParameterError("pitman_yor: theta must be > -alpha");
    SchemeParams params;
    params.alpha = std::move(alpha);
    params.theta = std::move(theta);
    return WeightScheme(SchemeKind::pitman_yor, params);
  }
  static WeightScheme fisher(int N, Rational theta) {
    if (N < 1) throw ParameterError("fisher: N must be >= 1");
    if (theta <= 0) throw ParameterError("fisher: theta must be > 0");
    SchemeParams params;
    params.N = N;
    params.theta = std::move(theta);
    return WeightScheme(SchemeKind::fisher, params);
  }
  static WeightScheme custom(CustomTables tables) {
    for (const Rational& v : tables.psi)
      if (v < 0) throw ParameterError("custom: psi values must be >= 0");
    for (const Rational& v : tables.psi0)
      if (v < 0) throw ParameterError("custom: psi0 values must be >= 0");
    for (const Rational& v : tables.xi)
      if (v <= 0) throw ParameterError("custom: xi values must be > 0");
    WeightScheme scheme(SchemeKind::custom, {});
    scheme.tables_ = std::move(tables);
    return scheme;
  }

  /// Name-based factory used by the configuration layer.
  static WeightScheme make(const std::string& name, const SchemeParams& params) {
    if (name == "iid") return iid();
    if (name == "random_n") return random_n(params.N);
    if (name == "blackwell_macqueen") return blackwell_macqueen(params.mu_total);
    if (name == "pitman_yor") return pitman_yor(params.alpha, params.theta);
    if (name == "fisher") return fisher(params.N, params.theta);
    throw ParameterError("unknown scheme: '" + name + "'");
  }

  SchemeKind kind() const { return kind_; }
  std::string name() const { return scheme_kind_name(kind_); }
  const SchemeParams& params() const { return params_; }

  /// Weight on an existing cluster of size e (e >= 1); psi(0) == 1 by
  /// convention.
  Rational psi(int cluster_size) const {
    if (cluster_size < 0) throw ParameterError("cluster size must be >= 0");
    if (cluster_size == 0) return 1;
    switch (kind_) {
      case SchemeKind::iid: return 0;
      case SchemeKind::random_n: return 1;
      case SchemeKind::blackwell_macqueen: return cluster_size;
      case SchemeKind::pitman_yor: return Rational(cluster_size) - params_.alpha;
      case SchemeKind::fisher: return Rational(cluster_size) + params_.theta / params_.N;
      case SchemeKind::custom:
        if (cluster_size > static_cast<int>(tables_->psi.size()))
          throw ParameterError("custom psi table has no entry for cluster size " +
                               std::to_string(cluster_size));
        return tables_->psi[cluster_size - 1];
    }
    throw ParameterError("bad scheme kind");
  }

  /// Weight on a fresh base-measure draw given n blocks; psi0(0) == 1
  /// (the first draw always comes from the base).
  Rational psi0(int n_blocks) const {
    if (n_blocks < 0) throw ParameterError("block count must be >= 0");
    if (n_blocks == 0) return 1;
    switch (kind_) {
      case SchemeKind::iid: return 1;
      case SchemeKind::random_n:
        return n_blocks < params_.N ? Rational(params_.N - n_blocks) : Rational(0);
      case SchemeKind::blackwell_macqueen: return params_.mu_total;
      case SchemeKind::pitman_yor: return params_.theta + params_.alpha * n_blocks;
      case SchemeKind::fisher:
        return n_blocks < params_.N
                   ? params_.theta * (Rational(1) - Rational(n_blocks, params_.N))
                   : Rational(0);
      case SchemeKind::custom:
        if (n_blocks > static_cast<int>(tables_->psi0.size()))
          throw ParameterError("custom psi0 table has no entry for " +
                               std::to_string(n_blocks) + " blocks");
        return tables_->psi0[n_blocks - 1];
    }
    throw ParameterError("bad scheme kind");
  }

  /// Declared total weight at step i >= 1.
  Rational xi(int step) const {
    if (step < 1) throw ParameterError("step index must be >= 1");
    switch (kind_) {
      case SchemeKind::iid: return 1;
      case SchemeKind::random_n: return params_.N;
      case SchemeKind::blackwell_macqueen: return params_.mu_total + step;
      case SchemeKind::pitman_yor: return params_.theta + step;
      case SchemeKind::fisher: return params_.theta + step;
      case SchemeKind::custom:
        if (step > static_cast<int>(tables_->xi.size()))
          throw ParameterError("custom xi table has no entry for step " + std::to_string(step));
        return tables_->xi[step - 1];
    }
    throw ParameterError("bad scheme kind");
  }

  /// True when the new-value weight actually varies with the block
  /// count. False enables closed-form new-value traces of any length.
  bool psi0_depends_on_blocks() const {
    switch (kind_) {
      case SchemeKind::iid:
      case SchemeKind::blackwell_macqueen:
        return false;
      case SchemeKind::pitman_yor:
        return params_.alpha != 0;
      case SchemeKind::random_n:
        return params_.N > 1;
      case SchemeKind::fisher:
        return params_.N > 1;
      case SchemeKind::custom: {
        for (std::size_t j = 1; j < tables_->psi0.size(); ++j)
          if (tables_->psi0[j] != tables_->psi0[0]) return true;
        return false;
      }
    }
    return true;
  }

 private:
  WeightScheme(SchemeKind kind, SchemeParams params)
      : kind_(kind), params_(std::move(params)) {}

  SchemeKind kind_;
  SchemeParams params_;
  std::optional<CustomTables> tables_;
};

/// The unnormalized prediction-rule weights at one partition: q0 on a
/// fresh draw, q[j] on existing cluster j, and their sum.
struct PredictiveWeights {
  Rational q0;
  std::vector<Rational> q;
  Rational total;
};

enum class WeightCheck {
  strict,   // require total == xi(i); throw ConditionViolation otherwise
  lenient,  // report the actual total (used to probe broken schemes)
};

/// Computes the prediction-rule weights for the next draw given a
/// partition of the first i observations. The empty partition yields
/// (q0=1, total=1): the first draw comes from the base with probability
/// one.
inline PredictiveWeights predictive_weights(const WeightScheme& scheme, const Partition& partition,
                                            WeightCheck check = WeightCheck::strict) {
  PredictiveWeights w;
  if (partition.empty()) {
    w.q0 = 1;
    w.total = 1;
    return w;
  }
  w.q0 = scheme.psi0(partition.n_blocks);
  w.total = w.q0;
  w.q.reserve(partition.n_blocks);
  for (int size : partition.block_sizes) {
    w.q.push_back(scheme.psi(size));
    w.total += w.q.back();
  }
  if (check == WeightCheck::strict) {
    Rational declared = scheme.xi(partition.size());
    if (w.total != declared)
      throw ConditionViolation("weight sum " + to_string(w.total) + " != declared total " +
                               to_string(declared) + " at step " + std::to_string(partition.size()));
  }
  return w;
}

struct ValidationWitness {
  int i = 0;
  Partition partition;
  Rational sum;       // actual q0 + sum q_j
  Rational declared;  // xi(i)
  std::string detail;
};

struct ValidationReport {
  int max_i = 0;
  bool sums_match_xi = true;       // constant across partitions and equal to xi(i)
  bool weights_nonnegative = true;
  bool pass = true;
  std::optional<ValidationWitness> witness;  // first failure
  std::uint64_t shapes_checked = 0;
  std::uint64_t shapes_unreachable = 0;
};

namespace detail {

// A block-size shape is realizable by the urn iff every weight the urn
// must pick along the way is positive: psi0(1..n-1) for opening blocks
// 2..n and psi(1..e_j-1) for growing each block. The weight sum and the
// sign pattern depend on the partition only through its shape, so shape
// enumeration covers every partition of {1,...,i}.
inline bool shape_reachable(const WeightScheme& scheme, const std::vector<int>& sizes) {
  int n = static_cast<int>(sizes.size());
  for (int k = 1; k < n; ++k)
    if (scheme.psi0(k) <= 0) return false;
  for (int size : sizes)
    for (int e = 1; e < size; ++e)
      if (scheme.psi(e) <= 0) return false;
  return true;
}

}  // namespace detail

/// Checks the scheme's weight-sum condition over every partition of
/// {1,...,i} for each i <= max_i: the weights must be nonnegative
/// everywhere, and on every partition the urn can actually reach, the
/// weight sum must equal the declared total xi(i). Failures are
/// reported with a first counter-witness, never thrown.
inline ValidationReport validate_scheme(const WeightScheme& scheme, int max_i) {
  if (max_i < 1) throw ParameterError("max_i must be >= 1");
  ValidationReport report;
  report.max_i = max_i;

  for (int i = 1; i <= max_i && report.pass; ++i) {
    Rational declared = scheme.xi(i);
    for_each_shape(i, [&](const std::vector<int>& sizes) {
      if (!report.pass) return;
      ++report.shapes_checked;
      int n = static_cast<int>(sizes.size());

      Rational q0 = scheme.psi0(n);
      Rational sum = q0;
      bool nonneg = q0 >= 0;
      for (int size : sizes) {
        Rational qj = scheme.psi(size);
        if (qj < 0) nonneg = false;
        sum += qj;
      }
      if (!nonneg) {
        report.weights_nonnegative = false;
        report.pass = false;
        report.witness = ValidationWitness{i, Partition::from_block_sizes(sizes), sum, declared,
                                           "negative predictive weight"};
        return;
      }
      if (!detail::shape_reachable(scheme, sizes)) {
        ++report.shapes_unreachable;
        return;  // zero-probability shape; the sum condition does not bind
      }
      if (sum != declared) {
        report.sums_match_xi = false;
        report.pass = false;
        report.witness = ValidationWitness{i, Partition::from_block_sizes(sizes), sum, declared,
                                           "weight sum differs from declared total"};
      }
    });
  }
  return report;
}

}  // namespace polyaurn
