// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "polyaurn/errors.hpp"
#include "polyaurn/exact.hpp"
#include "polyaurn/partition.hpp"
#include "polyaurn/rational.hpp"
#include "polyaurn/samplers.hpp"
#include "polyaurn/scheme.hpp"

namespace polyaurn {

/// Distribution over canonical partitions of a fixed i, either exact
/// (rationals from the law) or empirical (counts from sampled paths).
struct PartitionDistribution {
  int i = 0;
  std::vector<Partition> support;
  std::vector<double> probs;          // parallel to support
  std::vector<Rational> exact_probs;  // filled iff exact
  std::vector<std::uint64_t> counts;  // filled iff empirical
  std::uint64_t total_count = 0;      // sample size when empirical
  bool exact = false;
};

inline PartitionDistribution exact_partition_distribution(const WeightScheme& scheme, int i,
                                                          WeightCheck check = WeightCheck::strict,
                                                          int cap = kDefaultEnumerationCap) {
  PartitionDistribution dist;
  dist.i = i;
  dist.exact = true;
  for_each_partition(i, [&](const Partition& p) {
    dist.support.push_back(p);
    dist.exact_probs.push_back(sequence_probability(scheme, p, check));
    dist.probs.push_back(to_double(dist.exact_probs.back()));
  }, cap);
  return dist;
}

/// Tabulates sampled paths (all of one length) over the full canonical
/// support when i is small enough to enumerate, otherwise over the
/// observed partitions in lexicographic order. Labels are
/// canonicalized, so externally produced paths need not be.
inline PartitionDistribution empirical_partition_distribution(const std::vector<SamplePath>& paths,
                                                              int cap = kDefaultEnumerationCap) {
  if (paths.empty()) throw ParameterError("no paths to tabulate");
  int i = paths.front().size();
  for (const SamplePath& p : paths)
    if (p.size() != i) throw ParameterError("paths must all have the same length");

  std::map<std::vector<int>, std::uint64_t> observed;
  for (const SamplePath& p : paths) ++observed[canonicalize_labels(p.labels).assignment];

  PartitionDistribution dist;
  dist.i = i;
  dist.total_count = paths.size();
  auto add = [&](const std::vector<int>& labels, std::uint64_t count) {
    dist.support.push_back(Partition::from_assignment(labels));
    dist.counts.push_back(count);
    dist.probs.push_back(static_cast<double>(count) / static_cast<double>(dist.total_count));
  };
  if (i <= cap) {
    for_each_partition(i, [&](const Partition& p) {
      auto it = observed.find(p.assignment);
      add(p.assignment, it == observed.end() ? 0 : it->second);
    }, cap);
  } else {
    for (const auto& [labels, count] : observed) add(labels, count);
  }
  return dist;
}

struct ChiSquareResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  int cells = 0;   // cells entering the statistic, after pooling
  int pooled = 0;  // cells merged into the pooled bucket
};

struct DistributionComparison {
  struct Discrepancy {
    std::vector<int> assignment;
    double p_a = 0.0;
    double p_b = 0.0;
    double abs_diff = 0.0;
  };
  int i = 0;
  double tv = 0.0;                      // total variation distance
  std::optional<Rational> tv_exact;     // when both sides are exact
  std::optional<ChiSquareResult> chi_square;  // when exactly one side is exact
  std::vector<Discrepancy> top_discrepancies;  // largest |p_a - p_b|, up to 3
  std::uint64_t impossible_count = 0;  // empirical mass on cells the exact side rules out
};

/// Compares two distributions over partitions of the same i on the
/// union of their supports (missing entries count as 0). TV is exact
/// when both sides are; the chi-square test runs when exactly one side
/// is exact, pooling cells with expected count below 5 into a single
/// bucket, and skips cells the exact side assigns probability 0
/// (empirical mass there is reported separately as impossible_count).
inline DistributionComparison compare_partition_distributions(const PartitionDistribution& a,
                                                              const PartitionDistribution& b) {
  if (a.i != b.i) throw ParameterError("distributions concern different sequence lengths");

  struct Cell {
    double p_a = 0.0, p_b = 0.0;
    Rational r_a = 0, r_b = 0;
    std::uint64_t count_a = 0, count_b = 0;
  };
  std::map<std::vector<int>, Cell> cells;
  for (std::size_t k = 0; k < a.support.size(); ++k) {
    Cell& c = cells[a.support[k].assignment];
    c.p_a = a.probs[k];
    if (a.exact) c.r_a = a.exact_probs[k];
    if (!a.counts.empty()) c.count_a = a.counts[k];
  }
  for (std::size_t k = 0; k < b.support.size(); ++k) {
    Cell& c = cells[b.support[k].assignment];
    c.p_b = b.probs[k];
    if (b.exact) c.r_b = b.exact_probs[k];
    if (!b.counts.empty()) c.count_b = b.counts[k];
  }

  DistributionComparison out;
  out.i = a.i;
  double tv_sum = 0.0;
  Rational tv_rat = 0;
  for (const auto& [labels, c] : cells) {
    tv_sum += std::abs(c.p_a - c.p_b);
    if (a.exact && b.exact) tv_rat += abs(c.r_a - c.r_b);
    DistributionComparison::Discrepancy d{labels, c.p_a, c.p_b, std::abs(c.p_a - c.p_b)};
    out.top_discrepancies.push_back(std::move(d));
  }
  out.tv = 0.5 * tv_sum;
  if (a.exact && b.exact) {
    out.tv_exact = tv_rat / 2;
    out.tv = to_double(*out.tv_exact);
  }
  std::stable_sort(out.top_discrepancies.begin(), out.top_discrepancies.end(),
                   [](const auto& x, const auto& y) { return x.abs_diff > y.abs_diff; });
  if (out.top_discrepancies.size() > 3) out.top_discrepancies.resize(3);

  if (a.exact != b.exact) {
    const PartitionDistribution& emp = a.exact ? b : a;
    if (emp.total_count > 0) {
      double n = static_cast<double>(emp.total_count);
      ChiSquareResult chi;
      double pooled_obs = 0.0, pooled_exp = 0.0;
      for (const auto& [labels, c] : cells) {
        double p_exact = a.exact ? c.p_a : c.p_b;
        double obs = static_cast<double>(a.exact ? c.count_b : c.count_a);
        if (p_exact <= 0.0) {
          out.impossible_count += static_cast<std::uint64_t>(obs);
          continue;
        }
        double expd = p_exact * n;
        if (expd < 5.0) {
          pooled_obs += obs;
          pooled_exp += expd;
          ++chi.pooled;
        } else {
          chi.statistic += (obs - expd) * (obs - expd) / expd;
          ++chi.cells;
        }
      }
      if (pooled_exp > 0.0) {
        chi.statistic += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
        ++chi.cells;
      }
      chi.df = chi.cells - 1;
      chi.p_value = chi.df >= 1 ? boost::math::gamma_q(chi.df / 2.0, chi.statistic / 2.0) : 1.0;
      out.chi_square = chi;
    }
  }
  return out;
}

/// Trace of a_i = P{draw i+1 is new}, i = 0..i_max; a_0 = 1 always.
struct NewValueTrace {
  std::vector<double> a;
  std::vector<Rational> a_exact;  // filled iff exact
  bool exact = false;
};

/// Exact trace. When the new-draw weight ignores the partition (iid,
/// blackwell_macqueen, pitman_yor with alpha = 0, and the degenerate
/// N = 1 schemes) this is the constant-per-step ratio and any i_max is
/// cheap; otherwise E[a_i] is computed by full enumeration, which is
/// guarded at enumeration_cap.
inline NewValueTrace new_value_probability_trace_exact(const WeightScheme& scheme, int i_max,
                                                       int enumeration_cap = 10) {
  if (i_max < 0) throw ParameterError("i_max must be >= 0");
  NewValueTrace trace;
  trace.exact = true;
  trace.a_exact.reserve(i_max + 1);
  trace.a_exact.push_back(1);
  if (!scheme.psi0_depends_on_blocks()) {
    for (int i = 1; i <= i_max; ++i) trace.a_exact.push_back(scheme.psi0(1) / scheme.xi(i));
  } else {
    if (i_max > enumeration_cap)
      throw SizeGuardError("exact a-trace by enumeration: i_max exceeds cap");
    for (int i = 1; i <= i_max; ++i) {
      Rational mean = 0;
      for_each_partition(i, [&](const Partition& p) {
        Rational prob = sequence_probability(scheme, p);
        if (prob != 0) mean += prob * scheme.psi0(p.n_blocks);
      }, enumeration_cap <= kDefaultEnumerationCap ? kDefaultEnumerationCap : enumeration_cap);
      trace.a_exact.push_back(mean / scheme.xi(i));
    }
  }
  trace.a.reserve(trace.a_exact.size());
  for (const Rational& r : trace.a_exact) trace.a.push_back(to_double(r));
  return trace;
}

/// Monte Carlo trace: averages q0/total along urn paths with a
/// continuous base, one stream per replicate.
inline NewValueTrace new_value_probability_trace_empirical(const WeightScheme& scheme, int i_max,
                                                           std::uint64_t replicates,
                                                           RngStreamSpec spec, int threads = 1) {
  if (i_max < 0) throw ParameterError("i_max must be >= 0");
  if (replicates < 1) throw ParameterError("replicates must be >= 1");
  std::vector<std::vector<double>> contrib(replicates);
  run_replicates(replicates, threads, [&](std::uint64_t r) {
    RngStream rng({spec.seed, spec.stream + r});
    std::vector<double>& row = contrib[r];
    row.reserve(i_max + 1);
    row.push_back(1.0);
    if (i_max == 0) return;
    SamplePath path = sample_urn_path(scheme, i_max, ContinuousBase{}, rng);
    Partition prefix;
    for (int i = 0; i < i_max; ++i) {
      prefix.push_label(path.labels[i]);
      PredictiveWeights w = predictive_weights(scheme, prefix, WeightCheck::lenient);
      row.push_back(to_double(w.q0 / w.total));
    }
  });
  NewValueTrace trace;
  trace.a.assign(i_max + 1, 0.0);
  for (const std::vector<double>& row : contrib)
    for (std::size_t i = 0; i < row.size(); ++i) trace.a[i] += row[i];
  for (double& v : trace.a) v /= static_cast<double>(replicates);
  return trace;
}

/// Exact total-variation distance between the finite-Dirichlet urn's
/// partition law and the Dirichlet-process law with total mass theta,
/// at sequence length i. Quantifies the weak-limit approximation.
inline Rational fisher_dp_eppf_distance(int N, const Rational& theta, int i) {
  if (i < 1) throw ParameterError("i must be >= 1");
  if (i > 8) throw SizeGuardError("fisher_dp_eppf_distance: i exceeds cap of 8");
  WeightScheme fisher = WeightScheme::fisher(N, theta);
  WeightScheme dp = WeightScheme::blackwell_macqueen(theta);
  Rational tv = 0;
  for_each_partition(i, [&](const Partition& p) {
    tv += abs(sequence_probability(fisher, p) - sequence_probability(dp, p));
  });
  return tv / 2;
}

/// Descriptive trace for predictive-measure stabilization along one
/// path: for each consecutive checkpoint pair i < i', the TV distance
/// between the predictive measures after i and after i' draws,
/// measured on the partition {clusters known at i} + {everything
/// else}; mass on clusters born between i and i' counts toward
/// "everything else", as does the new-draw mass. No pass/fail: the
/// underlying statement is a limit, so this only describes decay.
inline std::vector<double> predictive_convergence_trace(const SamplePath& path,
                                                        const WeightScheme& scheme,
                                                        const std::vector<int>& checkpoints) {
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    if (checkpoints[k] < 1 || checkpoints[k] > path.size())
      throw ParameterError("checkpoints must lie in [1, path length]");
    if (k > 0 && checkpoints[k] <= checkpoints[k - 1])
      throw ParameterError("checkpoints must be strictly increasing");
  }
  std::vector<int> canonical = canonicalize_labels(path.labels).assignment;

  struct Snapshot {
    std::vector<double> atom_mass;  // per cluster, in label order
    double rest = 0.0;              // new-draw mass
  };
  std::vector<Snapshot> snaps;
  snaps.reserve(checkpoints.size());
  Partition prefix;
  int pos = 0;
  for (int c : checkpoints) {
    while (pos < c) prefix.push_label(canonical[pos++]);
    PredictiveWeights w = predictive_weights(scheme, prefix, WeightCheck::lenient);
    if (w.total == 0) throw ConditionViolation("all predictive weights vanished at a checkpoint");
    Snapshot s;
    double total = to_double(w.total);
    s.atom_mass.reserve(w.q.size());
    for (const Rational& q : w.q) s.atom_mass.push_back(to_double(q) / total);
    s.rest = to_double(w.q0) / total;
    snaps.push_back(std::move(s));
  }

  std::vector<double> trace;
  for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
    const Snapshot& early = snaps[k];
    const Snapshot& late = snaps[k + 1];
    double sum = 0.0;
    double late_rest = late.rest;
    for (std::size_t j = 0; j < late.atom_mass.size(); ++j) {
      if (j < early.atom_mass.size())
        sum += std::abs(early.atom_mass[j] - late.atom_mass[j]);
      else
        late_rest += late.atom_mass[j];
    }
    sum += std::abs(early.rest - late_rest);
    trace.push_back(0.5 * sum);
  }
  return trace;
}

struct IndependenceReport {
  double rho = 0.0;  // Spearman rank correlation, midranks for ties
  std::uint64_t n_pairs = 0;
  double threshold = 0.05;
  bool pass = true;
  bool heuristic = true;  // smoke test only; no calibrated size
};

namespace detail {

inline std::vector<double> midranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
  std::vector<double> ranks(v.size());
  std::size_t k = 0;
  while (k < order.size()) {
    std::size_t j = k;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[k]]) ++j;
    double rank = 0.5 * (k + j) + 1.0;  // average of 1-based positions k+1 .. j+1
    for (std::size_t t = k; t <= j; ++t) ranks[order[t]] = rank;
    k = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;  // a constant margin carries no dependence signal
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace detail

/// Heuristic check that cluster values and cluster weights look
/// unrelated: pools (value, relative cluster size) pairs over sampled
/// urn paths with a continuous base and reports the Spearman rank
/// correlation. Flagged heuristic because no calibrated quantitative
/// target exists for it.
inline IndependenceReport independence_smoke_test(const WeightScheme& scheme, int n,
                                                  std::uint64_t replicates, RngStreamSpec spec,
                                                  int threads = 1) {
  if (n < 1) throw ParameterError("n must be >= 1");
  if (replicates < 1) throw ParameterError("replicates must be >= 1");
  std::vector<std::vector<std::pair<double, double>>> pairs(replicates);
  run_replicates(replicates, threads, [&](std::uint64_t r) {
    SamplePath path = sample_urn_path(scheme, n, ContinuousBase{},
                                      RngStreamSpec{spec.seed, spec.stream + r});
    Partition partition = Partition::from_assignment(path.labels);
    std::vector<double> value_of(partition.n_blocks, 0.0);
    for (int k = 0; k < path.size(); ++k) value_of[path.labels[k]] = path.values[k];
    for (int j = 0; j < partition.n_blocks; ++j)
      pairs[r].emplace_back(value_of[j],
                            static_cast<double>(partition.block_sizes[j]) / partition.size());
  });
  std::vector<double> values, weights;
  for (const auto& row : pairs)
    for (const auto& [v, w] : row) {
      values.push_back(v);
      weights.push_back(w);
    }
  IndependenceReport report;
  report.n_pairs = values.size();
  report.rho = detail::pearson(detail::midranks(values), detail::midranks(weights));
  report.pass = std::abs(report.rho) < report.threshold;
  return report;
}

}  // namespace polyaurn
