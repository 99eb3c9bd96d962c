// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "polyaurn/errors.hpp"
#include "polyaurn/exact.hpp"
#include "polyaurn/partition.hpp"
#include "polyaurn/rng.hpp"
#include "polyaurn/scheme.hpp"

namespace polyaurn {

inline constexpr double kDefaultTruncEps = 1e-12;
inline constexpr int kDefaultKMax = 10000;
inline constexpr int kDirichletRetryCap = 100;

/// Non-atomic base measure, realized as Uniform[0,1]: the partition
/// law does not depend on which non-atomic measure is used, so one
/// canonical choice with almost-surely distinct draws suffices.
struct ContinuousBase {};

using UrnBase = std::variant<ContinuousBase, AtomicBase>;

struct SamplePath {
  std::vector<int> labels;     // restricted-growth cluster assignment
  std::vector<double> values;  // drawn values; atom index (1-based) under an atomic base
  std::uint64_t replicate_id = 0;
  RngStreamSpec seed_info;

  int size() const { return static_cast<int>(labels.size()); }
  int n_blocks() const {
    return labels.empty() ? 0 : 1 + *std::max_element(labels.begin(), labels.end());
  }
};

/// Truncated realization of a random discrete probability measure.
struct DiscreteMeasure {
  struct Atom {
    double location;  // in [0,1], or a 1-based atom index
    double weight;
  };
  std::vector<Atom> atoms;
  double residual = 0.0;   // mass not covered by the listed atoms
  bool hit_k_max = false;  // stick-breaking stopped by the length cap, not trunc_eps

  double total_atom_weight() const {
    double total = 0.0;
    for (const Atom& a : atoms) total += a.weight;
    return total;
  }
};

/// One urn sequence of length n: at each step pick "new" with
/// probability q0/total and cluster j with probability q_j/total, per
/// the scheme's predictive weights. A new draw from the continuous
/// base is a fresh uniform (almost surely unseen); under an atomic
/// base it picks an atom by base weight and merges with the atom's
/// cluster if that value was seen before. Per step the generator
/// consumes one uniform for the pick, plus one for the value when the
/// pick is "new".
inline SamplePath sample_urn_path(const WeightScheme& scheme, int n, const UrnBase& base,
                                  RngStream& rng) {
  if (n < 1) throw ParameterError("n must be >= 1");
  SamplePath path;
  path.labels.reserve(n);
  path.values.reserve(n);

  const AtomicBase* atomic = std::get_if<AtomicBase>(&base);
  std::vector<double> base_weights;
  if (atomic)
    for (const Rational& w : atomic->weights) base_weights.push_back(to_double(w));

  Partition prefix;
  std::map<int, int> atom_label;      // atom value -> cluster label
  std::vector<double> cluster_value;  // label -> value
  std::vector<double> pick_weights;
  for (int i = 0; i < n; ++i) {
    PredictiveWeights w = predictive_weights(scheme, prefix);
    pick_weights.assign(1, to_double(w.q0));
    for (const Rational& q : w.q) pick_weights.push_back(to_double(q));
    std::size_t pick = rng.discrete(pick_weights);

    int label;
    double value;
    if (pick == 0) {
      if (atomic) {
        int atom = static_cast<int>(rng.discrete(base_weights)) + 1;
        auto [it, inserted] = atom_label.emplace(atom, prefix.n_blocks);
        label = it->second;  // existing entry means a merge
        value = atom;
      } else {
        label = prefix.n_blocks;
        value = rng.uniform01();
      }
    } else {
      label = static_cast<int>(pick) - 1;
      value = 0.0;  // overwritten below
    }
    if (label == prefix.n_blocks)
      cluster_value.push_back(value);
    else
      value = cluster_value[label];

    prefix.push_label(label);
    path.labels.push_back(label);
    path.values.push_back(value);
  }
  return path;
}

/// Stick-breaking measure: V_k ~ Beta(1-alpha, theta + k alpha), Z_k
/// uniform atom locations, w_k = V_k prod_{l<k} (1-V_l). Draw order is
/// V_k then Z_k for each k. Stops once the unbroken remainder falls
/// below trunc_eps or k_max sticks were broken; the remainder becomes
/// the residual, and hit_k_max records which rule fired. Weights are
/// computed as successive differences of the remainder so the parts
/// telescope to 1 at machine precision.
inline DiscreteMeasure sample_stick_breaking(double alpha, double theta, double trunc_eps,
                                             int k_max, RngStream& rng) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ParameterError("alpha must be in [0, 1)");
  if (!(theta > -alpha)) throw ParameterError("theta must be > -alpha");
  if (!(trunc_eps > 0.0)) throw ParameterError("trunc_eps must be positive");
  if (k_max < 1) throw ParameterError("k_max must be >= 1");

  DiscreteMeasure measure;
  double remaining = 1.0;
  for (int k = 1; k <= k_max; ++k) {
    double v = rng.beta(1.0 - alpha, theta + k * alpha);
    double z = rng.uniform01();
    double next = remaining * (1.0 - v);
    measure.atoms.push_back({z, remaining - next});
    remaining = next;
    if (remaining < trunc_eps) {
      measure.residual = remaining;
      return measure;
    }
  }
  measure.residual = remaining;
  measure.hit_k_max = true;
  return measure;
}

/// Symmetric finite Dirichlet measure: G_1..G_N i.i.d. Gamma(theta/N)
/// normalized, at uniform locations Z_1..Z_N. All G's are drawn before
/// any Z. For small theta/N every G can underflow to zero; the whole
/// G block is then redrawn, up to kDirichletRetryCap times.
inline DiscreteMeasure sample_finite_dirichlet(int N, double theta, RngStream& rng) {
  if (N < 1) throw ParameterError("N must be >= 1");
  if (!(theta > 0.0)) throw ParameterError("theta must be positive");

  std::vector<double> g(N);
  double sum = 0.0;
  int attempts = 0;
  do {
    if (++attempts > kDirichletRetryCap)
      throw std::runtime_error("finite dirichlet: all gamma draws underflowed to zero after " +
                               std::to_string(kDirichletRetryCap) + " retries");
    sum = 0.0;
    for (double& gk : g) {
      gk = rng.gamma(theta / N);
      sum += gk;
    }
  } while (!(sum > 0.0));

  DiscreteMeasure measure;
  measure.atoms.reserve(N);
  for (double gk : g) measure.atoms.push_back({rng.uniform01(), gk / sum});
  measure.residual = 0.0;
  return measure;
}

/// n i.i.d. draws from a truncated discrete measure. Each draw uses
/// one uniform scaled to the total mass and a cumulative-sum search;
/// hitting the residual mass produces a fresh uniform value with a
/// brand-new label (one more uniform), mimicking the non-atomic part.
/// Labels appear in order of first appearance.
inline SamplePath sample_iid_from_measure(const DiscreteMeasure& measure, int n, RngStream& rng) {
  if (n < 1) throw ParameterError("n must be >= 1");
  if (!(measure.residual < 1.0)) throw ParameterError("measure residual must be < 1");

  std::vector<double> cumulative;
  cumulative.reserve(measure.atoms.size());
  double acc = 0.0;
  for (const DiscreteMeasure::Atom& atom : measure.atoms) {
    acc += atom.weight;
    cumulative.push_back(acc);
  }
  double total = acc + measure.residual;

  SamplePath path;
  path.labels.reserve(n);
  path.values.reserve(n);
  std::map<std::size_t, int> atom_to_label;
  int next_label = 0;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform01() * total;
    if (u < acc) {
      std::size_t idx =
          std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin();
      if (idx >= measure.atoms.size()) idx = measure.atoms.size() - 1;
      auto [it, inserted] = atom_to_label.emplace(idx, next_label);
      if (inserted) ++next_label;
      path.labels.push_back(it->second);
      path.values.push_back(measure.atoms[idx].location);
    } else {
      path.labels.push_back(next_label++);
      path.values.push_back(rng.uniform01());
    }
  }
  return path;
}

// Spec-seeded wrappers: one fresh stream per call.
inline SamplePath sample_urn_path(const WeightScheme& scheme, int n, const UrnBase& base,
                                  RngStreamSpec spec) {
  RngStream rng(spec);
  SamplePath path = sample_urn_path(scheme, n, base, rng);
  path.seed_info = spec;
  path.replicate_id = spec.stream;
  return path;
}

inline DiscreteMeasure sample_stick_breaking(double alpha, double theta, double trunc_eps,
                                             int k_max, RngStreamSpec spec) {
  RngStream rng(spec);
  return sample_stick_breaking(alpha, theta, trunc_eps, k_max, rng);
}

inline DiscreteMeasure sample_finite_dirichlet(int N, double theta, RngStreamSpec spec) {
  RngStream rng(spec);
  return sample_finite_dirichlet(N, theta, rng);
}

inline SamplePath sample_iid_from_measure(const DiscreteMeasure& measure, int n,
                                          RngStreamSpec spec) {
  RngStream rng(spec);
  SamplePath path = sample_iid_from_measure(measure, n, rng);
  path.seed_info = spec;
  path.replicate_id = spec.stream;
  return path;
}

/// Stick-breaking measure plus n i.i.d. draws from it, on a single
/// stream (measure first, then draws).
inline SamplePath sample_stick_path(double alpha, double theta, int n,
                                    double trunc_eps, int k_max, RngStreamSpec spec) {
  RngStream rng(spec);
  DiscreteMeasure measure = sample_stick_breaking(alpha, theta, trunc_eps, k_max, rng);
  SamplePath path = sample_iid_from_measure(measure, n, rng);
  path.seed_info = spec;
  path.replicate_id = spec.stream;
  return path;
}

/// Finite Dirichlet measure plus n i.i.d. draws, single stream.
inline SamplePath sample_fisher_path(int N, double theta, int n, RngStreamSpec spec) {
  RngStream rng(spec);
  DiscreteMeasure measure = sample_finite_dirichlet(N, theta, rng);
  SamplePath path = sample_iid_from_measure(measure, n, rng);
  path.seed_info = spec;
  path.replicate_id = spec.stream;
  return path;
}

/// Runs fn(replicate) for replicate = 0..n_replicates-1 over a worker
/// pool. fn derives all randomness from the replicate index, so the
/// result is independent of scheduling; callers typically write into a
/// pre-sized vector at the replicate index.
template <typename Fn>
void run_replicates(std::uint64_t n_replicates, int threads, Fn&& fn) {
  if (threads <= 1 || n_replicates < 2) {
    for (std::uint64_t r = 0; r < n_replicates; ++r) fn(r);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t r; (r = next.fetch_add(1)) < n_replicates;) fn(r);
  };
  std::vector<std::thread> pool;
  std::uint64_t n_workers = std::min<std::uint64_t>(threads, n_replicates);
  pool.reserve(n_workers);
  for (std::uint64_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
}

}  // namespace polyaurn
