// Apache License, Version 2.0, refer to LICENSE.txt

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyaurn/polyaurn.hpp"

namespace {

using namespace polyaurn;

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ParameterError(what + ": '" + item + "' is not an integer");
    }
  }
  if (out.empty()) throw ParameterError(what + ": empty list");
  return out;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw ConfigError(out_path + ": cannot open output file");
  f << content;
  f.flush();
  if (!f) throw std::runtime_error(out_path + ": write failed");
}

std::string report_str(const OrderedJson& j) { return j.dump(2) + "\n"; }

Partition parse_labels_canonical(const std::string& text) {
  std::vector<int> labels = parse_int_list(text, "labels");
  if (!is_restricted_growth(labels))
    std::cerr << "warning: labels were not in first-appearance canonical form; canonicalized\n";
  return canonicalize_labels(labels);
}

std::vector<SamplePath> read_paths_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open paths file");
  try {
    return read_paths_ndjson(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generalized Polya urn schemes: exact laws, samplers, diagnostics"};
  app.require_subcommand(1);

  // ---- validate ----
  auto* cmd_validate = app.add_subcommand("validate", "check the weight-sum condition");
  std::string validate_config, validate_out;
  int validate_max_i = 6;
  cmd_validate->add_option("--scheme-config", validate_config, "scheme config JSON file")
      ->required();
  cmd_validate->add_option("--max-i", validate_max_i, "largest sequence length to check");
  cmd_validate->add_option("--out", validate_out, "output file (default stdout)");

  // ---- exact ----
  auto* cmd_exact = app.add_subcommand("exact", "exact rational computations");
  cmd_exact->require_subcommand(1);

  auto* cmd_seq = cmd_exact->add_subcommand("seq-prob", "probability of one label sequence");
  std::string seq_config, seq_labels, seq_out;
  cmd_seq->add_option("--scheme-config", seq_config, "scheme config JSON file")->required();
  cmd_seq->add_option("--labels", seq_labels, "comma-separated labels, e.g. 0,1,0")->required();
  cmd_seq->add_option("--out", seq_out, "output file (default stdout)");

  auto* cmd_eppf = cmd_exact->add_subcommand("eppf", "closed-form partition probability");
  std::string eppf_config, eppf_sizes, eppf_out;
  cmd_eppf->add_option("--scheme-config", eppf_config, "scheme config JSON file")->required();
  cmd_eppf->add_option("--sizes", eppf_sizes, "comma-separated block sizes, e.g. 2,1")
      ->required();
  cmd_eppf->add_option("--out", eppf_out, "output file (default stdout)");

  auto* cmd_exch = cmd_exact->add_subcommand("exch-check", "brute-force exchangeability check");
  std::string exch_config, exch_out;
  int exch_max_i = 6, exch_threads = 1, exch_cap = kDefaultExchangeabilityCap;
  cmd_exch->add_option("--scheme-config", exch_config, "scheme config JSON file")->required();
  cmd_exch->add_option("--max-i", exch_max_i, "largest sequence length to check");
  cmd_exch->add_option("--threads", exch_threads, "enumeration worker threads");
  cmd_exch->add_option("--cap", exch_cap, "override the size guard");
  cmd_exch->add_option("--out", exch_out, "output file (default stdout)");

  // ---- counterexample ----
  auto* cmd_counter =
      app.add_subcommand("counterexample", "atomic-base order-dependence demonstration");
  int counter_r = 2;
  std::string counter_theta, counter_alpha, counter_out;
  cmd_counter->add_option("--r", counter_r, "number of uniform atoms (>= 2)")->required();
  cmd_counter->add_option("--theta", counter_theta, "strength parameter, rational")->required();
  cmd_counter->add_option("--alpha", counter_alpha, "discount parameter, rational")->required();
  cmd_counter->add_option("--out", counter_out, "output file (default stdout)");

  // ---- sample ----
  auto* cmd_sample = app.add_subcommand("sample", "Monte Carlo path generation");
  cmd_sample->require_subcommand(1);
  struct SampleOpts {
    std::string config, out, format = "ndjson";
    int n = 0;
    std::uint64_t replicates = 1;
    std::uint64_t seed = 0;
    int threads = 1;
  };
  auto add_sample_common = [](CLI::App* cmd, SampleOpts& o) {
    cmd->add_option("--scheme-config", o.config, "scheme config JSON file")->required();
    cmd->add_option("--n", o.n, "draws per path")->required();
    cmd->add_option("--replicates", o.replicates, "number of independent paths");
    cmd->add_option("--seed", o.seed, "base seed (default 0)");
    cmd->add_option("--threads", o.threads, "worker threads (output independent of this)");
    cmd->add_option("--out", o.out, "output file (default stdout)");
    cmd->add_option("--format", o.format, "ndjson | json | csv")
        ->check(CLI::IsMember({"ndjson", "json", "csv"}));
  };
  SampleOpts urn_opts, stick_opts, fisher_opts;
  auto* cmd_urn = cmd_sample->add_subcommand("urn", "prediction-rule urn paths");
  add_sample_common(cmd_urn, urn_opts);
  int urn_atoms = 0;
  cmd_urn->add_option("--atoms", urn_atoms,
                      "use a uniform atomic base with this many atoms (default: continuous)");
  auto* cmd_stick = cmd_sample->add_subcommand("stick", "stick-breaking measure + i.i.d. draws");
  add_sample_common(cmd_stick, stick_opts);
  double stick_eps = kDefaultTruncEps;
  int stick_kmax = kDefaultKMax;
  cmd_stick->add_option("--trunc-eps", stick_eps, "stop once the unbroken stick is below this");
  cmd_stick->add_option("--k-max", stick_kmax, "stick count cap");
  auto* cmd_fisher = cmd_sample->add_subcommand("fisher", "finite Dirichlet measure + draws");
  add_sample_common(cmd_fisher, fisher_opts);

  // ---- diagnose ----
  auto* cmd_diag = app.add_subcommand("diagnose", "finite-sample diagnostics");
  cmd_diag->require_subcommand(1);

  auto* cmd_atrace = cmd_diag->add_subcommand("a-trace", "P{next draw is new} by step");
  std::string atrace_config, atrace_mode = "exact", atrace_out;
  int atrace_i_max = 10, atrace_threads = 1;
  std::uint64_t atrace_replicates = 10000, atrace_seed = 0;
  cmd_atrace->add_option("--scheme-config", atrace_config, "scheme config JSON file")->required();
  cmd_atrace->add_option("--i-max", atrace_i_max, "last step index")->required();
  cmd_atrace->add_option("--mode", atrace_mode, "exact | empirical")
      ->check(CLI::IsMember({"exact", "empirical"}));
  cmd_atrace->add_option("--replicates", atrace_replicates, "paths for empirical mode");
  cmd_atrace->add_option("--seed", atrace_seed, "base seed (default 0)");
  cmd_atrace->add_option("--threads", atrace_threads, "worker threads");
  cmd_atrace->add_option("--out", atrace_out, "output file (default stdout)");

  auto* cmd_compare = cmd_diag->add_subcommand("compare", "partition distribution comparison");
  std::string compare_config, compare_paths, compare_paths_b, compare_out;
  cmd_compare->add_option("--scheme-config", compare_config,
                          "scheme for the exact side (omit when using --paths-b)");
  cmd_compare->add_option("--paths", compare_paths, "NDJSON paths file")->required();
  cmd_compare->add_option("--paths-b", compare_paths_b,
                          "second NDJSON paths file (compare two empirical sides)");
  cmd_compare->add_option("--out", compare_out, "output file (default stdout)");

  auto* cmd_fdp = cmd_diag->add_subcommand("fisher-dp", "finite Dirichlet vs limit law distance");
  std::string fdp_theta, fdp_out;
  int fdp_N = 0, fdp_i = 0;
  cmd_fdp->add_option("--N", fdp_N, "finite Dirichlet dimension")->required();
  cmd_fdp->add_option("--theta", fdp_theta, "strength parameter, rational")->required();
  cmd_fdp->add_option("--i", fdp_i, "sequence length")->required();
  cmd_fdp->add_option("--out", fdp_out, "output file (default stdout)");

  auto* cmd_conv = cmd_diag->add_subcommand("converge", "predictive-measure stabilization trace");
  std::string conv_config, conv_checkpoints, conv_out;
  int conv_n = 0;
  std::uint64_t conv_seed = 0;
  cmd_conv->add_option("--scheme-config", conv_config, "scheme config JSON file")->required();
  cmd_conv->add_option("--n", conv_n, "path length")->required();
  cmd_conv->add_option("--checkpoints", conv_checkpoints, "comma-separated step indices")
      ->required();
  cmd_conv->add_option("--seed", conv_seed, "base seed (default 0)");
  cmd_conv->add_option("--out", conv_out, "output file (default stdout)");

  auto* cmd_indep = cmd_diag->add_subcommand(
      "independence", "heuristic value/weight rank-correlation smoke test");
  std::string indep_config, indep_out;
  int indep_n = 50, indep_threads = 1;
  std::uint64_t indep_replicates = 10000, indep_seed = 0;
  cmd_indep->add_option("--scheme-config", indep_config, "scheme config JSON file")->required();
  cmd_indep->add_option("--n", indep_n, "draws per path");
  cmd_indep->add_option("--replicates", indep_replicates, "number of paths");
  cmd_indep->add_option("--seed", indep_seed, "base seed (default 0)");
  cmd_indep->add_option("--threads", indep_threads, "worker threads");
  cmd_indep->add_option("--out", indep_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // argument errors exit 2; --help exits 0
  }

  try {
    if (cmd_validate->parsed()) {
      ValidationReport report =
          validate_scheme(load_scheme_config(validate_config), validate_max_i);
      emit(validate_out, report_str(validation_report_json(report)));
      return report.pass ? 0 : 1;
    }

    if (cmd_seq->parsed()) {
      WeightScheme scheme = load_scheme_config(seq_config);
      Partition p = parse_labels_canonical(seq_labels);
      emit(seq_out, report_str(rational_json(sequence_probability(scheme, p))));
      return 0;
    }
    if (cmd_eppf->parsed()) {
      WeightScheme scheme = load_scheme_config(eppf_config);
      Partition p = Partition::from_block_sizes(parse_int_list(eppf_sizes, "sizes"));
      emit(eppf_out, report_str(rational_json(eppf(scheme, p))));
      return 0;
    }
    if (cmd_exch->parsed()) {
      ExchangeabilityReport report = exchangeability_check(load_scheme_config(exch_config),
                                                           exch_max_i, exch_threads, exch_cap);
      emit(exch_out, report_str(exchangeability_report_json(report)));
      return report.pass ? 0 : 1;
    }

    if (cmd_counter->parsed()) {
      CounterexampleReport report = counterexample_report(
          counter_r, parse_rational(counter_theta), parse_rational(counter_alpha));
      emit(counter_out, report_str(counterexample_json(report)));
      return 0;
    }

    if (cmd_urn->parsed() || cmd_stick->parsed() || cmd_fisher->parsed()) {
      const SampleOpts& o =
          cmd_urn->parsed() ? urn_opts : cmd_stick->parsed() ? stick_opts : fisher_opts;
      WeightScheme scheme = load_scheme_config(o.config);
      std::vector<SamplePath> paths(o.replicates);
      if (cmd_urn->parsed()) {
        UrnBase base = urn_atoms > 0 ? UrnBase(AtomicBase::uniform(urn_atoms))
                                     : UrnBase(ContinuousBase{});
        run_replicates(o.replicates, o.threads, [&](std::uint64_t rep) {
          paths[rep] = sample_urn_path(scheme, o.n, base, RngStreamSpec{o.seed, rep});
        });
      } else if (cmd_stick->parsed()) {
        double alpha, theta;
        if (scheme.kind() == SchemeKind::pitman_yor) {
          alpha = to_double(scheme.params().alpha);
          theta = to_double(scheme.params().theta);
        } else if (scheme.kind() == SchemeKind::blackwell_macqueen) {
          alpha = 0.0;
          theta = to_double(scheme.params().mu_total);
        } else {
          throw ConfigError(
              "scheme: stick sampling needs pitman_yor or blackwell_macqueen");
        }
        run_replicates(o.replicates, o.threads, [&](std::uint64_t rep) {
          paths[rep] =
              sample_stick_path(alpha, theta, o.n, stick_eps, stick_kmax, {o.seed, rep});
        });
      } else {
        if (scheme.kind() != SchemeKind::fisher)
          throw ConfigError("scheme: fisher sampling needs a fisher scheme config");
        int N = scheme.params().N;
        double theta = to_double(scheme.params().theta);
        run_replicates(o.replicates, o.threads, [&](std::uint64_t rep) {
          paths[rep] = sample_fisher_path(N, theta, o.n, {o.seed, rep});
        });
      }
      std::ostringstream buf;
      if (o.format == "ndjson")
        write_paths_ndjson(buf, paths);
      else if (o.format == "json")
        write_paths_json(buf, paths);
      else
        write_paths_csv(buf, paths);
      emit(o.out, buf.str());
      return 0;
    }

    if (cmd_atrace->parsed()) {
      WeightScheme scheme = load_scheme_config(atrace_config);
      NewValueTrace trace =
          atrace_mode == "exact"
              ? new_value_probability_trace_exact(scheme, atrace_i_max)
              : new_value_probability_trace_empirical(scheme, atrace_i_max, atrace_replicates,
                                                      {atrace_seed, 0}, atrace_threads);
      OrderedJson report = new_value_trace_json(trace);
      report["i_max"] = atrace_i_max;
      emit(atrace_out, report_str(report));
      return 0;
    }
    if (cmd_compare->parsed()) {
      std::vector<SamplePath> paths_a = read_paths_file(compare_paths);
      PartitionDistribution dist_a = empirical_partition_distribution(paths_a);
      DistributionComparison cmp;
      if (!compare_paths_b.empty()) {
        PartitionDistribution dist_b =
            empirical_partition_distribution(read_paths_file(compare_paths_b));
        cmp = compare_partition_distributions(dist_a, dist_b);
      } else {
        if (compare_config.empty())
          throw ConfigError("scheme-config: required unless --paths-b is given");
        PartitionDistribution exact_dist =
            exact_partition_distribution(load_scheme_config(compare_config), dist_a.i);
        cmp = compare_partition_distributions(exact_dist, dist_a);
      }
      emit(compare_out, report_str(comparison_json(cmp)));
      return 0;
    }
    if (cmd_fdp->parsed()) {
      Rational theta = parse_rational(fdp_theta);
      Rational distance = fisher_dp_eppf_distance(fdp_N, theta, fdp_i);
      OrderedJson report{{"metric", "fisher_dp_tv"},
                         {"N", fdp_N},
                         {"theta", to_string(theta)},
                         {"i", fdp_i},
                         {"value", rational_json(distance)},
                         {"exact", true}};
      emit(fdp_out, report_str(report));
      return 0;
    }
    if (cmd_conv->parsed()) {
      WeightScheme scheme = load_scheme_config(conv_config);
      std::vector<int> checkpoints = parse_int_list(conv_checkpoints, "checkpoints");
      SamplePath path = sample_urn_path(scheme, conv_n, ContinuousBase{},
                                        RngStreamSpec{conv_seed, 0});
      std::vector<double> trace = predictive_convergence_trace(path, scheme, checkpoints);
      OrderedJson report{{"n", conv_n}, {"checkpoints", checkpoints}, {"trace", trace}};
      emit(conv_out, report_str(report));
      return 0;
    }
    if (cmd_indep->parsed()) {
      IndependenceReport report = independence_smoke_test(
          load_scheme_config(indep_config), indep_n, indep_replicates, {indep_seed, 0},
          indep_threads);
      emit(indep_out, report_str(independence_json(report)));
      return report.pass ? 0 : 1;
    }

    std::cerr << "no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return 2;
  } catch (const SizeGuardError& e) {
    std::cerr << "size guard: " << e.what() << '\n';
    return 2;
  } catch (const ConditionViolation& e) {
    std::cerr << "condition violation: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
