// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "polyaurn/diagnostics.hpp"
#include "polyaurn/errors.hpp"
#include "polyaurn/exact.hpp"
#include "polyaurn/partition.hpp"
#include "polyaurn/rational.hpp"
#include "polyaurn/samplers.hpp"
#include "polyaurn/scheme.hpp"

namespace polyaurn {

using OrderedJson = nlohmann::ordered_json;

/// Fixed-form double rendering: up to 17 significant digits, general
/// format, locale-independent. Used wherever bytes must be stable.
inline std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("double formatting failed");
  return std::string(buf, ptr);
}

/// {"rational": "p/q", "decimal": <double>} — the exact value plus a
/// convenience approximation.
inline OrderedJson rational_json(const Rational& r) {
  return OrderedJson{{"rational", to_string(r)}, {"decimal", to_double(r)}};
}

inline OrderedJson partition_json(const Partition& p) {
  return OrderedJson{
      {"assignment", p.assignment}, {"block_sizes", p.block_sizes}, {"n_blocks", p.n_blocks}};
}

inline OrderedJson validation_report_json(const ValidationReport& report) {
  OrderedJson out{{"max_i", report.max_i},
                  {"pass", report.pass},
                  {"sums_match_xi", report.sums_match_xi},
                  {"weights_nonnegative", report.weights_nonnegative},
                  {"shapes_checked", report.shapes_checked},
                  {"shapes_unreachable", report.shapes_unreachable},
                  {"witness", nullptr}};
  if (report.witness) {
    const ValidationWitness& w = *report.witness;
    out["witness"] = OrderedJson{{"i", w.i},
                                 {"partition", partition_json(w.partition)},
                                 {"sum", rational_json(w.sum)},
                                 {"declared", rational_json(w.declared)},
                                 {"detail", w.detail}};
  }
  return out;
}

inline OrderedJson exchangeability_report_json(const ExchangeabilityReport& report) {
  OrderedJson out{{"max_i", report.max_i},
                  {"pass", report.pass},
                  {"sequences_checked", report.sequences_checked},
                  {"witness", nullptr}};
  if (report.witness) {
    const ExchangeabilityWitness& w = *report.witness;
    out["witness"] = OrderedJson{{"sequence", w.sequence},
                                 {"permutation", w.permutation},
                                 {"permuted_canonical", w.permuted_canonical},
                                 {"p_original", rational_json(w.p_original)},
                                 {"p_permuted", rational_json(w.p_permuted)}};
  }
  return out;
}

inline OrderedJson counterexample_json(const CounterexampleReport& report) {
  return OrderedJson{{"r", report.r},
                     {"theta", rational_json(report.theta)},
                     {"alpha", rational_json(report.alpha)},
                     {"p_121", rational_json(report.p_121)},
                     {"p_112", rational_json(report.p_112)},
                     {"p_121_closed_form", rational_json(report.p_121_closed)},
                     {"p_112_closed_form", rational_json(report.p_112_closed)},
                     {"routes_agree", report.routes_agree},
                     {"equal", report.equal}};
}

inline OrderedJson comparison_json(const DistributionComparison& cmp) {
  OrderedJson out{{"i", cmp.i}, {"tv", cmp.tv}, {"tv_exact", nullptr}, {"chi_square", nullptr}};
  if (cmp.tv_exact) out["tv_exact"] = rational_json(*cmp.tv_exact);
  if (cmp.chi_square) {
    const ChiSquareResult& chi = *cmp.chi_square;
    out["chi_square"] = OrderedJson{{"statistic", chi.statistic},
                                    {"df", chi.df},
                                    {"p_value", chi.p_value},
                                    {"cells", chi.cells},
                                    {"pooled", chi.pooled}};
  }
  out["impossible_count"] = cmp.impossible_count;
  OrderedJson tops = OrderedJson::array();
  for (const auto& d : cmp.top_discrepancies)
    tops.push_back(OrderedJson{{"assignment", d.assignment},
                               {"p_a", d.p_a},
                               {"p_b", d.p_b},
                               {"abs_diff", d.abs_diff}});
  out["top_discrepancies"] = tops;
  OrderedJson metrics = OrderedJson::array();
  metrics.push_back(
      OrderedJson{{"metric", "tv"}, {"value", cmp.tv}, {"exact", cmp.tv_exact.has_value()}});
  if (cmp.chi_square)
    metrics.push_back(OrderedJson{
        {"metric", "chi_square_p_value"}, {"value", cmp.chi_square->p_value}, {"exact", false}});
  out["metrics"] = metrics;
  return out;
}

inline OrderedJson new_value_trace_json(const NewValueTrace& trace) {
  OrderedJson out{{"exact", trace.exact}, {"a", trace.a}, {"a_rational", nullptr}};
  if (trace.exact) {
    OrderedJson rats = OrderedJson::array();
    for (const Rational& r : trace.a_exact) rats.push_back(to_string(r));
    out["a_rational"] = rats;
  }
  return out;
}

inline OrderedJson independence_json(const IndependenceReport& report) {
  return OrderedJson{{"metric", "spearman_rho"},
                     {"value", report.rho},
                     {"exact", false},
                     {"threshold", report.threshold},
                     {"pass", report.pass},
                     {"heuristic", report.heuristic},
                     {"n_pairs", report.n_pairs}};
}

/// One NDJSON record for a sampled path. Assembled by hand so float
/// bytes come from format_double and key order is fixed:
/// {"replicate": R, "labels": [...], "values": [...], "n_blocks": B}
inline std::string path_record_line(const SamplePath& path) {
  std::string line = "{\"replicate\": " + std::to_string(path.replicate_id) + ", \"labels\": [";
  for (std::size_t k = 0; k < path.labels.size(); ++k) {
    if (k) line += ", ";
    line += std::to_string(path.labels[k]);
  }
  line += "], \"values\": [";
  for (std::size_t k = 0; k < path.values.size(); ++k) {
    if (k) line += ", ";
    line += format_double(path.values[k]);
  }
  line += "], \"n_blocks\": " + std::to_string(path.n_blocks()) + "}";
  return line;
}

inline void write_paths_ndjson(std::ostream& out, const std::vector<SamplePath>& paths) {
  for (const SamplePath& p : paths) out << path_record_line(p) << '\n';
}

/// CSV with the same content; labels and values are space-separated
/// inside their cells.
inline void write_paths_csv(std::ostream& out, const std::vector<SamplePath>& paths) {
  out << "replicate,n_blocks,labels,values\n";
  for (const SamplePath& p : paths) {
    out << p.replicate_id << ',' << p.n_blocks() << ',';
    for (std::size_t k = 0; k < p.labels.size(); ++k)
      out << (k ? " " : "") << p.labels[k];
    out << ',';
    for (std::size_t k = 0; k < p.values.size(); ++k)
      out << (k ? " " : "") << format_double(p.values[k]);
    out << '\n';
  }
}

/// JSON array variant of the NDJSON content.
inline void write_paths_json(std::ostream& out, const std::vector<SamplePath>& paths) {
  out << "[\n";
  for (std::size_t k = 0; k < paths.size(); ++k)
    out << path_record_line(paths[k]) << (k + 1 < paths.size() ? ",\n" : "\n");
  out << "]\n";
}

inline SamplePath parse_path_record(const std::string& line) {
  nlohmann::json record;
  try {
    record = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("path record: ") + e.what());
  }
  if (!record.is_object() || !record.contains("labels") || !record.at("labels").is_array())
    throw ConfigError("path record: missing \"labels\" array");
  SamplePath path;
  for (const auto& v : record.at("labels")) {
    if (!v.is_number_integer()) throw ConfigError("labels: expected integers");
    path.labels.push_back(v.get<int>());
  }
  if (record.contains("values")) {
    for (const auto& v : record.at("values")) {
      if (!v.is_number()) throw ConfigError("values: expected numbers");
      path.values.push_back(v.get<double>());
    }
  }
  if (record.contains("replicate")) path.replicate_id = record.at("replicate").get<std::uint64_t>();
  return path;
}

inline std::vector<SamplePath> read_paths_ndjson(std::istream& in) {
  std::vector<SamplePath> paths;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      paths.push_back(parse_path_record(line));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return paths;
}

}  // namespace polyaurn
