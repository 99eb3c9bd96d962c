// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyaurn/errors.hpp"
#include "polyaurn/rational.hpp"
#include "polyaurn/scheme.hpp"

namespace polyaurn {

namespace detail {

// Rationals in configs must arrive as strings ("1/2", "0.5") or JSON
// integers. A non-integer JSON number has already been rounded to
// binary by the JSON parser, so it is rejected rather than silently
// converted.
inline Rational config_rational(const nlohmann::json& value, const std::string& field) {
  if (value.is_string()) {
    try {
      return parse_rational(value.get<std::string>());
    } catch (const ParameterError& e) {
      throw ConfigError(field + ": " + e.what());
    }
  }
  if (value.is_number_integer()) return Rational(value.get<long long>());
  if (value.is_number())
    throw ConfigError(field + ": write rationals as strings like \"1/2\" or \"0.5\" (a JSON "
                              "float loses exactness)");
  throw ConfigError(field + ": expected a rational string or an integer");
}

inline std::vector<Rational> config_rational_array(const nlohmann::json& value,
                                                   const std::string& field) {
  if (!value.is_array()) throw ConfigError(field + ": expected an array of rationals");
  std::vector<Rational> out;
  out.reserve(value.size());
  for (std::size_t k = 0; k < value.size(); ++k)
    out.push_back(config_rational(value[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

}  // namespace detail

/// Builds a scheme from its JSON configuration document:
///   {"scheme": "pitman_yor" | "blackwell_macqueen" | "fisher" |
///              "random_n" | "iid" | "custom",
///    "alpha": rational?, "theta": rational?, "N": int?,
///    "mu_total": rational?,
///    "custom": {"psi": [...], "psi0": [...], "xi": [...]}?}
/// Rationals are strings ("p/q" or decimal) or integers. Fields not
/// used by the named scheme are rejected, as are unknown fields, so a
/// typo cannot silently change the scheme.
inline WeightScheme parse_scheme_config(const nlohmann::json& config) {
  if (!config.is_object()) throw ConfigError("scheme config: expected a JSON object");
  if (!config.contains("scheme")) throw ConfigError("scheme: required field is missing");
  if (!config.at("scheme").is_string()) throw ConfigError("scheme: expected a string");
  std::string name = config.at("scheme").get<std::string>();

  std::set<std::string> allowed{"scheme"};
  if (name == "pitman_yor") {
    allowed.insert({"alpha", "theta"});
  } else if (name == "blackwell_macqueen") {
    allowed.insert("mu_total");
  } else if (name == "fisher") {
    allowed.insert({"N", "theta"});
  } else if (name == "random_n") {
    allowed.insert("N");
  } else if (name == "iid") {
    // no parameters
  } else if (name == "custom") {
    allowed.insert("custom");
  } else {
    throw ConfigError("scheme: unknown scheme \"" + name + "\"");
  }
  for (const auto& item : config.items())
    if (!allowed.count(item.key()))
      throw ConfigError(item.key() + ": not a parameter of scheme \"" + name + "\"");
  auto require = [&](const char* field) -> const nlohmann::json& {
    if (!config.contains(field))
      throw ConfigError(std::string(field) + ": required by scheme \"" + name + "\"");
    return config.at(field);
  };

  if (name == "iid") return WeightScheme::iid();
  if (name == "pitman_yor")
    return WeightScheme::pitman_yor(detail::config_rational(require("alpha"), "alpha"),
                                    detail::config_rational(require("theta"), "theta"));
  if (name == "blackwell_macqueen")
    return WeightScheme::blackwell_macqueen(
        detail::config_rational(require("mu_total"), "mu_total"));
  if (name == "random_n" || name == "fisher") {
    const nlohmann::json& n_value = require("N");
    if (!n_value.is_number_integer()) throw ConfigError("N: expected an integer");
    long long N = n_value.get<long long>();
    if (N < 1 || N > 1'000'000'000) throw ConfigError("N: out of range [1, 1e9]");
    if (name == "random_n") return WeightScheme::random_n(static_cast<int>(N));
    return WeightScheme::fisher(static_cast<int>(N),
                                detail::config_rational(require("theta"), "theta"));
  }

  const nlohmann::json& custom = require("custom");
  if (!custom.is_object()) throw ConfigError("custom: expected an object");
  for (const auto& item : custom.items())
    if (item.key() != "psi" && item.key() != "psi0" && item.key() != "xi")
      throw ConfigError("custom." + item.key() + ": unknown field");
  for (const char* field : {"psi", "psi0", "xi"})
    if (!custom.contains(field))
      throw ConfigError(std::string("custom.") + field + ": required field is missing");
  CustomTables tables;
  tables.psi = detail::config_rational_array(custom.at("psi"), "custom.psi");
  tables.psi0 = detail::config_rational_array(custom.at("psi0"), "custom.psi0");
  tables.xi = detail::config_rational_array(custom.at("xi"), "custom.xi");
  return WeightScheme::custom(std::move(tables));
}

/// Reads and parses a scheme config file; JSON syntax errors surface
/// as ConfigError naming the file.
inline WeightScheme load_scheme_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open scheme config file");
  nlohmann::json config;
  try {
    in >> config;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_scheme_config(config);
}

}  // namespace polyaurn
