#include "heavyset/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "heavyset/errors.hpp"

namespace heavyset {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "group", "dim", "prime", "depth", "set", "gamma", "cf_count",
      "alpha", "alpha_samples", "seed", "threads", "grid_cap",
      "k", "below", "below_count", "below_list", "c2", "psi",
      "liouville_base", "liouville_levels",
      "horizons", "resolution", "slack", "trace_x", "dump_verdicts",
      "verify_stage", "verify_samples", "verify_resolution", "counting_resolution",
      "discreteness_sums", "nesting_horizons",
      "loeve_n", "loeve_samples", "orth_pairs", "orth_samples", "orth_stage",
      "regularity_eps"};
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Bracket depth outside quotes, ignoring a trailing comment.
int bracket_balance(const std::string& s) {
  int depth = 0;
  char quote = 0;
  for (char c : s) {
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      break;
    } else if (c == '[' || c == '{') {
      ++depth;
    } else if (c == ']' || c == '}') {
      --depth;
    }
  }
  return depth;
}

YAML::Node load_value(const std::string& key, const std::string& value) {
  try {
    return YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError("key '" + key + "': cannot parse value '" + value + "': " + e.msg);
  }
}

std::string scalar_text(const std::string& key, const YAML::Node& node) {
  if (!node.IsScalar()) throw ConfigError("key '" + key + "': expected a scalar");
  return node.Scalar();
}

ExactScalar to_scalar(const std::string& key, const YAML::Node& node) {
  const std::string text = scalar_text(key, node);
  try {
    return ExactScalar::parse(text);
  } catch (const Error& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

Integer to_integer(const std::string& key, const YAML::Node& node) {
  const std::string text = scalar_text(key, node);
  try {
    const Rational r = parse_rational(text);
    if (denominator_of(r) != 1) throw ConfigError("key '" + key + "': expected an integer");
    return numerator_of(r);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
  }
}

std::vector<std::pair<Integer, Integer>> integer_pairs_of(const std::string& key,
                                                          const YAML::Node& node) {
  if (!node.IsSequence()) throw ConfigError("key '" + key + "': expected a list of pairs");
  std::vector<std::pair<Integer, Integer>> out;
  for (const auto& pair : node) {
    if (!pair.IsSequence() || pair.size() != 2) {
      throw ConfigError("key '" + key + "': every entry needs exactly two integers");
    }
    out.emplace_back(to_integer(key, pair[0]), to_integer(key, pair[1]));
  }
  return out;
}

std::vector<Endpoints> endpoint_list(const std::string& key, const YAML::Node& node) {
  if (!node.IsSequence()) throw ConfigError("key '" + key + "': expected a list of [l, r] pairs");
  std::vector<Endpoints> out;
  for (const auto& pair : node) {
    if (!pair.IsSequence() || pair.size() != 2) {
      throw ConfigError("key '" + key + "': every interval needs exactly two endpoints");
    }
    out.emplace_back(to_scalar(key, pair[0]), to_scalar(key, pair[1]));
  }
  return out;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    while (bracket_balance(value) > 0 && std::getline(in, line)) {
      ++line_no;
      value += " " + trim(line);
    }
    if (bracket_balance(value) != 0) {
      throw ConfigError("key '" + key + "': unbalanced brackets");
    }
    if (known_keys().count(key) == 0) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (cfg.values_.count(key)) throw ConfigError("key '" + key + "' given twice");
    if (value.empty()) throw ConfigError("key '" + key + "' has no value");
    cfg.values_[key] = value;
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::string& Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
  return it->second;
}

std::vector<std::string> Config::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

std::string Config::text(const std::string& key) const {
  return scalar_text(key, load_value(key, raw(key)));
}

std::string Config::text_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

bool Config::flag_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = text(key);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError("key '" + key + "': expected true or false");
}

Integer Config::integer(const std::string& key) const {
  return to_integer(key, load_value(key, raw(key)));
}

std::uint64_t Config::count(const std::string& key) const {
  const Integer v = integer(key);
  if (v < 0 || v > Integer(std::numeric_limits<std::uint64_t>::max())) {
    throw ConfigError("key '" + key + "': expected a non-negative count");
  }
  return v.convert_to<std::uint64_t>();
}

std::uint64_t Config::count_or(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? count(key) : fallback;
}

Rational Config::rational(const std::string& key) const {
  const ExactScalar v = scalar(key);
  if (!v.is_rational()) throw ConfigError("key '" + key + "': expected a rational value");
  return v.as_rational();
}

Rational Config::rational_or(const std::string& key, const Rational& fallback) const {
  return has(key) ? rational(key) : fallback;
}

ExactScalar Config::scalar(const std::string& key) const {
  return to_scalar(key, load_value(key, raw(key)));
}

std::vector<ExactScalar> Config::scalars(const std::string& key) const {
  const YAML::Node node = load_value(key, raw(key));
  std::vector<ExactScalar> out;
  if (node.IsSequence()) {
    for (const auto& v : node) out.push_back(to_scalar(key, v));
  } else {
    out.push_back(to_scalar(key, node));
  }
  return out;
}

std::vector<Integer> Config::integers(const std::string& key) const {
  const YAML::Node node = load_value(key, raw(key));
  std::vector<Integer> out;
  if (node.IsSequence()) {
    for (const auto& v : node) out.push_back(to_integer(key, v));
  } else {
    out.push_back(to_integer(key, node));
  }
  return out;
}

std::vector<std::pair<Integer, Integer>> Config::integer_pairs(const std::string& key) const {
  return integer_pairs_of(key, load_value(key, raw(key)));
}

GroupSpace Config::space() const {
  const std::string group = text_or("group", "torus");
  try {
    if (group == "torus") return GroupSpace::torus(static_cast<int>(count_or("dim", 1)));
    if (group == "padic") {
      return GroupSpace::padic(static_cast<std::uint32_t>(count("prime")), count_or("depth", 32));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("group: ") + e.what());
  }
  throw ConfigError("group must be \"torus\" or \"padic\", got '" + group + "'");
}

TargetSet Config::target(const GroupSpace& space) const {
  const std::string value = raw("set");
  const auto split = value.find_first_of(" [");
  const std::string kind = trim(value.substr(0, split));
  const std::string rest = split == std::string::npos ? "" : trim(value.substr(split));
  try {
    if (kind == "whole") return TargetSet::whole(space);
    const YAML::Node node = load_value("set", rest);
    if (kind == "intervals") return TargetSet::intervals(space, endpoint_list("set", node));
    if (kind == "boxes") {
      if (!node.IsSequence()) throw ConfigError("set: expected a list of boxes");
      std::vector<std::vector<Endpoints>> boxes;
      for (const auto& box : node) boxes.push_back(endpoint_list("set", box));
      return TargetSet::boxes(space, boxes);
    }
    if (kind == "padic_balls") {
      std::vector<std::pair<Integer, std::size_t>> balls;
      for (const auto& [center, level] : integer_pairs_of("set", node)) {
        balls.emplace_back(center, level.convert_to<std::size_t>());
      }
      return TargetSet::padic_balls(space, balls);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("set: ") + e.what());
  }
  throw ConfigError("set: unknown family '" + kind + "' (intervals, boxes, padic_balls, whole)");
}

std::vector<GroupPoint> Config::points(const std::string& key, const GroupSpace& space) const {
  const YAML::Node node = load_value(key, raw(key));
  auto one = [&](const YAML::Node& v) -> GroupPoint {
    if (!space.is_torus()) {
      const Integer value = to_integer(key, v);
      if (value < 0) throw ConfigError("key '" + key + "': p-adic points are non-negative integers");
      return space.padic_point(value);
    }
    std::vector<ExactScalar> coords;
    if (v.IsSequence()) {
      for (const auto& c : v) coords.push_back(to_scalar(key, c));
    } else {
      coords.push_back(to_scalar(key, v));
    }
    if (static_cast<int>(coords.size()) != space.dim()) {
      throw ConfigError("key '" + key + "': point needs " + std::to_string(space.dim()) + " coordinates");
    }
    return space.torus_point(std::move(coords));
  };
  std::vector<GroupPoint> out;
  const bool list_of_points =
      node.IsSequence() && (space.dim() == 1 || !space.is_torus() || (node.size() > 0 && node[0].IsSequence()));
  if (list_of_points) {
    for (const auto& v : node) out.push_back(one(v));
  } else {
    out.push_back(one(node));
  }
  return out;
}

}  // namespace heavyset
