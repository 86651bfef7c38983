#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "heavyset/exact_scalar.hpp"
#include "heavyset/group.hpp"
#include "heavyset/target_set.hpp"

namespace heavyset {

/// Experiment configuration: one `key = value` per line, `#` comments, and
/// values in YAML flow syntax (numbers, quoted exact scalars, [lists]). A
/// value may continue over several lines while its brackets are open. The
/// `set` key takes a family word before its list:
///
///   group = "torus"
///   dim = 1
///   set = intervals [[0, "(sqrt5-1)/2"]]
///   alpha = "sqrt2 - 1"
///
/// Unknown keys are rejected so typos do not silently fall back to defaults.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& raw(const std::string& key) const;
  std::vector<std::string> keys() const;

  std::string text(const std::string& key) const;
  std::string text_or(const std::string& key, const std::string& fallback) const;
  bool flag_or(const std::string& key, bool fallback) const;
  Integer integer(const std::string& key) const;
  std::uint64_t count(const std::string& key) const;
  std::uint64_t count_or(const std::string& key, std::uint64_t fallback) const;
  Rational rational(const std::string& key) const;
  Rational rational_or(const std::string& key, const Rational& fallback) const;
  ExactScalar scalar(const std::string& key) const;
  /// A single scalar or a list of scalars.
  std::vector<ExactScalar> scalars(const std::string& key) const;
  std::vector<Integer> integers(const std::string& key) const;
  std::vector<std::pair<Integer, Integer>> integer_pairs(const std::string& key) const;

  /// group / dim / prime / depth.
  GroupSpace space() const;
  /// The `set` key over the configured space.
  TargetSet target(const GroupSpace& space) const;
  /// The `alpha` key as points of the space (one per listed value).
  std::vector<GroupPoint> points(const std::string& key, const GroupSpace& space) const;

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace heavyset
