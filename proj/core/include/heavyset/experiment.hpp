#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "heavyset/config.hpp"
#include "heavyset/diophantine.hpp"
#include "heavyset/dimension.hpp"
#include "heavyset/heavy.hpp"

namespace heavyset {

enum ExitCode : int { kExitOk = 0, kExitInvariant = 1, kExitConfig = 2, kExitResource = 3 };

struct RunOptions {
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

struct AlphaSpec {
  GroupPoint g;
  std::string label;
  bool sampled = false;
  /// Why this step may sit in the exceptional null set (e.g. rational).
  std::optional<std::string> flag;
};

/// A configuration resolved against the command line: space, target set,
/// seed and thread count, plus the derived branch and schedule.
class Experiment {
 public:
  Experiment(Config config, const RunOptions& options);

  const Config& config() const { return config_; }
  const GroupSpace& space() const { return space_; }
  const TargetSet& target() const { return target_; }
  unsigned threads() const { return threads_; }
  std::uint64_t grid_cap() const { return grid_cap_; }
  std::uint64_t seed() const;  // ConfigError when no seed was given
  bool has_seed() const { return seed_.has_value(); }

  /// Branch selection is exact: the measure of A is rational or not. A
  /// Liouville truncation stands in for its irrational limit.
  bool rational_branch() const;
  Rational psi() const;
  int d() const { return space_.exponent(); }
  unsigned k() const;
  /// B = psi + (d - psi)/k, or psi in the rational branch.
  Rational bound() const;
  /// Below-sequence for mu(A) (irrational branch only).
  BelowApprox below() const;
  std::vector<Schedule> schedules() const;
  std::vector<AlphaSpec> alphas() const;
  std::uint64_t resolution() const;

 private:
  Config config_;
  GroupSpace space_;
  TargetSet target_;
  unsigned threads_ = 1;
  std::uint64_t grid_cap_ = GroupSpace::kDefaultGridCap;
  std::optional<std::uint64_t> seed_;
};

// ---- heavy-scan ------------------------------------------------------------

struct HeavyScanRow {
  std::size_t alpha_index = 0;
  std::string alpha;
  std::uint64_t horizon = 0;
  std::uint64_t heavy_count = 0;
  std::uint64_t grid_size = 0;
};

struct HeavyScanResult {
  std::vector<HeavyScanRow> rows;
  std::optional<std::string> shortcut;  // analytic answer for mu(A) in {0, 1}
  /// Per alpha, per grid point: failure time, or max horizon + 1.
  std::vector<std::vector<std::uint64_t>> survival;
};

HeavyScanResult heavy_scan(const Experiment& exp);

// ---- bound-check -----------------------------------------------------------

struct StageRow {
  Schedule sched;
  std::uint64_t heavy_points = 0;
  PackingResult packing;
  Rational mu_hy;          // grid measure of h_Y(n_i, g)
  ExactScalar bound_lhs;     // N(eps) * min(c3 eps^d, mu(B_eps))
  Rational bound_rhs;        // mu_hy + 2/R
  bool bound_ok = false;
  std::vector<ScaleSample> series;  // stage heavy set packed at eps_1..eps_i
  double estimate = 0.0;   // min consecutive slope of the series
  double ratio = 0.0;      // log N(eps_i) / -log eps_i
};

struct AlphaReport {
  std::size_t index = 0;
  AlphaSpec alpha;
  std::vector<StageRow> stages;
  double final_estimate = 0.0;
  bool nonincreasing = true;
  bool within_bound = false;
  bool bound_ok = true;
  bool pass = false;
};

struct BoundReport {
  Rational psi;
  int d = 1;
  unsigned k = 2;
  Rational bound;
  Rational slack;
  bool rational_branch = false;
  std::string below_source;
  std::uint64_t resolution = 0;
  std::vector<AlphaReport> alphas;
  bool pass = false;  // every unflagged alpha passes
};

/// Heavy-set grid approximations, packing numbers and the packing lower
/// bounds for one step along every schedule stage.
AlphaReport analyze_alpha(const Experiment& exp, const std::vector<Schedule>& schedules,
                          const AlphaSpec& alpha, std::size_t index, std::uint64_t resolution);

BoundReport bound_check(const Experiment& exp);

// ---- verify ----------------------------------------------------------------

enum class CheckKind { exact, statistical };

struct CheckRow {
  std::string name;
  CheckKind kind = CheckKind::exact;
  bool passed = false;
  std::string value;
  std::string detail;
};

std::vector<CheckRow> verify(const Experiment& exp);

// ---- commands --------------------------------------------------------------

int cmd_cf(const Config& config, const RunOptions& options, std::ostream& log);
int cmd_heavy_scan(const Config& config, const RunOptions& options, std::ostream& log);
int cmd_bound_check(const Config& config, const RunOptions& options, std::ostream& log);
int cmd_verify(const Config& config, const RunOptions& options, std::ostream& log);
int cmd_regularity(const Config& config, const RunOptions& options, std::ostream& log);

/// Dispatches by name and maps errors to exit codes.
int run_command(const std::string& name, const std::filesystem::path& config_path,
                const RunOptions& options, std::ostream& log, std::ostream& err);

}  // namespace heavyset
