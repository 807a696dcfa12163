#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "opideal/ascent.hpp"
#include "opideal/exponent.hpp"
#include "opideal/interpolation.hpp"
#include "opideal/sampling.hpp"
#include "opideal/summing.hpp"
#include "opideal/systems.hpp"

namespace opideal {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kToolName = "opideal";
inline constexpr std::string_view kToolVersion = "0.1.0";

enum class ExperimentKind { Theorem2Schatten, Theorem1Characters, LimitOrderTable, InterpAudit, KpProfile };

std::string_view to_string(ExperimentKind k) noexcept;
ExperimentKind parse_experiment_kind(std::string_view text);

struct ExponentPair {
  Exponent u;
  Exponent v;
};

/// "2:inf" -> (2, inf).
ExponentPair parse_pair(std::string_view text);
/// "2:inf,1:2".
std::vector<ExponentPair> parse_pairs(std::string_view text);
/// "1,2,inf".
std::vector<Exponent> parse_exponent_list(std::string_view text);
std::vector<std::size_t> parse_size_list(std::string_view text);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Theorem2Schatten;
  /// n for Schatten and audit experiments, m for character experiments.
  std::vector<std::size_t> n_grid;
  std::vector<ExponentPair> pairs;

  // character systems
  std::string generator = "lacunary";  ///< lacunary | full | explicit
  std::vector<std::int64_t> frequencies;
  std::int64_t group_order = 0;  ///< explicit generator only
  std::string expectation = "match";  ///< match | exceed
  double margin = 0.2;

  // sampling
  std::optional<std::uint64_t> seed;
  std::size_t samples = 100000;
  std::size_t search_samples = 2000;
  GaussianKind gaussian = GaussianKind::Real;

  // optimizers
  AscentConfig ascent{8, 100, 0.1, 1e-8, 0, 0};
  SearchConfig search;

  // verdicts
  double tol_exact = 0.05;
  double tol_mc = 0.1;
  /// Two-sided fit tolerance for character-system experiments.
  double tol_character = 0.1;

  // interpolation audit
  double theta = 0.5;
  double schatten_dtheta = kDefaultSchattenDTheta;

  // Kp profile / limit-order table
  std::vector<Exponent> p_grid;
  std::vector<Exponent> u_grid;
  std::vector<Exponent> v_grid;
  std::string ideal = "gamma";

  // execution (never echoed into reports)
  unsigned threads = 0;

  /// Fills unset grids with per-kind defaults and checks invariants; throws ConfigError.
  void resolve();
  /// Resolved config as echoed in the manifest.
  nlohmann::json to_json() const;
  /// Reads a config tree; unknown keys are rejected.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
};

/// Smallest power of two N with 2^{m-1} < N and N >= 4 m^2 (lacunary), N = m (full),
/// or the configured order (explicit).
std::int64_t coupled_order(const ExperimentConfig& cfg, std::size_t m);
/// Character set of size m for the configured generator.
CharacterSet generate_characters(const ExperimentConfig& cfg, std::size_t m);

struct ReportRow {
  std::string kind;
  std::optional<std::size_t> n;
  std::optional<double> u_recip;
  std::optional<double> v_recip;
  std::string ideal;
  std::string space;
  std::optional<double> value;
  std::optional<double> std_error;
  std::string cert;
  std::optional<double> slope;
  std::optional<double> residual;
  std::optional<double> ref_exponent;
  std::optional<double> slack;
  std::string verdict;  ///< PASS, FAIL, INFO or empty
  std::string method;
  std::string detail;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// Column order shared by CSV and JSON rows.
const std::vector<std::string>& report_columns();

struct RunReport {
  nlohmann::json manifest;
  std::vector<ReportRow> rows;

  bool passed() const;
  nlohmann::json to_json() const;
  std::string to_csv() const;
  /// Human-readable table.
  std::string to_text() const;
};

nlohmann::json row_to_json(const ReportRow& row);
ReportRow row_from_json(const nlohmann::json& j);
std::vector<ReportRow> rows_from_csv(std::string_view csv);

/// Manifest for a resolved config; `timestamp` is omitted when false.
nlohmann::json make_manifest(const ExperimentConfig& cfg, bool timestamp);
/// FNV-1a 64 of the text, as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

RunReport run_theorem2(ExperimentConfig cfg, bool timestamp = true);
RunReport run_theorem1(ExperimentConfig cfg, bool timestamp = true);
RunReport run_interp_audit(ExperimentConfig cfg, bool timestamp = true);
RunReport run_kp_profile(ExperimentConfig cfg, bool timestamp = true);
RunReport run_limit_order_table(ExperimentConfig cfg, bool timestamp = true);
/// Dispatches on cfg.kind.
RunReport run_experiment(ExperimentConfig cfg, bool timestamp = true);

/// Row helpers shared with the CLI.
ReportRow estimate_row(std::string kind, const NormEstimate& e);
/// Fit row for (n, value) points against a reference exponent; verdict
/// checks slope <= ref + tol (upper = false) or slope >= ref - tol (upper = true).
ReportRow fit_row(std::string kind, const std::vector<std::pair<double, double>>& points, double ref, double tol,
                  bool upper);

}  // namespace opideal
