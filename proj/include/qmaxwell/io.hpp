#pragma once

// Density profiles as CSV ("x,n", periodic grid without the x = 1 endpoint),
// solver reports as JSON, and the potential expression grammar.

#include "qmaxwell/functionals.hpp"
#include "qmaxwell/solver.hpp"
#include "qmaxwell/spectral_core.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qmaxwell {

/// Raw samples of a density file after format validation.
struct DensitySamples {
  Vector x;
  Vector values;
};

/// Parses CSV text with header "x,<value_column>". Throws MalformedRow (with
/// the 1-based line number), NonUniformGrid, DuplicatedEndpoint, and
/// NonPositiveDensity when `require_positive` is set.
DensitySamples parse_grid_csv(std::string_view text, std::string_view value_column = "n",
                              bool require_positive = true);

/// Values of the trigonometric interpolant of uniform periodic samples on a
/// grid of `target_size` points. Wavenumbers the target grid cannot resolve
/// are dropped; the mean is preserved exactly.
Vector resample_trigonometric(const Vector& values, int target_size);

/// Reads a density file and brings it onto the basis grid. Throws FileError
/// if the file cannot be read, InvalidArgument when it has fewer than 4M+1
/// rows, plus the errors of parse_grid_csv.
DensityProfile parse_density_csv(const std::filesystem::path& path, const SpectralBasis& basis);

std::string format_grid_csv(const SpectralBasis& basis, const Vector& values,
                            std::string_view value_column = "n");
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

/// Parses sums of `c`, `c*cos(2*pi*k*x)` and `c*sin(2*pi*k*x)` (also `zero`).
/// Throws InvalidArgument on anything else or on k > M.
ChemicalPotential parse_potential_expression(std::string_view expression,
                                             const SpectralBasis& basis);

/// Potential from a file (JSON coefficient array, JSON report, or CSV with
/// header "x,A") or, when no such file exists, from an expression.
ChemicalPotential load_potential(const std::string& argument, const SpectralBasis& basis);

struct ReportMeta {
  int modes = 0;
  int grid = 0;
  std::string method;
  double tol_l2 = 0.0;
  int max_iter = 0;
  double armijo_c = 0.0;
  double armijo_shrink = 0.0;
  double newton_regularization = 0.0;
  std::vector<double> schedule;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  int threads = 1;

  friend bool operator==(const ReportMeta&, const ReportMeta&) = default;
};

struct ReportResult {
  double residual_l2 = 0.0;
  double residual_hminus1 = 0.0;
  double free_energy = 0.0;
  double dual_value = 0.0;
  double duality_gap = 0.0;
  double el_residual = 0.0;
  int iterations = 0;

  friend bool operator==(const ReportResult&, const ReportResult&) = default;
};

struct ReportFile {
  ReportMeta meta;
  ReportResult result;
  std::vector<double> fourier_coefficients;
  std::vector<double> density_achieved;
  std::vector<InequalityReport> inequalities;
  std::vector<IterationRecord> history;

  friend bool operator==(const ReportFile&, const ReportFile&) = default;
};

ReportMeta make_report_meta(const SpectralBasis& basis, const SolverOptions& opts);
ReportResult make_report_result(const SolveReport& report);
/// Report of a successful solve.
ReportFile make_report(const MaxwellianSolution& solution, const SolverOptions& opts);

nlohmann::json report_to_json(const ReportFile& report);
/// Throws InvalidArgument on missing or mistyped keys.
ReportFile report_from_json(const nlohmann::json& json);

std::string serialize_report(const ReportFile& report);
ReportFile parse_report(std::string_view text);

}  // namespace qmaxwell
