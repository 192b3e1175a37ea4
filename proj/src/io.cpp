#include "qmaxwell/io.hpp"

#include "qmaxwell/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace qmaxwell {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

constexpr double kGridTolerance = 1e-9;

}  // namespace

DensitySamples parse_grid_csv(std::string_view text, std::string_view value_column,
                              bool require_positive) {
  std::vector<double> xs;
  std::vector<double> vs;
  int line_number = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto next = text.find('\n', pos);
    if (next == std::string_view::npos) next = text.size();
    const std::string_view line = trim(text.substr(pos, next - pos));
    pos = next + 1;
    ++line_number;
    if (line.empty()) continue;

    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw MalformedRow(fmt::format("line {}: expected two comma-separated fields, got '{}'",
                                     line_number, line),
                         line_number);
    }
    const auto first = trim(line.substr(0, comma));
    const auto second = trim(line.substr(comma + 1));
    if (!header_seen) {
      if (first != "x" || second != value_column) {
        throw MalformedRow(fmt::format("line {}: expected header 'x,{}', got '{}'", line_number,
                                       value_column, line),
                           line_number);
      }
      header_seen = true;
      continue;
    }
    const auto x = parse_double(first);
    const auto v = parse_double(second);
    if (!x || !v || !std::isfinite(*x) || !std::isfinite(*v)) {
      throw MalformedRow(fmt::format("line {}: cannot parse '{}' as two finite numbers",
                                     line_number, line),
                         line_number);
    }
    if (*x >= 1.0 - kGridTolerance) {
      throw DuplicatedEndpoint(fmt::format(
          "line {}: x = {} lies on or beyond the periodic endpoint; grids cover [0, 1) and "
          "must not repeat x = 1 (drop that row)",
          line_number, *x));
    }
    if (require_positive && !(*v > 0.0)) {
      throw NonPositiveDensity(fmt::format(
          "line {}: density {} at x = {} is not strictly positive", line_number, *v, *x));
    }
    xs.push_back(*x);
    vs.push_back(*v);
  }
  if (!header_seen) throw MalformedRow(fmt::format("missing header 'x,{}'", value_column), 1);
  if (xs.empty()) throw MalformedRow("no data rows", line_number);

  const auto n = static_cast<double>(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double expected = static_cast<double>(j) / n;
    if (std::abs(xs[j] - expected) > kGridTolerance) {
      throw NonUniformGrid(fmt::format(
          "row {}: x = {} but a uniform grid of {} points starting at 0 needs x = {}", j + 1,
          xs[j], xs.size(), expected));
    }
  }
  DensitySamples out;
  out.x = Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  out.values = Eigen::Map<const Vector>(vs.data(), static_cast<Eigen::Index>(vs.size()));
  return out;
}

Vector resample_trigonometric(const Vector& values, int target_size) {
  const int n = static_cast<int>(values.size());
  if (n < 1 || target_size < 1) throw InvalidArgument("resampling needs non-empty grids");
  if (n == target_size) return values;

  // Real DFT of the source samples, then evaluation of the interpolant on the
  // target grid. Grids here are small enough that direct sums are adequate.
  const double two_pi = 2.0 * std::numbers::pi;
  const int source_k = n / 2;
  const int target_k = (target_size - 1) / 2;
  const bool target_nyquist = target_size % 2 == 0;
  Vector a = Vector::Zero(source_k + 1);
  Vector b = Vector::Zero(source_k + 1);
  for (int k = 0; k <= source_k; ++k) {
    for (int j = 0; j < n; ++j) {
      const double phase = two_pi * k * j / n;
      a(k) += values(j) * std::cos(phase);
      b(k) += values(j) * std::sin(phase);
    }
    a(k) /= n;
    b(k) /= n;
  }

  Vector out = Vector::Constant(target_size, a(0));
  for (int i = 0; i < target_size; ++i) {
    const double x = static_cast<double>(i) / target_size;
    for (int k = 1; k <= source_k; ++k) {
      const bool source_nyquist = n % 2 == 0 && k == source_k;
      // The source Nyquist mode is real-valued: a cosine of weight a_k.
      const double weight = source_nyquist ? 1.0 : 2.0;
      if (k <= target_k) {
        out(i) += weight * (a(k) * std::cos(two_pi * k * x) + b(k) * std::sin(two_pi * k * x));
      } else if (target_nyquist && k == target_size / 2) {
        out(i) += weight * a(k) * std::cos(two_pi * k * x);
      }
    }
  }
  return out;
}

DensityProfile parse_density_csv(const std::filesystem::path& path, const SpectralBasis& basis) {
  const std::string text = read_text_file(path);
  const DensitySamples samples = parse_grid_csv(text, "n", true);
  const auto rows = static_cast<int>(samples.values.size());
  if (rows < minimum_grid_size(basis.modes())) {
    throw InvalidArgument(fmt::format(
        "{}: {} rows cannot resolve M = {}; at least {} are needed", path.string(), rows,
        basis.modes(), minimum_grid_size(basis.modes())));
  }
  Vector values = resample_trigonometric(samples.values, basis.grid_size());
  if (!(values.minCoeff() > 0.0)) {
    throw NonPositiveDensity(fmt::format(
        "{}: the trigonometric interpolant onto {} points reaches {} <= 0", path.string(),
        basis.grid_size(), values.minCoeff()));
  }
  return DensityProfile(basis, std::move(values));
}

std::string format_grid_csv(const SpectralBasis& basis, const Vector& values,
                            std::string_view value_column) {
  if (values.size() != basis.grid_size()) {
    throw DimensionMismatch(fmt::format("{} values for a grid of {} points", values.size(),
                                        basis.grid_size()));
  }
  std::string out = fmt::format("x,{}\n", value_column);
  for (int j = 0; j < basis.grid_size(); ++j) {
    out += fmt::format("{},{}\n", basis.grid()(j), values(j));
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw FileError(fmt::format("{}: cannot open for writing", path.string()));
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!file) throw FileError(fmt::format("{}: write failed", path.string()));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw FileError(fmt::format("{}: no such file", path.string()));
  }
  std::ifstream file(path, std::ios::binary);
  if (!file) throw FileError(fmt::format("{}: cannot open for reading", path.string()));
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

// ---------------------------------------------------------------------------
// Potential expressions

namespace {

class ExpressionParser {
 public:
  ExpressionParser(std::string_view text, const SpectralBasis& basis) : basis_(basis) {
    const auto operand = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '.'; };
    bool gap = false;
    for (char c : text) {
      if (c == ' ' || c == '\t') {
        gap = true;
        continue;
      }
      // Whitespace may separate tokens but must not join two operands.
      if (gap && !text_.empty() && operand(text_.back()) && operand(c)) {
        throw InvalidArgument(fmt::format("potential expression '{}': missing operator", text));
      }
      gap = false;
      text_.push_back(c);
    }
    coefficients_ = Vector::Zero(basis.dimension());
  }

  ChemicalPotential parse() {
    if (text_ == "zero" || text_ == "0") return ChemicalPotential::zero(basis_);
    if (text_.empty()) fail("empty expression");
    bool first = true;
    while (pos_ < text_.size()) {
      double sign = 1.0;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1.0 : 1.0;
        ++pos_;
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      term(sign);
      first = false;
    }
    return ChemicalPotential(basis_, coefficients_);
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  bool accept(std::string_view token) {
    if (std::string_view(text_).substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(std::string_view reason) const {
    throw InvalidArgument(fmt::format("potential expression '{}': {} at position {}", text_,
                                      reason, pos_));
  }

  double number() {
    const char* begin = text_.data() + pos_;
    double value = 0.0;
    const auto [end, ec] = std::from_chars(begin, text_.data() + text_.size(), value);
    if (ec != std::errc() || end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return value;
  }

  int wavenumber() {
    // 2*pi*x or 2*pi*k*x
    if (!accept("2*pi*")) fail("expected '2*pi*'");
    if (accept("x")) return 1;
    const char* begin = text_.data() + pos_;
    int k = 0;
    const auto [end, ec] = std::from_chars(begin, text_.data() + text_.size(), k);
    if (ec != std::errc() || end == begin) fail("expected an integer wavenumber");
    pos_ += static_cast<std::size_t>(end - begin);
    if (!accept("*x")) fail("expected '*x'");
    if (k < 1) fail("wavenumber must be positive");
    if (k > basis_.modes()) {
      fail(fmt::format("wavenumber {} exceeds the mode cutoff {}", k, basis_.modes()));
    }
    return k;
  }

  void term(double sign) {
    double c = 1.0;
    const bool has_number = std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.';
    if (has_number) {
      c = number();
      if (!accept("*")) {
        coefficients_(0) += sign * c;
        return;
      }
    }
    const bool is_cos = accept("cos(");
    const bool is_sin = !is_cos && accept("sin(");
    if (!is_cos && !is_sin) fail("expected a number, 'cos(' or 'sin('");
    const int k = wavenumber();
    if (!accept(")")) fail("expected ')'");
    const int p = is_cos ? 2 * k - 1 : 2 * k;
    coefficients_(p) += sign * c / std::numbers::sqrt2;
  }

  const SpectralBasis& basis_;
  std::string text_;
  std::size_t pos_ = 0;
  Vector coefficients_;
};

Vector coefficients_from_json(const json& array) {
  if (!array.is_array()) throw InvalidArgument("expected a JSON array of coefficients");
  Vector c(static_cast<Eigen::Index>(array.size()));
  for (std::size_t i = 0; i < array.size(); ++i) {
    if (!array[i].is_number()) throw InvalidArgument("coefficient array holds a non-number");
    c(static_cast<Eigen::Index>(i)) = array[i].get<double>();
  }
  return c;
}

}  // namespace

ChemicalPotential parse_potential_expression(std::string_view expression,
                                             const SpectralBasis& basis) {
  return ExpressionParser(expression, basis).parse();
}

ChemicalPotential load_potential(const std::string& argument, const SpectralBasis& basis) {
  const std::filesystem::path path(argument);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    const auto ext = path.extension();
    if (ext == ".json" || ext == ".csv") {
      throw FileError(fmt::format("{}: no such file", argument));
    }
    return parse_potential_expression(argument, basis);
  }
  const std::string text = read_text_file(path);
  if (path.extension() == ".csv") {
    const DensitySamples samples = parse_grid_csv(text, "A", false);
    return ChemicalPotential::from_grid(
        basis, resample_trigonometric(samples.values, basis.grid_size()));
  }
  json parsed;
  try {
    parsed = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(fmt::format("{}: {}", argument, e.what()));
  }
  if (parsed.is_object()) {
    if (!parsed.contains("potential") || !parsed["potential"].contains("fourier_coefficients")) {
      throw InvalidArgument(fmt::format("{}: no potential.fourier_coefficients", argument));
    }
    return ChemicalPotential(basis, coefficients_from_json(parsed["potential"]["fourier_coefficients"]));
  }
  return ChemicalPotential(basis, coefficients_from_json(parsed));
}

// ---------------------------------------------------------------------------
// Reports

ReportMeta make_report_meta(const SpectralBasis& basis, const SolverOptions& opts) {
  ReportMeta meta;
  meta.modes = basis.modes();
  meta.grid = basis.grid_size();
  meta.method = std::string(to_string(opts.method));
  meta.tol_l2 = opts.tol_l2;
  meta.max_iter = opts.max_iter;
  meta.armijo_c = opts.armijo_c;
  meta.armijo_shrink = opts.armijo_shrink;
  meta.newton_regularization = opts.newton_regularization;
  meta.schedule = opts.epsilon_schedule;
  return meta;
}

ReportResult make_report_result(const SolveReport& report) {
  ReportResult r;
  r.residual_l2 = report.residual_l2;
  r.residual_hminus1 = report.residual_hminus1;
  r.free_energy = report.free_energy;
  r.dual_value = report.dual_value;
  r.duality_gap = report.duality_gap;
  r.el_residual = report.el_residual;
  r.iterations = report.iterations;
  return r;
}

ReportFile make_report(const MaxwellianSolution& solution, const SolverOptions& opts) {
  ReportFile report;
  report.meta = make_report_meta(solution.rho.basis(), opts);
  report.result = make_report_result(solution.report);
  const Vector& c = solution.potential.coefficients();
  report.fourier_coefficients.assign(c.data(), c.data() + c.size());
  const Vector n = density_of(solution.rho);
  report.density_achieved.assign(n.data(), n.data() + n.size());
  report.history = solution.report.history;
  return report;
}

namespace {

// JSON has no literal for non-finite numbers; they travel as strings.
json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json numbers(const std::vector<double>& values) {
  json out = json::array();
  for (double v : values) out.push_back(number(v));
  return out;
}

const json& field(const json& object, const char* key) {
  if (!object.is_object() || !object.contains(key)) {
    throw InvalidArgument(fmt::format("report: missing key '{}'", key));
  }
  return object.at(key);
}

double as_double(const json& value, const char* key) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw InvalidArgument(fmt::format("report: '{}' is not a number", key));
}

double get_double(const json& object, const char* key) {
  return as_double(field(object, key), key);
}

int get_int(const json& object, const char* key) {
  const json& v = field(object, key);
  if (!v.is_number_integer()) throw InvalidArgument(fmt::format("report: '{}' is not an integer", key));
  return v.get<int>();
}

bool get_bool(const json& object, const char* key) {
  const json& v = field(object, key);
  if (!v.is_boolean()) throw InvalidArgument(fmt::format("report: '{}' is not a boolean", key));
  return v.get<bool>();
}

std::vector<double> get_doubles(const json& object, const char* key) {
  const json& v = field(object, key);
  if (!v.is_array()) throw InvalidArgument(fmt::format("report: '{}' is not an array", key));
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& item : v) out.push_back(as_double(item, key));
  return out;
}

}  // namespace

json report_to_json(const ReportFile& report) {
  const ReportMeta& m = report.meta;
  json meta = {
      {"modes", m.modes},
      {"grid", m.grid},
      {"method", m.method},
      {"tolerances",
       {{"tol_l2", number(m.tol_l2)},
        {"max_iter", m.max_iter},
        {"armijo_c", number(m.armijo_c)},
        {"armijo_shrink", number(m.armijo_shrink)},
        {"newton_regularization", number(m.newton_regularization)}}},
      {"schedule", numbers(m.schedule)},
      {"seed", m.seed ? json(*m.seed) : json(nullptr)},
      {"samples", m.samples ? json(*m.samples) : json(nullptr)},
      {"threads", m.threads},
  };
  const ReportResult& r = report.result;
  json result = {
      {"residual_l2", number(r.residual_l2)},
      {"residual_hminus1", number(r.residual_hminus1)},
      {"free_energy", number(r.free_energy)},
      {"dual_value", number(r.dual_value)},
      {"duality_gap", number(r.duality_gap)},
      {"el_residual", number(r.el_residual)},
      {"iterations", r.iterations},
  };
  json inequalities = json::array();
  for (const auto& q : report.inequalities) {
    inequalities.push_back({{"name", q.name},
                            {"lhs", number(q.lhs)},
                            {"rhs", number(q.rhs)},
                            {"gap", number(q.gap)},
                            {"holds", q.holds},
                            {"strict", q.strict},
                            {"diagnostic", q.diagnostic}});
  }
  json history = json::array();
  for (const auto& h : report.history) {
    history.push_back({{"residual", number(h.residual)},
                       {"step", number(h.step)},
                       {"objective", number(h.objective)}});
  }
  return {
      {"meta", meta},
      {"result", result},
      {"potential", {{"fourier_coefficients", numbers(report.fourier_coefficients)}}},
      {"density_achieved", {{"values", numbers(report.density_achieved)}}},
      {"inequalities", inequalities},
      {"history", history},
  };
}

ReportFile report_from_json(const json& j) {
  ReportFile report;
  const json& meta = field(j, "meta");
  ReportMeta& m = report.meta;
  m.modes = get_int(meta, "modes");
  m.grid = get_int(meta, "grid");
  const json& method = field(meta, "method");
  if (!method.is_string()) throw InvalidArgument("report: 'method' is not a string");
  m.method = method.get<std::string>();
  const json& tol = field(meta, "tolerances");
  m.tol_l2 = get_double(tol, "tol_l2");
  m.max_iter = get_int(tol, "max_iter");
  m.armijo_c = get_double(tol, "armijo_c");
  m.armijo_shrink = get_double(tol, "armijo_shrink");
  m.newton_regularization = get_double(tol, "newton_regularization");
  m.schedule = get_doubles(meta, "schedule");
  if (meta.contains("seed") && !meta["seed"].is_null()) {
    if (!meta["seed"].is_number_unsigned()) throw InvalidArgument("report: 'seed' is not a u64");
    m.seed = meta["seed"].get<std::uint64_t>();
  }
  if (meta.contains("samples") && !meta["samples"].is_null()) m.samples = get_int(meta, "samples");
  if (meta.contains("threads")) m.threads = get_int(meta, "threads");

  const json& result = field(j, "result");
  ReportResult& r = report.result;
  r.residual_l2 = get_double(result, "residual_l2");
  r.residual_hminus1 = get_double(result, "residual_hminus1");
  r.free_energy = get_double(result, "free_energy");
  r.dual_value = get_double(result, "dual_value");
  r.duality_gap = get_double(result, "duality_gap");
  r.el_residual = get_double(result, "el_residual");
  r.iterations = get_int(result, "iterations");

  report.fourier_coefficients = get_doubles(field(j, "potential"), "fourier_coefficients");
  report.density_achieved = get_doubles(field(j, "density_achieved"), "values");

  const json& inequalities = field(j, "inequalities");
  if (!inequalities.is_array()) throw InvalidArgument("report: 'inequalities' is not an array");
  for (const auto& q : inequalities) {
    InequalityReport item;
    const json& name = field(q, "name");
    if (!name.is_string()) throw InvalidArgument("report: inequality name is not a string");
    item.name = name.get<std::string>();
    item.lhs = get_double(q, "lhs");
    item.rhs = get_double(q, "rhs");
    item.gap = get_double(q, "gap");
    item.holds = get_bool(q, "holds");
    item.strict = get_bool(q, "strict");
    item.diagnostic = get_bool(q, "diagnostic");
    report.inequalities.push_back(std::move(item));
  }
  const json& history = field(j, "history");
  if (!history.is_array()) throw InvalidArgument("report: 'history' is not an array");
  for (const auto& h : history) {
    report.history.push_back(
        {get_double(h, "residual"), get_double(h, "step"), get_double(h, "objective")});
  }
  return report;
}

std::string serialize_report(const ReportFile& report) {
  return report_to_json(report).dump(2) + "\n";
}

ReportFile parse_report(std::string_view text) {
  json parsed;
  try {
    parsed = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(fmt::format("report: {}", e.what()));
  }
  return report_from_json(parsed);
}

}  // namespace qmaxwell
