#include "qmaxwell/error.hpp"
#include "qmaxwell/spectral_core.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace qmaxwell {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Matrix trig_table(const Vector& grid, int max_wavenumber) {
  const auto n = grid.size();
  Matrix table(n, coefficient_count(max_wavenumber));
  table.col(0).setOnes();
  for (int k = 1; k <= max_wavenumber; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double phase = kTwoPi * k * grid(j);
      table(j, 2 * k - 1) = std::numbers::sqrt2 * std::cos(phase);
      table(j, 2 * k) = std::numbers::sqrt2 * std::sin(phase);
    }
  }
  return table;
}

}  // namespace

SpectralBasis build_basis(int modes, std::optional<int> grid_size) {
  if (modes < 1) {
    throw InvalidArgument(fmt::format("mode cutoff must be >= 1, got {}", modes));
  }
  int n = 0;
  if (grid_size) {
    n = *grid_size;
    if (n < minimum_grid_size(modes)) {
      throw InvalidArgument(fmt::format(
          "grid size {} is below 4M+1 = {} for M = {}; potential matrix elements would alias",
          n, minimum_grid_size(modes), modes));
    }
  } else {
    n = 1;
    while (n < 4 * modes + 2) n *= 2;
  }

  auto impl = std::make_shared<SpectralBasis::Impl>();
  impl->modes = modes;
  impl->grid_size = n;
  impl->grid = Vector::LinSpaced(n, 0.0, static_cast<double>(n - 1) / n);
  impl->h_eigenvalues.resize(2 * modes + 1);
  for (int p = 0; p < 2 * modes + 1; ++p) {
    const double k = wavenumber_of(p);
    impl->h_eigenvalues(p) = kTwoPi * kTwoPi * k * k;
  }
  impl->samples = trig_table(impl->grid, 2 * modes);
  return SpectralBasis(std::move(impl));
}

Matrix SpectralBasis::trig_samples(int max_wavenumber) const {
  if (max_wavenumber < 0 || max_wavenumber > max_resolved_wavenumber()) {
    throw InvalidArgument(fmt::format("wavenumber {} not resolved on a {}-point grid",
                                      max_wavenumber, grid_size()));
  }
  if (max_wavenumber <= 2 * modes()) {
    return impl_->samples.leftCols(coefficient_count(max_wavenumber));
  }
  return trig_table(impl_->grid, max_wavenumber);
}

Vector SpectralBasis::evaluate(double x) const {
  Vector values(dimension());
  values(0) = 1.0;
  for (int k = 1; k <= modes(); ++k) {
    values(2 * k - 1) = std::numbers::sqrt2 * std::cos(kTwoPi * k * x);
    values(2 * k) = std::numbers::sqrt2 * std::sin(kTwoPi * k * x);
  }
  return values;
}

Vector SpectralBasis::evaluate_derivative(double x) const {
  Vector values(dimension());
  values(0) = 0.0;
  for (int k = 1; k <= modes(); ++k) {
    const double scale = std::numbers::sqrt2 * kTwoPi * k;
    values(2 * k - 1) = -scale * std::sin(kTwoPi * k * x);
    values(2 * k) = scale * std::cos(kTwoPi * k * x);
  }
  return values;
}

double SpectralBasis::integrate(const Vector& values) const {
  if (values.size() != grid_size()) {
    throw DimensionMismatch(
        fmt::format("grid function has {} values, grid has {}", values.size(), grid_size()));
  }
  return values.sum() * weight();
}

double SpectralBasis::inner(const Vector& u, const Vector& v) const {
  if (u.size() != grid_size() || v.size() != grid_size()) {
    throw DimensionMismatch("grid function length does not match the grid");
  }
  return u.dot(v) * weight();
}

Vector SpectralBasis::project(const Vector& values, int max_wavenumber) const {
  if (values.size() != grid_size()) {
    throw DimensionMismatch(
        fmt::format("grid function has {} values, grid has {}", values.size(), grid_size()));
  }
  return weight() * (trig_samples(max_wavenumber).transpose() * values);
}

Vector SpectralBasis::synthesize(const Vector& coefficients) const {
  const auto count = coefficients.size();
  if (count % 2 == 0 || count > impl_->samples.cols()) {
    throw DimensionMismatch(fmt::format(
        "{} coefficients cannot be synthesized on a basis with M = {}", count, modes()));
  }
  return impl_->samples.leftCols(count) * coefficients;
}

}  // namespace qmaxwell
