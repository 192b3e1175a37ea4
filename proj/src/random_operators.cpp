#include "qmaxwell/random_operators.hpp"

#include <algorithm>
#include <cmath>

namespace qmaxwell {

Matrix haar_rotation(int dimension, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix g(dimension, dimension);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dimension; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

DensityOperator random_density_operator(const SpectralBasis& basis, Rng& rng) {
  const int d = basis.dimension();
  std::uniform_int_distribution<int> rank_dist(1, d);
  std::uniform_real_distribution<double> log_scale(-8.0, 1.0);
  const int rank = rank_dist(rng);
  Vector s = Vector::Zero(d);
  for (int i = 0; i < rank; ++i) s(i) = std::exp(log_scale(rng));
  const Matrix w = haar_rotation(d, rng);
  Matrix rho = w * s.asDiagonal() * w.transpose();
  return DensityOperator::trusted(basis, 0.5 * (rho + rho.transpose()));
}

DensityOperator random_full_rank_operator(const SpectralBasis& basis, Rng& rng, double lo,
                                          double hi) {
  const int d = basis.dimension();
  std::uniform_real_distribution<double> value(lo, hi);
  Vector s(d);
  for (int i = 0; i < d; ++i) s(i) = value(rng);
  const Matrix w = haar_rotation(d, rng);
  Matrix rho = w * s.asDiagonal() * w.transpose();
  return DensityOperator::trusted(basis, 0.5 * (rho + rho.transpose()));
}

Matrix random_symmetric(int dimension, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix m(dimension, dimension);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return 0.5 * (m + m.transpose());
}

ChemicalPotential random_potential(const SpectralBasis& basis, Rng& rng, int max_wavenumber,
                                   double bound) {
  std::uniform_real_distribution<double> value(-bound, bound);
  Vector c = Vector::Zero(basis.dimension());
  const int count = std::min(coefficient_count(max_wavenumber), basis.dimension());
  for (int p = 0; p < count; ++p) c(p) = value(rng);
  return ChemicalPotential(basis, std::move(c));
}

}  // namespace qmaxwell
