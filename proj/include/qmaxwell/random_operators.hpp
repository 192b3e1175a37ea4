#pragma once

// Seeded generators for the randomized inequality sweeps.

#include "qmaxwell/spectral_core.hpp"

#include <random>

namespace qmaxwell {

using Rng = std::mt19937_64;

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// sign of R's diagonal absorbed).
Matrix haar_rotation(int dimension, Rng& rng);

/// Random PSD operator: Haar eigenvectors, random rank, eigenvalues spread
/// over several decades with some exact zeros.
DensityOperator random_density_operator(const SpectralBasis& basis, Rng& rng);

/// Random PSD operator whose eigenvalues all lie in [lo, hi].
DensityOperator random_full_rank_operator(const SpectralBasis& basis, Rng& rng, double lo,
                                          double hi);

/// Random symmetric matrix with standard normal entries.
Matrix random_symmetric(int dimension, Rng& rng);

/// Random potential with coefficients uniform in [-bound, bound] on
/// wavenumbers <= K.
ChemicalPotential random_potential(const SpectralBasis& basis, Rng& rng, int max_wavenumber,
                                   double bound);

}  // namespace qmaxwell
