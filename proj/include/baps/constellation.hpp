// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace baps {

using cplx = std::complex<double>;

/// Square QAM constellation on the odd-integer grid, optionally rescaled to
/// unit mean energy under an associated prior.
///
/// Point ordering is row-major over (I level, Q level) with levels ascending;
/// this order defines the tie-break rule "lowest constellation index".
struct Constellation {
    std::vector<cplx> points;
    std::vector<std::uint32_t> labels; // Gray per dimension, I bits then Q bits
    int order = 0;                     // M
    double scale = 1.0;                // applied to the odd-integer grid

    int bits_per_symbol() const;
    int levels_per_dim() const;

    /// Grid coordinate of a point (point / scale), exact odd integers.
    cplx grid_point(std::size_t i) const { return points[i] / scale; }
};

/// Per-point prior probabilities plus the Maxwell-Boltzmann parameter that
/// generated them (lambda = 0 for uniform or hand-built priors).
struct ShapedPrior {
    std::vector<double> probabilities;
    double lambda = 0.0;
};

/// Per-dimension marginal of a ring-symmetric prior: sorted levels and the
/// log marginal probability of each level. Used by decision kernels, which
/// exploit that the Eq-style MAP metric separates per quadrature.
struct DimensionPrior {
    std::vector<double> levels;    // scaled, ascending
    std::vector<double> log_prob;  // log of per-level marginal; -inf allowed
};

Constellation build_qam(int order);

/// Maxwell-Boltzmann prior p(x) proportional to exp(-lambda*|x|^2), with the
/// exponent evaluated on the unnormalized odd-integer grid.
ShapedPrior mb_prior(const Constellation& c, double lambda);

ShapedPrior uniform_prior(const Constellation& c);

/// Entropy in bits of the per-dimension amplitude distribution under the MB
/// prior with the given lambda.
double amplitude_entropy_bits(const Constellation& c, double lambda);

/// Inverse of the amplitude-entropy map via bisection (|H - target| < 1e-9).
double lambda_for_rate(const Constellation& c, double target_bits_per_amplitude);

/// Rescales the constellation so sum p(x)|x|^2 == 1. Idempotent.
Constellation normalize(const Constellation& c, const ShapedPrior& prior);

/// Source entropy H(X) in bits under the prior.
double symbol_entropy_bits(const ShapedPrior& prior);

/// Mean symbol energy sum p(x)|x|^2 at the current scale.
double mean_energy(const Constellation& c, const ShapedPrior& prior);

/// Per-dimension marginal of the prior (levels ascending, log probabilities).
DimensionPrior dimension_prior(const Constellation& c, const ShapedPrior& prior);

/// Indices of the four outermost corner points, in deterministic cycling
/// order (+,+), (-,+), (-,-), (+,-). Used as pilot symbols.
std::vector<std::size_t> corner_indices(const Constellation& c);

} // namespace baps
