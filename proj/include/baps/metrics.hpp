// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "baps/constellation.hpp"

namespace baps {

struct MetricsRecord {
    double mi_bits = 0.0;
    double ser = 0.0;
    double ber = 0.0;
    double q_db = 0.0;
    double rms_phase_error = 0.0;
    std::uint64_t cycle_slips = 0;
    double snr_eff_db = 0.0;
};

/// Mean squared residual E|y - x_tx|^2; the auxiliary-channel variance of
/// the mismatched-decoding MI estimate (and the effective-SNR figure).
double residual_variance(const std::vector<cplx>& derotated,
                         const std::vector<std::size_t>& tx_indices, const Constellation& c);

/// Mismatched-decoding MI estimate with a memoryless circular-Gaussian
/// auxiliary channel q(y|x) = exp(-|y-x|^2/s)/(pi s); s fitted from the
/// residuals of the evaluated sequence. Clamped to [0, log2 M].
double mutual_information(const std::vector<cplx>& derotated,
                          const std::vector<std::size_t>& tx_indices, const ShapedPrior& prior,
                          const Constellation& c);

/// Hard-decision symbol/bit error rates using MAP decisions.
struct ErrorRates {
    double ser = 0.0;
    double ber = 0.0;
};
ErrorRates error_rates(const std::vector<cplx>& derotated,
                       const std::vector<std::size_t>& tx_indices, const ShapedPrior& prior,
                       const Constellation& c, double sigma2);

/// Pre-FEC Q-factor: 20 log10(sqrt(2) erfc^-1(2 ber)). Requires 0 < ber < 0.5.
double q_factor_from_ber(double ber);

/// Inverse complementary error function (Newton on std::erfc).
double erfc_inv(double y);

struct PhaseErrorStats {
    double rms = 0.0;            // wrapped to the +/- pi/4 basin
    std::uint64_t cycle_slips = 0; // number of basin-index changes
};
PhaseErrorStats phase_error_stats(const std::vector<double>& theta_est,
                                  const std::vector<double>& theta_true);

} // namespace baps
