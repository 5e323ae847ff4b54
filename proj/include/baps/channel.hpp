// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "baps/framing.hpp"

namespace baps {

struct ChannelConfig {
    double snr_db = 12.0;       // may be +inf for a noiseless channel
    double linewidth_hz = 0.0;  // combined TX+RX linewidth f_w
    double baud_hz = 50e9;
    std::optional<double> delta2_override; // rad^2/symbol, overrides linewidth
    std::optional<double> theta0_override; // initial phase; default uniform random

    double sigma2() const;
    double delta2() const;
};

struct ChannelOutput {
    std::vector<cplx> received;
    std::vector<double> true_phase; // unwrapped
    double sigma2_true = 0.0;
    double delta2_true = 0.0;
};

/// delta^2 = 2*pi*f_w / baud, with f_w the combined linewidth.
double delta2_from_linewidth(double linewidth_hz, double baud_hz);

/// Wiener trajectory theta_k = theta_{k-1} + v_k, v_k ~ N(0, delta2).
/// Returned unwrapped; element 0 is theta0 + v_1.
std::vector<double> wiener_phase(std::size_t count, double delta2, double theta0, Rng& rng);

/// y_k = x_k exp(j theta_k) + n_k with complex Gaussian noise of total
/// variance sigma^2. Phase and noise come from independent substreams.
ChannelOutput apply_channel(const Frame& frame, const ChannelConfig& config, Rng& phase_rng,
                            Rng& noise_rng);

} // namespace baps
