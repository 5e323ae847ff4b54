// SPDX-License-Identifier: Apache-2.0
#include "baps/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace baps {

double ChannelConfig::sigma2() const {
    if (std::isinf(snr_db)) return 0.0;
    return std::pow(10.0, -snr_db / 10.0);
}

double ChannelConfig::delta2() const {
    if (delta2_override) {
        if (*delta2_override < 0.0)
            throw std::invalid_argument("ChannelConfig: delta2_override must be >= 0");
        return *delta2_override;
    }
    return delta2_from_linewidth(linewidth_hz, baud_hz);
}

double delta2_from_linewidth(double linewidth_hz, double baud_hz) {
    if (baud_hz <= 0.0)
        throw std::invalid_argument("delta2_from_linewidth: baud rate must be > 0");
    if (linewidth_hz < 0.0)
        throw std::invalid_argument("delta2_from_linewidth: linewidth must be >= 0");
    return 2.0 * 3.14159265358979323846 * linewidth_hz / baud_hz;
}

std::vector<double> wiener_phase(std::size_t count, double delta2, double theta0, Rng& rng) {
    if (count == 0)
        throw std::invalid_argument("wiener_phase: count must be >= 1");
    std::vector<double> theta(count);
    const double step = std::sqrt(delta2);
    double cur = theta0;
    for (std::size_t k = 0; k < count; ++k) {
        cur += step * rng.normal();
        theta[k] = cur;
    }
    return theta;
}

ChannelOutput apply_channel(const Frame& frame, const ChannelConfig& config, Rng& phase_rng,
                            Rng& noise_rng) {
    const std::size_t n = frame.symbols.size();
    ChannelOutput out;
    out.sigma2_true = config.sigma2();
    out.delta2_true = config.delta2();

    const double theta0 =
        config.theta0_override ? *config.theta0_override : phase_rng.uniform_angle();
    out.true_phase = wiener_phase(n, out.delta2_true, theta0, phase_rng);

    out.received.resize(n);
    const double s = std::sqrt(out.sigma2_true / 2.0); // per-quadrature std
    for (std::size_t k = 0; k < n; ++k) {
        const auto [nr, ni] = noise_rng.normal_pair();
        const cplx rot = std::polar(1.0, out.true_phase[k]);
        out.received[k] = frame.symbols[k] * rot + cplx(s * nr, s * ni);
    }
    return out;
}

} // namespace baps
