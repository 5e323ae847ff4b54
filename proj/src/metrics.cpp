// SPDX-License-Identifier: Apache-2.0
#include "baps/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "baps/cpr.hpp"

namespace baps {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kLog2e = 1.4426950408889634074;
} // namespace

double residual_variance(const std::vector<cplx>& derotated,
                         const std::vector<std::size_t>& tx_indices, const Constellation& c) {
    if (derotated.empty() || derotated.size() != tx_indices.size())
        throw std::invalid_argument("residual_variance: empty or mismatched input");
    double s = 0.0;
    for (std::size_t k = 0; k < derotated.size(); ++k)
        s += std::norm(derotated[k] - c.points[tx_indices[k]]);
    return s / static_cast<double>(derotated.size());
}

double mutual_information(const std::vector<cplx>& derotated,
                          const std::vector<std::size_t>& tx_indices, const ShapedPrior& prior,
                          const Constellation& c) {
    if (derotated.empty() || derotated.size() != tx_indices.size())
        throw std::invalid_argument("mutual_information: empty or mismatched input");
    const double s = std::max(residual_variance(derotated, tx_indices, c), 1e-30);
    const std::size_t m = c.points.size();

    std::vector<double> log_p(m);
    for (std::size_t i = 0; i < m; ++i)
        log_p[i] = prior.probabilities[i] > 0.0 ? std::log(prior.probabilities[i])
                                                : -std::numeric_limits<double>::infinity();

    double acc = 0.0;
    std::vector<double> expo(m);
    for (std::size_t k = 0; k < derotated.size(); ++k) {
        const cplx y = derotated[k];
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            expo[i] = -std::norm(y - c.points[i]) / s + log_p[i];
            mx = std::max(mx, expo[i]);
        }
        double den = 0.0;
        for (std::size_t i = 0; i < m; ++i) den += std::exp(expo[i] - mx);
        const double log_den = std::log(den) + mx;
        const double log_num = -std::norm(y - c.points[tx_indices[k]]) / s;
        acc += (log_num - log_den) * kLog2e;
    }
    const double mi = acc / static_cast<double>(derotated.size());
    return std::clamp(mi, 0.0, static_cast<double>(c.bits_per_symbol()));
}

ErrorRates error_rates(const std::vector<cplx>& derotated,
                       const std::vector<std::size_t>& tx_indices, const ShapedPrior& prior,
                       const Constellation& c, double sigma2) {
    if (sigma2 <= 0.0) throw std::invalid_argument("error_rates: sigma2 must be > 0");
    if (derotated.size() != tx_indices.size())
        throw std::invalid_argument("error_rates: length mismatch");
    const int bits = c.bits_per_symbol();
    std::uint64_t sym_err = 0;
    std::uint64_t bit_err = 0;
    for (std::size_t k = 0; k < derotated.size(); ++k) {
        const std::size_t dec = map_decision(derotated[k], prior, c, sigma2);
        if (dec != tx_indices[k]) ++sym_err;
        bit_err += static_cast<std::uint64_t>(
            std::popcount(c.labels[dec] ^ c.labels[tx_indices[k]]));
    }
    ErrorRates r;
    const double n = static_cast<double>(derotated.size());
    r.ser = static_cast<double>(sym_err) / n;
    r.ber = static_cast<double>(bit_err) / (n * bits);
    return r;
}

double erfc_inv(double y) {
    if (y <= 0.0 || y >= 2.0) throw std::domain_error("erfc_inv: argument outside (0, 2)");
    if (y == 1.0) return 0.0;
    // Initial guess from the asymptotic expansion of erfc, then Newton.
    const bool flip = y > 1.0;
    const double yy = flip ? 2.0 - y : y;
    double x = std::sqrt(std::max(-std::log(yy), 1e-300));
    for (int it = 0; it < 60; ++it) {
        const double f = std::erfc(x) - yy;
        const double d = -2.0 / std::sqrt(kPi) * std::exp(-x * x);
        const double step = f / d;
        x -= step;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    return flip ? -x : x;
}

double q_factor_from_ber(double ber) {
    if (!(ber > 0.0) || !(ber < 0.5))
        throw std::domain_error("q_factor_from_ber: ber must be in (0, 0.5)");
    return 20.0 * std::log10(std::sqrt(2.0) * erfc_inv(2.0 * ber));
}

PhaseErrorStats phase_error_stats(const std::vector<double>& theta_est,
                                  const std::vector<double>& theta_true) {
    if (theta_est.size() != theta_true.size())
        throw std::invalid_argument("phase_error_stats: length mismatch");
    PhaseErrorStats st;
    if (theta_est.empty()) return st;
    double acc = 0.0;
    double prev_basin = 0.0;
    for (std::size_t k = 0; k < theta_est.size(); ++k) {
        const double d = theta_est[k] - theta_true[k];
        const double basin = std::round(d / (kPi / 2.0));
        const double e = d - basin * (kPi / 2.0);
        acc += e * e;
        if (k > 0 && basin != prev_basin) ++st.cycle_slips;
        prev_basin = basin;
    }
    st.rms = std::sqrt(acc / static_cast<double>(theta_est.size()));
    return st;
}

} // namespace baps
