// SPDX-License-Identifier: Apache-2.0
#include "baps/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace baps {

namespace {

std::uint32_t gray(std::uint32_t i) { return i ^ (i >> 1); }

int int_log2(int v) {
    int b = 0;
    while ((1 << b) < v) ++b;
    return b;
}

} // namespace

int Constellation::bits_per_symbol() const { return int_log2(order); }

int Constellation::levels_per_dim() const {
    return static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
}

Constellation build_qam(int order) {
    if (order != 64 && order != 256)
        throw std::invalid_argument("build_qam: unsupported order " + std::to_string(order));
    const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    const int bits_dim = int_log2(k);

    Constellation c;
    c.order = order;
    c.scale = 1.0;
    c.points.reserve(order);
    c.labels.reserve(order);
    for (int i = 0; i < k; ++i) {
        const double li = 2 * i - k + 1; // -(k-1), ..., k-1 odd
        for (int q = 0; q < k; ++q) {
            const double lq = 2 * q - k + 1;
            c.points.emplace_back(li, lq);
            c.labels.push_back((gray(static_cast<std::uint32_t>(i)) << bits_dim) |
                               gray(static_cast<std::uint32_t>(q)));
        }
    }
    return c;
}

ShapedPrior mb_prior(const Constellation& c, double lambda) {
    if (lambda < 0.0)
        throw std::invalid_argument("mb_prior: lambda must be nonnegative");
    ShapedPrior p;
    p.lambda = lambda;
    p.probabilities.resize(c.points.size());
    double z = 0.0;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        const cplx g = c.grid_point(i);
        p.probabilities[i] = std::exp(-lambda * std::norm(g));
        z += p.probabilities[i];
    }
    for (double& v : p.probabilities) v /= z;
    return p;
}

ShapedPrior uniform_prior(const Constellation& c) { return mb_prior(c, 0.0); }

double amplitude_entropy_bits(const Constellation& c, double lambda) {
    const int k = c.levels_per_dim();
    double z = 0.0;
    std::vector<double> w(static_cast<std::size_t>(k / 2));
    for (int a = 1, i = 0; a < k; a += 2, ++i) {
        w[static_cast<std::size_t>(i)] = std::exp(-lambda * a * a);
        z += w[static_cast<std::size_t>(i)];
    }
    double h = 0.0;
    for (double v : w) {
        const double pr = v / z;
        if (pr > 0.0) h -= pr * std::log2(pr);
    }
    return h;
}

double lambda_for_rate(const Constellation& c, double target_bits_per_amplitude) {
    const double hmax = std::log2(c.levels_per_dim() / 2.0); // uniform amplitudes
    if (target_bits_per_amplitude <= 0.0 || target_bits_per_amplitude > hmax)
        throw std::domain_error("lambda_for_rate: target outside (0, log2(#amplitudes)]");
    double lo = 0.0;
    double hi = 1.0;
    while (amplitude_entropy_bits(c, hi) > target_bits_per_amplitude) hi *= 2.0;
    // H is strictly decreasing in lambda.
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (amplitude_entropy_bits(c, mid) > target_bits_per_amplitude)
            lo = mid;
        else
            hi = mid;
        if (std::abs(amplitude_entropy_bits(c, mid) - target_bits_per_amplitude) < 1e-9 &&
            hi - lo < 1e-12)
            break;
    }
    return 0.5 * (lo + hi);
}

double mean_energy(const Constellation& c, const ShapedPrior& prior) {
    double e = 0.0;
    for (std::size_t i = 0; i < c.points.size(); ++i)
        e += prior.probabilities[i] * std::norm(c.points[i]);
    return e;
}

Constellation normalize(const Constellation& c, const ShapedPrior& prior) {
    if (prior.probabilities.size() != c.points.size())
        throw std::invalid_argument("normalize: prior does not match constellation");
    double grid_energy = 0.0;
    for (std::size_t i = 0; i < c.points.size(); ++i)
        grid_energy += prior.probabilities[i] * std::norm(c.grid_point(i));
    Constellation out = c;
    out.scale = 1.0 / std::sqrt(grid_energy);
    for (std::size_t i = 0; i < out.points.size(); ++i)
        out.points[i] = c.grid_point(i) * out.scale;
    return out;
}

double symbol_entropy_bits(const ShapedPrior& prior) {
    double h = 0.0;
    for (double p : prior.probabilities)
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

DimensionPrior dimension_prior(const Constellation& c, const ShapedPrior& prior) {
    const int k = c.levels_per_dim();
    DimensionPrior d;
    d.levels.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
        d.levels[static_cast<std::size_t>(i)] = (2 * i - k + 1) * c.scale;
    std::vector<double> marg(static_cast<std::size_t>(k), 0.0);
    // Row-major points: index = i*k + q; real part is level i.
    for (int i = 0; i < k; ++i)
        for (int q = 0; q < k; ++q)
            marg[static_cast<std::size_t>(i)] +=
                prior.probabilities[static_cast<std::size_t>(i * k + q)];
    d.log_prob.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
        d.log_prob[static_cast<std::size_t>(i)] =
            marg[static_cast<std::size_t>(i)] > 0.0
                ? std::log(marg[static_cast<std::size_t>(i)])
                : -std::numeric_limits<double>::infinity();
    return d;
}

std::vector<std::size_t> corner_indices(const Constellation& c) {
    const int k = c.levels_per_dim();
    const std::size_t n = static_cast<std::size_t>(k);
    // Row-major: index = i*k + q.
    const std::size_t pp = (n - 1) * n + (n - 1); // (+,+)
    const std::size_t mp = 0 * n + (n - 1);       // (-,+)
    const std::size_t mm = 0;                     // (-,-)
    const std::size_t pm = (n - 1) * n + 0;       // (+,-)
    return {pp, mp, mm, pm};
}

} // namespace baps
