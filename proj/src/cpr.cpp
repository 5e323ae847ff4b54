// SPDX-License-Identifier: Apache-2.0
#include "baps/cpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace baps {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_round(double x, double modulus) { return std::round(x / modulus) * modulus; }

struct PhaseGrid {
    std::vector<double> phases;
    std::vector<double> cos_b;
    std::vector<double> sin_b;
    double span = 0.0;
};

PhaseGrid make_grid(const CprConfig& cfg) {
    const int b_count = cfg.resolved_test_phases();
    if (b_count < 1) throw std::invalid_argument("cpr: need at least one test phase");
    PhaseGrid g;
    g.span = cfg.resolved_span();
    const double offset = cfg.resolved_offset();
    g.phases.resize(static_cast<std::size_t>(b_count));
    g.cos_b.resize(g.phases.size());
    g.sin_b.resize(g.phases.size());
    for (int b = 0; b < b_count; ++b) {
        const double phi = offset + g.span * b / b_count;
        g.phases[static_cast<std::size_t>(b)] = phi;
        g.cos_b[static_cast<std::size_t>(b)] = std::cos(phi);
        g.sin_b[static_cast<std::size_t>(b)] = std::sin(phi);
    }
    return g;
}

// Per-dimension decision machinery. MAP metric separates per quadrature:
// log p(x) = log q(l_I) + log q(l_Q) for ring-symmetric priors.
struct DimDecider {
    const double* levels = nullptr;
    const double* log_q = nullptr; // null => plain Euclidean
    int count = 0;
    double inv_sigma2 = 0.0;

    int decide(double u) const {
        if (log_q == nullptr) {
            int best = 0;
            double best_d = (u - levels[0]) * (u - levels[0]);
            for (int i = 1; i < count; ++i) {
                const double d = (u - levels[i]) * (u - levels[i]);
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            return best;
        }
        int best = -1;
        double best_m = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < count; ++i) {
            if (std::isinf(log_q[i])) continue;
            const double e = u - levels[i];
            const double m = -(e * e) * inv_sigma2 + log_q[i];
            if (m > best_m) {
                best_m = m;
                best = i;
            }
        }
        return best;
    }

    /// Posterior-mean level under the per-dimension metric (soft decision).
    double posterior_mean(double u) const {
        double m_max = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < count; ++i) {
            const double lq = log_q ? log_q[i] : 0.0;
            if (std::isinf(lq)) continue;
            const double e = u - levels[i];
            m_max = std::max(m_max, -(e * e) * inv_sigma2 + lq);
        }
        double num = 0.0;
        double den = 0.0;
        for (int i = 0; i < count; ++i) {
            const double lq = log_q ? log_q[i] : 0.0;
            if (std::isinf(lq)) continue;
            const double e = u - levels[i];
            const double w = std::exp(-(e * e) * inv_sigma2 + lq - m_max);
            num += w * levels[i];
            den += w;
        }
        return num / den;
    }
};

struct KernelSetup {
    CprAlgorithm algo;
    double sigma2 = 0.0; // decision metric + objective scale
    double delta2 = 0.0; // BaPS only
    cplx z0{0.0, 0.0};   // BaPS only
    PriorUpdate update = PriorUpdate::kAnchor;
};

// One payload block. Distances/decisions at each (n, b) are computed once
// and reused across overlapping windows; window sums are evaluated term by
// term in ascending n so they match a naive per-window recomputation
// bitwise.
void run_block(const std::vector<cplx>& y, std::size_t begin, std::size_t len,
               const Constellation& c, const DimensionPrior& dp, const PhaseGrid& grid,
               const KernelSetup& ks, int half_window, bool& have_ref, double& unwrap_ref,
               CprResult& out) {
    if (len == 0) throw std::invalid_argument("cpr: empty block");
    const int b_count = static_cast<int>(grid.phases.size());
    const int k_levels = static_cast<int>(dp.levels.size());
    const bool use_prior_metric = ks.algo != CprAlgorithm::kBps && ks.sigma2 > 0.0;

    DimDecider dec;
    dec.levels = dp.levels.data();
    dec.log_q = use_prior_metric ? dp.log_prob.data() : nullptr;
    dec.count = k_levels;
    dec.inv_sigma2 = use_prior_metric ? 1.0 / ks.sigma2 : 0.0;

    // Distance table d[b][n]: squared distance from the rotated sample to
    // the decided constellation point at test phase b.
    std::vector<double> dist(static_cast<std::size_t>(b_count) * len);
    for (int b = 0; b < b_count; ++b) {
        const double cb = grid.cos_b[static_cast<std::size_t>(b)];
        const double sb = grid.sin_b[static_cast<std::size_t>(b)];
        double* row = dist.data() + static_cast<std::size_t>(b) * len;
        for (std::size_t n = 0; n < len; ++n) {
            const cplx yn = y[begin + n];
            // y * e^{-j phi_b}
            const double ur = yn.real() * cb + yn.imag() * sb;
            const double ui = yn.imag() * cb - yn.real() * sb;
            const int ir = dec.decide(ur);
            const int ii = dec.decide(ui);
            const double er = ur - dp.levels[static_cast<std::size_t>(ir)];
            const double ei = ui - dp.levels[static_cast<std::size_t>(ii)];
            row[n] = er * er + ei * ei;
        }
    }

    // Window sums S[b][k] over n in [k-N, k+N] clipped to the block.
    const std::size_t bsz = static_cast<std::size_t>(b_count);
    std::vector<double> wsum(bsz * len);
    for (int b = 0; b < b_count; ++b) {
        const double* row = dist.data() + static_cast<std::size_t>(b) * len;
        double* srow = wsum.data() + static_cast<std::size_t>(b) * len;
        for (std::size_t k = 0; k < len; ++k) {
            const std::size_t lo = k >= static_cast<std::size_t>(half_window)
                                       ? k - static_cast<std::size_t>(half_window)
                                       : 0;
            const std::size_t hi = std::min(len - 1, k + static_cast<std::size_t>(half_window));
            double s = 0.0;
            for (std::size_t n = lo; n <= hi; ++n) s += row[n];
            srow[k] = s;
        }
    }

    // Estimation pass.
    const std::size_t out_base = out.theta_est.size();
    out.theta_est.resize(out_base + len);
    out.decisions.resize(out_base + len);
    const bool is_baps = ks.algo == CprAlgorithm::kBaps;
    if (is_baps) out.prior_magnitudes.resize(out_base + len);

    cplx z = ks.z0;          // measurement mode state
    double zmag = std::abs(ks.z0); // anchor / reanchor magnitude state
    double anchor_cos = 0.0;
    double anchor_sin = 0.0;
    if (is_baps && zmag > 0.0) {
        anchor_cos = ks.z0.real() / zmag;
        anchor_sin = ks.z0.imag() / zmag;
    }

    for (std::size_t k = 0; k < len; ++k) {
        int best_b = 0;
        if (!is_baps) {
            const double* srow = wsum.data();
            double best = srow[k];
            for (int b = 1; b < b_count; ++b) {
                const double v = wsum[static_cast<std::size_t>(b) * len + k];
                if (v < best) {
                    best = v;
                    best_b = b;
                }
            }
        } else {
            // Objective scaled by sigma2 (positive within a block, so the
            // argmax matches Re[z e^{-j phi}] - S/sigma2):
            //   J(phi_b) = sigma2 * Re[z e^{-j phi_b}] - S_b.
            double cr;
            double ci;
            if (ks.update == PriorUpdate::kMeasurement) {
                cr = z.real();
                ci = z.imag();
            } else {
                cr = zmag * anchor_cos;
                ci = zmag * anchor_sin;
            }
            out.prior_magnitudes[out_base + k] = std::hypot(cr, ci);
            double best = -std::numeric_limits<double>::infinity();
            for (int b = 0; b < b_count; ++b) {
                const std::size_t bi = static_cast<std::size_t>(b);
                const double prior = ks.sigma2 * (cr * grid.cos_b[bi] + ci * grid.sin_b[bi]);
                const double v = prior - wsum[bi * len + k];
                if (v > best) {
                    best = v;
                    best_b = b;
                }
            }
        }

        const double raw = grid.phases[static_cast<std::size_t>(best_b)];
        double est = raw;
        if (have_ref) est = raw + wrap_round(unwrap_ref - raw, grid.span);
        unwrap_ref = est;
        have_ref = true;
        out.theta_est[out_base + k] = est;

        // Final symbol decision at the chosen phase.
        const cplx yk = y[begin + k];
        const std::size_t bb = static_cast<std::size_t>(best_b);
        const double ur = yk.real() * grid.cos_b[bb] + yk.imag() * grid.sin_b[bb];
        const double ui = yk.imag() * grid.cos_b[bb] - yk.real() * grid.sin_b[bb];
        const int ir = dec.decide(ur);
        const int ii = dec.decide(ui);
        out.decisions[out_base + k] =
            static_cast<std::size_t>(ir) * static_cast<std::size_t>(k_levels) +
            static_cast<std::size_t>(ii);

        if (is_baps) {
            if (ks.update == PriorUpdate::kMeasurement) {
                if (ks.sigma2 > 0.0) {
                    const cplx xbar(dec.posterior_mean(ur), dec.posterior_mean(ui));
                    z += (2.0 / ks.sigma2) * yk * std::conj(xbar);
                }
                const double m = std::abs(z);
                z /= 1.0 + ks.delta2 * m;
            } else {
                zmag = zmag / (1.0 + ks.delta2 * zmag);
                if (ks.update == PriorUpdate::kReanchor) {
                    anchor_cos = grid.cos_b[bb];
                    anchor_sin = grid.sin_b[bb];
                }
            }
        }
    }
}

CprResult finish_result(const std::vector<cplx>& y, std::size_t begin, CprResult r) {
    r.derotated.resize(r.theta_est.size());
    for (std::size_t k = 0; k < r.theta_est.size(); ++k)
        r.derotated[k] = y[begin + k] * std::polar(1.0, -r.theta_est[k]);
    return r;
}

} // namespace

int CprConfig::resolved_test_phases() const {
    if (n_test_phases > 0) return n_test_phases;
    return algorithm == CprAlgorithm::kBaps ? 240 : 60;
}

double CprConfig::resolved_offset() const {
    if (!std::isnan(phase_offset)) return phase_offset;
    return algorithm == CprAlgorithm::kBaps ? -kPi : 0.0;
}

double CprConfig::resolved_span() const {
    if (!std::isnan(phase_span)) return phase_span;
    return algorithm == CprAlgorithm::kBaps ? 2.0 * kPi : kPi / 2.0;
}

VonMisesPrior von_mises_predict(const VonMisesPrior& prior, double delta2) {
    if (delta2 < 0.0) throw std::invalid_argument("von_mises_predict: delta2 must be >= 0");
    const double m = std::abs(prior.z);
    return VonMisesPrior{prior.z / (1.0 + delta2 * m)};
}

std::size_t map_decision(cplx y_rot, const ShapedPrior& prior, const Constellation& c,
                         double sigma2) {
    if (sigma2 <= 0.0) throw std::invalid_argument("map_decision: sigma2 must be > 0");
    std::size_t best = 0;
    double best_m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        const double p = prior.probabilities[i];
        if (p <= 0.0) continue;
        const double m = -std::norm(y_rot - c.points[i]) / sigma2 + std::log(p);
        if (m > best_m) {
            best_m = m;
            best = i;
        }
    }
    return best;
}

std::vector<double> pilot_ml_phase(const std::vector<cplx>& pilot_rx,
                                   const std::vector<cplx>& pilot_tx, int window) {
    if (pilot_rx.size() != pilot_tx.size())
        throw std::invalid_argument("pilot_ml_phase: length mismatch");
    if (pilot_rx.empty()) throw std::invalid_argument("pilot_ml_phase: no pilots");
    if (window < 1) throw std::invalid_argument("pilot_ml_phase: window must be >= 1");

    const int np = static_cast<int>(pilot_rx.size());
    const int half = window / 2;
    std::vector<double> theta(static_cast<std::size_t>(np));
    for (int p = 1; p <= np; ++p) {
        const int lo = std::max(1, p - half);
        const int hi = std::min(np, p + half);
        cplx acc{0.0, 0.0};
        for (int n = lo; n <= hi; ++n)
            acc += pilot_rx[static_cast<std::size_t>(n - 1)] *
                   std::conj(pilot_tx[static_cast<std::size_t>(n - 1)]);
        theta[static_cast<std::size_t>(p - 1)] = std::arg(acc);
    }
    for (std::size_t p = 1; p < theta.size(); ++p)
        theta[p] += wrap_round(theta[p - 1] - theta[p], 2.0 * kPi);
    return theta;
}

PilotEstimates estimate_params(const std::vector<cplx>& pilot_rx,
                               const std::vector<cplx>& pilot_tx,
                               const std::vector<double>& theta_hat_pilots) {
    const std::size_t np = pilot_rx.size();
    if (np < 2) throw std::invalid_argument("estimate_params: need at least 2 pilots");
    if (pilot_tx.size() != np || theta_hat_pilots.size() != np)
        throw std::invalid_argument("estimate_params: length mismatch");

    PilotEstimates est;
    est.theta_hat = theta_hat_pilots;
    double s2 = 0.0;
    for (std::size_t p = 0; p < np; ++p)
        s2 += std::norm(pilot_rx[p] - pilot_tx[p] * std::polar(1.0, theta_hat_pilots[p]));
    est.sigma2_hat = s2 / static_cast<double>(np);

    double d2 = 0.0;
    for (std::size_t p = 1; p < np; ++p) {
        const double d = theta_hat_pilots[p] - theta_hat_pilots[p - 1];
        d2 += d * d;
    }
    est.delta2_hat = std::max(d2 / static_cast<double>(np - 1), kDelta2Floor);
    est.z_init = std::polar(1.0 / est.delta2_hat, theta_hat_pilots[np - 1]);
    return est;
}

CprResult bps(const std::vector<cplx>& received_block, const Constellation& c,
              const CprConfig& config) {
    CprConfig cfg = config;
    cfg.algorithm = CprAlgorithm::kBps;
    const PhaseGrid grid = make_grid(cfg);
    const DimensionPrior dp = dimension_prior(c, uniform_prior(c));
    KernelSetup ks;
    ks.algo = CprAlgorithm::kBps;
    CprResult r;
    bool have_ref = false;
    double ref = 0.0;
    run_block(received_block, 0, received_block.size(), c, dp, grid, ks, cfg.half_window,
              have_ref, ref, r);
    return finish_result(received_block, 0, std::move(r));
}

CprResult ps_bps(const std::vector<cplx>& received_block, const Constellation& c,
                 const ShapedPrior& prior, double sigma2, const CprConfig& config) {
    CprConfig cfg = config;
    cfg.algorithm = CprAlgorithm::kPsBps;
    const PhaseGrid grid = make_grid(cfg);
    const DimensionPrior dp = dimension_prior(c, prior);
    KernelSetup ks;
    ks.algo = CprAlgorithm::kPsBps;
    ks.sigma2 = sigma2;
    CprResult r;
    bool have_ref = false;
    double ref = 0.0;
    run_block(received_block, 0, received_block.size(), c, dp, grid, ks, cfg.half_window,
              have_ref, ref, r);
    return finish_result(received_block, 0, std::move(r));
}

CprResult baps_block(const std::vector<cplx>& received_block, const Constellation& c,
                     const ShapedPrior& prior, const CprConfig& config,
                     const BapsBlockParams& params) {
    CprConfig cfg = config;
    cfg.algorithm = CprAlgorithm::kBaps;
    const PhaseGrid grid = make_grid(cfg);
    const DimensionPrior dp = dimension_prior(c, prior);
    KernelSetup ks;
    ks.algo = CprAlgorithm::kBaps;
    ks.sigma2 = params.sigma2;
    ks.delta2 = params.delta2;
    ks.z0 = params.z0;
    ks.update = cfg.prior_update;
    CprResult r;
    bool have_ref = false;
    double ref = 0.0;
    run_block(received_block, 0, received_block.size(), c, dp, grid, ks, cfg.half_window,
              have_ref, ref, r);
    return finish_result(received_block, 0, std::move(r));
}

CprResult run_cpr(const std::vector<cplx>& received, const Frame& frame, const Constellation& c,
                  const ShapedPrior& prior, const CprConfig& config, double sigma2_true) {
    if (received.size() != frame.symbols.size())
        throw std::invalid_argument("run_cpr: received length does not match frame");
    if (frame.symbols.empty() || !frame.pilot_mask[0])
        throw std::invalid_argument("run_cpr: frame must start with a pilot block");

    const PhaseGrid grid = make_grid(config);
    const DimensionPrior dp =
        dimension_prior(c, config.algorithm == CprAlgorithm::kBps ? uniform_prior(c) : prior);

    CprResult result;
    result.theta_est.reserve(frame.payload_size());

    const std::size_t np = static_cast<std::size_t>(frame.pilot_block_len);
    const std::size_t period = static_cast<std::size_t>(frame.payload_block_len);
    const std::size_t total = frame.symbols.size();

    bool have_ref = false;
    double unwrap_ref = 0.0;
    std::size_t pos = 0;
    std::vector<cplx> pilot_rx(np);
    std::vector<cplx> pilot_tx(np);
    std::vector<cplx> payload;
    payload.reserve(period);

    while (pos < total) {
        for (std::size_t i = 0; i < np; ++i) {
            pilot_rx[i] = received[pos + i];
            pilot_tx[i] = frame.symbols[pos + i];
        }
        pos += np;
        const std::size_t blen = std::min(period, total - pos);

        const auto theta_p = pilot_ml_phase(pilot_rx, pilot_tx, config.pilot_window);
        const PilotEstimates est = estimate_params(pilot_rx, pilot_tx, theta_p);

        KernelSetup ks;
        ks.algo = config.algorithm;
        ks.sigma2 = config.sigma2_source == Sigma2Source::kTrueValue ? sigma2_true
                                                                     : est.sigma2_hat;
        ks.delta2 = est.delta2_hat;
        ks.z0 = est.z_init;
        ks.update = config.prior_update;

        run_block(received, pos, blen, c, dp, grid, ks, config.half_window, have_ref,
                  unwrap_ref, result);
        pos += blen;
    }

    // Derotate payload samples.
    result.derotated.resize(result.theta_est.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < total; ++i) {
        if (frame.pilot_mask[i]) continue;
        result.derotated[k] = received[i] * std::polar(1.0, -result.theta_est[k]);
        ++k;
    }
    return result;
}

std::vector<double> supervised_cycle_slip_correct(const std::vector<double>& theta_est,
                                                  const std::vector<double>& theta_true) {
    if (theta_est.size() != theta_true.size())
        throw std::invalid_argument("supervised_cycle_slip_correct: length mismatch");
    std::vector<double> out(theta_est.size());
    for (std::size_t k = 0; k < theta_est.size(); ++k)
        out[k] = theta_est[k] - wrap_round(theta_est[k] - theta_true[k], kPi / 2.0);
    return out;
}

std::vector<cplx> derotate(const std::vector<cplx>& received,
                           const std::vector<double>& theta_est) {
    if (received.size() != theta_est.size())
        throw std::invalid_argument("derotate: length mismatch");
    std::vector<cplx> out(received.size());
    for (std::size_t k = 0; k < received.size(); ++k)
        out[k] = received[k] * std::polar(1.0, -theta_est[k]);
    return out;
}

} // namespace baps
