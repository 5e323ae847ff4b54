// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "baps/channel.hpp"
#include "baps/cpr.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace baps;

namespace {

constexpr double kPi = 3.14159265358979323846;

Constellation unit_qam64() {
    Constellation c = build_qam(64);
    return normalize(c, uniform_prior(c));
}

std::vector<cplx> rotate_all(const std::vector<cplx>& v, double phi) {
    std::vector<cplx> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * std::polar(1.0, phi);
    return out;
}

std::vector<cplx> awgn(const std::vector<cplx>& v, double sigma2, Rng& rng) {
    std::vector<cplx> out(v.size());
    const double s = std::sqrt(sigma2 / 2.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto [nr, ni] = rng.normal_pair();
        out[i] = v[i] + cplx(s * nr, s * ni);
    }
    return out;
}

} // namespace

TEST_CASE("map_decision: uniform prior reduces to nearest neighbor") {
    const Constellation c = unit_qam64();
    const ShapedPrior u = uniform_prior(c);
    Rng rng(21, "map", 0);
    for (int t = 0; t < 100000; ++t) {
        const cplx y(3.0 * (rng.uniform() - 0.5), 3.0 * (rng.uniform() - 0.5));
        const std::size_t got = map_decision(y, u, c, 0.1);
        std::size_t nn = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            const double d = std::norm(y - c.points[i]);
            if (d < best) {
                best = d;
                nn = i;
            }
        }
        CHECK(got == nn);
    }
}

TEST_CASE("map_decision: prior breaks exact-midpoint ties") {
    Constellation c = build_qam(64); // unnormalized grid
    ShapedPrior p = uniform_prior(c);
    // Inflate the inner point (1+1j), deflate (3+1j); renormalize.
    std::size_t inner = 0;
    std::size_t outer = 0;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        if (c.points[i] == cplx(1, 1)) inner = i;
        if (c.points[i] == cplx(3, 1)) outer = i;
    }
    p.probabilities[inner] *= 4.0;
    p.probabilities[outer] *= 0.25;
    double z = 0.0;
    for (double v : p.probabilities) z += v;
    for (double& v : p.probabilities) v /= z;

    const cplx midway(2.0, 1.0);
    CHECK(map_decision(midway, p, c, 0.5) == inner);
}

TEST_CASE("map_decision: agrees with the exhaustive metric oracle") {
    Constellation c = build_qam(64);
    const ShapedPrior p = mb_prior(c, 0.05);
    c = normalize(c, p);
    const double sigma2 = 0.1;
    Rng rng(22, "map2", 0);
    for (int t = 0; t < 20000; ++t) {
        const cplx y(2.5 * (rng.uniform() - 0.5), 2.5 * (rng.uniform() - 0.5));
        const std::size_t got = map_decision(y, p, c, sigma2);
        std::size_t best = 0;
        double best_m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            const double m = -std::norm(y - c.points[i]) / sigma2 + std::log(p.probabilities[i]);
            if (m > best_m) {
                best_m = m;
                best = i;
            }
        }
        CHECK(got == best);
    }
}

TEST_CASE("map_decision: objective invariant to constant log-prior shifts") {
    Constellation c = build_qam(64);
    const ShapedPrior p = mb_prior(c, 0.08);
    c = normalize(c, p);
    ShapedPrior scaled = p;
    for (double& v : scaled.probabilities) v *= 7.0; // constant shift of log p
    Rng rng(23, "map3", 0);
    for (int t = 0; t < 20000; ++t) {
        const cplx y(2.0 * (rng.uniform() - 0.5), 2.0 * (rng.uniform() - 0.5));
        CHECK(map_decision(y, p, c, 0.07) == map_decision(y, scaled, c, 0.07));
    }
}

TEST_CASE("map_decision: zero-probability points are never chosen") {
    Constellation c = build_qam(64);
    ShapedPrior p = uniform_prior(c);
    // Kill everything except the inner ring.
    for (std::size_t i = 0; i < c.points.size(); ++i)
        if (std::norm(c.points[i]) > 2.0 + 1e-9) p.probabilities[i] = 0.0;
    double z = 0.0;
    for (double v : p.probabilities) z += v;
    for (double& v : p.probabilities) v /= z;
    const std::size_t got = map_decision(cplx(7.0, 7.0), p, c, 0.1);
    CHECK(std::norm(c.points[got]) <= 2.0 + 1e-9);
}

TEST_CASE("bps: noiseless constant phase is recovered to grid resolution") {
    const Constellation c = unit_qam64();
    const ShapedPrior u = uniform_prior(c);
    Rng rng(31, "src", 0);
    const auto idx = sample_source(u, 400, rng);
    std::vector<cplx> tx(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) tx[i] = c.points[idx[i]];

    CprConfig cfg;
    cfg.algorithm = CprAlgorithm::kBps;
    cfg.half_window = 8;
    const CprResult r = bps(rotate_all(tx, kPi / 8), c, cfg);
    const double resolution = (kPi / 2) / cfg.resolved_test_phases();
    for (double t : r.theta_est) CHECK(std::abs(t - kPi / 8) <= resolution);
}

TEST_CASE("bps: B=60 grid spacing is pi/120") {
    CprConfig cfg;
    cfg.algorithm = CprAlgorithm::kBps;
    CHECK(cfg.resolved_test_phases() == 60);
    CHECK(cfg.resolved_span() / cfg.resolved_test_phases() == doctest::Approx(kPi / 120));
}

TEST_CASE("bps: pi/2 ambiguity folds into the same raw estimate") {
    const Constellation c = unit_qam64();
    const ShapedPrior u = uniform_prior(c);
    Rng rng(32, "src", 0);
    const auto idx = sample_source(u, 300, rng);
    std::vector<cplx> tx(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) tx[i] = c.points[idx[i]];

    CprConfig cfg;
    cfg.algorithm = CprAlgorithm::kBps;
    cfg.half_window = 8;
    const CprResult a = bps(rotate_all(tx, kPi / 8), c, cfg);
    const CprResult b = bps(rotate_all(tx, kPi / 8 + kPi / 2), c, cfg);
    for (std::size_t k = 0; k < a.theta_est.size(); ++k)
        CHECK(a.theta_est[k] == doctest::Approx(b.theta_est[k]).epsilon(1e-12));
    CHECK_THROWS_AS(bps({}, c, cfg), std::invalid_argument);
}

TEST_CASE("ps_bps: uniform prior reproduces bps output exactly") {
    const Constellation c = unit_qam64();
    const ShapedPrior u = uniform_prior(c);
    Rng rng(33, "src", 0);
    const auto idx = sample_source(u, 600, rng);
    std::vector<cplx> tx(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) tx[i] = c.points[idx[i]];
    Rng nrng(33, "noise", 0);
    const auto rx = awgn(rotate_all(tx, 0.2), 0.05, nrng);

    CprConfig cfg;
    cfg.algorithm = CprAlgorithm::kBps;
    cfg.half_window = 10;
    const CprResult a = bps(rx, c, cfg);
    // Uniform prior: Eq-style MAP decisions reduce to nearest neighbor.
    const CprResult b = ps_bps(rx, c, u, 0.05, cfg);
    CHECK(a.theta_est == b.theta_est);
    CHECK(a.decisions == b.decisions);
}

TEST_CASE("ps_bps: shaped prior, noiseless phase still wins") {
    Constellation c = build_qam(64);
    const ShapedPrior p = mb_prior(c, 0.05);
    c = normalize(c, p);
    Rng rng(34, "src", 0);
    const auto idx = sample_source(p, 300, rng);
    std::vector<cplx> tx(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) tx[i] = c.points[idx[i]];

    CprConfig cfg;
    cfg.algorithm = CprAlgorithm::kPsBps;
    cfg.half_window = 6;
    const CprResult a = bps(rotate_all(tx, 0.3), c, cfg);
    const CprResult b = ps_bps(rotate_all(tx, 0.3), c, p, 0.05, cfg);
    for (std::size_t k = 0; k < a.theta_est.size(); ++k)
        CHECK(a.theta_est[k] == doctest::Approx(b.theta_est[k]).epsilon(1e-12));
}

TEST_CASE("pilot_ml_phase: single pilot, noiseless") {
    const std::vector<cplx> tx{cplx(1.0, 1.0)};
    const std::vector<cplx> rx{tx[0] * std::polar(1.0, 0.3)};
    const auto t = pilot_ml_phase(rx, tx, 4);
    REQUIRE(t.size() == 1);
    CHECK(t[0] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("pilot_ml_phase: common phase across two pilots") {
    const std::vector<cplx> tx{cplx(1.0, 1.0), cplx(-1.0, 1.0)};
    std::vector<cplx> rx = rotate_all(tx, -0.7);
    const auto t = pilot_ml_phase(rx, tx, 2);
    CHECK(t[0] == doctest::Approx(-0.7).epsilon(1e-12));
    CHECK(t[1] == doctest::Approx(-0.7).epsilon(1e-12));
}

TEST_CASE("pilot_ml_phase: linear ramp matches the direct-summation oracle") {
    const int np = 50;
    const int window = 10;
    std::vector<cplx> tx(np);
    std::vector<cplx> rx(np);
    for (int n = 0; n < np; ++n) {
        tx[static_cast<std::size_t>(n)] = std::polar(1.3, 0.13 * n); // arbitrary known pilots
        rx[static_cast<std::size_t>(n)] =
            tx[static_cast<std::size_t>(n)] * std::polar(1.0, 0.001 * (n + 1));
    }
    const auto got = pilot_ml_phase(rx, tx, window);
    // Oracle: direct evaluation of the clipped windowed sum.
    for (int p = 1; p <= np; ++p) {
        cplx acc{0.0, 0.0};
        for (int n = std::max(1, p - window / 2); n <= std::min(np, p + window / 2); ++n)
            acc += rx[static_cast<std::size_t>(n - 1)] *
                   std::conj(tx[static_cast<std::size_t>(n - 1)]);
        CHECK(got[static_cast<std::size_t>(p - 1)] ==
              doctest::Approx(std::arg(acc)).epsilon(1e-12));
    }
}

TEST_CASE("estimate_params: noiseless constant phase hits the delta2 floor") {
    const int np = 10;
    std::vector<cplx> tx(np, cplx(1.0, 1.0));
    const std::vector<cplx> rx = rotate_all(tx, 0.4);
    const auto theta = pilot_ml_phase(rx, tx, 4);
    const PilotEstimates est = estimate_params(rx, tx, theta);
    CHECK(est.sigma2_hat == doctest::Approx(0.0).epsilon(1e-20));
    CHECK(est.delta2_hat == kDelta2Floor);
    CHECK(std::abs(est.z_init) == doctest::Approx(1.0 / kDelta2Floor));
    CHECK(std::arg(est.z_init) == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("estimate_params: delta2 arithmetic") {
    const std::vector<cplx> tx{cplx(1, 0), cplx(1, 0), cplx(1, 0)};
    std::vector<cplx> rx(3);
    const std::vector<double> theta{0.1, 0.2, 0.4};
    for (int i = 0; i < 3; ++i)
        rx[static_cast<std::size_t>(i)] = tx[static_cast<std::size_t>(i)] *
                                          std::polar(1.0, theta[static_cast<std::size_t>(i)]);
    const PilotEstimates est = estimate_params(rx, tx, theta);
    CHECK(est.delta2_hat == doctest::Approx(0.025).epsilon(1e-12));
    CHECK_THROWS_AS(estimate_params({rx[0]}, {tx[0]}, {0.1}), std::invalid_argument);
}

TEST_CASE("von_mises_predict: examples and closed form") {
    const VonMisesPrior z{cplx(4e4, 0.0)};
    const VonMisesPrior z1 = von_mises_predict(z, 2.5e-5);
    CHECK(std::abs(z1.z) == doctest::Approx(2e4).epsilon(1e-12));
    CHECK(std::arg(z1.z) == 0.0);

    const VonMisesPrior zero{cplx(0.0, 0.0)};
    CHECK(von_mises_predict(zero, 1e-4).z == cplx(0.0, 0.0));

    VonMisesPrior cur{std::polar(3e3, 1.1)};
    const double d2 = 7e-6;
    const double inv0 = 1.0 / std::abs(cur.z);
    for (int k = 1; k <= 1000; ++k) {
        cur = von_mises_predict(cur, d2);
        const double expect_inv = inv0 + k * d2;
        CHECK(std::abs(1.0 / std::abs(cur.z) - expect_inv) < 1e-9 * expect_inv);
        CHECK(std::arg(cur.z) == doctest::Approx(1.1));
    }
}

TEST_CASE("von mises prior: unimodal at angle(z), log-concave on the half width") {
    const VonMisesPrior prior{std::polar(2.7, 0.9)};
    const double mu = prior.mean_phase();
    double prev = prior.log_density_unnormalized(mu);
    for (int i = 1; i <= 100; ++i) {
        const double d = kPi * i / 101.0;
        const double v = prior.log_density_unnormalized(mu + d);
        CHECK(v < prev);
        prev = v;
    }
    // Second differences negative within |theta - mu| < pi/2.
    const double h = 1e-3;
    for (int i = -40; i <= 40; ++i) {
        const double t = mu + i * (kPi / 2) / 45.0;
        const double dd = prior.log_density_unnormalized(t + h) -
                          2 * prior.log_density_unnormalized(t) +
                          prior.log_density_unnormalized(t - h);
        CHECK(dd < 0.0);
    }
}

TEST_CASE("von mises prior: density integrates to one") {
    // Trapezoid integration of the scaled density against the scaled Bessel
    // normalizer, for a range of concentrations.
    for (double kappa : {0.0, 0.5, 3.0, 40.0, 400.0}) {
        const VonMisesPrior prior{std::polar(kappa, -0.4)};
        const int n = 200000;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double t = -kPi + 2 * kPi * (i + 0.5) / n;
            acc += std::exp(prior.log_density_unnormalized(t) - kappa);
        }
        acc *= 2 * kPi / n;
        const double norm = 2 * kPi * oracles::i0_scaled(kappa);
        CHECK(acc / norm == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("baps: strong anchored prior plus noiseless symbols lock to the true phase") {
    const Constellation c = unit_qam64();
    const ShapedPrior u = uniform_prior(c);
    Rng rng(41, "src", 0);
    const auto idx = sample_source(u, 200, rng);
    std::vector<cplx> tx(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) tx[i] = c.points[idx[i]];

    CprConfig cfg;
    cfg.algorithm = CprAlgorithm::kBaps;
    cfg.half_window = 4;
    cfg.prior_update = PriorUpdate::kAnchor;
    BapsBlockParams par;
    par.sigma2 = 1e-6;
    par.delta2 = 0.0;
    par.z0 = std::polar(1e9, 0.3);
    const CprResult r = baps_block(rotate_all(tx, 0.3), c, u, cfg, par);
    const double resolution = 2 * kPi / cfg.resolved_test_phases();
    for (double t : r.theta_est) CHECK(std::abs(t - 0.3) <= resolution);
}

TEST_CASE("baps: flat likelihood leaves the prior mean (N=0, y=0)") {
    const Constellation c = unit_qam64();
    const ShapedPrior u = uniform_prior(c);
    CprConfig cfg;
    cfg.algorithm = CprAlgorithm::kBaps;
    cfg.half_window = 0;
    cfg.prior_update = PriorUpdate::kAnchor;
    BapsBlockParams par;
    par.sigma2 = 0.1;
    par.delta2 = 0.0;
    par.z0 = std::polar(50.0, 1.234);
    const CprResult r = baps_block({cplx(0.0, 0.0)}, c, u, cfg, par);
    REQUIRE(r.theta_est.size() == 1);
    const double resolution = 2 * kPi / cfg.resolved_test_phases();
    CHECK(std::abs(r.theta_est[0] - 1.234) <= resolution);
}

TEST_CASE("baps: argmax matches a 10x finer brute-force grid within one step") {
    Constellation c = build_qam(64);
    const ShapedPrior p = mb_prior(c, 0.0605);
    c = normalize(c, p);
    const double sigma2 = std::pow(10.0, -1.2);

    Rng rng(42, "src", 0);
    Rng noise(42, "noise", 0);
    Rng prng(42, "phase", 0);
    const int b_coarse = 240;
    CprConfig cfg;
    cfg.algorithm = CprAlgorithm::kBaps;
    cfg.half_window = 2;
    cfg.n_test_phases = b_coarse;
    cfg.prior_update = PriorUpdate::kAnchor;

    for (int trial = 0; trial < 100; ++trial) {
        const auto idx = sample_source(p, 5, rng);
        std::vector<cplx> tx(5);
        for (int i = 0; i < 5; ++i)
            tx[static_cast<std::size_t>(i)] = c.points[idx[static_cast<std::size_t>(i)]];
        const double phase = prng.uniform_angle();
        const auto rx = awgn(rotate_all(tx, phase), sigma2, noise);

        BapsBlockParams par;
        par.sigma2 = sigma2;
        par.delta2 = 1e-5;
        par.z0 = std::polar(200.0, phase + 0.05 * (prng.uniform() - 0.5));

        const CprResult r = baps_block(rx, c, p, cfg, par);
        // Estimate for the center symbol (window covers the whole block).
        const double got = r.theta_est[2];

        const double oracle = oracles::baps_objective_argmax_bruteforce(
            rx, c, p, par.z0, sigma2, 10 * b_coarse);
        const double step = 2 * kPi / b_coarse;
        double diff = got - oracle;
        while (diff > kPi) diff -= 2 * kPi;
        while (diff < -kPi) diff += 2 * kPi;
        CHECK(std::abs(diff) <= step + 1e-12);
    }
}

TEST_CASE("baps: sliding-sum kernel equals naive per-window recomputation bitwise") {
    Constellation c = build_qam(64);
    const ShapedPrior p = mb_prior(c, 0.04);
    c = normalize(c, p);
    const double sigma2 = 0.05;
    Rng rng(43, "src", 0);
    Rng noise(43, "noise", 0);
    const auto idx = sample_source(p, 10000, rng);
    std::vector<cplx> tx(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) tx[i] = c.points[idx[i]];
    const auto rx = awgn(rotate_all(tx, 0.15), sigma2, noise);

    CprConfig cfg;
    cfg.algorithm = CprAlgorithm::kBaps;
    cfg.half_window = 6;
    cfg.n_test_phases = 64;
    cfg.prior_update = PriorUpdate::kAnchor;
    BapsBlockParams par;
    par.sigma2 = sigma2;
    par.delta2 = 2e-5;
    par.z0 = std::polar(1.0 / 2e-5, 0.15);

    const CprResult fast = baps_block(rx, c, p, cfg, par);
    const auto naive = oracles::baps_block_naive(rx, c, p, cfg, par);
    REQUIRE(fast.theta_est.size() == naive.size());
    for (std::size_t k = 0; k < naive.size(); ++k) CHECK(fast.theta_est[k] == naive[k]);
}

TEST_CASE("baps: degenerate equivalence with bps (z=0, uniform prior, shared grid)") {
    const Constellation c = unit_qam64();
    const ShapedPrior u = uniform_prior(c);
    Rng rng(44, "src", 0);
    Rng noise(44, "noise", 0);
    const auto idx = sample_source(u, 10000, rng);
    std::vector<cplx> tx(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) tx[i] = c.points[idx[i]];
    const auto rx = awgn(rotate_all(tx, 0.31), 0.08, noise);

    CprConfig bps_cfg;
    bps_cfg.algorithm = CprAlgorithm::kBps;
    bps_cfg.half_window = 9;
    bps_cfg.n_test_phases = 60;

    CprConfig baps_cfg;
    baps_cfg.algorithm = CprAlgorithm::kBaps;
    baps_cfg.half_window = 9;
    baps_cfg.n_test_phases = 60;
    baps_cfg.phase_offset = 0.0;
    baps_cfg.phase_span = kPi / 2; // shared [0, pi/2) grid
    baps_cfg.prior_update = PriorUpdate::kAnchor;
    BapsBlockParams par; // z0 = 0, sigma2 irrelevant with flat prior
    par.sigma2 = 0.08;
    par.delta2 = 0.0;
    par.z0 = cplx(0.0, 0.0);

    const CprResult a = bps(rx, c, bps_cfg);
    const CprResult b = baps_block(rx, c, u, baps_cfg, par);
    REQUIRE(a.theta_est.size() == b.theta_est.size());
    for (std::size_t k = 0; k < a.theta_est.size(); ++k) CHECK(a.theta_est[k] == b.theta_est[k]);
    CHECK(a.decisions == b.decisions);
}

TEST_CASE("supervised_cycle_slip_correct") {
    const std::vector<double> truth{0.1, 0.2, 0.3, 0.4};
    std::vector<double> est{0.1 + kPi / 2, 0.2 + kPi / 2, 0.3 + kPi / 2, 0.4 + kPi / 2};
    auto fixed = supervised_cycle_slip_correct(est, truth);
    for (std::size_t i = 0; i < truth.size(); ++i)
        CHECK(fixed[i] == doctest::Approx(truth[i]).epsilon(1e-12));

    est = {0.2, 0.3, 0.4, 0.5}; // within-basin offset of 0.1
    fixed = supervised_cycle_slip_correct(est, truth);
    CHECK(fixed == est);

    // Slip of -pi from index 2 onward.
    est = {0.1, 0.2, 0.3 - kPi, 0.4 - kPi};
    fixed = supervised_cycle_slip_correct(est, truth);
    for (std::size_t i = 0; i < truth.size(); ++i)
        CHECK(fixed[i] == doctest::Approx(truth[i]).epsilon(1e-12));

    CHECK_THROWS_AS(supervised_cycle_slip_correct({0.0}, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("derotate") {
    const std::vector<cplx> y{cplx(1, 0), cplx(0, 1), cplx(-1, 1)};
    const std::vector<double> zero{0.0, 0.0, 0.0};
    CHECK(derotate(y, zero) == y);

    const std::vector<double> a{0.3, -0.2, 1.0};
    std::vector<double> na(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) na[i] = -a[i];
    const auto round_trip = derotate(derotate(y, a), na);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(round_trip[i] - y[i]) < 1e-15);

    CHECK_THROWS_AS(derotate(y, {0.0}), std::invalid_argument);
}

TEST_CASE("run_cpr: rejects frames that do not start with pilots") {
    const Constellation c = unit_qam64();
    const ShapedPrior u = uniform_prior(c);
    Frame f;
    f.symbols = {c.points[0], c.points[1]};
    f.pilot_mask = {false, false};
    f.pilot_block_len = 2;
    f.payload_block_len = 2;
    f.source_indices = {0, 1};
    CprConfig cfg;
    CHECK_THROWS_AS(run_cpr(f.symbols, f, c, u, cfg, 0.0), std::invalid_argument);
}
