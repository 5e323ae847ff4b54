// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "baps/constellation.hpp"
#include "baps/framing.hpp"

namespace baps {

enum class CprAlgorithm { kBps, kPsBps, kBaps };

/// Evolution of the von Mises parameter z between pilot blocks.
///   kAnchor      - |z| decays via the parameter recursion, mean phase stays
///                  at the pilot anchor (literal reading).
///   kReanchor    - as kAnchor but the mean phase is re-centered at the
///                  current estimate after every symbol (decision-directed).
///   kMeasurement - z accumulates per-symbol soft measurements
///                  (2/sigma^2) y_k xbar_k* before each decay step
///                  (Tikhonov-filter update).
enum class PriorUpdate { kAnchor, kReanchor, kMeasurement };

enum class Sigma2Source { kEstimated, kTrueValue };

/// Von Mises phase prior, density proportional to exp(Re[z e^{-j theta}]).
struct VonMisesPrior {
    cplx z{0.0, 0.0};

    double concentration() const { return std::abs(z); }
    double mean_phase() const { return std::arg(z); }
    /// Log density up to the normalization constant.
    double log_density_unnormalized(double theta) const {
        return z.real() * std::cos(theta) + z.imag() * std::sin(theta);
    }
};

/// One prediction step: z' = z / (1 + delta2 |z|).
VonMisesPrior von_mises_predict(const VonMisesPrior& prior, double delta2);

struct CprConfig {
    CprAlgorithm algorithm = CprAlgorithm::kBaps;
    int half_window = 14;  // N, one-sided; total window 2N+1
    int n_test_phases = 0; // B; 0 = auto (60 for BPS variants, 240 for BaPS)
    // Test-phase grid phi_b = offset + b*span/B. NaN = per-algorithm default
    // ([0, pi/2) for BPS variants, [-pi, pi) for BaPS).
    double phase_offset = std::nan("");
    double phase_span = std::nan("");
    int pilot_window = 16; // L in the pilot ML phase estimate
    PriorUpdate prior_update = PriorUpdate::kAnchor;
    Sigma2Source sigma2_source = Sigma2Source::kEstimated;

    int resolved_test_phases() const;
    double resolved_offset() const;
    double resolved_span() const;
};

/// Pilot-block parameter estimates.
struct PilotEstimates {
    std::vector<double> theta_hat; // per-pilot estimates, unwrapped
    double sigma2_hat = 0.0;
    double delta2_hat = 0.0; // floored at kDelta2Floor
    cplx z_init{0.0, 0.0};   // (1/delta2_hat) e^{j theta_hat[Np-1]}
};

inline constexpr double kDelta2Floor = 1e-9;

struct CprResult {
    std::vector<double> theta_est;      // unwrapped, one per payload symbol
    std::vector<cplx> derotated;        // y_k e^{-j theta_k}, payload only
    std::vector<std::size_t> decisions; // constellation index per payload symbol
    std::vector<double> prior_magnitudes; // |z_k| per payload symbol (BaPS only)
};

/// MAP symbol decision: argmax_x -|y_rot - x|^2/sigma2 + log p(x).
/// Ties go to the lowest constellation index; zero-probability points are
/// excluded.
std::size_t map_decision(cplx y_rot, const ShapedPrior& prior, const Constellation& c,
                         double sigma2);

/// Windowed ML pilot phase estimates (window size L, clipped at the block
/// edges), unwrapped across pilots.
std::vector<double> pilot_ml_phase(const std::vector<cplx>& pilot_rx,
                                   const std::vector<cplx>& pilot_tx, int window);

PilotEstimates estimate_params(const std::vector<cplx>& pilot_rx,
                               const std::vector<cplx>& pilot_tx,
                               const std::vector<double>& theta_hat_pilots);

/// Blind phase search over one payload block (no prior, Euclidean decisions).
CprResult bps(const std::vector<cplx>& received_block, const Constellation& c,
              const CprConfig& config);

/// BPS with prior-aware (MAP) symbol decisions.
CprResult ps_bps(const std::vector<cplx>& received_block, const Constellation& c,
                 const ShapedPrior& prior, double sigma2, const CprConfig& config);

/// Forced-parameter BaPS over one block (used directly by tests; the frame
/// driver re-estimates parameters at every pilot block).
struct BapsBlockParams {
    double sigma2 = 0.0;
    double delta2 = 0.0;
    cplx z0{0.0, 0.0};
};
CprResult baps_block(const std::vector<cplx>& received_block, const Constellation& c,
                     const ShapedPrior& prior, const CprConfig& config,
                     const BapsBlockParams& params);

/// Full-frame CPR: per pilot block, re-estimates theta_p / sigma2 / delta2 /
/// z and runs the configured estimator over the following payload block.
/// sigma2_true feeds Sigma2Source::kTrueValue.
CprResult run_cpr(const std::vector<cplx>& received, const Frame& frame, const Constellation& c,
                  const ShapedPrior& prior, const CprConfig& config, double sigma2_true = 0.0);

/// Genie-aided removal of pi/2-multiple offsets (per symbol).
std::vector<double> supervised_cycle_slip_correct(const std::vector<double>& theta_est,
                                                  const std::vector<double>& theta_true);

std::vector<cplx> derotate(const std::vector<cplx>& received,
                           const std::vector<double>& theta_est);

} // namespace baps
