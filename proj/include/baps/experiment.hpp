// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "baps/cpr.hpp"
#include "baps/metrics.hpp"

namespace baps {

/// Invalid keys, values out of range, malformed files.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class HarnessAlgorithm { kGenie, kBps, kPsBps, kBaps };

std::string to_string(HarnessAlgorithm a);
HarnessAlgorithm algorithm_from_string(const std::string& s);
std::string to_string(PriorUpdate u);
PriorUpdate prior_update_from_string(const std::string& s);

/// One experiment point plus sweep-able lists. Round-trips losslessly
/// through the key/value file format.
struct ExperimentConfig {
    HarnessAlgorithm algorithm = HarnessAlgorithm::kBaps;
    int order = 64;
    double lambda = 0.0;
    double target_bits_per_amplitude = 0.0; // > 0 resolves lambda from the rate
    double snr_db = 12.0;                   // "inf" accepted
    double linewidth_hz = 200e3;
    double baud_hz = 50e9;
    double delta2_override = -1.0; // < 0 = unset
    std::uint64_t n_symbols = 262144;
    int n_pilots = 50;
    int pilot_period = 2000;
    int half_window = 14;
    int n_test_phases = 0; // 0 = auto per algorithm
    std::vector<int> pilot_window = {16};
    PriorUpdate prior_update = PriorUpdate::kMeasurement;
    std::string sigma2_source = "estimated"; // or "true"
    bool cycle_slip_correction = true;
    std::uint64_t seed = 1;
    int repetitions = 1;

    /// lambda after resolving target_bits_per_amplitude (if set).
    double resolved_lambda() const;
    int resolved_test_phases() const;

    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;
    void validate() const;

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_text(const std::string& text);
    std::string to_text() const;
    void save(const std::string& path) const;
};

/// One CSV row: config echo + metrics + timing + version.
struct ResultRow {
    std::string algorithm;
    int order = 0;
    double lambda = 0.0;
    double snr_db = 0.0;
    double linewidth_hz = 0.0;
    double baud_hz = 0.0;
    std::uint64_t n_symbols = 0;
    int n_pilots = 0;
    int pilot_period = 0;
    int half_window = 0;
    int n_test_phases = 0;
    int pilot_window = 0;
    int reanchor = 0;
    std::uint64_t seed = 0;
    int rep = 0;
    MetricsRecord metrics;
    double wall_s = 0.0;
    std::string version;

    std::string csv_line() const;
    std::string jsonl_line() const;
    /// Numeric column access by CSV column name (strings unsupported).
    double numeric_column(const std::string& name) const;
};

std::string csv_header();

/// Sweep axes; values run in listed order, axes nest in the fixed order
/// algorithm > lambda > snr_db > half_window > pilot_window > rep.
struct SweepGrid {
    std::vector<HarnessAlgorithm> algorithms;
    std::vector<double> lambdas;
    std::vector<double> snrs;
    std::vector<int> half_windows;
    std::vector<int> pilot_windows;

    bool empty() const;
    static SweepGrid parse(const std::string& text);
};

/// Runs a single configuration point. Deterministic given (config, rep):
/// RNG substreams are keyed by (seed, component tag, rep).
ResultRow run_point(const ExperimentConfig& config, int rep, int pilot_window,
                    bool with_timing);

/// All rows for one config (repetitions x pilot_window list).
std::vector<ResultRow> run_all(const ExperimentConfig& config, bool with_timing);

/// Cartesian sweep; rows in deterministic grid order regardless of worker
/// count. workers <= 0 consults BAPS_WORKERS, then defaults to 1.
std::vector<ResultRow> sweep(const ExperimentConfig& config, const SweepGrid& grid, int workers,
                             bool with_timing);

/// Best-L reduction: per group (all config columns except pilot_window/rep),
/// keeps the rows of the pilot_window with the highest mean MI.
std::vector<ResultRow> best_pilot_window_rows(const std::vector<ResultRow>& rows);

std::string to_csv(const std::vector<ResultRow>& rows);
void write_csv(const std::string& path, const std::vector<ResultRow>& rows);
void write_jsonl(const std::string& path, const std::vector<ResultRow>& rows);

int default_workers();

} // namespace baps
