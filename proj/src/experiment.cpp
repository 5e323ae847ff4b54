// SPDX-License-Identifier: Apache-2.0
#include "baps/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "baps/channel.hpp"
#include "baps/version.hpp"

namespace baps {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    if (v == "inf" || v == "+inf" || v == "infinity")
        return std::numeric_limits<double>::infinity();
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("invalid number for '" + key + "': " + v);
    return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("invalid integer for '" + key + "': " + v);
    return static_cast<std::uint64_t>(x);
}

int parse_int(const std::string& key, const std::string& v) {
    return static_cast<int>(parse_u64(key, v));
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw ConfigError("invalid boolean for '" + key + "': " + v);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::string fmt_double(double v, const char* spec = "%.9g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string fmt_double_exact(double v) { return fmt_double(v, "%.17g"); }

} // namespace

std::string to_string(HarnessAlgorithm a) {
    switch (a) {
        case HarnessAlgorithm::kGenie: return "genie";
        case HarnessAlgorithm::kBps: return "bps";
        case HarnessAlgorithm::kPsBps: return "ps_bps";
        case HarnessAlgorithm::kBaps: return "baps";
    }
    return "?";
}

HarnessAlgorithm algorithm_from_string(const std::string& s) {
    if (s == "genie") return HarnessAlgorithm::kGenie;
    if (s == "bps") return HarnessAlgorithm::kBps;
    if (s == "ps_bps") return HarnessAlgorithm::kPsBps;
    if (s == "baps") return HarnessAlgorithm::kBaps;
    throw ConfigError("unknown algorithm: " + s);
}

std::string to_string(PriorUpdate u) {
    switch (u) {
        case PriorUpdate::kAnchor: return "anchor";
        case PriorUpdate::kReanchor: return "reanchor";
        case PriorUpdate::kMeasurement: return "measurement";
    }
    return "?";
}

PriorUpdate prior_update_from_string(const std::string& s) {
    if (s == "anchor") return PriorUpdate::kAnchor;
    if (s == "reanchor") return PriorUpdate::kReanchor;
    if (s == "measurement") return PriorUpdate::kMeasurement;
    throw ConfigError("unknown prior_update: " + s);
}

double ExperimentConfig::resolved_lambda() const {
    if (target_bits_per_amplitude > 0.0) {
        const Constellation c = build_qam(order);
        return lambda_for_rate(c, target_bits_per_amplitude);
    }
    return lambda;
}

int ExperimentConfig::resolved_test_phases() const {
    if (n_test_phases > 0) return n_test_phases;
    switch (algorithm) {
        case HarnessAlgorithm::kBaps: return 240;
        case HarnessAlgorithm::kBps:
        case HarnessAlgorithm::kPsBps: return 60;
        case HarnessAlgorithm::kGenie: return 0;
    }
    return 0;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (key == "algorithm") {
        algorithm = algorithm_from_string(v);
    } else if (key == "order") {
        order = parse_int(key, v);
    } else if (key == "lambda") {
        lambda = parse_double(key, v);
    } else if (key == "target_bits_per_amplitude") {
        target_bits_per_amplitude = parse_double(key, v);
    } else if (key == "snr_db") {
        snr_db = parse_double(key, v);
    } else if (key == "linewidth_hz") {
        linewidth_hz = parse_double(key, v);
    } else if (key == "baud_hz") {
        baud_hz = parse_double(key, v);
    } else if (key == "delta2_override") {
        delta2_override = (v == "none") ? -1.0 : parse_double(key, v);
    } else if (key == "n_symbols") {
        n_symbols = parse_u64(key, v);
    } else if (key == "n_pilots") {
        n_pilots = parse_int(key, v);
    } else if (key == "pilot_period") {
        pilot_period = parse_int(key, v);
    } else if (key == "half_window") {
        half_window = parse_int(key, v);
    } else if (key == "n_test_phases") {
        n_test_phases = parse_int(key, v);
    } else if (key == "pilot_window") {
        pilot_window.clear();
        for (const auto& item : split(v, ','))
            if (!item.empty()) pilot_window.push_back(parse_int(key, item));
        if (pilot_window.empty()) throw ConfigError("pilot_window: empty list");
    } else if (key == "prior_update") {
        prior_update = prior_update_from_string(v);
    } else if (key == "reanchor") {
        // Boolean alias: true selects the re-anchoring variant.
        if (parse_bool(key, v))
            prior_update = PriorUpdate::kReanchor;
        else if (prior_update == PriorUpdate::kReanchor)
            prior_update = PriorUpdate::kAnchor;
    } else if (key == "sigma2_source") {
        if (v != "estimated" && v != "true" && v != "true_value")
            throw ConfigError("sigma2_source must be 'estimated' or 'true'");
        sigma2_source = (v == "true_value") ? "true" : v;
    } else if (key == "cycle_slip_correction") {
        cycle_slip_correction = parse_bool(key, v);
    } else if (key == "seed") {
        seed = parse_u64(key, v);
    } else if (key == "repetitions") {
        repetitions = parse_int(key, v);
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

std::string ExperimentConfig::get(const std::string& key) const {
    if (key == "algorithm") return to_string(algorithm);
    if (key == "order") return std::to_string(order);
    if (key == "lambda") return fmt_double_exact(lambda);
    if (key == "target_bits_per_amplitude") return fmt_double_exact(target_bits_per_amplitude);
    if (key == "snr_db") return std::isinf(snr_db) ? "inf" : fmt_double_exact(snr_db);
    if (key == "linewidth_hz") return fmt_double_exact(linewidth_hz);
    if (key == "baud_hz") return fmt_double_exact(baud_hz);
    if (key == "delta2_override")
        return delta2_override < 0.0 ? "none" : fmt_double_exact(delta2_override);
    if (key == "n_symbols") return std::to_string(n_symbols);
    if (key == "n_pilots") return std::to_string(n_pilots);
    if (key == "pilot_period") return std::to_string(pilot_period);
    if (key == "half_window") return std::to_string(half_window);
    if (key == "n_test_phases") return std::to_string(n_test_phases);
    if (key == "pilot_window") {
        std::string s;
        for (std::size_t i = 0; i < pilot_window.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(pilot_window[i]);
        }
        return s;
    }
    if (key == "prior_update") return to_string(prior_update);
    if (key == "reanchor") return prior_update == PriorUpdate::kReanchor ? "1" : "0";
    if (key == "sigma2_source") return sigma2_source;
    if (key == "cycle_slip_correction") return cycle_slip_correction ? "1" : "0";
    if (key == "seed") return std::to_string(seed);
    if (key == "repetitions") return std::to_string(repetitions);
    throw ConfigError("unknown config key: " + key);
}

void ExperimentConfig::validate() const {
    if (order != 64 && order != 256) throw ConfigError("order must be 64 or 256");
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (baud_hz <= 0.0) throw ConfigError("baud_hz must be > 0");
    if (linewidth_hz < 0.0) throw ConfigError("linewidth_hz must be >= 0");
    if (n_symbols < 1) throw ConfigError("n_symbols must be >= 1");
    if (n_pilots < 2) throw ConfigError("n_pilots must be >= 2");
    if (pilot_period < 1) throw ConfigError("pilot_period must be >= 1");
    if (half_window < 0) throw ConfigError("half_window must be >= 0");
    if (n_test_phases < 0) throw ConfigError("n_test_phases must be >= 0");
    for (int l : pilot_window)
        if (l < 1) throw ConfigError("pilot_window entries must be >= 1");
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (target_bits_per_amplitude < 0.0)
        throw ConfigError("target_bits_per_amplitude must be >= 0");
}

namespace {
const char* const kConfigKeys[] = {
    "algorithm",    "order",         "lambda",        "target_bits_per_amplitude",
    "snr_db",       "linewidth_hz",  "baud_hz",       "delta2_override",
    "n_symbols",    "n_pilots",      "pilot_period",  "half_window",
    "n_test_phases", "pilot_window", "prior_update",  "sigma2_source",
    "cycle_slip_correction", "seed", "repetitions",
};
} // namespace

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

std::string ExperimentConfig::to_text() const {
    std::string out;
    for (const char* key : kConfigKeys) {
        out += key;
        out += " = ";
        out += get(key);
        out += "\n";
    }
    return out;
}

void ExperimentConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out << to_text();
}

std::string csv_header() {
    return "algorithm,order,lambda,snr_db,linewidth_hz,baud_hz,n_symbols,n_pilots,"
           "pilot_period,half_window,n_test_phases,pilot_window,reanchor,seed,rep,"
           "mi_bits,ser,ber,q_db,rms_phase_error,cycle_slips,snr_eff_db,wall_s,version";
}

std::string ResultRow::csv_line() const {
    std::string s;
    s += algorithm;
    s += ',' + std::to_string(order);
    s += ',' + fmt_double(lambda);
    s += ',' + fmt_double(snr_db);
    s += ',' + fmt_double(linewidth_hz);
    s += ',' + fmt_double(baud_hz);
    s += ',' + std::to_string(n_symbols);
    s += ',' + std::to_string(n_pilots);
    s += ',' + std::to_string(pilot_period);
    s += ',' + std::to_string(half_window);
    s += ',' + std::to_string(n_test_phases);
    s += ',' + std::to_string(pilot_window);
    s += ',' + std::to_string(reanchor);
    s += ',' + std::to_string(seed);
    s += ',' + std::to_string(rep);
    s += ',' + fmt_double(metrics.mi_bits);
    s += ',' + fmt_double(metrics.ser);
    s += ',' + fmt_double(metrics.ber);
    s += ',' + fmt_double(metrics.q_db);
    s += ',' + fmt_double(metrics.rms_phase_error);
    s += ',' + std::to_string(metrics.cycle_slips);
    s += ',' + fmt_double(metrics.snr_eff_db);
    s += ',' + fmt_double(wall_s);
    s += ',' + version;
    return s;
}

namespace {
std::string json_number(double v) {
    if (!std::isfinite(v)) return "null";
    return fmt_double(v);
}
} // namespace

std::string ResultRow::jsonl_line() const {
    std::string s = "{";
    s += "\"algorithm\":\"" + algorithm + "\"";
    s += ",\"order\":" + std::to_string(order);
    s += ",\"lambda\":" + json_number(lambda);
    s += ",\"snr_db\":" + json_number(snr_db);
    s += ",\"linewidth_hz\":" + json_number(linewidth_hz);
    s += ",\"baud_hz\":" + json_number(baud_hz);
    s += ",\"n_symbols\":" + std::to_string(n_symbols);
    s += ",\"n_pilots\":" + std::to_string(n_pilots);
    s += ",\"pilot_period\":" + std::to_string(pilot_period);
    s += ",\"half_window\":" + std::to_string(half_window);
    s += ",\"n_test_phases\":" + std::to_string(n_test_phases);
    s += ",\"pilot_window\":" + std::to_string(pilot_window);
    s += ",\"reanchor\":" + std::to_string(reanchor);
    s += ",\"seed\":" + std::to_string(seed);
    s += ",\"rep\":" + std::to_string(rep);
    s += ",\"mi_bits\":" + json_number(metrics.mi_bits);
    s += ",\"ser\":" + json_number(metrics.ser);
    s += ",\"ber\":" + json_number(metrics.ber);
    s += ",\"q_db\":" + json_number(metrics.q_db);
    s += ",\"rms_phase_error\":" + json_number(metrics.rms_phase_error);
    s += ",\"cycle_slips\":" + std::to_string(metrics.cycle_slips);
    s += ",\"snr_eff_db\":" + json_number(metrics.snr_eff_db);
    s += ",\"wall_s\":" + json_number(wall_s);
    s += ",\"version\":\"" + version + "\"";
    s += "}";
    return s;
}

double ResultRow::numeric_column(const std::string& name) const {
    if (name == "order") return order;
    if (name == "lambda") return lambda;
    if (name == "snr_db") return snr_db;
    if (name == "linewidth_hz") return linewidth_hz;
    if (name == "baud_hz") return baud_hz;
    if (name == "n_symbols") return static_cast<double>(n_symbols);
    if (name == "n_pilots") return n_pilots;
    if (name == "pilot_period") return pilot_period;
    if (name == "half_window") return half_window;
    if (name == "n_test_phases") return n_test_phases;
    if (name == "pilot_window") return pilot_window;
    if (name == "reanchor") return reanchor;
    if (name == "seed") return static_cast<double>(seed);
    if (name == "rep") return rep;
    if (name == "mi_bits") return metrics.mi_bits;
    if (name == "ser") return metrics.ser;
    if (name == "ber") return metrics.ber;
    if (name == "q_db") return metrics.q_db;
    if (name == "rms_phase_error") return metrics.rms_phase_error;
    if (name == "cycle_slips") return static_cast<double>(metrics.cycle_slips);
    if (name == "snr_eff_db") return metrics.snr_eff_db;
    if (name == "wall_s") return wall_s;
    throw ConfigError("unknown numeric column: " + name);
}

bool SweepGrid::empty() const {
    return algorithms.empty() && lambdas.empty() && snrs.empty() && half_windows.empty() &&
           pilot_windows.empty();
}

SweepGrid SweepGrid::parse(const std::string& text) {
    SweepGrid g;
    std::string norm = text;
    for (char& c : norm)
        if (c == ';') c = '\n';
    std::istringstream in(norm);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("grid: expected key = v1, v2, ...");
        const std::string key = trim(line.substr(0, eq));
        const auto values = split(line.substr(eq + 1), ',');
        if (key == "algorithm") {
            for (const auto& v : values)
                if (!v.empty()) g.algorithms.push_back(algorithm_from_string(v));
        } else if (key == "lambda") {
            for (const auto& v : values)
                if (!v.empty()) g.lambdas.push_back(parse_double(key, v));
        } else if (key == "snr_db") {
            for (const auto& v : values)
                if (!v.empty()) g.snrs.push_back(parse_double(key, v));
        } else if (key == "half_window") {
            for (const auto& v : values)
                if (!v.empty()) g.half_windows.push_back(parse_int(key, v));
        } else if (key == "pilot_window") {
            for (const auto& v : values)
                if (!v.empty()) g.pilot_windows.push_back(parse_int(key, v));
        } else {
            throw ConfigError("grid: unsupported axis '" + key + "'");
        }
    }
    return g;
}

ResultRow run_point(const ExperimentConfig& config, int rep, int pilot_window,
                    bool with_timing) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();

    const double lambda = config.resolved_lambda();
    Constellation c = build_qam(config.order);
    const ShapedPrior prior_grid = mb_prior(c, lambda);
    c = normalize(c, prior_grid);
    const ShapedPrior& prior = prior_grid; // probabilities are scale-free

    Rng source_rng(config.seed, "source", static_cast<std::uint64_t>(rep));
    const auto indices = sample_source(prior, config.n_symbols, source_rng);
    const Frame frame =
        insert_pilots(indices, c, config.n_pilots, config.pilot_period, corner_indices(c));

    ChannelConfig ch;
    ch.snr_db = config.snr_db;
    ch.linewidth_hz = config.linewidth_hz;
    ch.baud_hz = config.baud_hz;
    if (config.delta2_override >= 0.0) ch.delta2_override = config.delta2_override;
    Rng phase_rng(config.seed, "phase", static_cast<std::uint64_t>(rep));
    Rng noise_rng(config.seed, "noise", static_cast<std::uint64_t>(rep));
    const ChannelOutput out = apply_channel(frame, ch, phase_rng, noise_rng);

    const std::vector<double> theta_true = extract_payload(frame, out.true_phase);
    const std::vector<cplx> rx_payload = extract_payload(frame, out.received);

    std::vector<double> theta_est;
    if (config.algorithm == HarnessAlgorithm::kGenie) {
        theta_est = theta_true;
    } else {
        CprConfig cc;
        switch (config.algorithm) {
            case HarnessAlgorithm::kBps: cc.algorithm = CprAlgorithm::kBps; break;
            case HarnessAlgorithm::kPsBps: cc.algorithm = CprAlgorithm::kPsBps; break;
            default: cc.algorithm = CprAlgorithm::kBaps; break;
        }
        cc.half_window = config.half_window;
        cc.n_test_phases = config.n_test_phases;
        cc.pilot_window = pilot_window;
        cc.prior_update = config.prior_update;
        cc.sigma2_source = config.sigma2_source == "true" ? Sigma2Source::kTrueValue
                                                          : Sigma2Source::kEstimated;
        const CprResult res = run_cpr(out.received, frame, c, prior, cc, out.sigma2_true);
        theta_est = res.theta_est;
        const bool bps_variant = config.algorithm == HarnessAlgorithm::kBps ||
                                 config.algorithm == HarnessAlgorithm::kPsBps;
        if (bps_variant && config.cycle_slip_correction)
            theta_est = supervised_cycle_slip_correct(theta_est, theta_true);
    }

    const std::vector<cplx> derotated = derotate(rx_payload, theta_est);

    ResultRow row;
    row.algorithm = to_string(config.algorithm);
    row.order = config.order;
    row.lambda = lambda;
    row.snr_db = config.snr_db;
    row.linewidth_hz = config.linewidth_hz;
    row.baud_hz = config.baud_hz;
    row.n_symbols = config.n_symbols;
    row.n_pilots = config.n_pilots;
    row.pilot_period = config.pilot_period;
    row.half_window = config.half_window;
    row.n_test_phases = config.n_test_phases > 0 ? config.n_test_phases
                                                 : config.resolved_test_phases();
    row.pilot_window = pilot_window;
    row.reanchor = config.prior_update == PriorUpdate::kReanchor ? 1 : 0;
    row.seed = config.seed;
    row.rep = rep;
    row.version = kVersion;

    MetricsRecord& m = row.metrics;
    const double s = residual_variance(derotated, indices, c);
    m.mi_bits = mutual_information(derotated, indices, prior, c);
    const ErrorRates er = error_rates(derotated, indices, prior, c, std::max(s, 1e-30));
    m.ser = er.ser;
    m.ber = er.ber;
    if (er.ber > 0.0 && er.ber < 0.5)
        m.q_db = q_factor_from_ber(er.ber);
    else
        m.q_db = er.ber <= 0.0 ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
    const PhaseErrorStats pes = phase_error_stats(theta_est, theta_true);
    m.rms_phase_error = pes.rms;
    m.cycle_slips = pes.cycle_slips;
    m.snr_eff_db = s > 0.0 ? -10.0 * std::log10(s) : std::numeric_limits<double>::infinity();

    if (with_timing) {
        const auto t1 = std::chrono::steady_clock::now();
        row.wall_s = std::chrono::duration<double>(t1 - t0).count();
    }
    return row;
}

std::vector<ResultRow> run_all(const ExperimentConfig& config, bool with_timing) {
    std::vector<ResultRow> rows;
    for (int l : config.pilot_window)
        for (int rep = 0; rep < config.repetitions; ++rep)
            rows.push_back(run_point(config, rep, l, with_timing));
    return rows;
}

int default_workers() {
    if (const char* env = std::getenv("BAPS_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

std::vector<ResultRow> sweep(const ExperimentConfig& config, const SweepGrid& grid, int workers,
                             bool with_timing) {
    config.validate();
    if (grid.empty()) throw ConfigError("sweep: empty grid");
    if (workers <= 0) workers = default_workers();

    const std::vector<HarnessAlgorithm> algos =
        grid.algorithms.empty() ? std::vector<HarnessAlgorithm>{config.algorithm}
                                : grid.algorithms;
    const std::vector<double> lambdas =
        grid.lambdas.empty() ? std::vector<double>{config.lambda} : grid.lambdas;
    const std::vector<double> snrs =
        grid.snrs.empty() ? std::vector<double>{config.snr_db} : grid.snrs;
    const std::vector<int> windows =
        grid.half_windows.empty() ? std::vector<int>{config.half_window} : grid.half_windows;
    const std::vector<int> pilot_windows =
        grid.pilot_windows.empty() ? config.pilot_window : grid.pilot_windows;

    struct Point {
        ExperimentConfig cfg;
        int pilot_window;
        int rep;
    };
    std::vector<Point> points;
    for (HarnessAlgorithm a : algos)
        for (double lam : lambdas)
            for (double snr : snrs)
                for (int n : windows)
                    for (int l : pilot_windows)
                        for (int rep = 0; rep < config.repetitions; ++rep) {
                            Point p{config, l, rep};
                            p.cfg.algorithm = a;
                            p.cfg.lambda = lam;
                            // A lambda axis overrides any configured target rate.
                            if (!grid.lambdas.empty()) p.cfg.target_bits_per_amplitude = 0.0;
                            p.cfg.snr_db = snr;
                            p.cfg.half_window = n;
                            points.push_back(std::move(p));
                        }

    std::vector<ResultRow> rows(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= points.size()) break;
            rows[i] = run_point(points[i].cfg, points[i].rep, points[i].pilot_window,
                                with_timing);
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int count = std::min<int>(workers, static_cast<int>(points.size()));
        pool.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return rows;
}

std::vector<ResultRow> best_pilot_window_rows(const std::vector<ResultRow>& rows) {
    // Group key: everything except pilot_window, rep and metrics.
    auto group_key = [](const ResultRow& r) {
        std::string k = r.algorithm;
        k += '|' + std::to_string(r.order);
        k += '|' + fmt_double_exact(r.lambda);
        k += '|' + fmt_double_exact(r.snr_db);
        k += '|' + fmt_double_exact(r.linewidth_hz);
        k += '|' + fmt_double_exact(r.baud_hz);
        k += '|' + std::to_string(r.n_symbols);
        k += '|' + std::to_string(r.n_pilots);
        k += '|' + std::to_string(r.pilot_period);
        k += '|' + std::to_string(r.half_window);
        k += '|' + std::to_string(r.n_test_phases);
        k += '|' + std::to_string(r.reanchor);
        k += '|' + std::to_string(r.seed);
        return k;
    };
    struct Stat {
        double sum = 0.0;
        int count = 0;
        double mean() const { return sum / count; }
    };
    std::map<std::string, std::map<int, Stat>> stats;
    std::vector<std::string> keys(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        keys[i] = group_key(rows[i]);
        Stat& st = stats[keys[i]][rows[i].pilot_window];
        st.sum += rows[i].metrics.mi_bits;
        st.count += 1;
    }
    std::map<std::string, int> winner;
    for (const auto& [key, per_l] : stats) {
        int best_l = per_l.begin()->first;
        for (const auto& [l, st] : per_l)
            if (st.mean() > per_l.at(best_l).mean()) best_l = l; // ties keep smaller L
        winner[key] = best_l;
    }
    std::vector<ResultRow> out;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (winner.at(keys[i]) == rows[i].pilot_window) out.push_back(rows[i]);
    return out;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
    std::string s = csv_header();
    s += '\n';
    for (const auto& r : rows) {
        s += r.csv_line();
        s += '\n';
    }
    return s;
}

void write_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + path);
    out << to_csv(rows);
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

void write_jsonl(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + path);
    for (const auto& r : rows) out << r.jsonl_line() << '\n';
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

} // namespace baps
