// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end for the carrier-phase-recovery simulator. Talks to
// the shared library exclusively through the C API in baps.h.

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "baps.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int exit_code_for(int rc) {
    switch (rc) {
        case BAPS_OK: return 0;
        case BAPS_ECONFIG:
        case BAPS_EINVAL: return kExitConfig;
        default: return kExitRuntime;
    }
}

int report(int rc, const char* what) {
    if (rc != BAPS_OK) std::fprintf(stderr, "baps: %s: %s\n", what, baps_last_error());
    return exit_code_for(rc);
}

struct ConfigHandle {
    baps_config* ptr = baps_config_new();
    ~ConfigHandle() { baps_config_free(ptr); }
};

struct ResultsHandle {
    baps_results* ptr = nullptr;
    ~ResultsHandle() { baps_results_free(ptr); }
};

int apply_overrides(baps_config* cfg, const std::string& config_path,
                    const std::vector<std::string>& sets, bool have_seed,
                    unsigned long long seed) {
    if (!config_path.empty()) {
        const int rc = baps_config_load_file(cfg, config_path.c_str());
        if (rc != BAPS_OK) return rc;
    }
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "baps: --set expects key=value, got '%s'\n", kv.c_str());
            return BAPS_ECONFIG;
        }
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        const int rc = baps_config_set(cfg, key.c_str(), value.c_str());
        if (rc != BAPS_OK) return rc;
    }
    if (have_seed) {
        const int rc = baps_config_set(cfg, "seed", std::to_string(seed).c_str());
        if (rc != BAPS_OK) return rc;
    }
    return BAPS_OK;
}

int write_results(const baps_results* res, const std::string& out_path,
                  const std::string& format, const std::string& best_out) {
    int rc;
    if (format == "jsonl")
        rc = baps_results_write_jsonl(res, out_path.c_str());
    else
        rc = baps_results_write_csv(res, out_path.c_str());
    if (rc != BAPS_OK) return rc;
    if (!best_out.empty()) {
        ResultsHandle best;
        rc = baps_results_best_pilot_window(res, &best.ptr);
        if (rc != BAPS_OK) return rc;
        if (format == "jsonl")
            rc = baps_results_write_jsonl(best.ptr, best_out.c_str());
        else
            rc = baps_results_write_csv(best.ptr, best_out.c_str());
        if (rc != BAPS_OK) return rc;
    }
    return BAPS_OK;
}

void print_summary(const baps_results* res) {
    size_t n = 0;
    baps_results_count(res, &n);
    for (size_t i = 0; i < n; ++i) {
        char algo[32];
        double lambda = 0;
        double snr = 0;
        double mi = 0;
        double ser = 0;
        double slips = 0;
        baps_results_string(res, i, "algorithm", algo, sizeof(algo));
        baps_results_value(res, i, "lambda", &lambda);
        baps_results_value(res, i, "snr_db", &snr);
        baps_results_value(res, i, "mi_bits", &mi);
        baps_results_value(res, i, "ser", &ser);
        baps_results_value(res, i, "cycle_slips", &slips);
        std::fprintf(stderr, "%-7s lambda=%-8.4g snr=%-5.4g mi=%.4f bits ser=%.4g slips=%.0f\n",
                     algo, lambda, snr, mi, ser, slips);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"QAM carrier-phase-recovery simulator (BPS / PS-BPS / BaPS)"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string grid_arg;
    std::string best_out;
    std::string format = "csv";
    std::vector<std::string> sets;
    unsigned long long seed = 0;
    bool have_seed = false;
    int workers = 0;
    bool timing = false;
    bool quiet = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Config file (key = value lines)");
        cmd->add_option("--set", sets, "Override a config key (key=value, repeatable)");
        cmd->add_option("--seed", seed, "Override the RNG seed")->each([&](const std::string&) {
            have_seed = true;
        });
        cmd->add_option("--out", out_path, "Output file path")->required();
        cmd->add_option("--format", format, "Output format: csv or jsonl")
            ->check(CLI::IsMember({"csv", "jsonl"}));
        cmd->add_flag("--quiet", quiet, "Suppress the per-row summary on stderr");
    };

    CLI::App* run = app.add_subcommand("run", "Run one configuration point");
    add_common(run);
    run->add_flag("--timing", timing, "Record real wall times (default for run)");

    CLI::App* sw = app.add_subcommand("sweep", "Run a Cartesian parameter sweep");
    add_common(sw);
    sw->add_option("--grid", grid_arg,
                   "Grid file or inline spec, e.g. \"lambda=0,0.02;algorithm=bps,baps\"")
        ->required();
    sw->add_option("--workers", workers, "Worker threads (default: BAPS_WORKERS or 1)");
    sw->add_option("--best-l-out", best_out,
                   "Also write the best-pilot-window rows per config group");
    sw->add_flag("--timing", timing,
                 "Record real wall times (makes sweep output non-reproducible)");

    CLI11_PARSE(app, argc, argv);

    ConfigHandle cfg;
    if (!cfg.ptr) {
        std::fprintf(stderr, "baps: out of memory\n");
        return kExitRuntime;
    }
    int rc = apply_overrides(cfg.ptr, config_path, sets, have_seed, seed);
    if (rc != BAPS_OK) return report(rc, "configuration");

    ResultsHandle res;
    if (app.got_subcommand(run)) {
        rc = baps_run(cfg.ptr, 1, &res.ptr); // run always records timing
        if (rc != BAPS_OK) return report(rc, "run");
    } else {
        std::string grid_text = grid_arg;
        if (std::ifstream f{grid_arg}; f.good()) {
            std::stringstream ss;
            ss << f.rdbuf();
            grid_text = ss.str();
        }
        rc = baps_sweep(cfg.ptr, grid_text.c_str(), workers, timing ? 1 : 0, &res.ptr);
        if (rc != BAPS_OK) return report(rc, "sweep");
    }

    rc = write_results(res.ptr, out_path, format, best_out);
    if (rc != BAPS_OK) return report(rc, "write");
    if (!quiet) print_summary(res.ptr);
    return 0;
}
