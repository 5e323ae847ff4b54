// SPDX-License-Identifier: Apache-2.0
#include "baps.h"

#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "baps/experiment.hpp"
#include "baps/version.hpp"

struct baps_config {
    baps::ExperimentConfig cfg;
};

struct baps_results {
    std::vector<baps::ResultRow> rows;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

int copy_out(const std::string& s, char* buf, size_t buflen) {
    if (buf == nullptr || buflen == 0) return fail(BAPS_EINVAL, "null output buffer");
    if (s.size() + 1 > buflen) return fail(BAPS_EINVAL, "output buffer too small");
    std::memcpy(buf, s.c_str(), s.size() + 1);
    return BAPS_OK;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const baps::ConfigError& e) {
        return fail(BAPS_ECONFIG, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(BAPS_ECONFIG, e.what());
    } catch (const std::domain_error& e) {
        return fail(BAPS_ECONFIG, e.what());
    } catch (const std::exception& e) {
        return fail(BAPS_ERUNTIME, e.what());
    }
}

} // namespace

extern "C" {

const char* baps_version(void) { return baps::kVersion; }

const char* baps_last_error(void) { return g_last_error.c_str(); }

baps_config* baps_config_new(void) { return new (std::nothrow) baps_config(); }

void baps_config_free(baps_config* cfg) { delete cfg; }

int baps_config_set(baps_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) return fail(BAPS_EINVAL, "null argument");
    return guarded([&] {
        cfg->cfg.set(key, value);
        return BAPS_OK;
    });
}

int baps_config_get(const baps_config* cfg, const char* key, char* buf, size_t buflen) {
    if (!cfg || !key) return fail(BAPS_EINVAL, "null argument");
    return guarded([&] { return copy_out(cfg->cfg.get(key), buf, buflen); });
}

int baps_config_load_file(baps_config* cfg, const char* path) {
    if (!cfg || !path) return fail(BAPS_EINVAL, "null argument");
    return guarded([&] {
        cfg->cfg = baps::ExperimentConfig::from_file(path);
        return BAPS_OK;
    });
}

int baps_config_save_file(const baps_config* cfg, const char* path) {
    if (!cfg || !path) return fail(BAPS_EINVAL, "null argument");
    return guarded([&] {
        cfg->cfg.save(path);
        return BAPS_OK;
    });
}

int baps_run(const baps_config* cfg, int with_timing, baps_results** out) {
    if (!cfg || !out) return fail(BAPS_EINVAL, "null argument");
    return guarded([&] {
        auto res = std::make_unique<baps_results>();
        res->rows = baps::run_all(cfg->cfg, with_timing != 0);
        *out = res.release();
        return BAPS_OK;
    });
}

int baps_sweep(const baps_config* cfg, const char* grid_text, int workers, int with_timing,
               baps_results** out) {
    if (!cfg || !grid_text || !out) return fail(BAPS_EINVAL, "null argument");
    return guarded([&] {
        const baps::SweepGrid grid = baps::SweepGrid::parse(grid_text);
        auto res = std::make_unique<baps_results>();
        res->rows = baps::sweep(cfg->cfg, grid, workers, with_timing != 0);
        *out = res.release();
        return BAPS_OK;
    });
}

int baps_results_count(const baps_results* res, size_t* out) {
    if (!res || !out) return fail(BAPS_EINVAL, "null argument");
    *out = res->rows.size();
    return BAPS_OK;
}

int baps_results_value(const baps_results* res, size_t row, const char* column, double* out) {
    if (!res || !column || !out) return fail(BAPS_EINVAL, "null argument");
    if (row >= res->rows.size()) return fail(BAPS_EINVAL, "row index out of range");
    return guarded([&] {
        *out = res->rows[row].numeric_column(column);
        return BAPS_OK;
    });
}

int baps_results_string(const baps_results* res, size_t row, const char* column, char* buf,
                        size_t buflen) {
    if (!res || !column) return fail(BAPS_EINVAL, "null argument");
    if (row >= res->rows.size()) return fail(BAPS_EINVAL, "row index out of range");
    const auto& r = res->rows[row];
    if (std::strcmp(column, "algorithm") == 0) return copy_out(r.algorithm, buf, buflen);
    if (std::strcmp(column, "version") == 0) return copy_out(r.version, buf, buflen);
    return fail(BAPS_EINVAL, std::string("unknown string column: ") + column);
}

int baps_results_write_csv(const baps_results* res, const char* path) {
    if (!res || !path) return fail(BAPS_EINVAL, "null argument");
    return guarded([&] {
        try {
            baps::write_csv(path, res->rows);
        } catch (const std::runtime_error& e) {
            return fail(BAPS_EIO, e.what());
        }
        return BAPS_OK;
    });
}

int baps_results_write_jsonl(const baps_results* res, const char* path) {
    if (!res || !path) return fail(BAPS_EINVAL, "null argument");
    return guarded([&] {
        try {
            baps::write_jsonl(path, res->rows);
        } catch (const std::runtime_error& e) {
            return fail(BAPS_EIO, e.what());
        }
        return BAPS_OK;
    });
}

int baps_results_best_pilot_window(const baps_results* res, baps_results** out) {
    if (!res || !out) return fail(BAPS_EINVAL, "null argument");
    return guarded([&] {
        auto reduced = std::make_unique<baps_results>();
        reduced->rows = baps::best_pilot_window_rows(res->rows);
        *out = reduced.release();
        return BAPS_OK;
    });
}

void baps_results_free(baps_results* res) { delete res; }

} // extern "C"
