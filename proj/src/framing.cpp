// SPDX-License-Identifier: Apache-2.0
#include "baps/framing.hpp"

#include <algorithm>
#include <stdexcept>

namespace baps {

std::size_t Frame::block_count() const {
    if (payload_block_len <= 0) return 0;
    const std::size_t n = payload_size();
    return (n + static_cast<std::size_t>(payload_block_len) - 1) /
           static_cast<std::size_t>(payload_block_len);
}

std::vector<std::size_t> Frame::payload_positions() const {
    std::vector<std::size_t> pos;
    pos.reserve(payload_size());
    for (std::size_t i = 0; i < symbols.size(); ++i)
        if (!pilot_mask[i]) pos.push_back(i);
    return pos;
}

std::vector<std::size_t> sample_source(const ShapedPrior& prior, std::size_t count, Rng& rng) {
    if (count == 0)
        throw std::invalid_argument("sample_source: count must be >= 1");
    std::vector<double> cdf(prior.probabilities.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < cdf.size(); ++i) {
        acc += prior.probabilities[i];
        cdf[i] = acc;
    }
    cdf.back() = 1.0;
    std::vector<std::size_t> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        out[i] = static_cast<std::size_t>(it - cdf.begin());
    }
    return out;
}

Frame insert_pilots(const std::vector<std::size_t>& payload_indices, const Constellation& c,
                    int n_pilots, int period, const std::vector<std::size_t>& pilot_set) {
    if (n_pilots < 2)
        throw std::invalid_argument("insert_pilots: need at least 2 pilots per block");
    if (period < 1)
        throw std::invalid_argument("insert_pilots: period must be >= 1");
    if (pilot_set.empty())
        throw std::invalid_argument("insert_pilots: empty pilot symbol set");

    Frame f;
    f.pilot_block_len = n_pilots;
    f.payload_block_len = period;
    f.source_indices = payload_indices;

    const std::size_t n = payload_indices.size();
    const std::size_t blocks = (n + static_cast<std::size_t>(period) - 1) /
                               static_cast<std::size_t>(period);
    f.symbols.reserve(n + blocks * static_cast<std::size_t>(n_pilots));
    f.pilot_mask.reserve(f.symbols.capacity());
    f.pilot_indices.reserve(blocks * static_cast<std::size_t>(n_pilots));

    std::size_t cursor = 0;
    std::size_t pilot_counter = 0;
    while (cursor < n) {
        for (int p = 0; p < n_pilots; ++p) {
            const std::size_t idx = pilot_set[pilot_counter % pilot_set.size()];
            ++pilot_counter;
            f.pilot_indices.push_back(idx);
            f.symbols.push_back(c.points[idx]);
            f.pilot_mask.push_back(true);
        }
        const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(period), n - cursor);
        for (std::size_t i = 0; i < take; ++i) {
            f.symbols.push_back(c.points[payload_indices[cursor + i]]);
            f.pilot_mask.push_back(false);
        }
        cursor += take;
    }
    return f;
}

template <typename T>
static std::vector<T> extract_impl(const Frame& frame, const std::vector<T>& sequence) {
    if (sequence.size() != frame.symbols.size())
        throw std::invalid_argument("extract_payload: length mismatch");
    std::vector<T> out;
    out.reserve(frame.payload_size());
    for (std::size_t i = 0; i < sequence.size(); ++i)
        if (!frame.pilot_mask[i]) out.push_back(sequence[i]);
    return out;
}

std::vector<cplx> extract_payload(const Frame& frame, const std::vector<cplx>& sequence) {
    return extract_impl(frame, sequence);
}

std::vector<double> extract_payload(const Frame& frame, const std::vector<double>& sequence) {
    return extract_impl(frame, sequence);
}

} // namespace baps
