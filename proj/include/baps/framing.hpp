// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "baps/constellation.hpp"
#include "baps/rng.hpp"

namespace baps {

/// Transmit frame: [P_1..P_Np | D_1..D_period | P ... D ...]. Every payload
/// block is preceded by a block of exactly pilot_block_len pilots; the last
/// payload block may be shorter than payload_block_len.
struct Frame {
    std::vector<cplx> symbols;
    std::vector<bool> pilot_mask;
    std::vector<std::size_t> source_indices; // constellation index per payload symbol
    std::vector<std::size_t> pilot_indices;  // constellation index per pilot symbol
    int pilot_block_len = 0;                 // N_p
    int payload_block_len = 0;               // period

    std::size_t payload_size() const { return source_indices.size(); }
    std::size_t block_count() const;

    /// Frame positions of payload symbols, in order.
    std::vector<std::size_t> payload_positions() const;
};

/// I.i.d. draws from the prior via inverse-CDF sampling; deterministic given
/// the stream.
std::vector<std::size_t> sample_source(const ShapedPrior& prior, std::size_t count, Rng& rng);

/// Interleaves pilot blocks of n_pilots symbols before every `period`-sized
/// payload block. Pilot values cycle through pilot_set (constellation
/// indices) in order across the whole frame.
Frame insert_pilots(const std::vector<std::size_t>& payload_indices, const Constellation& c,
                    int n_pilots, int period, const std::vector<std::size_t>& pilot_set);

/// Payload symbols of a frame (pilot positions removed).
std::vector<cplx> extract_payload(const Frame& frame, const std::vector<cplx>& sequence);
std::vector<double> extract_payload(const Frame& frame, const std::vector<double>& sequence);

} // namespace baps
