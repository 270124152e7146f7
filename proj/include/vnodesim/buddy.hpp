// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "vnodesim/types.hpp"

namespace vnodesim {

// Binary buddy allocator over one node's contiguous frame range.
//
// Free blocks are kept in per-order ordered sets of start pfns. Allocation
// takes the lowest-address block at the smallest sufficient order and splits
// downward, keeping the high half free at each split. Frees coalesce with the
// buddy eagerly up to kMaxOrder, so the free lists are always the unique
// maximal aligned decomposition of the free frame set.
class buddy_free_lists {
public:
    buddy_free_lists(pfn_t base, std::uint32_t frame_count);

    // Lowest-address block of the smallest order >= `order`, split down to
    // exactly `order`. nullopt when no block of sufficient order exists
    // (never falls back to another node).
    std::optional<pfn_t> alloc_block(unsigned order);

    // Inverse of alloc_block. Throws double_free / misaligned_free.
    void free_block(pfn_t pfn, unsigned order);

    bool can_alloc(unsigned order) const;
    bool is_free(pfn_t pfn) const;

    std::array<std::uint32_t, kOrderCount> histogram() const;

    std::uint32_t free_frames() const { return free_frames_; }
    pfn_t base() const { return base_; }
    std::uint32_t frame_count() const { return frame_count_; }

    // Lifetime split/coalesce counters, the block-operation cost proxy.
    std::uint64_t split_count() const { return splits_; }
    std::uint64_t coalesce_count() const { return coalesces_; }

    // Asserts alignment, disjointness, the no-free-buddy-pair rule and frame
    // conservation. Test/debug support; throws std::logic_error on violation.
    void check_invariants() const;

private:
    pfn_t base_;
    std::uint32_t frame_count_;
    std::uint32_t free_frames_ = 0;
    std::uint64_t splits_ = 0;
    std::uint64_t coalesces_ = 0;
    std::array<std::set<pfn_t>, kOrderCount> lists_;
    std::vector<bool> free_map_;  // indexed by pfn - base_
};

}  // namespace vnodesim
