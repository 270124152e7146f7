// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#include "vnodesim/buddy.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <string>

namespace vnodesim {

buddy_free_lists::buddy_free_lists(pfn_t base, std::uint32_t frame_count)
    : base_(base), frame_count_(frame_count), free_map_(frame_count, true) {
    // Seed with the maximal aligned decomposition of the whole range.
    pfn_t rel = 0;
    while (rel < frame_count_) {
        unsigned order = kMaxOrder;
        while (order > 0 &&
               ((rel & ((1u << order) - 1)) != 0 || rel + (1u << order) > frame_count_)) {
            --order;
        }
        lists_[order].insert(base_ + rel);
        rel += 1u << order;
    }
    free_frames_ = frame_count_;
}

std::optional<pfn_t> buddy_free_lists::alloc_block(unsigned order) {
    assert(order <= kMaxOrder);
    unsigned o = order;
    while (o <= kMaxOrder && lists_[o].empty()) ++o;
    if (o > kMaxOrder) return std::nullopt;

    pfn_t block = *lists_[o].begin();
    lists_[o].erase(lists_[o].begin());
    while (o > order) {
        --o;
        lists_[o].insert(block + (1u << o));  // high half stays free
        ++splits_;
    }
    const std::uint32_t n = 1u << order;
    for (std::uint32_t i = 0; i < n; ++i) free_map_[block - base_ + i] = false;
    free_frames_ -= n;
    return block;
}

void buddy_free_lists::free_block(pfn_t pfn, unsigned order) {
    assert(order <= kMaxOrder);
    const std::uint32_t n = 1u << order;
    if (pfn < base_ || pfn - base_ + n > frame_count_)
        throw sim_error(errc::out_of_range,
                        "free of pfn " + std::to_string(pfn) + " outside node range");
    if (((pfn - base_) & (n - 1)) != 0)
        throw sim_error(errc::misaligned_free,
                        "pfn " + std::to_string(pfn) + " not aligned to order " +
                            std::to_string(order));
    for (std::uint32_t i = 0; i < n; ++i) {
        if (free_map_[pfn - base_ + i])
            throw sim_error(errc::double_free,
                            "frame " + std::to_string(pfn + i) + " already free");
    }

    for (std::uint32_t i = 0; i < n; ++i) free_map_[pfn - base_ + i] = true;
    free_frames_ += n;

    pfn_t block = pfn;
    unsigned o = order;
    while (o < kMaxOrder) {
        const pfn_t buddy = base_ + ((block - base_) ^ (1u << o));
        auto it = lists_[o].find(buddy);
        if (it == lists_[o].end()) break;
        lists_[o].erase(it);
        block = std::min(block, buddy);
        ++o;
        ++coalesces_;
    }
    lists_[o].insert(block);
}

bool buddy_free_lists::can_alloc(unsigned order) const {
    for (unsigned o = order; o <= kMaxOrder; ++o)
        if (!lists_[o].empty()) return true;
    return false;
}

bool buddy_free_lists::is_free(pfn_t pfn) const {
    assert(pfn >= base_ && pfn - base_ < frame_count_);
    return free_map_[pfn - base_];
}

std::array<std::uint32_t, kOrderCount> buddy_free_lists::histogram() const {
    std::array<std::uint32_t, kOrderCount> counts{};
    for (unsigned o = 0; o < kOrderCount; ++o)
        counts[o] = static_cast<std::uint32_t>(lists_[o].size());
    return counts;
}

void buddy_free_lists::check_invariants() const {
    std::vector<bool> covered(frame_count_, false);
    std::uint64_t total = 0;
    for (unsigned o = 0; o < kOrderCount; ++o) {
        for (pfn_t block : lists_[o]) {
            const std::uint32_t rel = block - base_;
            if ((rel & ((1u << o) - 1)) != 0)
                throw std::logic_error("free block misaligned for its order");
            if (rel + (1u << o) > frame_count_)
                throw std::logic_error("free block crosses node boundary");
            for (std::uint32_t i = 0; i < (1u << o); ++i) {
                if (covered[rel + i]) throw std::logic_error("overlapping free blocks");
                if (!free_map_[rel + i]) throw std::logic_error("free list / bitmap mismatch");
                covered[rel + i] = true;
            }
            if (o < kMaxOrder && lists_[o].count(base_ + (rel ^ (1u << o))) != 0)
                throw std::logic_error("buddy pair both free (missed coalesce)");
            total += 1u << o;
        }
    }
    for (std::uint32_t i = 0; i < frame_count_; ++i)
        if (free_map_[i] && !covered[i]) throw std::logic_error("free frame not in any list");
    if (total != free_frames_) throw std::logic_error("free frame count mismatch");
}

}  // namespace vnodesim
