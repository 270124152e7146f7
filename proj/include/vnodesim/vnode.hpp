// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <list>
#include <set>
#include <unordered_map>
#include <vector>

#include "vnodesim/buddy.hpp"
#include "vnodesim/layout.hpp"
#include "vnodesim/types.hpp"

namespace vnodesim {

// Online/offline bookkeeping for the CPUs the node masks refer to. Hotplug
// has no performance effect in the simulator; counts feed the run report.
class cpu_state {
public:
    explicit cpu_state(unsigned actual = 2) : online_(actual, true) {}

    unsigned actual_count() const { return static_cast<unsigned>(online_.size()); }
    unsigned online_count() const;
    std::uint64_t online_mask() const;
    bool is_online(unsigned cpu) const;

    void set_online(unsigned cpu, bool online);  // throws unknown_cpu
    void validate_mask(std::uint64_t mask) const;

private:
    std::vector<bool> online_;
};

struct vnode {
    std::uint32_t id;
    node_spec spec;
    pfn_t base_pfn;
    std::uint32_t frame_count;
    buddy_free_lists buddy;

    // Recency-ordered resident page-cache pfns; front is coldest.
    std::list<pfn_t> page_lru;
    std::unordered_map<pfn_t, std::list<pfn_t>::iterator> lru_pos;
    std::set<pfn_t> anon_registry;

    // Background processes, oldest last_foreground_tick first.
    std::list<proc_id> app_lru;

    std::uint64_t effective_cpus = 0;  // spec mask (or all) ∩ online
    std::uint32_t lmk_episodes = 0;
    std::uint32_t oomk_events = 0;

    vnode(std::uint32_t id_, node_spec spec_, pfn_t base, std::uint32_t frames)
        : id(id_), spec(std::move(spec_)), base_pfn(base), frame_count(frames),
          buddy(base, frames) {}

    std::uint64_t free_bytes() const { return std::uint64_t(buddy.free_frames()) * kPageBytes; }
    std::uint64_t threshold_bytes() const { return spec.lmk_threshold_bytes; }
    bool contains(pfn_t pfn) const { return pfn >= base_pfn && pfn - base_pfn < frame_count; }
    bool unserviced() const { return effective_cpus == 0; }

    void lru_push_hot(pfn_t pfn);
    void lru_touch(pfn_t pfn);
    void lru_remove(pfn_t pfn);
};

// Owns the vnodes generated from a layout plus the pfn -> node range table.
class node_table {
public:
    // Assigns contiguous frame ranges in declaration order from pfn 0 and
    // seeds each node's buddy with maximal blocks. Node sizes must be
    // multiples of the max-order block (4 MB) and at least one block.
    node_table(const memory_layout& layout, const cpu_state& cpus);

    std::uint32_t node_of(pfn_t pfn) const;  // throws out_of_range

    vnode& operator[](std::uint32_t id) { return nodes_[id]; }
    const vnode& operator[](std::uint32_t id) const { return nodes_[id]; }
    std::uint32_t count() const { return static_cast<std::uint32_t>(nodes_.size()); }
    std::uint32_t total_frames() const { return total_frames_; }

    auto begin() { return nodes_.begin(); }
    auto end() { return nodes_.end(); }
    auto begin() const { return nodes_.begin(); }
    auto end() const { return nodes_.end(); }

    void set_cpumask(std::uint32_t node_id, std::uint64_t mask, const cpu_state& cpus);
    void refresh_cpu_masks(const cpu_state& cpus);

private:
    std::vector<vnode> nodes_;
    std::vector<pfn_t> range_ends_;  // exclusive end pfn per node, ascending
    std::uint32_t total_frames_ = 0;
};

}  // namespace vnodesim
