// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#include "vnodesim/vnode.hpp"

#include <algorithm>
#include <cassert>
#include <string>

namespace vnodesim {

unsigned cpu_state::online_count() const {
    return static_cast<unsigned>(std::count(online_.begin(), online_.end(), true));
}

std::uint64_t cpu_state::online_mask() const {
    std::uint64_t mask = 0;
    for (unsigned c = 0; c < online_.size(); ++c)
        if (online_[c]) mask |= 1ull << c;
    return mask;
}

bool cpu_state::is_online(unsigned cpu) const {
    return cpu < online_.size() && online_[cpu];
}

void cpu_state::set_online(unsigned cpu, bool online) {
    if (cpu >= online_.size())
        throw sim_error(errc::unknown_cpu, "cpu " + std::to_string(cpu) + " of " +
                                               std::to_string(online_.size()));
    online_[cpu] = online;
}

void cpu_state::validate_mask(std::uint64_t mask) const {
    const std::uint64_t actual =
        online_.size() >= 64 ? ~0ull : ((1ull << online_.size()) - 1);
    if (mask & ~actual)
        throw sim_error(errc::unknown_cpu, "mask references cpus beyond the actual " +
                                               std::to_string(online_.size()));
}

void vnode::lru_push_hot(pfn_t pfn) {
    page_lru.push_back(pfn);
    lru_pos[pfn] = std::prev(page_lru.end());
}

void vnode::lru_touch(pfn_t pfn) {
    auto it = lru_pos.find(pfn);
    assert(it != lru_pos.end());
    page_lru.splice(page_lru.end(), page_lru, it->second);
    it->second = std::prev(page_lru.end());
}

void vnode::lru_remove(pfn_t pfn) {
    auto it = lru_pos.find(pfn);
    assert(it != lru_pos.end());
    page_lru.erase(it->second);
    lru_pos.erase(it);
}

node_table::node_table(const memory_layout& layout, const cpu_state& cpus) {
    pfn_t base = 0;
    for (std::uint32_t i = 0; i < layout.nodes.size(); ++i) {
        const node_spec& spec = layout.nodes[i];
        const std::uint32_t frames = spec.frames();
        if (frames < kMaxOrderFrames || frames % kMaxOrderFrames != 0)
            throw sim_error(errc::alignment_error,
                            "node '" + spec.name + "' size " + format_size(spec.size_bytes) +
                                " is not a multiple of the max-order block (4M)");
        cpus.validate_mask(spec.cpu_mask);
        nodes_.emplace_back(i, spec, base, frames);
        base += frames;
        range_ends_.push_back(base);
    }
    total_frames_ = base;
    refresh_cpu_masks(cpus);
}

std::uint32_t node_table::node_of(pfn_t pfn) const {
    if (pfn >= total_frames_)
        throw sim_error(errc::out_of_range, "pfn " + std::to_string(pfn) + " beyond " +
                                                std::to_string(total_frames_) + " frames");
    auto it = std::upper_bound(range_ends_.begin(), range_ends_.end(), pfn);
    return static_cast<std::uint32_t>(it - range_ends_.begin());
}

void node_table::set_cpumask(std::uint32_t node_id, std::uint64_t mask, const cpu_state& cpus) {
    cpus.validate_mask(mask);
    nodes_[node_id].spec.cpu_mask = mask;
    refresh_cpu_masks(cpus);
}

void node_table::refresh_cpu_masks(const cpu_state& cpus) {
    const std::uint64_t online = cpus.online_mask();
    for (vnode& n : nodes_) {
        const std::uint64_t declared =
            n.spec.cpu_mask != 0 ? n.spec.cpu_mask
                                 : (cpus.actual_count() >= 64 ? ~0ull
                                                              : ((1ull << cpus.actual_count()) - 1));
        n.effective_cpus = declared & online;
    }
}

}  // namespace vnodesim
