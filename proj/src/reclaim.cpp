// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
//
// The allocation pipeline and the per-node pressure escalation chain:
// direct reclaim -> LMK -> OOMK -> panic. Nothing here ever touches a node
// other than the one the request resolved to.
#include <cassert>

#include "vnodesim/simulation.hpp"

namespace vnodesim {

std::vector<pfn_t> simulation::allocate_page_vma(const allocation_request& req) {
    process& p = alive_proc(req.pid);
    std::vector<pfn_t> out;
    out.reserve(req.frame_count);
    for (std::uint32_t i = 0; i < req.frame_count; ++i) {
        if (!p.alive()) break;  // the requester lost its own pressure gamble
        std::optional<file_ref> f;
        if (req.kind == page_kind::page_cache)
            f = file_ref{req.file->file_id, req.file->page_offset + i};
        auto pfn = allocate_one(p, req.kind, f, req.frame_count - i);
        if (!pfn) break;
        out.push_back(*pfn);
    }
    return out;
}

std::optional<pfn_t> simulation::allocate_one(process& p, page_kind kind,
                                              std::optional<file_ref> f,
                                              std::uint64_t needed_frames) {
    vnode& node = nodes_[p.node_id];
    const std::uint64_t ops_before = node.buddy.split_count() + node.buddy.coalesce_count();

    if (node.free_bytes() < node.threshold_bytes() ||
        node.buddy.free_frames() < needed_frames)
        slow_path(node, needed_frames);
    if (!p.alive()) return std::nullopt;  // chosen as its own pressure victim

    // slow_path either satisfied the request or threw
    const pfn_t pfn = node.buddy.alloc_block(0).value();
    if (kind == page_kind::anonymous) {
        frames_.set_owned(pfn, frame_state::anonymous, p.pid, std::nullopt, now_);
        node.anon_registry.insert(pfn);
        p.anon_pages.insert(pfn);
    } else {
        frames_.set_owned(pfn, frame_state::page_cache, p.pid, f, now_);
        node.lru_push_hot(pfn);
        p.file_pages.insert(pfn);
        p.file_map[*f] = pfn;
    }
    p.block_ops += node.buddy.split_count() + node.buddy.coalesce_count() - ops_before;
    return pfn;
}

std::uint64_t simulation::touch_heap_page(proc_id pid, std::uint32_t heap_index) {
    process& p = alive_proc(pid);
    if (heap_index >= p.heap.size()) p.heap.resize(heap_index + 1);
    std::uint64_t cost = cfg_.base_touch_cost_us;
    if (p.heap[heap_index]) {
        frames_[*p.heap[heap_index]].last_access_tick = now_;
    } else {
        auto pfn = allocate_one(p, page_kind::anonymous, std::nullopt);
        if (!pfn) return 0;  // killed while faulting; nothing was touched
        p.heap[heap_index] = *pfn;
        cost += cfg_.page_load_cost_us;
        p.latency_us += cfg_.page_load_cost_us;
        auto lost = p.lost_heap.find(heap_index);
        if (lost != p.lost_heap.end()) {
            switch (lost->second) {
            case loss_cause::lmk: p.reload_lmk_us += cfg_.page_load_cost_us; break;
            case loss_cause::oomk: p.reload_oomk_us += cfg_.page_load_cost_us; break;
            case loss_cause::reclaim: p.reload_reclaim_us += cfg_.page_load_cost_us; break;
            }
            p.lost_heap.erase(lost);
        }
    }
    ++p.touched;
    ++p.cpu_time;
    p.work_us += cost;
    return cost;
}

std::uint64_t simulation::touch_file_page(proc_id pid, std::uint32_t file_id,
                                          std::uint32_t offset) {
    process& p = alive_proc(pid);
    const file_ref key{file_id, offset};
    std::uint64_t cost = cfg_.base_touch_cost_us;
    auto it = p.file_map.find(key);
    if (it != p.file_map.end()) {
        nodes_[p.node_id].lru_touch(it->second);
        frames_[it->second].last_access_tick = now_;
    } else {
        auto pfn = allocate_one(p, page_kind::page_cache, key);
        if (!pfn) return 0;
        cost += cfg_.page_load_cost_us;
        p.latency_us += cfg_.page_load_cost_us;
        auto lost = p.lost_file.find(key);
        if (lost != p.lost_file.end()) {
            switch (lost->second) {
            case loss_cause::lmk: p.reload_lmk_us += cfg_.page_load_cost_us; break;
            case loss_cause::oomk: p.reload_oomk_us += cfg_.page_load_cost_us; break;
            case loss_cause::reclaim: p.reload_reclaim_us += cfg_.page_load_cost_us; break;
            }
            p.lost_file.erase(lost);
        }
    }
    ++p.touched;
    ++p.cpu_time;
    p.work_us += cost;
    return cost;
}

std::uint32_t simulation::direct_reclaim(vnode& node, std::uint64_t target_frames) {
    std::uint32_t freed = 0;
    while (freed < target_frames && !node.page_lru.empty()) {
        const pfn_t pfn = node.page_lru.front();  // coldest first
        const page_frame& fr = frames_[pfn];
        process& owner = procs_.at(*fr.owner);
        owner.file_pages.erase(pfn);
        owner.file_map.erase(*fr.file);
        owner.lost_file[*fr.file] = loss_cause::reclaim;  // next touch is a major fault
        node.lru_remove(pfn);
        frames_.set_free(pfn);
        node.buddy.free_block(pfn, 0);
        ++freed;
    }
    return freed;
}

proc_id simulation::pick_lmk_victim(const vnode& node) const {
    // App-LRU order; the oldest tick group breaks ties by lower importance,
    // then lower pid.
    assert(!node.app_lru.empty());
    const tick_t oldest = procs_.at(node.app_lru.front()).last_foreground_tick;
    proc_id best = node.app_lru.front();
    double best_score = lmk_importance(procs_.at(best), now_, cfg_);
    for (proc_id pid : node.app_lru) {
        const process& p = procs_.at(pid);
        if (p.last_foreground_tick != oldest) break;
        const double score = lmk_importance(p, now_, cfg_);
        if (score < best_score || (score == best_score && pid < best)) {
            best = pid;
            best_score = score;
        }
    }
    return best;
}

std::vector<proc_id> simulation::lmk_run(vnode& node, std::uint64_t episode) {
    std::vector<proc_id> victims;
    std::uint64_t freed = 0;
    while (node.free_bytes() < node.threshold_bytes() && !node.app_lru.empty()) {
        const proc_id victim = pick_lmk_victim(node);
        freed += kill(victim, kill_reason::lmk);
        victims.push_back(victim);
    }
    if (!victims.empty()) {
        ++node.lmk_episodes;
        log_pressure(episode, node, pressure_stage::lmk, freed, victims);
    }
    return victims;
}

std::vector<proc_id> simulation::low_memory_killer(vnode& node) {
    return lmk_run(node, ++episode_counter_);
}

std::optional<proc_id> simulation::oomk_run(vnode& node, std::uint64_t episode) {
    // Background candidates first; foreground only when none exist.
    const process* best = nullptr;
    double best_badness = 0.0;
    auto consider = [&](const process& p) {
        const double b = oom_badness(p, cfg_);
        if (!best || b > best_badness ||
            (b == best_badness && (p.resident_frames() > best->resident_frames() ||
                                   (p.resident_frames() == best->resident_frames() &&
                                    p.pid < best->pid)))) {
            best = &p;
            best_badness = b;
        }
    };
    for (const auto& [pid, p] : procs_)
        if (p.state == proc_state::background && p.node_id == node.id) consider(p);
    if (!best) {
        for (const auto& [pid, p] : procs_)
            if (p.state == proc_state::foreground && p.node_id == node.id) consider(p);
    }
    if (!best) return std::nullopt;

    const proc_id victim = best->pid;
    const std::uint64_t freed = kill(victim, kill_reason::oomk);
    ++node.oomk_events;
    log_pressure(episode, node, pressure_stage::oomk, freed, {victim});
    return victim;
}

std::optional<proc_id> simulation::oom_killer(vnode& node) {
    return oomk_run(node, ++episode_counter_);
}

void simulation::slow_path(vnode& node, std::uint64_t needed_frames) {
    auto satisfied = [&] {
        return node.free_bytes() >= node.threshold_bytes() &&
               node.buddy.free_frames() >= needed_frames;
    };
    if (satisfied()) return;
    const std::uint64_t episode = ++episode_counter_;

    // Stage 1: reclaim enough cache to restore the watermark and fit the
    // pending allocation.
    {
        const std::uint64_t thr_frames =
            (node.threshold_bytes() + kPageBytes - 1) / kPageBytes;
        const std::uint64_t free = node.buddy.free_frames();
        const std::uint64_t deficit = needed_frames > free ? needed_frames - free : 0;
        const std::uint64_t restore = thr_frames > free ? thr_frames - free : 0;
        const std::uint32_t freed = direct_reclaim(node, std::max(deficit, restore));
        log_pressure(episode, node, pressure_stage::direct_reclaim, freed, {});
    }
    if (satisfied()) return;

    // Stage 2: kill background apps in LRU order until the watermark holds.
    if (node.free_bytes() < node.threshold_bytes()) lmk_run(node, episode);
    if (satisfied()) return;

    // Stage 3: badness-ordered kills until the allocation fits.
    while (!satisfied()) {
        if (!oomk_run(node, episode)) {
            log_pressure(episode, node, pressure_stage::panic, 0, {});
            panicked_ = true;
            throw sim_error(errc::oom_panic,
                            "node '" + node.spec.name + "' has no killable process left");
        }
    }
}

}  // namespace vnodesim
