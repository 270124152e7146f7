// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Simulation instance: construction, clock, process life cycle and the
// structural invariant checks. The allocation pipeline and the pressure
// chain live in reclaim.cpp.
#include "vnodesim/simulation.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace vnodesim {

const char* pressure_stage_name(pressure_stage s) {
    switch (s) {
    case pressure_stage::direct_reclaim: return "DirectReclaim";
    case pressure_stage::lmk: return "Lmk";
    case pressure_stage::oomk: return "Oomk";
    case pressure_stage::panic: return "Panic";
    }
    return "?";
}

allocation_request::allocation_request(proc_id pid_, page_kind kind_, std::uint32_t frame_count_,
                                       std::optional<file_ref> file_)
    : pid(pid_), kind(kind_), frame_count(frame_count_), file(std::move(file_)) {
    if (frame_count == 0)
        throw std::invalid_argument("allocation request of 0 frames");
    if (kind == page_kind::page_cache && !file)
        throw std::invalid_argument("page-cache request without a file reference");
}

simulation::simulation(memory_layout layout, sim_config cfg)
    : cfg_(cfg), layout_(std::move(layout)), cpus_(cfg.cpu_count),
      frames_(layout_.total_frames()), nodes_(layout_, cpus_),
      free_series_(nodes_.count()), snapshots_(nodes_.count()) {
    for (vnode& node : nodes_) {
        for (std::uint32_t i = 0; i < node.spec.reserved_frames; ++i) {
            auto pfn = node.buddy.alloc_block(0);
            if (!pfn)
                throw sim_error(errc::alignment_error,
                                "node '" + node.spec.name + "' cannot hold its reserved frames");
            frames_[*pfn].state = frame_state::reserved;
        }
        for (pfn_t pfn = node.base_pfn; pfn < node.base_pfn + node.frame_count; ++pfn)
            frames_[pfn].node_id = node.id;
    }
}

void simulation::advance_to(tick_t t) {
    if (t < now_) throw std::logic_error("clock moved backwards");
    now_ = t;
}

process& simulation::proc(proc_id pid) {
    auto it = procs_.find(pid);
    if (it == procs_.end())
        throw sim_error(errc::scenario_error, "unknown pid " + std::to_string(pid));
    return it->second;
}

const process& simulation::proc(proc_id pid) const {
    auto it = procs_.find(pid);
    if (it == procs_.end())
        throw sim_error(errc::scenario_error, "unknown pid " + std::to_string(pid));
    return it->second;
}

process& simulation::alive_proc(proc_id pid) {
    process& p = proc(pid);
    if (!p.alive())
        throw sim_error(errc::dead_process, p.name() + " (pid " + std::to_string(pid) + ")");
    return p;
}

process& simulation::spawn(const app_profile& profile, proc_id pid) {
    const std::uint32_t node = layout_.route(profile.trust);
    if (procs_.count(pid))
        throw sim_error(errc::scenario_error, "pid " + std::to_string(pid) + " already spawned");
    process p;
    p.pid = pid;
    p.profile = profile;
    p.node_id = node;
    p.state = proc_state::foreground;
    p.last_foreground_tick = now_;
    return procs_.emplace(pid, std::move(p)).first->second;
}

void simulation::fg_transition(process& p) {
    if (p.state == proc_state::background) nodes_[p.node_id].app_lru.remove(p.pid);
    p.state = proc_state::foreground;
    p.last_foreground_tick = now_;
}

void simulation::bg_transition(process& p) {
    if (p.state == proc_state::background) return;
    p.state = proc_state::background;
    p.last_foreground_tick = now_;  // the last tick it was foreground
    // Keep the list ordered by last_foreground_tick; ties keep insertion order.
    auto& lru = nodes_[p.node_id].app_lru;
    auto it = lru.end();
    while (it != lru.begin() &&
           procs_.at(*std::prev(it)).last_foreground_tick > p.last_foreground_tick)
        --it;
    lru.insert(it, p.pid);
}

void simulation::set_foreground(proc_id pid) { fg_transition(alive_proc(pid)); }
void simulation::set_background(proc_id pid) { bg_transition(alive_proc(pid)); }

std::uint64_t simulation::kill(proc_id pid, kill_reason reason) {
    process& p = alive_proc(pid);
    vnode& node = nodes_[p.node_id];

    if (reason == kill_reason::user_exit) {
        // A user exit is not degradation; a later relaunch is a fresh start.
        p.lost_heap.clear();
        p.lost_file.clear();
    } else {
        const loss_cause cause =
            reason == kill_reason::lmk ? loss_cause::lmk : loss_cause::oomk;
        for (std::uint32_t i = 0; i < p.heap.size(); ++i)
            if (p.heap[i]) p.lost_heap[i] = cause;
        for (const auto& [key, pfn] : p.file_map) p.lost_file[key] = cause;
    }

    std::uint64_t freed = 0;
    for (pfn_t pfn : p.anon_pages) {
        node.anon_registry.erase(pfn);
        frames_.set_free(pfn);
        node.buddy.free_block(pfn, 0);
        ++freed;
    }
    for (pfn_t pfn : p.file_pages) {
        node.lru_remove(pfn);
        frames_.set_free(pfn);
        node.buddy.free_block(pfn, 0);
        ++freed;
    }
    p.anon_pages.clear();
    p.file_pages.clear();
    p.heap.clear();
    p.file_map.clear();
    if (p.state == proc_state::background) node.app_lru.remove(pid);
    p.state = proc_state::dead;
    kills_.push_back({now_, pid, p.name(), p.node_id, reason, freed});
    return freed;
}

void simulation::revive(process& p) {
    assert(p.state == proc_state::dead);
    assert(p.anon_pages.empty() && p.file_pages.empty());
    p.state = proc_state::foreground;
    p.last_foreground_tick = now_;
}

std::uint64_t simulation::launch(proc_id pid) {
    process& p = proc(pid);
    const bool cold = !p.alive();
    if (cold) revive(p);
    fg_transition(p);
    ++p.launch_count;

    const std::uint32_t ws = p.profile.working_set_frames;
    const std::uint32_t anon_frames = static_cast<std::uint32_t>(
        ws * p.profile.anon_fraction + 0.5);

    // Working-set keys: heap indices then file 0 offsets, optionally shuffled.
    std::vector<std::uint32_t> order(ws);
    for (std::uint32_t i = 0; i < ws; ++i) order[i] = i;
    if (p.profile.launch_order == touch_order::uniform_random) {
        std::uint64_t s = p.profile.touch_seed * 0x9E3779B97F4A7C15ull + p.launch_count;
        auto next = [&s] {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            return s;
        };
        for (std::uint32_t i = ws; i > 1; --i)
            std::swap(order[i - 1], order[next() % i]);
    }

    std::uint64_t cost = cfg_.warm_launch_cost_us;
    std::uint32_t reloaded = 0;
    for (std::uint32_t key : order) {
        if (!p.alive()) break;  // killed by its own pressure chain
        const std::uint64_t c = key < anon_frames
                                    ? touch_heap_page(pid, key)
                                    : touch_file_page(pid, 0, key - anon_frames);
        if (c > cfg_.base_touch_cost_us) ++reloaded;
        cost += c;
    }
    launches_.push_back({now_, pid, cost, p.profile.external_latency_us, reloaded, cold});
    return cost;
}

void simulation::cpu_hotplug_event(unsigned cpu, bool online) {
    cpus_.set_online(cpu, online);
    nodes_.refresh_cpu_masks(cpus_);
}

void simulation::vnode_set_cpumask(std::uint32_t node_id, std::uint64_t mask) {
    nodes_.set_cpumask(node_id, mask, cpus_);
}

void simulation::snapshot(const std::string& label) {
    for (const vnode& node : nodes_) {
        snapshots_[node.id].push_back({label, now_, node.free_bytes(), node.buddy.histogram(),
                                       node.effective_cpus, node.unserviced()});
        record_free_sample(node);
    }
}

void simulation::record_free_sample(const vnode& node) {
    free_series_[node.id].push_back({now_, node.free_bytes()});
}

void simulation::log_pressure(std::uint64_t episode, const vnode& node, pressure_stage stage,
                              std::uint64_t frames, std::vector<proc_id> victims) {
    pressure_log_.push_back({episode, now_, node.id, stage, frames, std::move(victims)});
    record_free_sample(node);
}

void simulation::check_invariants(bool full) const {
    for (const vnode& node : nodes_) {
        const std::uint64_t occupied = node.anon_registry.size() + node.page_lru.size() +
                                       node.spec.reserved_frames + node.buddy.free_frames();
        if (occupied != node.frame_count)
            throw std::logic_error("conservation violated in node " + node.spec.name);
        if (node.page_lru.size() != node.lru_pos.size())
            throw std::logic_error("page LRU index out of sync");

        tick_t prev = 0;
        for (proc_id pid : node.app_lru) {
            const process& p = procs_.at(pid);
            if (p.state != proc_state::background || p.node_id != node.id)
                throw std::logic_error("app LRU holds a non-background process");
            if (p.last_foreground_tick < prev)
                throw std::logic_error("app LRU not sorted by last foreground tick");
            prev = p.last_foreground_tick;
        }
        for (const auto& [pid, p] : procs_) {
            if (p.alive() && p.node_id == node.id && p.state == proc_state::background &&
                std::find(node.app_lru.begin(), node.app_lru.end(), pid) == node.app_lru.end())
                throw std::logic_error("background process missing from app LRU");
        }
    }
    if (!full) return;

    for (const vnode& node : nodes_) node.buddy.check_invariants();
    for (const auto& [pid, p] : procs_) {
        if (!p.alive()) {
            if (!p.anon_pages.empty() || !p.file_pages.empty())
                throw std::logic_error("dead process retains pages");
            continue;
        }
        if (p.resident_frames() > p.profile.working_set_frames)
            throw std::logic_error("resident pages exceed the declared working set");
        const vnode& home = nodes_[p.node_id];
        for (pfn_t pfn : p.anon_pages) {
            if (nodes_.node_of(pfn) != p.node_id || !home.contains(pfn))
                throw std::logic_error("isolation violated: anon page outside owner node");
            const page_frame& fr = frames_[pfn];
            if (fr.state != frame_state::anonymous || fr.owner != pid)
                throw std::logic_error("frame table disagrees with anon registry");
        }
        for (pfn_t pfn : p.file_pages) {
            if (nodes_.node_of(pfn) != p.node_id || !home.contains(pfn))
                throw std::logic_error("isolation violated: file page outside owner node");
            const page_frame& fr = frames_[pfn];
            if (fr.state != frame_state::page_cache || fr.owner != pid || !fr.file)
                throw std::logic_error("frame table disagrees with file page set");
        }
    }
    for (pfn_t pfn = 0; pfn < frames_.size(); ++pfn) {
        const page_frame& fr = frames_[pfn];
        const vnode& node = nodes_[fr.node_id];
        const bool buddy_free = node.buddy.is_free(pfn);
        if ((fr.state == frame_state::free) != buddy_free)
            throw std::logic_error("frame state / buddy free map mismatch");
        if ((fr.state == frame_state::anonymous || fr.state == frame_state::page_cache) !=
            fr.owner.has_value())
            throw std::logic_error("owner set iff anonymous or page cache");
        if ((fr.state == frame_state::page_cache) != fr.file.has_value())
            throw std::logic_error("file ref set iff page cache");
    }
}

}  // namespace vnodesim
