// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vnodesim/config.hpp"
#include "vnodesim/frame.hpp"
#include "vnodesim/layout.hpp"
#include "vnodesim/metrics.hpp"
#include "vnodesim/process.hpp"
#include "vnodesim/types.hpp"
#include "vnodesim/vnode.hpp"

namespace vnodesim {

struct allocation_request {
    allocation_request(proc_id pid_, page_kind kind_, std::uint32_t frame_count_,
                       std::optional<file_ref> file_ = std::nullopt);

    proc_id pid;
    page_kind kind;
    std::uint32_t frame_count;         // order-0 allocations, one per frame
    std::optional<file_ref> file;      // first page; offsets run consecutively
};

// One simulation instance: the physical frame space partitioned into vnodes,
// the processes bound to them, and the pressure machinery that keeps every
// reclaim and kill scoped to a single node. Single-threaded; instances share
// nothing.
class simulation {
public:
    simulation(memory_layout layout, sim_config cfg = {});

    void advance_to(tick_t t);
    tick_t now() const { return now_; }

    // --- process life cycle ---
    process& spawn(const app_profile& profile, proc_id pid);
    void set_background(proc_id pid);
    void set_foreground(proc_id pid);
    std::uint64_t kill(proc_id pid, kill_reason reason);  // freed frame count

    // Foreground transition plus touching the full working set in profile
    // order; returns warm base + touch costs. A dead pid is revived first
    // (cold start), which charges the full reload.
    std::uint64_t launch(proc_id pid);

    process& proc(proc_id pid);
    const process& proc(proc_id pid) const;
    bool has_proc(proc_id pid) const { return procs_.count(pid) != 0; }
    const std::map<proc_id, process>& processes() const { return procs_; }

    // --- allocation pipeline ---
    // Resolves the node from the process, places in-node, pulls frames from
    // the buddy; the slow path runs automatically on shortage. Returns fewer
    // frames than requested only if the requester was killed by its own
    // pressure chain. Throws oom_panic when the chain cannot satisfy it.
    std::vector<pfn_t> allocate_page_vma(const allocation_request& req);

    std::uint64_t touch_heap_page(proc_id pid, std::uint32_t heap_index);
    std::uint64_t touch_file_page(proc_id pid, std::uint32_t file_id, std::uint32_t offset);

    // --- pressure chain, per node; exposed for direct testing ---
    std::uint32_t direct_reclaim(vnode& node, std::uint64_t target_frames);
    std::vector<proc_id> low_memory_killer(vnode& node);
    std::optional<proc_id> oom_killer(vnode& node);

    // Runs the stages in order until free bytes meet the threshold and the
    // pending allocation fits. Throws oom_panic (after logging a Panic stage)
    // when the killer stages run out of candidates.
    void slow_path(vnode& node, std::uint64_t needed_frames = 1);

    // --- cpu / vnode management ---
    void cpu_hotplug_event(unsigned cpu, bool online);
    void vnode_set_cpumask(std::uint32_t node_id, std::uint64_t mask);

    node_table& nodes() { return nodes_; }
    const node_table& nodes() const { return nodes_; }
    cpu_state& cpus() { return cpus_; }
    frame_table& frames() { return frames_; }
    const frame_table& frames() const { return frames_; }
    const memory_layout& layout() const { return layout_; }
    const sim_config& config() const { return cfg_; }
    bool panicked() const { return panicked_; }

    // --- metrics ---
    void snapshot(const std::string& label);
    const std::vector<pressure_event>& pressure_log() const { return pressure_log_; }
    const std::vector<kill_record>& kill_log() const { return kills_; }
    const std::vector<launch_record>& launch_log() const { return launches_; }
    const std::vector<free_sample>& free_series(std::uint32_t node_id) const {
        return free_series_[node_id];
    }
    const std::vector<node_snapshot>& snapshots(std::uint32_t node_id) const {
        return snapshots_[node_id];
    }

    // Structural checks for the test suites: conservation, app-LRU coherence
    // and (with full=true) buddy invariants, frame/owner agreement and the
    // isolation property. Throws std::logic_error on violation.
    void check_invariants(bool full = false) const;

private:
    process& alive_proc(proc_id pid);
    void fg_transition(process& p);
    void bg_transition(process& p);
    void revive(process& p);
    proc_id pick_lmk_victim(const vnode& node) const;
    std::vector<proc_id> lmk_run(vnode& node, std::uint64_t episode);
    std::optional<proc_id> oomk_run(vnode& node, std::uint64_t episode);
    std::optional<pfn_t> allocate_one(process& p, page_kind kind, std::optional<file_ref> f,
                                      std::uint64_t needed_frames = 1);
    void log_pressure(std::uint64_t episode, const vnode& node, pressure_stage stage,
                      std::uint64_t frames, std::vector<proc_id> victims);
    void record_free_sample(const vnode& node);

    sim_config cfg_;
    memory_layout layout_;
    cpu_state cpus_;
    frame_table frames_;
    node_table nodes_;
    std::map<proc_id, process> procs_;
    tick_t now_ = 0;
    std::uint64_t episode_counter_ = 0;
    bool panicked_ = false;

    std::vector<pressure_event> pressure_log_;
    std::vector<kill_record> kills_;
    std::vector<launch_record> launches_;
    std::vector<std::vector<free_sample>> free_series_;
    std::vector<std::vector<node_snapshot>> snapshots_;
};

}  // namespace vnodesim
