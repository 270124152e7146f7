// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vnodesim/config.hpp"
#include "vnodesim/frame.hpp"
#include "vnodesim/layout.hpp"
#include "vnodesim/types.hpp"

namespace vnodesim {

enum class proc_state : std::uint8_t { foreground, background, dead };
enum class kill_reason : std::uint8_t { lmk, oomk, user_exit };
enum class loss_cause : std::uint8_t { reclaim, lmk, oomk };
enum class touch_order : std::uint8_t { sequential, uniform_random };

const char* proc_state_name(proc_state s);
const char* kill_reason_name(kill_reason r);

// Static description of an application: what it touches at launch and the
// victim-selection inputs. Declared in scenario files; phone and sms carry
// built-in defaults.
struct app_profile {
    std::string name;
    trust_label trust = trust_label::untrusted;
    std::uint32_t working_set_frames = 1;
    double anon_fraction = 0.5;  // share of the working set that is heap
    touch_order launch_order = touch_order::sequential;
    std::uint64_t touch_seed = 0;
    std::uint32_t thread_count = 1;
    int sched_priority = 20;
    bool hw_access = false;
    bool root_privileged = false;
    bool builtin = false;
    std::uint64_t external_latency_us = 0;  // e.g. the SMS database constant

    friend bool operator==(const app_profile&, const app_profile&) = default;
};

struct process {
    proc_id pid = 0;
    app_profile profile;
    std::uint32_t node_id = 0;  // fixed by trust routing for the process lifetime
    proc_state state = proc_state::foreground;
    std::uint64_t cpu_time = 0;  // virtual ticks, one per page touch
    std::uint32_t launch_count = 0;
    tick_t last_foreground_tick = 0;

    std::set<pfn_t> anon_pages;
    std::set<pfn_t> file_pages;

    // Resident page lookup: heap index -> frame, (file, offset) -> frame.
    std::vector<std::optional<pfn_t>> heap;
    std::map<file_ref, pfn_t> file_map;

    // Pages lost to reclaim or a kill; consulted on the next major fault to
    // attribute the reload in the degradation breakdown.
    std::map<std::uint32_t, loss_cause> lost_heap;
    std::map<file_ref, loss_cause> lost_file;

    // Accumulated metrics; persist across kill/relaunch of the same app.
    std::uint64_t latency_us = 0;  // major-fault reload cost charged so far
    std::uint64_t work_us = 0;     // base touch cost + reloads
    std::uint64_t touched = 0;
    std::uint64_t block_ops = 0;  // buddy splits+coalesces during its allocations
    std::uint64_t reload_lmk_us = 0;
    std::uint64_t reload_oomk_us = 0;
    std::uint64_t reload_reclaim_us = 0;

    bool alive() const { return state != proc_state::dead; }
    std::uint32_t resident_frames() const {
        return static_cast<std::uint32_t>(anon_pages.size() + file_pages.size());
    }
    const std::string& name() const { return profile.name; }
    trust_label trust() const { return profile.trust; }
};

// LMK importance: lower score is killed first. Pure function of the process
// snapshot, the current tick and the configured weights.
double lmk_importance(const process& p, tick_t now, const sim_config& cfg);

// OOMK badness: resident frames scaled down by 2^protection; higher badness
// is killed first. Foreground earns one extra protection point.
double oom_badness(const process& p, const sim_config& cfg);

}  // namespace vnodesim
