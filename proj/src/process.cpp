// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#include "vnodesim/process.hpp"

#include <algorithm>
#include <cmath>

namespace vnodesim {

const char* proc_state_name(proc_state s) {
    switch (s) {
    case proc_state::foreground: return "Foreground";
    case proc_state::background: return "Background";
    case proc_state::dead: return "Dead";
    }
    return "?";
}

const char* kill_reason_name(kill_reason r) {
    switch (r) {
    case kill_reason::lmk: return "Lmk";
    case kill_reason::oomk: return "Oomk";
    case kill_reason::user_exit: return "UserExit";
    }
    return "?";
}

double lmk_importance(const process& p, tick_t now, const sim_config& cfg) {
    const double threads = std::min<std::uint32_t>(p.profile.thread_count, 32) / 32.0;
    const double cpu =
        now == 0 ? 0.0
                 : std::min(1.0, static_cast<double>(p.cpu_time) / static_cast<double>(now));
    const int prio = std::clamp(p.profile.sched_priority, 0, cfg.max_priority);
    const double priority = static_cast<double>(cfg.max_priority - prio) / cfg.max_priority;
    const double hw = p.profile.hw_access ? 1.0 : 0.0;
    const double recency =
        now == 0 ? 0.0
                 : static_cast<double>(p.last_foreground_tick) / static_cast<double>(now);
    return cfg.w_threads * threads + cfg.w_cpu * cpu + cfg.w_prio * priority + cfg.w_hw * hw +
           cfg.w_recency * recency;
}

double oom_badness(const process& p, const sim_config& cfg) {
    int protection = 0;
    if (p.profile.root_privileged) ++protection;
    if (p.profile.hw_access) ++protection;
    if (p.launch_count >= cfg.frequent_threshold) ++protection;
    if (p.profile.sched_priority <= cfg.high_prio_cutoff) ++protection;
    if (p.state == proc_state::foreground) ++protection;
    return std::ldexp(static_cast<double>(p.resident_frames()), -protection);
}

}  // namespace vnodesim
