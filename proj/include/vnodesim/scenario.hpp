// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "vnodesim/config.hpp"
#include "vnodesim/metrics.hpp"
#include "vnodesim/process.hpp"
#include "vnodesim/types.hpp"

namespace vnodesim {

enum class action_kind : std::uint8_t {
    spawn,
    launch,
    background,
    exit_proc,
    seq_file_read,
    anon_fill,
    hotplug_cpu,
    snapshot,
};

struct scenario_event {
    tick_t tick = 0;
    action_kind action = action_kind::snapshot;
    proc_id pid = 0;
    std::string profile;       // spawn
    std::uint64_t bytes = 0;   // seq_file_read / anon_fill
    std::uint32_t repeat = 1;
    unsigned cpu = 0;          // hotplug
    bool online = true;
    std::string label;         // snapshot
};

// Line-oriented scenario text:
//   line 1: boot layout string
//   line 2: seed <n>
//   then optional headers:
//     profile <name> [trust=..] [ws=..] [anon=..] [order=seq|rand[:seed]]
//                    [threads=..] [prio=..] [hw=0|1] [root=0|1] [builtin=0|1]
//                    [external_us=..]
//     set <key> <value>          cost/weight overrides
//   then events, ticks nondecreasing:
//     <tick> SPAWN <pid> <profile>
//     <tick> LAUNCH <pid>          (revives a killed app: cold start)
//     <tick> BACKGROUND <pid>
//     <tick> EXIT <pid>
//     <tick> SEQFILEREAD <pid> <bytes> <repeat>
//     <tick> ANONFILL <pid> <bytes> <repeat>
//     <tick> HOTPLUG <cpu> on|off
//     <tick> SNAPSHOT <label>
// '#' starts a comment. Unknown actions are rejected.
struct scenario {
    std::string layout_line;
    std::uint64_t seed = 0;
    sim_config config;
    std::map<std::string, app_profile> profiles;  // includes built-in phone/sms
    std::vector<scenario_event> events;
};

// Built-in profiles: phone (4480-frame working set) and sms (448 frames plus
// a fixed 1.3 s external database constant).
std::map<std::string, app_profile> builtin_profiles();

// Parses and statically validates (layout grammar, seed present, tick order,
// pids spawned before use). Throws sim_error on any violation.
scenario parse_scenario(std::istream& in);
scenario parse_scenario_file(const std::string& path);

// Executes events in tick order and collects the run report. A panic is
// recorded in the report rather than propagated; the partial report is
// still returned. With verify_invariants set, structural invariants are
// checked after every event (and in full at every snapshot); violations
// surface as std::logic_error.
metrics_report run_scenario(const scenario& sc, bool verify_invariants = false);

}  // namespace vnodesim
