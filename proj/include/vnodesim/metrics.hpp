// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vnodesim/process.hpp"
#include "vnodesim/types.hpp"

namespace vnodesim {

enum class pressure_stage : std::uint8_t { direct_reclaim, lmk, oomk, panic };

const char* pressure_stage_name(pressure_stage s);

// One slow-path stage execution. Stages within an episode appear in
// DirectReclaim -> Lmk -> Oomk -> Panic order; victims are nonempty exactly
// for the killer stages.
struct pressure_event {
    std::uint64_t episode = 0;
    tick_t tick = 0;
    std::uint32_t node_id = 0;
    pressure_stage stage = pressure_stage::direct_reclaim;
    std::uint64_t frames_recovered = 0;
    std::vector<proc_id> victims;

    friend bool operator==(const pressure_event&, const pressure_event&) = default;
};

struct kill_record {
    tick_t tick = 0;
    proc_id pid = 0;
    std::string name;
    std::uint32_t node_id = 0;
    kill_reason reason = kill_reason::user_exit;
    std::uint64_t freed_frames = 0;

    friend bool operator==(const kill_record&, const kill_record&) = default;
};

struct launch_record {
    tick_t tick = 0;
    proc_id pid = 0;
    std::uint64_t time_us = 0;      // warm base + touch costs, external excluded
    std::uint64_t external_us = 0;  // fixed per-launch constant (SMS database)
    std::uint32_t reloaded_frames = 0;
    bool cold = false;  // revived from a kill

    friend bool operator==(const launch_record&, const launch_record&) = default;
};

struct free_sample {
    tick_t tick = 0;
    std::uint64_t free_bytes = 0;

    friend bool operator==(const free_sample&, const free_sample&) = default;
};

struct node_snapshot {
    std::string label;
    tick_t tick = 0;
    std::uint64_t free_bytes = 0;
    std::array<std::uint32_t, kOrderCount> histogram{};
    std::uint64_t effective_cpus = 0;
    bool unserviced = false;

    friend bool operator==(const node_snapshot&, const node_snapshot&) = default;
};

struct node_report {
    std::uint32_t id = 0;
    std::string name;
    std::string trust;  // labels joined with '+'
    pfn_t base_pfn = 0;
    std::uint32_t frames = 0;
    std::uint64_t threshold_bytes = 0;
    std::uint32_t lmk_episodes = 0;
    std::uint32_t oomk_events = 0;
    double frag_share_order0 = 0.0;  // share of total order-0 free blocks, final snapshot
    std::vector<free_sample> free_series;
    std::vector<node_snapshot> snapshots;

    friend bool operator==(const node_report&, const node_report&) = default;
};

struct proc_report {
    proc_id pid = 0;
    std::string name;
    std::string trust;
    std::uint32_t node_id = 0;
    std::string final_state;
    bool builtin = false;
    std::uint64_t touched = 0;
    std::uint64_t work_us = 0;
    std::uint64_t latency_us = 0;
    std::uint64_t block_ops = 0;
    std::uint64_t reload_lmk_us = 0;
    std::uint64_t reload_oomk_us = 0;
    std::uint64_t reload_reclaim_us = 0;
    std::vector<launch_record> launches;

    friend bool operator==(const proc_report&, const proc_report&) = default;
};

struct degradation_entry {
    std::string name;
    double fraction_lmk = 0.0;
    double fraction_oomk = 0.0;
    double fraction_fragmentation = 0.0;

    friend bool operator==(const degradation_entry&, const degradation_entry&) = default;
};

struct throughput_report {
    std::uint64_t touched = 0;
    std::uint64_t work_us = 0;
    double frames_per_sec = 0.0;

    friend bool operator==(const throughput_report&, const throughput_report&) = default;
};

struct metrics_report {
    std::uint32_t schema_version = 1;
    std::string layout;  // canonical echo of the boot line
    std::uint64_t seed = 0;
    std::uint64_t block_op_cost_us = 1;  // breakdown proxy cost echo
    bool panicked = false;
    tick_t final_tick = 0;
    std::uint64_t skipped_events = 0;  // events targeting already-dead processes
    std::vector<node_report> nodes;
    std::vector<proc_report> processes;
    std::vector<pressure_event> pressure_log;
    std::vector<kill_record> kills;
    throughput_report untrusted_throughput;
    std::vector<degradation_entry> degradation;

    friend bool operator==(const metrics_report&, const metrics_report&) = default;
};

// Per built-in app, the share of reload latency attributable to LMK kills,
// OOMK kills, and reclaim plus the buddy block-operation proxy. Fractions sum
// to 1 when any degradation was observed, else all zero.
std::vector<degradation_entry> breakdown(const metrics_report& report);

}  // namespace vnodesim
