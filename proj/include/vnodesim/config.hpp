// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace vnodesim {

// Tunables shared by the scoring functions and the cost model. Values are
// calibration constants, overridable per scenario with `set <key> <value>`.
struct sim_config {
    // Cost model. page_load_cost_us is calibrated so a fully evicted
    // 4480-frame working set reloads in 1.120 s; warm_launch_cost_us is the
    // fixed cost of a launch with every frame resident.
    std::uint64_t page_load_cost_us = 250;
    std::uint64_t base_touch_cost_us = 1;
    std::uint64_t warm_launch_cost_us = 105000;
    std::uint64_t block_op_cost_us = 1;  // per buddy split/coalesce, breakdown proxy

    // Importance weights (LMK victim ordering, lower score dies first).
    double w_threads = 1.0;
    double w_cpu = 1.0;
    double w_prio = 2.0;
    double w_hw = 4.0;
    double w_recency = 8.0;
    int max_priority = 100;

    // Badness protection bits (OOMK, higher badness dies first).
    std::uint32_t frequent_threshold = 5;
    int high_prio_cutoff = 10;

    unsigned cpu_count = 2;

    friend bool operator==(const sim_config&, const sim_config&) = default;
};

}  // namespace vnodesim
