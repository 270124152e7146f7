// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vnodesim/metrics.hpp"

namespace vnodesim {

// JSON document per run; field order is fixed so identical runs produce
// byte-identical reports. parse_report(serialize_report(r)) == r.
std::string serialize_report(const metrics_report& r);
metrics_report parse_report(const std::string& json_text);
metrics_report load_report_file(const std::string& path);

// /proc/buddyinfo-style dump of a snapshot (default: the last one):
//   Node <id>, <trust>: <order0> ... <order10>
std::string buddyinfo_text(const metrics_report& r,
                           const std::optional<std::string>& snapshot_label = std::nullopt);

// One pressure event as a log line:
//   tick=<t> node=<id> stage=<s> freed=<n> victims=[pids]
std::string format_pressure_event(const pressure_event& e);

struct app_comparison {
    std::string name;
    std::uint64_t before_us = 0;  // last launch, external excluded
    std::uint64_t after_us = 0;
    std::optional<double> improvement_pct;  // nullopt when before is 0
};

struct comparison_report {
    bool before_panicked = false;
    bool after_panicked = false;
    std::uint64_t free_before = 0;  // final snapshot, summed over nodes
    std::uint64_t free_after = 0;
    std::int64_t free_delta = 0;
    std::int64_t lmk_delta = 0;  // after - before
    std::int64_t oomk_delta = 0;
    std::uint32_t lmk_before = 0, lmk_after = 0;
    std::uint32_t oomk_before = 0, oomk_after = 0;
    std::array<std::uint32_t, kOrderCount> histogram_before{};  // final snapshot, system-wide
    std::array<std::uint32_t, kOrderCount> histogram_after{};
    std::array<std::int64_t, kOrderCount> histogram_delta{};
    std::vector<app_comparison> apps;
};

// Flat-vs-partitioned (before/after) comparison. Throws incompatible_runs
// when the two runs carry different app name sets.
comparison_report compare(const metrics_report& before, const metrics_report& after);

std::string format_comparison(const comparison_report& c);

}  // namespace vnodesim
