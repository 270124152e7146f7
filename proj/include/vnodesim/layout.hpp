// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vnodesim/types.hpp"

namespace vnodesim {

enum class trust_label : std::uint8_t { trusted, untrusted, responsive_aware, telecom_builtin };

const char* trust_label_name(trust_label t);
trust_label parse_trust_label(const std::string& s);

// Fraction of total memory used as the free-memory threshold when the boot
// line gives none: 72 MB on a 2 GB device.
inline constexpr std::uint64_t kDefaultThresholdNum = 72;
inline constexpr std::uint64_t kDefaultThresholdDen = 2048;

struct node_spec {
    std::string name;
    std::uint64_t size_bytes = 0;
    std::vector<trust_label> labels;        // trust classes routed to this node
    std::uint64_t cpu_mask = 0;             // 0 = unset, inherits all-online
    std::uint64_t lmk_threshold_bytes = 0;  // resolved against the global default
    std::uint32_t reserved_frames = 0;      // fixed kernel overhead, not parseable

    std::uint32_t frames() const { return static_cast<std::uint32_t>(size_bytes / kPageBytes); }

    friend bool operator==(const node_spec&, const node_spec&) = default;
};

struct memory_layout {
    std::vector<node_spec> nodes;
    std::uint64_t total_bytes = 0;
    std::uint64_t global_threshold_bytes = 0;
    std::map<trust_label, std::string> trust_routing;  // derived from node labels

    std::uint32_t total_frames() const {
        return static_cast<std::uint32_t>(total_bytes / kPageBytes);
    }
    // Index of the node a trust class routes to; throws unroutable_trust_class.
    std::uint32_t route(trust_label t) const;

    friend bool operator==(const memory_layout&, const memory_layout&) = default;
};

// Boot-parameter grammar:
//   total=<size> [threshold=<size>|<pct>%]
//   vnode=<name>:<size>:<trust>[+<trust>...][:cpus=<list>][:threshold=<size>][,...]
// Size suffixes K/M/G; cpu lists use + and ranges (cpus=0+2-3). Tokens are
// whitespace separated. A single-node layout expresses the flat baseline.
memory_layout parse_boot_layout(const std::string& text);

// Canonical form; parse_boot_layout(format_layout(l)) == l for valid layouts.
std::string format_layout(const memory_layout& l);

std::uint64_t parse_size(const std::string& s);  // "512M" -> bytes
std::string format_size(std::uint64_t bytes);    // bytes -> largest exact unit

}  // namespace vnodesim
