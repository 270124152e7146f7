// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vnodesim {

using pfn_t = std::uint32_t;    // physical frame number, 4 KB granularity
using tick_t = std::uint64_t;   // virtual event time
using proc_id = std::uint32_t;

inline constexpr std::uint64_t kPageBytes = 4096;
inline constexpr unsigned kMaxOrder = 10;               // blocks of 1..1024 frames
inline constexpr unsigned kOrderCount = kMaxOrder + 1;
inline constexpr std::uint32_t kMaxOrderFrames = 1u << kMaxOrder;

enum class errc {
    parse_error,
    overcommit,
    duplicate_name,
    unroutable_trust_class,
    alignment_error,
    out_of_range,
    unknown_cpu,
    dead_process,
    double_free,
    misaligned_free,
    scenario_error,
    incompatible_runs,
    oom_panic,
};

const char* errc_name(errc c);

// One exception type for all simulator error conditions; the code
// disambiguates programmatically, the message is for humans.
class sim_error : public std::runtime_error {
public:
    sim_error(errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    errc code() const { return code_; }

private:
    errc code_;
};

inline const char* errc_name(errc c) {
    switch (c) {
    case errc::parse_error: return "parse error";
    case errc::overcommit: return "overcommit";
    case errc::duplicate_name: return "duplicate name";
    case errc::unroutable_trust_class: return "unroutable trust class";
    case errc::alignment_error: return "alignment error";
    case errc::out_of_range: return "out of range";
    case errc::unknown_cpu: return "unknown cpu";
    case errc::dead_process: return "dead process";
    case errc::double_free: return "double free";
    case errc::misaligned_free: return "misaligned free";
    case errc::scenario_error: return "scenario error";
    case errc::incompatible_runs: return "incompatible runs";
    case errc::oom_panic: return "out of memory panic";
    }
    return "unknown";
}

}  // namespace vnodesim
