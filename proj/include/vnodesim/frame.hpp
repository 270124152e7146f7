// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vnodesim/types.hpp"

namespace vnodesim {

enum class frame_state : std::uint8_t { free, anonymous, page_cache, reserved };
enum class page_kind : std::uint8_t { anonymous, page_cache };

struct file_ref {
    std::uint32_t file_id;
    std::uint32_t page_offset;

    friend auto operator<=>(const file_ref&, const file_ref&) = default;
};

// Per-frame bookkeeping. node_id is fixed at generation time; frames never
// migrate between nodes.
struct page_frame {
    std::uint32_t node_id = 0;
    frame_state state = frame_state::free;
    std::optional<proc_id> owner;
    std::optional<file_ref> file;
    tick_t last_access_tick = 0;
};

class frame_table {
public:
    explicit frame_table(std::uint32_t total_frames) : frames_(total_frames) {}

    page_frame& operator[](pfn_t pfn) { return frames_[pfn]; }
    const page_frame& operator[](pfn_t pfn) const { return frames_[pfn]; }
    std::uint32_t size() const { return static_cast<std::uint32_t>(frames_.size()); }

    void set_owned(pfn_t pfn, frame_state s, proc_id owner, std::optional<file_ref> f,
                   tick_t now) {
        page_frame& fr = frames_[pfn];
        fr.state = s;
        fr.owner = owner;
        fr.file = f;
        fr.last_access_tick = now;
    }

    void set_free(pfn_t pfn) {
        page_frame& fr = frames_[pfn];
        fr.state = frame_state::free;
        fr.owner.reset();
        fr.file.reset();
    }

private:
    std::vector<page_frame> frames_;
};

}  // namespace vnodesim
