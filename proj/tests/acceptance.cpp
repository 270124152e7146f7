// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: runs the desk-scale pressure scenario in partitioned and
// flat layouts plus randomized property sweeps, and prints one pass/fail
// line per criterion. Exit status is the number of failed criteria.
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "vnodesim/report.hpp"
#include "vnodesim/scenario.hpp"
#include "vnodesim/simulation.hpp"

using namespace vnodesim;

namespace {

int g_failures = 0;

void criterion(int n, const std::string& desc, bool pass, const std::string& detail) {
    std::printf("CRITERION %d [%s]: %s (%s)\n", n, pass ? "PASS" : "FAIL", desc.c_str(),
                detail.c_str());
    if (!pass) ++g_failures;
}

const node_report& node_by_name(const metrics_report& r, const std::string& name) {
    for (const node_report& n : r.nodes)
        if (n.name == name) return n;
    throw std::runtime_error("no node " + name);
}

const node_snapshot& snapshot_of(const node_report& n, const std::string& label) {
    for (const node_snapshot& s : n.snapshots)
        if (s.label == label) return s;
    throw std::runtime_error("no snapshot " + label);
}

const proc_report& proc_by_name(const metrics_report& r, const std::string& name) {
    for (const proc_report& p : r.processes)
        if (p.name == name) return p;
    throw std::runtime_error("no process " + name);
}

bool stages_ordered(const std::vector<pressure_event>& log, std::string& why) {
    std::map<std::uint64_t, pressure_stage> last;
    for (const pressure_event& e : log) {
        auto it = last.find(e.episode);
        if (it != last.end() && static_cast<int>(e.stage) < static_cast<int>(it->second)) {
            why = "episode " + std::to_string(e.episode) + " regressed to " +
                  pressure_stage_name(e.stage);
            return false;
        }
        last[e.episode] = e.stage;
        const bool killer = e.stage == pressure_stage::lmk || e.stage == pressure_stage::oomk;
        if (killer != !e.victims.empty()) {
            why = "victims set does not match stage " + std::string(pressure_stage_name(e.stage));
            return false;
        }
    }
    return true;
}

bool victims_in_node(const metrics_report& r, std::string& why) {
    std::map<proc_id, std::uint32_t> home;
    for (const proc_report& p : r.processes) home[p.pid] = p.node_id;
    for (const pressure_event& e : r.pressure_log)
        for (proc_id v : e.victims)
            if (home.at(v) != e.node_id) {
                why = "pid " + std::to_string(v) + " killed from node " +
                      std::to_string(e.node_id);
                return false;
            }
    return true;
}

bool snapshots_consistent(const metrics_report& r, std::string& why) {
    for (const node_report& n : r.nodes) {
        for (const node_snapshot& s : n.snapshots) {
            std::uint64_t frames = 0;
            for (unsigned o = 0; o < kOrderCount; ++o)
                frames += std::uint64_t(s.histogram[o]) << o;
            if (frames * kPageBytes != s.free_bytes) {
                why = "node " + n.name + " snapshot " + s.label + " free bytes disagree";
                return false;
            }
        }
        tick_t prev = 0;
        for (const free_sample& s : n.free_series) {
            if (s.tick < prev) {
                why = "node " + n.name + " free series not monotone";
                return false;
            }
            prev = s.tick;
        }
    }
    return true;
}

// ---- criterion 6: buddy vs bitmap oracle -----------------------------------

bool oracle_equivalence(std::string& detail) {
    buddy_free_lists real(0, 4096);
    oracle::bitmap_buddy ref(0, 4096);
    std::mt19937 rng(20240);
    std::vector<std::pair<pfn_t, unsigned>> live;
    std::uint64_t divergences = 0;

    for (int step = 0; step < 10000; ++step) {
        if (live.empty() || rng() % 100 < 55) {
            const unsigned order = rng() % kOrderCount;
            const auto got = real.alloc_block(order);
            const auto want = ref.alloc(order);
            if (got.has_value() != want.has_value() || (got && *got != *want)) ++divergences;
            if (got) live.push_back({*got, order});
        } else {
            const std::size_t i = rng() % live.size();
            real.free_block(live[i].first, live[i].second);
            ref.free(live[i].first, live[i].second);
            live.erase(live.begin() + i);
        }
    }
    const bool hist_equal = real.histogram() == ref.histogram();
    detail = "10000 ops, " + std::to_string(divergences) + " divergences, final histogram " +
             (hist_equal ? "equal" : "DIFFERS");
    return divergences == 0 && hist_equal;
}

// ---- criterion 7: randomized isolation sweep --------------------------------

struct fuzz_outcome {
    bool invariants_ok = true;
    bool cross_node_ok = true;
    bool stages_ok = true;
    std::string why;
    std::size_t panics = 0;
};

void fuzz_scenario(std::uint64_t seed, fuzz_outcome& out) {
    std::mt19937 rng(seed);
    auto pick = [&](std::uint32_t n) { return static_cast<std::uint32_t>(rng() % n); };

    static const char* kLayouts[] = {
        "total=64M threshold=2M vnode=t:16M:Trusted,u:48M:Untrusted",
        "total=64M threshold=2M vnode=t:12M:Trusted,s:12M:TelecomBuiltin,u:40M:Untrusted",
        "total=48M threshold=1M vnode=r:16M:ResponsiveAware+Trusted,u:32M:Untrusted",
    };
    const memory_layout layout = parse_boot_layout(kLayouts[pick(3)]);
    sim_config cfg;
    cfg.cpu_count = 2 + pick(3);
    simulation sim(layout, cfg);

    std::vector<trust_label> labels;
    for (const auto& [label, node] : layout.trust_routing) labels.push_back(label);

    struct actor {
        proc_id pid;
        bool worker;          // fillers/readers never launch; apps never fill
        std::uint32_t heap_budget = 1024;
        std::uint32_t read_budget = 1024;
        std::uint32_t heap_used = 0;
    };
    std::vector<actor> actors;
    const unsigned proc_count = 3 + pick(5);
    for (unsigned i = 0; i < proc_count; ++i) {
        app_profile prof;
        const bool worker = pick(2) == 0;
        prof.name = (worker ? "worker" : "app") + std::to_string(i);
        prof.trust = labels[pick(static_cast<std::uint32_t>(labels.size()))];
        prof.working_set_frames = worker ? 2048 : 16 + pick(256);
        prof.anon_fraction = (pick(5)) / 4.0;
        prof.launch_order = pick(2) ? touch_order::uniform_random : touch_order::sequential;
        prof.touch_seed = seed * 31 + i;
        prof.sched_priority = static_cast<int>(pick(40));
        prof.hw_access = pick(4) == 0;
        prof.root_privileged = pick(4) == 0;
        sim.spawn(prof, 100 + i);
        actors.push_back({100 + i, worker, 1024, 1024, 0});
    }

    tick_t tick = 1;
    const unsigned ops = 150 + pick(250);
    try {
        for (unsigned op = 0; op < ops; ++op) {
            sim.advance_to(tick);
            tick += 1 + pick(4);
            actor& a = actors[pick(static_cast<std::uint32_t>(actors.size()))];
            const bool alive = sim.proc(a.pid).alive();
            switch (pick(10)) {
            case 0:
            case 1:
            case 2: {  // touch burst
                if (!alive || !a.worker) break;
                if (pick(2) == 0 && a.heap_used < a.heap_budget) {
                    const std::uint32_t n = std::min(1 + pick(256), a.heap_budget - a.heap_used);
                    for (std::uint32_t i = 0; i < n && sim.proc(a.pid).alive(); ++i)
                        sim.touch_heap_page(a.pid, a.heap_used + i);
                    a.heap_used += n;
                } else {
                    const std::uint32_t start = pick(a.read_budget);
                    const std::uint32_t n = 1 + pick(a.read_budget - start);
                    for (std::uint32_t i = 0; i < n && sim.proc(a.pid).alive(); ++i)
                        sim.touch_file_page(a.pid, 1, start + i);
                }
                break;
            }
            case 3:
            case 4:  // launch (revives dead apps)
                if (!a.worker) sim.launch(a.pid);
                break;
            case 5:
            case 6:
                if (alive) sim.set_background(a.pid);
                break;
            case 7:
                if (alive && pick(8) == 0) sim.kill(a.pid, kill_reason::user_exit);
                break;
            case 8:
                sim.cpu_hotplug_event(pick(cfg.cpu_count), pick(2) == 0);
                break;
            case 9:
                sim.snapshot("s" + std::to_string(op));
                break;
            }
            sim.check_invariants(false);
            if (op % 32 == 0) sim.check_invariants(true);
        }
    } catch (const sim_error& e) {
        if (e.code() != errc::oom_panic) throw;
        ++out.panics;
    }
    sim.check_invariants(true);

    std::map<proc_id, std::uint32_t> home;
    for (const auto& [pid, p] : sim.processes()) home[pid] = p.node_id;
    for (const pressure_event& e : sim.pressure_log())
        for (proc_id v : e.victims)
            if (home.at(v) != e.node_id) {
                out.cross_node_ok = false;
                out.why = "seed " + std::to_string(seed) + ": cross-node victim";
            }
    std::string why;
    if (!stages_ordered(sim.pressure_log(), why)) {
        out.stages_ok = false;
        out.why = "seed " + std::to_string(seed) + ": " + why;
    }
}

}  // namespace

int main() {
    const std::string scenario_path = std::string(SCENARIO_DIR) + "/pressure_analog.scn";
    const std::string flat_layout = "total=256M threshold=9M vnode=all:256M:Trusted+Untrusted";

    scenario part_sc = parse_scenario_file(scenario_path);
    scenario flat_sc = part_sc;
    flat_sc.layout_line = flat_layout;

    // per-event conservation checking on both runs feeds criterion 8
    const metrics_report part = run_scenario(part_sc, true);
    const metrics_report flat = run_scenario(flat_sc, true);

    const node_report& trusted = node_by_name(part, "trusted");
    std::uint32_t flat_lmk = 0, flat_oomk = 0;
    for (const node_report& n : flat.nodes) {
        flat_lmk += n.lmk_episodes;
        flat_oomk += n.oomk_events;
    }

    // 1. trusted-node zeros under partitioning; strict positives when flat
    criterion(1, "trusted-node LMK/OOMK zeros vs flat positives",
              trusted.lmk_episodes == 0 && trusted.oomk_events == 0 && flat_lmk >= 1 &&
                  flat_oomk >= 1,
              "trusted lmk=" + std::to_string(trusted.lmk_episodes) +
                  " oomk=" + std::to_string(trusted.oomk_events) +
                  ", flat lmk=" + std::to_string(flat_lmk) +
                  " oomk=" + std::to_string(flat_oomk));

    // 2. free-memory direction at the final snapshot
    const std::uint64_t trusted_free = snapshot_of(trusted, "final").free_bytes;
    std::uint64_t flat_free = 0;
    for (const node_report& n : flat.nodes) flat_free += snapshot_of(n, "final").free_bytes;
    criterion(2, "partitioned trusted free exceeds flat system free",
              trusted_free > flat_free,
              std::to_string(trusted_free / 1048576) + " MB vs " +
                  std::to_string(flat_free / 1048576) + " MB");

    // 3. fragmentation direction at the final snapshot
    const std::uint32_t trusted_h0 = snapshot_of(trusted, "final").histogram[0];
    std::uint32_t flat_h0 = 0, flat_h10 = 0, part_h10 = 0;
    for (const node_report& n : flat.nodes) {
        flat_h0 += snapshot_of(n, "final").histogram[0];
        flat_h10 += snapshot_of(n, "final").histogram[kMaxOrder];
    }
    for (const node_report& n : part.nodes)
        part_h10 += snapshot_of(n, "final").histogram[kMaxOrder];
    criterion(3, "order-0 drop >= 80% in the trusted node, max-order blocks not fewer",
              5 * trusted_h0 <= flat_h0 && part_h10 >= flat_h10,
              "order0 " + std::to_string(trusted_h0) + " vs " + std::to_string(flat_h0) +
                  ", order10 " + std::to_string(part_h10) + " vs " + std::to_string(flat_h10));

    // 4. launch-time recovery
    const proc_report& part_phone = proc_by_name(part, "phone");
    const proc_report& flat_phone = proc_by_name(flat, "phone");
    const launch_record& part_final = part_phone.launches.back();
    const launch_record& warm_ref = part_phone.launches.at(1);  // first warm relaunch
    const launch_record& flat_final = flat_phone.launches.back();
    criterion(4, "partitioned launch equals warm exactly; flat at least 10x warm",
              part_final.reloaded_frames == 0 && part_final.time_us == warm_ref.time_us &&
                  flat_final.time_us >= 10 * warm_ref.time_us,
              "warm=" + std::to_string(warm_ref.time_us) + "us, partitioned final=" +
                  std::to_string(part_final.time_us) + "us, flat final=" +
                  std::to_string(flat_final.time_us) + "us");

    // 5. untrusted throughput bound
    const double part_fps = part.untrusted_throughput.frames_per_sec;
    const double flat_fps = flat.untrusted_throughput.frames_per_sec;
    criterion(5, "untrusted throughput at least 90% of flat", part_fps >= 0.9 * flat_fps,
              std::to_string(part_fps) + " vs " + std::to_string(flat_fps) + " frames/s");

    // 6. buddy oracle equivalence
    {
        std::string detail;
        const bool ok = oracle_equivalence(detail);
        criterion(6, "buddy allocator matches the free-bitmap oracle", ok, detail);
    }

    // 7. randomized isolation sweep, seeds 1..100
    {
        fuzz_outcome out;
        std::size_t ran = 0;
        try {
            for (std::uint64_t seed = 1; seed <= 100; ++seed) {
                fuzz_scenario(seed, out);
                ++ran;
            }
        } catch (const std::exception& e) {
            out.invariants_ok = false;
            out.why = std::string("seed ") + std::to_string(ran + 1) + ": " + e.what();
        }
        criterion(7, "isolation and scoping hold across randomized scenarios",
                  out.invariants_ok && out.cross_node_ok && out.stages_ok,
                  out.invariants_ok && out.cross_node_ok && out.stages_ok
                      ? std::to_string(ran) + " scenarios, " + std::to_string(out.panics) +
                            " contained panics"
                      : out.why);
    }

    // 8. conservation and escalation order on the pressure-analog runs
    {
        std::string why = "per-event conservation verified during both runs";
        bool ok = true;
        for (const metrics_report* r : {&part, &flat}) {
            std::string w;
            if (!stages_ordered(r->pressure_log, w) || !victims_in_node(*r, w) ||
                !snapshots_consistent(*r, w)) {
                ok = false;
                why = w;
            }
        }
        criterion(8, "conservation holds and stages escalate in order", ok, why);
    }

    // 9. determinism: identical scenario, byte-identical report
    {
        const std::string once = serialize_report(part);
        const std::string again = serialize_report(run_scenario(part_sc));
        criterion(9, "two runs of the same scenario serialize identically", once == again,
                  std::to_string(once.size()) + " bytes each");
    }

    return g_failures;
}
