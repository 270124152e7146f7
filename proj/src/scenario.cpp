// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#include "vnodesim/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "vnodesim/simulation.hpp"

namespace vnodesim {

namespace {

constexpr std::uint32_t kSeqReadFileId = 1;  // file 0 is the launch working set

std::uint64_t to_u64(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw sim_error(errc::scenario_error, std::string("bad ") + what + " '" + s + "'");
    }
}

double to_double(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw sim_error(errc::scenario_error, std::string("bad ") + what + " '" + s + "'");
    }
}

std::uint64_t to_bytes(const std::string& s, const char* what) {
    try {
        return parse_size(s);
    } catch (const sim_error&) {
        throw sim_error(errc::scenario_error, std::string("bad ") + what + " '" + s + "'");
    }
}

void apply_profile_field(app_profile& p, const std::string& key, const std::string& val) {
    if (key == "trust") {
        p.trust = parse_trust_label(val);
    } else if (key == "ws") {
        p.working_set_frames = static_cast<std::uint32_t>(to_u64(val, "working set"));
        if (p.working_set_frames == 0)
            throw sim_error(errc::scenario_error, "working set must be at least one frame");
    } else if (key == "anon") {
        p.anon_fraction = to_double(val, "anon fraction");
        if (p.anon_fraction < 0.0 || p.anon_fraction > 1.0)
            throw sim_error(errc::scenario_error, "anon fraction outside [0,1]");
    } else if (key == "order") {
        if (val == "seq") {
            p.launch_order = touch_order::sequential;
        } else if (val.rfind("rand", 0) == 0) {
            p.launch_order = touch_order::uniform_random;
            if (val.size() > 5 && val[4] == ':') p.touch_seed = to_u64(val.substr(5), "touch seed");
        } else {
            throw sim_error(errc::scenario_error, "bad touch order '" + val + "'");
        }
    } else if (key == "threads") {
        p.thread_count = static_cast<std::uint32_t>(to_u64(val, "thread count"));
    } else if (key == "prio") {
        p.sched_priority = static_cast<int>(to_u64(val, "priority"));
    } else if (key == "hw") {
        p.hw_access = to_u64(val, "hw flag") != 0;
    } else if (key == "root") {
        p.root_privileged = to_u64(val, "root flag") != 0;
    } else if (key == "builtin") {
        p.builtin = to_u64(val, "builtin flag") != 0;
    } else if (key == "external_us") {
        p.external_latency_us = to_u64(val, "external latency");
    } else {
        throw sim_error(errc::scenario_error, "unknown profile field '" + key + "'");
    }
}

void apply_config_override(sim_config& c, const std::string& key, const std::string& val) {
    if (key == "page_load_cost_us") c.page_load_cost_us = to_u64(val, key.c_str());
    else if (key == "base_touch_cost_us") c.base_touch_cost_us = to_u64(val, key.c_str());
    else if (key == "warm_launch_cost_us") c.warm_launch_cost_us = to_u64(val, key.c_str());
    else if (key == "block_op_cost_us") c.block_op_cost_us = to_u64(val, key.c_str());
    else if (key == "frequent_threshold") c.frequent_threshold = static_cast<std::uint32_t>(to_u64(val, key.c_str()));
    else if (key == "high_prio_cutoff") c.high_prio_cutoff = static_cast<int>(to_u64(val, key.c_str()));
    else if (key == "cpu_count") c.cpu_count = static_cast<unsigned>(to_u64(val, key.c_str()));
    else if (key == "max_priority") c.max_priority = static_cast<int>(to_u64(val, key.c_str()));
    else if (key == "w_threads") c.w_threads = to_double(val, key.c_str());
    else if (key == "w_cpu") c.w_cpu = to_double(val, key.c_str());
    else if (key == "w_prio") c.w_prio = to_double(val, key.c_str());
    else if (key == "w_hw") c.w_hw = to_double(val, key.c_str());
    else if (key == "w_recency") c.w_recency = to_double(val, key.c_str());
    else throw sim_error(errc::scenario_error, "unknown setting '" + key + "'");
}

}  // namespace

std::map<std::string, app_profile> builtin_profiles() {
    std::map<std::string, app_profile> out;
    app_profile phone;
    phone.name = "phone";
    phone.trust = trust_label::trusted;
    phone.working_set_frames = 4480;  // 17.5 MB
    phone.anon_fraction = 0.5;
    phone.thread_count = 8;
    phone.sched_priority = 5;
    phone.hw_access = true;
    phone.root_privileged = true;
    phone.builtin = true;
    out.emplace(phone.name, phone);

    app_profile sms;
    sms.name = "sms";
    sms.trust = trust_label::trusted;
    sms.working_set_frames = 448;
    sms.anon_fraction = 0.5;
    sms.thread_count = 4;
    sms.sched_priority = 8;
    sms.root_privileged = true;
    sms.builtin = true;
    sms.external_latency_us = 1300000;  // database read, excluded from improvement
    out.emplace(sms.name, sms);
    return out;
}

scenario parse_scenario(std::istream& in) {
    scenario sc;
    sc.profiles = builtin_profiles();

    std::string line;
    std::size_t lineno = 0;
    bool have_layout = false, have_seed = false, in_events = false;
    std::set<proc_id> spawned;
    tick_t prev_tick = 0;

    auto fail = [&](const std::string& msg) {
        throw sim_error(errc::scenario_error, "line " + std::to_string(lineno) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        std::string t;
        while (ls >> t) tok.push_back(t);
        if (tok.empty()) continue;

        if (!have_layout) {
            sc.layout_line = line;
            parse_boot_layout(sc.layout_line);  // reject bad layouts up front
            have_layout = true;
            continue;
        }
        if (!have_seed) {
            if (tok.size() != 2 || tok[0] != "seed") fail("expected 'seed <n>' after the layout");
            sc.seed = to_u64(tok[1], "seed");
            have_seed = true;
            continue;
        }
        if (tok[0] == "profile") {
            if (in_events) fail("profile lines must precede events");
            if (tok.size() < 2) fail("profile needs a name");
            app_profile& p = sc.profiles[tok[1]];
            p.name = tok[1];
            for (std::size_t i = 2; i < tok.size(); ++i) {
                const auto eq = tok[i].find('=');
                if (eq == std::string::npos) fail("profile field '" + tok[i] + "' needs key=value");
                apply_profile_field(p, tok[i].substr(0, eq), tok[i].substr(eq + 1));
            }
            continue;
        }
        if (tok[0] == "set") {
            if (in_events) fail("set lines must precede events");
            if (tok.size() != 3) fail("expected 'set <key> <value>'");
            apply_config_override(sc.config, tok[1], tok[2]);
            continue;
        }

        // event line
        in_events = true;
        scenario_event ev;
        ev.tick = to_u64(tok[0], "tick");
        if (ev.tick < prev_tick) fail("ticks must be nondecreasing");
        prev_tick = ev.tick;
        if (tok.size() < 2) fail("missing action");
        const std::string& act = tok[1];
        auto need = [&](std::size_t n) {
            if (tok.size() != n) fail("'" + act + "' takes " + std::to_string(n - 2) + " argument(s)");
        };
        auto known_pid = [&](proc_id pid) {
            if (!spawned.count(pid)) fail("pid " + std::to_string(pid) + " not spawned yet");
        };
        if (act == "SPAWN") {
            need(4);
            ev.action = action_kind::spawn;
            ev.pid = static_cast<proc_id>(to_u64(tok[2], "pid"));
            ev.profile = tok[3];
            if (!sc.profiles.count(ev.profile)) fail("unknown profile '" + ev.profile + "'");
            if (!spawned.insert(ev.pid).second) fail("pid " + tok[2] + " spawned twice");
        } else if (act == "LAUNCH" || act == "BACKGROUND" || act == "EXIT") {
            need(3);
            ev.action = act == "LAUNCH" ? action_kind::launch
                        : act == "BACKGROUND" ? action_kind::background
                                              : action_kind::exit_proc;
            ev.pid = static_cast<proc_id>(to_u64(tok[2], "pid"));
            known_pid(ev.pid);
        } else if (act == "SEQFILEREAD" || act == "ANONFILL") {
            need(5);
            ev.action = act == "SEQFILEREAD" ? action_kind::seq_file_read : action_kind::anon_fill;
            ev.pid = static_cast<proc_id>(to_u64(tok[2], "pid"));
            known_pid(ev.pid);
            ev.bytes = to_bytes(tok[3], "byte count");
            ev.repeat = static_cast<std::uint32_t>(to_u64(tok[4], "repeat"));
            if (ev.bytes == 0 || ev.repeat == 0) fail("bytes and repeat must be positive");
        } else if (act == "HOTPLUG") {
            need(4);
            ev.action = action_kind::hotplug_cpu;
            ev.cpu = static_cast<unsigned>(to_u64(tok[2], "cpu"));
            if (tok[3] == "on") ev.online = true;
            else if (tok[3] == "off") ev.online = false;
            else fail("hotplug state must be on or off");
        } else if (act == "SNAPSHOT") {
            need(3);
            ev.action = action_kind::snapshot;
            ev.label = tok[2];
        } else {
            fail("unknown action '" + act + "'");
        }
        sc.events.push_back(std::move(ev));
    }
    if (!have_layout) throw sim_error(errc::scenario_error, "empty scenario: missing layout line");
    if (!have_seed) throw sim_error(errc::scenario_error, "missing 'seed <n>' line");
    return sc;
}

scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sim_error(errc::scenario_error, "cannot open '" + path + "'");
    return parse_scenario(in);
}

namespace {

metrics_report build_report(const simulation& sim, const scenario& sc, std::uint64_t skipped);

}  // namespace

metrics_report run_scenario(const scenario& sc, bool verify_invariants) {
    const memory_layout layout = parse_boot_layout(sc.layout_line);
    simulation sim(layout, sc.config);
    sim.snapshot("initial");
    std::uint64_t skipped = 0;

    try {
        for (const scenario_event& ev : sc.events) {
            sim.advance_to(ev.tick);
            switch (ev.action) {
            case action_kind::spawn:
                sim.spawn(sc.profiles.at(ev.profile), ev.pid);
                break;
            case action_kind::launch:
                sim.launch(ev.pid);  // revives after a kill: the relaunch penalty
                break;
            case action_kind::background:
                if (!sim.proc(ev.pid).alive()) { ++skipped; break; }
                sim.set_background(ev.pid);
                break;
            case action_kind::exit_proc:
                if (!sim.proc(ev.pid).alive()) { ++skipped; break; }
                sim.kill(ev.pid, kill_reason::user_exit);
                break;
            case action_kind::seq_file_read: {
                if (!sim.proc(ev.pid).alive()) { ++skipped; break; }
                const auto frames = static_cast<std::uint32_t>((ev.bytes + kPageBytes - 1) / kPageBytes);
                for (std::uint32_t r = 0; r < ev.repeat && sim.proc(ev.pid).alive(); ++r)
                    for (std::uint32_t off = 0; off < frames && sim.proc(ev.pid).alive(); ++off)
                        sim.touch_file_page(ev.pid, kSeqReadFileId, off);
                break;
            }
            case action_kind::anon_fill: {
                if (!sim.proc(ev.pid).alive()) { ++skipped; break; }
                const auto frames = static_cast<std::uint32_t>((ev.bytes + kPageBytes - 1) / kPageBytes);
                for (std::uint32_t r = 0; r < ev.repeat && sim.proc(ev.pid).alive(); ++r) {
                    const auto base = static_cast<std::uint32_t>(sim.proc(ev.pid).heap.size());
                    for (std::uint32_t i = 0; i < frames && sim.proc(ev.pid).alive(); ++i)
                        sim.touch_heap_page(ev.pid, base + i);
                }
                break;
            }
            case action_kind::hotplug_cpu:
                sim.cpu_hotplug_event(ev.cpu, ev.online);
                break;
            case action_kind::snapshot:
                sim.snapshot(ev.label);
                break;
            }
            if (verify_invariants) sim.check_invariants(ev.action == action_kind::snapshot);
        }
    } catch (const sim_error& e) {
        if (e.code() != errc::oom_panic) throw;
    }
    if (verify_invariants) sim.check_invariants(true);
    return build_report(sim, sc, skipped);
}

namespace {

metrics_report build_report(const simulation& sim, const scenario& sc, std::uint64_t skipped) {
    metrics_report rep;
    rep.layout = format_layout(sim.layout());
    rep.seed = sc.seed;
    rep.block_op_cost_us = sim.config().block_op_cost_us;
    rep.panicked = sim.panicked();
    rep.final_tick = sim.now();
    rep.skipped_events = skipped;

    std::uint64_t order0_total = 0;
    for (const vnode& node : sim.nodes())
        if (!sim.snapshots(node.id).empty())
            order0_total += sim.snapshots(node.id).back().histogram[0];

    for (const vnode& node : sim.nodes()) {
        node_report nr;
        nr.id = node.id;
        nr.name = node.spec.name;
        std::string trust;
        for (std::size_t i = 0; i < node.spec.labels.size(); ++i) {
            if (i) trust += '+';
            trust += trust_label_name(node.spec.labels[i]);
        }
        nr.trust = trust;
        nr.base_pfn = node.base_pfn;
        nr.frames = node.frame_count;
        nr.threshold_bytes = node.threshold_bytes();
        nr.lmk_episodes = node.lmk_episodes;
        nr.oomk_events = node.oomk_events;
        nr.free_series = sim.free_series(node.id);
        nr.snapshots = sim.snapshots(node.id);
        if (order0_total > 0 && !nr.snapshots.empty())
            nr.frag_share_order0 =
                static_cast<double>(nr.snapshots.back().histogram[0]) / order0_total;
        rep.nodes.push_back(std::move(nr));
    }

    for (const auto& [pid, p] : sim.processes()) {
        proc_report pr;
        pr.pid = pid;
        pr.name = p.name();
        pr.trust = trust_label_name(p.trust());
        pr.node_id = p.node_id;
        pr.final_state = proc_state_name(p.state);
        pr.builtin = p.profile.builtin;
        pr.touched = p.touched;
        pr.work_us = p.work_us;
        pr.latency_us = p.latency_us;
        pr.block_ops = p.block_ops;
        pr.reload_lmk_us = p.reload_lmk_us;
        pr.reload_oomk_us = p.reload_oomk_us;
        pr.reload_reclaim_us = p.reload_reclaim_us;
        for (const launch_record& l : sim.launch_log())
            if (l.pid == pid) pr.launches.push_back(l);
        rep.processes.push_back(std::move(pr));

        if (p.trust() == trust_label::untrusted) {
            rep.untrusted_throughput.touched += p.touched;
            rep.untrusted_throughput.work_us += p.work_us;
        }
    }
    if (rep.untrusted_throughput.work_us > 0)
        rep.untrusted_throughput.frames_per_sec =
            static_cast<double>(rep.untrusted_throughput.touched) * 1e6 /
            static_cast<double>(rep.untrusted_throughput.work_us);

    rep.pressure_log = sim.pressure_log();
    rep.kills = sim.kill_log();
    rep.degradation = breakdown(rep);
    return rep;
}

}  // namespace

std::vector<degradation_entry> breakdown(const metrics_report& report) {
    std::vector<degradation_entry> out;
    for (const proc_report& p : report.processes) {
        if (!p.builtin) continue;
        degradation_entry e;
        e.name = p.name;
        const double lmk = static_cast<double>(p.reload_lmk_us);
        const double oomk = static_cast<double>(p.reload_oomk_us);
        const double frag = static_cast<double>(p.reload_reclaim_us) +
                            static_cast<double>(p.block_ops * report.block_op_cost_us);
        const double total = lmk + oomk + frag;
        if (total > 0.0) {
            e.fraction_lmk = lmk / total;
            e.fraction_oomk = oomk / total;
            e.fraction_fragmentation = frag / total;
        }
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace vnodesim
