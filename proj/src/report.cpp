// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#include "vnodesim/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace vnodesim {

using json = nlohmann::ordered_json;

namespace {

json to_json(const pressure_event& e) {
    return {{"episode", e.episode},
            {"tick", e.tick},
            {"node", e.node_id},
            {"stage", pressure_stage_name(e.stage)},
            {"freed", e.frames_recovered},
            {"victims", e.victims}};
}

pressure_stage stage_from(const std::string& s) {
    if (s == "DirectReclaim") return pressure_stage::direct_reclaim;
    if (s == "Lmk") return pressure_stage::lmk;
    if (s == "Oomk") return pressure_stage::oomk;
    if (s == "Panic") return pressure_stage::panic;
    throw sim_error(errc::parse_error, "unknown pressure stage '" + s + "'");
}

kill_reason reason_from(const std::string& s) {
    if (s == "Lmk") return kill_reason::lmk;
    if (s == "Oomk") return kill_reason::oomk;
    if (s == "UserExit") return kill_reason::user_exit;
    throw sim_error(errc::parse_error, "unknown kill reason '" + s + "'");
}

json to_json(const launch_record& l) {
    return {{"tick", l.tick},
            {"pid", l.pid},
            {"time_us", l.time_us},
            {"external_us", l.external_us},
            {"reloaded_frames", l.reloaded_frames},
            {"cold", l.cold}};
}

launch_record launch_from(const json& j) {
    launch_record l;
    l.tick = j.at("tick");
    l.pid = j.at("pid");
    l.time_us = j.at("time_us");
    l.external_us = j.at("external_us");
    l.reloaded_frames = j.at("reloaded_frames");
    l.cold = j.at("cold");
    return l;
}

json to_json(const node_snapshot& s) {
    return {{"label", s.label},
            {"tick", s.tick},
            {"free_bytes", s.free_bytes},
            {"histogram", s.histogram},
            {"effective_cpus", s.effective_cpus},
            {"unserviced", s.unserviced}};
}

node_snapshot snapshot_from(const json& j) {
    node_snapshot s;
    s.label = j.at("label");
    s.tick = j.at("tick");
    s.free_bytes = j.at("free_bytes");
    for (unsigned o = 0; o < kOrderCount; ++o) s.histogram[o] = j.at("histogram").at(o);
    s.effective_cpus = j.at("effective_cpus");
    s.unserviced = j.at("unserviced");
    return s;
}

}  // namespace

std::string serialize_report(const metrics_report& r) {
    json j;
    j["schema_version"] = r.schema_version;
    j["layout"] = r.layout;
    j["seed"] = r.seed;
    j["block_op_cost_us"] = r.block_op_cost_us;
    j["panicked"] = r.panicked;
    j["final_tick"] = r.final_tick;
    j["skipped_events"] = r.skipped_events;

    j["nodes"] = json::array();
    for (const node_report& n : r.nodes) {
        json jn;
        jn["id"] = n.id;
        jn["name"] = n.name;
        jn["trust"] = n.trust;
        jn["base_pfn"] = n.base_pfn;
        jn["frames"] = n.frames;
        jn["threshold_bytes"] = n.threshold_bytes;
        jn["lmk_episodes"] = n.lmk_episodes;
        jn["oomk_events"] = n.oomk_events;
        jn["frag_share_order0"] = n.frag_share_order0;
        jn["free_series"] = json::array();
        for (const free_sample& s : n.free_series)
            jn["free_series"].push_back({{"tick", s.tick}, {"free_bytes", s.free_bytes}});
        jn["snapshots"] = json::array();
        for (const node_snapshot& s : n.snapshots) jn["snapshots"].push_back(to_json(s));
        j["nodes"].push_back(std::move(jn));
    }

    j["processes"] = json::array();
    for (const proc_report& p : r.processes) {
        json jp;
        jp["pid"] = p.pid;
        jp["name"] = p.name;
        jp["trust"] = p.trust;
        jp["node"] = p.node_id;
        jp["final_state"] = p.final_state;
        jp["builtin"] = p.builtin;
        jp["touched"] = p.touched;
        jp["work_us"] = p.work_us;
        jp["latency_us"] = p.latency_us;
        jp["block_ops"] = p.block_ops;
        jp["reload_lmk_us"] = p.reload_lmk_us;
        jp["reload_oomk_us"] = p.reload_oomk_us;
        jp["reload_reclaim_us"] = p.reload_reclaim_us;
        jp["launches"] = json::array();
        for (const launch_record& l : p.launches) jp["launches"].push_back(to_json(l));
        j["processes"].push_back(std::move(jp));
    }

    j["pressure_log"] = json::array();
    for (const pressure_event& e : r.pressure_log) j["pressure_log"].push_back(to_json(e));

    j["kills"] = json::array();
    for (const kill_record& k : r.kills)
        j["kills"].push_back({{"tick", k.tick},
                              {"pid", k.pid},
                              {"name", k.name},
                              {"node", k.node_id},
                              {"reason", kill_reason_name(k.reason)},
                              {"freed_frames", k.freed_frames}});

    j["untrusted_throughput"] = {{"touched", r.untrusted_throughput.touched},
                                 {"work_us", r.untrusted_throughput.work_us},
                                 {"frames_per_sec", r.untrusted_throughput.frames_per_sec}};

    j["degradation"] = json::array();
    for (const degradation_entry& d : r.degradation)
        j["degradation"].push_back({{"name", d.name},
                                    {"fraction_lmk", d.fraction_lmk},
                                    {"fraction_oomk", d.fraction_oomk},
                                    {"fraction_fragmentation", d.fraction_fragmentation}});

    return j.dump(2) + "\n";
}

metrics_report parse_report(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw sim_error(errc::parse_error, std::string("report is not valid JSON: ") + e.what());
    }
    try {
        metrics_report r;
        r.schema_version = j.at("schema_version");
        r.layout = j.at("layout");
        r.seed = j.at("seed");
        r.block_op_cost_us = j.at("block_op_cost_us");
        r.panicked = j.at("panicked");
        r.final_tick = j.at("final_tick");
        r.skipped_events = j.at("skipped_events");

        for (const json& jn : j.at("nodes")) {
            node_report n;
            n.id = jn.at("id");
            n.name = jn.at("name");
            n.trust = jn.at("trust");
            n.base_pfn = jn.at("base_pfn");
            n.frames = jn.at("frames");
            n.threshold_bytes = jn.at("threshold_bytes");
            n.lmk_episodes = jn.at("lmk_episodes");
            n.oomk_events = jn.at("oomk_events");
            n.frag_share_order0 = jn.at("frag_share_order0");
            for (const json& js : jn.at("free_series"))
                n.free_series.push_back({js.at("tick"), js.at("free_bytes")});
            for (const json& js : jn.at("snapshots")) n.snapshots.push_back(snapshot_from(js));
            r.nodes.push_back(std::move(n));
        }

        for (const json& jp : j.at("processes")) {
            proc_report p;
            p.pid = jp.at("pid");
            p.name = jp.at("name");
            p.trust = jp.at("trust");
            p.node_id = jp.at("node");
            p.final_state = jp.at("final_state");
            p.builtin = jp.at("builtin");
            p.touched = jp.at("touched");
            p.work_us = jp.at("work_us");
            p.latency_us = jp.at("latency_us");
            p.block_ops = jp.at("block_ops");
            p.reload_lmk_us = jp.at("reload_lmk_us");
            p.reload_oomk_us = jp.at("reload_oomk_us");
            p.reload_reclaim_us = jp.at("reload_reclaim_us");
            for (const json& jl : jp.at("launches")) p.launches.push_back(launch_from(jl));
            r.processes.push_back(std::move(p));
        }

        for (const json& je : j.at("pressure_log")) {
            pressure_event e;
            e.episode = je.at("episode");
            e.tick = je.at("tick");
            e.node_id = je.at("node");
            e.stage = stage_from(je.at("stage"));
            e.frames_recovered = je.at("freed");
            e.victims = je.at("victims").get<std::vector<proc_id>>();
            r.pressure_log.push_back(std::move(e));
        }

        for (const json& jk : j.at("kills")) {
            kill_record k;
            k.tick = jk.at("tick");
            k.pid = jk.at("pid");
            k.name = jk.at("name");
            k.node_id = jk.at("node");
            k.reason = reason_from(jk.at("reason"));
            k.freed_frames = jk.at("freed_frames");
            r.kills.push_back(std::move(k));
        }

        r.untrusted_throughput.touched = j.at("untrusted_throughput").at("touched");
        r.untrusted_throughput.work_us = j.at("untrusted_throughput").at("work_us");
        r.untrusted_throughput.frames_per_sec = j.at("untrusted_throughput").at("frames_per_sec");

        for (const json& jd : j.at("degradation")) {
            degradation_entry d;
            d.name = jd.at("name");
            d.fraction_lmk = jd.at("fraction_lmk");
            d.fraction_oomk = jd.at("fraction_oomk");
            d.fraction_fragmentation = jd.at("fraction_fragmentation");
            r.degradation.push_back(std::move(d));
        }
        return r;
    } catch (const json::exception& e) {
        throw sim_error(errc::parse_error, std::string("malformed report: ") + e.what());
    }
}

metrics_report load_report_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sim_error(errc::parse_error, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_report(buf.str());
}

std::string buddyinfo_text(const metrics_report& r,
                           const std::optional<std::string>& snapshot_label) {
    std::string out;
    for (const node_report& n : r.nodes) {
        const node_snapshot* snap = nullptr;
        for (const node_snapshot& s : n.snapshots)
            if (!snapshot_label || s.label == *snapshot_label) snap = &s;
        if (!snap)
            throw sim_error(errc::parse_error,
                            snapshot_label ? "no snapshot labeled '" + *snapshot_label + "'"
                                           : "report has no snapshots");
        out += "Node " + std::to_string(n.id) + ", " + n.trust + ":";
        for (unsigned o = 0; o < kOrderCount; ++o)
            out += " " + std::to_string(snap->histogram[o]);
        out += "\n";
    }
    return out;
}

std::string format_pressure_event(const pressure_event& e) {
    std::string out = "tick=" + std::to_string(e.tick) + " node=" + std::to_string(e.node_id) +
                      " stage=" + pressure_stage_name(e.stage) +
                      " freed=" + std::to_string(e.frames_recovered) + " victims=[";
    for (std::size_t i = 0; i < e.victims.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(e.victims[i]);
    }
    return out + "]";
}

namespace {

std::uint64_t final_free(const metrics_report& r) {
    std::uint64_t total = 0;
    for (const node_report& n : r.nodes)
        if (!n.snapshots.empty()) total += n.snapshots.back().free_bytes;
    return total;
}

std::array<std::uint32_t, kOrderCount> final_histogram(const metrics_report& r) {
    std::array<std::uint32_t, kOrderCount> h{};
    for (const node_report& n : r.nodes)
        if (!n.snapshots.empty())
            for (unsigned o = 0; o < kOrderCount; ++o) h[o] += n.snapshots.back().histogram[o];
    return h;
}

}  // namespace

comparison_report compare(const metrics_report& before, const metrics_report& after) {
    std::vector<std::string> names_b, names_a;
    for (const proc_report& p : before.processes) names_b.push_back(p.name);
    for (const proc_report& p : after.processes) names_a.push_back(p.name);
    std::sort(names_b.begin(), names_b.end());
    std::sort(names_a.begin(), names_a.end());
    if (names_b != names_a)
        throw sim_error(errc::incompatible_runs, "the two runs spawn different app sets");

    comparison_report c;
    c.before_panicked = before.panicked;
    c.after_panicked = after.panicked;
    c.free_before = final_free(before);
    c.free_after = final_free(after);
    c.free_delta = static_cast<std::int64_t>(c.free_after) - static_cast<std::int64_t>(c.free_before);
    for (const node_report& n : before.nodes) {
        c.lmk_before += n.lmk_episodes;
        c.oomk_before += n.oomk_events;
    }
    for (const node_report& n : after.nodes) {
        c.lmk_after += n.lmk_episodes;
        c.oomk_after += n.oomk_events;
    }
    c.lmk_delta = static_cast<std::int64_t>(c.lmk_after) - static_cast<std::int64_t>(c.lmk_before);
    c.oomk_delta = static_cast<std::int64_t>(c.oomk_after) - static_cast<std::int64_t>(c.oomk_before);
    c.histogram_before = final_histogram(before);
    c.histogram_after = final_histogram(after);
    for (unsigned o = 0; o < kOrderCount; ++o)
        c.histogram_delta[o] = static_cast<std::int64_t>(c.histogram_after[o]) -
                               static_cast<std::int64_t>(c.histogram_before[o]);

    // Per-app launch-time improvement on the final launch of each run; the
    // external constant (SMS database) is excluded by construction.
    auto last_launch = [](const metrics_report& r, const std::string& name) -> std::uint64_t {
        std::uint64_t t = 0;
        for (const proc_report& p : r.processes)
            if (p.name == name && !p.launches.empty()) t = p.launches.back().time_us;
        return t;
    };
    std::vector<std::string> names = names_b;
    names.erase(std::unique(names.begin(), names.end()), names.end());
    for (const std::string& name : names) {
        app_comparison a;
        a.name = name;
        a.before_us = last_launch(before, name);
        a.after_us = last_launch(after, name);
        if (a.before_us > 0)
            a.improvement_pct = 100.0 *
                                (static_cast<double>(a.before_us) - static_cast<double>(a.after_us)) /
                                static_cast<double>(a.before_us);
        c.apps.push_back(std::move(a));
    }
    return c;
}

std::string format_comparison(const comparison_report& c) {
    std::ostringstream out;
    auto pct1 = [](double v) {
        std::ostringstream s;
        s.setf(std::ios::fixed);
        s.precision(1);
        s << v;
        return s.str();
    };
    out << "                     before          after          delta\n";
    out << "free bytes     " << std::setw(14) << c.free_before << " " << std::setw(14)
        << c.free_after << " " << std::setw(14) << c.free_delta << "\n";
    out << "lmk episodes   " << std::setw(14) << c.lmk_before << " " << std::setw(14)
        << c.lmk_after << " " << std::setw(14) << c.lmk_delta << "\n";
    out << "oomk events    " << std::setw(14) << c.oomk_before << " " << std::setw(14)
        << c.oomk_after << " " << std::setw(14) << c.oomk_delta << "\n";
    out << "free blocks per order (before -> after):\n";
    for (unsigned o = 0; o < kOrderCount; ++o)
        out << "  order " << std::setw(2) << o << ": " << std::setw(8) << c.histogram_before[o]
            << " -> " << std::setw(8) << c.histogram_after[o] << "  (" << std::showpos
            << c.histogram_delta[o] << std::noshowpos << ")\n";
    out << "launch times (last launch, us):\n";
    for (const app_comparison& a : c.apps) {
        out << "  " << a.name << ": " << a.before_us << " -> " << a.after_us << "  improvement ";
        if (a.improvement_pct)
            out << pct1(*a.improvement_pct) << "%";
        else
            out << "n/a";
        out << "\n";
    }
    if (c.before_panicked) out << "warning: before run panicked\n";
    if (c.after_panicked) out << "warning: after run panicked\n";
    return out.str();
}

}  // namespace vnodesim
