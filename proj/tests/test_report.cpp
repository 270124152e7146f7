// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sstream>

#include "vnodesim/report.hpp"
#include "vnodesim/scenario.hpp"

using namespace vnodesim;

namespace {

metrics_report sample_run() {
    std::istringstream in(
        "total=16M threshold=1M vnode=sys:8M:Trusted,apps:8M:Untrusted\n"
        "seed 3\n"
        "profile hog trust=Untrusted ws=2048 anon=1\n"
        "0 SPAWN 1 phone\n"
        "0 SPAWN 2 hog\n"
        "1 LAUNCH 1\n"
        "2 BACKGROUND 1\n"
        "3 ANONFILL 2 7M 1\n"
        "4 LAUNCH 1\n"
        "5 SNAPSHOT end\n");
    return run_scenario(parse_scenario(in));
}

metrics_report single_app_report(const std::string& app, std::uint64_t last_launch_us) {
    metrics_report r;
    r.layout = "total=4M threshold=144K vnode=all:4M:Trusted";
    node_report n;
    n.id = 0;
    n.name = "all";
    n.trust = "Trusted";
    n.frames = 1024;
    n.snapshots.push_back({"end", 10, 1024 * kPageBytes, {}, 0b11, false});
    r.nodes.push_back(std::move(n));
    proc_report p;
    p.pid = 1;
    p.name = app;
    p.trust = "Trusted";
    p.builtin = true;
    p.launches.push_back({10, 1, last_launch_us, 0, 0, false});
    r.processes.push_back(std::move(p));
    return r;
}

}  // namespace

TEST_CASE("report serialization round-trips exactly") {
    const metrics_report rep = sample_run();
    const std::string text = serialize_report(rep);
    const metrics_report back = parse_report(text);
    CHECK(back == rep);
    CHECK(serialize_report(back) == text);
}

TEST_CASE("buddyinfo dump mirrors /proc/buddyinfo per node") {
    std::istringstream in(
        "total=16M vnode=sys:8M:Trusted,apps:8M:Untrusted\n"
        "seed 1\n"
        "0 SNAPSHOT fresh\n");
    const auto rep = run_scenario(parse_scenario(in));
    const std::string text = buddyinfo_text(rep, std::string("fresh"));
    // fresh nodes hold nothing but max-order blocks (2048 frames = 2 blocks)
    CHECK(text ==
          "Node 0, Trusted: 0 0 0 0 0 0 0 0 0 0 2\n"
          "Node 1, Untrusted: 0 0 0 0 0 0 0 0 0 0 2\n");
    CHECK_THROWS_AS(buddyinfo_text(rep, std::string("nosuch")), sim_error);
}

TEST_CASE("pressure events format as the documented log line") {
    pressure_event e;
    e.episode = 3;
    e.tick = 42;
    e.node_id = 1;
    e.stage = pressure_stage::lmk;
    e.frames_recovered = 128;
    e.victims = {7, 9};
    CHECK(format_pressure_event(e) == "tick=42 node=1 stage=Lmk freed=128 victims=[7,9]");
    e.stage = pressure_stage::direct_reclaim;
    e.victims.clear();
    CHECK(format_pressure_event(e) == "tick=42 node=1 stage=DirectReclaim freed=128 victims=[]");
}

TEST_CASE("comparison reproduces the headline launch improvement") {
    const auto before = single_app_report("dialer", 1120000);
    const auto after = single_app_report("dialer", 105000);
    const auto c = compare(before, after);
    REQUIRE(c.apps.size() == 1);
    REQUIRE(c.apps[0].improvement_pct.has_value());
    CHECK(*c.apps[0].improvement_pct == doctest::Approx(90.625));  // "about 91%"
    CHECK(format_comparison(c).find("90.6%") != std::string::npos);
}

TEST_CASE("comparing a report with itself gives zero deltas") {
    const auto rep = sample_run();
    const auto c = compare(rep, rep);
    CHECK(c.free_delta == 0);
    CHECK(c.lmk_delta == 0);
    CHECK(c.oomk_delta == 0);
    for (unsigned o = 0; o < kOrderCount; ++o) CHECK(c.histogram_delta[o] == 0);
    for (const app_comparison& a : c.apps)
        if (a.improvement_pct) CHECK(*a.improvement_pct == 0.0);
}

TEST_CASE("comparison deltas are antisymmetric") {
    const auto before = single_app_report("dialer", 1120000);
    auto after = single_app_report("dialer", 105000);
    after.nodes[0].snapshots[0].free_bytes = 512 * kPageBytes;
    after.nodes[0].lmk_episodes = 3;
    after.nodes[0].snapshots[0].histogram[0] = 17;

    const auto fwd = compare(before, after);
    const auto rev = compare(after, before);
    CHECK(fwd.free_delta == -rev.free_delta);
    CHECK(fwd.lmk_delta == -rev.lmk_delta);
    CHECK(fwd.oomk_delta == -rev.oomk_delta);
    for (unsigned o = 0; o < kOrderCount; ++o)
        CHECK(fwd.histogram_delta[o] == -rev.histogram_delta[o]);
}

TEST_CASE("zero launch time before reports n/a instead of dividing") {
    const auto before = single_app_report("dialer", 0);
    const auto after = single_app_report("dialer", 105000);
    const auto c = compare(before, after);
    CHECK(!c.apps[0].improvement_pct.has_value());
    CHECK(format_comparison(c).find("n/a") != std::string::npos);
}

TEST_CASE("runs with different app sets are incompatible") {
    const auto before = single_app_report("dialer", 100);
    const auto after = single_app_report("browser", 100);
    try {
        compare(before, after);
        FAIL("expected incompatible runs");
    } catch (const sim_error& e) {
        CHECK(e.code() == errc::incompatible_runs);
    }
}

TEST_CASE("degradation breakdown attributes reload latency per cause") {
    metrics_report r;
    proc_report quiet;
    quiet.name = "quiet";
    quiet.builtin = true;
    r.processes.push_back(quiet);

    proc_report lmk_only;
    lmk_only.name = "victim";
    lmk_only.builtin = true;
    lmk_only.reload_lmk_us = 5000;
    r.processes.push_back(lmk_only);

    proc_report mixed;
    mixed.name = "mixed";
    mixed.builtin = true;
    mixed.reload_lmk_us = 300;
    mixed.reload_oomk_us = 200;
    mixed.reload_reclaim_us = 400;
    mixed.block_ops = 100;  // 100 us at the default proxy cost
    r.processes.push_back(mixed);

    proc_report ignored;
    ignored.name = "not-builtin";
    ignored.reload_lmk_us = 999;
    r.processes.push_back(ignored);

    const auto d = breakdown(r);
    REQUIRE(d.size() == 3);
    CHECK(d[0].fraction_lmk == 0.0);
    CHECK(d[0].fraction_oomk == 0.0);
    CHECK(d[0].fraction_fragmentation == 0.0);
    CHECK(d[1].fraction_lmk == 1.0);
    CHECK(d[2].fraction_lmk == doctest::Approx(0.3));
    CHECK(d[2].fraction_oomk == doctest::Approx(0.2));
    CHECK(d[2].fraction_fragmentation == doctest::Approx(0.5));
    CHECK(d[2].fraction_lmk + d[2].fraction_oomk + d[2].fraction_fragmentation ==
          doctest::Approx(1.0).epsilon(1e-9));
}
