// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "vnodesim/layout.hpp"

using namespace vnodesim;

TEST_CASE("the reference two-node layout parses to the documented frame counts") {
    const auto l = parse_boot_layout(
        "total=2G threshold=72M vnode=trusted:512M:Trusted,untrusted:1536M:Untrusted");
    REQUIRE(l.nodes.size() == 2);
    CHECK(l.nodes[0].frames() == 131072);
    CHECK(l.nodes[1].frames() == 393216);
    CHECK(l.total_frames() == 524288);
    CHECK(l.global_threshold_bytes == 72ull * 1024 * 1024);
    CHECK(l.route(trust_label::trusted) == 0);
    CHECK(l.route(trust_label::untrusted) == 1);
}

TEST_CASE("single node spans all frames") {
    const auto l = parse_boot_layout("total=2G vnode=all:2G:Trusted");
    REQUIRE(l.nodes.size() == 1);
    CHECK(l.nodes[0].frames() == 524288);
}

TEST_CASE("size mismatch is an overcommit error") {
    try {
        parse_boot_layout("total=1G vnode=a:512M:Trusted,b:768M:Untrusted");
        FAIL("expected overcommit");
    } catch (const sim_error& e) {
        CHECK(e.code() == errc::overcommit);
    }
}

TEST_CASE("duplicate node names are rejected") {
    try {
        parse_boot_layout("total=1G vnode=a:512M:Trusted,a:512M:Untrusted");
        FAIL("expected duplicate name");
    } catch (const sim_error& e) {
        CHECK(e.code() == errc::duplicate_name);
    }
}

TEST_CASE("a trust class may route to only one node") {
    try {
        parse_boot_layout("total=1G vnode=a:512M:Trusted,b:512M:Trusted");
        FAIL("expected unroutable trust class");
    } catch (const sim_error& e) {
        CHECK(e.code() == errc::unroutable_trust_class);
    }
}

TEST_CASE("grammar violations are parse errors") {
    const char* bad[] = {
        "",
        "vnode=a:1G:Trusted",                       // missing total
        "total=1G",                                 // missing vnode
        "total=1G vnode=a:1G:Wizard",               // unknown trust label
        "total=1G vnode=a:1G",                      // missing trust
        "total=1G vnode=a:1G:Trusted junk=1",       // unknown token
        "total=x vnode=a:1G:Trusted",               // bad size
        "total=1G threshold=5x% vnode=a:1G:Trusted",
    };
    for (const char* text : bad) {
        try {
            parse_boot_layout(text);
            FAIL_CHECK("accepted: ", text);
        } catch (const sim_error& e) {
            CHECK(e.code() == errc::parse_error);
        }
    }
}

TEST_CASE("default threshold scales with total memory") {
    // 72 MB on 2 GB; the same ratio gives 9 MB on 256 MB
    const auto big = parse_boot_layout("total=2G vnode=a:2G:Trusted");
    CHECK(big.global_threshold_bytes == 72ull * 1024 * 1024);
    const auto small = parse_boot_layout("total=256M vnode=a:256M:Trusted");
    CHECK(small.global_threshold_bytes == 9ull * 1024 * 1024);
}

TEST_CASE("threshold accepts absolute and percent forms") {
    const auto abs = parse_boot_layout("total=256M threshold=8M vnode=a:256M:Trusted");
    CHECK(abs.global_threshold_bytes == 8ull * 1024 * 1024);
    const auto pct = parse_boot_layout("total=2G threshold=3.515625% vnode=a:2G:Trusted");
    CHECK(pct.global_threshold_bytes == 72ull * 1024 * 1024);
}

TEST_CASE("per-node threshold override and multi-label routing") {
    const auto l = parse_boot_layout(
        "total=256M threshold=9M "
        "vnode=sys:64M:Trusted+ResponsiveAware:threshold=4M,apps:192M:Untrusted:cpus=0-1");
    CHECK(l.nodes[0].lmk_threshold_bytes == 4ull * 1024 * 1024);
    CHECK(l.nodes[1].lmk_threshold_bytes == 9ull * 1024 * 1024);
    CHECK(l.nodes[1].cpu_mask == 0b11);
    CHECK(l.route(trust_label::trusted) == 0);
    CHECK(l.route(trust_label::responsive_aware) == 0);
    CHECK(l.route(trust_label::untrusted) == 1);
}

TEST_CASE("device-class layouts are pure configuration") {
    // isolation of store apps from builtins
    const auto case1 = parse_boot_layout("total=1G vnode=builtin:256M:Trusted,store:768M:Untrusted");
    CHECK(case1.nodes.size() == 2);
    // separate trusted-store node
    const auto case2 = parse_boot_layout(
        "total=2G vnode=builtin:512M:Trusted,store:512M:TelecomBuiltin,ext:1G:Untrusted");
    CHECK(case2.nodes.size() == 3);
    CHECK(case2.route(trust_label::telecom_builtin) == 1);
    // low-end device: responsive-aware apps get their own node
    const auto case3 = parse_boot_layout(
        "total=512M vnode=resp:128M:ResponsiveAware+Trusted,ext:384M:Untrusted");
    CHECK(case3.route(trust_label::responsive_aware) == 0);
    // high-end: manufacturer + telecom + large external area
    const auto case4 = parse_boot_layout(
        "total=4G vnode=resp:512M:ResponsiveAware+Trusted,telecom:512M:TelecomBuiltin,ext:3G:Untrusted");
    CHECK(case4.nodes.size() == 3);
    CHECK(case4.nodes[2].frames() == 786432);
}

TEST_CASE("layout round-trips through its canonical form") {
    std::mt19937 rng(4242);
    const trust_label labels[] = {trust_label::trusted, trust_label::untrusted,
                                  trust_label::responsive_aware, trust_label::telecom_builtin};
    for (int iter = 0; iter < 200; ++iter) {
        memory_layout l;
        const unsigned node_count = 1 + rng() % 3;
        std::uint64_t total = 0;
        for (unsigned i = 0; i < node_count; ++i) {
            node_spec n;
            n.name = "n" + std::to_string(i);
            n.size_bytes = (1 + rng() % 64) * 4ull * 1024 * 1024;
            n.labels.push_back(labels[i]);  // distinct labels keep routing unique
            if (rng() % 2) n.cpu_mask = 1 + rng() % 3;
            total += n.size_bytes;
            l.nodes.push_back(std::move(n));
        }
        l.total_bytes = total;
        l.global_threshold_bytes = total * 72 / 2048;
        for (node_spec& n : l.nodes) {
            n.lmk_threshold_bytes = rng() % 4 == 0 ? (1 + rng() % 8) * 1024ull * 1024
                                                   : l.global_threshold_bytes;
            for (trust_label t : n.labels) l.trust_routing[t] = n.name;
        }
        CAPTURE(format_layout(l));
        CHECK(parse_boot_layout(format_layout(l)) == l);
    }
}
