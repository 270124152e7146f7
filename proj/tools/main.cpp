// Copyright vnodesim contributors.
// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vnodesim/report.hpp"
#include "vnodesim/scenario.hpp"

namespace {

// exit codes: 0 ok, 1 usage, 2 scenario/parse error, 3 panic during run
constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitPanic = 3;

int cmd_run(const std::string& scenario_path, const std::optional<std::string>& layout,
            const std::optional<std::string>& out_path,
            const std::optional<std::string>& pressure_path) {
    vnodesim::scenario sc = vnodesim::parse_scenario_file(scenario_path);
    if (layout) {
        vnodesim::parse_boot_layout(*layout);  // fail before running anything
        sc.layout_line = *layout;
    }
    const vnodesim::metrics_report report = vnodesim::run_scenario(sc);
    const std::string text = vnodesim::serialize_report(report);
    if (out_path) {
        std::ofstream out(*out_path);
        if (!out) {
            std::cerr << "cannot write '" << *out_path << "'\n";
            return kExitParse;
        }
        out << text;
    } else {
        std::cout << text;
    }
    if (pressure_path) {
        std::ofstream out(*pressure_path);
        if (!out) {
            std::cerr << "cannot write '" << *pressure_path << "'\n";
            return kExitParse;
        }
        for (const vnodesim::pressure_event& e : report.pressure_log)
            out << vnodesim::format_pressure_event(e) << "\n";
    }
    if (report.panicked) {
        std::cerr << "run panicked: out-of-memory with no killable process\n";
        return kExitPanic;
    }
    return kExitOk;
}

int cmd_compare(const std::string& before_path, const std::string& after_path) {
    const auto before = vnodesim::load_report_file(before_path);
    const auto after = vnodesim::load_report_file(after_path);
    std::cout << vnodesim::format_comparison(vnodesim::compare(before, after));
    return kExitOk;
}

int cmd_buddyinfo(const std::string& report_path, const std::optional<std::string>& label) {
    const auto report = vnodesim::load_report_file(report_path);
    std::cout << vnodesim::buddyinfo_text(report, label);
    return kExitOk;
}

int cmd_validate(const std::string& scenario_path) {
    vnodesim::parse_scenario_file(scenario_path);
    std::cout << "ok\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vnodesim - virtual memory node partitioning simulator"};
    app.require_subcommand(1);

    std::string scenario_path, before_path, after_path, report_path;
    std::optional<std::string> layout, out_path, snapshot_label, pressure_path;

    CLI::App* run = app.add_subcommand("run", "run a scenario and emit the JSON report");
    run->add_option("scenario", scenario_path, "scenario file")->required();
    run->add_option("-o,--output", out_path, "report file (default: stdout)");
    run->add_option("--layout", layout, "override the scenario's boot layout line");
    run->add_option("--pressure-log", pressure_path, "also write one text line per pressure event");

    CLI::App* cmp = app.add_subcommand("compare", "compare two run reports (before, after)");
    cmp->add_option("before", before_path, "report of the existing system")->required();
    cmp->add_option("after", after_path, "report of the partitioned system")->required();

    CLI::App* buddy = app.add_subcommand("buddyinfo", "print a buddyinfo-style dump of a report");
    buddy->add_option("report", report_path, "report file")->required();
    buddy->add_option("--snapshot", snapshot_label, "snapshot label (default: last)");

    CLI::App* val = app.add_subcommand("validate", "parse a scenario without running it");
    val->add_option("scenario", scenario_path, "scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : 1;  // usage errors collapse to 1
    }

    try {
        if (run->parsed()) return cmd_run(scenario_path, layout, out_path, pressure_path);
        if (cmp->parsed()) return cmd_compare(before_path, after_path);
        if (buddy->parsed()) return cmd_buddyinfo(report_path, snapshot_label);
        if (val->parsed()) return cmd_validate(scenario_path);
    } catch (const vnodesim::sim_error& e) {
        std::cerr << e.what() << "\n";
        return kExitParse;
    }
    return kExitOk;
}
