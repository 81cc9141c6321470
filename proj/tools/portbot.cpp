#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "portbot/monitor.hpp"
#include "portbot/scenarios.hpp"
#include "portbot/sim.hpp"
#include "portbot/trace.hpp"

using namespace portbot;

namespace {

enum Exit { kOk = 0, kUsage = 1, kViolation = 2, kFault = 3 };

// "0.4" applies to every robot, "2:0.4" to robot 2 only.
void apply_override(const std::vector<std::string>& items, std::optional<double>& all, std::map<RobotId, double>& per)
{
    for (const auto& s : items) {
        const auto colon = s.find(':');
        if (colon == std::string::npos) {
            all = std::stod(s);
        } else {
            per[std::stoi(s.substr(0, colon))] = std::stod(s.substr(colon + 1));
        }
    }
}

int run_and_write(const sim::Scenario& s, const std::string& out, bool quiet)
{
    const trace::Trace tr = sim::run(s);
    trace::write_trace_file(out, tr);
    if (!quiet)
        std::printf("%s: seed %llu, %zu events -> %s\n", s.name.c_str(), static_cast<unsigned long long>(s.seed),
                    tr.events.size(), out.c_str());
    if (sim::has_fault(tr)) {
        std::fprintf(stderr, "runtime fault recorded in trace\n");
        return kFault;
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App cli{"Simulate portable robot applications and check their traces"};
    cli.require_subcommand(1);

    std::string scenario_path, out_path = "trace.jsonl";
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    auto* run = cli.add_subcommand("run", "Simulate a scenario file and write its trace");
    run->add_option("--scenario", scenario_path, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--out", out_path, "Trace output file");
    run->add_flag("-q,--quiet", quiet);

    std::string trace_path, report_path;
    std::vector<std::string> dt, qd;
    auto add_check = [&](CLI::App* c) {
        c->add_option("trace", trace_path, "Trace file")->required()->check(CLI::ExistingFile);
        c->add_option("--report", report_path, "Write the machine-readable report here");
        c->add_option("--dt", dt, "Dwell time override: X or ID:X");
        c->add_option("--qd", qd, "Quantization distance override: X or ID:X");
    };
    auto* check = cli.add_subcommand("check", "Check a trace against the reach-avoid conditions");
    add_check(check);
    auto* monitor = cli.add_subcommand("monitor", "Monitor commands");
    auto* monitor_check = monitor->add_subcommand("check", "Same as the top-level check");
    monitor->require_subcommand(1);
    add_check(monitor_check);

    std::string csv_path;
    auto* exp = cli.add_subcommand("export", "Export pose samples of a trace as CSV");
    exp->add_option("--csv", csv_path, "CSV output file")->required();
    exp->add_option("trace", trace_path, "Trace file")->required()->check(CLI::ExistingFile);

    std::string demo_name, platform_name = "diffdrive", save_path;
    std::uint64_t demo_seed = 1;
    auto* demo = cli.add_subcommand("demo", "Run a bundled scenario");
    demo->add_option("name", demo_name, "Scenario")->required()->check(CLI::IsMember(scenarios::names()));
    demo->add_option("--platform", platform_name, "quad or diffdrive")->check(CLI::IsMember({"quad", "diffdrive"}));
    demo->add_option("--seed", demo_seed, "Seed");
    demo->add_option("--out", out_path, "Trace output file");
    demo->add_option("--save-scenario", save_path, "Also write the generated scenario file");
    demo->add_flag("-q,--quiet", quiet);

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*run) {
            sim::Scenario s = sim::load_scenario(scenario_path);
            if (seed)
                s.seed = *seed;
            return run_and_write(s, out_path, quiet);
        }
        if (*demo) {
            sim::Scenario s = scenarios::demo(demo_name, platform::kind_from_string(platform_name), demo_seed);
            if (!save_path.empty())
                sim::save_scenario(save_path, s);
            return run_and_write(s, out_path, quiet);
        }
        if (*check || *monitor) {
            monitor::Overrides ov;
            apply_override(dt, ov.dwell_time, ov.dwell_time_for);
            apply_override(qd, ov.quant_dist, ov.quant_dist_for);
            const trace::Trace tr = trace::read_trace_file(trace_path);
            const monitor::Summary sum = monitor::summarize(monitor::check_trace(tr, ov));
            std::cout << sum.text;
            if (!report_path.empty()) {
                std::ofstream rep(report_path);
                rep << sum.machine.dump(2) << '\n';
            }
            return sum.exit_status();
        }
        if (*exp) {
            const trace::Trace tr = trace::read_trace_file(trace_path);
            std::ofstream out(csv_path);
            if (!out)
                throw std::runtime_error("cannot write " + csv_path);
            sim::export_csv(tr, out);
            return kOk;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    }
    return kUsage;
}
