#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "zkg/scenario.hpp"

namespace {

enum ExitCode : int {
    kOk = 0,
    kUsage = 2,
    kParse = 3,
    kConfig = 4,
    kRuntime = 5,
};

int exit_code_for(zkg::ErrorCode code) {
    switch (code) {
        case zkg::ErrorCode::Parse: return kParse;
        case zkg::ErrorCode::Config: return kConfig;
        default: return kRuntime;
    }
}

zkg::ReportFormat parse_format(const std::string& s) {
    return s == "text" ? zkg::ReportFormat::Text : zkg::ReportFormat::Csv;
}

void write_output(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw zkg::RollupError(zkg::ErrorCode::Config, "cannot write " + path);
    f << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-group zk-rollup simulator"};
    app.require_subcommand(1);
    std::string gas_config;
    app.add_option("--gas-config", gas_config, "Gas constants file")->check(CLI::ExistingFile);

    auto* scenario = app.add_subcommand("scenario", "Scenario files");
    scenario->require_subcommand(1);
    auto* run = scenario->add_subcommand("run", "Run a scenario file");
    std::string scenario_file;
    std::optional<std::uint64_t> seed;
    std::string scenario_format = "csv";
    std::string scenario_out;
    bool show_log = false;
    run->add_option("file", scenario_file, "Scenario JSON")->required();
    run->add_option("--seed", seed, "Overrides the file's seed");
    run->add_option("--format", scenario_format, "Report format")->check(CLI::IsMember({"csv", "text"}));
    run->add_option("-o,--output", scenario_out, "Report path (default stdout)");
    run->add_flag("--log", show_log, "Print the action log to stderr");

    auto* bench_cmd = app.add_subcommand("bench", "Measure per-operation gas for one matrix cell");
    zkg::BenchOptions bench_opt;
    std::string bench_mode = "modified";
    std::string bench_format = "csv";
    std::string bench_out;
    bench_cmd->add_option("--chunks", bench_opt.chunks, "Block capacity in chunks")
        ->check(CLI::IsMember({26, 78, 182, 390}));
    bench_cmd->add_option("--aggregate", bench_opt.aggregate, "Blocks per aggregated proof")
        ->check(CLI::IsMember({1, 4, 8}));
    bench_cmd->add_option("--mix", bench_opt.mix, "Op mix, e.g. transfer, all, transfer:3,deposit:1");
    bench_cmd->add_option("--mode", bench_mode, "Contract mode")->check(CLI::IsMember({"baseline", "modified"}));
    bench_cmd->add_option("--seed", bench_opt.seed, "Workload seed");
    bench_cmd->add_option("--workers", bench_opt.prover_workers, "Prover threads (0 proves inline)");
    bench_cmd->add_option("--format", bench_format, "Output format")->check(CLI::IsMember({"csv", "text", "cycle"}));
    bench_cmd->add_option("-o,--output", bench_out, "Output path (default stdout)");

    auto* compare = app.add_subcommand("compare-changegroup", "ChangeGroup vs withdraw and re-deposit");
    std::string token = "eth";
    std::size_t cmp_chunks = 390;
    std::size_t cmp_aggregate = 8;
    compare->add_option("--token", token, "Token profile")->check(CLI::IsMember({"eth", "erc20"}));
    compare->add_option("--chunks", cmp_chunks, "Block capacity in chunks")->check(CLI::IsMember({26, 78, 182, 390}));
    compare->add_option("--aggregate", cmp_aggregate, "Blocks per aggregated proof")->check(CLI::IsMember({1, 4, 8}));

    auto* report = app.add_subcommand("report", "Headline cost report for both contract modes");
    std::string report_format = "csv";
    std::string report_out;
    std::size_t rep_chunks = 390;
    std::size_t rep_aggregate = 8;
    report->add_option("--format", report_format, "Report format")->check(CLI::IsMember({"csv", "text"}));
    report->add_option("-o,--output", report_out, "Output path")->required();
    report->add_option("--chunks", rep_chunks, "Block capacity in chunks")->check(CLI::IsMember({26, 78, 182, 390}));
    report->add_option("--aggregate", rep_aggregate, "Blocks per aggregated proof")->check(CLI::IsMember({1, 4, 8}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        auto config = gas_config.empty() ? zkg::GasConfig::defaults() : zkg::GasConfig::load(gas_config);
        if (*run) {
            auto sc = zkg::Scenario::load(scenario_file);
            auto res = zkg::run_scenario(sc, seed, config);
            if (show_log)
                for (const auto& line : res.log) std::cerr << line << '\n';
            write_output(zkg::render_report(res.report, parse_format(scenario_format)), scenario_out);
            std::cerr << "digest " << zkg::to_hex(res.digest) << '\n';
        } else if (*bench_cmd) {
            bench_opt.mode = bench_mode == "baseline" ? zkg::ContractMode::Baseline : zkg::ContractMode::Modified;
            bench_opt.config = config;
            auto res = zkg::bench(bench_opt);
            if (bench_format == "cycle")
                write_output(res.cycle.to_csv(), bench_out);
            else
                write_output(zkg::render_report(res.report, parse_format(bench_format)), bench_out);
        } else if (*compare) {
            auto profile = token == "eth" ? zkg::TokenProfile::Eth : zkg::TokenProfile::Erc20;
            auto cmp = zkg::compare_changegroup(profile, config, cmp_chunks, cmp_aggregate);
            for (const auto& [k, v] : cmp.breakdown) std::cout << k << ' ' << v << '\n';
            std::cout << "direct " << cmp.direct_gas << '\n'
                      << "indirect " << cmp.indirect_gas << '\n'
                      << "savings " << cmp.savings() << '\n';
        } else if (*report) {
            auto rep = zkg::headline_report(config, rep_chunks, rep_aggregate);
            zkg::emit_report(rep, parse_format(report_format), report_out);
        }
    } catch (const zkg::RollupError& e) {
        std::cerr << "error [" << zkg::error_code_name(e.code()) << "]: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kOk;
}
