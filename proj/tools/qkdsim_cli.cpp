// qkdsim: run protocol scenarios from the command line.
//
// Exit codes: 0 success, 1 protocol aborted (attack detected), 2 usage,
// config or I/O error, 3 internal error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qkdsim/config.hpp"
#include "qkdsim/harness.hpp"
#include "qkdsim/report.hpp"

namespace {

using namespace qkdsim;

constexpr int kExitOk = 0;
constexpr int kExitAborted = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

struct Options {
    std::string config;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::string output;
    std::string format = "json";
    std::string transcript;
    std::int64_t trials = 1;
};

struct UsageError {
    std::vector<std::string> problems;
};

void add_scenario_options(CLI::App* cmd, Options& o) {
    cmd->add_option("-c,--config", o.config, "Scenario file (YAML); also looked up in $QKDSIM_CONFIG_DIR")->required();
    cmd->add_option("--set", o.sets, "Override a config key, e.g. --set bb84.n_pulses=1000 (repeatable)");
    cmd->add_option("--seed", o.seed, "Override the scenario seed");
}

void add_output_options(CLI::App* cmd, Options& o) {
    cmd->add_option("-o,--output", o.output, "Write the report here instead of stdout");
    cmd->add_option("-f,--format", o.format, "json or csv")->capture_default_str();
}

harness::ScenarioConfig load(const Options& o, std::vector<std::string>& problems) {
    std::vector<std::string> overrides = o.sets;
    if (o.seed) overrides.push_back("seed=" + std::to_string(*o.seed));
    try {
        return io::load_scenario(o.config, overrides);
    } catch (const io::ConfigFileError& e) {
        problems.emplace_back(e.what());
    } catch (const harness::ConfigError& e) {
        for (const auto& p : e.problems()) problems.push_back(o.config + ": " + p);
    }
    return {};
}

void check_format(const Options& o, std::vector<std::string>& problems) {
    if (o.format != "json" && o.format != "csv") problems.push_back("--format must be json or csv, got '" + o.format + "'");
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError{{"cannot write output file: " + path}};
    out << text;
    if (!out.flush()) throw UsageError{{"failed writing output file: " + path}};
}

int cmd_run(const Options& o) {
    std::vector<std::string> problems;
    check_format(o, problems);
    const auto config = load(o, problems);
    if (!problems.empty()) throw UsageError{problems};

    const auto report = harness::run_scenario(config);
    emit(o.format == "csv" ? io::report_csv(report) : io::report_json(report), o.output);
    if (!o.transcript.empty()) emit(io::transcript_jsonl(report.transcript), o.transcript);
    return report.aborted ? kExitAborted : kExitOk;
}

int cmd_batch(const Options& o) {
    std::vector<std::string> problems;
    check_format(o, problems);
    if (o.trials < 1) problems.push_back("--trials must be >= 1, got " + std::to_string(o.trials));
    const auto config = load(o, problems);
    if (!problems.empty()) throw UsageError{problems};

    const auto batch = harness::run_batch(config, static_cast<std::size_t>(o.trials));
    emit(o.format == "csv" ? io::batch_csv(batch) : io::batch_json(batch), o.output);
    return batch.detections > 0 ? kExitAborted : kExitOk;
}

int cmd_attacks_list() {
    std::cout << "adversary          protocols                      effect\n"
                 "none               bb84 three_stage three_stage_auth  honest channel\n"
                 "intercept_resend   bb84                           measure every pulse in a random basis and resend\n"
                 "beam_splitting     bb84                           keep one photon of each multi-photon pulse\n"
                 "mitm               three_stage three_stage_auth   impersonate each endpoint to the other\n"
                 "replay             three_stage_auth               re-send a recorded authenticated message\n";
    return kExitOk;
}

int cmd_explain(const Options& o) {
    std::vector<std::string> problems;
    const auto config = load(o, problems);
    if (!problems.empty()) throw UsageError{problems};

    std::cout << "# resolved scenario (defaults, then file, then overrides)\n" << io::scenario_yaml(config);
    std::cout << "# " << harness::to_string(config.protocol) << " under " << harness::to_string(config.adversary.kind)
              << ": ";
    switch (config.protocol) {
        case harness::Protocol::bb84:
            std::cout << "reports qber, sift_rate and eve_known_fraction; aborts when qber exceeds "
                      << io::format_number(config.bb84.qber_abort_threshold) << "\n";
            break;
        case harness::Protocol::three_stage:
            std::cout << "reports recovered_bits and, under mitm, Eve's copy and its fidelity\n";
            break;
        case harness::Protocol::three_stage_auth:
            std::cout << "reports abort_step and abort_reason on rejection, recovered_bits otherwise\n";
            break;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulate BB84, the three-stage protocol and its authenticated variant."};
    app.require_subcommand(1);
    Options o;

    auto* run = app.add_subcommand("run", "Run one scenario and emit its report");
    add_scenario_options(run, o);
    add_output_options(run, o);
    run->add_option("--transcript", o.transcript, "Also write the transcript as JSON lines");

    auto* batch = app.add_subcommand("batch", "Run many seeded trials and emit aggregate statistics");
    add_scenario_options(batch, o);
    add_output_options(batch, o);
    batch->add_option("-n,--trials", o.trials, "Number of trials (>= 1)")->required();

    app.add_subcommand("attacks-list", "List adversary models and the protocols they apply to");

    auto* explain = app.add_subcommand("explain", "Print the resolved scenario without running it");
    add_scenario_options(explain, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (run->parsed()) return cmd_run(o);
        if (batch->parsed()) return cmd_batch(o);
        if (explain->parsed()) return cmd_explain(o);
        return cmd_attacks_list();
    } catch (const UsageError& e) {
        for (const auto& p : e.problems) std::cerr << "error: " << p << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
