#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qkdsim/config.hpp"
#include "qkdsim/report.hpp"

using namespace qkdsim;
using harness::AdversaryKind;
using harness::ConfigError;
using harness::Protocol;

namespace {

const std::filesystem::path kConfigs = QKDSIM_CONFIGS_DIR;

std::vector<std::string> problems_of(const std::string& yaml, const std::vector<std::string>& overrides = {}) {
    try {
        io::parse_scenario(yaml, overrides);
    } catch (const ConfigError& e) {
        return e.problems();
    }
    return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
    for (const auto& p : problems)
        if (p.find(needle) != std::string::npos) return true;
    return false;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST(ConfigTest, EveryPresetLoadsAndRuns) {
    int count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(kConfigs)) {
        if (entry.path().extension() != ".yaml") continue;
        SCOPED_TRACE(entry.path().string());
        auto config = io::load_scenario(entry.path().string(), {"bb84.n_pulses=2000"});
        EXPECT_TRUE(config.validate().empty());
        EXPECT_NO_THROW(harness::run_scenario(config));
        ++count;
    }
    EXPECT_GE(count, 9);
}

TEST(ConfigTest, PresetValues) {
    const auto c = io::load_scenario((kConfigs / "bb84_pns.yaml").string());
    EXPECT_EQ(c.protocol, Protocol::bb84);
    EXPECT_EQ(c.adversary.kind, AdversaryKind::beam_splitting);
    EXPECT_EQ(c.seed, 7u);
    EXPECT_DOUBLE_EQ(c.bb84.mean_photon_number, 0.5);

    const auto m = io::load_scenario((kConfigs / "kak_mitm.yaml").string());
    EXPECT_EQ(format_bits(m.message), "10110");
    EXPECT_EQ(format_bits(m.adversary.fake_bits), "00000");
}

TEST(ConfigTest, DefaultsWhenOnlyProtocolGiven) {
    const auto c = io::parse_scenario("protocol: three_stage\n");
    const harness::ScenarioConfig d;
    EXPECT_EQ(c.seed, d.seed);
    EXPECT_EQ(c.message_length, d.message_length);
    EXPECT_EQ(c.adversary.kind, AdversaryKind::none);
    EXPECT_EQ(c.auth.policy.window_millis, d.auth.policy.window_millis);
}

TEST(ConfigTest, OverridesWinInOrder) {
    const auto c = io::parse_scenario("protocol: bb84\nseed: 3\nbb84:\n  n_pulses: 500\n",
                                      {"seed=9", "bb84.n_pulses=700", "seed=11", "message=\"0110\""});
    EXPECT_EQ(c.seed, 11u);
    EXPECT_EQ(c.bb84.n_pulses, 700u);
    EXPECT_EQ(format_bits(c.message), "0110");
}

TEST(ConfigTest, OverrideCanSupplyProtocol) {
    const auto c = io::parse_scenario("seed: 2\n", {"protocol=three_stage_auth"});
    EXPECT_EQ(c.protocol, Protocol::three_stage_auth);
}

TEST(ConfigTest, AllProblemsReportedTogether) {
    const auto p = problems_of("protocol: bb84\nseed: -4\nbb84:\n  n_pulses: lots\n  flavour: 3\nwhatever: 1\n",
                               {"adversary.kind=mitm", "noequals"});
    EXPECT_TRUE(mentions(p, "seed: expected a non-negative integer, got '-4'"));
    EXPECT_TRUE(mentions(p, "bb84.n_pulses"));
    EXPECT_TRUE(mentions(p, "unknown key 'bb84.flavour'"));
    EXPECT_TRUE(mentions(p, "unknown key 'whatever'"));
    EXPECT_TRUE(mentions(p, "override 'noequals'"));
    EXPECT_GE(p.size(), 5u);
}

TEST(ConfigTest, ValidationProblemsSurface) {
    const auto p = problems_of("protocol: bb84\nadversary:\n  kind: replay\nbb84:\n  sample_fraction: 1.5\n");
    EXPECT_TRUE(mentions(p, "adversary.kind replay does not apply to protocol bb84"));
    EXPECT_TRUE(mentions(p, "bb84: "));
}

TEST(ConfigTest, MissingProtocolAndSyntaxErrors) {
    EXPECT_TRUE(mentions(problems_of("seed: 1\n"), "protocol is required"));
    EXPECT_TRUE(mentions(problems_of("protocol: [bb84\n"), "YAML syntax error"));
    EXPECT_TRUE(mentions(problems_of("- 1\n- 2\n"), "must be a mapping"));
    EXPECT_TRUE(mentions(problems_of("protocol: bb85\n"), "unknown protocol 'bb85'"));
    EXPECT_TRUE(mentions(problems_of("protocol: three_stage\nmessage: 10a\n"), "message"));
}

TEST(ConfigTest, EveryKeyIsAccepted) {
    // Re-emitting a config and parsing it back must hit every key except the
    // ones that are only written when they matter.
    harness::ScenarioConfig c;
    c.protocol = Protocol::three_stage_auth;
    c.seed = 77;
    c.message = parse_bits("0101");
    c.auth.policy.window_millis = 1234;
    const auto yaml = io::scenario_yaml(c);
    for (const auto& key : io::config_keys()) {
        if (key == "message_length" || key == "adversary.fake_bits") continue;
        const auto leaf = key.substr(key.rfind('.') == std::string::npos ? 0 : key.rfind('.') + 1);
        EXPECT_NE(yaml.find(leaf + ":"), std::string::npos) << key;
    }
    const auto back = io::parse_scenario(yaml);
    EXPECT_EQ(back.seed, 77u);
    EXPECT_EQ(format_bits(back.message), "0101");
    EXPECT_EQ(back.auth.policy.window_millis, 1234);
    EXPECT_EQ(io::scenario_yaml(back), yaml);
}

TEST(ConfigTest, PathResolution) {
    EXPECT_THROW(
        {
            try {
                io::resolve_config_path("no/such/file.yaml");
            } catch (const io::ConfigFileError& e) {
                EXPECT_NE(std::string(e.what()).find("no/such/file.yaml"), std::string::npos);
                throw;
            }
        },
        io::ConfigFileError);

    ::setenv(io::kConfigDirEnv, kConfigs.c_str(), 1);
    EXPECT_EQ(io::resolve_config_path("kak_honest"), kConfigs / "kak_honest.yaml");
    EXPECT_EQ(io::resolve_config_path("kak_honest.yaml"), kConfigs / "kak_honest.yaml");
    ::unsetenv(io::kConfigDirEnv);
    EXPECT_THROW(io::resolve_config_path("kak_honest"), io::ConfigFileError);
}

TEST(ReportTest, JsonIsDeterministicAndParses) {
    const auto c = io::load_scenario((kConfigs / "kak_auth_honest.yaml").string());
    const auto a = io::report_json(harness::run_scenario(c));
    const auto b = io::report_json(harness::run_scenario(c));
    EXPECT_EQ(a, b);
    const auto j = nlohmann::json::parse(a);
    EXPECT_EQ(j["schema_version"], io::kReportSchemaVersion);
    EXPECT_EQ(j["kind"], "scenario");
    EXPECT_EQ(j["protocol"], "three_stage_auth");
    EXPECT_EQ(j["aborted"], false);
    EXPECT_EQ(j["recovered_bits"], "10110");
    EXPECT_EQ(j["kdc_blind"], true);
    EXPECT_TRUE(j["qber"].is_null());
    EXPECT_EQ(j["transcript"].size(), 4u);
    EXPECT_EQ(j["transcript_digest"].get<std::string>().size(), 16u);
}

TEST(ReportTest, SeedChangesOutput) {
    auto c = io::load_scenario((kConfigs / "bb84_clean.yaml").string(), {"bb84.n_pulses=3000"});
    const auto a = io::report_json(harness::run_scenario(c));
    c.seed += 1;
    EXPECT_NE(a, io::report_json(harness::run_scenario(c)));
}

TEST(ReportTest, Bb84JsonFields) {
    const auto c = io::load_scenario((kConfigs / "bb84_intercept.yaml").string(), {"bb84.n_pulses=4000"});
    const auto j = nlohmann::json::parse(io::report_json(harness::run_scenario(c)));
    EXPECT_EQ(j["aborted"], true);
    EXPECT_EQ(j["abort_reason"], "qber_above_threshold");
    EXPECT_GT(j["qber"].get<double>(), 0.15);
    EXPECT_EQ(j["bb84"]["n_pulses"], 4000);
    for (const char* k : {"detected_pulses", "sifted_length", "sample_size", "key_length", "qber_degenerate"})
        EXPECT_TRUE(j["bb84"].contains(k)) << k;
}

TEST(ReportTest, CsvShape) {
    const auto c = io::load_scenario((kConfigs / "kak_auth_mitm.yaml").string());
    const auto batch = harness::run_batch(c, 20);
    const auto rows = lines(io::batch_csv(batch));
    ASSERT_EQ(rows.size(), 21u);
    std::string header;
    for (const auto& col : io::csv_columns()) header += (header.empty() ? "" : ",") + col;
    EXPECT_EQ(rows[0], header);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_EQ(std::count(rows[i].begin(), rows[i].end(), ','), std::ptrdiff_t(io::csv_columns().size() - 1));
        EXPECT_EQ(rows[i].rfind(std::to_string(i - 1) + ",", 0), 0u);
        EXPECT_NE(rows[i].find(",true,"), std::string::npos);
        EXPECT_NE(rows[i].find(",integrity,"), std::string::npos);
    }
    EXPECT_EQ(lines(io::report_csv(batch.rows[0])).size(), 2u);
}

TEST(ReportTest, BatchJsonSummaries) {
    const auto c = io::load_scenario((kConfigs / "bb84_clean.yaml").string(), {"bb84.n_pulses=2000"});
    const auto j = nlohmann::json::parse(io::batch_json(harness::run_batch(c, 5)));
    EXPECT_EQ(j["kind"], "batch");
    EXPECT_EQ(j["trials"], 5);
    EXPECT_EQ(j["rows"].size(), 5u);
    EXPECT_EQ(j["sift_rate"]["count"], 5);
    EXPECT_NEAR(j["sift_rate"]["mean"].get<double>(), 0.5, 0.05);
    EXPECT_TRUE(j["eve_payload_fidelity"].is_null());
    EXPECT_EQ(j["rows"][3]["trial"], 3);
}

TEST(ReportTest, TranscriptJsonlCarriesAmplitudes) {
    const auto c = io::load_scenario((kConfigs / "kak_honest.yaml").string());
    const auto r = harness::run_scenario(c);
    const auto ls = lines(io::transcript_jsonl(r.transcript));
    ASSERT_EQ(ls.size(), r.transcript.size());
    for (std::size_t i = 0; i < ls.size(); ++i) {
        const auto j = nlohmann::json::parse(ls[i]);
        EXPECT_EQ(j["seq"], r.transcript[i].seq);
        EXPECT_EQ(j["states"].size(), 5u);
        double norm = 0.0;
        for (const auto& a : j["states"][0]["amplitudes"]) norm += a[0].get<double>() * a[0].get<double>() +
                                                                    a[1].get<double>() * a[1].get<double>();
        EXPECT_NEAR(norm, 1.0, 1e-12);
    }
}

TEST(ReportTest, NumberFormatting) {
    EXPECT_EQ(io::format_number(0.5), "0.5");
    EXPECT_EQ(io::format_number(0.1), "0.1");
    EXPECT_EQ(io::format_number(1.0), "1");
    EXPECT_EQ(io::digest_hex(0xabcULL), "0000000000000abc");
}
