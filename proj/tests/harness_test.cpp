#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "qkdsim/harness.hpp"
#include "qkdsim/mixer.hpp"

using namespace qkdsim;
using namespace qkdsim::harness;

namespace {

ScenarioConfig kak(AdversaryKind adv, std::uint64_t seed = 1) {
    ScenarioConfig c;
    c.protocol = Protocol::three_stage;
    c.adversary.kind = adv;
    c.seed = seed;
    c.message = parse_bits("10110");
    return c;
}

ScenarioConfig kak_auth(AdversaryKind adv, std::uint64_t seed = 1) {
    auto c = kak(adv, seed);
    c.protocol = Protocol::three_stage_auth;
    return c;
}

ScenarioConfig bb84_scenario(AdversaryKind adv, std::uint64_t seed = 1) {
    ScenarioConfig c;
    c.protocol = Protocol::bb84;
    c.adversary.kind = adv;
    c.seed = seed;
    return c;
}

void expect_well_formed(const ScenarioReport& r) {
    for (std::size_t i = 0; i < r.transcript.size(); ++i) {
        EXPECT_EQ(r.transcript[i].seq, i + 1);
        EXPECT_EQ(r.transcript[i].digest, event_digest(r.transcript[i]));
    }
    if (r.aborted) {
        EXPECT_TRUE(r.abort_reason.has_value());
        EXPECT_FALSE(r.recovered_bits.has_value());
    }
}

}  // namespace

TEST(Scenario, ThreeStageHonestRecoversBits) {
    const auto r = run_scenario(kak(AdversaryKind::none));
    expect_well_formed(r);
    EXPECT_FALSE(r.aborted);
    EXPECT_EQ(format_bits(*r.recovered_bits), "10110");
    ASSERT_EQ(r.transcript.size(), 3U);
    EXPECT_EQ(r.transcript[1].sender, Role::bob);
    EXPECT_EQ(r.transcript[1].pass_index, 2);
}

TEST(Scenario, ThreeStageMitmSwapsThePayload) {
    auto cfg = kak(AdversaryKind::mitm);
    cfg.adversary.fake_bits = parse_bits("00000");
    const auto r = run_scenario(cfg);
    expect_well_formed(r);
    EXPECT_FALSE(r.aborted);
    EXPECT_EQ(format_bits(*r.recovered_bits), "00000");
    EXPECT_EQ(format_bits(*r.eve_recovered_bits), "10110");
    EXPECT_NEAR(*r.eve_payload_fidelity, 1.0, 1e-9);
    ASSERT_EQ(r.transcript.size(), 6U);
    int captured = 0, injected = 0;
    for (const auto& e : r.transcript) {
        captured += e.captured;
        injected += e.injected;
        EXPECT_NE(e.captured, e.injected);
    }
    EXPECT_EQ(captured, 3);
    EXPECT_EQ(injected, 3);
}

TEST(Scenario, RandomMessageWhenNoneGiven) {
    auto cfg = kak(AdversaryKind::none);
    cfg.message.clear();
    cfg.message_length = 12;
    cfg.qubits_per_unit = 3;
    const auto r = run_scenario(cfg);
    EXPECT_EQ(r.sent_bits.size(), 12U);
    EXPECT_EQ(*r.recovered_bits, r.sent_bits);
}

TEST(Scenario, AuthenticatedHonestRun) {
    const auto r = run_scenario(kak_auth(AdversaryKind::none));
    expect_well_formed(r);
    EXPECT_FALSE(r.aborted);
    EXPECT_EQ(format_bits(*r.recovered_bits), "10110");
    EXPECT_EQ(r.kdc_blind, true);
    ASSERT_EQ(r.transcript.size(), 4U);
    std::set<int> passes;
    for (const auto& e : r.transcript) {
        EXPECT_EQ(e.kind, EventKind::auth_message);
        passes.insert(e.pass_index);
    }
    EXPECT_EQ(passes, (std::set<int>{1, 2, 3}));
}

TEST(Scenario, AuthenticatedDirectPassTwo) {
    auto cfg = kak_auth(AdversaryKind::none);
    cfg.auth.relay_pass2_via_kdc = false;
    const auto r = run_scenario(cfg);
    EXPECT_FALSE(r.aborted);
    EXPECT_FALSE(r.kdc_blind.has_value());
    ASSERT_EQ(r.transcript.size(), 5U);
    EXPECT_EQ(r.transcript[2].kind, EventKind::quantum_pass);
}

TEST(Scenario, AuthenticatedMitmAbortsEarly) {
    std::set<int> steps;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto r = run_scenario(kak_auth(AdversaryKind::mitm, seed));
        expect_well_formed(r);
        ASSERT_TRUE(r.aborted);
        ASSERT_TRUE(*r.abort_step == 2 || *r.abort_step == 3);
        EXPECT_EQ(*r.abort_reason, "integrity");
        EXPECT_FALSE(r.eve_recovered_bits.has_value());
        steps.insert(*r.abort_step);
        // Nothing follows the rejected forgery.
        EXPECT_TRUE(r.transcript.back().injected);
    }
    EXPECT_EQ(steps, (std::set<int>{2, 3}));
}

TEST(Scenario, KdcUnavailable) {
    auto cfg = kak_auth(AdversaryKind::none);
    cfg.auth.kdc_available = false;
    const auto r = run_scenario(cfg);
    EXPECT_TRUE(r.aborted);
    EXPECT_EQ(*r.abort_reason, "kdc_unreachable");
    EXPECT_EQ(*r.abort_step, 2);
}

TEST(Scenario, ReplayedMessageFour) {
    auto cfg = kak_auth(AdversaryKind::replay);
    cfg.adversary.replay_step = 4;
    const auto r = run_scenario(cfg);
    expect_well_formed(r);
    EXPECT_TRUE(r.aborted);
    EXPECT_EQ(*r.abort_step, 4);
    EXPECT_EQ(*r.abort_reason, "replayed_nonce");
    EXPECT_EQ(r.transcript.front().session, 1);
    EXPECT_EQ(r.transcript.back().session, 2);
    EXPECT_TRUE(r.transcript.back().injected);
    EXPECT_EQ(r.transcript.back().sender, Role::eve);
}

TEST(Scenario, ReplayedMessageTwoAfterWindow) {
    auto cfg = kak_auth(AdversaryKind::replay);
    cfg.adversary.replay_step = 2;
    cfg.adversary.replay_delay_millis = cfg.auth.policy.window_millis + 1;
    auto r = run_scenario(cfg);
    EXPECT_EQ(*r.abort_step, 2);
    EXPECT_EQ(*r.abort_reason, "stale_timestamp");

    cfg.adversary.replay_delay_millis = 100;
    r = run_scenario(cfg);
    EXPECT_EQ(*r.abort_reason, "replayed_nonce");
}

TEST(Scenario, SameSessionDuplicate) {
    auto cfg = kak_auth(AdversaryKind::replay);
    cfg.adversary.replay_same_session = true;
    for (int step = 1; step <= 3; ++step) {
        cfg.adversary.replay_step = step;
        const auto r = run_scenario(cfg);
        EXPECT_EQ(*r.abort_reason, "duplicate_event");
        EXPECT_EQ(*r.abort_step, step);
    }
}

TEST(Scenario, Bb84Transcript) {
    auto cfg = bb84_scenario(AdversaryKind::none);
    cfg.bb84.n_pulses = 2000;
    const auto r = run_scenario(cfg);
    expect_well_formed(r);
    EXPECT_FALSE(r.aborted);
    EXPECT_EQ(*r.qber, 0.0);
    ASSERT_TRUE(r.bb84.has_value());
    EXPECT_EQ(r.bb84->n_pulses, 2000U);
    ASSERT_EQ(r.transcript.size(), 5U);
    EXPECT_EQ(r.transcript[0].states.size(), 2000U);
    EXPECT_EQ(r.transcript[1].kind, EventKind::classical_announcement);

    cfg.adversary.kind = AdversaryKind::intercept_resend;
    const auto e = run_scenario(cfg);
    EXPECT_TRUE(e.aborted);
    EXPECT_EQ(*e.abort_reason, "qber_above_threshold");
    EXPECT_TRUE(e.transcript[0].captured);
    EXPECT_TRUE(e.transcript[1].injected);
}

TEST(Scenario, SameSeedSameReport) {
    for (auto cfg : {kak(AdversaryKind::mitm, 9), kak_auth(AdversaryKind::none, 9), kak_auth(AdversaryKind::mitm, 9),
                     kak_auth(AdversaryKind::replay, 9)}) {
        const auto a = run_scenario(cfg);
        const auto b = run_scenario(cfg);
        ASSERT_EQ(a.transcript.size(), b.transcript.size());
        for (std::size_t i = 0; i < a.transcript.size(); ++i) EXPECT_EQ(a.transcript[i].digest, b.transcript[i].digest);
        EXPECT_EQ(a.recovered_bits, b.recovered_bits);
    }
    const auto x = run_scenario(kak_auth(AdversaryKind::none, 1));
    const auto y = run_scenario(kak_auth(AdversaryKind::none, 2));
    EXPECT_NE(x.transcript[0].digest, y.transcript[0].digest);
}

TEST(Scenario, ValidationReportsEveryProblem) {
    ScenarioConfig cfg;
    cfg.protocol = Protocol::three_stage;
    cfg.adversary.kind = AdversaryKind::beam_splitting;
    cfg.message = Bits{1, 0, 2};
    cfg.qubits_per_unit = 2;
    try {
        run_scenario(cfg);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.problems().size(), 3U);
    }
    auto auth_cfg = kak_auth(AdversaryKind::replay);
    auth_cfg.adversary.replay_step = 4;
    auth_cfg.adversary.replay_same_session = true;
    auth_cfg.auth.redundancy = 0;
    EXPECT_EQ(auth_cfg.validate().size(), 2U);
    EXPECT_THROW(run_batch(kak(AdversaryKind::none), 0), ConfigError);
}

TEST(Scenario, NamesRoundTrip) {
    for (auto p : {Protocol::bb84, Protocol::three_stage, Protocol::three_stage_auth})
        EXPECT_EQ(parse_protocol(to_string(p)), p);
    for (auto a : {AdversaryKind::none, AdversaryKind::intercept_resend, AdversaryKind::beam_splitting,
                   AdversaryKind::mitm, AdversaryKind::replay})
        EXPECT_EQ(parse_adversary_kind(to_string(a)), a);
    EXPECT_FALSE(parse_protocol("kak").has_value());
}

TEST(ReplayAdversary, PicksLatestHonestCopy) {
    const auto r = run_scenario(kak_auth(AdversaryKind::none));
    const auto e = replay_adversary(r.transcript, 4);
    ASSERT_TRUE(e.has_value());
    EXPECT_EQ(e->sender, Role::eve);
    EXPECT_TRUE(e->injected);
    EXPECT_EQ(e->content, r.transcript[3].content);
    EXPECT_FALSE(replay_adversary({}, 4).has_value());
    EXPECT_FALSE(replay_adversary(r.transcript, 5).has_value());
}

TEST(Batch, SeedsFollowTheSplittingRule) {
    const auto b = run_batch(kak(AdversaryKind::none, 77), 5);
    ASSERT_EQ(b.rows.size(), 5U);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(b.rows[i].seed, mix(77, i));
        EXPECT_EQ(b.rows[i].seed, trial_seed(77, i));
        EXPECT_TRUE(b.rows[i].transcript.empty());
    }
    EXPECT_EQ(b.recovered_exact, 5U);
    EXPECT_EQ(b.detections, 0U);
}

TEST(Batch, Bb84Statistics) {
    auto cfg = bb84_scenario(AdversaryKind::none, 5);
    const auto clean = run_batch(cfg, 20);
    EXPECT_GE(clean.sift_rate->mean, 0.49);
    EXPECT_LE(clean.sift_rate->mean, 0.51);
    EXPECT_EQ(clean.qber->mean, 0.0);
    EXPECT_EQ(clean.detections, 0U);

    // Order-independence: summing the rows backwards gives the same mean.
    double back = 0.0;
    for (auto it = clean.rows.rbegin(); it != clean.rows.rend(); ++it) back += *it->sift_rate;
    EXPECT_NEAR(back / 20.0, clean.sift_rate->mean, 1e-15);

    cfg.adversary.kind = AdversaryKind::intercept_resend;
    cfg.bb84.n_pulses = 20000;
    const auto attacked = run_batch(cfg, 10);
    EXPECT_GE(attacked.qber->mean, 0.24);
    EXPECT_LE(attacked.qber->mean, 0.26);
    EXPECT_EQ(attacked.detections, 10U);
    EXPECT_GT(attacked.qber->std_error, 0.0);
}

TEST(Batch, AuthenticatedMitmDetectedEveryTime) {
    const auto b = run_batch(kak_auth(AdversaryKind::mitm, 3), 1000);
    EXPECT_EQ(b.detections, 1000U);
    for (const auto& r : b.rows) ASSERT_TRUE(*r.abort_step == 2 || *r.abort_step == 3);
}
