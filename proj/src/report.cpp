#include "qkdsim/report.hpp"

#include <charconv>
#include <cstdio>

#include "json.hpp"
#include "qkdsim/mixer.hpp"

namespace qkdsim::io {
namespace {

using nlohmann::ordered_json;
using harness::BatchReport;
using harness::ChannelEvent;
using harness::MetricSummary;
using harness::ScenarioReport;

template <typename T>
ordered_json opt(const std::optional<T>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json opt_bits(const std::optional<Bits>& b) { return b ? ordered_json(format_bits(*b)) : ordered_json(nullptr); }

ordered_json summary(const std::optional<MetricSummary>& m) {
    if (!m) return nullptr;
    return ordered_json{{"count", m->count}, {"mean", m->mean}, {"std_error", m->std_error}};
}

std::uint64_t transcript_digest(const std::vector<ChannelEvent>& t) {
    std::uint64_t h = mix64(t.size());
    for (const auto& e : t) h = mix64(h ^ e.digest);
    return h;
}

ordered_json outcome_fields(const ScenarioReport& r) {
    ordered_json j;
    j["protocol"] = harness::to_string(r.protocol);
    j["adversary"] = harness::to_string(r.adversary);
    j["seed"] = r.seed;
    j["aborted"] = r.aborted;
    j["abort_step"] = opt(r.abort_step);
    j["abort_reason"] = opt(r.abort_reason);
    j["abort_detail"] = r.abort_detail.empty() ? ordered_json(nullptr) : ordered_json(r.abort_detail);
    j["qber"] = opt(r.qber);
    j["sift_rate"] = opt(r.sift_rate);
    j["eve_known_fraction"] = opt(r.eve_known_fraction);
    j["eve_payload_fidelity"] = opt(r.eve_payload_fidelity);
    j["sent_bits"] = r.sent_bits.empty() ? ordered_json(nullptr) : ordered_json(format_bits(r.sent_bits));
    j["recovered_bits"] = opt_bits(r.recovered_bits);
    j["eve_recovered_bits"] = opt_bits(r.eve_recovered_bits);
    j["kdc_blind"] = opt(r.kdc_blind);
    if (r.bb84) {
        const auto& m = *r.bb84;
        j["bb84"] = ordered_json{{"n_pulses", m.n_pulses},           {"detected_pulses", m.detected_pulses},
                                 {"sifted_length", m.sifted_length}, {"sample_size", m.sample_size},
                                 {"key_length", m.key_length},       {"qber_degenerate", m.qber_degenerate}};
    } else {
        j["bb84"] = nullptr;
    }
    return j;
}

ordered_json event_summary(const ChannelEvent& e) {
    return ordered_json{{"seq", e.seq},
                        {"session", e.session},
                        {"sender", to_string(e.sender)},
                        {"receiver", to_string(e.receiver)},
                        {"kind", harness::to_string(e.kind)},
                        {"step", e.step},
                        {"pass_index", e.pass_index},
                        {"captured", e.captured},
                        {"injected", e.injected},
                        {"n_states", e.states.size()},
                        {"digest", digest_hex(e.digest)}};
}

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : ""; }
std::string cell(const std::optional<Bits>& v) { return v ? format_bits(*v) : ""; }

std::string csv_row(std::size_t trial, const ScenarioReport& r) {
    const std::vector<std::string> cells{
        std::to_string(trial),
        std::to_string(r.seed),
        harness::to_string(r.protocol),
        harness::to_string(r.adversary),
        r.aborted ? "true" : "false",
        r.abort_step ? std::to_string(*r.abort_step) : "",
        r.abort_reason.value_or(""),
        cell(r.qber),
        cell(r.sift_rate),
        cell(r.eve_known_fraction),
        cell(r.eve_payload_fidelity),
        format_bits(r.sent_bits),
        cell(r.recovered_bits),
        cell(r.eve_recovered_bits),
    };
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
    return line + "\n";
}

std::string csv_header() {
    std::string line;
    for (const auto& c : csv_columns()) line += (line.empty() ? "" : ",") + c;
    return line + "\n";
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string digest_hex(std::uint64_t d) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(d));
    return buf;
}

std::string report_json(const ScenarioReport& r) {
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["kind"] = "scenario";
    j.update(outcome_fields(r));
    j["transcript_digest"] = digest_hex(transcript_digest(r.transcript));
    auto events = ordered_json::array();
    for (const auto& e : r.transcript) events.push_back(event_summary(e));
    j["transcript"] = std::move(events);
    return j.dump(2) + "\n";
}

std::string batch_json(const BatchReport& b) {
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["kind"] = "batch";
    j["protocol"] = b.rows.empty() ? ordered_json(nullptr) : ordered_json(harness::to_string(b.rows.front().protocol));
    j["adversary"] = b.rows.empty() ? ordered_json(nullptr) : ordered_json(harness::to_string(b.rows.front().adversary));
    j["master_seed"] = b.master_seed;
    j["trials"] = b.trials;
    j["detections"] = b.detections;
    j["recovered_exact"] = b.recovered_exact;
    j["qber"] = summary(b.qber);
    j["sift_rate"] = summary(b.sift_rate);
    j["eve_known_fraction"] = summary(b.eve_known_fraction);
    j["eve_payload_fidelity"] = summary(b.eve_payload_fidelity);
    auto rows = ordered_json::array();
    for (std::size_t i = 0; i < b.rows.size(); ++i) {
        ordered_json row;
        row["trial"] = i;
        row.update(outcome_fields(b.rows[i]));
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> columns{
        "trial",     "seed",           "protocol",           "adversary",
        "aborted",   "abort_step",     "abort_reason",       "qber",
        "sift_rate", "eve_known_fraction", "eve_payload_fidelity", "sent_bits",
        "recovered_bits", "eve_recovered_bits",
    };
    return columns;
}

std::string report_csv(const ScenarioReport& r) { return csv_header() + csv_row(0, r); }

std::string batch_csv(const BatchReport& b) {
    std::string out = csv_header();
    for (std::size_t i = 0; i < b.rows.size(); ++i) out += csv_row(i, b.rows[i]);
    return out;
}

std::string transcript_jsonl(const std::vector<ChannelEvent>& transcript) {
    std::string out;
    for (const auto& e : transcript) {
        ordered_json j = event_summary(e);
        j["content"] = e.content;
        auto states = ordered_json::array();
        for (const auto& s : e.states) {
            auto amps = ordered_json::array();
            for (const auto& a : s.amplitudes()) amps.push_back(ordered_json::array({a.real(), a.imag()}));
            states.push_back(ordered_json{{"n_qubits", s.n_qubits()}, {"amplitudes", std::move(amps)}});
        }
        j["states"] = std::move(states);
        if (e.message) j["header_qubits"] = e.message->q_encoded_header.size();
        out += j.dump() + "\n";
    }
    return out;
}

}  // namespace qkdsim::io
