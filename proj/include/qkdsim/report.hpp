#pragma once

// Machine-readable report emission. Field names and the CSV header are
// versioned by kReportSchemaVersion; see docs/report_schema.md.

#include <string>
#include <vector>

#include "qkdsim/harness.hpp"

namespace qkdsim::io {

inline constexpr int kReportSchemaVersion = 1;

// Pretty-printed JSON, newline-terminated. The transcript is summarized by
// event metadata and digests; amplitudes go to transcript_jsonl.
std::string report_json(const harness::ScenarioReport& report);
std::string batch_json(const harness::BatchReport& batch);

const std::vector<std::string>& csv_columns();
// Header line plus one row per scenario (one for a single run).
std::string report_csv(const harness::ScenarioReport& report);
std::string batch_csv(const harness::BatchReport& batch);

// One JSON object per event, including payload amplitudes.
std::string transcript_jsonl(const std::vector<harness::ChannelEvent>& transcript);

// Shortest round-trip decimal form.
std::string format_number(double v);
std::string digest_hex(std::uint64_t d);

}  // namespace qkdsim::io
