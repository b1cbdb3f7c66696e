#include "qkdsim/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "qkdsim/report.hpp"

namespace qkdsim::io {
namespace {

using harness::ConfigError;
using harness::ScenarioConfig;

using Setter = std::function<std::optional<std::string>(ScenarioConfig&, const std::string&)>;

template <typename T>
std::optional<T> parse_integer(const std::string& s) {
    T v{};
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end) return std::nullopt;
    return v;
}

std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end) return std::nullopt;
    return v;
}

std::optional<bool> parse_bool(const std::string& s) {
    if (s == "true" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "no" || s == "off") return false;
    return std::nullopt;
}

template <typename T>
Setter set_uint(T ScenarioConfig::*field) {
    return [field](ScenarioConfig& c, const std::string& v) -> std::optional<std::string> {
        const auto x = parse_integer<std::uint64_t>(v);
        if (!x) return "expected a non-negative integer, got '" + v + "'";
        c.*field = static_cast<T>(*x);
        return std::nullopt;
    };
}

template <typename Sub, typename T>
Setter sub_uint(Sub ScenarioConfig::*sub, T Sub::*field) {
    return [sub, field](ScenarioConfig& c, const std::string& v) -> std::optional<std::string> {
        const auto x = parse_integer<std::uint64_t>(v);
        if (!x) return "expected a non-negative integer, got '" + v + "'";
        (c.*sub).*field = static_cast<T>(*x);
        return std::nullopt;
    };
}

template <typename Sub>
Setter sub_int(Sub ScenarioConfig::*sub, std::int64_t Sub::*field) {
    return [sub, field](ScenarioConfig& c, const std::string& v) -> std::optional<std::string> {
        const auto x = parse_integer<std::int64_t>(v);
        if (!x) return "expected an integer, got '" + v + "'";
        (c.*sub).*field = *x;
        return std::nullopt;
    };
}

template <typename Sub>
Setter sub_double(Sub ScenarioConfig::*sub, double Sub::*field) {
    return [sub, field](ScenarioConfig& c, const std::string& v) -> std::optional<std::string> {
        const auto x = parse_double(v);
        if (!x) return "expected a number, got '" + v + "'";
        (c.*sub).*field = *x;
        return std::nullopt;
    };
}

template <typename Sub>
Setter sub_bool(Sub ScenarioConfig::*sub, bool Sub::*field) {
    return [sub, field](ScenarioConfig& c, const std::string& v) -> std::optional<std::string> {
        const auto x = parse_bool(v);
        if (!x) return "expected true or false, got '" + v + "'";
        (c.*sub).*field = *x;
        return std::nullopt;
    };
}

Setter party_id(auth::PartyId auth::ExchangeConfig::*field) {
    return [field](ScenarioConfig& c, const std::string& v) -> std::optional<std::string> {
        try {
            c.auth.*field = auth::PartyId(v);
        } catch (const std::exception& e) {
            return e.what();
        }
        return std::nullopt;
    };
}

std::optional<std::string> set_bits(Bits& out, const std::string& v) {
    try {
        out = parse_bits(v);
    } catch (const std::exception&) {
        return "expected a string of 0/1 characters, got '" + v + "'";
    }
    return std::nullopt;
}

const std::vector<std::pair<std::string, Setter>>& setters() {
    using harness::AdversaryPolicy;
    static const std::vector<std::pair<std::string, Setter>> table{
        {"protocol",
         [](ScenarioConfig& c, const std::string& v) -> std::optional<std::string> {
             const auto p = harness::parse_protocol(v);
             if (!p) return "unknown protocol '" + v + "' (bb84, three_stage, three_stage_auth)";
             c.protocol = *p;
             return std::nullopt;
         }},
        {"seed", set_uint(&ScenarioConfig::seed)},
        {"message", [](ScenarioConfig& c, const std::string& v) { return set_bits(c.message, v); }},
        {"message_length", set_uint(&ScenarioConfig::message_length)},
        {"qubits_per_unit",
         [](ScenarioConfig& c, const std::string& v) -> std::optional<std::string> {
             const auto x = parse_integer<int>(v);
             if (!x) return "expected an integer, got '" + v + "'";
             c.qubits_per_unit = *x;
             return std::nullopt;
         }},
        {"adversary.kind",
         [](ScenarioConfig& c, const std::string& v) -> std::optional<std::string> {
             const auto a = harness::parse_adversary_kind(v);
             if (!a) return "unknown adversary '" + v + "'";
             c.adversary.kind = *a;
             return std::nullopt;
         }},
        {"adversary.fake_bits", [](ScenarioConfig& c, const std::string& v) { return set_bits(c.adversary.fake_bits, v); }},
        {"adversary.replay_step",
         [](ScenarioConfig& c, const std::string& v) -> std::optional<std::string> {
             const auto x = parse_integer<int>(v);
             if (!x) return "expected an integer, got '" + v + "'";
             c.adversary.replay_step = *x;
             return std::nullopt;
         }},
        {"adversary.replay_delay_millis", sub_uint(&ScenarioConfig::adversary, &AdversaryPolicy::replay_delay_millis)},
        {"adversary.replay_same_session", sub_bool(&ScenarioConfig::adversary, &AdversaryPolicy::replay_same_session)},
        {"bb84.n_pulses", sub_uint(&ScenarioConfig::bb84, &bb84::Config::n_pulses)},
        {"bb84.mean_photon_number", sub_double(&ScenarioConfig::bb84, &bb84::Config::mean_photon_number)},
        {"bb84.sample_fraction", sub_double(&ScenarioConfig::bb84, &bb84::Config::sample_fraction)},
        {"bb84.qber_abort_threshold", sub_double(&ScenarioConfig::bb84, &bb84::Config::qber_abort_threshold)},
        {"auth.redundancy", sub_uint(&ScenarioConfig::auth, &auth::ExchangeConfig::redundancy)},
        {"auth.window_millis",
         [](ScenarioConfig& c, const std::string& v) -> std::optional<std::string> {
             const auto x = parse_integer<std::uint64_t>(v);
             if (!x) return "expected a non-negative integer, got '" + v + "'";
             c.auth.policy.window_millis = *x;
             return std::nullopt;
         }},
        {"auth.hop_millis", sub_uint(&ScenarioConfig::auth, &auth::ExchangeConfig::hop_millis)},
        {"auth.alice_skew_millis", sub_int(&ScenarioConfig::auth, &auth::ExchangeConfig::alice_skew_millis)},
        {"auth.bob_skew_millis", sub_int(&ScenarioConfig::auth, &auth::ExchangeConfig::bob_skew_millis)},
        {"auth.kdc_skew_millis", sub_int(&ScenarioConfig::auth, &auth::ExchangeConfig::kdc_skew_millis)},
        {"auth.kdc_available", sub_bool(&ScenarioConfig::auth, &auth::ExchangeConfig::kdc_available)},
        {"auth.relay_pass2_via_kdc", sub_bool(&ScenarioConfig::auth, &auth::ExchangeConfig::relay_pass2_via_kdc)},
        {"auth.alice_id", party_id(&auth::ExchangeConfig::alice)},
        {"auth.bob_id", party_id(&auth::ExchangeConfig::bob)},
        {"auth.kdc_id", party_id(&auth::ExchangeConfig::kdc)},
    };
    return table;
}

void flatten(const YAML::Node& node, const std::string& prefix, std::map<std::string, std::string>& out,
             std::vector<std::string>& problems) {
    for (const auto& kv : node) {
        const std::string key = prefix.empty() ? kv.first.as<std::string>() : prefix + "." + kv.first.as<std::string>();
        const YAML::Node& v = kv.second;
        if (v.IsMap()) flatten(v, key, out, problems);
        else if (v.IsScalar()) out[key] = v.Scalar();
        else if (v.IsNull()) problems.push_back(key + ": missing value");
        else problems.push_back(key + ": expected a scalar or a mapping");
    }
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) return v.substr(1, v.size() - 2);
    return v;
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : setters()) k.push_back(name);
        return k;
    }();
    return keys;
}

ScenarioConfig parse_scenario(const std::string& yaml_text, const std::vector<std::string>& overrides) {
    std::vector<std::string> problems;
    std::map<std::string, std::string> flat;
    try {
        const YAML::Node root = YAML::Load(yaml_text);
        if (root.IsMap()) flatten(root, "", flat, problems);
        else if (!root.IsNull()) problems.emplace_back("config must be a mapping of keys to values");
    } catch (const YAML::Exception& e) {
        problems.push_back(std::string("YAML syntax error: ") + e.what());
    }

    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) {
            problems.push_back("override '" + o + "' is not of the form key=value");
            continue;
        }
        flat[o.substr(0, eq)] = unquote(o.substr(eq + 1));
    }

    ScenarioConfig config;
    bool protocol_ok = flat.count("protocol") > 0;
    if (!protocol_ok) problems.emplace_back("protocol is required");
    const auto& table = setters();
    for (const auto& [key, value] : flat) {
        const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == key; });
        if (it == table.end()) {
            problems.push_back("unknown key '" + key + "'");
            continue;
        }
        if (const auto err = it->second(config, value)) {
            problems.push_back(key + ": " + *err);
            if (key == "protocol") protocol_ok = false;
        }
    }
    if (protocol_ok)
        for (auto& p : config.validate()) problems.push_back(std::move(p));
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return config;
}

std::filesystem::path resolve_config_path(const std::string& path) {
    namespace fs = std::filesystem;
    std::vector<fs::path> candidates{path};
    if (const char* dir = std::getenv(kConfigDirEnv); dir && *dir && fs::path(path).is_relative()) {
        candidates.push_back(fs::path(dir) / path);
        candidates.push_back(fs::path(dir) / (path + ".yaml"));
    }
    for (const auto& c : candidates) {
        std::error_code ec;
        if (fs::is_regular_file(c, ec)) return c;
    }
    throw ConfigFileError("config file not found: " + path);
}

ScenarioConfig load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
    const auto resolved = resolve_config_path(path);
    std::ifstream in(resolved, std::ios::binary);
    if (!in) throw ConfigFileError("cannot read config file: " + resolved.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str(), overrides);
}

std::string scenario_yaml(const ScenarioConfig& c) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "protocol" << YAML::Value << harness::to_string(c.protocol);
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    if (!c.message.empty()) out << YAML::Key << "message" << YAML::Value << YAML::DoubleQuoted << format_bits(c.message);
    else out << YAML::Key << "message_length" << YAML::Value << c.message_length;
    out << YAML::Key << "qubits_per_unit" << YAML::Value << c.qubits_per_unit;

    out << YAML::Key << "adversary" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << harness::to_string(c.adversary.kind);
    if (!c.adversary.fake_bits.empty())
        out << YAML::Key << "fake_bits" << YAML::Value << YAML::DoubleQuoted << format_bits(c.adversary.fake_bits);
    out << YAML::Key << "replay_step" << YAML::Value << c.adversary.replay_step;
    out << YAML::Key << "replay_delay_millis" << YAML::Value << c.adversary.replay_delay_millis;
    out << YAML::Key << "replay_same_session" << YAML::Value << c.adversary.replay_same_session;
    out << YAML::EndMap;

    out << YAML::Key << "bb84" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "n_pulses" << YAML::Value << c.bb84.n_pulses;
    out << YAML::Key << "mean_photon_number" << YAML::Value << format_number(c.bb84.mean_photon_number);
    out << YAML::Key << "sample_fraction" << YAML::Value << format_number(c.bb84.sample_fraction);
    out << YAML::Key << "qber_abort_threshold" << YAML::Value << format_number(c.bb84.qber_abort_threshold);
    out << YAML::EndMap;

    out << YAML::Key << "auth" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "redundancy" << YAML::Value << c.auth.redundancy;
    out << YAML::Key << "window_millis" << YAML::Value << c.auth.policy.window_millis;
    out << YAML::Key << "hop_millis" << YAML::Value << c.auth.hop_millis;
    out << YAML::Key << "alice_skew_millis" << YAML::Value << c.auth.alice_skew_millis;
    out << YAML::Key << "bob_skew_millis" << YAML::Value << c.auth.bob_skew_millis;
    out << YAML::Key << "kdc_skew_millis" << YAML::Value << c.auth.kdc_skew_millis;
    out << YAML::Key << "kdc_available" << YAML::Value << c.auth.kdc_available;
    out << YAML::Key << "relay_pass2_via_kdc" << YAML::Value << c.auth.relay_pass2_via_kdc;
    out << YAML::Key << "alice_id" << YAML::Value << c.auth.alice.str();
    out << YAML::Key << "bob_id" << YAML::Value << c.auth.bob.str();
    out << YAML::Key << "kdc_id" << YAML::Value << c.auth.kdc.str();
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace qkdsim::io
