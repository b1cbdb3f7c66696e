#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qkdsim/bb84.hpp"
#include "qkdsim/config.hpp"
#include "qkdsim/harness.hpp"
#include "qkdsim/quantum.hpp"
#include "qkdsim/report.hpp"

namespace py = pybind11;
using namespace qkdsim;

namespace {

using Matrix = std::vector<std::vector<Complex>>;

Matrix to_matrix(const Operator& op) {
    Matrix m(op.dim(), std::vector<Complex>(op.dim()));
    for (std::size_t r = 0; r < op.dim(); ++r)
        for (std::size_t c = 0; c < op.dim(); ++c) m[r][c] = op(r, c);
    return m;
}

harness::ScenarioConfig parse(const std::string& yaml, const std::vector<std::string>& overrides) {
    return io::parse_scenario(yaml, overrides);
}

std::vector<Basis> parse_bases(const std::string& s) {
    std::vector<Basis> out;
    for (char c : s) out.push_back(parse_basis(c));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "qkdsim native core";

    py::register_exception<harness::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<io::ConfigFileError>(m, "ConfigFileError", PyExc_FileNotFoundError);

    m.attr("REPORT_SCHEMA_VERSION") = io::kReportSchemaVersion;

    m.def("run_scenario_json", [](const std::string& yaml, const std::vector<std::string>& overrides) {
        const auto config = parse(yaml, overrides);
        py::gil_scoped_release release;
        return io::report_json(harness::run_scenario(config));
    }, py::arg("yaml"), py::arg("overrides") = std::vector<std::string>{});

    m.def("run_scenario_csv", [](const std::string& yaml, const std::vector<std::string>& overrides) {
        const auto config = parse(yaml, overrides);
        py::gil_scoped_release release;
        return io::report_csv(harness::run_scenario(config));
    }, py::arg("yaml"), py::arg("overrides") = std::vector<std::string>{});

    m.def("run_transcript_jsonl", [](const std::string& yaml, const std::vector<std::string>& overrides) {
        const auto config = parse(yaml, overrides);
        py::gil_scoped_release release;
        return io::transcript_jsonl(harness::run_scenario(config).transcript);
    }, py::arg("yaml"), py::arg("overrides") = std::vector<std::string>{});

    m.def("run_batch_json", [](const std::string& yaml, std::size_t trials, const std::vector<std::string>& overrides) {
        const auto config = parse(yaml, overrides);
        py::gil_scoped_release release;
        return io::batch_json(harness::run_batch(config, trials));
    }, py::arg("yaml"), py::arg("trials"), py::arg("overrides") = std::vector<std::string>{});

    m.def("run_batch_csv", [](const std::string& yaml, std::size_t trials, const std::vector<std::string>& overrides) {
        const auto config = parse(yaml, overrides);
        py::gil_scoped_release release;
        return io::batch_csv(harness::run_batch(config, trials));
    }, py::arg("yaml"), py::arg("trials"), py::arg("overrides") = std::vector<std::string>{});

    m.def("resolve_config_path", [](const std::string& path) { return io::resolve_config_path(path).string(); });
    m.def("canonical_yaml", [](const std::string& yaml, const std::vector<std::string>& overrides) {
        return io::scenario_yaml(parse(yaml, overrides));
    }, py::arg("yaml"), py::arg("overrides") = std::vector<std::string>{});
    m.def("config_keys", &io::config_keys);
    m.def("csv_columns", &io::csv_columns);

    m.def("rotation", [](double theta) { return to_matrix(rotation(theta)); });
    m.def("pauli", [](const std::string& which) {
        if (which == "X") return to_matrix(pauli(Pauli::X));
        if (which == "Y") return to_matrix(pauli(Pauli::Y));
        if (which == "Z") return to_matrix(pauli(Pauli::Z));
        throw py::value_error("pauli expects 'X', 'Y' or 'Z'");
    });

    m.def("sift", [](const std::string& alice_bases, const std::string& bob_bases, const std::vector<int>& alice_bits,
                     const std::vector<int>& bob_bits) {
        const auto a = parse_bases(alice_bases), b = parse_bases(bob_bases);
        const Bits ab(alice_bits.begin(), alice_bits.end()), bb(bob_bits.begin(), bob_bits.end());
        const std::vector<bool> detected(a.size(), true);
        const auto s = bb84::sift(a, b, ab, bb, detected);
        return py::make_tuple(s.kept_positions, format_bits(s.alice_key), format_bits(s.bob_key));
    }, py::arg("alice_bases"), py::arg("bob_bases"), py::arg("alice_bits"), py::arg("bob_bits"));
}
