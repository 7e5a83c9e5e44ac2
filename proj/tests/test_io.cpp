#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cylab/lab.hpp"
#include "cylab/report.hpp"

using namespace cylab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("cylab_io_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

VerdictReport sample(int rows) {
    VerdictReport r;
    r.id = "sample";
    r.inputs = InputRecorder().add("x", 0.1).add("n", 4).items();
    r.lhs = cplx(1.0 / 3.0, -2e-17);
    r.rhs = cplx(0.1, 0.0);
    r.defect = 2.0 / 3.0;
    r.tolerance = 1e-4;
    r.notes = {"a \"quoted\" note"};
    for (int i = 0; i < rows; ++i) r.table.push_back({static_cast<double>(i), std::pow(0.1, i)});
    finalize(r);
    return r;
}

int lab(const std::string& cmd, const fs::path& cfg, const fs::path& out, std::string* err_text = nullptr) {
    std::ostringstream o, e;
    const int code = run_lab(cmd, cfg, out, o, e);
    if (err_text) *err_text = e.str();
    return code;
}

}  // namespace

TEST_CASE("canonical JSON and CSV") {
    const VerdictReport r = sample(3);
    const std::string a = canonical_dump(to_json(r));
    CHECK(a == canonical_dump(to_json(sample(3))));
    CHECK(a.find("0.33333333333333331") != std::string::npos);
    CHECK(a.find("\"defect\": 0.66666666666666663") != std::string::npos);
    CHECK(a.find("\"id\"") < a.find("\"inputs\""));

    const VerdictReport back = report_from_json(nlohmann::json::parse(a));
    CHECK(back == r);

    const std::string csv = table_csv(r);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.rfind("parameter,defect\n", 0) == 0);
    CHECK(table_csv(sample(0)) == "parameter,defect\n");

    VerdictReport nan = sample(1);
    nan.defect = std::nan("");
    finalize(nan);
    const auto j = nlohmann::json::parse(canonical_dump(to_json(nan)));
    CHECK(j.at("defect").is_null());
    CHECK(std::isnan(report_from_json(j).defect));

    CHECK_THROWS_AS(report_from_json(nlohmann::json::object()), InvalidInput);
}

TEST_CASE("emit_report writes byte-identical files") {
    const fs::path d = scratch_dir("emit");
    const auto p1 = emit_report(sample(2), d / "a", "r");
    const auto p2 = emit_report(sample(2), d / "b", "r");
    CHECK(slurp(p1.json) == slurp(p2.json));
    CHECK(slurp(p1.csv) == slurp(p2.csv));
    put(d / "file", "x");
    CHECK_THROWS_AS(emit_report(sample(2), d / "file", "r"), IoError);
}

TEST_CASE("config diagnostics name the field") {
    auto field_of = [](const std::string& text) -> std::string {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return e.field();
        }
        return "";
    };
    CHECK(field_of(R"({"structure": {"b_values": [1], "kernel_dim": 3}})") == "structure.kernel_dim");
    CHECK(field_of(R"({"structure": {"b_values": [1]}, "solver": {"windw": 3}})") == "solver.windw");
    CHECK(field_of(R"({"structure": {}})") == "structure.b_values");
    CHECK(field_of(R"({"structure": {"b_values": [-1]}})") == "structure.b_values");
    CHECK(field_of(R"({"structure": {"b_values": [1]}, "geometry": {"kind": "torus"}})") == "geometry.kind");
    CHECK(field_of(R"({"structure": {"b_values": [1]}, "boundary": {"left": {"type": "xyz"}, "right": {"type": "aps"}}})") ==
          "boundary.left.type");
    CHECK(field_of(R"({"structure": {"b_values": [1]}, "potential": {"kind": "bump", "amplitude": 1, "center": 0.9, "width": 0.5}})") ==
          "potential.center");
    CHECK(field_of("{\n  \"structure\": [1,\n}") == "<document>");

    const LabConfig c = parse_config(R"({"structure": {"b_values": [1, 2]}})");
    CHECK(c.window == 70.0);
    CHECK(c.echo.at("geometry").at("length") == 1.0);
    CHECK(c.echo.at("structure").at("kernel_dim") == 0);
    CHECK(build_structure(c).dim() == 4);
}

TEST_CASE("boundary specifications build Lagrangian points") {
    const fs::path d = scratch_dir("bc");
    put(d / "p.json", R"({"re": [[0.5, 0, 0.5, 0], [0, 0.5, 0, 0.5], [0.5, 0, 0.5, 0], [0, 0.5, 0, 0.5]]})");
    LabConfig c = parse_config(R"({"structure": {"b_values": [1]},
        "boundary": {"left": {"type": "aps"}, "right": {"type": "negative"}}})", d);
    // APS at the right end in its own inward convention is P₋(B)
    const auto a = doubled_boundary(c);
    c.right = BoundarySpec{"aps"};
    const auto b = doubled_boundary(c);
    CHECK(max_abs(a.P.bottomRightCorner(2, 2) - Mat::Identity(2, 2) + b.P.bottomRightCorner(2, 2)) < 1e-14);

    c.left.reset();
    c.right.reset();
    c.coupled = BoundarySpec{"custom", 0, 0.0, "p.json"};
    const Mat diag = doubled_boundary(c).P;
    CHECK(max_abs(diag - (Mat::Identity(4, 4) - periodic_coupling(build_structure(c)).P)) < 1e-15);
    put(d / "q.json", R"({"re": [[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]})");
    c.coupled = BoundarySpec{"custom", 0, 0.0, "q.json"};
    CHECK_THROWS_AS(doubled_boundary(c), ConfigError);

    c.coupled = BoundarySpec{"calderon", 0, 2.0, ""};
    CHECK(max_abs(doubled_boundary(c).P - calderon_graph_projection(build_structure(c), 2.0).P) == 0.0);

    LabConfig k = parse_config(R"({"structure": {"b_values": [1], "kernel_dim": 2},
        "boundary": {"left": {"type": "generalized_aps", "seed": 4}, "right": {"type": "aps"}}})");
    CHECK(build_operator(k).dim() == 4);
}

TEST_CASE("exit codes") {
    const fs::path d = scratch_dir("exit");
    put(d / "odd.json", R"({"structure": {"b_values": [1], "kernel_dim": 1}})");
    std::string err;
    CHECK(lab("verify", d / "odd.json", d / "out", &err) == exit_invalid_config);
    CHECK(err.find("structure.kernel_dim") != std::string::npos);
    CHECK(lab("verify", d / "missing.json", d / "out") == exit_internal);
    CHECK(lab("frobnicate", d / "odd.json", d / "out") == exit_invalid_config);

    put(d / "conj.json", R"({"structure": {"b_values": [1]},
        "experiment": {"id": "conjugation_index", "params": {"winding": 2}}})");
    CHECK(lab("verify", d / "conj.json", d / "out") == exit_ok);
    CHECK(lab("sweep", d / "conj.json", d / "out") == exit_invalid_config);
    put(d / "file", "x");
    CHECK(lab("verify", d / "conj.json", d / "file") == exit_internal);

    put(d / "aps.json", R"({"structure": {"b_values": [1]}, "geometry": {"R_list": [1]}, "solver": {"window": 60},
        "experiment": {"id": "adiabatic_det_aps"}})");
    CHECK(lab("sweep", d / "aps.json", d / "out") == exit_failed);

    put(d / "unk.json", R"({"structure": {"b_values": [1]}, "experiment": {"id": "conjugation_index", "params": {"k": 1}}})");
    CHECK(lab("verify", d / "unk.json", d / "out", &err) == exit_invalid_config);
    CHECK(err.find("experiment.params.k") != std::string::npos);

    const auto j = nlohmann::json::parse(slurp(d / "out" / "conjugation_index.json"));
    CHECK(j.at("config").at("experiment").at("params").at("phase") == 0.125);
    CHECK(report_from_json(j).pass);
}
