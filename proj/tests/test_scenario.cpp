#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "vne/errors.hpp"
#include "vne/scenario.hpp"

using namespace vne;
namespace fs = std::filesystem;

namespace {

const char* kReference = R"({
  "id": "reference",
  "model": {"n": 2, "A": {"pairs": [1.0]}},
  "seed": {"family": "anticommuting", "couplings": [1.0]},
  "darboux": {"mu": [0.0, 1.0], "nu": "conjugate", "lambda": [0.0, 3.0]},
  "times": {"t_min": -1.0, "t_max": 1.0, "samples": 5}
})";

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

std::string schema_field(const std::string& text) {
    try {
        parse_config(text);
    } catch (const SchemaError& e) {
        return e.field();
    }
    return "";
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("vne_scenario_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("scenario_cli") {

TEST_CASE("complex text") {
    CHECK(parse_complex("i") == Complex(0, 1));
    CHECK(parse_complex("-i") == Complex(0, -1));
    CHECK(parse_complex("2i") == Complex(0, 2));
    CHECK(parse_complex("1+i") == Complex(1, 1));
    CHECK(parse_complex("0.5-2.5i") == Complex(0.5, -2.5));
    CHECK(parse_complex(" 3 ") == Complex(3, 0));
    CHECK(parse_complex("1e-3+4e2i") == Complex(1e-3, 4e2));
    CHECK_THROWS_AS(parse_complex("1+"), InvalidInput);
    CHECK_THROWS_AS(parse_complex("abc"), InvalidInput);
}

TEST_CASE("schema errors name the field") {
    CHECK(schema_field(replace(kReference, "[0.0, 1.0]", "[0.0, 0.0]")) == "/darboux/mu");
    CHECK(schema_field(replace(kReference, "\"samples\": 5", "\"samples\": 1")) == "/times/samples");
    CHECK(schema_field(replace(kReference, "\"t_max\": 1.0", "\"t_max\": -3.0")) == "/times/t_max");
    CHECK(schema_field(replace(kReference, "\"id\": \"reference\",", "")) == "/id");
    CHECK(schema_field(replace(kReference, "\"anticommuting\"", "\"bogus\"")) == "/seed/family");
    CHECK(schema_field(replace(kReference, "\"n\": 2", "\"n\": 0")) == "/model/n");
    CHECK(schema_field(replace(kReference, "\"lambda\": [0.0, 3.0]", "\"lambda\": [0.0, 1.0]")) ==
          "/darboux/lambda");
    CHECK(schema_field(replace(kReference, "\"nu\": \"conjugate\"", "\"nu\": {\"explicit\": [0, 0]}")) ==
          "/darboux/nu/explicit");
    CHECK(schema_field(replace(kReference, "\"times\"", "\"extra\": 1, \"times\"")) == "/extra");
    CHECK(schema_field("{ not json") == "/");
}

TEST_CASE("config round-trips through JSON") {
    const ScenarioConfig c = parse_config(kReference);
    const ScenarioConfig d = parse_config(config_to_json(c));
    CHECK(config_to_json(c) == config_to_json(d));
    CHECK(d.darboux.mu == Complex(0, 1));
    CHECK(!d.darboux.nu.has_value());
}

TEST_CASE("reference scenario runs clean and is constant") {
    const ScenarioResult r = run_scenario(parse_config(kReference));
    CHECK(r.exit_code == kExitPass);
    const OperatorMatrix sx = make_matrix({{0.0, 1.0}, {1.0, 0.0}});
    for (const OperatorMatrix& m : r.trajectory.states) CHECK((m + sx).norm() <= 1e-10);
    REQUIRE(r.resolved.darboux.pin_z_mu.has_value());
    CHECK(std::abs(*r.resolved.darboux.pin_z_mu) < 1e-7);
}

TEST_CASE("tolerance overrides and the global multiplier") {
    const ScenarioConfig c = parse_config(replace(kReference, "\"times\"", "\"tolerances\": {\"form_gap\": 1e-7}, \"times\""));
    const Tolerances t = resolve_tolerances(c, 10.0);
    CHECK(t.form_gap == doctest::Approx(1e-6));
    CHECK(t.bridge == doctest::Approx(1e-9));
    CHECK_THROWS_AS(resolve_tolerances(c, -1.0), SchemaError);
}

TEST_CASE("run command exit codes") {
    const fs::path dir = scratch("run");
    std::ostringstream out, err;
    {
        std::ofstream(dir / "ok.json") << kReference;
        std::ofstream(dir / "zero.json") << replace(kReference, "[0.0, 1.0]", "[0.0, 0.0]");
        std::ofstream(dir / "singular.json") << R"({
          "id": "singular",
          "model": {"n": 1, "A": {"diag": [1.0, -1.0]}},
          "seed": {"family": "commuting", "rho": [[0, 0], [0, 0]]},
          "darboux": {"mu": 1, "nu": {"explicit": -1}},
          "times": {"t_min": 0, "t_max": 1, "samples": 3}
        })";
    }
    CHECK(run_command((dir / "ok.json").string(), (dir / "ok").string(), {}, out, err) == kExitPass);
    CHECK(fs::exists(dir / "ok" / "trajectory.csv"));
    CHECK(fs::exists(dir / "ok" / "report.json"));
    CHECK(fs::exists(dir / "ok" / "scenario.lock.json"));
    CHECK(run_command((dir / "zero.json").string(), (dir / "zero").string(), {}, out, err) == kExitSchema);
    CHECK(run_command((dir / "singular.json").string(), (dir / "singular").string(), {}, out, err) == kExitSingular);
    CHECK(err.str().find("t = 0") != std::string::npos);
    CHECK(run_command((dir / "missing.json").string(), (dir / "m").string(), {}, out, err) == kExitSchema);
}

TEST_CASE("a failing check gives exit 1") {
    const fs::path dir = scratch("fail");
    // a general-mode scenario has nonzero residual, which cannot meet 1e-40
    std::ofstream(dir / "tight2.json") << replace(replace(kReference, "\"times\"", "\"tolerances\": {\"residual_floor\": 1e-40, \"residual_stencil_constant\": 0}, \"times\""),
                                                 "[0.0, 1.0]", "[0.5, 1.0]");
    std::ostringstream out, err;
    CHECK(run_command((dir / "tight2.json").string(), (dir / "o").string(), {}, out, err) == kExitCheckFailed);
}

TEST_CASE("CSV round-trip and bitwise lock replay") {
    const fs::path dir = scratch("lock");
    std::ofstream(dir / "c.json") << replace(kReference, "[0.0, 1.0]", "[0.5, 1.0]");
    std::ostringstream out, err;
    REQUIRE(run_command((dir / "c.json").string(), (dir / "a").string(), {}, out, err) == kExitPass);
    REQUIRE(run_command((dir / "a" / "scenario.lock.json").string(), (dir / "b").string(), {}, out, err) == kExitPass);
    CHECK(slurp(dir / "a" / "trajectory.csv") == slurp(dir / "b" / "trajectory.csv"));

    const ScenarioResult r = run_scenario(parse_config(slurp(dir / "c.json")));
    std::istringstream csv(slurp(dir / "a" / "trajectory.csv"));
    const CsvTrajectory back = read_trajectory_csv(csv);
    REQUIRE(back.states.size() == r.trajectory.states.size());
    for (std::size_t i = 0; i < back.states.size(); ++i) {
        CHECK(back.times[i] == r.trajectory.times[i]);
        CHECK((back.states[i] - r.trajectory.states[i]).norm() == 0.0);
    }
}

TEST_CASE("sweeps") {
    const fs::path dir = scratch("sweep");
    std::ofstream(dir / "c.json") << kReference;
    std::ostringstream out, err;
    SweepOptions opts;
    opts.jobs = 3;
    CHECK(sweep_command((dir / "c.json").string(), "mu", {"i", "2i", "1+i"}, (dir / "mu").string(), opts, out, err) == kExitPass);
    const std::string summary = slurp(dir / "mu" / "summary.csv");
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 4);
    CHECK(fs::exists(dir / "mu" / "point_002" / "report.json"));
    CHECK(sweep_command((dir / "c.json").string(), "mu", {}, (dir / "e").string(), opts, out, err) == kExitSchema);
    CHECK(sweep_command((dir / "c.json").string(), "a", {"1"}, (dir / "a").string(), opts, out, err) == kExitSchema);
    CHECK(sweep_command((dir / "c.json").string(), "mu", {"zz"}, (dir / "z").string(), opts, out, err) == kExitSchema);
}

TEST_CASE("sweep of a rebuilds the delta seed") {
    const std::string cfg = R"({
      "id": "delta",
      "model": {"n": 1},
      "seed": {"family": "delta_commuting", "a": 1.0, "blocks": [{"omega": 1.0, "kappa": 0.5}]},
      "darboux": {"mu": [1.0, 1.0]},
      "times": {"t_min": -1, "t_max": 1, "samples": 3}
    })";
    const ScenarioConfig base = parse_config(cfg);
    for (double a : {0.0, 1.0, 2.0}) {
        const ScenarioConfig c = with_sweep_value(base, "a", std::to_string(a));
        const SeedSolution s = build_seed(c);
        CHECK(s.a == doctest::Approx(a));
        // Delta_a = (kappa^2 - a^2/4) I on the block
        CHECK((delta_operator(s) - (0.25 - a * a / 4) * identity(2)).norm() < 1e-14);
    }
}

TEST_CASE("density normalization pipeline in both orders") {
    for (const char* order : {"shift_then_dress", "dress_then_shift"}) {
        CAPTURE(order);
        const std::string cfg = replace(replace(kReference, "\"times\"",
                                                std::string("\"symmetries\": {\"normalize_density\": true, \"order\": \"") + order + "\"}, \"times\""),
                                        "[0.0, 1.0]", "[0.5, 1.0]");
        const ScenarioResult r = run_scenario(parse_config(cfg));
        CHECK(r.exit_code == kExitPass);
        for (const OperatorMatrix& m : r.trajectory.states) {
            CHECK(std::abs(m.trace() - 1.0) <= 1e-11);
            CHECK(eig_hermitian(0.5 * (m + m.adjoint())).values(0) >= -1e-10);
        }
        CHECK(r.resolved.symmetries.shift.value() == doctest::Approx(1.0));
        CHECK(r.resolved.symmetries.rescale.value() == doctest::Approx(0.5));
    }
}

}
