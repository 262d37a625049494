#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hhgq/scenario.hpp"

using namespace hhgq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hhgq_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<double>> numeric_rows(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::vector<std::vector<double>> rows;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

Scenario small_scenario(const fs::path& out) {
    Scenario s = parse_config_text(
        "omega0 = 1\n"
        "peak_rabi = 0.5\n"
        "duration = 20\n"
        "t_end = 20\n"
        "omega_min = 1\n"
        "omega_max = 3\n"
        "mode_count = 3\n"
        "coupling_scale = 0.05\n"
        "dt = 0.01\n"
        "sample_every = 20\n");
    s.out_dir = out.string();
    return s;
}

}  // namespace

TEST_CASE("minimal file fills defaults") {
    const auto s = parse_config_text("omega0 = 1.0\nt_end = 10\n");
    Scenario expected;
    expected.system.omega0 = 1.0;
    expected.system.t_end = 10.0;
    CHECK(s == expected);
}

TEST_CASE("comments, blank lines and whitespace") {
    const auto s = parse_config_text("# header\n\n  omega0   =  2.5   # trailing\nrun=compare\n");
    CHECK(s.system.omega0 == 2.5);
    CHECK(s.run == RunMode::compare);
}

TEST_CASE("range error names both keys") {
    try {
        parse_config_text("omega_min = 4\nomega_max = 2\nmode_count = 3\n", "range.cfg");
        FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("omega_min") != std::string::npos);
        CHECK(msg.find("omega_max") != std::string::npos);
        CHECK(msg.find("range.cfg") != std::string::npos);
    }
}

TEST_CASE("oracle dimension guard") {
    CHECK_NOTHROW(parse_config_text("mode_count = 3\nomega_max = 3\nrun = oracle\n"));
    CHECK_THROWS_WITH_AS(parse_config_text("mode_count = 4\nomega_max = 3\nrun = oracle\n"),
                         doctest::Contains("mode_count"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("mode_count = 4\nomega_max = 3\nrun = compare\n"), ConfigError);
    CHECK_NOTHROW(parse_config_text("mode_count = 4\nomega_max = 3\nrun = hierarchy\n"));
}

TEST_CASE("unknown keys and malformed lines report their line") {
    CHECK_THROWS_WITH_AS(parse_config_text("omega0 = 1\nomgea0 = 2\n", "typo.cfg"),
                         doctest::Contains("typo.cfg:2"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("omega0 = 1\n\nomega0 = 2\n", "dup.cfg"),
                         doctest::Contains("dup.cfg:3"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("t_end = ten\n", "bad.cfg"), doctest::Contains("bad.cfg:1"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("\nomega0\n", "eq.cfg"), doctest::Contains("eq.cfg:2"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("omega0 =\n", "empty.cfg"), doctest::Contains("empty.cfg:1"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("run = everything\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("drive_shape = square\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("e2_mode = both\n"), ConfigError);
}

TEST_CASE("automatic dt") {
    const auto s = parse_config_text("omega_min = 0.5\nomega_max = 35.5\nmode_count = 71\ndt = auto\n");
    CHECK(s.system.integration.dt == recommended_dt(s.system));
}

TEST_CASE("rendered config parses back to the same scenario") {
    Scenario s = small_scenario("x");
    s.appendix_literal = true;
    s.e2_mode = SecondMomentMode::PaperLiteral;
    s.system.drive.shape = PulseShape::FlatTop;
    s.system.drive.ramp = 3.0;
    s.system.drive.carrier_phase = 0.1;
    s.system.integration.adaptive = true;
    const auto text = render_config(s);
    CHECK(parse_config_text(text) == s);
    for (const auto& key : config_keys()) CHECK(text.find("\n" + key + " = ") != std::string::npos);
}

TEST_CASE("zero-coupling run stays in the vacuum") {
    const auto dir = scratch("vacuum");
    Scenario s = small_scenario(dir);
    s.system.coupling_scale = 0.0;
    const auto r = run(s);
    REQUIRE(r.exit_code == 0);
    const auto rows = numeric_rows(dir / "modes.csv");
    REQUIRE(rows.size() > 5);
    for (const auto& row : rows) {
        REQUIRE(row.size() == 1 + 6 * 3);
        for (std::size_t n = 0; n < 3; ++n) {
            CHECK(row[1 + 6 * n] == 0.0);
            CHECK(row[2 + 6 * n] == 0.25);
            CHECK(row[3 + 6 * n] == 0.25);
            CHECK(row[6 + 6 * n] == 0.0);
        }
    }
}

TEST_CASE("output files carry schema lines and headers") {
    const auto dir = scratch("schema");
    const auto r = run(small_scenario(dir));
    REQUIRE(r.exit_code == 0);
    CHECK(slurp(dir / "modes.csv").starts_with("# hhgq modes.csv schema 1\nt,N_0,lambda_minus_0,lambda_plus_0,"));
    CHECK(slurp(dir / "spectrogram.csv").starts_with("# hhgq spectrogram.csv schema 1\nt,omega,N\n"));
    CHECK(slurp(dir / "farfield.csv").starts_with("# hhgq farfield.csv schema 1\nt,e_mean,var_full,var_semiclassical\n"));
    const auto modes = slurp(dir / "modes.csv");
    CHECK(modes.find('\r') == std::string::npos);

    const auto sc = scratch("semiclassical");
    Scenario s = small_scenario(sc);
    s.semiclassical_only = true;
    REQUIRE(run(s).exit_code == 0);
    CHECK(slurp(sc / "farfield.csv").starts_with("# hhgq farfield.csv schema 1\nt,e_mean,var_semiclassical\n"));
}

TEST_CASE("run_meta reproduces the run") {
    const auto a = scratch("meta_a");
    const auto b = scratch("meta_b");
    REQUIRE(run(small_scenario(a)).exit_code == 0);
    Scenario again = parse_config(a / "run_meta.cfg");
    again.out_dir = b.string();
    REQUIRE(run(again).exit_code == 0);
    for (const char* f : {"modes.csv", "spectrogram.csv", "farfield.csv", "diagnostics.txt"}) {
        CHECK(slurp(a / f) == slurp(b / f));
    }
}

TEST_CASE("identical scenarios give byte-identical files") {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    REQUIRE(run(small_scenario(a)).exit_code == 0);
    REQUIRE(run(small_scenario(b)).exit_code == 0);
    for (const char* f : {"modes.csv", "spectrogram.csv", "farfield.csv"}) CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("compare mode writes the deviation table and report") {
    const auto dir = scratch("compare");
    Scenario s = small_scenario(dir);
    s.system.modes = {1.0, 1.0, 1};
    s.system.coupling_scale = 0.01;
    s.run = RunMode::compare;
    const auto r = run(s);
    REQUIRE(r.exit_code == 0);
    const auto csv = slurp(dir / "compare.csv");
    CHECK(csv.starts_with("# hhgq compare.csv schema 1\n"));
    CHECK(csv.find("d_N_0") != std::string::npos);
    CHECK(csv.find("d_lambda_minus_0") != std::string::npos);
    const auto report = slurp(dir / "compare_report.txt");
    CHECK(report.find("appendix_verdict") != std::string::npos);
    CHECK(report.find("e2_verdict = operator") != std::string::npos);
}

TEST_CASE("oracle mode runs the exact solver") {
    const auto dir = scratch("oracle");
    Scenario s = small_scenario(dir);
    s.system.modes = {1.0, 2.0, 2};
    s.run = RunMode::oracle;
    s.fock_cutoff = 6;
    REQUIRE(run(s).exit_code == 0);
    const auto rows = numeric_rows(dir / "modes.csv");
    REQUIRE_FALSE(rows.empty());
    for (const auto& row : rows) CHECK(row[2] * row[3] >= 1.0 / 16.0 - 1e-9);  // exact states obey Heisenberg
}

TEST_CASE("divergence leaves truncated files and a nonzero exit code") {
    const auto dir = scratch("diverge");
    Scenario s = small_scenario(dir);
    s.system.drive.peak_rabi = 5000.0;
    s.system.integration.dt = 0.5;
    s.system.t_end = 200.0;
    s.system.drive.duration = 200.0;
    s.system.sample_every = 1;
    const auto r = run(s);
    CHECK(r.exit_code != 0);
    const auto modes = slurp(dir / "modes.csv");
    CHECK(modes.find("# TRUNCATED") != std::string::npos);
    CHECK(modes.ends_with("\n"));
    CHECK(fs::exists(dir / "run_meta.cfg"));
}

#ifdef HHGQ_SIMULATE
TEST_CASE("simulate executable") {
    const auto dir = scratch("exe");
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / "s.cfg");
        cfg << "omega0 = 1\nt_end = 5\ncoupling_scale = 0.01\n";
    }
    const std::string exe = HHGQ_SIMULATE;
    const auto out = dir / "out";
    const std::string ok = exe + " " + (dir / "s.cfg").string() + " --out " + out.string() + " > /dev/null";
    CHECK(std::system(ok.c_str()) == 0);
    CHECK(fs::exists(out / "modes.csv"));

    const std::string bad = exe + " " + (dir / "missing.cfg").string() + " > /dev/null 2>&1";
    CHECK(std::system(bad.c_str()) != 0);

    {
        std::ofstream cfg(dir / "typo.cfg");
        cfg << "omgea0 = 1\n";
    }
    const std::string typo = exe + " " + (dir / "typo.cfg").string() + " > /dev/null 2>&1";
    CHECK(std::system(typo.c_str()) != 0);
}
#endif
