#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dfscavity/errors.hpp"
#include "dfscavity/io.hpp"

using namespace dfscavity;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("dfscavity_test_" + name);
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    REQUIRE(f.good());
    f << text;
}

SweepResult sample_sweep() {
    SweepResult sweep;
    sweep.metadata = {{"generator", "dfs-cavity 0.1.0"}, {"delta", "0.33333333333333331"}};
    sweep.rows = {{0.1, 1.0 / 3.0, "model"},
                  {0.2, 2.0 / 3.0, "model"},
                  {0.05, 0.1, "other"},
                  {0.3, 0.9999999999999999, "model"},
                  {0.15, 1e-17, "other"}};
    return sweep;
}

} // namespace

TEST_CASE("numbers survive the decimal round trip exactly") {
    for (double x : {1.0 / 3.0, 0.1, 1e-17, 12345.6789, -2.5e-300, 0.0, 6.283185307179586}) {
        const std::string s = format_number(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
}

TEST_CASE("sweep files are byte-stable across write-read-write") {
    const auto p1 = temp_file("roundtrip1.csv");
    const auto p2 = temp_file("roundtrip2.csv");
    const auto sweep = sample_sweep();
    write_sweep_csv(sweep, p1.string());
    const auto back = read_sweep_csv(p1.string());
    write_sweep_csv(back, p2.string());
    CHECK(slurp(p1) == slurp(p2));

    REQUIRE(back.rows.size() == sweep.rows.size());
    for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
        CHECK(back.rows[i].T == sweep.rows[i].T);         // exact, not approximate
        CHECK(back.rows[i].value == sweep.rows[i].value);
        CHECK(back.rows[i].tag == sweep.rows[i].tag);
    }
    CHECK(back.metadata == sweep.metadata);

    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("sweep validation, tag listing and filtering") {
    auto sweep = sample_sweep();
    CHECK_NOTHROW(sweep.validate());
    CHECK(sweep.tags() == std::vector<std::string>{"model", "other"});
    const auto filtered = sweep.filter("other");
    REQUIRE(filtered.rows.size() == 2);
    CHECK(filtered.rows[0].T == 0.05);
    CHECK(filtered.metadata == sweep.metadata);

    auto backwards = sample_sweep();
    backwards.rows.push_back({0.25, 0.5, "model"}); // 0.25 < 0.3 within the tag
    CHECK_THROWS_AS(backwards.validate(), ValidationError);

    auto out_of_range = sample_sweep();
    out_of_range.rows[0].value = 1.5;
    CHECK_THROWS_AS(out_of_range.validate(), ValidationError);
    out_of_range.rows[0].value = -0.1;
    CHECK_THROWS_AS(out_of_range.validate(), ValidationError);
    out_of_range.rows[0].value = std::nan("");
    CHECK_THROWS_AS(out_of_range.validate(), ValidationError);
}

TEST_CASE("sweep reader rejects malformed files") {
    const auto p = temp_file("malformed.csv");
    spit(p, "0.1,0.5,model\n");
    CHECK_THROWS_AS(read_sweep_csv(p.string()), ValidationError); // header missing
    spit(p, "T,value,tag\n0.1,0.5\n");
    CHECK_THROWS_AS(read_sweep_csv(p.string()), ValidationError); // two fields
    spit(p, "T,value,tag\n0.1,abc,model\n");
    CHECK_THROWS_AS(read_sweep_csv(p.string()), ValidationError); // not a number
    CHECK_THROWS_AS(read_sweep_csv(temp_file("nonexistent.csv").string()), ValidationError);
    std::filesystem::remove(p);
}

TEST_CASE("tables check row widths and carry the metadata block") {
    std::ostringstream os;
    write_table_csv({{"kind", "demo"}}, {"t", "re", "im"},
                    {{0.0, 1.0, 0.0}, {0.5, 0.25, -0.125}}, os);
    const std::string text = os.str();
    CHECK(text.find("# kind = demo\n") == 0);
    CHECK(text.find("t,re,im\n") != std::string::npos);
    CHECK(text.find("0.5,0.25,-0.125\n") != std::string::npos);

    std::ostringstream sink;
    CHECK_THROWS_AS(write_table_csv({}, {"a", "b"}, {{1.0}}, sink), ValidationError);
}

TEST_CASE("overlay files: sigma column, header row and range checks") {
    const auto p = temp_file("overlay.csv");
    spit(p, "T,pe\n0.5,0.25\n0.7,0.5\n");
    auto two_col = load_overlay_csv(p.string());
    CHECK_FALSE(two_col.has_sigma);
    REQUIRE(two_col.points.size() == 2);
    CHECK(two_col.points[1].pe == 0.5);

    spit(p, "# comment\n0.5,0.25,0.01\n0.7,0.5,0.02\n");
    auto three_col = load_overlay_csv(p.string());
    CHECK(three_col.has_sigma);
    CHECK(three_col.points[0].sigma == 0.01);

    spit(p, "0.5,0.25,0.01\n0.7,0.5\n");
    CHECK_THROWS_AS(load_overlay_csv(p.string()), ValidationError); // sigma appears and vanishes
    spit(p, "0.5,1.25\n");
    CHECK_THROWS_AS(load_overlay_csv(p.string()), ValidationError); // pe outside [0, 1]
    spit(p, "0.5,0.25,-0.01\n");
    CHECK_THROWS_AS(load_overlay_csv(p.string()), ValidationError); // sigma <= 0
    spit(p, "# nothing\n");
    CHECK_THROWS_AS(load_overlay_csv(p.string()), ValidationError); // empty
    std::filesystem::remove(p);
}

TEST_CASE("residuals interpolate the model and propagate sigmas") {
    SweepResult sweep;
    for (int i = 0; i <= 10; ++i) {
        const double T = 0.1 * i;
        sweep.rows.push_back({T, 0.3 + 0.2 * T, "model"}); // linear, so interpolation is exact
    }
    OverlayDataset overlay;
    overlay.points = {{0.05, 0.3 + 0.2 * 0.05, 0.0}, {0.55, 0.3 + 0.2 * 0.55, 0.0}};
    auto report = residuals(sweep, overlay);
    CHECK(report.rms <= 1e-15);
    CHECK(std::isnan(report.chi_square));

    overlay.has_sigma = true;
    overlay.points[0].sigma = overlay.points[1].sigma = 0.5;
    overlay.points[1].pe += 0.25; // half a sigma twice -> chi^2 = (0.5)^2 ... one point
    report = residuals(sweep, overlay);
    CHECK(report.chi_square == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(report.residuals[1] == doctest::Approx(0.25).epsilon(1e-12));

    // shifted evaluation points must stay inside the model range
    CHECK_THROWS_AS(residuals(sweep, overlay, 0.6), ValidationError);

    auto multi = sweep;
    multi.rows.push_back({0.3, 0.1, "second"});
    CHECK_THROWS_AS(residuals(multi, overlay), ValidationError);
}

TEST_CASE("the phase offset of a synthetic fringe is recovered") {
    SweepResult sweep;
    for (int i = 0; i <= 400; ++i) {
        const double T = 0.02 * i;
        sweep.rows.push_back({T, 0.5 + 0.4 * std::cos(T), "model"});
    }
    const double true_offset = 0.8;
    OverlayDataset overlay;
    for (double T : {1.0, 2.5, 4.0, 5.5})
        overlay.points.push_back({T, 0.5 + 0.4 * std::cos(T + true_offset), 0.0});
    const double fit = fit_phase_offset(sweep, overlay, 0.0, 2.0);
    CHECK(fit == doctest::Approx(true_offset).epsilon(5e-3));
    CHECK_THROWS_AS(fit_phase_offset(sweep, overlay, 2.0, 0.0), ValidationError);
}

TEST_CASE("a complete config maps onto physics parameters") {
    const auto p = temp_file("config.json");
    spit(p, R"({
        // decay times come from ringdown measurements
        "delta": 1.5,
        "Omega": 40.0,
        "Tr_a": 2.0,
        "Tr_b": 3.0,
        "rates": {"k12": "dfs", "k21": 0.05, "delta12": -0.01},
        "T_grid": {"start": 0.2, "stop": 5.0, "points": 11},
        "model": "diagonal",
        "n_trunc": 4
    })");
    const auto cfg = load_config(p.string());
    CHECK(cfg.experiment.delta == 1.5);
    CHECK(cfg.experiment.nbar == 0.0);       // default
    CHECK(cfg.experiment.reduction == 1.0);  // default
    CHECK(cfg.params.k11 == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(cfg.params.k22 == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(cfg.params.k12 == doctest::Approx(std::sqrt(0.25 / 6.0)).epsilon(1e-15));
    CHECK(cfg.params.k21 == 0.05);
    CHECK(cfg.params.delta12 == -0.01);
    CHECK(cfg.params.omega1 == 1.5); // fringe frame
    CHECK(cfg.params.omega2 == 0.0);
    CHECK(cfg.directives.model == "diagonal");
    CHECK(cfg.directives.n_trunc == 4);
    REQUIRE(cfg.experiment.T_grid.size() == 11);
    CHECK(cfg.experiment.T_grid.front() == 0.2);
    CHECK(cfg.experiment.T_grid.back() == doctest::Approx(5.0).epsilon(1e-15));
    std::filesystem::remove(p);
}

TEST_CASE("config violations are collected with their JSON paths") {
    const auto p = temp_file("bad_config.json");
    spit(p, R"({"Omega": -3.0, "Tr_a": 2.0, "Tr_b": 3.0, "T_grid": [0.3, 0.2]})");
    try {
        load_config(p.string());
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("$.delta: required") != std::string::npos);
        CHECK(msg.find("$.Omega: must be > 0") != std::string::npos);
        CHECK(msg.find("$.T_grid: must be strictly increasing") != std::string::npos);
    }

    // a grid that starts inside the preparation sequence
    spit(p, R"({"delta": 1.0, "Omega": 40.0, "Tr_a": 2.0, "Tr_b": 3.0,
                "T_grid": [0.05, 0.5]})");
    try {
        load_config(p.string());
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("preparation") != std::string::npos);
    }
    std::filesystem::remove(p);
}

TEST_CASE("unknown keys warn by default and fail under strict mode") {
    const auto p = temp_file("extra_key.json");
    spit(p, R"({"delta": 1.0, "Omega": 40.0, "Tr_a": 2.0, "Tr_b": 3.0,
                "T_grid": [0.2, 0.5], "colour": "red"})");
    std::vector<std::string> warnings;
    CHECK_NOTHROW(load_config(p.string(), false, &warnings));
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("$.colour") != std::string::npos);

    try {
        load_config(p.string(), true);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("$.colour: unknown key") != std::string::npos);
    }
    std::filesystem::remove(p);
}
