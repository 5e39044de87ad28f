#include "doctest.h"

#include <cstring>
#include <fstream>
#include <sstream>

#include "dimer/runner.hpp"

using namespace dimer;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "dimer_unit_runner" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "dimer");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_command(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t data_rows(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) ++n;
    return n == 0 ? 0 : n - 1;
}

}  // namespace

TEST_CASE("grid expansion is inclusive and drift free") {
    const auto g = expand_grid(0.0, 0.4, 0.02);
    REQUIRE(g.size() == 21);
    CHECK(g[7] == 7 * 0.02);
    CHECK(g.back() == doctest::Approx(0.4));
    CHECK(expand_grid(1.0, 1.0, 0.1) == std::vector<double>{1.0});
    CHECK_THROWS_AS(expand_grid(0.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(expand_grid(1.0, 0.0, 0.1), std::invalid_argument);
}

TEST_CASE("config parsing, defaults and validation") {
    const auto def = config_from_json(json::object());
    CHECK(def.model.N == 10);
    CHECK(def.model.UN() == doctest::Approx(0.2));
    CHECK(def.scan.UN_grid.size() == 21);
    CHECK(def.scan.ic_theta == 16);
    CHECK(def.scan.ic_phi == 16);

    const auto j = json::parse(R"({"model": {"N": 25, "UN": 0.3},
                                   "scan": {"U_grid": {"start": 0.1, "stop": 0.2, "step": 0.05},
                                            "N_list": [5, 10], "seed": [1.0, 2.0]},
                                   "parallelism": 3})");
    const auto cfg = config_from_json(j);
    CHECK(cfg.model.N == 25);
    CHECK(cfg.model.U == doctest::Approx(0.3 / 25));
    CHECK(cfg.scan.UN_grid.size() == 3);
    CHECK(cfg.n_values() == std::vector<int>{5, 10});
    CHECK(cfg.scan.seed.phi == 2.0);
    CHECK(cfg.parallelism == 3);

    CHECK_THROWS_AS(config_from_json(json::parse(R"({"modle": {}})")), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"model": {"UN": 0.2, "Nn": 3}})")), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"model": {"N": 0}})")), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"parallelism": 0})")), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"scan": {"U_grid": []}})")), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"scan": {"ic_grid": [4]}})")), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"model": {"gammaN": -0.1}})")), std::invalid_argument);
}

TEST_CASE("config round trip") {
    auto cfg = default_config();
    cfg.model = ModelParams::from_composite(25, 1.0, 0.2, 1.0, 3.4, 1.005, 0.1);
    cfg.scan.seed_offsets = {{0.01, -0.02}};
    cfg.cache_dir = "/tmp/x";
    const auto back = config_from_json(config_to_json(cfg));
    CHECK(config_to_json(back) == config_to_json(cfg));
    CHECK(back.model == cfg.model);
    CHECK(back.scan.UN_grid == cfg.scan.UN_grid);
    CHECK(back.cache_dir == cfg.cache_dir);

    const auto path = scratch("roundtrip") / "cfg.json";
    std::ofstream(path) << config_to_json(cfg).dump(2);
    CHECK(config_to_json(load_config(path)) == config_to_json(cfg));
    std::ofstream(path) << "{ not json";
    CHECK_THROWS_AS(load_config(path), std::invalid_argument);
}

TEST_CASE("overrides") {
    json j = json::object();
    apply_override(j, "scan.m_max=400");
    apply_override(j, "output_dir=results/a");
    apply_override(j, "scan.U_grid=[0.1,0.2]");
    CHECK(j["scan"]["m_max"] == 400);
    CHECK(j["output_dir"] == "results/a");
    const auto cfg = config_from_json(j);
    CHECK(cfg.scan.m_max == 400);
    CHECK(cfg.scan.UN_grid == std::vector<double>{0.1, 0.2});
    CHECK_THROWS_AS(apply_override(j, "novalue"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(j, "=3"), std::invalid_argument);
}

TEST_CASE("scan executor keeps order and isolates failures") {
    auto square = [](std::size_t i) {
        if (i == 3) throw std::runtime_error("poisoned");
        return static_cast<int>(i * i);
    };
    const auto one = scan_executor<int>(8, 1, square);
    const auto four = scan_executor<int>(8, 4, square);
    REQUIRE(one.results.size() == 8);
    CHECK(one.results == four.results);
    CHECK_FALSE(one.results[3].has_value());
    CHECK(*one.results[7] == 49);
    REQUIRE(four.failures.size() == 1);
    CHECK(four.failures[0].index == 3);
    CHECK(four.failures[0].message == "poisoned");

    const auto empty = scan_executor<int>(0, 4, square);
    CHECK(empty.results.empty());
    CHECK(empty.failures.empty());
}

TEST_CASE("calibration picks the midpoint of a verified window") {
    auto cfg = default_config();
    cfg.model = ModelParams::from_composite(100, 1.0, 0.2, 1.0, 3.4, 1.0, 0.1);
    cfg.scan.cal_theta = 1;
    cfg.scan.cal_phi = 2;
    cfg.parallelism = 4;

    try {
        (void)calibrate_omega(cfg, {0.9, 0.95});
        FAIL("expected no period-2 window");
    } catch (const CalibrationError& e) {
        CHECK(e.result().per_omega.size() == 2);
        CHECK(e.result().windows.empty());
        CHECK_FALSE(e.result().omega_chosen.has_value());
    }

    const auto r = calibrate_omega(cfg, {0.95, 1.0, 1.05});
    REQUIRE(r.per_omega.size() == 3);
    CHECK_FALSE(r.per_omega[0].period2);
    CHECK(r.per_omega[1].period2);
    CHECK(r.per_omega[1].kinds.size() == 2);
    REQUIRE(r.windows.size() == 1);
    CHECK(r.windows[0].midpoint_period2);
    REQUIRE(r.omega_chosen.has_value());
    CHECK(*r.omega_chosen == doctest::Approx(1.0));
}

TEST_CASE("csv writer and checksums") {
    const auto dir = scratch("csv");
    CsvWriter w(dir / "a.csv", {"x", "n", "s"});
    w.cell(0.1).cell(3).cell(std::string("ok"));
    w.end_row();
    CHECK_FALSE(fs::exists(dir / "a.csv"));
    w.close();
    CHECK(slurp(dir / "a.csv") == "x,n,s\n0.10000000000000001,3,ok\n");
    CHECK(format_double(0.5) == "0.5");

    std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
    CHECK(sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("spectrum command writes rows, manifest and uses the cache") {
    const auto dir = scratch("spectrum");
    const auto out = (dir / "out").string();
    const auto cache = (dir / "cache").string();
    REQUIRE(run({"spectrum", "--N", "4", "--output-dir", out, "--cache-dir", cache}) == 0);
    CHECK(data_rows(dir / "out" / "spectrum_N4.csv") == 25);
    CHECK(data_rows(dir / "out" / "gap.csv") == 1);

    const auto manifest = json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(manifest["command"] == "spectrum");
    CHECK(manifest["cache"]["misses"] == 1);
    for (const auto& a : manifest["artifacts"]) {
        CHECK(a["sha256"] == sha256_file(dir / "out" / a["path"].get<std::string>()));
    }

    REQUIRE(run({"correlate", "--N", "4", "--output-dir", out, "--cache-dir", cache}) == 0);
    CHECK(data_rows(dir / "out" / "correlation.csv") == 201);
    CHECK(json::parse(slurp(dir / "out" / "manifest.json"))["cache"]["hits"] == 1);

    // A cache file that disagrees with its name is rebuilt, with a note.
    fs::path entry;
    for (const auto& e : fs::directory_iterator(dir / "cache")) entry = e.path();
    REQUIRE(!entry.empty());
    std::string bytes = slurp(entry);
    bytes[20] ^= 0x7f;
    std::ofstream(entry, std::ios::binary | std::ios::trunc) << bytes;
    REQUIRE(run({"spectrum", "--N", "4", "--output-dir", out, "--cache-dir", cache}) == 0);
    const auto again = json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(again["cache"]["misses"] == 1);
    CHECK_FALSE(again["notes"].empty());
}

TEST_CASE("outputs do not depend on parallelism") {
    const auto dir = scratch("determinism");
    for (const char* par : {"1", "4"}) {
        REQUIRE(run({"bifurcation-quantum", "--N", "3", "--set", "scan.U_grid=[0.0,0.2,0.4]", "--output-dir",
                     (dir / par).string(), "--parallelism", par}) == 0);
    }
    CHECK(slurp(dir / "1" / "quantum_bifurcation.csv") == slurp(dir / "4" / "quantum_bifurcation.csv"));
    CHECK(data_rows(dir / "1" / "quantum_bifurcation.csv") == 3 * 4);
}

TEST_CASE("command-line errors give nonzero status") {
    const auto dir = scratch("errors");
    CHECK(run({"no-such-command"}) != 0);
    CHECK(run({}) != 0);
    std::ofstream(dir / "bad.json") << "{\"model\": ";
    CHECK(run({"spectrum", "--config", (dir / "bad.json").string(), "--output-dir", (dir / "o").string()}) == 1);
    CHECK(run({"spectrum", "--set", "model.bogus=1", "--output-dir", (dir / "o").string()}) == 1);
    CHECK(run({"spectrum", "--config", (dir / "missing.json").string()}) == 1);
}
