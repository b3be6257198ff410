#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "dualopt/config.hpp"

using namespace dualopt;

namespace {

const char* kCliPath = DUALOPT_CLI_PATH;

std::string test_dir() {
    static int counter = 0;
    std::string dir = "/tmp/dualopt_cli_test_" + std::to_string(counter++);
    std::string cmd = "mkdir -p " + dir;
    REQUIRE(std::system(cmd.c_str()) == 0);
    return dir;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run(const std::string& args, const std::string& stdout_path) {
    std::string cmd = std::string(kCliPath) + " " + args + " > " + stdout_path + " 2>/dev/null";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

const char* kCappedConfig = R"({
  "market": {"r": 0.0, "mu": 0.04, "sigma": 0.2, "T": 1.0,
             "constraint": "unconstrained", "regime": "discounted"},
  "utility": {"kind": "cap", "H": 1.0},
  "value": {"t": 0.0, "x": 0.5},
  "simulation": {"paths": 20000, "steps": 100, "seed": 42,
                 "scheme": "exact_capped", "threads": 1, "beta": 0.95},
  "frontier": {"beta": 0.95, "c": 0.5, "t": 0.0, "x": 0.5,
               "lambdas": [0, 0.25, 0.5, 1, 2]}
})";

}  // namespace

TEST_CASE("config round trip") {
    RunConfig cfg = RunConfig::from_json_text(kCappedConfig);
    std::string echoed = cfg.to_json_text();
    RunConfig again = RunConfig::from_json_text(echoed);
    CHECK(again.to_json_text() == echoed);
    CHECK(again.config_hash() == cfg.config_hash());
    CHECK(again.sim_seed == 42);
    CHECK(again.utility.kind == UtilityKind::Cap);
}

TEST_CASE("config rejects unknown enum values") {
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"market": {"regime": "weird"}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"utility": {"kind": "quadratic"}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_json_text("not json"), std::invalid_argument);
}

TEST_CASE("value command prints the closed-form value") {
    std::string dir = test_dir();
    write_file(dir + "/cfg.json", kCappedConfig);
    std::string out = dir + "/value.txt";
    int rc = run("value --config " + dir + "/cfg.json", out);
    CHECK(rc == 0);
    std::string text = read_file(out);
    CHECK(text.find("u=0.579259709") != std::string::npos);
    CHECK(text.find("pi=3.9894228") != std::string::npos);
    CHECK(text.find("y=0.980198673") != std::string::npos);
}

TEST_CASE("frontier command emits the documented CSV shape") {
    std::string dir = test_dir();
    write_file(dir + "/cfg.json", kCappedConfig);
    std::string out = dir + "/frontier.csv";
    int rc = run("frontier --config " + dir + "/cfg.json --beta 0.95 --lambda 0,0.25,0.5,1,2",
                 out);
    CHECK(rc == 0);
    std::istringstream is(read_file(out));
    std::string line;
    std::getline(is, line);
    CHECK(line.rfind("# dualopt", 0) == 0);  // provenance comment
    std::getline(is, line);
    CHECK(line == "lambda,var,cvar,expected_utility,objective");
    int rows = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 5);
}

TEST_CASE("simulate runs are byte-identical across repeats and threads") {
    std::string dir = test_dir();
    write_file(dir + "/cfg.json", kCappedConfig);
    int rc1 = run("simulate --config " + dir + "/cfg.json --seed 42", dir + "/a.csv");
    int rc2 = run("simulate --config " + dir + "/cfg.json --seed 42", dir + "/b.csv");
    int rc3 = run("simulate --config " + dir + "/cfg.json --seed 42 --threads 4",
                  dir + "/c.csv");
    CHECK(rc1 == 0);
    CHECK(rc2 == 0);
    CHECK(rc3 == 0);
    std::string a = read_file(dir + "/a.csv");
    CHECK(a == read_file(dir + "/b.csv"));
    CHECK(a == read_file(dir + "/c.csv"));
    CHECK(a.find("mean,stderr,paths,empirical_cvar,stability_warning") != std::string::npos);
}

TEST_CASE("echoed effective config reparses identically") {
    std::string dir = test_dir();
    write_file(dir + "/cfg.json", kCappedConfig);
    int rc = run("value --config " + dir + "/cfg.json --x 0.7 --echo-config " + dir +
                     "/echo.json",
                 dir + "/out.txt");
    CHECK(rc == 0);
    RunConfig echoed = RunConfig::from_file(dir + "/echo.json");
    CHECK(echoed.value_x == doctest::Approx(0.7));  // override applied
    CHECK(echoed.to_json_text() == RunConfig::from_json_text(echoed.to_json_text()).to_json_text());
}

TEST_CASE("exit codes: usage, validation, success") {
    std::string dir = test_dir();
    write_file(dir + "/cfg.json", kCappedConfig);
    CHECK(run("explode --config " + dir + "/cfg.json", dir + "/x.txt") == 1);
    CHECK(run("value", dir + "/x.txt") == 1);  // missing required --config
    write_file(dir + "/bad.json", R"({"market": {"sigma": -1.0}})");
    CHECK(run("value --config " + dir + "/bad.json", dir + "/x.txt") == 2);
    write_file(dir + "/notjson.json", "{{{");
    CHECK(run("value --config " + dir + "/notjson.json", dir + "/x.txt") == 2);
    CHECK(run("value --config " + dir + "/missing.json", dir + "/x.txt") == 2);
}

TEST_CASE("check command emits residual JSON") {
    std::string dir = test_dir();
    write_file(dir + "/cfg.json", kCappedConfig);
    std::string out = dir + "/check.json";
    int rc = run("check --config " + dir + "/cfg.json", out);
    CHECK(rc == 0);
    std::string text = read_file(out);
    CHECK(text.find("dual_residual") != std::string::npos);
    CHECK(text.find("primal_residual") != std::string::npos);
    CHECK(text.find("limits") != std::string::npos);
}
