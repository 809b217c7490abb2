#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "crpower/cli.hpp"

using namespace crpower;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "crpower");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / ("crpower_test_" + name);
    std::ofstream(path) << text;
    return path.string();
}

// field -> value of the long-format record, "field:index" for indexed rows
std::map<std::string, std::string> fields(const std::string& csv) {
    std::map<std::string, std::string> m;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto a = line.find(','), b = line.find(',', a + 1);
        const std::string index = line.substr(a + 1, b - a - 1);
        m[line.substr(0, a) + (index.empty() ? "" : ":" + index)] = line.substr(b + 1);
    }
    return m;
}

}  // namespace

TEST_CASE("solve with alpha = 1 allocates nothing") {
    const std::string cfg = write_temp("alpha_one.cfg",
                                       "instance.gamma = 0.5, 2, 40\ninstance.alpha = 1\ninstance.cci_budget_w = 5\n"
                                       "instance.aci_budgets_w = 0.2\ninstance.leakage = 0.01, 0.1, 0.3\n");
    const Run r = run({"solve", "--config", cfg});
    REQUIRE(r.code == kExitOk);
    const auto f = fields(r.out);
    CHECK(f.at("total_power_w") == "0");
    CHECK(f.at("case") == "unconstrained");
    for (int i = 1; i <= 3; ++i) CHECK(f.at("power_w:" + std::to_string(i)) == "0");
}

TEST_CASE("solve of an explicit instance matches the worked example") {
    const std::string cfg =
        write_temp("cci.cfg", "instance.gamma = 2, 2\ninstance.alpha = 0.1\ninstance.cci_budget_w = 1\n");
    const Run r = run({"solve", "--config", cfg});
    REQUIRE(r.code == kExitOk);
    const auto f = fields(r.out);
    CHECK(f.at("case") == "cci_active");
    CHECK(std::stod(f.at("lambda_cci")) == doctest::Approx(1.19842553680007).epsilon(1e-12));
    CHECK(std::stod(f.at("power_w:1")) == doctest::Approx(0.5));
}

TEST_CASE("solve from the default scenario") {
    const std::string cfg = write_temp("scenario.cfg", "solver.alpha = 0.1\n");
    const Run r = run({"solve", "--config", cfg, "--seed", "4"});
    REQUIRE(r.code == kExitOk);
    const auto f = fields(r.out);
    CHECK(std::stod(f.at("kkt_residual")) < 1e-8);
    CHECK(f.count("power_w:128") == 1);
    CHECK(run({"solve", "--config", cfg, "--seed", "4"}).out == r.out);
}

TEST_CASE("zero threshold is a configuration error") {
    const std::string cfg = write_temp("zero.cfg", "cochannel.threshold_w = 0\n");
    const Run r = run({"solve", "--config", cfg});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("cochannel.threshold_w: budget must be positive") != std::string::npos);
    const std::string inst = write_temp("zero_inst.cfg", "instance.gamma = 1\ninstance.cci_budget_w = 0\n");
    CHECK(run({"solve", "--config", inst}).err.find("budget must be positive") != std::string::npos);
}

TEST_CASE("validate") {
    const Run a = run({"validate", "--count", "20", "--n", "6", "--l", "2", "--seed", "9"});
    CHECK(a.code == kExitOk);
    CHECK(a.out.find("instances,40\n") != std::string::npos);
    CHECK(a.out.find("status,pass\n") != std::string::npos);
    CHECK(run({"validate", "--count", "20", "--n", "6", "--l", "2", "--seed", "9"}).out == a.out);
    const Run none = run({"validate", "--count", "0"});
    CHECK(none.code == kExitOk);
    CHECK(none.out.find("instances,0\n") != std::string::npos);
    CHECK(run({"validate", "--n", "65"}).code == kExitUsage);
}

TEST_CASE("sweep output") {
    const std::string cfg = write_temp("sweep.cfg", "ofdm.subcarriers = 16\nmontecarlo.threads = 1\n");
    const Run r = run({"sweep", "--config", cfg, "--axis", "alpha", "--values", "0.2,0.8", "--trials", "20"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.rfind("axis,value,trials,failed,", 0) == 0);
    std::size_t lines = 0;
    for (char ch : r.out) lines += ch == '\n';
    CHECK(lines == 3);
    CHECK(run({"sweep", "--config", cfg, "--axis", "beta", "--values", "1"}).code == kExitUsage);
    CHECK(run({"sweep", "--config", cfg, "--axis", "alpha", "--values", "0.8,0.2"}).code == kExitUsage);
    CHECK(run({"sweep", "--axis", "alpha"}).code == kExitUsage);
}

TEST_CASE("leakage output") {
    const std::string cfg = write_temp("leak.cfg", "ofdm.subcarriers = 4\npu.count = 2\n");
    const Run r = run({"leakage", "--config", cfg});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.rfind("subcarrier,pu_1,pu_2\n0,", 0) == 0);
}

TEST_CASE("usage errors") {
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"solve"}).code == kExitUsage);
    CHECK(run({"solve", "--config", "/nonexistent/file.cfg"}).code == kExitUsage);
    const std::string cfg = write_temp("typo.cfg", "solver.alhpa = 0.3\n");
    CHECK(run({"solve", "--config", cfg}).err.find("unknown key") != std::string::npos);
    const std::string ok = write_temp("ok.cfg", "instance.gamma = 1\ninstance.cci_budget_w = 1\n");
    CHECK(run({"solve", "--config", ok, "--out", "/nonexistent/dir/out.csv"}).code == kExitUsage);
}
