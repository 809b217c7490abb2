#include <doctest.h>

#include <stdexcept>

#include "crpower/config.hpp"
#include "crpower/scenario.hpp"

using namespace crpower;

TEST_CASE("empty text gives the default scenario") {
    const ScenarioConfig c = parse_scenario("# nothing\n\n");
    CHECK(c.n_subcarriers == 128);
    CHECK(c.subcarrier_spacing_hz == 9765.625);
    CHECK(c.symbol_duration() == doctest::Approx(1.0 / 9765.625));
    CHECK(c.path_loss.exponent == 4.0);
    CHECK(c.su_link_distance_m == 1000.0);
    CHECK(c.noise_variance_w == 1e-15);
    CHECK(c.cochannel.distance_m == 5000.0);
    CHECK(c.cochannel.threshold_w == 1e-11);
    REQUIRE(c.pus.size() == 1);
    CHECK(c.pus[0].center_offset_hz == 781.25e3);
    CHECK(c.pus[0].bandwidth_hz == 312.5e3);
    CHECK(c.pus[0].distance_m == 1200.0);
    CHECK(c.csi == CsiKind::PathLossAndStatistics);
    CHECK(c.problem == Problem::Op1);
    CHECK(c.normalization == Normalization::None);
    CHECK_FALSE(c.total_power_cap_w.has_value());
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("keys override defaults") {
    const ScenarioConfig c = parse_scenario(
        "ofdm.subcarriers = 16\n"
        "channel.csi_mode = full   # inline comment\n"
        "pu.count = 2\n"
        "pu.2.threshold_w = 3e-12\n"
        "solver.problem = op2\n"
        "solver.normalization = alpha0\n"
        "limits.total_power_w = 2\n"
        "leakage.distance_reference = edge\n"
        "montecarlo.root_seed = 99\n");
    CHECK(c.n_subcarriers == 16);
    CHECK(c.csi == CsiKind::FullCsi);
    REQUIRE(c.pus.size() == 2);
    CHECK(c.pus[1].threshold_w == 3e-12);
    CHECK(c.pus[0].threshold_w == 1e-11);
    CHECK(c.problem == Problem::Op2);
    CHECK(c.normalization == Normalization::Alpha0);
    CHECK(*c.total_power_cap_w == 2.0);
    CHECK(c.distance_reference == DistanceReference::NearestEdge);
    CHECK(c.root_seed == 99);
}

TEST_CASE("unknown and duplicate keys are rejected") {
    CHECK_THROWS_WITH_AS(parse_scenario("solver.alpah = 0.2\n"), doctest::Contains("unknown key"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_scenario("solver.alpha = 0.2\nsolver.alpha = 0.3\n"),
                         doctest::Contains("duplicate key"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("just words\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("= 3\n"), ConfigError);
}

TEST_CASE("malformed values name their key") {
    try {
        parse_scenario("solver.alpha = half\n");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "solver.alpha");
    }
    CHECK_THROWS_AS(parse_scenario("ofdm.subcarriers = 2.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("channel.csi_mode = psychic\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("solver.problem = op3\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("channel.pu_interference_path_gain = maybe\n"), ConfigError);
}

TEST_CASE("range validation") {
    CHECK_THROWS_WITH_AS(parse_scenario("cochannel.threshold_w = 0\n"),
                         "cochannel.threshold_w: budget must be positive", ConfigError);
    CHECK_THROWS_WITH_AS(parse_scenario("pu.1.threshold_w = -1\n"), doctest::Contains("budget must be positive"),
                         ConfigError);
    CHECK_THROWS_AS(parse_scenario("cochannel.psi_threshold = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("cochannel.psi_threshold = 0\n"), ConfigError);
    CHECK_NOTHROW(parse_scenario("channel.csi_mode = full\ncochannel.psi_threshold = 1\n"));
    CHECK_THROWS_AS(parse_scenario("solver.alpha = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("channel.su_link_distance_m = 50\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("limits.total_power_w = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("solver.problem = op2\npu.1.weight = 1.2\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("ofdm.subcarriers = 0\n"), ConfigError);
}

TEST_CASE("render parses back to the same scenario") {
    ScenarioConfig c;
    c.n_subcarriers = 24;
    c.alpha = 0.37;
    c.csi = CsiKind::FullCsi;
    c.pus.push_back(PuBand{});
    c.pus[1].center_offset_hz = -781.25e3;
    c.pus[1].weight = 0.125;
    c.total_power_cap_w = 3.5;
    c.symbol_duration_s = 1.1e-4;
    c.normalization = Normalization::Alpha0;
    const ScenarioConfig back = parse_scenario(render_scenario(c));
    CHECK(render_scenario(back) == render_scenario(c));
    CHECK(back.alpha == 0.37);
    CHECK(back.pus[1].center_offset_hz == -781.25e3);
    CHECK(*back.symbol_duration_s == 1.1e-4);
}

TEST_CASE("number lists") {
    CHECK(parse_number_list("1e-13, 1e-12,1e-11", "v") == std::vector<double>{1e-13, 1e-12, 1e-11});
    CHECK(parse_number_list(" 0.5 ", "v") == std::vector<double>{0.5});
    CHECK_THROWS_AS(parse_number_list("1,,2", "v"), ConfigError);
    CHECK_THROWS_AS(parse_number_list("1,x", "v"), ConfigError);
    const KeyValueFile f = KeyValueFile::parse("a.b = 1, 2\nc.d = yes\n");
    CHECK(f.number_list("a.b") == std::vector<double>{1.0, 2.0});
    CHECK_THROWS_AS(f.number("missing.key"), ConfigError);
    CHECK(f.unused_keys() == std::vector<std::string>{"c.d"});
}
