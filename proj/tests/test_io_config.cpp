// Config parser and the PFLD field-dump format.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mfb/config.hpp"
#include "mfb/errors.hpp"
#include "mfb/io.hpp"

using namespace mfb;

TEST_CASE("rho parsing") {
    CHECK(parse_rho("12pi") == doctest::Approx(12 * M_PI).epsilon(1e-15));
    CHECK(parse_rho("3.5pi") == doctest::Approx(3.5 * M_PI).epsilon(1e-15));
    CHECK(parse_rho("40.1") == doctest::Approx(40.1).epsilon(1e-15));
    CHECK_THROWS_AS(parse_rho("twelve"), ConfigError);
}

TEST_CASE("config text") {
    const std::string text = R"(
# run configuration
rho = 12pi
t = 0.1
t_list = 0.1, 0.085, 0.07
grid_n = 512
R0 = 2.1
r0 = 0.35
p = 1.5
alpha = 0.25
eps = 0.25
e_dir = 0, 1
hstar = expcos: 0.3, -0.1
vortices = 0.5, 0.5, 1; 0.25, 0.75, 2
c_tol = 1e-9
)";
    const ProblemConfig cfg = parse_config_text(text);
    CHECK(cfg.rho == doctest::Approx(12 * M_PI));
    CHECK(cfg.t == 0.1);
    REQUIRE(cfg.t_list.size() == 3);
    CHECK(cfg.t_list[2] == 0.07);
    CHECK(cfg.grid_n == 512);
    CHECK(cfg.R0 == 2.1);
    CHECK(cfg.e_dir.y == 1.0);
    CHECK(cfg.weight.kind == WeightSpec::Kind::ExpCos);
    CHECK(cfg.weight.c2 == -0.1);
    REQUIRE(cfg.weight.vortices.size() == 2);
    CHECK(cfg.weight.vortices[1].alpha == 2);
    CHECK(cfg.c_tol == 1e-9);

    CHECK_THROWS_AS(parse_config_text("no_such_key = 1"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("rho = 4pi"), ConfigError);   // below 8 pi
    CHECK_THROWS_AS(parse_config_text("r0 = 0.7"), ConfigError);    // must be < 1/2
    CHECK_THROWS_AS(parse_config_text("R0 = 1.5"), ConfigError);    // must exceed 2
    CHECK_THROWS_AS(parse_config_text("e_dir = 1, 1"), ConfigError); // not unit
    CHECK_THROWS_AS(parse_config_text("vortices = 0.5, 0.5, 0"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("t 0.1"), ConfigError); // missing '='
    CHECK(parse_config_text("").rho == doctest::Approx(12 * M_PI)); // defaults
}

TEST_CASE("PFLD round trip and header layout") {
    const Grid g = make_grid(32);
    PeriodicField f = sample(g, [](Vec2 x) { return std::sin(2 * M_PI * x.x) + 2.0 * x.y; });
    const std::string path = "pfld_test.bin";
    write_field(path, f);

    // header: magic, u32 n, reserved zeros, 16 bytes total
    std::ifstream in(path, std::ios::binary);
    char hdr[16];
    in.read(hdr, 16);
    CHECK(std::string(hdr, 4) == "PFLD");
    uint32_t n = 0;
    std::memcpy(&n, hdr + 4, 4);
    CHECK(n == 32);
    for (int i = 8; i < 16; ++i) CHECK(hdr[i] == 0);
    in.seekg(0, std::ios::end);
    CHECK(in.tellg() == std::streamoff(16 + 32 * 32 * 8));
    in.close();

    const PeriodicField f2 = read_field(path);
    REQUIRE(f2.n() == 32);
    for (std::ptrdiff_t k = 0; k < f.size(); ++k) REQUIRE(f2[k] == f[k]);
    std::remove(path.c_str());

    CHECK_THROWS_AS(read_field("does_not_exist.pfld"), ConfigError);
}

TEST_CASE("report serialization is stable") {
    SolveReport r;
    r.t = 0.1;
    r.grid_n = 512;
    r.rho_t = 25.0;
    r.sigma0_curve_r = {0.1, 0.2};
    r.sigma0_curve = {24.0, 25.0};
    const std::string j1 = report_json(r);
    const std::string j2 = report_json(r);
    CHECK(j1 == j2); // byte-identical
    CHECK(j1.find("\"rho_t\": 25.0") != std::string::npos);
    CHECK(j1.find("\"grid_n\": 512") != std::string::npos);
}
