#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "json.hpp"
#include "mbwave/cli.hpp"
#include "mbwave/config.hpp"

using namespace mbwave;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("mbwave_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    fs::path p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
}

std::string config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const char* kWedge = R"({
  "domain": {"left": {"slope": 0.0}, "right": {"slope": 0.5}, "t0": 1.0, "t1": 4.0},
  "window": [1.0, 4.0]
})";

}  // namespace

TEST_CASE("grid strings") {
    GridSpec g = parse_grid("400x1200");
    CHECK(g.nx == 400);
    CHECK(g.nt == 1200);
    CHECK_THROWS_AS(parse_grid("400"), std::invalid_argument);
    CHECK_THROWS_AS(parse_grid("0x10"), std::invalid_argument);
    CHECK_THROWS_AS(parse_grid("ax10"), std::invalid_argument);
}

TEST_CASE("config errors name their location") {
    CHECK(config_error(R"({"domain": {"left": {"slope": 0.0}, "right": {"slope": 1.2, "intercept": 1}, "t0": 0, "t1": 1}})")
              .find("timelike margin violated") != std::string::npos);
    CHECK(config_error("{\n  \"window\": [0, 1,\n}").find("line 3") != std::string::npos);
    const std::string unknown = config_error(R"({"domain": {"left": {"slope": 0.0}, "right": {"slope": 0.5}, "t0": 1, "t1": 4},
        "window": [1, 4], "hum": {"gama": 1}})");
    CHECK(unknown.find("hum.gama") != std::string::npos);
    CHECK(unknown.find("unknown field") != std::string::npos);
}

TEST_CASE("comoving velocity satisfies corner compatibility") {
    GTC1D dom(Curve::linear(-0.2, 0), Curve::linear(0.4, 1), 0, 1);
    ProfileSpec phi0{"sine"};
    phi0.mode = 2;
    Profile p0 = make_profile(phi0, dom, 0.5);
    Profile p1 = make_velocity(ProfileSpec{"comoving"}, phi0, dom, 0.5);
    const double h = 1e-6;
    for (auto [x, lp] : {std::pair{dom.lambda1(0.5), -0.2}, std::pair{dom.lambda2(0.5), 0.4}}) {
        const double px = (p0(x + h) - p0(x - h)) / (2 * h);
        CHECK(p1(x) + lp * px == doctest::Approx(0.0).epsilon(1e-6));
    }
}

TEST_CASE("optimal-times subcommand") {
    fs::path d = scratch("optimal");
    std::ostringstream out, err;
    RunOptions opt;
    opt.out = (d / "out").string();
    CHECK(dispatch("optimal-times", write_config(d, kWedge).string(), opt, out, err) == 0);
    CHECK(out.str().find("T=2 T_-=0.5 T_+=1.5") != std::string::npos);
    auto m = nlohmann::json::parse(slurp(d / "out" / "manifest.json"));
    for (const char* key : {"subcommand", "config_sha256", "seed", "grid", "wall_ms", "pass"}) CHECK(m.contains(key));
    CHECK(m["config_sha256"].get<std::string>().size() == 64);
    CHECK(m["pass"] == true);
}

TEST_CASE("bad configs exit with 2") {
    fs::path d = scratch("bad");
    std::ostringstream out, err;
    RunOptions opt;
    opt.out = (d / "out").string();
    CHECK(dispatch("simulate", write_config(d, "{ nope").string(), opt, out, err) == 2);
    CHECK(dispatch("no-such-thing", write_config(d, kWedge).string(), opt, out, err) == 2);
    // a simulation window outside the domain is a precondition failure
    CHECK(dispatch("simulate",
                   write_config(d, R"({"domain": {"left": {"slope": 0.0}, "right": {"slope": 0.5}, "t0": 1, "t1": 4},
                                      "window": [0.5, 4]})")
                       .string(),
                   opt, out, err) == 2);
}

TEST_CASE("simulate is byte-for-byte reproducible") {
    fs::path d = scratch("det");
    const fs::path cfg = write_config(d, R"({
      "domain": {"left": {"slope": 0.0}, "right": {"slope": 0.3, "intercept": 1.0}, "t0": 0.0, "t1": 1.0},
      "window": [0.0, 1.0],
      "simulate": {"phi0": {"kind": "sine", "mode": 1}}
    })");
    RunOptions opt;
    opt.grid = GridSpec{30, 90};
    std::ostringstream out, err;
    opt.out = (d / "a").string();
    REQUIRE(dispatch("simulate", cfg.string(), opt, out, err) == 0);
    opt.out = (d / "b").string();
    REQUIRE(dispatch("simulate", cfg.string(), opt, out, err) == 0);
    for (const char* f : {"field.csv", "energy.csv", "field.bin"}) {
        const std::string a = slurp(d / "a" / f);
        CHECK(!a.empty());
        CHECK(a == slurp(d / "b" / f));
    }
    CHECK(slurp(d / "a" / "energy.csv").rfind("t,energy\n", 0) == 0);
}
