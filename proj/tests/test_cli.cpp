#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "fadrc/errors.hpp"

using namespace fadrc;
using namespace fadrc::cli;

namespace {

const char* kNominal = R"(
# comment
[plant]
denom = 0, 26.08   ; trailing comment
b = 383.635

[observer]
omega_o = 700
gamma = 0.75

[controller]
k_fp = 356

[sim]
horizon = 0.05
gains = 0.8, 1.0, 1.2
)";

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("fadrc_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("config parsing and resolution") {
    const auto cf = ConfigFile::parse(kNominal);
    CHECK(cf.has("plant", "b"));
    CHECK(cf.list_or("plant", "denom", {}) == std::vector<double>{0.0, 26.08});
    const auto rc = resolve(cf);
    CHECK(rc.plant.gain_b == 383.635);
    CHECK(rc.b0 == 383.635);
    CHECK(rc.n == 2);
    CHECK(rc.k_fp == 356);
    CHECK(rc.sim.step == doctest::Approx(1.0 / 8000));
    CHECK_FALSE(rc.k_ip.has_value());
    const auto oc = rc.observer(ObserverKind::IO);
    CHECK(oc.n == 2);
    CHECK(oc.gains_L[0] == doctest::Approx(2100));
}

TEST_CASE("config errors carry section context") {
    CHECK_THROWS_WITH_AS(ConfigFile::parse("[plant]\nbogus = 1\n"), doctest::Contains("unknown key 'bogus' in [plant]"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(ConfigFile::parse("[nowhere]\n"), doctest::Contains("unknown section"), ConfigError);
    CHECK_THROWS_WITH_AS(ConfigFile::parse("b = 1\n"), doctest::Contains("outside of any section"), ConfigError);
    CHECK_THROWS_WITH_AS(ConfigFile::parse("[plant]\nb = 1\nb = 2\n"), doctest::Contains("duplicate"), ConfigError);
    CHECK_THROWS_WITH_AS(resolve(ConfigFile::parse("[plant]\ndenom = 0, 1\n")),
                         doctest::Contains("missing required key 'b' in [plant]"), ConfigError);
    CHECK_THROWS_WITH_AS(resolve(ConfigFile::parse("[plant]\ndenom = 0, x\nb = 1\n")),
                         doctest::Contains("not a number"), ConfigError);
    CHECK_THROWS_AS(resolve(ConfigFile::parse("[pmsm]\nCm = 1\n")), ConfigError);
    CHECK_THROWS_AS(resolve(ConfigFile::parse("[plant]\ndenom=0,1\nb=1\n[observer]\nkind = pid\n")), ConfigError);
    CHECK_THROWS_AS(resolve(ConfigFile::parse("[plant]\ndenom=0,1\nb=1\n[controller]\nk_ip = 3\n")), ConfigError);
}

TEST_CASE("atomic writes replace the target") {
    const auto dir = scratch("atomic");
    write_atomic(dir / "a.txt", "one");
    write_atomic(dir / "a.txt", "two");
    CHECK(slurp(dir / "a.txt") == "two");
    CHECK_FALSE(std::filesystem::exists(dir / "a.txt.tmp"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("design and stability commands are reproducible") {
    auto rc = resolve(ConfigFile::parse(kNominal));
    const auto d1 = scratch("cmd1"), d2 = scratch("cmd2");
    rc.out_dir = d1;
    CHECK(cmd_design(rc) == 0);
    CHECK(cmd_stability(rc) == 0);
    CHECK(cmd_bode(rc) == 0);
    rc.out_dir = d2;
    CHECK(cmd_design(rc) == 0);
    CHECK(cmd_stability(rc) == 0);
    CHECK(cmd_bode(rc) == 0);
    for (const char* f : {"design.txt", "stability.txt", "bode.csv", "margins.txt"}) {
        CAPTURE(f);
        CHECK(slurp(d1 / f) == slurp(d2 / f));
        CHECK_FALSE(slurp(d1 / f).empty());
    }
    CHECK(slurp(d1 / "stability.txt").find("[proposition1]") != std::string::npos);
    std::filesystem::remove_all(d1);
    std::filesystem::remove_all(d2);
}

TEST_CASE("mse command with and without sweeps") {
    auto rc = resolve(ConfigFile::parse(kNominal));
    rc.mse_points = 20;
    const auto dir = scratch("mse");
    rc.out_dir = dir;
    CHECK(cmd_mse(rc) == 0);
    CHECK(std::filesystem::exists(dir / "mse.csv"));
    rc.sweep_gamma = {0.6, 0.9};
    rc.emit_plots = true;
    CHECK(cmd_mse(rc) == 0);
    CHECK(std::filesystem::exists(dir / "mse_gamma_0.6.csv"));
    CHECK(std::filesystem::exists(dir / "mse_gamma_0.6.gp"));
    const std::string csv = slurp(dir / "mse.csv");
    CHECK(csv.rfind("omega_rad_s,e_ifo,e_fo\n", 0) == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("step command writes traces and metrics") {
    auto rc = resolve(ConfigFile::parse(kNominal));
    const auto dir = scratch("step");
    rc.out_dir = dir;
    CHECK(cmd_step(rc) == 0);
    CHECK(std::filesystem::exists(dir / "step_ifo_K1.csv"));
    CHECK(std::filesystem::exists(dir / "step_io_K0.8.csv"));
    const std::string m = slurp(dir / "step_metrics.txt");
    CHECK(m.find("ifo.overshoot_fluctuation_pct=") != std::string::npos);
    CHECK(m.find("io.k_ip=") != std::string::npos);
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(cmd_pmsm(rc), ConfigError);
}
