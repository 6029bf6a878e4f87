#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "nsinflow/acceptance.hpp"
#include "nsinflow/commands.hpp"
#include "nsinflow/config.hpp"
#include "nsinflow/errors.hpp"

using namespace nsinflow;
using namespace nsinflow::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("nsinflow_test_" + tag + "_" + std::to_string(::getpid()))) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

RunConfig small_config(const fs::path& out) {
    return resolve_config({{"N", "1025"}, {"output_dir", out.string()}});
}

}  // namespace

TEST_CASE("config text parsing") {
    const auto kv = parse_key_values("# header\n gamma = 1.4  # trailing\n\noutput_dir = \"a # b\"\nN=2049\n");
    CHECK(kv.size() == 3);
    CHECK(kv.at("gamma") == "1.4");
    CHECK(kv.at("output_dir") == "a # b");
    CHECK(kv.at("N") == "2049");
    CHECK_THROWS_AS(parse_key_values("gamma 1.4\n"), ConfigError);
    try {
        parse_key_values("gama = 2\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("rho_plus") != std::string::npos);
    }
    CHECK_THROWS_AS(read_config_file("/nonexistent/nsinflow.cfg"), ConfigError);
}

TEST_CASE("config resolution") {
    SUBCASE("defaults") {
        const auto cfg = resolve_config({});
        CHECK(cfg.params.n == 2);
        CHECK(cfg.params.rho_b == doctest::Approx(1.0025));
        CHECK(cfg.grid.N == 4097);
        CHECK(config_keys().size() == describe(cfg).size());
    }
    SUBCASE("rho_b follows u_b unless given") {
        CHECK(resolve_config({{"u_b", "0.1"}}).params.rho_b == doctest::Approx(1.01));
        CHECK(resolve_config({{"u_b", "0.1"}, {"rho_b", "0.9"}}).params.rho_b == 0.9);
    }
    SUBCASE("invalid values are rejected") {
        CHECK_THROWS_AS(resolve_config({{"u_b", "0"}}), ConfigError);
        CHECK_THROWS_AS(resolve_config({{"gamma", "0.5"}}), ConfigError);
        CHECK_THROWS_AS(resolve_config({{"N", "abc"}}), ConfigError);
        CHECK_THROWS_AS(resolve_config({{"cfl", "1.2"}}), ConfigError);
    }
    SUBCASE("describe echoes the shortest round-trip form") {
        const auto d = describe(resolve_config({{"gamma", "1.4"}}));
        CHECK(d.at("gamma") == "1.4");
        CHECK(d.at("N") == "4097");
    }
}

TEST_CASE("stationary command") {
    ::unsetenv("NSINFLOW_OUT");
    TempDir tmp("stationary");
    std::ostringstream log;
    SUBCASE("writes the profile, summary and manifest") {
        CHECK(cmd_stationary(small_config(tmp.path), log) == kExitOk);
        CHECK(fs::exists(tmp.path / "profile.csv"));
        CHECK(fs::exists(tmp.path / "stationary.json"));
        CHECK(slurp(tmp.path / "manifest.json").find("\"stationary\"") != std::string::npos);
    }
    SUBCASE("csv only") {
        auto cfg = small_config(tmp.path);
        cfg.formats = "csv";
        CHECK(cmd_stationary(cfg, log) == kExitOk);
        CHECK(fs::exists(tmp.path / "profile.csv"));
        CHECK_FALSE(fs::exists(tmp.path / "stationary.json"));
    }
    SUBCASE("budget exhaustion maps to the non-convergence code") {
        auto cfg = small_config(tmp.path);
        cfg.stationary.max_iter = 1;
        cfg.stationary.tol = 1e-14;
        CHECK(cmd_stationary(cfg, log) == kExitNonConvergence);
    }
    SUBCASE("unwritable directory") {
        CHECK(cmd_stationary(small_config("/proc/nsinflow_nope"), log) == kExitUsage);
    }
    SUBCASE("NSINFLOW_OUT overrides output_dir") {
        TempDir other("env");
        ::setenv("NSINFLOW_OUT", other.path.c_str(), 1);
        CHECK(resolve_output_dir(small_config(tmp.path)) == other.path.string());
        CHECK(cmd_stationary(small_config(tmp.path), log) == kExitOk);
        ::unsetenv("NSINFLOW_OUT");
        CHECK(fs::exists(other.path / "profile.csv"));
        CHECK_FALSE(fs::exists(tmp.path / "profile.csv"));
    }
}

TEST_CASE("evolve command and plot script") {
    ::unsetenv("NSINFLOW_OUT");
    TempDir tmp("evolve");
    std::ostringstream log;
    auto cfg = small_config(tmp.path);
    cfg.scheme.t_end = 1.0;
    cfg.scheme.snapshot_interval = 0.5;
    REQUIRE(cmd_evolve(cfg, log) == kExitOk);
    for (const char* f : {"profile.csv", "trajectory.csv", "energy.csv", "lagrangian.csv", "verdict.json",
                          "manifest.json", "snapshots/snapshot_0000.csv", "snapshots/snapshot_0002.csv"})
        CHECK(fs::exists(tmp.path / f));
    CHECK_FALSE(fs::exists(tmp.path / "snapshots/snapshot_0003.csv"));

    const std::string script = emit_plot_script(tmp.path.string());
    const std::string first = slurp(script);
    CHECK(first.find("gnuplot") != std::string::npos);
    emit_plot_script(tmp.path.string());
    CHECK(slurp(script) == first);
    CHECK(cmd_plot(tmp.path.string(), log) == kExitOk);

    TempDir empty("empty");
    fs::create_directories(empty.path);
    CHECK_THROWS_AS(emit_plot_script(empty.path.string()), ConfigError);
    CHECK(cmd_plot(empty.path.string(), log) == kExitUsage);
}

TEST_CASE("verify selection") {
    const auto& cs = acceptance::criteria();
    REQUIRE(cs.size() == 11);
    for (std::size_t i = 0; i < cs.size(); ++i) CHECK(cs[i].id == static_cast<int>(i) + 1);
    std::ostringstream out;
    CHECK(acceptance::cmd_verify({{"bogus"}, ""}, out) == 1);
    CHECK(out.str().find("decay") != std::string::npos);

    std::ostringstream ok;
    const auto res = acceptance::run_suite({{"decay"}, ""}, ok);
    REQUIRE(res.size() == 1);
    CHECK(res[0].id == 3);
    CHECK(res[0].pass);
    CHECK(ok.str().find("PASS") != std::string::npos);
}
