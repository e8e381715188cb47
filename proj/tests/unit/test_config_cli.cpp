#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mzlab/cli.hpp"
#include "mzlab/config.hpp"
#include "mzlab/errors.hpp"

using namespace mzlab;
namespace fs = std::filesystem;

namespace {

std::string config_error_key(const std::string& text, const std::vector<std::string>& ov = {}) {
    try {
        parse_config(text, ov);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<none>";
}

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("mzlab_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

const char* kSmall = R"({
  "seed": 3,
  "grid": {"N": 32},
  "profile": {"kind": "identity"},
  "tgrid": {"t_min": 0.03125, "t_max": 8, "per_octave": 4},
  "fields": {"count": 2, "band_lo": 2, "band_hi": 5},
  "mu": {"alphas": [0.0, 0.25], "export_t": 1.0}
})";

// Every number is finite unless it sits in a {"divergent": true} record.
bool numerics_ok(const nlohmann::json& j) {
    if (j.is_number()) return std::isfinite(j.get<double>());
    if (j.is_object() && j.contains("divergent") && j["divergent"] == true) return true;
    if (j.is_structured())
        for (const auto& v : j)
            if (!numerics_ok(v)) return false;
    return j.is_number() || j.is_structured() || j.is_string() || j.is_boolean() || j.is_null();
}

}  // namespace

TEST_SUITE("config_cli") {

TEST_CASE("empty config yields defaults") {
    const auto c = parse_config("{}");
    CHECK(c.seed == 1);
    CHECK(c.N == 256);
    CHECK(c.kernel.kind == "cosine");
    CHECK(!c.profile.has_value());
    CHECK(c.frame.flavor == "standard");
    CHECK(c.exponents.regimes.size() == 4);
}

TEST_CASE("diagnostics name the offending key") {
    CHECK(config_error_key(R"({"grid": {"n": 64}})") == "grid.n");
    CHECK(config_error_key(R"({"colour": 1})") == "colour");
    CHECK(config_error_key(R"({"grid": {"N": "big"}})") == "grid.N");
    CHECK(config_error_key(R"({"frame": {"eta": {"order": 1.5}}})") == "frame.eta.order");
    CHECK(config_error_key(R"({"seed": -4})") == "seed");
    CHECK(config_error_key("{}", {"operator.q=abc"}) == "operator.q");
    CHECK(config_error_key("{}", {"noequals"}) != "<none>");
}

TEST_CASE("syntax errors report a line") {
    try {
        parse_config("{\n  \"seed\": 1,\n  oops\n}");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("overrides by dotted path") {
    const auto c = parse_config(R"({"grid": {"N": 64}})", {"grid.N=128", "kernel.kind=sgn_power", "kernel.r=3",
                                                           "mu.alphas=[0.5]", "profile.kind=power"});
    CHECK(c.N == 128);
    CHECK(c.kernel.kind == "sgn_power");
    CHECK(c.kernel.r == 3.0);
    CHECK(c.mu.alphas == std::vector<double>{0.5});
    REQUIRE(c.profile.has_value());
    CHECK(c.profile->kind == "power");
}

TEST_CASE("consistency diagnostics") {
    CHECK(consistency_diagnostics(parse_config(R"({"profile": {"kind": "identity"}})")).empty());
    CHECK(!consistency_diagnostics(parse_config("{}")).empty());
    CHECK(config_error_key(R"({"exponents": {"gamma": 0.8}})") == "exponents.gamma");
    auto c = parse_config(R"({"tl": {"p": 4}, "exponents": {"gamma": 1.5}})");
    auto d = consistency_diagnostics(c);
    REQUIRE(!d.empty());
    CHECK(d.front().find("exponents.gamma") != std::string::npos);
    c = parse_config(R"({"exponents": {"regimes": ["z_surface"]}})");
    CHECK(!consistency_diagnostics(c).empty());
    c = parse_config(R"({"frame": {"sequence": "power2_square", "flavor": "classical"}})");
    CHECK(!consistency_diagnostics(c).empty());
    CHECK_THROWS_AS(build_profile(parse_config("{}")), ConfigError);
}

TEST_CASE("builders follow the config") {
    const auto c = parse_config(kSmall);
    CHECK(build_grid(c).N() == 32);
    CHECK(build_kernel(c.kernel).l1() == doctest::Approx(4.0));
    const auto tg = build_tgrid(c);
    CHECK(tg.P == 4);
    CHECK(tg.t(tg.i_lo) >= 0.03125);
    CHECK_THROWS_AS(parse_flavor("frame.flavor", "sideways"), ConfigError);
    KernelConfig bad;
    bad.kind = "wavelet";
    CHECK_THROWS_AS(build_kernel(bad), ConfigError);
}

TEST_CASE("commands write csv and summary, deterministically") {
    const fs::path dir = scratch_dir("cmds");
    const fs::path cfg = write_file(dir / "cfg.json", kSmall);
    std::ostringstream out, err;
    for (const char* cmd : {"exponents", "partition", "mu"}) {
        CAPTURE(cmd);
        CHECK(run_command(cmd, cfg.string(), {}, (dir / "a").string(), out, err) == 0);
        CHECK(run_command(cmd, cfg.string(), {}, (dir / "b").string(), out, err) == 0);
        const std::string a = slurp(dir / "a" / (std::string(cmd) + ".csv"));
        CHECK(!a.empty());
        CHECK(a == slurp(dir / "b" / (std::string(cmd) + ".csv")));
    }
    const auto summary = nlohmann::json::parse(slurp(dir / "a" / "summary.json"));
    CHECK(summary.contains("exponents"));
    CHECK(summary.contains("mu"));
    CHECK(numerics_ok(summary));
    const auto st = read_symbol_table((dir / "a" / "symbol.bin").string());
    CHECK(st.grid.N() == 32);
    CHECK(st.t == 1.0);
    // A different seed changes the random fields.
    CHECK(run_command("mu", cfg.string(), {"seed=4"}, (dir / "c").string(), out, err) == 0);
    CHECK(slurp(dir / "a" / "mu.csv") != slurp(dir / "c" / "mu.csv"));
    fs::remove_all(dir);
}

TEST_CASE("csv floats carry 17 significant digits") {
    const fs::path dir = scratch_dir("digits");
    const fs::path cfg = write_file(dir / "cfg.json", kSmall);
    std::ostringstream out, err;
    REQUIRE(run_command("exponents", cfg.string(), {"tl.p=4", "tl.q=1.5", "exponents.gamma=5"}, dir.string(), out,
                        err) == 0);
    const std::string csv = slurp(dir / "exponents.csv");
    CHECK(csv.find("0.33333333333333331") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("divergent values are tagged in the summary") {
    const fs::path dir = scratch_dir("sigma");
    const fs::path cfg = write_file(dir / "cfg.json", R"({"grid": {"N": 16}, "profile": {"kind": "identity"},
        "kernel": {"kind": "bounded_step"}, "sigma": {"xi_samples": 20, "betas": [1.0],
        "decay_points": 60, "t_min": 0.25, "t_max": 4}})");
    std::ostringstream out, err;
    REQUIRE(run_command("sigma", cfg.string(), {}, dir.string(), out, err) == 0);
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(numerics_ok(summary));
    CHECK(summary.dump().find("\"divergent\":true") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("config errors exit with code 2 and name the key") {
    const fs::path dir = scratch_dir("bad");
    const fs::path cfg = write_file(dir / "cfg.json", R"({"grid": {"NN": 64}})");
    std::ostringstream out, err;
    CHECK(run_command("partition", cfg.string(), {}, dir.string(), out, err) == 2);
    CHECK(err.str().find("grid.NN") != std::string::npos);
    CHECK(run_command("frobnicate", cfg.string(), {}, dir.string(), out, err) == 2);
    CHECK(run_command("partition", (dir / "missing.json").string(), {}, dir.string(), out, err) == 2);
    const fs::path gam = write_file(dir / "gamma.json", R"({"tl": {"p": 4}, "exponents": {"gamma": 1.5}})");
    std::ostringstream vout, verr;
    CHECK(run_command("validate", gam.string(), {}, dir.string(), vout, verr) == 2);
    CHECK((vout.str() + verr.str()).find("exponents.gamma") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("executable honours exit codes and --set") {
    const fs::path dir = scratch_dir("exe");
    const fs::path good = write_file(dir / "good.json", kSmall);
    const fs::path bad = write_file(dir / "bad.json", R"({"kernel": {"kind": 7}})");
    const std::string exe = MZLAB_CLI_PATH;
    const auto run = [&](const std::string& args) {
        const int s = std::system((exe + " " + args + " > " + (dir / "log.txt").string() + " 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    CHECK(run("validate --config " + good.string()) == 0);
    CHECK(run("validate --config " + bad.string()) == 2);
    CHECK(slurp(dir / "log.txt").find("kernel.kind") != std::string::npos);
    CHECK(run("exponents --config " + good.string() + " --set tl.p=4 --set exponents.gamma=5 --set exponents.r1=8 --out " +
              (dir / "o").string()) == 0);
    CHECK(fs::exists(dir / "o" / "exponents.csv"));
    CHECK(run("partition --bogus") == 2);
    fs::remove_all(dir);
}

}
