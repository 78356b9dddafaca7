// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>

#include <doctest.h>

#include "curldrift/commands.hpp"
#include "curldrift/config.hpp"
#include "curldrift/error.hpp"
#include "curldrift/io.hpp"

using namespace curldrift;
namespace fs = std::filesystem;

namespace
{
fs::path scratch(std::string const& name)
{
    auto const dir = fs::temp_directory_path() / "curldrift_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(fs::path const& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path write_config(fs::path const& dir, std::string const& text)
{
    auto const p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
}

std::string config_error_key(std::string const& text)
{
    try
    {
        parse_config(text);
    }
    catch (ConfigError const& e)
    {
        return e.key();
    }
    return {};
}

int run_cli(std::string const& args)
{
    std::string const cmd = std::string(CURLDRIFT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int const status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
}  // namespace

TEST_CASE("empty configuration gives defaults")
{
    auto const c = parse_config("{}");
    CHECK(c.master_seed == 0);
    CHECK(c.discretization.dt == 0.01);
    CHECK(c.ensemble.n_modes == 2048);
    CHECK(c.discretization.checkpoint_times().size() == 10);
    CHECK(c.discretization.checkpoint_times().back() == doctest::Approx(10));
}

TEST_CASE("strict parsing names the key")
{
    CHECK(config_error_key(R"({"ensemble": {"n_replica": 3}})") == "ensemble.n_replica");
    CHECK(config_error_key(R"({"bogus": 1})") == "bogus");
    CHECK(config_error_key(R"({"ensemble": {"n_replicas": "many"}})") == "ensemble.n_replicas");
    CHECK(config_error_key(R"({"ensemble": {"n_replicas": 2.5}})") == "ensemble.n_replicas");
    CHECK(config_error_key(R"({"physics": {"family": "cubic"}})") == "physics.family");
    CHECK(config_error_key(R"({"discretization": {"dt": -1}})") == "discretization.dt");
    CHECK(config_error_key(R"({"discretization": {"checkpoints": [0.5, 0.25]}})")
          == "discretization.checkpoints");
    CHECK(config_error_key(R"({"laplace": {"horizon_factor": 4}})") == "laplace.horizon_factor");
    CHECK(config_error_key(R"({"schema_version": 2})") == "schema_version");
    CHECK(config_error_key("{not json") == "<root>");
}

TEST_CASE("resolved configuration round trips")
{
    auto const c = parse_config(R"({"master_seed": 5, "physics": {"exponent": 0.5},
                                    "discretization": {"grid_spacing": "log", "grid_count": 4}})");
    auto const j = to_json(c);
    auto const again = parse_config(j.dump());
    CHECK(to_json(again).dump() == j.dump());
    auto it = j.begin();
    CHECK(it.key() == "schema_version");
    ++it;
    CHECK(it.key() == "master_seed");
}

TEST_CASE("checkpoint grids")
{
    DiscretizationConfig d;
    d.horizon = 500;
    d.grid_start = 1;
    d.grid_count = 12;
    d.grid_spacing = "log";
    auto const t = d.checkpoint_times();
    CHECK(t.front() == doctest::Approx(1));
    CHECK(t.back() == doctest::Approx(500));
    for (std::size_t i = 1; i < t.size(); ++i)
        CHECK(t[i] > t[i - 1]);
}

TEST_CASE("csv formatting")
{
    std::ostringstream out;
    CsvWriter w(out, {"name", "value", "flag", "count"});
    w.row("a,b", 0.1, true, 7);
    w.row("plain", 1.0 / 3.0, false, -2);
    CHECK(out.str()
          == "name,value,flag,count\n"
             "\"a,b\",0.10000000000000001,1,7\n"
             "plain,0.33333333333333331,0,-2\n");
    CHECK_THROWS_AS(w.row(1.0), Error);
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("empty csv is header only")
{
    auto const dir = scratch("empty");
    {
        CsvWriter w(dir / "e.csv", {"t", "v"});
    }
    CHECK(slurp(dir / "e.csv") == "t,v\n");
    auto const t = read_csv(dir / "e.csv");
    CHECK(t.header.size() == 2);
    CHECK(t.rows.empty());
}

TEST_CASE("csv round trip is exact")
{
    auto const dir = scratch("roundtrip");
    std::vector<double> values{0.1, 1e-300, -2.5e17, 3.141592653589793, 1.0 / 7.0, 5e-324};
    {
        CsvWriter w(dir / "r.csv", {"label", "x"});
        for (double v : values)
            w.row("q\"uote", v);
    }
    auto const t = read_csv(dir / "r.csv");
    REQUIRE(t.rows.size() == values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        CHECK(t.rows[i][0] == "q\"uote");
        CHECK(std::strtod(t.rows[i][1].c_str(), nullptr) == values[i]);
    }
}

TEST_CASE("streaming writer emits rows as they come")
{
    auto const dir = scratch("stream");
    CsvWriter w(dir / "s.csv", {"i"});
    for (int i = 0; i < 1000; ++i)
        w.row(i);
    w.flush();
    CHECK(read_csv(dir / "s.csv").rows.size() == 1000);
    CHECK(w.rows() == 1000);
}

TEST_CASE("thread default follows the environment")
{
    setenv(threads_env_var, "3", 1);
    CHECK(default_threads() == 3);
    setenv(threads_env_var, "zero", 1);
    CHECK(default_threads() >= 1);
    unsetenv(threads_env_var);
    CHECK(default_threads() >= 1);
}

TEST_CASE("run_command exit codes")
{
    auto const dir = scratch("exit");
    std::ostringstream out, err;

    auto const bad = write_config(dir, R"({"ensemble": {"n_replica": 3}})");
    CHECK(run_command({"simulate", bad.string(), {}, 1, {}}, out, err) == 2);
    CHECK(err.str().find("ensemble.n_replica") != std::string::npos);

    CHECK(run_command({"simulate", (dir / "missing.json").string(), {}, 1, {}}, out, err) == 2);

    auto const few = write_config(
        dir, R"({"ensemble": {"n_replicas": 50, "n_modes": 64}, "discretization": {"horizon": 1},
               "io": {"out_dir": ")" + (dir / "sim").string() + R"("}})");
    CHECK(run_command({"simulate", few.string(), {}, 2, {}}, out, err) == 0);
    CHECK(fs::exists(dir / "sim" / "msd.csv"));
    CHECK(fs::exists(dir / "sim" / "metadata.json"));
    auto const meta = nlohmann::ordered_json::parse(slurp(dir / "sim" / "metadata.json"));
    CHECK(meta.begin().key() == "tool");
    CHECK(meta["seed"] == 0);
    CHECK(meta["config"]["ensemble"]["n_replicas"] == 50);
    CHECK(meta.contains("wall_seconds"));

    CHECK(run_command({"simulate", few.string(), 99, 1, (dir / "seeded").string()}, out, err) == 0);
    auto const seeded = nlohmann::ordered_json::parse(slurp(dir / "seeded" / "metadata.json"));
    CHECK(seeded["seed"] == 99);
    CHECK(slurp(dir / "seeded" / "msd.csv") != slurp(dir / "sim" / "msd.csv"));
}

TEST_CASE("outputs are byte identical across runs and thread counts")
{
    auto const dir = scratch("determinism");
    auto const cfg = write_config(
        dir, R"({"master_seed": 12, "ensemble": {"n_replicas": 64, "n_modes": 128,
                 "trend_window": [0.5, 2]}, "discretization": {"horizon": 2},
                 "io": {"replica_csv": true}})");
    std::ostringstream out, err;
    for (auto const& [name, threads] :
         std::vector<std::pair<std::string, int>>{{"a", 1}, {"b", 8}, {"c", 1}})
        REQUIRE(run_command({"simulate", cfg.string(), {}, threads, (dir / name).string()}, out,
                            err)
                == 0);
    for (char const* f : {"msd.csv", "trend.csv", "replicas.csv", "simulate.json"})
    {
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
        CHECK(slurp(dir / "a" / f) == slurp(dir / "c" / f));
    }
}

TEST_CASE("verify with default settings passes")
{
    auto const dir = scratch("verify");
    auto const cfg = write_config(dir, "{}");
    std::ostringstream out, err;
    CHECK(run_command({"verify", cfg.string(), {}, 1, (dir / "v").string()}, out, err) == 0);
    auto const summary = nlohmann::ordered_json::parse(slurp(dir / "v" / "verify.json"));
    CHECK(summary["passed"] == true);
    CHECK(summary["identity"]["cases"] == 100);
}

TEST_CASE("command line tool")
{
    auto const dir = scratch("tool");
    auto const bad = write_config(dir, R"({"io": {"out_dirr": "x"}})");
    CHECK(run_cli("simulate --config " + bad.string()) == 2);
    CHECK(run_cli("simulate") == 2);
    CHECK(run_cli("frobnicate --config " + bad.string()) == 2);
    CHECK(run_cli("--help") == 0);
    auto const ok = write_config(dir, R"({"bounds": {"scan_points": 5, "c_terms": 100}})");
    CHECK(run_cli("bounds --config " + ok.string() + " --out " + (dir / "b").string()
                  + " --threads 2 --seed 4")
          == 0);
    CHECK(fs::exists(dir / "b" / "envelope.csv"));
    CHECK(fs::exists(dir / "b" / "metadata.json"));
}
