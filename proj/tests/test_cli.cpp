#include <selfsense/cli.hpp>
#include <selfsense/config.hpp>

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace selfsense;

namespace {

const fs::path kSource(SELFSENSE_SOURCE_DIR);

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args)
{
    args.insert(args.begin(), "selfsense");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir()
    {
        std::random_device rd;
        path = fs::temp_directory_path() / ("selfsense-cli-" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string summary_value(const fs::path& file, const std::string& key)
{
    std::istringstream in(slurp(file));
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(key + " = ", 0) == 0)
            return line.substr(key.size() + 3);
    return {};
}

std::vector<std::vector<double>> read_csv(const fs::path& p)
{
    std::istringstream in(slurp(p));
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ','))
            row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_CASE("selftest passes")
{
    const Outcome r = run({"selftest"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(r.out.find("passed") != std::string::npos);
}

TEST_CASE("sweep writes a monotonic sweep.csv")
{
    TempDir tmp;
    const Outcome r = run({"sweep", "--out", tmp / "s"});
    REQUIRE(r.code == kExitOk);
    CHECK(slurp(tmp.path / "s" / "sweep.csv").rfind("x_true,x_hat_raw,y_hat_raw\n", 0) == 0);
    const auto rows = read_csv(tmp.path / "s" / "sweep.csv");
    REQUIRE(rows.size() == 21);
    for (std::size_t k = 1; k < rows.size(); ++k)
        CHECK(rows[k][1] > rows[k - 1][1]);
    CHECK(fs::exists(tmp.path / "s" / "trace.csv"));
    CHECK(summary_value(tmp.path / "s" / "summary.txt", "sweep_x_strictly_monotonic") == "true");
}

TEST_CASE("output directory is not overwritten without --force")
{
    TempDir tmp;
    REQUIRE(run({"sweep", "-o", tmp / "s"}).code == kExitOk);
    const Outcome again = run({"sweep", "-o", tmp / "s"});
    CHECK(again.code == kExitIo);
    CHECK(again.err.find("--force") != std::string::npos);
    CHECK(std::count(again.err.begin(), again.err.end(), '\n') == 1);
    CHECK(run({"sweep", "-o", tmp / "s", "--force"}).code == kExitOk);
}

TEST_CASE("levitate with estimated feedback settles")
{
    TempDir tmp;
    const Outcome r = run({"levitate", "--feedback=estimated", "--out", tmp / "l"});
    REQUIRE(r.code == kExitOk);
    const std::string settling = summary_value(tmp.path / "l" / "summary.txt", "settling_time");
    REQUIRE_FALSE(settling.empty());
    REQUIRE(settling != "none");
    CHECK(std::stod(settling) <= 0.5);
    CHECK(summary_value(tmp.path / "l" / "summary.txt", "touchdown") == "false");
    CHECK(read_csv(tmp.path / "l" / "trace.csv").size() == 2000);
}

TEST_CASE("touchdown has its own exit code")
{
    TempDir tmp;
    const Outcome r = run({"levitate", "--set", "scenario.kind=open_loop_injection", "-o", tmp / "o"});
    CHECK(r.code == kExitTouchdown);
    CHECK(summary_value(tmp.path / "o" / "summary.txt", "touchdown") == "true");
    const auto trace = read_csv(tmp.path / "o" / "trace.csv");
    REQUIRE_FALSE(trace.empty());
    CHECK(trace.back()[trace.back().size() - 2] == 1.0);  // touchdown
}

TEST_CASE("disturb substitutes a default step")
{
    TempDir tmp;
    const Outcome r = run({"disturb", "--set", "scenario.duration=0.2", "-o", tmp / "d"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("no disturbance configured") != std::string::npos);
    CHECK(summary_value(tmp.path / "d" / "summary.txt", "scenario") == "disturbance_rejection");
    CHECK(std::stod(summary_value(tmp.path / "d" / "summary.txt", "peak_deviation_after_disturbance")) > 0.0);
}

TEST_CASE("configuration errors")
{
    TempDir tmp;
    const Outcome typo = run({"levitate", "--set", "controller.kpp=1", "-o", tmp / "a"});
    CHECK(typo.code == kExitConfig);
    CHECK(typo.err.find("controller.kpp") != std::string::npos);
    CHECK_FALSE(fs::exists(tmp.path / "a"));

    std::ofstream(tmp.path / "bad.ini") << "[motor]\nnominal_gap_g0 = 0\n";
    const Outcome bad = run({"sweep", "-c", tmp / "bad.ini", "-o", tmp / "b"});
    CHECK(bad.code == kExitConfig);
    CHECK(bad.err.find("nominal_gap_g0") != std::string::npos);
    CHECK(std::count(bad.err.begin(), bad.err.end(), '\n') == 1);
}

TEST_CASE("usage errors")
{
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"hover"}).code == kExitUsage);
    CHECK(run({"levitate"}).code == kExitUsage);
    CHECK(run({"levitate", "--feedback=psychic", "-o", "x"}).code == kExitUsage);
    CHECK(run({"sweep", "-c", "/nonexistent.ini", "-o", "x"}).code == kExitUsage);
    CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("calibrate writes a config that reloads identically")
{
    TempDir tmp;
    REQUIRE(run({"calibrate", "-o", tmp / "c"}).code == kExitOk);
    const SystemConfig cfg = load_config(tmp.path / "c" / "config.ini");
    CHECK_FALSE(cfg.estimator.auto_calibrate);
    CHECK(format_config(cfg) == slurp(tmp.path / "c" / "config.ini"));

    const SystemConfig fragment = load_config(tmp.path / "c" / "calibration.ini");
    CHECK(fragment.estimator.x.gain == cfg.estimator.x.gain);
    CHECK(fragment.estimator.x.offset == cfg.estimator.x.offset);
    CHECK(fragment.estimator.y.gain == cfg.estimator.y.gain);
    CHECK(fragment.estimator.y.offset == cfg.estimator.y.offset);

    const auto defaults = default_config();
    const auto fit = calibrate_axis(defaults, SweepAxis::X);
    CHECK(cfg.estimator.x.gain == fit.calibration.gain);

    const Outcome lev = run({"levitate", "-c", tmp / "c/config.ini", "-o", tmp / "l"});
    CHECK(lev.code == kExitOk);
    CHECK(summary_value(tmp.path / "l" / "summary.txt", "calibration_gain_x").empty());
}

TEST_CASE("seed precedence: flag, environment, config")
{
    TempDir tmp;
    auto seed_of = [&](std::vector<std::string> args, const std::string& dir) {
        args.insert(args.end(), {"--set", "scenario.duration=0.01", "-o", tmp / dir});
        REQUIRE(run(args).code == kExitOk);
        return summary_value(tmp.path / dir / "summary.txt", "seed");
    };
    ::unsetenv("SELFSENSE_SEED");
    CHECK(seed_of({"levitate", "--set", "scenario.seed=5"}, "a") == "5");
    ::setenv("SELFSENSE_SEED", "9", 1);
    CHECK(seed_of({"levitate", "--set", "scenario.seed=5"}, "b") == "9");
    CHECK(seed_of({"levitate", "--seed", "11"}, "c") == "11");
    ::unsetenv("SELFSENSE_SEED");
    CHECK(seed_of({"levitate"}, "d") == "1");
}

TEST_CASE("every README command runs")
{
    std::ifstream readme(kSource / "README.md");
    REQUIRE(readme);
    std::vector<std::vector<std::string>> commands;
    std::string line;
    bool in_block = false;
    while (std::getline(readme, line)) {
        if (line.rfind("```", 0) == 0) {
            in_block = !in_block;
            continue;
        }
        if (!in_block || line.rfind("build/selfsense ", 0) != 0)
            continue;
        std::istringstream words(line);
        std::vector<std::string> args;
        std::string w;
        words >> w;
        while (words >> w)
            args.push_back(w);
        commands.push_back(args);
    }
    REQUIRE(commands.size() >= 5);

    TempDir tmp;
    fs::create_directory_symlink(kSource / "config", tmp.path / "config");
    const fs::path previous = fs::current_path();
    fs::current_path(tmp.path);
    for (const auto& args : commands) {
        const Outcome r = run(args);
        std::string joined;
        for (const auto& a : args)
            joined += a + " ";
        CHECK_MESSAGE(r.code == kExitOk, joined << "-> " << r.code << ": " << r.err);
    }
    fs::current_path(previous);
}
