#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <unistd.h>

#include "cfd/timing/cell_library.hpp"
#include "cli.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using cfd::cli::Exit;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cfd::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

int code(Exit e) { return static_cast<int>(e); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("cfdsynth_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string operator/(const std::string& s) const { return (path / s).string(); }
};

const std::string c17 = cfd::test::source_path("benchmarks/c17.bench");

}  // namespace

TEST_CASE("synth writes schedule, summary and manifest") {
    TempDir t;
    const auto r = cli({"synth", c17, "-t", "22", "-o", t / "run"});
    REQUIRE(r.code == code(Exit::Ok));
    CHECK(r.out.find("verified 1") != std::string::npos);
    CHECK(r.out.find("target_met 1") != std::string::npos);
    for (const char* f : {"graph.txt", "schedule.txt", "summary.txt", "iterations.csv", "synth.manifest.json"}) {
        CHECK(fs::exists(t.path / "run" / f));
    }
    const auto m = nlohmann::json::parse(slurp(t.path / "run" / "synth.manifest.json"));
    CHECK(m["command"] == "synth");
    CHECK(m["inputs"][0] == c17);
    CHECK(m["library"] == "builtin");
    CHECK(m["period_ps"] == 22.0);
    CHECK(m.contains("tool_version"));
    CHECK(m.contains("seed"));
    CHECK(m["output_dir"] == t / "run");

    SUBCASE("analysis commands read the run back") {
        const auto sta = cli({"sta", t / "run", "-o", t / "a"});
        CHECK(sta.code == code(Exit::Ok));
        CHECK(sta.out.find("PASS") != std::string::npos);
        const auto sim = cli({"sim", t / "run", "--waves", "1000", "-o", t / "a"});
        CHECK(sim.code == code(Exit::Ok));
        CHECK(sim.out.find("timing_failures 0") != std::string::npos);
        CHECK(sim.out.find("mismatches 0") != std::string::npos);
        CHECK(fs::exists(t.path / "a" / "sim.manifest.json"));
        CHECK(fs::exists(t.path / "a" / "sta.manifest.json"));
        // far below the hold-implied period the same schedule must fail
        CHECK(cli({"sta", t / "run", "-t", "12", "-o", t / "a"}).code == code(Exit::Verification));
        CHECK(cli({"sim", t / "run", "-t", "12", "--waves", "20", "-o", t / "a"}).code == code(Exit::Verification));
    }
    SUBCASE("perturb and tune tables") {
        const auto p = cli({"perturb", t / "run", "--trials", "5", "-j", "1", "-o", t / "p"});
        CHECK(p.code == code(Exit::Ok));
        CHECK(p.out.rfind("seed,violations,setup,hold\n", 0) == 0);
        const auto tu = cli({"tune", t / "run", "--trials", "5", "-j", "1", "-o", t / "p"});
        CHECK(tu.code == code(Exit::Ok));
        CHECK(tu.out.rfind("seed,scale,period_ps,pass", 0) == 0);
        CHECK(slurp(t.path / "p" / "tune_summary.txt").find("passed 5") != std::string::npos);
        // identical seeds give identical tables
        CHECK(cli({"tune", t / "run", "--trials", "5", "-j", "2", "-o", t / "q"}).out == tu.out);
    }
}

TEST_CASE("synth output is deterministic") {
    TempDir t;
    REQUIRE(cli({"synth", c17, "-o", t / "a"}).code == 0);
    REQUIRE(cli({"synth", c17, "-o", t / "b"}).code == 0);
    for (const char* f : {"graph.txt", "schedule.txt", "summary.txt", "iterations.csv"}) {
        CHECK(slurp(t.path / "a" / f) == slurp(t.path / "b" / f));
    }
}

TEST_CASE("exit codes") {
    TempDir t;
    SUBCASE("period below the floor") {
        const auto r = cli({"synth", cfd::test::source_path("tests/data/single_xor.bench"), "-t", "10", "-o", t / "x"});
        CHECK(r.code == code(Exit::PeriodBelowFloor));
        CHECK(r.err.find("16.4") != std::string::npos);
    }
    SUBCASE("missing and malformed input") {
        CHECK(cli({"synth", t / "missing.bench", "-o", t / "x"}).code == code(Exit::Parse));
        std::ofstream(t / "bad.bench") << "INPUT(a)\ny = FOO(a)\nOUTPUT(y)\n";
        const auto r = cli({"synth", t / "bad.bench", "-o", t / "x"});
        CHECK(r.code == code(Exit::Parse));
        CHECK(r.err.find("bad.bench:2") != std::string::npos);
        CHECK(cli({"sta", t / "nowhere", "-o", t / "x"}).code == code(Exit::Parse));
        std::ofstream(t / "bad.lib") << "[AND]\nsetup = x\n";
        CHECK(cli({"synth", c17, "--lib", t / "bad.lib", "-o", t / "x"}).code == code(Exit::Parse));
    }
    SUBCASE("iteration cap") {
        const auto r = cli({"synth", c17, "--max-iter", "1", "-o", t / "x"});
        CHECK(r.code == code(Exit::IterationCap));
        CHECK(fs::exists(t.path / "x" / "schedule.txt"));
    }
    SUBCASE("usage") {
        CHECK(cli({}).code == code(Exit::Usage));
        CHECK(cli({"synth"}).code == code(Exit::Usage));
        CHECK(cli({"frobnicate"}).code == code(Exit::Usage));
        CHECK(cli({"sweep", c17, "--from", "30", "--to", "20", "-o", t / "x"}).code == code(Exit::Usage));
        CHECK(cli({"--help"}).code == 0);
    }
}

TEST_CASE("library from the environment") {
    TempDir t;
    auto lib = cfd::timing::CellLibrary::defaults();
    std::ofstream(t / "cells") << lib.serialize();
    ::setenv(cfd::cli::kLibraryEnv, (t / "cells").c_str(), 1);
    const auto r = cli({"fpb", c17, "-o", t / "f"});
    ::unsetenv(cfd::cli::kLibraryEnv);
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(slurp(t.path / "f" / "fpb.manifest.json"))["library"] == t / "cells");
    CHECK(r.out.find("period_ps 20.4") != std::string::npos);
}

TEST_CASE("fpb, sweep and compare tables") {
    TempDir t;
    const auto f = cli({"fpb", cfd::test::source_path("tests/data/and_tree5.bench"), "-o", t / "f"});
    REQUIRE(f.code == 0);
    CHECK(f.out.find("inserted_dffs") != std::string::npos);

    const auto s = cli({"sweep", c17, "--from", "18", "--to", "400", "--step", "191", "-j", "2", "-o", t / "s"});
    REQUIRE(s.code == 0);
    std::istringstream lines(slurp(t.path / "s" / "sweep.csv"));
    std::string line;
    std::getline(lines, line);
    CHECK(line.rfind("target_ps,ok,achieved_ps", 0) == 0);
    int rows = 0;
    std::string last;
    while (std::getline(lines, line)) {
        ++rows;
        last = line;
    }
    CHECK(rows == 3);
    CHECK(last.rfind("400,1,400,1,0,", 0) == 0);  // no DFFs needed at a long period

    const auto c = cli({"compare", c17, "-o", t / "c"});
    REQUIRE(c.code == 0);
    CHECK(c.out.rfind("circuit,tau_ps,db_dffs", 0) == 0);
    CHECK(c.out.find("\nc17,22,") != std::string::npos);
}
