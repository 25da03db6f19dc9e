// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "tensim/jacobi.hpp"

namespace fs = std::filesystem;
using tensim::cli::run;

namespace {

struct Out {
    int code;
    std::string out, err;
};

Out call(std::vector<std::string> args) {
    std::ostringstream o, e;
    int code = run(args, o, e);
    return {code, o.str(), e.str()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() / ("tensim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string path(const char* f) const { return (dir / f).string(); }
    fs::path dir;
};

}  // namespace

TEST_F(Cli, SolveWritesArtifactsAndSummary) {
    Out r = call({"solve", "--nx", "64", "--ny", "64", "-n", "5", "--cores", "2", "--csv", "-o", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::regex_search(r.out, std::regex(R"(GPt/s=[0-9.e+-]+, energy_J=[0-9.e+-]+)"))) << r.out;
    EXPECT_TRUE(fs::exists(dir / "grid.csv"));
    EXPECT_TRUE(fs::exists(dir / "report.json"));
    tensim::Domain d;
    d.nx = d.ny = 64;
    EXPECT_EQ(tensim::read_grid(dir / "grid.bin"), tensim::reference_solve(d, 5));
}

TEST_F(Cli, ConfigFileAndDryRun) {
    {
        std::ofstream f(dir / "run.ini");
        f << "[domain]\nnx = 32\nny = 32\niterations = 3\n[kernel]\nvariant = initial\n[cost]\ntileop_ns = 200\n";
    }
    Out r = call({"solve", "-c", path("run.ini"), "--dry-run"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("variant = initial"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("tileop_ns = 200"), std::string::npos) << r.out;
    EXPECT_FALSE(fs::exists(fs::path(".") / "never"));
}

TEST_F(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(call({"solve", "-c", path("missing.ini")}).code, 2);
    EXPECT_EQ(call({"solve", "--bogus"}).code, 2);
    EXPECT_EQ(call({"frobnicate"}).code, 2);
    EXPECT_EQ(call({"solve", "--nx", "33", "-o", dir.string()}).code, 2);
    {
        std::ofstream f(dir / "bad.ini");
        f << "[domain]\nwidth = 4\n";
    }
    Out r = call({"solve", "-c", path("bad.ini")});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.err.rfind("tensim: ", 0), 0u) << r.err;
}

TEST_F(Cli, SimulatorErrorsExitOne) {
    // Unpadded rows with strict writes raise an unaligned write inside the simulation.
    {
        std::ofstream f(dir / "strict.ini");
        f << "[domain]\nnx = 64\nny = 64\niterations = 1\n[kernel]\nvariant = initial\nlayout = unpadded\n";
    }
    EXPECT_EQ(call({"solve", "-c", path("strict.ini"), "-o", dir.string()}).code, 1);
}

TEST_F(Cli, BenchAblateAndReport) {
    Out b = call({"bench", "--preset", "replication", "-o", dir.string()});
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_TRUE(fs::exists(dir / "bench_replication.csv"));
    EXPECT_EQ(call({"bench", "--list"}).code, 0);

    {
        std::ofstream f(dir / "small.ini");
        f << "[domain]\nnx = 64\nny = 64\niterations = 20\n";
    }
    Out a = call({"ablate", "-c", path("small.ini"), "--phases", "none", "--phases", "all", "-o", dir.string()});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out.rfind("read,memcpy,compute,write,gpt_s,measured_gpt_s,ratio", 0), 0u) << a.out;

    Out rep = call({"report", "-o", dir.string()});
    ASSERT_EQ(rep.code, 0) << rep.err;
    EXPECT_NE(rep.out.find("energy audit: every accelerator row"), std::string::npos);
}
