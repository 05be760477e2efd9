// Runs the command-line tool as a subprocess.

#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path work_dir() {
    const fs::path d = fs::temp_directory_path() / ("levy_pri_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

Result run(const std::string& args, const std::string& env = "") {
    const fs::path err = work_dir() / "stderr.txt";
    const std::string cmd = env + " " + LEVY_PRI_CLI + " " + args + " 2>" + err.string();
    Result r;
    FILE* p = ::popen(cmd.c_str(), "r");
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream f(err);
    std::stringstream ss;
    ss << f.rdbuf();
    r.err = ss.str();
    return r;
}

std::string write_config(const std::string& name, const std::string& text) {
    const fs::path p = work_dir() / name;
    std::ofstream(p) << text;
    return p.string();
}

const char* kPowerLaw = R"({"triplet":{"gamma":0,"sigma":0,"measure":{"variant":"power_law","alpha":1.5,"beta":0.5}}})";

}  // namespace

TEST(Cli, ClassifyExamplesAsJson) {
    Result r = run("classify --set triplet.measure.variant=power_law --set triplet.measure.alpha=0.5 --set triplet.measure.beta=0.5");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["payload"]["variation"]["kind"], "bounded");
    r = run("classify --set triplet.sigma=1");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["payload"]["variation"]["kind"], "unbounded");
    r = run("classify --config " + write_config("pl.json", kPowerLaw));
    ASSERT_EQ(r.code, 0);
    const json v = json::parse(r.out)["payload"]["variation"];
    EXPECT_EQ(v["kind"], "unbounded");
    EXPECT_EQ(v["plus_side"], "infinite");
    EXPECT_EQ(v["minus_side"], "infinite");
}

TEST(Cli, CriterionExamples) {
    Result r = run("criterion --config " + write_config("pl.json", kPowerLaw));
    ASSERT_EQ(r.code, 0) << r.err;
    json d = json::parse(r.out)["payload"];
    EXPECT_EQ(d["answer"], "exists");
    EXPECT_EQ(d["branch"], "UV/J-finite");
    r = run("criterion --config " + write_config("pl.json", kPowerLaw) + " --set triplet.sigma=1");
    ASSERT_EQ(r.code, 0);
    d = json::parse(r.out)["payload"];
    EXPECT_EQ(d["answer"], "exists");
    EXPECT_EQ(d["branch"], "UV/sigma");
    r = run(R"(criterion --set 'triplet={"gamma":-3,"sigma":0,"measure":{"variant":"spectrally_negative","inner":{"variant":"power_law","alpha":0.5,"beta":0.5}}}')");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["payload"]["answer"], "not_exists");
    EXPECT_NE(r.err.find("drift coefficient b"), std::string::npos);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("frobnicate").code, 1);
    EXPECT_EQ(run("criterion --set nonsense=1").code, 1);
    EXPECT_EQ(run("criterion --set triplet.sigma=-1").code, 1);
    EXPECT_EQ(run("criterion --config /nonexistent.json").code, 1);
    EXPECT_EQ(run("criterion --config " + write_config("bad.json", "{not json")).code, 1);
    EXPECT_EQ(run("criterion --format xml").code, 1);
    // A tabulated measure resolved only down to 1e-2 cannot decide J.
    const Result ind = run(R"(criterion --set 'triplet.measure={"variant":"tabulated","grid":[0.01,0.1,1],"tail_plus":[100,10,1],"tail_minus":[1000,31.6,1]}')");
    EXPECT_EQ(ind.code, 2) << ind.out << ind.err;
    EXPECT_EQ(run("simulate --set sim.epsilon=1e-9 --set sim.n_paths=1").code, 3);
    EXPECT_EQ(run("phase-scan --with-mc --set sim.n_paths=1000000").code, 3);
}

TEST(Cli, PhaseScanCells) {
    const Result r = run("phase-scan --set phase_scan.alpha_min=1.2 --set phase_scan.alpha_max=1.5 --set phase_scan.grid_steps=4 "
                      "--set phase_scan.beta_min=0.5 --set phase_scan.beta_max=1.1");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\r')), "alpha,beta,region,analytic_pri,analytic_creep,J_status,decide_pri");
    EXPECT_NE(r.out.find("\r\n1.5,0.5,interior,true,true,"), std::string::npos);
    EXPECT_NE(r.out.find("\r\n1.2,0.9,interior,false,true,"), std::string::npos);
}

TEST(Cli, SimulateAndLadderRows) {
    Result r = run("simulate --set triplet.gamma=1 --set 'triplet.measure={\"variant\":\"zero\"}' --set sim.n_paths=20 "
                "--set sim.horizon=2 --set 'simulate.n_list=[1,3]' --set 'simulate.levels=[0.25]'");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("dyadic,1,3,1,"), std::string::npos) << r.out;
    r = run("ladder --set ladder.renewal.method=closed_form --set 'ladder.grid=[0.5,1]'");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "x,U\r\n0.5,0.5\r\n1,1\r\n");
}

TEST(Cli, DeterministicCsv) {
    const std::string args = "simulate --config " + write_config("pl.json", kPowerLaw) +
                             " --set triplet.sigma=1 --set sim.n_paths=50 --set sim.horizon=5 --seed 9";
    const Result a = run(args), b = run(args + " --threads 2");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, run(args + " --seed 10").out);
}

TEST(Cli, EmittedConfigReingestsToSameHash) {
    const Result a = run("criterion --format json --set triplet.sigma=0.5");
    ASSERT_EQ(a.code, 0);
    const json rec = json::parse(a.out);
    const std::string cfg = write_config("emitted.json", rec["config"].dump(2));
    const Result b = run("criterion --format json --config " + cfg);
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(json::parse(b.out)["config_hash"], rec["config_hash"]);
}

TEST(Cli, CacheReplay) {
    const fs::path cache = work_dir() / "cache";
    fs::remove_all(cache);
    const std::string args = "simulate --set sim.n_paths=20 --set sim.horizon=1 --set triplet.sigma=1";
    const Result a = run(args + " --cache " + cache.string());
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.err.find("cache hit"), std::string::npos);
    const Result b = run(args, "LEVY_PRI_CACHE=" + cache.string());
    EXPECT_EQ(b.code, 0);
    EXPECT_NE(b.err.find("cache hit"), std::string::npos);
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, OutFile) {
    const fs::path out = work_dir() / "out.csv";
    const Result r = run("ladder --set ladder.renewal.method=closed_form --set 'ladder.grid=[1]' --out " + out.string());
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    std::ifstream f(out);
    std::stringstream ss;
    ss << f.rdbuf();
    EXPECT_EQ(ss.str(), "x,U\r\n1,1\r\n");
}
