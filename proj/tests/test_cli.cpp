#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "support.hpp"
#include "udisc/io.hpp"

using namespace udisc;
using namespace udisc::testing;
using io::json;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("udisc_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write_problem(const std::string& name, const CMatrix& phi, const std::optional<Vector>& priors,
                              const std::optional<Vector>& weights = std::nullopt) {
        io::ProblemFile pf;
        for (Index i = 0; i < phi.cols(); ++i) pf.states.emplace_back(phi.col(i));
        pf.priors = priors;
        pf.weights = weights;
        return write_text(name, io::problem_json(pf).dump());
    }

    std::string write_text(const std::string& name, const std::string& text) {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p.string();
    }

    static std::string read(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    /// Runs the CLI; returns its exit status, stdout in `out` and stderr in `err`.
    int run(const std::string& args, std::string* out = nullptr, std::string* err = nullptr,
            const std::string& env = "") {
        const std::string o = (dir_ / "stdout").string(), e = (dir_ / "stderr").string();
        const std::string cmd = env + " " + UDISC_CLI + " " + args + " >" + o + " 2>" + e;
        const int status = std::system(cmd.c_str());
        if (out) *out = read(o);
        if (err) *err = read(e);
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, SolveInteriorRow) {
    const std::string f = write_problem("int.json", table_states(), vec({0.05, 0.35, 0.60}));
    std::string out;
    ASSERT_EQ(run("solve " + f + " --phases --povm", &out), 0);
    const io::SolutionReport r = io::report_from_json(json::parse(out));
    EXPECT_EQ(r.classification, "interior");
    EXPECT_NEAR(r.p_bar, 0.3538, 5e-4);
    ASSERT_TRUE(r.phases.has_value());
    ASSERT_TRUE(r.povm.has_value());
    EXPECT_EQ(r.povm->elements.size(), 3U);
    EXPECT_LT(r.residuals.at("povm_completeness"), 1e-9);
}

TEST_F(Cli, SolveWithVerify) {
    const std::string f = write_problem("int.json", table_states(), vec({0.05, 0.35, 0.60}));
    const std::string report = (dir_ / "report.json").string();
    ASSERT_EQ(run("solve " + f + " --verify 100000 --out " + report), 0);
    const io::SolutionReport r = io::report_from_json(json::parse(read(report)));
    ASSERT_TRUE(r.oracle_gap.has_value());
    EXPECT_GE(*r.oracle_gap, 0.0 - 1e-12);
    EXPECT_LE(*r.oracle_gap, 5e-3);
}

TEST_F(Cli, SolveBoundaryHasZeroSet) {
    const std::string f = write_problem("bnd.json", table_states(), vec({0.10, 0.80, 0.10}));
    std::string out;
    ASSERT_EQ(run("solve " + f + " --tol 1e-8 --max-iter 50 --multistarts 8 --seed 3", &out), 0);
    const io::SolutionReport r = io::report_from_json(json::parse(out));
    EXPECT_EQ(r.classification, "boundary");
    ASSERT_TRUE(r.zero_set.has_value());
    EXPECT_EQ(*r.zero_set, std::vector<Index>{2});
}

TEST_F(Cli, BadPriorsExitOne) {
    const std::string f = write_problem("bad.json", table_states(), vec({0.3, 0.35, 0.25}));
    std::string err;
    EXPECT_EQ(run("solve " + f, nullptr, &err), 1);
    EXPECT_NE(err.find("priors"), std::string::npos);
}

TEST_F(Cli, SyntaxErrorReportsLine) {
    const std::string f = write_text("broken.json", "{\"states\": [[[1,0]],\n  [[0,1]]\n  \"priors\": [0.5,0.5]}");
    std::string err;
    EXPECT_EQ(run("solve " + f, nullptr, &err), 1);
    EXPECT_NE(err.find("line 3"), std::string::npos) << err;
}

TEST_F(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(run("solve"), 1);
    EXPECT_EQ(run("frobnicate x"), 1);
    EXPECT_EQ(run("solve /nonexistent/file.json"), 1);
}

TEST_F(Cli, CertificateFailureExitTwo) {
    // An absurd certificate tolerance makes every classification unacceptable.
    const std::string f = write_problem("int.json", table_states(), vec({0.05, 0.35, 0.60}));
    std::string err;
    EXPECT_EQ(run("solve " + f + " --tol 1e-30", nullptr, &err), 2) << err;
}

TEST_F(Cli, Gepm) {
    const std::string f = write_problem("g.json", table_states(), std::nullopt, vec({1.0, 1.0, 1.0}));
    std::string out;
    ASSERT_EQ(run("gepm " + f, &out), 0);
    const json j = json::parse(out);
    const double smin = table_gram().sigma_min();
    for (double v : j.at("p").get<std::vector<double>>()) EXPECT_NEAR(v, smin, 1e-14);
    EXPECT_FALSE(j.at("priors").is_null());

    const std::string o = write_problem("o.json", CMatrix::Identity(3, 3), std::nullopt, vec({1.0, 1.0, 1.0}));
    ASSERT_EQ(run("gepm " + o, &out), 0);
    EXPECT_TRUE(json::parse(out).at("singular").get<bool>());
    EXPECT_TRUE(json::parse(out).at("priors").is_null());

    const std::string z = write_problem("z.json", table_states(), std::nullopt, vec({1.0, 0.0, 1.0}));
    EXPECT_EQ(run("gepm " + z), 1);
}

TEST_F(Cli, SimulateIsSeedDeterministic) {
    const std::string f = write_problem("int.json", table_states(), vec({0.05, 0.35, 0.60}));
    std::string a, b, c;
    ASSERT_EQ(run("simulate " + f + " --trials 100000 --seed 5", &a), 0);
    ASSERT_EQ(run("simulate " + f + " --trials 100000", &b, nullptr, "UDISC_SEED=5"), 0);
    ASSERT_EQ(run("simulate " + f + " --trials 100000 --seed 6", &c, nullptr, "UDISC_SEED=5"), 0);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    EXPECT_EQ(json::parse(a).at("empirical_error").get<double>(), 0.0);

    const std::string o = write_problem("o.json", CMatrix::Identity(3, 3), vec({0.2, 0.3, 0.5}));
    ASSERT_EQ(run("simulate " + o + " --trials 1000000 --seed 1", &a), 0);
    EXPECT_EQ(json::parse(a).at("empirical_success").get<double>(), 1.0);
}

TEST_F(Cli, RegionCsv) {
    const std::string f = write_problem("int.json", table_states(), vec({0.05, 0.35, 0.60}));
    const std::string c1 = (dir_ / "a.csv").string(), c2 = (dir_ / "b.csv").string();
    ASSERT_EQ(run("region " + f + " --samples 10000 --seed 9 --out " + c1), 0);
    ASSERT_EQ(run("region " + f + " --samples 10000 --seed 9 --out " + c2), 0);
    const std::string text = read(c1);
    EXPECT_EQ(text, read(c2));

    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "p1,p2,p3");
    const GramMatrix X = table_gram();
    int rows = 0;
    while (std::getline(in, line)) {
        double a = 0, b = 0, c = 0;
        ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &b, &c), 3);
        EXPECT_TRUE(check_feasible(X, vec({a, b, c})).on_critical_surface);
        ++rows;
    }
    EXPECT_EQ(rows, 10000);

    const std::string two = write_problem("two.json", pair_states(0.3), vec({0.5, 0.5}));
    std::string err;
    EXPECT_EQ(run("region " + two + " --samples 10 --out " + c1, nullptr, &err), 1);
    EXPECT_NE(err.find("3 states"), std::string::npos);
}
