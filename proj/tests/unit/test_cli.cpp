#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"

using namespace robust_scatter;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "robust-scatter");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("robust_scatter_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write_dataset(const std::string& name, const Dataset& d) const {
        std::ofstream f(path(name));
        write_matrix_csv(f, d.samples(), 17);
        return path(name);
    }

    static std::string slurp(const std::string& p) {
        std::ifstream f(p);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, HelpListsFlagsWithDefaults) {
    const auto top = run_cli({"--help"});
    EXPECT_EQ(top.code, 0);
    EXPECT_NE(top.out.find("estimate"), std::string::npos);
    const auto sim = run_cli({"simulate", "--help"});
    EXPECT_EQ(sim.code, 0);
    for (const char* flag : {"--dims", "--ratio", "--reps", "--seed", "--kind", "--u", "--alpha", "--dist",
                             "--threads", "--tol", "--max-iter", "--out", "--master-reps"})
        EXPECT_NE(sim.out.find(flag), std::string::npos) << flag;
    EXPECT_NE(sim.out.find("50"), std::string::npos);
    EXPECT_EQ(run_cli({"--version"}).code, 0);
}

TEST_F(CliTest, UsageErrorsExitOne) {
    EXPECT_EQ(run_cli({}).code, 1);
    EXPECT_EQ(run_cli({"estimate", "--input", "x.csv", "--out", "y.json", "--bogus"}).code, 1);
    EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
    EXPECT_EQ(run_cli({"estimate", "--out", path("e.json")}).code, 1);
    EXPECT_EQ(run_cli({"estimate", "--input", path("missing.csv"), "--out", path("e.json")}).code, 1);
    // Synthetic commands need a seed.
    EXPECT_EQ(run_cli({"master-eq", "--p", "10", "--kind", "tre"}).code, 1);
    EXPECT_EQ(run_cli({"simulate", "--dims", "8", "--reps", "1", "--out", path("s.csv")}).code, 1);
}

TEST_F(CliTest, CsvParseErrorNamesRowAndColumn) {
    {
        std::ofstream f(path("bad.csv"));
        f << "1,2\n3,oops\n4,5\n";
    }
    const auto r = run_cli({"estimate", "--input", path("bad.csv"), "--out", path("e.json")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("row 2, column 2"), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(path("e.json")));
}

TEST_F(CliTest, EstimateWritesSchemaAndRoundTrips) {
    const Dataset d = sample(DistributionSpec::laplace(), 40, 5, 3);
    const auto in = write_dataset("data.csv", d);
    const auto r = run_cli({"estimate", "--kind", "tyler", "--input", in, "--out", path("est.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json j = read_json_file(path("est.json"));
    for (const char* key : {"kind", "p", "n", "alpha", "matrix", "weights", "iterations", "residual", "converged"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["p"], 5);
    EXPECT_EQ(j["n"], 40);
    EXPECT_EQ(j["matrix"].size(), 25u);
    const ScatterEstimate back = scatter_estimate_from_json(j);
    const ScatterEstimate direct = tyler(read_dataset_csv(fs::path(in)));
    EXPECT_EQ(back.matrix.entries(), direct.matrix.entries());
    EXPECT_EQ(back.weights, direct.weights);
    const Json meta = read_json_file(path("est.json.meta.json"));
    EXPECT_EQ(meta["version"], cli::kVersion);
    EXPECT_EQ(meta["config"]["kind"], "tyler");
    EXPECT_FALSE(fs::exists(path("est.json.tmp")));
}

TEST_F(CliTest, EstimateOtherKindsAndCsvOutput) {
    const auto in = write_dataset("data.csv", sample(DistributionSpec::laplace(), 40, 5, 3));
    for (const char* kind : {"maronna", "tre", "mre"}) {
        const auto r = run_cli({"estimate", "--kind", kind, "--u", "huber:2", "--alpha", "0.5", "--input", in,
                                "--out", path(std::string(kind) + ".json")});
        ASSERT_EQ(r.code, 0) << kind << r.err;
        const auto est = scatter_estimate_from_json(read_json_file(path(std::string(kind) + ".json")));
        EXPECT_TRUE(est.converged);
    }
    const auto r = run_cli({"estimate", "--input", in, "--out", path("m.csv")});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(read_matrix_csv(fs::path(path("m.csv"))).rows(), 5);
}

TEST_F(CliTest, NonConvergenceExitsTwoWithJsonReport) {
    const auto in = write_dataset("data.csv", sample(DistributionSpec::laplace(), 40, 5, 3));
    const auto r = run_cli({"estimate", "--input", in, "--max-iter", "1", "--out", path("est.json")});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(fs::exists(path("est.json")));
    const Json report = read_json_file(path("est.json.error.json"));
    EXPECT_EQ(report["error"]["code"], "non_convergence");
    EXPECT_NE(r.err.find("non_convergence"), std::string::npos);
}

TEST_F(CliTest, SimulateCsvAndSidecarSlopes) {
    const auto r = run_cli({"simulate", "--kind", "maronna", "--u", "rational", "--dist", "laplace", "--dims",
                            "8,16,32,64", "--ratio", "2", "--reps", "3", "--seed", "7", "--out", path("fig1.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream f(path("fig1.csv"));
    std::string header, line;
    std::getline(f, header);
    EXPECT_EQ(header, "p,n,linf_mean,linf_stderr,rmse_mean,rmse_stderr");
    int rows = 0;
    while (std::getline(f, line)) rows += !line.empty();
    EXPECT_EQ(rows, 4);
    const Json meta = read_json_file(path("fig1.csv.meta.json"));
    EXPECT_TRUE(meta["result"].contains("slope_linf"));
    EXPECT_TRUE(meta["result"].contains("slope_rmse"));
    EXPECT_EQ(meta["config"]["seed"], 7);
}

TEST_F(CliTest, SeedDeterminesOutputAndThreadsDoNot) {
    const std::vector<std::string> base{"simulate", "--kind", "tre", "--alpha", "1", "--dims", "8,16", "--reps",
                                        "4",        "--master-reps", "30", "--seed", "11"};
    auto a = base, b = base, c = base;
    a.insert(a.end(), {"--out", path("a.json")});
    b.insert(b.end(), {"--threads", "3", "--out", path("b.json")});
    c[12] = "12";
    c.insert(c.end(), {"--out", path("c.json")});
    ASSERT_EQ(run_cli(a).code, 0);
    ASSERT_EQ(run_cli(b).code, 0);
    ASSERT_EQ(run_cli(c).code, 0);
    Json ja = read_json_file(path("a.json")), jb = read_json_file(path("b.json")), jc = read_json_file(path("c.json"));
    EXPECT_EQ(ja["rows"], jb["rows"]);
    EXPECT_NE(ja["rows"], jc["rows"]);
}

TEST_F(CliTest, MasterEquationReport) {
    const auto r = run_cli({"master-eq", "--kind", "tre", "--alpha", "1", "--gamma", "0.5", "--dist", "gaussian",
                            "--p", "50", "--reps", "100", "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json j = Json::parse(r.out);
    EXPECT_DOUBLE_EQ(j["predicted_weight"].get<double>(), 1.0 / j["d_star"].get<double>());
    EXPECT_LE(j["f_residual"].get<double>(), 1e-3 + 3.0 * j["f_stderr"].get<double>());
    EXPECT_EQ(j["n"], 100);
    EXPECT_TRUE(j["sanity"]["within_3_stderr"].get<bool>());
    EXPECT_EQ(run_cli({"master-eq", "--kind", "tyler", "--p", "10", "--seed", "1"}).code, 1);
}

TEST_F(CliTest, ConfigFileSuppliesDistribution) {
    {
        std::ofstream f(path("dist.cfg"));
        f << "# synthetic source\nfamily = elliptical\nradial = pareto:3\nmean = [1, 2, 3, 4]\n";
    }
    const auto r = run_cli({"diagnose", "--config", path("dist.cfg"), "--p", "4", "--n", "50", "--seed", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json j = Json::parse(r.out);
    EXPECT_EQ(j["p"], 4);
    EXPECT_TRUE(j.contains("quadratic_forms"));
    {
        std::ofstream f(path("bad.cfg"));
        f << "colour = blue\n";
    }
    EXPECT_EQ(run_cli({"diagnose", "--config", path("bad.cfg"), "--p", "4", "--n", "50", "--seed", "2"}).code, 1);
}

TEST_F(CliTest, SparseCovAndClime) {
    const auto in = write_dataset("data.csv", sample(DistributionSpec::gaussian(), 200, 6, 9));
    {
        std::ofstream f(path("truth.csv"));
        write_matrix_csv(f, Matrix::Identity(6, 6), 10);
    }
    auto r = run_cli({"sparse-cov", "--input", in, "--c1", "1.0", "--truth", path("truth.csv"), "--out",
                      path("sc.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_matrix_csv(fs::path(path("sc.csv"))).rows(), 6);
    Json side = read_json_file(path("sc.csv.meta.json"))["result"];
    EXPECT_EQ(side["method"], "threshold");
    EXPECT_TRUE(side.contains("t"));
    EXPECT_FALSE(side["error_vs_truth"].is_null());

    r = run_cli({"clime", "--input", in, "--lambda", "0.2", "--out", path("cl.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json j = read_json_file(path("cl.json"));
    EXPECT_EQ(j["method"], "clime");
    EXPECT_EQ(j["matrix"].size(), 36u);

    // A lambda that is too small for the proxy still solves; none is infeasible for SPD input.
    EXPECT_EQ(run_cli({"clime", "--input", in, "--lambda", "-1", "--out", path("x.json")}).code, 1);
}

TEST_F(CliTest, DiagnoseOnFile) {
    const auto in = write_dataset("data.csv", sample(DistributionSpec::gaussian(), 100, 20, 1));
    const auto r = run_cli({"diagnose", "--input", in, "--eps", "0.1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json j = Json::parse(r.out);
    EXPECT_LE(j["quadratic_forms"]["max_sherman_morrison_error"].get<double>(), 1e-10);
    EXPECT_GT(j["stieltjes"]["value"].get<double>(), 0.0);
}
