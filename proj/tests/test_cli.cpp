#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ntot/cli.hpp"
#include "ntot/matrix_io.hpp"
#include "ntot/rip_analysis.hpp"
#include "test_support.hpp"

namespace ntot {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("ntot_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::vector<std::string>& args) {
    out_.str("");
    err_.str("");
    return run_cli(args, out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  // Value of "key = value" in a manifest, without the origin comment.
  static std::string manifest_value(const fs::path& p, const std::string& key) {
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind(key + " = ", 0) != 0) continue;
      std::string value = line.substr(key.size() + 3);
      if (const auto c = value.find("  #"); c != std::string::npos) value.erase(c);
      return value;
    }
    return {};
  }

  void write_identity_problem() {
    save_matrix(dir_ / "A.txt", DenseMatrix::identity(2));
    save_vector(dir_ / "y.txt", testing::vec({1, 0}));
    save_vector(dir_ / "x_true.txt", testing::vec({1, 0}));
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, GenIsReproducible) {
  const std::vector<std::string> args{"gen", "--m", "8", "--n", "16", "--k", "3", "--seed", "5",
                                      "--out-dir", path("p")};
  ASSERT_EQ(run(args), kExitOk) << err_.str();
  const std::string a1 = slurp(dir_ / "p" / "A.txt"), y1 = slurp(dir_ / "p" / "y.txt");
  const std::string m1 = slurp(dir_ / "p" / "manifest.txt");
  ASSERT_EQ(run(args), kExitOk);
  EXPECT_EQ(a1, slurp(dir_ / "p" / "A.txt"));
  EXPECT_EQ(y1, slurp(dir_ / "p" / "y.txt"));
  EXPECT_EQ(m1, slurp(dir_ / "p" / "manifest.txt"));
  EXPECT_EQ(manifest_value(dir_ / "p" / "manifest.txt", "seed"), "5");
  EXPECT_NE(m1.find("k = 3  # flag"), std::string::npos);
  EXPECT_NE(m1.find("noise = 0  # default"), std::string::npos);
  EXPECT_EQ(load_matrix(dir_ / "p" / "A.txt").rows(), 8);
}

TEST_F(CliTest, GenWithoutSeedRecordsSynthesizedSeed) {
  ASSERT_EQ(run({"gen", "--m", "4", "--n", "6", "--k", "1", "--out-dir", path("p")}), kExitOk);
  const std::string manifest = slurp(dir_ / "p" / "manifest.txt");
  EXPECT_NE(manifest.find("# default (synthesized)"), std::string::npos);
}

TEST_F(CliTest, GenZeroSparsity) {
  ASSERT_EQ(run({"gen", "--m", "4", "--n", "6", "--k", "0", "--seed", "1", "--out-dir", path("p")}),
            kExitOk);
  EXPECT_EQ(load_vector(dir_ / "p" / "x_true.txt"), Vector::Zero(6));
  EXPECT_EQ(load_vector(dir_ / "p" / "y.txt"), Vector::Zero(4));
}

TEST_F(CliTest, SolveIdentityInOneIteration) {
  write_identity_problem();
  ASSERT_EQ(run({"solve", "--in-dir", dir_.string(), "--algo", "ntrotp", "--eps", "2", "--lambda",
                 "3", "--out-dir", path("out")}),
            kExitOk)
      << err_.str();
  EXPECT_EQ(load_vector(dir_ / "out" / "x_hat.txt"), testing::vec({1, 0}));
  EXPECT_NE(out_.str().find("iterations = 1\n"), std::string::npos);
  const std::string trace = slurp(dir_ / "out" / "trace.csv");
  EXPECT_EQ(trace.rfind("algorithm,iteration,residual_l2,relative_error,qp_iters,qp_converged\n", 0),
            0u);
  EXPECT_NE(trace.find("\nntrotp,1,0,0,"), std::string::npos);
  EXPECT_EQ(manifest_value(dir_ / "out" / "manifest.txt", "k"), "1");
  EXPECT_EQ(manifest_value(dir_ / "out" / "manifest.txt", "status"), "converged");
}

TEST_F(CliTest, SolveRecordsDefaultEpsilon) {
  ASSERT_EQ(run({"gen", "--m", "10", "--n", "20", "--k", "2", "--seed", "3", "--out-dir", path("p")}),
            kExitOk);
  ASSERT_EQ(run({"solve", "--in-dir", path("p"), "--algo", "nshtp", "--out-dir", path("out")}),
            kExitOk)
      << err_.str();
  const double expected = default_parameters(load_matrix(dir_ / "p" / "A.txt"), 5.0);
  EXPECT_EQ(manifest_value(dir_ / "out" / "manifest.txt", "eps"), format_double(expected));
  EXPECT_EQ(manifest_value(dir_ / "out" / "manifest.txt", "lambda"), "5");
}

TEST_F(CliTest, SolveFailures) {
  write_identity_problem();
  EXPECT_EQ(run({"solve", "--in-dir", path("missing")}), kExitFailure);
  EXPECT_EQ(run({"solve", "--in-dir", dir_.string(), "--algo", "cosamp"}), kExitUsage);
  EXPECT_EQ(run({"solve", "--in-dir", dir_.string(), "--stop-tol", "abc"}), kExitUsage);
  EXPECT_EQ(run({}), kExitUsage);
  EXPECT_EQ(run({"frobnicate"}), kExitUsage);
  ASSERT_EQ(run({"gen", "--m", "20", "--n", "60", "--k", "10", "--seed", "1", "--out-dir",
                 path("big")}),
            kExitOk);
  EXPECT_EQ(run({"solve", "--in-dir", path("big"), "--algo", "ntot", "--out-dir", path("o")}),
            kExitUsage);
  EXPECT_NE(err_.str().find("error:"), std::string::npos);
}

TEST_F(CliTest, RequireCertificate) {
  write_identity_problem();
  EXPECT_EQ(run({"solve", "--in-dir", dir_.string(), "--algo", "ntrotp", "--eps", "2", "--lambda",
                 "3", "--require-certificate", "--out-dir", path("ok")}),
            kExitOk)
      << err_.str();
  EXPECT_NE(out_.str().find("valid=true"), std::string::npos);
  EXPECT_EQ(run({"solve", "--in-dir", dir_.string(), "--algo", "ntrot", "--eps", "2", "--lambda",
                 "9", "--require-certificate", "--out-dir", path("bad")}),
            kExitCertificate);
  EXPECT_FALSE(fs::exists(dir_ / "bad" / "x_hat.txt"));
  EXPECT_EQ(manifest_value(dir_ / "bad" / "manifest.txt", "certificate"), "invalid");
}

TEST_F(CliTest, ParameterPrecedence) {
  write_identity_problem();
  {
    std::ofstream cfg(dir_ / "run.cfg");
    cfg << "# solver settings\nlambda = 2\nmax-iter = 7\n";
  }
  ASSERT_EQ(run({"solve", "--in-dir", dir_.string(), "--config", path("run.cfg"), "--lambda", "3",
                 "--eps", "2", "--out-dir", path("out")}),
            kExitOk)
      << err_.str();
  const std::string manifest = slurp(dir_ / "out" / "manifest.txt");
  EXPECT_NE(manifest.find("lambda = 3  # flag"), std::string::npos);
  EXPECT_NE(manifest.find("max-iter = 7  # config"), std::string::npos);
  EXPECT_NE(manifest.find("stop = residual  # default"), std::string::npos);

  {
    std::ofstream cfg(dir_ / "bad.cfg");
    cfg << "lamda = 2\n";
  }
  EXPECT_EQ(run({"solve", "--in-dir", dir_.string(), "--config", path("bad.cfg")}), kExitUsage);
  EXPECT_NE(err_.str().find("lamda"), std::string::npos);
}

TEST_F(CliTest, Ric) {
  save_matrix(dir_ / "I.txt", DenseMatrix::identity(3));
  ASSERT_EQ(run({"ric", "--matrix", path("I.txt"), "--q", "1,2", "--k", "1", "--eps", "2",
                 "--lambda", "3"}),
            kExitOk)
      << err_.str();
  EXPECT_NE(out_.str().find("delta_1=0\nwitness_1=0\n"), std::string::npos);
  EXPECT_NE(out_.str().find("delta_2=0\nwitness_2=0,1\n"), std::string::npos);
  EXPECT_NE(out_.str().find("theorem=3"), std::string::npos);
  EXPECT_NE(out_.str().find("lambda_interval=(0, 3]"), std::string::npos);

  save_matrix(dir_ / "Z.txt", DenseMatrix::zeros(2, 40));
  EXPECT_EQ(run({"ric", "--matrix", path("Z.txt"), "--q", "10"}), kExitUsage);
  EXPECT_EQ(run({"ric", "--matrix", path("I.txt")}), kExitUsage);
}

TEST_F(CliTest, OracleCheck) {
  EXPECT_EQ(run({"oracle-check", "--suite", "projection"}), kExitOk);
  EXPECT_NE(out_.str().find("PASS projection"), std::string::npos);
  EXPECT_EQ(out_.str().find("thresholding"), std::string::npos);
  EXPECT_EQ(run({"oracle-check", "--suite", "thresholding", "--inject-fault", "tie-rule"}),
            kExitFailure);
  EXPECT_NE(out_.str().find("FAIL thresholding"), std::string::npos);
  EXPECT_EQ(run({"oracle-check", "--inject-fault", "gamma-ray"}), kExitUsage);
}

TEST_F(CliTest, SweepIsIndependentOfWorkers) {
  std::vector<std::string> args{"sweep", "--study", "iterations", "--n", "32", "--m", "16",
                                "--grid", "0.05,0.15", "--trials", "3", "--seed", "9",
                                "--algos", "nshtp,ntrotp", "--max-iter", "10"};
  auto with = [&](const std::string& workers, const std::string& out) {
    std::vector<std::string> a = args;
    a.insert(a.end(), {"--workers", workers, "--out-dir", path(out)});
    return a;
  };
  ASSERT_EQ(run(with("1", "w1")), kExitOk) << err_.str();
  ASSERT_EQ(run(with("3", "w3")), kExitOk) << err_.str();
  const std::string one = slurp(dir_ / "w1" / "iterations.csv");
  EXPECT_EQ(one, slurp(dir_ / "w3" / "iterations.csv"));
  EXPECT_EQ(one.rfind("# version = ", 0), 0u);
  EXPECT_NE(one.find("# seed = 9\n"), std::string::npos);
  EXPECT_NE(one.find("algorithm,axis,axis_value,avg_iterations\n"), std::string::npos);
}

TEST_F(CliTest, SweepSuccessAndResidual) {
  ASSERT_EQ(run({"sweep", "--study", "success", "--n", "32", "--m", "16", "--grid", "0.05",
                 "--trials", "2", "--seed", "2", "--algos", "omp,sp", "--out-dir", path("s")}),
            kExitOk)
      << err_.str();
  const std::string success = slurp(dir_ / "s" / "success.csv");
  EXPECT_NE(success.find("\nomp,k_over_n,0.050000000000000003,2,"), std::string::npos);
  ASSERT_EQ(run({"sweep", "--study", "residual", "--n", "32", "--m", "16", "--k", "2", "--seed",
                 "2", "--max-iter", "3", "--lambdas", "4,5", "--out-dir", path("r")}),
            kExitOk)
      << err_.str();
  const std::string residual = slurp(dir_ / "r" / "residual.csv");
  std::size_t lines = 0;
  for (char c : residual) lines += c == '\n';
  const std::size_t comments = static_cast<std::size_t>(
      std::count(residual.begin(), residual.end(), '#'));
  EXPECT_EQ(lines - comments, 1u + 2u * 2u * 4u);
  EXPECT_EQ(run({"sweep", "--study", "speed"}), kExitUsage);
}

}  // namespace
}  // namespace ntot
