#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "otmap/csv.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string output;  // stdout and stderr
};

Run run(const std::string& args) {
  const std::string cmd = std::string(OTMAP_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) out += buf.data();
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("otmap_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator()(const std::string& file) const { return (dir / file).string(); }
};

}  // namespace

TEST_CASE("sample, fit, push and invert round trip") {
  Scratch s("roundtrip");
  REQUIRE(run("sample --kind mixture --dim 2 -n 400 --mean 1.1,0.55 --mean2 -1.1,-0.55 --weight 0.4 --seed 3 --out " +
              s("x.csv"))
              .code == 0);
  const Run fit = run("fit --source " + s("x.csv") + " --out " + s("m.json") + " --stages 3 --diagnostics " +
                      s("d.csv") + " --progress " + s("p.csv") + " --workers 1");
  CHECK(fit.code == 0);
  const auto doc = nlohmann::json::parse(slurp(s("m.json")));
  CHECK(doc["version"] == 1);
  CHECK(doc["stages"].size() >= 2);

  const std::string diag = slurp(s("d.csv"));
  CHECK(diag.rfind("# {", 0) == 0);
  CHECK(diag.find("\niter,objective,primal_res,dual_res\n1,") != std::string::npos);
  const std::string prog = slurp(s("p.csv"));
  CHECK(prog.rfind("stage,theta,objective_train,objective_holdout,admm_iters\n1,1,", 0) == 0);

  REQUIRE(run("push --map " + s("m.json") + " --input " + s("x.csv") + " --out " + s("y.csv")).code == 0);
  REQUIRE(run("invert --map " + s("m.json") + " --input " + s("y.csv") + " --out " + s("back.csv")).code == 0);
  const Eigen::MatrixXd x = otmap::read_csv_matrix(s("x.csv")).data;
  const Eigen::MatrixXd y = otmap::read_csv_matrix(s("y.csv")).data;
  const Eigen::MatrixXd back = otmap::read_csv_matrix(s("back.csv")).data;
  REQUIRE(x.rows() == 400);
  CHECK((back - x).cwiseAbs().maxCoeff() < 1e-6);
  // pushed samples are closer to standard normal than the source
  CHECK(y.colwise().mean().norm() < x.colwise().mean().norm() + 0.05);
}

TEST_CASE("fits are deterministic and strict reduction ignores the worker count") {
  Scratch s("determinism");
  REQUIRE(run("sample --kind laplace --dim 3 -n 300 --seed 9 --out " + s("x.csv")).code == 0);
  const std::string common = "fit --source " + s("x.csv") + " --structure kr --order 2 --stages 2 --reduction strict";
  REQUIRE(run(common + " --workers 1 --out " + s("a.json")).code == 0);
  REQUIRE(run(common + " --workers 1 --out " + s("b.json")).code == 0);
  REQUIRE(run(common + " --workers 3 --out " + s("c.json")).code == 0);
  CHECK(slurp(s("a.json")) == slurp(s("b.json")));
  CHECK(slurp(s("a.json")) == slurp(s("c.json")));
}

TEST_CASE("dense fit to a gaussian target") {
  Scratch s("dense");
  REQUIRE(run("sample --kind gaussian --dim 1 -n 1000 --cov-diag 4 --seed 1 --out " + s("x.csv")).code == 0);
  CHECK(run("fit --source " + s("x.csv") + " --structure dense --order 1 --out " + s("m.json")).code == 0);
  const auto doc = nlohmann::json::parse(slurp(s("m.json")));
  CHECK(doc["structure"] == "dense");
  CHECK(doc["W"][0][1].get<double>() == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("config file supplies defaults that flags override") {
  Scratch s("config");
  REQUIRE(run("sample --kind gaussian --dim 2 -n 200 --out " + s("x.csv")).code == 0);
  std::ofstream(s("cfg.json")) << R"({"structure": "kr", "order": 3, "stages": 1, "no-early-stop": true})";
  REQUIRE(run("fit --config " + s("cfg.json") + " --order 1 --source " + s("x.csv") + " --out " + s("m.json")).code ==
          0);
  const auto doc = nlohmann::json::parse(slurp(s("m.json")));
  const auto& map = doc["stages"].empty() ? doc : doc["stages"][0];
  CHECK(map["structure"] == "kr");
  CHECK(map["O"] == 1);

  std::ofstream(s("bad.json")) << "[1, 2]";
  CHECK(run("fit --config " + s("bad.json") + " --source " + s("x.csv")).code == 1);
}

TEST_CASE("non-convergence exits with code 2 and still writes the map") {
  Scratch s("noconv");
  REQUIRE(run("sample --kind laplace --dim 2 -n 200 --out " + s("x.csv")).code == 0);
  const Run r = run("fit --source " + s("x.csv") + " --structure dense --order 3 --max-iters 3 --out " + s("m.json"));
  CHECK(r.code == 2);
  CHECK(fs::exists(s("m.json")));
}

TEST_CASE("error exits") {
  Scratch s("errors");
  Run r = run("push --map " + s("missing.json") + " --input " + s("x.csv") + " --out " + s("y.csv"));
  CHECK(r.code == 1);
  CHECK(r.output.find("missing.json") != std::string::npos);

  r = run("fit --source " + s("x.csv") + " --structure dense --order 30 --dim 50");
  CHECK(r.code == 1);
  CHECK(r.output.find("cap") != std::string::npos);

  REQUIRE(run("sample --kind gaussian --dim 2 -n 50 --out " + s("x2.csv")).code == 0);
  REQUIRE(run("sample --kind gaussian --dim 3 -n 5 --out " + s("x3.csv")).code == 0);
  REQUIRE(run("fit --source " + s("x2.csv") + " --order 1 --out " + s("m.json")).code == 0);
  r = run("push --map " + s("m.json") + " --input " + s("x3.csv") + " --out " + s("y.csv"));
  CHECK(r.code == 1);
  CHECK(r.output.find("2") != std::string::npos);
  CHECK(r.output.find("3") != std::string::npos);

  CHECK(run("fit").code != 0);
  CHECK(run("frobnicate").code != 0);
  CHECK(run("fit --source " + s("x2.csv") + " --structure sparse").code == 1);
}

TEST_CASE("index-set listing") {
  const Run r = run("index-set --structure krsv --dim 3 --order 3");
  CHECK(r.code == 0);
  CHECK(r.output.find("K 10") != std::string::npos);
  CHECK(r.output.find("row_sizes 4 7 10") != std::string::npos);
}

TEST_CASE("lasso subcommand writes summaries for both methods") {
  Scratch s("lasso");
  {
    std::ofstream out(s("data.csv"));
    out << "a,b,y\n";
    std::uint64_t state = 7;
    auto uni = [&] {
      state = state * 6364136223846793005ULL + 1442695040888963407ULL;
      return static_cast<double>(state >> 11) / 9007199254740992.0 - 0.5;
    };
    for (int i = 0; i < 60; ++i) {
      const double a = uni() * 3, b = uni() * 3;
      out << a << "," << b << "," << 1.2 * a + uni() << "\n";
    }
  }
  const Run r = run("lasso --data " + s("data.csv") + " --lambda 1 --order 2 --n-prior 300 --burn-in 200 --draws 1000 " +
                    "--out-dir " + s("out") + " --workers 1");
  CHECK(r.code == 0);
  for (const char* f : {"summary_transport.csv", "summary_gibbs.csv", "samples_transport.csv", "samples_gibbs.csv",
                        "kde_transport_a.csv", "kde_gibbs_b.csv", "map.json"}) {
    CAPTURE(f);
    CHECK(fs::exists(s("out/" + std::string(f))));
  }
  CHECK(slurp(s("out/summary_gibbs.csv")).rfind("name,median,q2.5,q97.5,mean,std\na,", 0) == 0);
  CHECK(otmap::read_csv_matrix(s("out/samples_transport.csv")).data.rows() == 300);
}
