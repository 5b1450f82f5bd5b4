#include "ame/commands.hpp"
#include "ame/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace ame;

namespace {

const fs::path scratch_root = fs::temp_directory_path() / ("ame_test_io_" + std::to_string(::getpid()));

struct Cleanup {
  ~Cleanup() { fs::remove_all(scratch_root); }
} cleanup;

fs::path scratch(const std::string& name) {
  const fs::path dir = scratch_root / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const char* cli = std::getenv("AME_CLI");
  REQUIRE(cli != nullptr);
  const int status = std::system((std::string(cli) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("sociomatrix CSV parsing") {
  const fs::path dir = scratch("csv");
  SUBCASE("NA diagonal") {
    const Sociomatrix S = load_sociomatrix(
        write_file(dir / "a.csv", "label,x,y,z\nx,NA,1,0\ny,1,NA,1\nz,0,0,NA\n"), DataKind::binary);
    CHECK(S.n() == 3);
    CHECK(S.mask().count() == 6);
    CHECK(S.labels() == std::vector<std::string>{"x", "y", "z"});
  }
  SUBCASE("one missing relation") {
    const Sociomatrix S = load_sociomatrix(
        write_file(dir / "b.csv", "label,x,y,z\nx,NA,1.5,NA\ny,2,NA,-1\nz,0,3,NA\n"),
        DataKind::continuous);
    CHECK(S.mask().count() == 5);
    CHECK_FALSE(S.observed(0, 2));
    CHECK(S.values()(2, 1) == 3.0);
  }
  SUBCASE("diagonal values are ignored") {
    const Sociomatrix S = load_sociomatrix(
        write_file(dir / "c.csv", "# comment\nlabel,x,y,z\nx,7,1,1\ny,2,7,1\nz,1,1,7\n"), DataKind::continuous);
    CHECK(S.mask().count() == 6);
  }
  SUBCASE("malformed input") {
    CHECK_THROWS_AS(load_sociomatrix(write_file(dir / "d.csv", "label,x,y\ny,NA,1\nx,1,NA\n"),
                                     DataKind::binary),
                    DataError);
    CHECK_THROWS_AS(load_sociomatrix(write_file(dir / "e.csv", "label,x,x\nx,NA,1\nx,1,NA\n"),
                                     DataKind::binary),
                    DataError);
    CHECK_THROWS_AS(load_sociomatrix(write_file(dir / "f.csv", "label,x,y\nx,NA,1\n"),
                                     DataKind::binary),
                    DataError);
    CHECK_THROWS_AS(load_sociomatrix(write_file(dir / "g.csv", "label,x,y\nx,NA,abc\ny,1,NA\n"),
                                     DataKind::continuous),
                    DataError);
    CHECK_THROWS_AS(load_sociomatrix(write_file(dir / "h.csv", "label,x,y\nx,NA,2\ny,1,NA\n"),
                                     DataKind::binary),
                    DataError);
  }
}

TEST_CASE("covariate files") {
  const fs::path dir = scratch("cov");
  const std::vector<std::string> labels{"x", "y", "z"};
  std::vector<std::string> names;
  const Matrix nodal =
      load_nodal_covariates(write_file(dir / "n.csv", "label,age\nz,3\nx,1\ny,2\n"), labels, names);
  CHECK(names == std::vector<std::string>{"age"});
  CHECK(nodal(0, 0) == 1.0);
  CHECK(nodal(2, 0) == 3.0);
  CHECK_THROWS_AS(load_nodal_covariates(write_file(dir / "n2.csv", "label,age\nx,1\ny,2\n"), labels, names),
                  DataError);

  const std::string full = "from,to,w\nx,y,1\nx,z,2\ny,x,3\ny,z,4\nz,x,5\nz,y,6\n";
  const auto slices = load_dyadic_covariates(write_file(dir / "d.csv", full), labels, names);
  REQUIRE(slices.size() == 1);
  CHECK(slices[0](1, 2) == 4.0);
  CHECK(slices[0](1, 1) == 0.0);
  CHECK_THROWS_AS(load_dyadic_covariates(write_file(dir / "d2.csv", "from,to,w\nx,y,1\n"), labels, names),
                  DataError);
  CHECK_THROWS_AS(load_dyadic_covariates(write_file(dir / "d3.csv", full + "x,y,9\n"), labels, names),
                  DataError);
  CHECK_THROWS_AS(load_dyadic_covariates(write_file(dir / "d4.csv", full + "q,y,9\n"), labels, names),
                  DataError);

  write_dyadic_covariates(dir / "round.csv", slices, names, labels, "# test");
  const auto again = load_dyadic_covariates(dir / "round.csv", labels, names);
  CHECK(again[0] == slices[0]);
}

TEST_CASE("run config round trip and hashing") {
  RunConfig c;
  c.data = "net.csv";
  c.rank = 2;
  c.kappa0 = 7.0;
  c.seed = 12;
  const RunConfig back = RunConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(*back.kappa0 == 7.0);
  RunConfig moved = c;
  moved.output_dir = "elsewhere";
  CHECK(config_hash(moved.to_json(false)) == config_hash(c.to_json(false)));
  moved.rank = 1;
  CHECK(config_hash(moved.to_json(false)) != config_hash(c.to_json(false)));
  CHECK(config_hash(c.to_json(false)).size() == 16);
  nlohmann::json partial = {{"iterations", 50}};
  CHECK(RunConfig::from_json(partial, c).iterations == 50);
  CHECK(RunConfig::from_json(partial, c).rank == 2);
  RunConfig bad = c;
  bad.family = "poisson";
  CHECK_THROWS_AS(bad.validate(), DataError);
}

TEST_CASE("draw column schema") {
  CHECK(draw_columns({"intercept"}, 1) ==
        std::vector<std::string>{"chain", "iteration", "beta_intercept", "Sigma_aa", "Sigma_ab",
                                 "Sigma_bb", "sigma2", "rho", "tr_psi_uv", "Psi_0_0", "Psi_0_1",
                                 "Psi_1_1"});
}

TEST_CASE("output directory lock") {
  const fs::path dir = scratch("lock");
  {
    DirectoryLock lock(dir);
    CHECK(fs::exists(dir / ".ame.lock"));
    CHECK_THROWS(DirectoryLock(dir));
  }
  CHECK_FALSE(fs::exists(dir / ".ame.lock"));
}

TEST_CASE("command line: simulate, fit, gof, summary, describe") {
  const fs::path dir = scratch("cli");
  const std::string sim = (dir / "sim").string();
  REQUIRE(run_cli("simulate --n 12 --rank 1 --dyad-beta 0.5 --intercept 1 --seed 3 --out " + sim) == 0);
  CHECK(fs::exists(fs::path(sim) / "manifest.json"));
  const nlohmann::json truth = read_json(fs::path(sim) / "manifest.json");
  CHECK(truth.at("truth").at("beta").size() == 2);

  const std::string common = " --data " + sim + "/sociomatrix.csv --dyad-covariates " + sim +
                             "/dyad_covariates.csv --rank 1 --iterations 60 --burn-in 10 --thin 5 --seed 8";
  const std::string fit1 = (dir / "fit1").string(), fit2 = (dir / "fit2").string();
  REQUIRE(run_cli("fit" + common + " --out " + fit1) == 0);
  REQUIRE(run_cli("fit" + common + " --out " + fit2) == 0);
  for (const char* f : {"draws.csv", "effects_draws.csv", "summary.csv", "variance_summary.csv",
                        "factors.csv", "manifest.json"})
    CHECK(fs::exists(fs::path(fit1) / f));
  CHECK(slurp(fs::path(fit1) / "draws.csv") == slurp(fs::path(fit2) / "draws.csv"));
  CHECK(slurp(fs::path(fit1) / "effects_draws.csv") == slurp(fs::path(fit2) / "effects_draws.csv"));
  const std::string head = slurp(fs::path(fit1) / "draws.csv").substr(0, 40);
  CHECK(head.rfind("# ame config_hash=", 0) == 0);

  // the manifest alone reproduces the run
  const fs::path replay = dir / "replay.json";
  nlohmann::json cfg = read_json(fs::path(fit1) / "manifest.json").at("config");
  cfg["output_dir"] = (dir / "fit3").string();
  write_json(replay, cfg);
  REQUIRE(run_cli("fit --seed 8 --config " + replay.string()) == 0);
  CHECK(slurp(fs::path(fit1) / "draws.csv") == slurp(dir / "fit3" / "draws.csv"));

  CHECK(run_cli("gof " + fit1) == 0);
  CHECK(fs::exists(fs::path(fit1) / "gof.json"));
  CHECK(run_cli("summary " + fit1) == 0);
  CHECK(run_cli("describe --data " + sim + "/sociomatrix.csv --out " + (dir / "desc").string()) == 0);
  CHECK(fs::exists(dir / "desc" / "srm_moments.csv"));

  // exit codes
  CHECK(run_cli("fit --data " + (dir / "missing.csv").string() + " --seed 1 --out " +
                (dir / "x").string()) == 2);
  CHECK(run_cli("fit" + common.substr(0, common.find(" --seed")) + " --out " + (dir / "y").string()) != 0);
  write_file(dir / "bad.csv", "label,x,y\nx,NA,1\ny,0,NA\n");
  CHECK(run_cli("fit --data " + (dir / "bad.csv").string() +
                " --family binary --rank 3 --iterations 20 --burn-in 5 --thin 1 --seed 1 --out " +
                (dir / "z").string()) == 2);
}
