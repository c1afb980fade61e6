#include "carnot/report.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace carnot;

namespace {

const std::string kCli = CARNOT_CLI_PATH;
const std::string kFixtures = CARNOT_FIXTURE_DIR;

std::filesystem::path scratch()
{
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() / ("carnot_cli_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const std::filesystem::path& p)
{
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Exit status of the CLI; stdout is discarded and stderr kept in `err`.
int run(const std::string& args, std::string* err = nullptr)
{
  const auto err_path = scratch() / "stderr.txt";
  const std::string cmd = "'" + kCli + "' " + args + " > /dev/null 2> '" + err_path.string() + "'";
  const int status = std::system(cmd.c_str());
  if (err) *err = slurp(err_path);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string cfg(const std::string& name) { return "--config '" + kFixtures + "/" + name + "'"; }
std::string out(const std::string& base) { return "--out '" + (scratch() / base).string() + "'"; }

}  // namespace

TEST_CASE("coarea verify on the x1 fixture balances and exits 0")
{
  REQUIRE(run("coarea verify " + cfg("heisenberg1.cfg") + " --map x1 --convention balanced --seed 5 " + out("cv_a")) == 0);
  const Json doc = Json::parse(slurp(scratch() / "cv_a.json"));
  CHECK(doc["report"]["passed"] == true);
  CHECK(std::abs(doc["report"]["ratio"].get<double>() - 1.0) <= 0.01);
  CHECK(doc["convention"] == "balanced");
  CHECK(doc["seed"] == 5);
  CHECK(doc.contains("g_convention"));
  CHECK(doc.contains("omega_normalization"));
  CHECK(doc.contains("tool_version"));
  const std::string csv = strip_comment_lines(slurp(scratch() / "cv_a.csv"));
  CHECK(csv.rfind("t,level_measure_sr,level_measure_riem,excised_mass\n", 0) == 0);
}

TEST_CASE("repeated runs give byte-identical csv bodies")
{
  for (const char* tag : {"d1", "d2"}) {
    REQUIRE(run("coarea verify " + cfg("heisenberg1.cfg") + " --map x2 --seed 11 " + out(std::string("cv_") + tag)) == 0);
    REQUIRE(run("classify " + cfg("heisenberg1.cfg") + " --map x3 --resolution 15 " + out(std::string("cl_") + tag)) == 0);
    REQUIRE(run("measure fit " + cfg("heisenberg1.cfg") + " --map x1 --point 0.3,0.1,0 " + out(std::string("mf_") + tag)) == 0);
  }
  for (const char* stem : {"cv_", "cl_", "mf_"}) {
    CAPTURE(stem);
    const std::string a = slurp(scratch() / (std::string(stem) + "d1.csv"));
    const std::string b = slurp(scratch() / (std::string(stem) + "d2.csv"));
    CHECK(a.rfind("# ", 0) == 0);
    CHECK(strip_comment_lines(a) == strip_comment_lines(b));
    CHECK(strip_comment_lines(a).size() > 20);
  }
}

TEST_CASE("classify on the zero map reports an all-degenerate census")
{
  REQUIRE(run("classify " + cfg("heisenberg1.cfg") + " --map zero --resolution 7 " + out("zero")) == 0);
  const Json doc = Json::parse(slurp(scratch() / "zero.json"));
  CHECK(doc["census"]["total"].get<int>() > 0);
  CHECK(doc["census"]["degenerate"] == doc["census"]["total"]);
  const std::string csv = strip_comment_lines(slurp(scratch() / "zero.csv"));
  CHECK(csv.rfind("u1,u2,u3,kind,nu0\n", 0) == 0);
}

TEST_CASE("usage and configuration errors exit 2 with a structured diagnostic")
{
  std::string err;
  CHECK(run("measure fit " + cfg("heisenberg1.cfg") + " --point 2,0,0 --radii 0.4,0.2,0.1,0.08 " + out("span"), &err) == 2);
  CHECK(Json::parse(err)["error"]["kind"] == "usage");

  const auto bad = scratch() / "h9.cfg";
  std::ofstream(bad) << R"({"maps": [{"name": "m", "source": "H9", "target": "R1", "components": ["u1"]}]})";
  CHECK(run("classify --config '" + bad.string() + "' " + out("h9"), &err) == 2);
  const Json diag = Json::parse(err);
  CHECK(diag["error"]["kind"] == "config");
  CHECK(diag["error"]["message"].get<std::string>().find("H9") != std::string::npos);
  CHECK(diag["error"]["location"] == "/maps/0/source");

  CHECK(run("coarea verify " + cfg("heisenberg1.cfg") + " --convention other", &err) == 2);
  CHECK(run("classify", &err) == 2);
  CHECK(run("no-such-command", &err) == 2);
}

TEST_CASE("algebra check and group tools")
{
  CHECK(run("algebra check " + cfg("engel.cfg") + " " + out("ac")) == 0);
  const auto bad = scratch() / "bad_alg.cfg";
  std::ofstream(bad) << R"({"algebras": [{"name": "A", "layer_dims": [2, 1], "brackets": []}]})";
  CHECK(run("algebra check --config '" + bad.string() + "' " + out("ac_bad")) == 1);
  CHECK(Json::parse(slurp(scratch() / "ac_bad.json"))["algebras"][0]["report"]["valid"] == false);

  CHECK(run("group selftest --algebra '" + kFixtures + "/engel.cfg' --samples 200 " + out("gs")) == 0);
  CHECK(Json::parse(slurp(scratch() / "gs.json"))["selftest"]["passed"] == true);
  CHECK(run("probe triangle --algebra '" + kFixtures + "/heisenberg1.cfg' --r0 0.5 --samples 2000 --seed 3 " + out("pt")) == 0);
  const Json probe = Json::parse(slurp(scratch() / "pt.json"))["probe"];
  CHECK(probe["samples"] == 2000);
  CHECK(probe["seed"] == 3);
  CHECK(probe["C_estimate"].get<double>() >= 1.0);
}
