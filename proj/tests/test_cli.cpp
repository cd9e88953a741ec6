#include <sys/wait.h>

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr merged into stdout.
Run cli(const std::string& args) {
  const std::string cmd = std::string(MAXDISSIM_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int line_count(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

fs::path scratch() {
  fs::path dir = fs::temp_directory_path() / ("maxdissim_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("help and unknown commands") {
  CHECK(cli("--help").code == 0);
  CHECK(cli("nonsense").code == 2);
  CHECK(cli("bmd --truth scenario1").code == 2);
}

TEST_CASE("simulate is reproducible") {
  const fs::path dir = scratch();
  const std::string a = (dir / "a").string(), b = (dir / "b").string();
  REQUIRE(cli("simulate gp --n 10 --grid 10 --seed 4 --out " + a).code == 0);
  REQUIRE(cli("simulate gp --n 10 --grid 10 --seed 4 --out " + b).code == 0);
  const std::string xa = slurp(a + "_x.csv");
  CHECK(line_count(xa) == 101);
  CHECK(xa == slurp(b + "_x.csv"));
  CHECK(slurp(a + "_y.csv") == slurp(b + "_y.csv"));
  REQUIRE(cli("simulate gp --n 10 --grid 10 --seed 5 --out " + b).code == 0);
  CHECK(xa != slurp(b + "_x.csv"));

  REQUIRE(cli("simulate pp --gamma 25 --delta 2 --seed 1 --out " + a).code == 0);
  const std::string px = slurp(a + "_x.csv"), py = slurp(a + "_y.csv");
  CHECK(px.rfind("t1,t2\n", 0) == 0);
  CHECK(line_count(py) > line_count(px));
  fs::remove_all(dir);
}

TEST_CASE("fit with DIC selection and posterior bmd") {
  const fs::path dir = scratch();
  const std::string pre = (dir / "s").string();
  REQUIRE(cli("simulate gp --n 50 --grid 20 --seed 2 --out " + pre).code == 0);
  auto r = cli("fit --data " + pre + "_x.csv --lower 0 --upper 1 --basis-sizes 5,10,15 --dic-draws 100 --out " +
               pre + "_px.json");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("size=5 dic=") != std::string::npos);
  CHECK(r.out.find("size=10 dic=") != std::string::npos);
  CHECK(r.out.find("size=15 dic=") != std::string::npos);
  CHECK(r.out.find("selected size=") != std::string::npos);
  REQUIRE(cli("fit --data " + pre + "_y.csv --lower 0 --upper 1 --basis-sizes 12 --out " + pre + "_py.json").code == 0);

  auto b = cli("bmd --post-x " + pre + "_px.json --post-y " + pre + "_py.json --p 1 --c 0.1 --m 50 --seed 3 --draws-csv " +
               pre + "_d.csv");
  REQUIRE(b.code == 0);
  auto j = nlohmann::json::parse(b.out);
  CHECK(j.contains("mean_center"));
  CHECK(line_count(slurp(pre + "_d.csv")) == 51);
  fs::remove_all(dir);
}

TEST_CASE("corrupt input reports the line") {
  const fs::path dir = scratch();
  std::ofstream(dir / "bad.csv") << "replicate,t1,value\n1,0.1,2\n1,0.2,x\n";
  auto r = cli("fit --data " + (dir / "bad.csv").string());
  CHECK(r.code == 2);
  CHECK(r.out.find("bad.csv:3") != std::string::npos);
  CHECK(cli("fit --data " + (dir / "missing.csv").string()).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("analytic bmd, bmmd and hl") {
  auto r = cli("bmd --truth scenario1 --p 1 --c 0.1");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j["center"][0].get<double>() - 0.215) <= 0.01);
  CHECK(j["radius"].get<double>() == doctest::Approx(0.05));

  auto m = cli("bmmd --truths scenario1,bump1 --w 1,0 --p 1 --c 0.1");
  REQUIRE(m.code == 0);
  auto jm = nlohmann::json::parse(m.out);
  CHECK(jm["center"][0].get<double>() == doctest::Approx(j["center"][0].get<double>()).epsilon(1e-9));
  CHECK(cli("bmmd --truths scenario1,bump1 --w 1,-1 --c 0.1").code == 2);

  auto h = cli("hl --truth scenario1 --c 0.1");
  REQUIRE(h.code == 0);
  CHECK(nlohmann::json::parse(h.out)["index"].get<double>() > 0);

  auto c = cli("curve --truth scenario1 --p 1 --c-grid 0.1,0.2,0.3");
  REQUIRE(c.code == 0);
  CHECK(c.out.find("0.3") != std::string::npos);

  CHECK(cli("bmd --truth scenario1 --c -0.1").code == 2);
  CHECK(cli("bmd --truth nope --c 0.1").code == 2);
}

TEST_CASE("youden") {
  const fs::path dir = scratch();
  std::ofstream(dir / "v.csv") << "1\n2\n3\n4\n";
  const std::string v = (dir / "v.csv").string();
  auto r = cli("youden --x " + v + " --y " + v);
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["j"].get<double>() == 0.0);
  auto n = cli("youden --x-normal 0,1 --y-normal 1,1");
  REQUIRE(n.code == 0);
  auto j = nlohmann::json::parse(n.out);
  CHECK(j["t"].get<double>() == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(j["j"].get<double>() == doctest::Approx(0.382925).epsilon(1e-4));
  fs::remove_all(dir);
}

TEST_CASE("config files") {
  const fs::path dir = scratch();
  std::ofstream(dir / "ok.json") << R"({"truth": "scenario1", "p": 1, "c": 0.1})";
  auto r = cli("bmd --config " + (dir / "ok.json").string());
  REQUIRE(r.code == 0);
  CHECK(std::abs(nlohmann::json::parse(r.out)["center"][0].get<double>() - 0.215) <= 0.01);
  // Command-line flags override the file.
  auto o = cli("bmd --config " + (dir / "ok.json").string() + " --c 0.2");
  REQUIRE(o.code == 0);
  CHECK(nlohmann::json::parse(o.out)["radius"].get<double>() == doctest::Approx(0.1));
  std::ofstream(dir / "bad.json") << R"({"truth": "scenario1", "c": 0.1, "bogus": 3})";
  CHECK(cli("bmd --config " + (dir / "bad.json").string()).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("mc-study smoke run") {
  const fs::path dir = scratch();
  const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  const std::string args = "mc-study --scenario 1 --n 10 --grid 10 --M 2 --m 5 --dic-draws 40 --c-grid 0.1,0.2 --seed 9";
  auto r = cli(args + " --out " + a);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("median") != std::string::npos);
  const std::string csv = slurp(a);
  CHECK(line_count(csv) == 3);
  CHECK(csv.rfind("scenario,n,J,gamma,delta,replicate,ghe\n1,10,10,,,1,", 0) == 0);
  REQUIRE(cli(args + " --threads 1 --out " + b).code == 0);
  CHECK(csv == slurp(b));
  fs::remove_all(dir);
}
