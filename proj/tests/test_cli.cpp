#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rsmfg/csv.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string output;  // stdout and stderr
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(RSMFG_CLI_PATH) + " " + args + " 2>&1";
  Outcome out;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) out.output += buf;
  const int status = pclose(pipe);
  out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

struct Scratch {
  fs::path dir = fs::temp_directory_path() / ("rsmfg_cli_" + std::to_string(::getpid()));
  Scratch() { fs::create_directories(dir); }
  ~Scratch() { fs::remove_all(dir); }

  fs::path config(const std::string& name, const std::string& text) const {
    const auto p = dir / name;
    std::ofstream(p) << text;
    return p;
  }
};

}  // namespace

TEST_CASE("empty config exits 1 naming the missing field") {
  Scratch s;
  const auto r = run("riccati -c " + s.config("empty.cfg", "").string() + " -o " + (s.dir / "o").string());
  CHECK(r.code == 1);
  CHECK(r.output.find("scenario.name") != std::string::npos);
}

TEST_CASE("unknown key and unknown subcommand are distinct faults") {
  Scratch s;
  const auto cfg = s.config("bad.cfg", "scenario.name = affine-lq\nfoo.bar = 2\n");
  const auto a = run("riccati -c " + cfg.string());
  CHECK(a.code == 1);
  CHECK(a.output.find("foo.bar") != std::string::npos);
  const auto b = run("frobnicate");
  CHECK(b.code == 1);
  CHECK(b.output.find("unknown subcommand") != std::string::npos);
}

TEST_CASE("CFL violation exits 1 with a hint") {
  Scratch s;
  const auto cfg = s.config("cfl.cfg", "scenario.name = mckean-vlasov\ntime.nt = 11\n");
  const auto r = run("solve-mfg -c " + cfg.string() + " -o " + (s.dir / "o").string());
  CHECK(r.code == 1);
  CHECK(r.output.find("CFL") != std::string::npos);
}

TEST_CASE("fig4 writes t,z with z(T) = Q and a manifest") {
  Scratch s;
  const auto out = s.dir / "fig4";
  const auto r = run("reproduce fig4 -o " + out.string());
  REQUIRE(r.code == 0);
  const auto t = rsmfg::csv::read_file(out / "fig4.csv");
  CHECK(t.header == std::vector<std::string>{"t", "z"});
  CHECK(t.rows.back()[1] == 0.1);
  CHECK(t.rows.back()[0] == 5.0);
  const auto manifest = slurp(out / "manifest.txt");
  CHECK(manifest.find("config_hash=") != std::string::npos);
  CHECK(manifest.find("seed=1") != std::string::npos);
  CHECK(manifest.find("command=reproduce fig4") != std::string::npos);
}

TEST_CASE("non-converged fixed point exits 2 and still writes artifacts") {
  Scratch s;
  const auto cfg = s.config("mv.cfg",
                            "scenario.name = mckean-vlasov\ngrid.nx = 41\ntime.nt = 101\nfixedpoint.max_iter = 1\n");
  const auto out = s.dir / "mv";
  const auto r = run("solve-mfg -c " + cfg.string() + " -o " + out.string());
  CHECK(r.code == 2);
  CHECK(fs::exists(out / "value.csv"));
  CHECK(fs::exists(out / "history.csv"));
  CHECK(slurp(out / "manifest.txt").find("converged=false") != std::string::npos);
}

TEST_CASE("reruns are byte-identical and every CSV round-trips") {
  Scratch s;
  const auto cfg = s.config("ou.cfg", "scenario.name = ou-benchmark\nparticles.n = 200\ntime.nt = 201\n");
  const auto a = s.dir / "a";
  const auto b = s.dir / "b";
  REQUIRE(run("simulate --snapshots 5 -c " + cfg.string() + " -o " + a.string()).code == 0);
  REQUIRE(run("simulate --snapshots 5 -c " + cfg.string() + " -o " + b.string()).code == 0);
  REQUIRE(run("bvp-demo -o " + a.string()).code == 0);
  REQUIRE(run("bvp-demo -o " + b.string()).code == 0);
  for (const char* f : {"snapshots.csv", "ensemble_moments.csv", "bvp.csv"}) {
    const auto text = slurp(a / f);
    CHECK(!text.empty());
    CHECK(text == slurp(b / f));
    CHECK(rsmfg::csv::round_trip(text) == text);
  }
}

TEST_CASE("check-uniqueness writes six lattice reports") {
  Scratch s;
  const auto out = s.dir / "u";
  const auto r = run("check-uniqueness -o " + out.string());
  REQUIRE(r.code == 0);
  const auto t = rsmfg::csv::read_file(out / "uniqueness_log_neutral.csv");
  CHECK(t.rows.size() == 2100);
  CHECK(t.header.back() == "pass");
  for (const char* fam : {"log", "increasing", "z_free"}) {
    for (const char* kind : {"neutral", "sensitive"}) {
      CHECK(fs::exists(out / (std::string("uniqueness_") + fam + "_" + kind + ".csv")));
    }
  }
}
