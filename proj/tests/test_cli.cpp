// End-to-end checks of the bbsim binary: exit codes, file outputs, and the
// CSV contract. BBSIM_TOOL_PATH is injected by CMake and points at the built
// executable, so these tests exercise exactly what a user runs.
#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  REQUIRE(out.good());
}

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("bbsim-cli-test-" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// std::system's return value wraps the wait status; the high byte carries the
// exit code for a normally terminated child.
RunResult run_tool(const std::string& args) {
  static int seq = 0;
  const fs::path out = work_dir() / ("stdout-" + std::to_string(seq) + ".txt");
  const fs::path err = work_dir() / ("stderr-" + std::to_string(seq) + ".txt");
  ++seq;
  const std::string cmd = std::string("\"") + BBSIM_TOOL_PATH + "\" " + args +
                          " >" + out.string() + " 2>" + err.string();
  const int ret = std::system(cmd.c_str());
  return {(ret >> 8) & 0xff, slurp(out), slurp(err)};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    lines.push_back(line);
  }
  return lines;
}

const char* kOpenLoopDoc = R"([converter]
vin = 2.5
l = 280e-9
c = 250e-9
r_l = 0.5
r_esr = 1e-4
r_load = 10
f_sw = 5e7
t_dead = 0

[controller]
kind = open_loop
d = 0.5

[sim]
name = cli-smoke
t_end = 1e-5
record_decimation = 8
)";

}  // namespace

TEST_CASE("help exits zero and names the subcommands") {
  const RunResult r = run_tool("--help");
  CHECK(r.code == 0);
  CHECK(r.out.find("simulate") != std::string::npos);
  CHECK(r.out.find("suite") != std::string::npos);
  CHECK(r.out.find("verify") != std::string::npos);
}

TEST_CASE("usage errors exit one") {
  CHECK(run_tool("").code == 1);                          // subcommand required
  CHECK(run_tool("frobnicate").code == 1);                // unknown subcommand
  CHECK(run_tool("simulate").code == 1);                  // --config required
  CHECK(run_tool("--integrator verlet verify").code == 1);
}

TEST_CASE("simulate writes the trace, a metrics file, and a summary line") {
  const fs::path cfg = work_dir() / "smoke.conf";
  spit(cfg, kOpenLoopDoc);
  const fs::path csv = work_dir() / "smoke.csv";

  const RunResult r =
      run_tool("simulate --config " + cfg.string() + " --out " + csv.string());
  REQUIRE(r.code == 0);
  CHECK(r.err.empty());
  CHECK(r.out.find("cli-smoke:") != std::string::npos);
  CHECK(r.out.find("mean v_out") != std::string::npos);

  REQUIRE(fs::exists(csv));
  const std::vector<std::string> lines = lines_of(slurp(csv));
  REQUIRE(lines.size() > 100);
  CHECK(lines[0] == "t,i_l,v_c,v_out,duty,phase");

  // First sample is the initial state at t = 0, still in the On phase.
  CHECK(lines[1].substr(0, 2) == "0,");
  CHECK(lines[1].find(",ON") != std::string::npos);
  // Open loop holds the configured duty; shortest round-trip prints it as 0.5.
  CHECK(lines[1].find(",0.5,") != std::string::npos);
  CHECK(lines.back().find(",0.5,") != std::string::npos);

  // Every data row carries one of the three phase labels.
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const bool labelled = lines[i].find(",ON") != std::string::npos ||
                          lines[i].find(",OFF") != std::string::npos ||
                          lines[i].find(",DEAD") != std::string::npos;
    if (!labelled) {
      CAPTURE(lines[i]);
    }
    REQUIRE(labelled);
  }

  const fs::path metrics = work_dir() / "smoke.metrics.txt";
  REQUIRE(fs::exists(metrics));
  const std::string mtext = slurp(metrics);
  CHECK(mtext.find("final_mean_v") != std::string::npos);
  CHECK(mtext.find("ripple_pp_v") != std::string::npos);
}

TEST_CASE("identical simulate runs produce byte-identical traces") {
  const fs::path cfg = work_dir() / "repeat.conf";
  spit(cfg, kOpenLoopDoc);
  const fs::path a = work_dir() / "run-a.csv";
  const fs::path b = work_dir() / "run-b.csv";

  REQUIRE(run_tool("simulate --config " + cfg.string() + " --out " + a.string())
              .code == 0);
  REQUIRE(run_tool("simulate --config " + cfg.string() + " --out " + b.string())
              .code == 0);
  const std::string ta = slurp(a);
  REQUIRE(!ta.empty());
  CHECK(ta == slurp(b));
}

TEST_CASE("global integrator and step overrides are accepted") {
  const fs::path cfg = work_dir() / "override.conf";
  spit(cfg, kOpenLoopDoc);
  const fs::path csv = work_dir() / "override.csv";

  const RunResult r = run_tool("--integrator exact --steps-per-period 32 simulate --config " +
                               cfg.string() + " --out " + csv.string());
  CHECK(r.code == 0);
  CHECK(fs::exists(csv));
}

TEST_CASE("config problems exit one with a config error message") {
  SUBCASE("missing file") {
    const RunResult r =
        run_tool("simulate --config " + (work_dir() / "no-such.conf").string());
    CHECK(r.code == 1);
    CHECK(r.err.find("config error:") != std::string::npos);
  }
  SUBCASE("invalid value") {
    const fs::path cfg = work_dir() / "bad.conf";
    spit(cfg, "[converter]\nl = -1\n[sim]\nt_end = 1e-6\n");
    const RunResult r = run_tool("simulate --config " + cfg.string() + " --out " +
                                 (work_dir() / "bad.csv").string());
    CHECK(r.code == 1);
    CHECK(r.err.find("config error:") != std::string::npos);
    CHECK(r.err.find("l must be positive") != std::string::npos);
  }
}

TEST_CASE("a diverging run exits two with a simulation error") {
  const fs::path cfg = work_dir() / "diverge.conf";
  spit(cfg, R"([converter]
vin = 2.5
r_l = 1e6

[controller]
kind = open_loop
d = 0.5

[sim]
t_end = 1e-6
steps_per_period = 4
initial_i_l = 1
)");
  const RunResult r = run_tool("simulate --config " + cfg.string() + " --out " +
                               (work_dir() / "diverge.csv").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("simulation error:") != std::string::npos);
  CHECK(r.err.find("diverged") != std::string::npos);
}

TEST_CASE("suite accepts a comma-separated preset list") {
  const fs::path dir = work_dir() / "suite-two";
  const RunResult r = run_tool("suite boost-open,buck-open --out " + dir.string());
  REQUIRE(r.code == 0);

  REQUIRE(fs::exists(dir / "report.txt"));
  CHECK(fs::exists(dir / "boost-open.csv"));
  CHECK(fs::exists(dir / "buck-open.csv"));
  std::size_t csv_count = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    csv_count += entry.path().extension() == ".csv";
  }
  CHECK(csv_count == 2);

  const std::string report = slurp(dir / "report.txt");
  CHECK(report.find("boost-open") != std::string::npos);
  CHECK(report.find("buck-open") != std::string::npos);
  CHECK(report.find("overall: PASS") != std::string::npos);
  CHECK(r.out.find("2 trace files and report.txt written to") != std::string::npos);
}

TEST_CASE("suite rejects unknown preset names") {
  const RunResult r =
      run_tool("suite nope --out " + (work_dir() / "suite-bad").string());
  CHECK(r.code == 1);
  CHECK(r.err.find("nope") != std::string::npos);
}

TEST_CASE("verify passes, and the corrupted integrator control fails") {
  const RunResult good = run_tool("verify");
  CHECK(good.code == 0);
  CHECK(good.out.find("verify: PASS") != std::string::npos);
  CHECK(good.out.find("rk4 vs exact") != std::string::npos);
  CHECK(good.out.find("volt-second balance") != std::string::npos);

  const RunResult bad = run_tool("verify --corrupt-integrator");
  CHECK(bad.code == 1);
  CHECK(bad.out.find("FAIL (expected)") != std::string::npos);
  CHECK(bad.out.find("verify: FAIL") != std::string::npos);
}
