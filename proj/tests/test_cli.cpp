#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// End-to-end checks of the command-line driver: exit codes, strict config
// validation, and byte-identical reruns. The binary path and the shipped
// config directory come in through compile definitions.

namespace {

namespace fs = std::filesystem;

std::string cli_path() { return KGF_CLI_PATH; }
std::string config_dir() { return KGF_CONFIG_DIR; }

int run(const std::string& args) {
  const std::string command = cli_path() + " " + args + " >/dev/null 2>/dev/null";
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string capture(const std::string& args) {
  const fs::path tmp = fs::temp_directory_path() / "kgf_cli_capture.txt";
  const std::string command =
      cli_path() + " " + args + " >" + tmp.string() + " 2>/dev/null";
  std::system(command.c_str());
  return slurp(tmp);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("flow subcommand produces the advertised files") {
  const fs::path out = fresh_dir("kgf_cli_flow");
  const int code =
      run("--quiet --out " + out.string() + " flow " + config_dir() + "/flow_fr_kl.json");
  CHECK(code == 0);
  CHECK(fs::exists(out / "diagnostics.csv"));
  CHECK(fs::exists(out / "state_0.csv"));
  CHECK(fs::exists(out / "state_5.csv"));

  std::ifstream diag(out / "diagnostics.csv");
  std::string header;
  std::getline(diag, header);
  CHECK(header == "t,energy,mass,dissipation,fisher_rao2,chi2");
}

TEST_CASE("malformed configs exit 2 and write nothing") {
  const fs::path dir = fresh_dir("kgf_cli_bad");
  const fs::path cfg = dir / "bad.json";
  const fs::path out = dir / "out";

  write_file(cfg, "{ not json");
  CHECK(run("--out " + out.string() + " flow " + cfg.string()) == 2);
  CHECK(!fs::exists(out));

  // Unknown keys are rejected with the offending path.
  write_file(cfg, R"({
    "version": 1, "task": "flow",
    "grid": {"left": 0.0, "right": 1.0, "n": 11},
    "geometry": {"variant": "fisher_rao"},
    "energy": {"variant": "divergence", "kind": "kl",
               "target": {"family": "uniform", "mass": 1.0}},
    "initial": {"family": "uniform", "mass": 1.0},
    "time": {"t_end": 0.1, "dt": 0.01},
    "output_dir": ")" + out.string() + R"(",
    "typo_key": 3
  })");
  const fs::path errfile = dir / "stderr.txt";
  const std::string command = cli_path() + " flow " + cfg.string() + " >/dev/null 2>" +
                              errfile.string();
  std::system(command.c_str());
  CHECK(!fs::exists(out));
  const std::string message = slurp(errfile);
  CHECK(message.find("$.typo_key") != std::string::npos);

  // Wrong version and missing keys are config errors too.
  write_file(cfg, R"({"version": 2, "task": "verify"})");
  CHECK(run("flow " + cfg.string()) == 2);
  write_file(cfg, R"({"version": 1, "task": "geodesic"})");
  CHECK(run("geodesic " + cfg.string()) == 2);
}

TEST_CASE("numerical failures exit 3") {
  const fs::path dir = fresh_dir("kgf_cli_numfail");
  const fs::path cfg = dir / "blowup.json";
  // A strongly negative potential grows the density by e^{50} per
  // multiplicative step, which overflows the double range in a few steps.
  write_file(cfg, R"({
    "version": 1, "task": "flow",
    "grid": {"left": 0.0, "right": 1.0, "n": 16},
    "geometry": {"variant": "fisher_rao"},
    "energy": {"variant": "potential", "polynomial": [-1000.0]},
    "initial": {"family": "uniform", "mass": 1.0},
    "time": {"t_end": 5.0, "dt": 0.05, "scheme": "multiplicative"},
    "output_dir": ")" + (dir / "out").string() + R"("
  })");
  CHECK(run("--quiet flow " + cfg.string()) == 3);
}

TEST_CASE("discrepancy prints a json object") {
  const std::string text =
      capture("--quiet discrepancy " + config_dir() + "/discrepancy_mmd.json");
  CHECK(text.find("\"name\":\"mmd2\"") != std::string::npos);
  CHECK(text.find("\"value\":") != std::string::npos);
  CHECK(text.find("\"meta\":") != std::string::npos);
}

TEST_CASE("verify exits zero and writes a report") {
  const fs::path out = fresh_dir("kgf_cli_verify");
  CHECK(run("--quiet --out " + out.string() + " verify") == 0);
  const std::string report = slurp(out / "verify_report.json");
  CHECK(report.find("\"all_pass\": true") != std::string::npos);
}

TEST_CASE("reruns are byte-identical") {
  for (const std::string name : {"flow_krr_fr", "geodesic_fr"}) {
    const fs::path a = fresh_dir("kgf_cli_det_a_" + name);
    const fs::path b = fresh_dir("kgf_cli_det_b_" + name);
    const std::string cfg = config_dir() + "/" + name + ".json";
    const std::string sub = name.rfind("flow", 0) == 0 ? "flow" : "geodesic";
    REQUIRE(run("--quiet --out " + a.string() + " " + sub + " " + cfg) == 0);
    REQUIRE(run("--quiet --out " + b.string() + " " + sub + " " + cfg) == 0);
    for (const auto& entry : fs::directory_iterator(a)) {
      const fs::path other = b / entry.path().filename();
      REQUIRE(fs::exists(other));
      CHECK(slurp(entry.path()) == slurp(other));
    }
  }
}
