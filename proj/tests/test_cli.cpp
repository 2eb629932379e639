#include <doctest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    std::random_device rd;
    dir = fs::temp_directory_path() / ("nmq_cli_" + std::to_string(rd()));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  fs::path write(const std::string& name, const std::string& text) const {
    fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Runs the binary with stdout and stderr captured in `log`.
int run(const std::string& args, const fs::path& log, const std::string& env = "") {
  std::string cmd = env + " '" NMQ_BINARY "' " + args + " > '" + log.string() + "' 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kChainModel =
    R"("model": {"type": "tight_binding", "M": 2, "Gamma_L": 0.4, "Gamma_R": 0.2, "mu_L": 0.5, "mu_R": -0.5})";

std::string scan_config(const std::string& out) {
  return std::string(R"({"schema_version": 1, "run": "scan", )") + kChainModel +
         R"(, "scan": {"x": {"param": "T", "values": [0, 0.5, 2]}, "y": {"param": "V", "start": 0, "stop": 1, "count": 3}},)"
         R"( "output": {"directory": ")" + out + R"("}, "threads": 3})";
}

}  // namespace

TEST_CASE("minimal evolve scenario") {
  Scratch s;
  fs::path out = s.dir / "evolve";
  CHECK(run("evolve --config '" NMQ_SCENARIOS "/minimal_evolve.json' --out '" + out.string() + "'", s.dir / "log") == 0);
  auto rates = lines(out / "rates.csv");
  REQUIRE(rates.size() == 7);
  CHECK(rates[0] == "t,gamma_1,gamma_2,gamma_3,gamma_4,f_nM");
  CHECK(fs::exists(out / "trajectory" / "chi_00000.csv"));
  CHECK(slurp(out / "manifest.json").find("\"status\": \"ok\"") != std::string::npos);
}

TEST_CASE("unknown keys and missing arguments exit with status 2") {
  Scratch s;
  fs::path cfg = s.write("bad.json", std::string(R"({"schema_version": 1, "run": "steady", "tempp": 1, )") + kChainModel + "}");
  CHECK(run("steady --config '" + cfg.string() + "' --out '" + (s.dir / "o").string() + "'", s.dir / "log") == 2);
  CHECK(slurp(s.dir / "log").find("tempp") != std::string::npos);

  CHECK(run("steady", s.dir / "log2") == 2);
  CHECK(run("steady --config '" + (s.dir / "missing.json").string() + "'", s.dir / "log3") == 2);

  fs::path neg = s.write("neg.json", R"({"schema_version": 1, "run": "steady", "model": {"type": "tight_binding", "M": 3, "Gamma_L": -1}})");
  CHECK(run("steady --config '" + neg.string() + "' --out '" + (s.dir / "o").string() + "'", s.dir / "log4") == 2);
}

TEST_CASE("scan writes one row per point and is deterministic") {
  Scratch s;
  fs::path cfg = s.write("scan.json", scan_config("a"));
  REQUIRE(run("scan --config '" + cfg.string() + "'", s.dir / "log") == 0);
  auto rows = lines(s.dir / "a" / "scan.csv");
  REQUIRE(rows.size() == 10);
  CHECK(rows[0] == "x,y,f_nM,J_e,decay_kind,decay_exponent,decay_length,min_gap,residual,status,index,message");
  for (size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].find(",ok,") != std::string::npos);

  fs::path cfg2 = s.write("scan2.json", scan_config("b"));
  REQUIRE(run("scan --config '" + cfg2.string() + "' --threads 1", s.dir / "log2") == 0);
  CHECK(slurp(s.dir / "a" / "scan.csv") == slurp(s.dir / "b" / "scan.csv"));
}

TEST_CASE("interrupted scan resumes to the same file") {
  Scratch s;
  fs::path cfg = s.write("scan.json", scan_config("a"));
  REQUIRE(run("scan --config '" + cfg.string() + "'", s.dir / "log") == 0);
  const std::string full = slurp(s.dir / "a" / "scan.csv");
  // keep four complete rows and half of the fifth
  size_t cut = 0;
  for (int k = 0; k < 5; ++k) cut = full.find('\n', cut) + 1;
  cut += (full.find('\n', cut) - cut) / 2;
  std::ofstream(s.dir / "a" / "scan.csv", std::ios::trunc) << full.substr(0, cut);
  REQUIRE(run("scan --config '" + cfg.string() + "'", s.dir / "log2") == 0);
  CHECK(slurp(s.dir / "a" / "scan.csv") == full);
}

TEST_CASE("rates scenario on a long chain has eight nonzero rates") {
  Scratch s;
  fs::path cfg = s.write("rates.json", R"({"schema_version": 1, "run": "rates",
    "model": {"type": "tight_binding", "M": 50, "Gamma_L": 0.4, "Gamma_R": 0.2, "mu_L": 1.0, "mu_R": 0.5},
    "time_grid": {"times": [0, 0.5, 2, 10]}, "output": {"directory": "r"}})");
  REQUIRE(run("rates --config '" + cfg.string() + "'", s.dir / "log") == 0);
  auto rows = lines(s.dir / "r" / "rates.csv");
  REQUIRE(rows.size() == 5);
  for (size_t i = 2; i < rows.size(); ++i) {
    std::stringstream ss(rows[i]);
    std::vector<double> v;
    for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
    REQUIRE(v.size() == 102);
    int nonzero = 0;
    for (size_t k = 1; k + 1 < v.size(); ++k) nonzero += std::abs(v[k]) > 1e-10;
    CAPTURE(v[0]);
    CHECK(nonzero == 8);
  }
  CHECK(fs::exists(s.dir / "r" / "modes.csv"));
}

TEST_CASE("an ill-defined steady state exits with status 3 and a diagnostic") {
  Scratch s;
  s.write("h.csv", "row,col,re,im\n0,0,0,0\n0,1,0,0\n1,0,0,0\n1,1,0.3,0\n");
  s.write("g.csv", "row,col,re,im\n0,0,0.5,0\n0,1,0,0\n1,0,0,0\n1,1,0,0\n");
  fs::path cfg = s.write("dec.json", R"({"schema_version": 1, "run": "steady",
    "model": {"type": "generic", "h": "h.csv", "reservoirs": [{"gamma": "g.csv", "T": 0, "mu": 0}]},
    "output": {"directory": "d"}})");
  CHECK(run("steady --config '" + cfg.string() + "'", s.dir / "log") == 3);
  CHECK(fs::exists(s.dir / "d" / "diagnostic.txt"));
  CHECK(slurp(s.dir / "d" / "manifest.json").find("\"status\": \"failed\"") != std::string::npos);
}

TEST_CASE("output directory precedence") {
  Scratch s;
  fs::path cfg = s.write("st.json", std::string(R"({"schema_version": 1, "run": "steady", )") + kChainModel +
                                         R"(, "output": {"directory": "from_config"}})");
  fs::path env_out = s.dir / "from_env";
  REQUIRE(run("steady --config '" + cfg.string() + "'", s.dir / "log", "NMQ_OUT='" + env_out.string() + "'") == 0);
  CHECK(fs::exists(env_out / "steady.csv"));
  CHECK(!fs::exists(s.dir / "from_config"));
  fs::path cli_out = s.dir / "from_cli";
  REQUIRE(run("steady --config '" + cfg.string() + "' --out '" + cli_out.string() + "'", s.dir / "log2",
              "NMQ_OUT='" + env_out.string() + "_x'") == 0);
  CHECK(fs::exists(cli_out / "steady.csv"));
  CHECK(!fs::exists(env_out.string() + "_x"));
}

TEST_CASE("version flag") {
  Scratch s;
  CHECK(run("--version", s.dir / "log") == 0);
  CHECK(slurp(s.dir / "log").find("0.1.0") != std::string::npos);
}
