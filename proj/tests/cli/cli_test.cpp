// End-to-end tests of the command-line tool: each case runs the real binary
// (path injected as TESTS_CLI_PATH) in a scratch directory and inspects exit
// codes, stdout/stderr and emitted files.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("histoband_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

/// Runs `histoband <args>` with stdout/stderr captured. `env_prefix` may hold
/// e.g. "HISTOBAND_THREADS=2 " (trailing space included).
RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  static int counter = 0;
  const fs::path out_path = scratch_dir() / ("stdout_" + std::to_string(counter));
  const fs::path err_path = scratch_dir() / ("stderr_" + std::to_string(counter));
  ++counter;
  const std::string cmd = env_prefix + std::string(TESTS_CLI_PATH) + " " + args +
                          " >" + out_path.string() + " 2>" + err_path.string();
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

fs::path sample_csv() {
  const fs::path path = scratch_dir() / "three.csv";
  write_file(path, "x1,y\n0.1,1\n0.2,3\n0.7,5\n");
  return path;
}

}  // namespace

TEST_CASE("quantile prints six decimals") {
  const RunResult r = run_cli("quantile --cells 1 --beta 0.05");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "1.959964\n");

  const RunResult big = run_cli("quantile --cells 100 --beta 0.05");
  CHECK(big.exit_code == 0);
  CHECK(big.out == "3.473979\n");
}

TEST_CASE("quantile rejects bad arguments with exit 2") {
  CHECK(run_cli("quantile --cells 0 --beta 0.05").exit_code == 2);
  CHECK(run_cli("quantile --cells 10 --beta 1.5").exit_code == 2);
  CHECK(run_cli("quantile --cells 10").exit_code == 2);  // --beta required
}

TEST_CASE("fit emits the worked-example cell means") {
  const RunResult r = run_cli("fit " + sample_csv().string() + " --inv-mesh 2");
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["schema"] == 1);
  CHECK(doc["dim"] == 1);
  CHECK(doc["n"] == 3);
  REQUIRE(doc["cells"].size() == 2);
  CHECK(doc["cells"][0]["m_hat"] == 2.0);
  CHECK(doc["cells"][1]["m_hat"] == 5.0);
  CHECK(doc["cells"][0]["count"] == 2);
  CHECK(doc["cells"][1]["count"] == 1);
  CHECK(doc["cells"][0]["p_hat"].get<double>() == doctest::Approx(2.0 / 3.0));
  // Single-observation cell: zero raw variance, clamped to the floor.
  CHECK(doc["cells"][1]["sigma2_local"].get<double>() == 1e-8);
}

TEST_CASE("fit: empty file fails, header-only succeeds with p recorded") {
  const fs::path empty = scratch_dir() / "empty.csv";
  write_file(empty, "");
  const RunResult r1 = run_cli("fit " + empty.string() + " --inv-mesh 2");
  CHECK(r1.exit_code == 2);
  CHECK(r1.err.find("no data rows") != std::string::npos);

  const fs::path header_only = scratch_dir() / "header_only.csv";
  write_file(header_only, "x1,x2,y\n");
  const RunResult r2 = run_cli("fit " + header_only.string() + " --inv-mesh 2");
  REQUIRE(r2.exit_code == 0);
  const json doc = json::parse(r2.out);
  CHECK(doc["dim"] == 2);
  CHECK(doc["n"] == 0);
  CHECK(doc["cells"].size() == 4);
  CHECK(doc["cells"][0]["p_hat"].is_null());
}

TEST_CASE("fit: malformed rows name the line") {
  const fs::path bad = scratch_dir() / "bad.csv";
  write_file(bad, "x1,y\n0.1,1\noops\n");
  const RunResult r = run_cli("fit " + bad.string() + " --inv-mesh 2");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);

  const fs::path range = scratch_dir() / "range.csv";
  write_file(range, "x1,y\n1.5,1\n");
  const RunResult r2 = run_cli("fit " + range.string() + " --inv-mesh 2");
  CHECK(r2.exit_code == 2);
  CHECK(r2.err.find("outside [0,1]") != std::string::npos);
}

TEST_CASE("fit round-trips written CSV within 1e-12") {
  // Awkward doubles through a 17-digit write, the CLI, and JSON back.
  const fs::path path = scratch_dir() / "roundtrip.csv";
  std::ostringstream csv;
  csv << "x1,y\n";
  csv.precision(17);
  const std::vector<double> xs{1.0 / 3.0, 0.1234567890123456, 0.9999999999999999};
  const std::vector<double> ys{-1.0 / 7.0, 3.141592653589793e+5, 2.5e-13};
  for (std::size_t i = 0; i < xs.size(); ++i) csv << xs[i] << ',' << ys[i] << '\n';
  write_file(path, csv.str());

  const RunResult r = run_cli("fit " + path.string() + " --inv-mesh 1");
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(r.out);
  const double mean = (ys[0] + ys[1] + ys[2]) / 3.0;
  CHECK(doc["cells"][0]["m_hat"].get<double>() ==
        doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("band reports the quantile on stderr and bounds in JSON") {
  const fs::path csv = scratch_dir() / "band_data.csv";
  std::ostringstream rows;
  rows << "x1,y\n";
  // Deterministic spread: 40 points, alternating offsets, both cells filled.
  for (int i = 0; i < 40; ++i) {
    const double x = (i % 2 == 0) ? 0.25 : 0.75;
    const double y = (i % 4 < 2) ? 1.0 : 3.0;
    rows << x << ',' << y << '\n';
  }
  write_file(csv, rows.str());

  const RunResult r =
      run_cli("band " + csv.string() + " --inv-mesh 2 --beta 0.1");
  REQUIRE(r.exit_code == 0);
  CHECK(r.err.find("J=2") != std::string::npos);
  CHECK(r.err.find("c=") != std::string::npos);
  const json doc = json::parse(r.out);
  CHECK(doc["beta"] == 0.1);
  REQUIRE(doc["cells"].size() == 2);
  for (const auto& cell : doc["cells"]) {
    CHECK(cell["degenerate"] == false);
    const double center = cell["center"].get<double>();
    const double lower = cell["lower"].get<double>();
    const double upper = cell["upper"].get<double>();
    CHECK(lower < center);
    CHECK(upper > center);
    CHECK(upper - center == doctest::Approx(center - lower).epsilon(1e-12));
    CHECK(cell["cell_box"]["lo"].size() == 1);
  }

  // Smaller beta widens the band on the same data.
  const RunResult tight =
      run_cli("band " + csv.string() + " --inv-mesh 2 --beta 0.01");
  const json tdoc = json::parse(tight.out);
  const double w1 = doc["cells"][0]["upper"].get<double>() -
                    doc["cells"][0]["lower"].get<double>();
  const double w2 = tdoc["cells"][0]["upper"].get<double>() -
                    tdoc["cells"][0]["lower"].get<double>();
  CHECK(w2 > w1);
}

TEST_CASE("band with global variance: radii scale with cell frequency only") {
  const fs::path csv = scratch_dir() / "band_global.csv";
  std::ostringstream rows;
  rows << "x1,y\n";
  // 30 points in cell 0, 10 in cell 1 -> p_hat 0.75 / 0.25.
  for (int i = 0; i < 30; ++i) rows << 0.1 + 0.01 * i << ',' << (i % 2) << '\n';
  for (int i = 0; i < 10; ++i) rows << 0.6 + 0.01 * i << ',' << (i % 2) << '\n';
  write_file(csv, rows.str());

  const RunResult r = run_cli("band " + csv.string() +
                              " --inv-mesh 2 --beta 0.1 --variance global");
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(r.out);
  const double r0 = doc["cells"][0]["upper"].get<double>() -
                    doc["cells"][0]["center"].get<double>();
  const double r1 = doc["cells"][1]["upper"].get<double>() -
                    doc["cells"][1]["center"].get<double>();
  // radius ~ 1/sqrt(p_hat): ratio sqrt(0.75/0.25) = sqrt 3.
  CHECK(r1 / r0 == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("band flags unpopulated cells with null bounds") {
  const RunResult r =
      run_cli("band " + sample_csv().string() + " --inv-mesh 4 --beta 0.1");
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(r.out);
  bool saw_degenerate = false;
  for (const auto& cell : doc["cells"]) {
    if (cell["degenerate"].get<bool>()) {
      saw_degenerate = true;
      CHECK(cell["lower"].is_null());
      CHECK(cell["upper"].is_null());
    }
  }
  CHECK(saw_degenerate);
}

TEST_CASE("band oracle mode needs a matching spec") {
  const RunResult no_spec = run_cli("band " + sample_csv().string() +
                                    " --inv-mesh 2 --variance oracle");
  CHECK(no_spec.exit_code == 2);
  CHECK(no_spec.err.find("--oracle-spec") != std::string::npos);

  const fs::path spec2d = scratch_dir() / "oracle2d.json";
  write_file(spec2d, R"({"schema": 1, "dim": 2})");
  const RunResult mismatch =
      run_cli("band " + sample_csv().string() +
              " --inv-mesh 2 --variance oracle --oracle-spec " + spec2d.string());
  CHECK(mismatch.exit_code == 2);

  const fs::path spec1d = scratch_dir() / "oracle1d.json";
  write_file(spec1d, R"({"schema": 1, "dim": 1, "noise": {"id": "gaussian", "sigma": 2.0}})");
  const RunResult ok =
      run_cli("band " + sample_csv().string() +
              " --inv-mesh 2 --variance oracle --oracle-spec " + spec1d.string());
  REQUIRE(ok.exit_code == 0);
  const json doc = json::parse(ok.out);
  // Oracle tau = delta^p / sigma^2 = 0.125 on every cell: radii all equal.
  const double r0 = doc["cells"][0]["upper"].get<double>() -
                    doc["cells"][0]["center"].get<double>();
  const double r1 = doc["cells"][1]["upper"].get<double>() -
                    doc["cells"][1]["center"].get<double>();
  CHECK(r0 == doctest::Approx(r1).epsilon(1e-12));
  CHECK(r0 == doctest::Approx(doc["quantile"].get<double>() /
                              std::sqrt(0.125 * 3.0))
                  .epsilon(1e-9));
}

TEST_CASE("band writes the per-cell CSV on request") {
  const fs::path out_csv = scratch_dir() / "band_cells.csv";
  const RunResult r =
      run_cli("band " + sample_csv().string() + " --inv-mesh 2 --beta 0.1" +
              " --csv-out " + out_csv.string());
  REQUIRE(r.exit_code == 0);
  const std::string text = slurp(out_csv);
  CHECK(text.rfind("cell,lo1,hi1,center,lower,upper,degenerate\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);  // header + 2 cells
}

namespace {

fs::path tiny_coverage_config_file() {
  const fs::path path = scratch_dir() / "coverage.json";
  write_file(path, R"({
    "schema": 1,
    "dim": 1,
    "inv_mesh": 4,
    "n": 400,
    "regression": {"id": "piecewise_constant", "amplitude": 1.0},
    "noise": {"id": "gaussian", "sigma": 1.0},
    "beta": 0.1,
    "tau_mode": "oracle",
    "replications": 30,
    "seed": 99
  })");
  return path;
}

}  // namespace

TEST_CASE("simulate coverage runs and is worker-invariant") {
  const fs::path config = tiny_coverage_config_file();
  const RunResult one =
      run_cli("simulate coverage --config " + config.string() + " --workers 1");
  REQUIRE(one.exit_code == 0);
  const RunResult two =
      run_cli("simulate coverage --config " + config.string() + " --workers 2");
  REQUIRE(two.exit_code == 0);

  json a = json::parse(one.out);
  json b = json::parse(two.out);
  CHECK(a["kind"] == "coverage");
  CHECK(a["coverage"].get<double>() >= 0.5);
  CHECK(b["meta"]["workers"] == 2);
  a.erase("meta");
  b.erase("meta");
  CHECK(a.dump() == b.dump());
}

TEST_CASE("HISTOBAND_THREADS overrides --workers") {
  const fs::path config = tiny_coverage_config_file();
  const RunResult r =
      run_cli("simulate coverage --config " + config.string() + " --workers 1",
              "HISTOBAND_THREADS=2 ");
  REQUIRE(r.exit_code == 0);
  CHECK(json::parse(r.out)["meta"]["workers"] == 2);

  const RunResult bad =
      run_cli("simulate coverage --config " + config.string(),
              "HISTOBAND_THREADS=zero ");
  CHECK(bad.exit_code == 2);
}

TEST_CASE("simulate coverage enforces asserted thresholds") {
  const fs::path config = scratch_dir() / "coverage_assert.json";
  write_file(config, R"({
    "schema": 1,
    "dim": 1,
    "inv_mesh": 4,
    "n": 400,
    "regression": {"id": "piecewise_constant"},
    "tau_mode": "oracle",
    "replications": 20,
    "seed": 5,
    "assert": {"min_coverage": 1.1}
  })");
  const RunResult r =
      run_cli("simulate coverage --config " + config.string());
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("coverage") != std::string::npos);
}

TEST_CASE("simulate rejects malformed configs with exit 2") {
  const fs::path bad = scratch_dir() / "bad_config.json";
  write_file(bad, R"({"schema": 1, "surprise": true})");
  const RunResult r = run_cli("simulate coverage --config " + bad.string());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("surprise") != std::string::npos);

  // Assertions that do not apply to the experiment are refused.
  const fs::path misplaced = scratch_dir() / "misplaced_assert.json";
  write_file(misplaced, R"({"schema": 1, "assert": {"max_ks": 0.1}})");
  const RunResult r2 =
      run_cli("simulate coverage --config " + misplaced.string());
  CHECK(r2.exit_code == 2);

  // rate requires n_values; coverage refuses them.
  const fs::path no_n = scratch_dir() / "no_n.json";
  write_file(no_n, R"({"schema": 1})");
  CHECK(run_cli("simulate rate --config " + no_n.string()).exit_code == 2);
  const fs::path with_n = scratch_dir() / "with_n.json";
  write_file(with_n, R"({"schema": 1, "n_values": [100, 1000, 10000, 100000]})");
  CHECK(run_cli("simulate coverage --config " + with_n.string()).exit_code == 2);
}

TEST_CASE("simulate verify-binomial passes by default") {
  const RunResult r = run_cli("simulate verify-binomial");
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["kind"] == "binomial_sweep");
  CHECK(doc["all_bounded"] == true);

  // A custom grid through the config block.
  const fs::path config = scratch_dir() / "binom.json";
  write_file(config, R"({
    "schema": 1,
    "binomial": {"ns": [50, 100, 200, 400], "ps": [0.1, 0.2], "qs": [2]}
  })");
  const RunResult custom =
      run_cli("simulate verify-binomial --config " + config.string());
  CHECK(custom.exit_code == 0);

  // The binomial block is rejected elsewhere.
  const RunResult misuse =
      run_cli("simulate coverage --config " + config.string());
  CHECK(misuse.exit_code == 2);
}

TEST_CASE("simulate writes report and raw csv to files") {
  const fs::path config = tiny_coverage_config_file();
  const fs::path out = scratch_dir() / "report.json";
  const fs::path raw = scratch_dir() / "raw.csv";
  const RunResult r = run_cli("simulate coverage --config " + config.string() +
                              " --out " + out.string() + " --raw-csv " +
                              raw.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.empty());
  const json doc = json::parse(slurp(out));
  CHECK(doc["kind"] == "coverage");
  CHECK(slurp(raw).rfind("replication,covered,degenerate\n", 0) == 0);
}

TEST_CASE("simulate seed override changes the draws") {
  const fs::path config = tiny_coverage_config_file();
  const RunResult a =
      run_cli("simulate coverage --config " + config.string() + " --seed 1");
  const RunResult b =
      run_cli("simulate coverage --config " + config.string() + " --seed 2");
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(json::parse(a.out)["config"]["seed"] == 1);
  CHECK(json::parse(b.out)["config"]["seed"] == 2);
  CHECK(json::parse(a.out)["covered"] != json::parse(b.out)["covered"]);
}

TEST_CASE("top-level usage errors exit 2") {
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("fit missing_file.csv --inv-mesh 2").exit_code == 2);
  CHECK(run_cli("simulate coverage").exit_code == 2);  // --config required
}
