#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

// Runs the CLI with stdout captured; stderr passes through to the test log.
RunResult run_cli(const std::string& args) {
  const std::string out_file = std::string(IBOT_TMP_DIR) + "/cli_stdout.txt";
  const std::string cmd = std::string(IBOT_CLI_PATH) + " " + args + " > " + out_file;
  const int raw = std::system(cmd.c_str());
  RunResult res;
  res.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  res.out = ss.str();
  return res;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("curve emits the stable CSV schema with oracle-accurate rates") {
  const RunResult res =
      run_cli("curve --problem bernoulli --e 0.15 --i-list 0.0823,0.1308,0.1927 --solver gas");
  REQUIRE(res.code == 0);
  const auto rows = parse_csv(res.out);
  REQUIRE(rows.size() == 4);
  CHECK(res.out.rfind("threshold_I,rate_R,relevance,zeta,iterations,status,marginal_residual\n",
                      0) == 0);
  const double expected[3] = {0.17360484868412596, 0.28300281999098509, 0.43571024696863725};
  for (int k = 0; k < 3; ++k) {
    CHECK(std::stod(rows[k + 1][1]) == doctest::Approx(expected[k]).epsilon(1e-6));
    CHECK(rows[k + 1][5] == "Converged");
  }
}

TEST_CASE("infeasible sweep points are recorded in-row with exit 0") {
  const RunResult res = run_cli("curve --problem bernoulli --e 0.15 --i-list 0.9");
  CHECK(res.code == 0);
  const auto rows = parse_csv(res.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][5] == "Infeasible");
}

TEST_CASE("BA beta sweep on the constant-slope joint clusters into two points") {
  const RunResult res =
      run_cli("curve --problem constant-slope --solver ba --beta-sweep 0.5:5:50");
  REQUIRE(res.code == 0);
  const auto rows = parse_csv(res.out);
  REQUIRE(rows.size() == 51);
  std::set<std::pair<long, long>> clusters;
  for (size_t k = 1; k < rows.size(); ++k)
    clusters.insert({std::lround(std::stod(rows[k][2]) * 1000.0),
                     std::lround(std::stod(rows[k][1]) * 1000.0)});
  CHECK(clusters.size() <= 2);
}

TEST_CASE("point emits a JSON report with the Table I slope") {
  const RunResult res = run_cli("point --problem bernoulli --e 0.15 --i 0.1308");
  REQUIRE(res.code == 0);
  const nlohmann::json j = nlohmann::json::parse(res.out);
  CHECK(j["status"] == "Converged");
  CHECK(double(j["zeta"]) == doctest::Approx(2.3299).epsilon(1e-2));
  CHECK(double(j["residuals"]["marginal"]) <= 1e-10);
}

TEST_CASE("point at threshold zero returns rate zero") {
  const RunResult res = run_cli("point --problem bernoulli --e 0.15 --i 0");
  REQUIRE(res.code == 0);
  const nlohmann::json j = nlohmann::json::parse(res.out);
  CHECK(std::abs(double(j["rate_R"])) <= 1e-8);
}

TEST_CASE("oracle evaluates closed forms and rejects out-of-domain thresholds") {
  const RunResult res = run_cli("oracle --model gaussian --snr 1 --i-list 0.2");
  REQUIRE(res.code == 0);
  const auto rows = parse_csv(res.out);
  REQUIRE(rows.size() == 2);
  CHECK(std::stod(rows[1][1]) == doctest::Approx(0.53846440377395266).epsilon(1e-10));

  CHECK(run_cli("oracle --model bernoulli --e 0 --i-list 0.3").out.find("0.3") !=
        std::string::npos);
  CHECK(run_cli("oracle --model bernoulli --e 0.15 --i-list 0.8").code == 2);
}

TEST_CASE("argument and input-file errors use the documented exit codes") {
  CHECK(run_cli("curve --problem bogus --i-list 0.1").code == 2);
  CHECK(run_cli("curve --problem bernoulli").code == 2);  // no sweep given
  CHECK(run_cli("curve --problem empirical --data /nonexistent.csv --label-col 0 --i-list 0.1")
            .code == 3);
}

TEST_CASE("units bits rescales the information columns") {
  const RunResult nats = run_cli("oracle --model constant-slope --i-list 0.3465735902799726");
  const RunResult bits =
      run_cli("oracle --model constant-slope --i-list 0.3465735902799726 --units bits");
  const auto rn = parse_csv(nats.out);
  const auto rb = parse_csv(bits.out);
  CHECK(std::stod(rn[1][1]) == doctest::Approx(0.3465735902799726).epsilon(1e-12));
  CHECK(std::stod(rb[1][1]) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("identical invocations write bit-identical outputs plus a manifest") {
  const std::string out_a = std::string(IBOT_TMP_DIR) + "/curve_a.csv";
  const std::string out_b = std::string(IBOT_TMP_DIR) + "/curve_b.csv";
  const std::string flags =
      "curve --problem bernoulli --e 0.15 --i-list 0.0823,0.1308 --seed 1 --out ";
  REQUIRE(run_cli(flags + out_a).code == 0);
  REQUIRE(run_cli(flags + out_b).code == 0);
  const std::string a = slurp(out_a);
  REQUIRE(!a.empty());
  CHECK(a == slurp(out_b));

  const nlohmann::json manifest = nlohmann::json::parse(slurp(out_a + ".manifest.json"));
  CHECK(manifest["tool"] == "ibot");
  CHECK(manifest["command"] == "curve");
  CHECK(manifest["problem"]["kind"] == "bernoulli");
  CHECK(manifest["seed"] == 1);
  // round-trip losslessness: re-serializing parses to the same document
  CHECK(nlohmann::json::parse(manifest.dump()) == manifest);
}

TEST_CASE("bench reports timing rows for GAS and the BA search") {
  const RunResult res =
      run_cli("bench --problem bernoulli --e 0.15 --i-list 0.1308 --repeats 2");
  REQUIRE(res.code == 0);
  const auto rows = parse_csv(res.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][0] == "target_I");
  CHECK(std::stod(rows[1][1]) > 0.0);   // gas mean seconds
  CHECK(std::stoi(rows[1][5]) > 0);     // ba trials
  CHECK(rows[1][6] == "Converged");
}

TEST_CASE("bench marks constant-slope targets as SearchFailed") {
  const RunResult res =
      run_cli("bench --problem constant-slope --i-list 0.35 --repeats 1");
  REQUIRE(res.code == 0);
  const auto rows = parse_csv(res.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][6] == "SearchFailed");
  CHECK(std::stod(rows[1][4]) == 0.0);  // stddev with one repeat
}
