#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "uavfl/uavfl.h"

namespace fs = std::filesystem;

namespace {

const char* kInfeasibleJson = R"({"energy": {"energy_budget_j": 1.0}, "optimizer": {"max_iters": 5}})";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("uavfl_capi_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = path / name;
    std::ofstream(p) << content;
    return p.string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + UAVFL_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string take(char* text) {
  std::string out = text ? text : "";
  uavfl_string_free(text);
  return out;
}

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("status names and argument checks") {
  CHECK(std::string(uavfl_status_name(UAVFL_OK)) == "ok");
  CHECK(std::string(uavfl_status_name(UAVFL_ERR_INFEASIBLE)) != std::string(uavfl_status_name(UAVFL_ERR_CONFIG)));
  CHECK(uavfl_scenario_default(nullptr) == UAVFL_ERR_ARGUMENT);
  CHECK(std::string(uavfl_last_error()).size() > 0);
  int n = 0;
  CHECK(uavfl_scenario_n_followers(nullptr, &n) == UAVFL_ERR_ARGUMENT);
  uavfl_scenario_free(nullptr);
  uavfl_design_free(nullptr);
  uavfl_result_free(nullptr);
  uavfl_string_free(nullptr);
}

TEST_CASE("scenario handles") {
  uavfl_scenario* s = nullptr;
  REQUIRE(uavfl_scenario_default(&s) == UAVFL_OK);
  int n = 0;
  CHECK(uavfl_scenario_n_followers(s, &n) == UAVFL_OK);
  CHECK(n == 5);

  char* json = nullptr;
  REQUIRE(uavfl_scenario_to_json(s, &json) == UAVFL_OK);
  const std::string text = take(json);
  uavfl_scenario* back = nullptr;
  REQUIRE(uavfl_scenario_from_json(text.c_str(), &back) == UAVFL_OK);
  char* json2 = nullptr;
  REQUIRE(uavfl_scenario_to_json(back, &json2) == UAVFL_OK);
  CHECK(take(json2) == text);
  uavfl_scenario_free(back);
  uavfl_scenario_free(s);

  uavfl_scenario* bad = nullptr;
  CHECK(uavfl_scenario_from_json(R"({"radio": {"bw_up_hz": -5}})", &bad) == UAVFL_ERR_CONFIG);
  CHECK(bad == nullptr);
  CHECK(std::string(uavfl_last_error()).find("bw_up") != std::string::npos);
  CHECK(uavfl_scenario_from_json("{oops", &bad) == UAVFL_ERR_CONFIG);
  CHECK(uavfl_scenario_load("/nonexistent/uavfl.json", &bad) == UAVFL_ERR_CONFIG);
}

TEST_CASE("design get and set") {
  uavfl_scenario* s = nullptr;
  REQUIRE(uavfl_scenario_default(&s) == UAVFL_OK);
  uavfl_design* d = nullptr;
  REQUIRE(uavfl_design_from_scenario(s, &d) == UAVFL_OK);

  const double p[5] = {0.1, 0.2, 0.3, 0.4, 0.5};
  CHECK(uavfl_design_set(d, p, 5, 0.25, 0.3, 8.0) == UAVFL_OK);
  double got[5] = {};
  std::size_t n_p = 0;
  double pl = 0, beta = 0, v = 0;
  CHECK(uavfl_design_get(d, got, 5, &n_p, &pl, &beta, &v) == UAVFL_OK);
  CHECK(n_p == 5);
  for (int i = 0; i < 5; ++i) CHECK(got[i] == p[i]);
  CHECK(pl == 0.25);
  CHECK(beta == 0.3);
  CHECK(v == 8.0);
  CHECK(uavfl_design_get(d, got, 2, &n_p, &pl, &beta, &v) == UAVFL_ERR_ARGUMENT);
  CHECK(uavfl_design_set(d, nullptr, 5, 0.25, 0.3, 8.0) == UAVFL_ERR_ARGUMENT);

  // a design outside the feasible box is rejected by the experiments
  CHECK(uavfl_design_set(d, p, 5, 0.25, 1.5, 8.0) == UAVFL_OK);
  uavfl_result* r = nullptr;
  CHECK(uavfl_simulate(s, d, 5, 0.0, 1, &r) == UAVFL_ERR_ARGUMENT);
  CHECK(r == nullptr);
  uavfl_design_free(d);
  uavfl_scenario_free(s);
}

TEST_CASE("experiments through the C API") {
  uavfl_scenario* s = nullptr;
  REQUIRE(uavfl_scenario_from_json(R"({"experiment": {"mc_samples": 2000}})", &s) == UAVFL_OK);

  uavfl_result* r = nullptr;
  REQUIRE(uavfl_simulate(s, nullptr, 20, 1e-3, 4, &r) == UAVFL_OK);
  std::size_t rows = 0;
  CHECK(uavfl_result_row_count(r, &rows) == UAVFL_OK);
  CHECK(rows == 21);
  char* csv = nullptr;
  REQUIRE(uavfl_result_to_csv(r, &csv) == UAVFL_OK);
  const std::string first = take(csv);
  CHECK(first.rfind("schema,", 0) == 0);
  char* trace = nullptr;
  REQUIRE(uavfl_result_trace_csv(r, &trace) == UAVFL_OK);
  const std::string t = take(trace);
  CHECK(t.find('\n') == t.size() - 1);
  CHECK(uavfl_result_write_csv(r, "/nonexistent/dir/out.csv") == UAVFL_ERR_IO);
  uavfl_result_free(r);

  REQUIRE(uavfl_simulate(s, nullptr, 20, 1e-3, 4, &r) == UAVFL_OK);
  REQUIRE(uavfl_result_to_csv(r, &csv) == UAVFL_OK);
  CHECK(take(csv) == first);
  uavfl_result_free(r);

  const double eps[2] = {2e-3, 1e-3};
  REQUIRE(uavfl_validate_theorem(s, nullptr, eps, 2, 4, 9, &r) == UAVFL_OK);
  CHECK(uavfl_result_row_count(r, &rows) == UAVFL_OK);
  CHECK(rows == 2);
  uavfl_result_free(r);
  const double bad_eps[1] = {-1.0};
  CHECK(uavfl_validate_theorem(s, nullptr, bad_eps, 1, 4, 9, &r) != UAVFL_OK);
  uavfl_scenario_free(s);
}

TEST_CASE("infeasible optimization") {
  uavfl_scenario* s = nullptr;
  REQUIRE(uavfl_scenario_from_json(kInfeasibleJson, &s) == UAVFL_OK);
  uavfl_result* r = nullptr;
  uavfl_design* d = nullptr;
  CHECK(uavfl_optimize(s, 50, 1, &r, &d) == UAVFL_ERR_INFEASIBLE);
  CHECK(r == nullptr);
  CHECK(d == nullptr);
  uavfl_scenario_free(s);
}

TEST_CASE("cli exit codes") {
  TempDir tmp;
  const std::string bad = tmp.file("bad.json", R"({"radio": {"bw_up_hz": -1}})");
  const std::string broken = tmp.file("broken.json", "{");
  const std::string infeasible = tmp.file("infeasible.json", kInfeasibleJson);
  const std::string light = tmp.file("light.json", R"({"experiment": {"mc_samples": 2000}})");

  CHECK(run_cli("simulate --config \"" + light + "\" --max-rounds 10") == 0);
  CHECK(run_cli("simulate --config \"" + bad + "\"") == 2);
  CHECK(run_cli("simulate --config \"" + broken + "\"") == 2);
  CHECK(run_cli("optimize --config \"" + infeasible + "\" --samples-k 50") == 3);
  CHECK(run_cli("simulate --config \"" + light + "\" --out /nonexistent/dir/out.csv") == 4);
  CHECK(run_cli("simulate --no-such-flag") == 1);
  CHECK(run_cli("") == 1);
  CHECK(run_cli("simulate --config /nonexistent/file.json") == 1);
}

TEST_CASE("cli output is byte identical across runs") {
  TempDir tmp;
  const std::string light = tmp.file("light.json", R"({"experiment": {"mc_samples": 2000}})");
  const std::string a = (tmp.path / "a.csv").string();
  const std::string b = (tmp.path / "b.csv").string();
  const std::string args = "validate-theorem --config \"" + light + "\" --mc-runs 3 --seed 11 --eps 2e-3 1e-3";
  REQUIRE(run_cli(args + " --out \"" + a + "\"") == 0);
  REQUIRE(run_cli(args + " --out \"" + b + "\"") == 0);
  const std::string ca = slurp(a);
  CHECK(ca.size() > 0);
  CHECK(ca == slurp(b));
}

}
