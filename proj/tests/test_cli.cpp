#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "relent/cli.hpp"
#include "relent/evogame.hpp"
#include "relent/markov.hpp"
#include "relent/reactnet.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result relent_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = relent::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string model(const std::string& name) { return std::string(RELENT_MODELS_DIR) + "/" + name; }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("relent_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name, std::ios::binary) << text;
    return (path / name).string();
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

const json& channel(const json& report, const std::string& name) {
  for (const auto& ch : report["channels"]) {
    if (ch["name"] == name) return ch;
  }
  FAIL("missing channel " << name);
  throw std::logic_error("unreachable");
}

}  // namespace

TEST_CASE("content hash") {
  CHECK(relent::cli::content_hash("") == "cbf29ce484222325");
  CHECK(relent::cli::content_hash("a") == "af63dc4c8601ec8c");
  CHECK(relent::cli::content_hash("foobar") == "85944171f73967e8");
}

TEST_CASE("simulate: zero-sum replicator keeps I(ref,state) constant") {
  const auto r = relent_run({"simulate", "--model", model("rps.mat"), "--dynamics", "replicator", "--initial",
                             "0.5,0.3,0.2", "--ref", "0.3333333,0.3333333,0.3333334", "--t-end", "10", "--format",
                             "json"});
  REQUIRE(r.code == relent::cli::exit_ok);
  const auto doc = json::parse(r.out);
  CHECK(doc["columns"] == json({"t", "x1", "x2", "x3", "I(ref,state)", "I(state,ref)"}));
  const auto& ch = channel(doc["report"], "I(ref,state)");
  CHECK(ch["max"].get<double>() - ch["min"].get<double>() < 1e-6);
  CHECK(ch["verdict"] == "constant");
  CHECK(doc["t"].back() == 10.0);
}

TEST_CASE("simulate: two-state master equation with free energy") {
  TempDir dir;
  const auto r = relent_run({"simulate", "--model", model("two_state.mk"), "--dynamics", "master", "--initial", "1,0",
                             "--ref", "0.6666667,0.3333333", "--beta", "1", "--t-end", "10", "--monotone", "F(state)",
                             "--monotone", "I(state,ref)", "--out", dir.file("traj.csv"), "--report",
                             dir.file("report.json")});
  REQUIRE(r.code == relent::cli::exit_ok);
  CHECK(r.out.empty());
  const auto report = json::parse(slurp(dir.file("report.json")));
  CHECK(channel(report, "F(state)")["verdict"] == "nonincreasing");
  CHECK(channel(report, "I(state,ref)")["final"].get<double>() < 1e-8);
  CHECK(channel(report, "I(ref,state)")["final"].get<double>() < 1e-8);
  CHECK(report["model"]["fnv1a64"] == relent::cli::content_hash(slurp(model("two_state.mk"))));
  CHECK(report["exit_status"] == 0);

  const auto csv = slurp(dir.file("traj.csv"));
  std::istringstream lines(csv);
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "t,s1,s2,I(ref,state),I(state,ref),F(state)");
  // I(ref, e1) is infinite at the start.
  CHECK(first.rfind("0,1,0,inf,", 0) == 0);
}

TEST_CASE("simulate: Michaelis-Menten conserved channels") {
  TempDir dir;
  const auto r = relent_run({"simulate", "--model", model("mm.rn"), "--dynamics", "rate", "--initial", "1,1,0,0",
                             "--t-end", "50", "--out", dir.file("t.csv"), "--report", dir.file("r.json")});
  REQUIRE(r.code == relent::cli::exit_ok);
  const auto report = json::parse(slurp(dir.file("r.json")));
  for (const char* name : {"E+I", "S+I+P"}) {
    const auto& ch = channel(report, name);
    CHECK(std::abs(ch["max"].get<double>() - 1.0) < 1e-6);
    CHECK(std::abs(ch["min"].get<double>() - 1.0) < 1e-6);
  }
}

TEST_CASE("simulate: population channels under rate dynamics") {
  const auto r = relent_run({"simulate", "--model", model("ab.rn"), "--initial", "3,0.5", "--ref", "2,1", "--t-end",
                             "20", "--interval", "0.5", "--monotone", "I(state,ref)", "--format", "json"});
  REQUIRE(r.code == relent::cli::exit_ok);
  const auto doc = json::parse(r.out);
  CHECK(doc["t"].size() == 41);
  CHECK(channel(doc["report"], "I(state,ref)")["verdict"] == "nonincreasing");
  CHECK(channel(doc["report"], "A+B")["verdict"] == "constant");
}

TEST_CASE("exit code 3: expected-monotone channel increases") {
  const auto r = relent_run({"simulate", "--model", model("rps.mat"), "--initial", "0.5,0.3,0.2", "--ref",
                             "0.2,0.3,0.5", "--t-end", "5", "--monotone", "I(ref,state)", "--out", "-"});
  CHECK(r.code == relent::cli::exit_not_monotone);
  CHECK(r.err.find("expected nonincreasing") != std::string::npos);
  // The same run without the expectation succeeds.
  CHECK(relent_run({"simulate", "--model", model("rps.mat"), "--initial", "0.5,0.3,0.2", "--ref", "0.2,0.3,0.5",
                    "--t-end", "5"})
            .code == relent::cli::exit_ok);
  // A looser slack accepts the increase.
  CHECK(relent_run({"simulate", "--model", model("rps.mat"), "--initial", "0.5,0.3,0.2", "--ref", "0.2,0.3,0.5",
                    "--t-end", "5", "--monotone", "I(ref,state)", "--slack", "1"})
            .code == relent::cli::exit_ok);
}

TEST_CASE("exit code 2: usage and parse errors") {
  TempDir dir;
  using relent::cli::exit_usage;
  CHECK(relent_run({}).code == exit_usage);
  CHECK(relent_run({"frobnicate"}).code == exit_usage);
  CHECK(relent_run({"simulate", "--model", model("rps.mat"), "--initial", "1,0,0"}).code == exit_usage);
  CHECK(relent_run({"simulate", "--model", model("rps.mat"), "--initial", "1,0,0", "--t-end", "1", "--method",
                    "euler"})
            .code == exit_usage);
  CHECK(relent_run({"simulate", "--model", dir.file("missing.mat"), "--initial", "1", "--t-end", "1"}).code ==
        exit_usage);
  CHECK(relent_run({"simulate", "--model", model("mm.rn"), "--dynamics", "replicator", "--initial", "1,1,0,0",
                    "--t-end", "1"})
            .code == exit_usage);
  CHECK(relent_run({"simulate", "--model", model("rps.mat"), "--dynamics", "master", "--initial", "1,0,0", "--t-end",
                    "1"})
            .code == exit_usage);
  CHECK(relent_run({"simulate", "--model", model("rps.mat"), "--initial", "0.5,0.5", "--t-end", "1"}).code ==
        exit_usage);
  CHECK(relent_run({"simulate", "--model", model("rps.mat"), "--initial", "0.5,0.6,0.1", "--t-end", "1"}).code ==
        exit_usage);
  CHECK(relent_run({"simulate", "--model", model("rps.mat"), "--initial", "a,b,c", "--t-end", "1"}).code ==
        exit_usage);
  CHECK(relent_run({"simulate", "--model", model("rps.mat"), "--initial", "1,0,0", "--t-end", "1", "--monotone",
                    "nope"})
            .code == exit_usage);
  CHECK(relent_run({"simulate", "--model", model("rps.mat"), "--initial", "1,0,0", "--t-end", "1", "--beta", "1"})
            .code == exit_usage);
  CHECK(relent_run({"simulate", "--model", model("rps.mat"), "--initial", "1,0,0", "--t-end", "1", "--step", "-1"})
            .code == exit_usage);
  const auto unknown = dir.write("model.txt", "2\n1 0\n0 1\n");
  CHECK(relent_run({"simulate", "--model", unknown, "--initial", "1,0", "--t-end", "1"}).code == exit_usage);
  CHECK(relent_run({"simulate", "--model", unknown, "--kind", "game", "--initial", "1,0", "--t-end", "1"}).code ==
        relent::cli::exit_ok);

  const auto bad = dir.write("bad.mk", "states: a b\na -> c : 1\n");
  const auto r = relent_run({"analyze", "steady-states", "--model", bad});
  CHECK(r.code == exit_usage);
  CHECK(r.err == "error: " + bad + ":2:6: unknown state 'c'\n");

  const auto bad_rate = dir.write("bad.rn", "A -> B : 0\n");
  CHECK(relent_run({"analyze", "complex-balance", "--model", bad_rate, "--point", "1,1"}).code == exit_usage);
  CHECK(relent_run({"analyze", "steady-states", "--model", model("mm.rn")}).code == exit_usage);
  CHECK(relent_run({"analyze", "complex-balance", "--model", model("ab.rn"), "--point", "1"}).code == exit_usage);
  CHECK(relent_run({"analyze", "game", "--matrix", model("pd.mat"), "--strategy", "0,1", "--check", "strict"}).code ==
        exit_usage);
  CHECK(relent_run({"analyze", "energies", "--model", model("two_state.mk"), "--beta", "0"}).code == exit_usage);
  CHECK(relent_run({"analyze", "energies", "--model", model("two_state.mk"), "--beta", "1", "--ground", "zz"}).code ==
        exit_usage);
}

TEST_CASE("analyze: exit codes 0, 1 and 4") {
  TempDir dir;
  auto r = relent_run({"analyze", "game", "--matrix", model("pd.mat"), "--strategy", "0,1", "--check", "dominant"});
  CHECK(r.code == relent::cli::exit_ok);
  CHECK(r.out.find("verdict: holds") != std::string::npos);

  r = relent_run({"analyze", "game", "--matrix", model("pd.mat"), "--strategy", "1,0", "--check", "nash"});
  CHECK(r.code == relent::cli::exit_fails);
  CHECK(r.out.find("witness: 0,1") != std::string::npos);

  CHECK(relent_run({"analyze", "game", "--matrix", model("hawk_dove.mat"), "--strategy", "0.6666666666666666,0.33333333333333337",
                    "--check", "ess"})
            .code == relent::cli::exit_ok);
  CHECK(relent_run({"analyze", "game", "--matrix", model("pd.mat"), "--strategy", "0,1", "--check", "thomas"}).code ==
        relent::cli::exit_ok);

  // q = e1 with A q = 0: every pure strategy ties, the tangent curvature is
  // indefinite, but the payoff form is copositive on the cone of invasions.
  const auto cone = dir.write("cone.mat", "3\n0 0 0\n0 -1 -1.5\n0 -1.5 -1\n");
  r = relent_run({"analyze", "game", "--matrix", cone, "--strategy", "1,0,0", "--check", "ess", "--format", "json"});
  CHECK(r.code == relent::cli::exit_inconclusive);
  CHECK(json::parse(r.out)["verdict"] == "inconclusive");

  r = relent_run({"analyze", "complex-balance", "--model", model("ab.rn"), "--point", "2,1"});
  CHECK(r.code == relent::cli::exit_ok);
  CHECK(r.out.find("balanced: yes") != std::string::npos);
  r = relent_run({"analyze", "complex-balance", "--model", model("ab.rn"), "--point", "1,1", "--format", "json"});
  CHECK(r.code == relent::cli::exit_fails);
  const auto doc = json::parse(r.out);
  CHECK(doc["residuals"][0]["complex"] == "A");
  CHECK(doc["residuals"][0]["residual"] == 1.0);

  r = relent_run({"analyze", "steady-states", "--model", model("chain.mk"), "--format", "json"});
  CHECK(r.code == relent::cli::exit_ok);
  const auto states = json::parse(r.out)["steady_states"];
  REQUIRE(states.size() == 1);
  CHECK(states[0]["q"] == json({0.0, 0.0, 1.0}));
  CHECK(states[0]["residual"].get<double>() < 1e-10);

  const auto split = dir.write("split.mk", "states: a b\n");
  CHECK(relent_run({"analyze", "energies", "--model", split, "--beta", "1"}).code == relent::cli::exit_fails);
  CHECK(relent_run({"analyze", "energies", "--model", model("chain.mk"), "--beta", "1"}).code ==
        relent::cli::exit_fails);

  r = relent_run({"analyze", "energies", "--model", model("two_state.mk"), "--beta", "1", "--format", "json"});
  CHECK(r.code == relent::cli::exit_ok);
  const auto e = json::parse(r.out);
  CHECK(e["partition"].get<double>() == doctest::Approx(1.5));
  CHECK(e["energies"][1]["energy"].get<double>() == doctest::Approx(std::log(2.0)));

  r = relent_run({"analyze", "energies", "--model", model("two_state.mk"), "--beta", "1", "--ground", "s2"});
  CHECK(r.code == relent::cli::exit_ok);
  CHECK(r.out.find("s2 0.3333333333333333 0\n") != std::string::npos);
}

TEST_CASE("determinism") {
  TempDir dir;
  const std::vector<std::vector<std::string>> commands{
      {"simulate", "--model", model("hiv.rn"), "--initial", "random", "--seed", "7", "--t-end", "5", "--format", "json"},
      {"simulate", "--model", model("predator_prey.rn"), "--initial", "1,0.5", "--ref", "2,2", "--t-end", "10"},
      {"simulate", "--model", model("rps.mat"), "--method", "rk4", "--step", "0.01", "--initial", "random", "--seed",
       "3", "--ref", "0.2,0.3,0.5", "--t-end", "2", "--interval", "0.1"},
      {"analyze", "game", "--matrix", model("rps.mat"), "--strategy", "0.2,0.3,0.5", "--check", "dominant", "--seed",
       "11", "--format", "json"},
      {"analyze", "steady-states", "--model", model("cycle.rn")},
  };
  for (const auto& args : commands) {
    const auto a = relent_run(args);
    const auto b = relent_run(args);
    CHECK(a.code == b.code);
    CHECK(a.out == b.out);
    CHECK(a.err == b.err);
    CHECK(!a.out.empty());
  }
  // Different seeds give different random initial states.
  CHECK(relent_run({"simulate", "--model", model("hiv.rn"), "--initial", "random", "--seed", "1", "--t-end", "1"}).out !=
        relent_run({"simulate", "--model", model("hiv.rn"), "--initial", "random", "--seed", "2", "--t-end", "1"}).out);

  // Files written with --out match the standard-output bytes.
  const std::vector<std::string> base{"simulate", "--model", model("mm.rn"), "--initial", "1,1,0,0", "--t-end", "3"};
  auto with_out = base;
  with_out.insert(with_out.end(), {"--out", dir.file("mm.csv")});
  REQUIRE(relent_run(with_out).code == 0);
  CHECK(slurp(dir.file("mm.csv")) == relent_run(base).out);
}

TEST_CASE("bundled models round-trip through the serializers") {
  for (const char* name : {"rps.mat", "pd.mat", "hawk_dove.mat"}) {
    const auto g = relent::parse_game_matrix(slurp(model(name)));
    const auto text = relent::serialize_game_matrix(g);
    CHECK(relent::parse_game_matrix(text) == g);
    CHECK(relent::serialize_game_matrix(relent::parse_game_matrix(text)) == text);
  }
  for (const char* name : {"two_state.mk", "chain.mk"}) {
    const auto p = relent::parse_markov(slurp(model(name)));
    const auto text = relent::serialize_markov(p);
    CHECK(relent::parse_markov(text) == p);
    CHECK(relent::serialize_markov(relent::parse_markov(text)) == text);
  }
  for (const char* name : {"mm.rn", "ab.rn", "hiv.rn", "predator_prey.rn", "cycle.rn"}) {
    const auto n = relent::parse_network(slurp(model(name)));
    const auto text = relent::serialize_network(n);
    CHECK(relent::parse_network(text) == n);
    CHECK(relent::serialize_network(relent::parse_network(text)) == text);
  }
}
