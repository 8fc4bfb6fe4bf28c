#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "gdl/cli.hpp"
#include "gdl/dictionary.hpp"
#include "gdl/io.hpp"

namespace fs = std::filesystem;
using namespace gdl;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "gdl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path workdir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("gdl_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

void generate() {
  static bool done = false;
  if (done) return;
  REQUIRE(run({"gen", "--dataset", "d1", "--per-class", "4", "--min-order", "10", "--max-order", "15", "--seed", "3",
               "--out", path("d1.jsonl")})
              .code == 0);
  done = true;
}

std::vector<std::string> fit_args(const std::string& out, const std::string& epochs = "1") {
  return {"fit", "--data", path("d1.jsonl"), "--out", out, "--atoms", "3", "--order", "5",
          "--epochs", epochs, "--batch", "4", "--seed", "7", "--lambda", "0.001"};
}

}  // namespace

TEST_CASE("gen writes a valid labeled dataset deterministically") {
  generate();
  const auto data = read_dataset(path("d1.jsonl"));
  CHECK(data.size() == 12);
  for (const auto& g : data) {
    CHECK_NOTHROW(validate_graph(g));
    CHECK(g.label.has_value());
  }
  REQUIRE(run({"gen", "--dataset", "d1", "--per-class", "4", "--min-order", "10", "--max-order", "15", "--seed", "3",
               "--out", path("d1b.jsonl")})
              .code == 0);
  CHECK(slurp(path("d1.jsonl")) == slurp(path("d1b.jsonl")));
  REQUIRE(run({"gen", "--dataset", "d2", "--count", "5", "--out", path("d2.jsonl")}).code == 0);
  CHECK(read_dataset(path("d2.jsonl")).size() == 5);
}

TEST_CASE("fit, embed, dist, cluster and eval") {
  generate();
  auto args = fit_args(path("dict.json"));
  args.insert(args.end(), {"--loss", path("loss.csv")});
  const Run f = run(args);
  REQUIRE(f.code == 0);
  CHECK(f.out.find("final_loss") != std::string::npos);
  CHECK(slurp(path("loss.csv")).rfind("step,loss,running_mean,event\n", 0) == 0);
  REQUIRE(run(fit_args(path("dict2.json"))).code == 0);
  CHECK(slurp(path("dict.json")) == slurp(path("dict2.json")));

  REQUIRE(run({"embed", "--data", path("d1.jsonl"), "--dict", path("dict.json"), "--out", path("emb.csv")}).code == 0);
  const std::string emb = slurp(path("emb.csv"));
  CHECK(emb.rfind("index,w0,w1,w2,loss\n", 0) == 0);
  CHECK(std::count(emb.begin(), emb.end(), '\n') == 13);

  REQUIRE(run({"dist", "--data", path("d1.jsonl"), "--dict", path("dict.json"), "--out", path("dist.csv")}).code == 0);
  std::ifstream dist(path("dist.csv"));
  std::string line;
  int row = 0;
  while (std::getline(dist, line)) {
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    REQUIRE(vals.size() == 12);
    CHECK(vals[row] == 0.0);
    ++row;
  }
  CHECK(row == 12);

  REQUIRE(run({"dist", "--data", path("d1.jsonl"), "--dict", path("dict.json"), "--out", path("k.csv"), "--gamma",
               "0"})
              .code == 0);
  CHECK(slurp(path("k.csv")).find("0.") == std::string::npos);

  const Run c = run({"cluster", "--data", path("d1.jsonl"), "--dict", path("dict.json"), "--out", path("labels.csv"),
                     "--k", "3"});
  REQUIRE(c.code == 0);
  CHECK(c.out.find("rand_index") != std::string::npos);

  const Run e = run({"eval", "--data", path("d1.jsonl"), "--dict", path("dict.json")});
  REQUIRE(e.code == 0);
  CHECK(e.out.find("pearson_mahalanobis_gw_embedded") != std::string::npos);
  CHECK(e.out.find("pearson_gw_input_mahalanobis") != std::string::npos);
}

TEST_CASE("fit with zero epochs returns the initialization") {
  generate();
  REQUIRE(run(fit_args(path("init.json"), "0")).code == 0);
  const auto data = read_dataset(path("d1.jsonl"));
  TrainConfig cfg;
  cfg.S = 3;
  cfg.N = 5;
  cfg.seed = 7;
  std::mt19937_64 rng(cfg.seed);
  const Dictionary expected = init_dictionary(data, cfg, rng);
  const Dictionary got = load_dictionary(path("init.json"));
  REQUIRE(got.size() == 3);
  for (int s = 0; s < 3; ++s) CHECK(got.atoms[s] == expected.atoms[s]);
}

TEST_CASE("stream") {
  {
    std::ofstream spec(path("stream.json"));
    spec << R"({"segments": [{"class": 1, "count": 40}, {"class": 2, "count": 40}]})";
  }
  const Run s = run({"stream", "--spec", path("stream.json"), "--out", path("stream.csv"), "--atoms", "2", "--order",
                     "5", "--batch", "8", "--seed", "1"});
  REQUIRE(s.code == 0);
  CHECK(s.out.rfind("events", 0) == 0);
  const std::string csv = slurp(path("stream.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
}

TEST_CASE("errors are one machine-parsable line with a nonzero exit") {
  const Run missing = run({"fit", "--data", path("nope.jsonl"), "--out", path("x.json")});
  CHECK(missing.code != 0);
  CHECK(missing.err.rfind("error: IoError: ", 0) == 0);
  CHECK(std::count(missing.err.begin(), missing.err.end(), '\n') == 1);

  {
    std::ofstream bad(path("bad.jsonl"));
    bad << "{\"C\": [[0, 1], [2, 0]]}\n";
  }
  const Run asym = run({"embed", "--data", path("bad.jsonl"), "--dict", path("dict.json"), "--out", path("e.csv")});
  CHECK(asym.code != 0);
  CHECK(asym.err.rfind("error: ", 0) == 0);

  const Run arg = run({"cluster", "--k"});
  CHECK(arg.code != 0);
  CHECK(arg.err.rfind("error: BadArgument: ", 0) == 0);
}

TEST_CASE("the installed binary behaves like the in-process entry point") {
  const char* exe = std::getenv("GDL_CLI");
  if (exe == nullptr) {
    MESSAGE("GDL_CLI not set, skipping subprocess check");
    return;
  }
  const std::string out = path("sub.jsonl");
  const std::string cmd = std::string(exe) + " gen --dataset d2 --count 3 --seed 5 --out " + out;
  CHECK(std::system(cmd.c_str()) == 0);
  REQUIRE(run({"gen", "--dataset", "d2", "--count", "3", "--seed", "5", "--out", path("sub2.jsonl")}).code == 0);
  CHECK(slurp(out) == slurp(path("sub2.jsonl")));
  const std::string bad = std::string(exe) + " fit --data /nonexistent.jsonl --out " + path("y.json") + " 2>/dev/null";
  CHECK(std::system(bad.c_str()) != 0);
}
