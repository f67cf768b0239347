// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "avoco/cli.hpp"

using namespace avoco;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("avoco_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const std::vector<std::string> kSmallGen = {"gen", "--count", "12", "--patches", "8", "--dim", "3"};
const std::vector<std::string> kSmallTrain = {"train", "--patches", "8", "--dim", "3", "--steps", "40", "--hidden", "6,6"};

std::vector<std::string> with_dir(std::vector<std::string> args, const fs::path& dir) {
  args.push_back("--output-dir");
  args.push_back(dir.string());
  return args;
}

}  // namespace

TEST_SUITE("cli-harness") {
  TEST_CASE("gen, train and allocate round trip") {
    const fs::path dir = fresh_dir("roundtrip");
    auto g = run(with_dir(kSmallGen, dir));
    REQUIRE(g.code == kExitOk);
    CHECK(g.out.find("wrote 12 scenes") != std::string::npos);
    CHECK(g.out.find("min adjacent tier separation of mean C") != std::string::npos);
    CHECK(fs::exists(dir / "dataset.avds"));

    auto t = run(with_dir(kSmallTrain, dir));
    REQUIRE(t.code == kExitOk);
    CHECK(t.out.find("monotonic") != std::string::npos);
    CHECK(fs::exists(dir / "predictor.avck"));
    CHECK(slurp(dir / "train_log.csv").rfind("step,rate_loss,comp_loss,total,mean_expected_count,mean_C\n", 0) == 0);

    auto a = run(with_dir({"allocate"}, dir));
    REQUIRE(a.code == kExitOk);
    CHECK(a.out.rfind("scene,dial,entropy,attention_variance,pi_1,pi_2,pi_4,K,expanded_length\n", 0) == 0);
    CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 13);

    auto one = run(with_dir({"allocate", "--dial", "0.3", "--patches", "8", "--dim", "3", "--out", "alloc.csv"}, dir));
    REQUIRE(one.code == kExitOk);
    const std::string csv = slurp(dir / "alloc.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    // The default template has 10 tokens, so expanded length is 9 + K.
    const auto last = csv.substr(csv.rfind('\n', csv.size() - 2) + 1);
    const auto k = std::stoi(last.substr(last.rfind(',', last.rfind(',') - 1) + 1));
    const auto len = std::stoi(last.substr(last.rfind(',') + 1));
    CHECK(len == 9 + k);
  }

  TEST_CASE("serial flag gives the same outputs") {
    const fs::path a = fresh_dir("par"), b = fresh_dir("ser");
    REQUIRE(run(with_dir(kSmallGen, a)).code == kExitOk);
    auto gs = with_dir(kSmallGen, b);
    gs.push_back("--serial");
    REQUIRE(run(gs).code == kExitOk);
    CHECK(slurp(a / "dataset.avds") == slurp(b / "dataset.avds"));
    REQUIRE(run(with_dir(kSmallTrain, a)).code == kExitOk);
    auto ts = with_dir(kSmallTrain, b);
    ts.push_back("--serial");
    REQUIRE(run(ts).code == kExitOk);
    CHECK(slurp(a / "predictor.avck") == slurp(b / "predictor.avck"));
    CHECK(slurp(a / "train_log.csv") == slurp(b / "train_log.csv"));
  }

  TEST_CASE("validation errors exit with 1") {
    CHECK(run({"gen", "--count", "0"}).code == kExitValidation);
    CHECK(run({"gen", "--bogus"}).code == kExitValidation);
    CHECK(run({}).code == kExitValidation);
    CHECK(run({"train", "--candidates", "4,2,1"}).code == kExitValidation);
    CHECK(run({"allocate", "--template", "no placeholder here"}).code == kExitValidation);
    CHECK(run({"allocate", "--dial", "2"}).code == kExitValidation);
    const auto r = run({"gen", "--tiers", "0"});
    CHECK(r.code == kExitValidation);
    CHECK(r.err.find("tier") != std::string::npos);
  }

  TEST_CASE("I/O errors exit with 3") {
    const fs::path dir = fresh_dir("io");
    CHECK(run(with_dir({"train"}, dir)).code == kExitIo);
    CHECK(run(with_dir({"allocate"}, dir)).code == kExitIo);
    CHECK(run({"retention", "--table", (dir / "missing.csv").string()}).code == kExitIo);
    std::ofstream(dir / "dataset.avds", std::ios::binary) << "AVDS1\x02";
    CHECK(run(with_dir({"train"}, dir)).code == kExitIo);
  }

  TEST_CASE("numeric failures exit with 2, degenerate bounds with 1") {
    CHECK(run({"gradcheck", "--instances", "1", "--hidden", "4,4", "--corrupt", "mlp"}).code == kExitNumeric);
    const fs::path dir = fresh_dir("table");
    std::ofstream(dir / "t.csv") << "model,benchmark,value\nUpper Bound,B,10\nLower Bound,B,10\nM,B,5\n";
    CHECK(run({"retention", "--table", (dir / "t.csv").string()}).code == kExitValidation);
  }

  TEST_CASE("gradcheck with no instances has nothing to check") {
    const auto r = run({"gradcheck", "--instances", "0"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("no parameters to check") != std::string::npos);
  }

  TEST_CASE("retention report on the shipped table") {
    const auto r = run({"retention", "--table", std::string(AVOCO_SOURCE_DIR) + "/data/retention_table.csv"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("VoCo-LLaMA / GQA: 84.19%") != std::string::npos);
    CHECK(r.out.find("Q-Former average: 57.22% (published 57.2: ok)") != std::string::npos);
    CHECK(r.out.find("MISMATCH") == std::string::npos);
  }

  TEST_CASE("config file, environment and flags") {
    const fs::path dir = fresh_dir("config");
    std::ofstream(dir / "run.ini") << "count=9\npatches=8\ndim=3\nseed=21\n";
    auto r = run(with_dir({"gen", "--config", (dir / "run.ini").string()}, dir));
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("wrote 9 scenes") != std::string::npos);
    const std::string from_config = slurp(dir / "dataset.avds");

    r = run(with_dir({"gen", "--config", (dir / "run.ini").string(), "--count", "6"}, dir));
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("wrote 6 scenes") != std::string::npos);

    ::setenv("AVOCO_SEED", "21", 1);
    r = run(with_dir({"gen", "--count", "9", "--patches", "8", "--dim", "3"}, dir));
    CHECK(slurp(dir / "dataset.avds") == from_config);
    ::setenv("AVOCO_SEED", "22", 1);
    r = run(with_dir({"gen", "--count", "9", "--patches", "8", "--dim", "3"}, dir));
    CHECK(slurp(dir / "dataset.avds") != from_config);
    r = run(with_dir({"gen", "--count", "9", "--patches", "8", "--dim", "3", "--seed", "21"}, dir));
    CHECK(slurp(dir / "dataset.avds") == from_config);
    ::unsetenv("AVOCO_SEED");

    const fs::path env_dir = fresh_dir("envdir");
    ::setenv("AVOCO_OUTPUT_DIR", env_dir.string().c_str(), 1);
    CHECK(run(kSmallGen).code == kExitOk);
    ::unsetenv("AVOCO_OUTPUT_DIR");
    CHECK(fs::exists(env_dir / "dataset.avds"));
  }

  TEST_CASE("help") {
    const auto r = run({"--help"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("gradcheck") != std::string::npos);
  }
}
