#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "core/error.hpp"
#include "core/textio.hpp"
#include "run/run.hpp"

using namespace sdr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sdrelax_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string str() const { return path.string(); }
};

const char* kBulkConfig = R"json({
  "command": "relax-bulk",
  "seed": 11,
  "out_prefix": "h10",
  "bulk": {"catalog": "quadratic"},
  "surface": {"catalog": "norm-jump"},
  "problem": {"N": 1, "d": 1, "n": 8, "A": [[1]], "B": [[0]], "p": 2}
})json";

std::string csv_of(const RunOutcome& outcome) {
    for (const auto& f : outcome.output_files)
        if (f.size() > 4 && f.substr(f.size() - 4) == ".csv") return read_file(f);
    return "";
}

}  // namespace

TEST_CASE("relax-bulk config produces the exact-path value") {
    TempDir tmp;
    RunOutcome outcome = run_config_text(kBulkConfig, "relax-bulk", tmp.str(), -1);
    std::string csv = csv_of(outcome);
    CHECK(csv.find("config_hash,command,kind,n,eps,seed,value") == 0);
    CHECK(csv.find(",relax-bulk,bulk,8,1,11,1,") != std::string::npos);
    CHECK(outcome.manifest_json.find("config_hash") != std::string::npos);
}

TEST_CASE("reruns reproduce the CSV byte for byte") {
    TempDir a, b;
    RunOutcome ra = run_config_text(kBulkConfig, "", a.str(), -1);
    RunOutcome rb = run_config_text(kBulkConfig, "", b.str(), -1);
    CHECK(csv_of(ra) == csv_of(rb));
    CHECK(ra.manifest_json == rb.manifest_json);
}

TEST_CASE("seed override changes the hash column but not determinism") {
    TempDir a, b;
    std::string csv1 = csv_of(run_config_text(kBulkConfig, "", a.str(), 77));
    std::string csv2 = csv_of(run_config_text(kBulkConfig, "", b.str(), 77));
    CHECK(csv1 == csv2);
    TempDir c;
    std::string csv3 = csv_of(run_config_text(kBulkConfig, "", c.str(), -1));
    CHECK(csv1 != csv3);  // different seed, different hash column
}

TEST_CASE("mismatched command is a config error") {
    TempDir tmp;
    CHECK_THROWS_AS(run_config_text(kBulkConfig, "validate", tmp.str(), -1), Error);
}

TEST_CASE("validate config marks the homogeneity failure of |lambda|^2") {
    TempDir tmp;
    const char* cfg = R"json({
      "command": "validate",
      "seed": 5,
      "out_prefix": "psi2",
      "surface": {"formula": "normsq(lambda)"},
      "problem": {"target": "surface", "N": 1, "d": 1, "n_samples": 3000}
    })json";
    RunOutcome outcome = run_config_text(cfg, "validate", tmp.str(), -1);
    std::string csv = csv_of(outcome);
    CHECK(csv.find("hyp-psi3") != std::string::npos);
    CHECK(csv.find("fail") != std::string::npos);
}

TEST_CASE("blowup config emits one row per ladder entry") {
    TempDir tmp;
    const char* cfg = R"json({
      "command": "blowup",
      "seed": 1,
      "out_prefix": "blow",
      "bulk": {"catalog": "quadratic"},
      "surface": {"catalog": "norm-jump"},
      "problem": {"mode": "bulk", "N": 1, "d": 1, "n": 8,
                  "x0": [0], "xi": [[1]], "means": [[[1]]],
                  "eps_ladder": [1.0, 0.5, 0.25],
                  "omega": {"center": [0], "side": 16}}
    })json";
    RunOutcome outcome = run_config_text(cfg, "blowup", tmp.str(), -1);
    std::string csv = csv_of(outcome);
    int rows = 0;
    for (char ch : csv)
        if (ch == '\n') ++rows;
    CHECK(rows == 4);  // header + 3 entries
}

TEST_CASE("multilevel config writes both methods and the verdict") {
    TempDir tmp;
    const char* cfg = R"json({
      "command": "multilevel",
      "seed": 2,
      "out_prefix": "ml",
      "bulk": {"catalog": "quadratic"},
      "surface": {"catalog": "norm-jump"},
      "problem": {"N": 1, "d": 1, "n": 1,
                  "g_affine": {"matrix": [[1]]},
                  "G1": [[0]], "G2": [[0]], "budget": 4}
    })json";
    RunOutcome outcome = run_config_text(cfg, "multilevel", tmp.str(), -1);
    std::string csv = csv_of(outcome);
    CHECK(csv.find(",direct,") != std::string::npos);
    CHECK(csv.find(",iterated,") != std::string::npos);
}

TEST_CASE("approx config: errors and clause verdicts") {
    TempDir tmp;
    const char* cfg = R"json({
      "command": "approx",
      "seed": 3,
      "out_prefix": "appr",
      "problem": {"N": 1, "d": 1, "n": 1, "center": [0.5], "side": 1.0,
                  "g_affine": {"matrix": [[1]]}, "G": [[0]],
                  "index_ladder": [4, 8, 16]}
    })json";
    RunOutcome outcome = run_config_text(cfg, "approx", tmp.str(), -1);
    std::string csv = csv_of(outcome);
    CHECK(csv.find("approx-l1") != std::string::npos);
    CHECK(csv.find("0.125") != std::string::npos);

    const char* cfg2 = R"json({
      "command": "approx",
      "seed": 3,
      "out_prefix": "appr2",
      "problem": {"N": 1, "d": 1, "n": 1, "center": [0.5], "side": 1.0,
                  "g_affine": {"matrix": [[1]]}, "G1": [[0]], "G2": [[2]],
                  "levels": 2, "index_ladder": [2, 4, 8, 16]}
    })json";
    RunOutcome outcome2 = run_config_text(cfg2, "approx", tmp.str(), -1);
    std::string csv2 = csv_of(outcome2);
    CHECK(csv2.find("clause-i,") != std::string::npos);
    CHECK(csv2.find("pass") != std::string::npos);
    CHECK(csv2.find("fail") == std::string::npos);
}

TEST_CASE("config errors carry positions or causes") {
    TempDir tmp;
    CHECK_THROWS_AS(run_config_text("{ not json", "", tmp.str(), -1), Error);
    CHECK_THROWS_AS(run_config_text("{\"command\": \"unknown-cmd\"}", "", tmp.str(), -1), Error);
    CHECK_THROWS_AS(run_config_file("/nonexistent/path.json", "", tmp.str(), -1), Error);
}

TEST_CASE("dirichlet config with an affine datum") {
    TempDir tmp;
    const char* cfg = R"json({
      "command": "dirichlet",
      "seed": 4,
      "out_prefix": "dir",
      "bulk": {"catalog": "quadratic"},
      "surface": {"catalog": "norm-jump"},
      "problem": {"N": 1, "d": 1, "n": 8,
                  "affine": {"matrix": [[1]]},
                  "means": [[[1]]], "p": 2}
    })json";
    RunOutcome outcome = run_config_text(cfg, "dirichlet", tmp.str(), -1);
    std::string csv = csv_of(outcome);
    // g affine with mean B = A: value W(A) vol = 1
    CHECK(csv.find(",dirichlet-general,8,1,4,1,") != std::string::npos);
}
