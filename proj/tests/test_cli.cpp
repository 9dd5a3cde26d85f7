#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "elmcsi/cli.hpp"
#include "elmcsi/results_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "elmcsi");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = elmcsi::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "elmcsi_cli_tests";
  fs::create_directories(dir);
  return (dir / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream s;
  s << is.rdbuf();
  return s.str();
}

const std::vector<std::string> kSmall = {"--M", "32", "--N", "4", "--Nt", "300", "--seed", "5"};

}  // namespace

TEST_CASE("overhead prints the table cells") {
  const auto r = run({"overhead", "--M", "512", "--N", "16"});
  CHECK(r.code == 0);
  CHECK(r.out.find("4,198,400") != std::string::npos);
  CHECK(r.out.find("33,606,208") != std::string::npos);
  CHECK(r.out.find("40.031") != std::string::npos);
}

TEST_CASE("sweep writes one row per method and SNR point") {
  const auto path = scratch("r.csv");
  std::vector<std::string> args = {"sweep", "--snr", "0:2:20", "--out", path, "--min-trials", "20", "--bit-cap", "5000",
                                   "--quiet"};
  args.insert(args.end(), kSmall.begin(), kSmall.end());
  const auto r = run(args);
  REQUIRE(r.code == 0);
  const auto rows = elmcsi::harness::load_results(path);
  CHECK(rows.size() == 22);
  int elm = 0, base = 0;
  for (const auto& row : rows) (row.method == "elm" ? elm : base)++;
  CHECK(elm == 11);
  CHECK(base == 11);
}

TEST_CASE("sweep reads a config file and lets flags override it") {
  const auto cfg = scratch("exp.cfg");
  {
    std::ofstream os(cfg);
    os << "M = 32\nN = 4\nNt = 300\nsnr = 0, 10\nmethods = baseline\nnmse_min_trials = 10\nber_bit_cap = 2000\n";
  }
  const auto json = scratch("r.json");
  const auto r = run({"sweep", "--config", cfg, "--snr", "5", "--out", json, "--quiet"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(slurp(json));
  REQUIRE(doc.size() == 1);
  CHECK(doc[0]["snr_db"] == 5.0);
  CHECK(doc[0]["method"] == "baseline");

  const auto to_stdout = run({"sweep", "--config", cfg, "--quiet"});
  CHECK(to_stdout.code == 0);
  CHECK(to_stdout.out.rfind("method,snr_db,", 0) == 0);
}

TEST_CASE("errors give a nonzero exit and a message") {
  const auto missing = run({"sweep", "--config", "/no/such/exp.cfg"});
  CHECK(missing.code != 0);
  CHECK(missing.err.find("/no/such/exp.cfg") != std::string::npos);

  const auto bad_cfg_path = scratch("bad.cfg");
  {
    std::ofstream os(bad_cfg_path);
    os << "M = 32\nthis is not a setting\n";
  }
  const auto bad = run({"sweep", "--config", bad_cfg_path});
  CHECK(bad.code != 0);
  CHECK(bad.err.find("bad.cfg:2") != std::string::npos);

  CHECK(run({"sweep", "--frobnicate"}).code != 0);
  CHECK(run({}).code != 0);
  CHECK(run({"sweep", "--M", "48"}).code != 0);
  CHECK(run({"sweep", "--format", "xml", "--methods", "baseline", "--M", "32", "--N", "4", "--snr", "0",
             "--min-trials", "5", "--bit-cap", "100", "--quiet"})
            .code != 0);
}

TEST_CASE("train, record and infer") {
  const auto model = scratch("model.bin");
  std::vector<std::string> args = {"train", "--out", model};
  args.insert(args.end(), kSmall.begin(), kSmall.end());
  const auto t = run(args);
  REQUIRE(t.code == 0);
  CHECK(fs::exists(model));

  const auto signal = scratch("rx.bin");
  const auto truth = scratch("truth.json");
  const auto rec = run({"record", "--M", "32", "--N", "4", "--snr", "30", "--count", "3", "--out", signal, "--truth",
                        truth});
  REQUIRE(rec.code == 0);

  const auto out = scratch("est.json");
  const auto inf = run({"infer", "--model", model, "--input", signal, "--out", out, "--soft"});
  REQUIRE(inf.code == 0);
  const auto doc = nlohmann::json::parse(slurp(out));
  const auto tr = nlohmann::json::parse(slurp(truth));
  REQUIRE(doc["frames"].size() == 3);
  CHECK(doc["M"] == 32);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(doc["frames"][k]["h_tilde"].size() == 4);
    CHECK(doc["frames"][k]["d_tilde"].size() == 32);
    const std::string bits = doc["frames"][k]["bits"];
    const std::string sent = tr[k]["bits"];
    REQUIRE(bits.size() == 64);
    std::size_t errors = 0;
    for (std::size_t i = 0; i < 64; ++i) errors += bits[i] != sent[i];
    CHECK(errors < 16);
  }

  // A model for a different shape is refused.
  const auto other = scratch("rx64.bin");
  REQUIRE(run({"record", "--M", "64", "--N", "4", "--out", other}).code == 0);
  const auto mismatch = run({"infer", "--model", model, "--input", other});
  CHECK(mismatch.code != 0);
  CHECK(mismatch.err.find(other) != std::string::npos);

  CHECK(run({"infer", "--model", "/no/model.bin", "--input", signal}).code != 0);
}
