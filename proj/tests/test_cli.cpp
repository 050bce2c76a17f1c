#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "tfd/io.hpp"

// End-to-end exercises of the installed binary: synth -> train -> detect ->
// eval, plus determinism and failure-path checks.

namespace {

namespace fs = std::filesystem;

const std::string kBin = TFD_CLI_BIN;

fs::path work_dir() {
  auto dir = fs::temp_directory_path() / "tfd_cli_test";
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args, const std::string& log_name = "cli.log") {
  auto log = (work_dir() / log_name).string();
  std::string cmd = kBin + " " + args + " >" + log + " 2>&1";
  int rc = std::system(cmd.c_str());
  return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::string log_contents(const std::string& log_name = "cli.log") {
  return tfd::io::read_file((work_dir() / log_name).string());
}

std::string small_config_path() {
  auto path = work_dir() / "config.json";
  std::ofstream out(path);
  out << R"({
    "lambda": 1000.0,
    "window": {"context_len": 48, "suspect_len": 12, "stride": 1},
    "train_stride": 12,
    "tcn": {"hidden_channels": 8, "num_blocks": 2, "kernel_size": 3, "embedding_dim": 8},
    "train": {"epochs": 4, "batch_size": 32, "learning_rate": 0.002}
  })";
  return path.string();
}

}  // namespace

TEST_CASE("cli: full pipeline runs and is reproducible") {
  auto dir = work_dir();
  auto bench = (dir / "bench").string();
  REQUIRE(run("synth --out " + bench + " --n-series 5 --length 400 --seed 3") == 0);
  REQUIRE(fs::exists(bench + "/train.ndjson"));
  REQUIRE(fs::exists(bench + "/val.ndjson"));
  REQUIRE(fs::exists(bench + "/test.ndjson"));

  auto cfg = small_config_path();
  auto ckpt = (dir / "model.ckpt").string();
  REQUIRE(run("train --train " + bench + "/train.ndjson --val " + bench +
              "/val.ndjson --out " + ckpt + " --config " + cfg + " --seed 11 --loss-trace " +
              (dir / "trace.csv").string(), "train.log") == 0);
  CHECK(log_contents("train.log").find("train ok") != std::string::npos);
  REQUIRE(fs::exists(ckpt));
  REQUIRE(fs::exists(dir / "trace.csv"));

  // identical seeds give byte-identical checkpoints
  auto ckpt2 = (dir / "model2.ckpt").string();
  REQUIRE(run("train --train " + bench + "/train.ndjson --val " + bench +
              "/val.ndjson --out " + ckpt2 + " --config " + cfg + " --seed 11", "train2.log") == 0);
  CHECK(tfd::io::read_file(ckpt) == tfd::io::read_file(ckpt2));

  auto out1 = (dir / "det1").string();
  auto out2 = (dir / "det2").string();
  REQUIRE(run("detect --model " + ckpt + " --input " + bench + "/test.ndjson --out-dir " + out1,
              "detect.log") == 0);
  REQUIRE(run("detect --model " + ckpt + " --input " + bench + "/test.ndjson --out-dir " + out2,
              "detect2.log") == 0);
  CHECK(log_contents("detect.log").find("detect ok") != std::string::npos);

  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(out1)) {
    auto twin = fs::path(out2) / entry.path().filename();
    REQUIRE(fs::exists(twin));
    CHECK(tfd::io::read_file(entry.path().string()) == tfd::io::read_file(twin.string()));
    ++compared;
  }
  CHECK(compared > 0);
}

TEST_CASE("cli: eval of identical prediction and truth is perfect") {
  auto dir = work_dir();
  auto labels = (dir / "labels.csv").string();
  tfd::io::atomic_write(labels, "timestamp,label\n0,0\n1,1\n2,1\n3,0\n");
  auto report = (dir / "report.json").string();
  REQUIRE(run("eval --pred " + labels + " --truth " + labels + " --out " + report,
              "eval.log") == 0);
  std::string line = log_contents("eval.log");
  CHECK(line.find("f1=1.000000") != std::string::npos);
  CHECK(fs::exists(report));
  CHECK(tfd::io::read_file(report).find("\"f1\": 1.0") != std::string::npos);
}

TEST_CASE("cli: eval pools counts over multiple series") {
  auto dir = work_dir();
  auto pred_a = (dir / "pa.csv").string();
  auto truth_a = (dir / "ta.csv").string();
  auto pred_b = (dir / "pb.csv").string();
  auto truth_b = (dir / "tb.csv").string();
  // series A: segment detected via one hit; series B: false positive only
  tfd::io::atomic_write(pred_a, "timestamp,label\n0,0\n1,1\n2,0\n3,0\n");
  tfd::io::atomic_write(truth_a, "timestamp,label\n0,0\n1,1\n2,1\n3,0\n");
  tfd::io::atomic_write(pred_b, "timestamp,label\n0,1\n1,0\n");
  tfd::io::atomic_write(truth_b, "timestamp,label\n0,0\n1,0\n");
  REQUIRE(run("eval --pred " + pred_a + " --pred " + pred_b + " --truth " + truth_a +
              " --truth " + truth_b, "pool.log") == 0);
  // adjusted: A contributes tp=2, fn=0; B contributes fp=1
  std::string line = log_contents("pool.log");
  CHECK(line.find("tp=2") != std::string::npos);
  CHECK(line.find("fp=1") != std::string::npos);
  CHECK(line.find("fn=0") != std::string::npos);
}

TEST_CASE("cli: augment grows the dataset deterministically") {
  auto dir = work_dir();
  auto bench = (dir / "bench_aug").string();
  REQUIRE(run("synth --out " + bench + " --n-series 4 --length 200 --seed 5") == 0);
  auto out_a = (dir / "aug_a.ndjson").string();
  auto out_b = (dir / "aug_b.ndjson").string();
  REQUIRE(run("augment --input " + bench + "/train.ndjson --out " + out_a + " --seed 9",
              "aug.log") == 0);
  REQUIRE(run("augment --input " + bench + "/train.ndjson --out " + out_b + " --seed 9") == 0);
  CHECK(tfd::io::read_file(out_a) == tfd::io::read_file(out_b));
  CHECK(log_contents("aug.log").find("augment ok") != std::string::npos);
  auto grown = tfd::io::ingest_ndjson(out_a);
  auto original = tfd::io::ingest_ndjson(bench + "/train.ndjson");
  CHECK(grown.size() > original.size());
}

TEST_CASE("cli: branch toggles produce valid checkpoints") {
  auto dir = work_dir();
  auto bench = (dir / "bench").string();
  auto cfg_path = dir / "time_only.json";
  std::ofstream out(cfg_path);
  out << R"({
    "window": {"context_len": 48, "suspect_len": 12, "stride": 1},
    "train_stride": 24,
    "tcn": {"hidden_channels": 4, "num_blocks": 1, "kernel_size": 3, "embedding_dim": 4},
    "train": {"epochs": 2, "batch_size": 32, "learning_rate": 0.002},
    "branches": {"time_trend": true, "time_residual": true, "freq_trend": false, "freq_residual": false}
  })";
  out.close();
  auto ckpt = (dir / "time_only.ckpt").string();
  REQUIRE(run("train --train " + bench + "/train.ndjson --out " + ckpt + " --config " +
              cfg_path.string() + " --seed 2", "toggles.log") == 0);
  auto loaded = tfd::io::load_checkpoint(ckpt);
  CHECK(loaded.params.config.branch_enabled[0]);
  CHECK_FALSE(loaded.params.config.branch_enabled[2]);
}

TEST_CASE("cli: errors exit nonzero with a categorized message") {
  auto dir = work_dir();
  auto bad = (dir / "bad.csv").string();
  tfd::io::atomic_write(bad, "timestamp,value\n2,1\n1,2\n");
  auto ckpt = (dir / "model.ckpt").string();
  int rc = run("detect --model " + ckpt + " --input " + bad + " --out-dir " + (dir / "x").string(),
               "err.log");
  CHECK(rc == 1);
  CHECK(log_contents("err.log").find("NonMonotonicTimestamps") != std::string::npos);

  rc = run("eval --pred " + bad + " --truth " + bad, "err2.log");
  CHECK(rc == 1);
  CHECK(log_contents("err2.log").find("error:") != std::string::npos);
}
