#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "popcast/features.hpp"
#include "support/helpers.hpp"

namespace fs = std::filesystem;
using test_support::read_file_bytes;
using test_support::TempDir;

namespace {

struct CmdResult {
  int code = -1;
  std::string out;
};

// runs the installed binary; stdout captured, stderr folded in
CmdResult run_cli(const std::string& args, const fs::path& scratch) {
  const fs::path out_file = scratch / "cmd_out.txt";
  const std::string cmd = std::string(POPCAST_CLI_BIN) + " " + args + " > " +
                          out_file.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CmdResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream is(out_file);
  std::stringstream ss;
  ss << is.rdbuf();
  r.out = ss.str();
  return r;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream is(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) ++n;
  return n;
}

bool trees_identical(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> rel;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), a));
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file() && !fs::exists(a / fs::relative(e.path(), b)))
      return false;
  for (const auto& r : rel) {
    if (!fs::exists(b / r)) return false;
    if (read_file_bytes(a / r) != read_file_bytes(b / r)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("generate writes the dataset and is deterministic") {
  TempDir tmp("cli_gen");
  const auto a = tmp.path() / "a";
  const auto b = tmp.path() / "b";
  const std::string args =
      "--n 8 --cue brightness_trend --noise 0.1 --seed 7 --frames 3";
  CHECK(run_cli("generate --out " + a.string() + " " + args, tmp.path()).code ==
        0);
  CHECK(run_cli("generate --out " + b.string() + " " + args, tmp.path()).code ==
        0);
  CHECK(line_count(a / "manifest.jsonl") == 8);
  int dirs = 0;
  for (const auto& e : fs::directory_iterator(a / "videos")) (void)e, ++dirs;
  CHECK(dirs == 8);
  CHECK(trees_identical(a, b));
}

TEST_CASE("generate rejects tiny datasets and non-empty targets") {
  TempDir tmp("cli_genbad");
  CHECK(run_cli("generate --out " + (tmp.path() / "x").string() + " --n 2",
                tmp.path())
            .code == 2);

  const auto dir = tmp.path() / "busy";
  fs::create_directories(dir);
  std::ofstream(dir / "occupied.txt") << "hi";
  const auto r =
      run_cli("generate --out " + dir.string() + " --n 8", tmp.path());
  CHECK(r.code == 1);
  CHECK(r.out.find("--force") != std::string::npos);
  CHECK(run_cli("generate --out " + dir.string() + " --n 8 --force --seed 1",
                tmp.path())
            .code == 0);
}

TEST_CASE("extract caches descriptor vectors idempotently") {
  TempDir tmp("cli_ext");
  const auto data = tmp.path() / "data";
  REQUIRE(run_cli("generate --out " + data.string() +
                      " --n 4 --cue static_brightness --seed 3 --frames 2",
                  tmp.path())
              .code == 0);

  const auto cache = tmp.path() / "hog.pfea";
  const std::string cmd = "extract --data " + data.string() +
                          " --features hog --cache " + cache.string() +
                          " --frames 2 --now 2026-01-01";
  CHECK(run_cli(cmd, tmp.path()).code == 0);
  const auto loaded = popcast::features::load_feature_cache(cache);
  CHECK(loaded.dim == 8100);
  CHECK(loaded.entries.size() == 4);

  const auto bytes = read_file_bytes(cache);
  const auto rerun = run_cli(cmd, tmp.path());
  CHECK(rerun.code == 0);
  CHECK(rerun.out.find("cache hit") != std::string::npos);
  CHECK(read_file_bytes(cache) == bytes);

  const auto fused = tmp.path() / "both.pfea";
  CHECK(run_cli("extract --data " + data.string() +
                    " --features hog,gist --cache " + fused.string() +
                    " --frames 2 --now 2026-01-01",
                tmp.path())
            .code == 0);
  CHECK(popcast::features::load_feature_cache(fused).dim == 9060);

  CHECK(run_cli("extract --data " + data.string() +
                    " --features hog,wavelet --cache x.pfea",
                tmp.path())
            .code == 2);
}

TEST_CASE("train writes checkpoints deterministically") {
  TempDir tmp("cli_train");
  const auto data = tmp.path() / "data";
  REQUIRE(run_cli("generate --out " + data.string() +
                      " --n 6 --cue brightness_trend --seed 5",
                  tmp.path())
              .code == 0);

  const std::string overrides =
      " --epochs 1 --iterations 3 --batch 2 --seed 11 --now 2026-01-01";
  const auto m1 = tmp.path() / "m1.plrc";
  const auto m2 = tmp.path() / "m2.plrc";
  CHECK(run_cli("train --data " + data.string() + " --model lrcn --out " +
                    m1.string() + overrides,
                tmp.path())
            .code == 0);
  CHECK(run_cli("train --data " + data.string() + " --model lrcn --out " +
                    m2.string() + overrides,
                tmp.path())
            .code == 0);
  CHECK(read_file_bytes(m1) == read_file_bytes(m2));
  CHECK(fs::exists(m1.string() + ".loss.csv"));
  CHECK(line_count(m1.string() + ".loss.csv") == 1 + 3);
  CHECK(fs::exists(m1.string() + ".run.json"));

  // unknown model name is a usage error
  CHECK(run_cli("train --data " + data.string() +
                    " --model perceptron --out x.bin",
                tmp.path())
            .code == 2);

  // the paper-scale budget needs an explicit acknowledgement
  const auto refuse = run_cli("train --data " + data.string() +
                                  " --model lrcn --preset paper --out x.bin" +
                                  overrides,
                              tmp.path());
  CHECK(refuse.code == 2);
  CHECK(refuse.out.find("--i-have-a-cluster") != std::string::npos);
}

TEST_CASE("train fits shallow models on cached descriptors") {
  TempDir tmp("cli_shallow");
  const auto data = tmp.path() / "data";
  REQUIRE(run_cli("generate --out " + data.string() +
                      " --n 8 --cue static_brightness --seed 9 --frames 2",
                  tmp.path())
              .code == 0);
  const auto out = tmp.path() / "lr.pshl";
  CHECK(run_cli("train --data " + data.string() +
                    " --model logreg --features hog --out " + out.string() +
                    " --seed 1 --now 2026-01-01",
                tmp.path())
            .code == 0);
  CHECK(fs::exists(out));
  CHECK(fs::exists(out.string() + ".loss.csv"));
}

TEST_CASE("evaluate runs the k-fold harness deterministically") {
  TempDir tmp("cli_eval");
  const auto data = tmp.path() / "data";
  REQUIRE(run_cli("generate --out " + data.string() +
                      " --n 20 --cue noise --seed 21 --frames 2",
                  tmp.path())
              .code == 0);

  const auto out1 = tmp.path() / "r1";
  const auto out2 = tmp.path() / "r2";
  const std::string run1 = "evaluate --data " + data.string() + " --out " +
                           out1.string() +
                           " --models oracle,coinflip --k 5 --seed 3 "
                           "--now 2026-01-01";
  const std::string run2 = "evaluate --data " + data.string() + " --out " +
                           out2.string() +
                           " --models oracle,coinflip --k 5 --seed 3 "
                           "--now 2026-01-01";
  const auto r1 = run_cli(run1, tmp.path());
  CHECK(r1.code == 0);
  CHECK(r1.out.find("model") != std::string::npos);
  CHECK(r1.out.find("accuracy") != std::string::npos);
  CHECK(r1.out.find("spearman") != std::string::npos);
  CHECK(run_cli(run2, tmp.path()).code == 0);

  // oracle row reports perfect accuracy
  std::ifstream csv(out1 / "results.csv");
  std::string line;
  bool oracle_mean = false;
  while (std::getline(csv, line))
    if (line.rfind("oracle,mean,1,", 0) == 0) oracle_mean = true;
  CHECK(oracle_mean);

  for (const char* name : {"results.csv", "results.json", "table.txt"})
    CHECK(read_file_bytes(out1 / name) == read_file_bytes(out2 / name));
  CHECK(fs::exists(out1 / "rejections.csv"));
  CHECK(fs::exists(out1 / "run_config.json"));

  CHECK(run_cli("evaluate --data " + data.string() + " --out x --models "
                "oracle,foo --k 5",
                tmp.path())
            .code == 2);
}

TEST_CASE("rank orders candidates and breaks ties by id") {
  TempDir tmp("cli_rank");
  const auto data = tmp.path() / "data";
  REQUIRE(run_cli("generate --out " + data.string() +
                      " --n 6 --cue brightness_trend --seed 31",
                  tmp.path())
              .code == 0);
  const auto model = tmp.path() / "m.plrc";
  REQUIRE(run_cli("train --data " + data.string() + " --model lrcn --out " +
                      model.string() +
                      " --epochs 1 --iterations 2 --batch 2 --seed 1 "
                      "--now 2026-01-01",
                  tmp.path())
              .code == 0);

  // two candidates with identical frames tie and order by id
  const auto cands = tmp.path() / "cands";
  fs::create_directories(cands);
  fs::copy(data / "videos" / "v00000", cands / "zeta",
           fs::copy_options::recursive);
  fs::copy(data / "videos" / "v00000", cands / "alpha",
           fs::copy_options::recursive);
  const auto r = run_cli("rank --model " + model.string() + " --candidates " +
                             cands.string(),
                         tmp.path());
  CHECK(r.code == 0);
  const auto alpha_pos = r.out.find("1,alpha,");
  const auto zeta_pos = r.out.find("2,zeta,");
  CHECK(alpha_pos != std::string::npos);
  CHECK(zeta_pos != std::string::npos);
  CHECK(alpha_pos < zeta_pos);

  // single candidate is rank 1; empty candidate set is a runtime failure
  const auto single = tmp.path() / "single";
  fs::create_directories(single);
  fs::copy(data / "videos" / "v00001", single / "only",
           fs::copy_options::recursive);
  const auto rs = run_cli("rank --model " + model.string() + " --candidates " +
                              single.string(),
                          tmp.path());
  CHECK(rs.code == 0);
  CHECK(rs.out.find("1,only,") != std::string::npos);

  const auto empty = tmp.path() / "none";
  fs::create_directories(empty);
  CHECK(run_cli("rank --model " + model.string() + " --candidates " +
                    empty.string(),
                tmp.path())
            .code == 1);
}

TEST_CASE("missing datasets are runtime failures, not usage errors") {
  TempDir tmp("cli_missing");
  CHECK(run_cli("evaluate --data " + (tmp.path() / "nope").string() +
                    " --out " + (tmp.path() / "r").string() +
                    " --models oracle",
                tmp.path())
            .code == 1);
  CHECK(run_cli("extract --data " + (tmp.path() / "nope").string() +
                    " --cache " + (tmp.path() / "c.pfea").string(),
                tmp.path())
            .code == 1);
}

TEST_CASE("commands do not mutate their input dataset") {
  TempDir tmp("cli_nomut");
  const auto data = tmp.path() / "data";
  REQUIRE(run_cli("generate --out " + data.string() +
                      " --n 8 --cue noise --seed 2 --frames 2",
                  tmp.path())
              .code == 0);
  std::map<std::string, std::vector<unsigned char>> before;
  for (const auto& e : fs::recursive_directory_iterator(data))
    if (e.is_regular_file())
      before[fs::relative(e.path(), data).string()] =
          read_file_bytes(e.path());

  REQUIRE(run_cli("evaluate --data " + data.string() + " --out " +
                      (tmp.path() / "r").string() +
                      " --models oracle,logreg:hog --k 2 --seed 3 "
                      "--now 2026-01-01",
                  tmp.path())
              .code == 0);

  std::size_t after_count = 0;
  for (const auto& e : fs::recursive_directory_iterator(data))
    if (e.is_regular_file()) {
      ++after_count;
      const auto rel = fs::relative(e.path(), data).string();
      REQUIRE(before.count(rel));
      CHECK(before[rel] == read_file_bytes(e.path()));
    }
  CHECK(after_count == before.size());
}

TEST_CASE("the seed can come from the environment") {
  TempDir tmp("cli_env");
  const auto a = tmp.path() / "a";
  const auto b = tmp.path() / "b";
  CHECK(run_cli("generate --out " + a.string() + " --n 4 --seed 99",
                tmp.path())
            .code == 0);
  const std::string env_cmd = "POPCAST_SEED=99 " + std::string(POPCAST_CLI_BIN) +
                              " generate --out " + b.string() + " --n 4 > " +
                              (tmp.path() / "o.txt").string() + " 2>&1";
  CHECK(WEXITSTATUS(std::system(env_cmd.c_str())) == 0);
  CHECK(trees_identical(a, b));
}
