#include <doctest.h>

#ifdef DEPTHQ_HAVE_CLI

#include <sstream>

#include "commands.hpp"
#include "depthq/eval.hpp"
#include "depthq/png_io.hpp"
#include <algorithm>
#include <fstream>
#include "test_paths.hpp"

using namespace depthq;
using namespace depthq::testing;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = depthq::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> small_train(const std::string& out, const std::string& seed) {
  return {"train", "--world", world_path("square_4m").string(), "--out", out, "--seed", seed,
          "--iterations", "50", "--profile", "from-scratch", "--set", "camera_rows=16",
          "--set", "camera_cols=24", "--set", "conv_channels=2,2,2", "--set", "fc_widths=8",
          "--set", "batch_size=8", "--set", "checkpoints=25"};
}

}  // namespace

TEST_CASE("a missing world file is a usage error naming the path") {
  const auto r = invoke({"train", "--world", "/no/such/place.world", "--iterations", "5"});
  CHECK(r.code == 2);
  CHECK(r.err.find("/no/such/place.world") != std::string::npos);
}

TEST_CASE("bad flags and unknown keys are usage errors") {
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"train", "--bogus"}).code == 2);
  CHECK(invoke({"train", "--world", world_path("square_4m").string(), "--iterations", "5", "--set",
             "nope=1"})
            .code == 2);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("train twice with the same seed gives identical checkpoint bytes") {
  TempDir a("cli_a"), b("cli_b");
  REQUIRE(invoke(small_train(a.path().string(), "7")).code == 0);
  REQUIRE(invoke(small_train(b.path().string(), "7")).code == 0);
  for (const char* f : {"checkpoint_25.dqnw", "final.dqnw", "train_log.csv", "resolved_config.txt"}) {
    CAPTURE(f);
    REQUIRE(std::filesystem::exists(a / f));
    if (std::string(f) == "resolved_config.txt") continue;  // records the out path
    CHECK(read_bytes(a / f) == read_bytes(b / f));
  }
  const auto cfg = read_bytes(a / "resolved_config.txt");
  CHECK(cfg.find("seed=7\n") != std::string::npos);
  CHECK(cfg.find("profile=from-scratch\n") != std::string::npos);
}

TEST_CASE("eval, heatmap, saliency and qdump on a trained network") {
  TempDir dir("cli_eval");
  const auto world = world_path("square_4m").string();
  REQUIRE(invoke(small_train((dir / "train").string(), "3")).code == 0);
  const auto weights = (dir / "train" / "final.dqnw").string();

  const auto ev = invoke({"eval", "--world", world, "--weights", weights, "--out",
                       (dir / "eval").string(), "--episodes-per-start", "2"});
  REQUIRE(ev.code == 0);
  const auto table = read_metrics_csv(dir / "eval" / "metrics.csv");
  CHECK(table.rows.size() == 12);
  CHECK(std::filesystem::exists(dir / "eval" / "logs" / "start_12_ep_02.csv"));
  CHECK(std::filesystem::exists(dir / "eval" / "resolved_config.txt"));

  const auto hm = invoke({"heatmap", "--world", world, "--logs", (dir / "eval").string(), "--out",
                       (dir / "heat").string()});
  REQUIRE(hm.code == 0);
  const auto pgm = read_pgm16(dir / "heat" / "eval_heatmap.pgm");
  CHECK(pgm.width == 20);  // 4 m / 0.2 m
  CHECK(pgm.height == 20);
  CHECK(*std::max_element(pgm.pixels.begin(), pgm.pixels.end()) == 65535);

  std::filesystem::create_directories(dir / "empty");
  CHECK(invoke({"heatmap", "--world", world, "--logs", (dir / "empty").string(), "--out",
             (dir / "heat2").string()})
            .code == 1);

  const auto sal = invoke({"saliency", "--world", world, "--weights", weights, "--pose", "2,2,0",
                        "--out", (dir / "sal").string(), "--csv"});
  REQUIRE(sal.code == 0);
  CHECK(std::filesystem::exists(dir / "sal" / "overlay.png"));
  CHECK(std::filesystem::exists(dir / "sal" / "saliency.csv"));
  CHECK(sal.out.find("masked 38 of 384") != std::string::npos);
  CHECK(invoke({"saliency", "--world", world, "--weights", weights, "--pose", "9,2,0"}).code == 2);

  const auto qd = invoke({"qdump", "--world", world, "--weights", weights, "--pose", "2,2,0",
                       "--label", "S1 DRL"});
  REQUIRE(qd.code == 0);
  CHECK(qd.out.find("S1 DRL:") != std::string::npos);
  CHECK(qd.out.find("argmax") != std::string::npos);
  CHECK(invoke({"qdump", "--weights", weights}).code == 2);
}

TEST_CASE("corrupted or mismatched weights fail") {
  TempDir dir("cli_bad");
  {
    std::ofstream out(dir / "bad.dqnw", std::ios::binary);
    out << "DQNW garbage";
  }
  const auto r = invoke({"eval", "--world", world_path("square_4m").string(), "--weights",
                      (dir / "bad.dqnw").string(), "--out", (dir / "e").string()});
  CHECK(r.code != 0);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("render writes a millimeter PGM") {
  TempDir dir("cli_render");
  const auto r = invoke({"render", "--world", world_path("square_4m").string(), "--pose", "2,2,0",
                      "--out", dir.path().string(), "--set", "camera_rows=8", "--set",
                      "camera_cols=16"});
  REQUIRE(r.code == 0);
  const auto g = read_pgm16(dir / "depth.pgm");
  CHECK(g.width == 16);
  CHECK(g.pixels[8] == 2000);  // center column, 2 m to the east wall
}

#endif
