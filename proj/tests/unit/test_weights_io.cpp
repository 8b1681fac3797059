#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "depthq/error.hpp"
#include "depthq/weights_io.hpp"
#include "test_paths.hpp"

using namespace depthq;
using namespace depthq::testing;

namespace {

NetworkConfig cfg() {
  NetworkConfig c;
  c.input_rows = 16;
  c.input_cols = 24;
  c.conv_channels = {3, 4, 2};
  c.fc_widths = {8, 6};
  return c;
}

}  // namespace

TEST_CASE("round trip is bit-exact and rebuilds the architecture") {
  TempDir dir("weights");
  const auto net = QNetwork<float>::he_initialized(cfg(), 9);
  save_weights(net, dir / "w.dqnw");
  const auto back = load_weights<float>(dir / "w.dqnw");
  CHECK(back.config().conv_channels == cfg().conv_channels);
  CHECK(back.config().fc_widths == cfg().fc_widths);
  CHECK(back.config().input_rows == 16);
  CHECK(back.parameters() == net.parameters());
  save_weights(back, dir / "w2.dqnw");
  CHECK(read_bytes(dir / "w.dqnw") == read_bytes(dir / "w2.dqnw"));

  const auto d = QNetwork<double>::he_initialized(cfg(), 9);
  save_weights(d, dir / "d.dqnw");
  CHECK(load_weights<double>(dir / "d.dqnw").parameters() == d.parameters());
  // Precision converts on load.
  const auto narrowed = load_weights<float>(dir / "d.dqnw");
  CHECK(narrowed.parameters().tensors[0][3] == static_cast<float>(d.parameters().tensors[0][3]));
}

TEST_CASE("truncated or foreign files are rejected") {
  TempDir dir("weights_bad");
  const auto net = QNetwork<float>::he_initialized(cfg(), 9);
  save_weights(net, dir / "w.dqnw");
  const auto bytes = read_bytes(dir / "w.dqnw");
  {
    std::ofstream out(dir / "cut.dqnw", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 7));
  }
  CHECK_THROWS_AS(load_weights<float>(dir / "cut.dqnw"), FormatError);
  {
    std::ofstream out(dir / "magic.dqnw", std::ios::binary);
    out << "NOPE" << bytes.substr(4);
  }
  CHECK_THROWS_AS(load_weights<float>(dir / "magic.dqnw"), FormatError);
  {
    std::ofstream out(dir / "long.dqnw", std::ios::binary);
    out << bytes << "x";
  }
  CHECK_THROWS_AS(load_weights<float>(dir / "long.dqnw"), FormatError);
  CHECK_THROWS(load_weights<float>(dir / "missing.dqnw"));
}

TEST_CASE("an architecture mismatch names the layer") {
  TempDir dir("weights_shape");
  save_weights(QNetwork<float>::he_initialized(cfg(), 1), dir / "w.dqnw");
  auto other = cfg();
  other.conv_channels = {3, 5, 2};
  try {
    load_weights<float>(dir / "w.dqnw", other);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("conv2") != std::string::npos);
  }
  CHECK_NOTHROW(load_weights<float>(dir / "w.dqnw", cfg()));
}

TEST_CASE("a reloaded network gives the same Q-values on a probe image") {
  TempDir dir("weights_probe");
  const auto net = QNetwork<float>::he_initialized(cfg(), 21);
  save_weights(net, dir / "w.dqnw");
  auto back = load_weights<float>(dir / "w.dqnw");
  back.set_mode(Mode::Eval);
  DepthImage probe(16, 24);
  for (std::size_t i = 0; i < probe.pixels.size(); ++i) probe.pixels[i] = 0.45f + 0.013f * (i % 101);
  CHECK(forward_q(back, probe).q == forward_q(net, probe).q);
}
