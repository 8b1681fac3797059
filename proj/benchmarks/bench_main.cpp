#include <benchmark/benchmark.h>

#include "depthq/depth_camera.hpp"
#include "depthq/qnetwork.hpp"
#include "depthq/saliency.hpp"
#include "depthq/world.hpp"

using namespace depthq;

namespace {

const WorldMap& bench_world() {
  static const WorldMap map = load_world(std::string(DEPTHQ_DATA_DIR) + "/worlds/paper_like.world");
  return map;
}

NetworkConfig network_at(std::size_t rows, std::size_t cols, bool reduced) {
  NetworkConfig c;
  c.input_rows = rows;
  c.input_cols = cols;
  if (reduced) {
    c.conv_channels = {8, 16, 16};
    c.fc_widths = {64, 64};
  }
  return c;
}

void BM_ForwardFull(benchmark::State& state) {
  const auto net = QNetwork<float>::he_initialized(network_at(120, 160, false), 1);
  const auto image = render_depth(bench_world(), bench_world().starts[0], CameraConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(forward_q(net, image).q);
}
BENCHMARK(BM_ForwardFull)->Unit(benchmark::kMillisecond);

void BM_ForwardReduced(benchmark::State& state) {
  const auto net = QNetwork<float>::he_initialized(network_at(24, 32, true), 1);
  CameraConfig cam;
  cam.rows = 24;
  cam.cols = 32;
  const auto image = render_depth(bench_world(), bench_world().starts[0], cam);
  for (auto _ : state) benchmark::DoNotOptimize(forward_q(net, image).q);
}
BENCHMARK(BM_ForwardReduced)->Unit(benchmark::kMicrosecond);

void BM_TrainGradientReduced(benchmark::State& state) {
  auto net = QNetwork<float>::he_initialized(network_at(24, 32, true), 1);
  net.set_mode(Mode::Train);
  Tensor<float> input({1, 24, 32}, 1.5f);
  auto grads = ParameterSet<float>::zeros(net.config());
  Rng rng(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(accumulate_masked_mse(net, input, 2, 1.0, 1.0 / 32, grads, &rng).loss);
  }
}
BENCHMARK(BM_TrainGradientReduced)->Unit(benchmark::kMicrosecond);

void BM_RenderDepth(benchmark::State& state) {
  CameraConfig cam;
  cam.rows = static_cast<std::size_t>(state.range(0)) * 3 / 4;
  cam.cols = static_cast<std::size_t>(state.range(0));
  Pose pose = bench_world().starts[2];
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_depth(bench_world(), pose, cam).pixels.data());
  }
}
BENCHMARK(BM_RenderDepth)->Arg(32)->Arg(160)->Unit(benchmark::kMicrosecond);

void BM_Saliency(benchmark::State& state) {
  Rng rng(3);
  Tensor<double> coarse({15, 20});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : coarse.values()) v = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(top_fraction_mask(bilinear_upsample8(coarse)).count());
}
BENCHMARK(BM_Saliency)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
