#include <doctest.h>

#include <cmath>
#include <numbers>

#include "convex_room.hpp"
#include "depthq/depth_camera.hpp"

using namespace depthq;
using namespace depthq::testing;

namespace {

WorldMap wall_ahead(double distance) {
  WorldMap m;
  m.name = "wall";
  m.bounds = {-20, -20, 20, 20};
  m.segments.push_back({{distance, -20}, {distance, 20}});
  return m;
}

}  // namespace

TEST_CASE("column angles span the field of view symmetrically") {
  CameraConfig c;
  CHECK(c.column_angle(c.cols / 2) == 0.0);
  CHECK(c.column_angle(0) == doctest::Approx(57.0 / 2 * std::numbers::pi / 180));
  CHECK(c.column_angle(10) > c.column_angle(11));
}

TEST_CASE("center ray equals the closed-form distance in convex rooms") {
  Rng rng(123);
  CameraConfig cam;
  int checked = 0;
  for (int room_i = 0; room_i < 20; ++room_i) {
    const auto room = random_convex_room(rng);
    for (int k = 0; k < 10; ++k) {
      Vec2 o;
      if (!sample_interior(room, rng, 0.05, o)) continue;
      const double heading = std::uniform_real_distribution<double>(-3.14, 3.14)(rng);
      const double expected = convex_exit_distance(room, o, heading);
      const auto hit = cast_ray(room.map, o, heading);
      REQUIRE(hit.has_value());
      CHECK(std::abs(*hit - expected) < 1e-9);
      const auto img = render_depth(room.map, Pose{o.x, o.y, heading}, cam);
      const double want = (expected < cam.min_range || expected > cam.max_range) ? 0.0 : expected;
      CHECK(std::abs(img.at(cam.rows / 2, cam.cols / 2) - want) < 1e-6);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("a flat wall reads the same depth in every pixel") {
  const auto img = render_depth(wall_ahead(2.0), Pose{0, 0, 0}, CameraConfig{});
  for (float v : img.pixels) CHECK(v == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("readings outside the valid range are zero") {
  CHECK(render_depth(wall_ahead(6.0), Pose{}, CameraConfig{}).at(0, 80) == 0.0f);
  CHECK(render_depth(wall_ahead(0.3), Pose{}, CameraConfig{}).at(0, 80) == 0.0f);
  CHECK(render_depth(wall_ahead(4.9), Pose{}, CameraConfig{}).at(0, 80) > 0.0f);
  WorldMap empty{"empty", {-5, -5, 5, 5}, {}, {}};
  CHECK_FALSE(cast_ray(empty, {0, 0}, 0.0).has_value());
}

TEST_CASE("collision rule uses the smallest valid reading") {
  DepthImage img(2, 3);
  img.pixels = {0.0f, 1.0f, 2.0f, 0.0f, 1.0f, 2.0f};
  CHECK(*min_valid_depth(img) == 1.0f);
  CHECK_FALSE(check_collision(img, 0.55));
  img.pixels[4] = 0.5f;
  CHECK(check_collision(img, 0.55));
  img.pixels[4] = 0.55f;
  CHECK_FALSE(check_collision(img, 0.55));
  DepthImage blank(2, 3);
  CHECK_FALSE(min_valid_depth(blank).has_value());
  CHECK(check_collision(blank, 0.55));
}

TEST_CASE("random starts cover all twelve poses") {
  WorldMap m = wall_ahead(3.0);
  for (int i = 0; i < 12; ++i) m.starts.push_back({0.0, 0.1 * i, 0.0});
  Rng rng(7);
  std::vector<int> seen(12, 0);
  for (int i = 0; i < 1200; ++i) {
    const auto [pose, idx] = random_start(m, rng);
    REQUIRE(idx < 12);
    CHECK(pose == m.starts[idx]);
    ++seen[idx];
  }
  for (int c : seen) CHECK(c > 50);
}

TEST_CASE("from the centre of a 4 m room the wall ahead is 2 m away") {
  WorldMap m{"sq", {0, 0, 4, 4}, {{{0, 0}, {4, 0}}, {{4, 0}, {4, 4}}, {{4, 4}, {0, 4}}, {{0, 4}, {0, 0}}}, {}};
  const auto img = render_depth(m, Pose{2, 2, 0}, CameraConfig{});
  CHECK(std::abs(img.at(60, 80) - 2.0) < 1e-6);
}

TEST_CASE("an empty map renders all zeros") {
  WorldMap m{"empty", {0, 0, 4, 4}, {}, {}};
  const auto img = render_depth(m, Pose{2, 2, 0}, CameraConfig{});
  for (float v : img.pixels) CHECK(v == 0.0f);
}

TEST_CASE("a wall closer than the minimum range reads zero") {
  const auto img = render_depth(wall_ahead(0.2), Pose{}, CameraConfig{});
  for (float v : img.pixels) CHECK(v == 0.0f);
}

TEST_CASE("smallest valid depth") {
  DepthImage img(1, 3);
  img.pixels = {0.0f, 0.6f, 1.2f};
  CHECK(*min_valid_depth(img) == 0.6f);
  Rng rng(12);
  DepthImage r(10, 10);
  std::uniform_real_distribution<float> u(0.0f, 5.0f);
  for (int trial = 0; trial < 20; ++trial) {
    for (auto& v : r.pixels) v = u(rng) < 1.0f ? 0.0f : u(rng);
    float best = 0.0f;
    for (float v : r.pixels) {
      if (v > 0.0f && (best == 0.0f || v < best)) best = v;
    }
    const auto got = min_valid_depth(r);
    if (best == 0.0f) {
      CHECK_FALSE(got.has_value());
    } else {
      CHECK(*got == best);
    }
  }
}

TEST_CASE("collision threshold examples") {
  DepthImage img(1, 2);
  img.pixels = {0.0f, 0.50f};
  CHECK(check_collision(img, 0.55));
  img.pixels = {0.0f, 0.56f};
  CHECK_FALSE(check_collision(img, 0.55));
}

TEST_CASE("start draws are seeded and balanced") {
  WorldMap m = wall_ahead(3.0);
  for (int i = 0; i < 12; ++i) m.starts.push_back({0.0, 0.1 * i, 0.0});
  Rng a(99), b(99);
  for (int i = 0; i < 50; ++i) CHECK(random_start(m, a).second == random_start(m, b).second);
  Rng rng(100);
  std::vector<int> counts(12, 0);
  for (int i = 0; i < 12000; ++i) ++counts[random_start(m, rng).second];
  const double sigma = std::sqrt(12000.0 * (1.0 / 12) * (11.0 / 12));
  for (int c : counts) CHECK(std::abs(c - 1000.0) < 3 * sigma);
  for (const auto& p : m.starts) {
    CHECK_FALSE(check_collision(render_depth(m, p, CameraConfig{}), 0.55));
  }
}
