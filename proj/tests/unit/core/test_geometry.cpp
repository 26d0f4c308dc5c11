#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>

#include "fusedrive/common/errors.hpp"
#include "fusedrive/geometry/depth.hpp"
#include "fusedrive/geometry/sdc.hpp"
#include "fusedrive/geometry/transform.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace fusedrive;
using namespace fusedrive::geometry;
using fusedrive::testing::Gen;
using namespace fusedrive::testing;


TEST_CASE("depth decoding matches the closed form") {
  CHECK(decode_depth_value(0, 0, 0) == 0.0);
  CHECK(decode_depth_value(255, 255, 255) == 1000.0);
  CHECK(decode_depth_value(1, 0, 0) == doctest::Approx(5.9605e-5).epsilon(1e-4));
  CHECK(decode_depth_value(1, 0, 0) == code_oracle(1, 0, 0));
  Gen gen(11);
  for (int i = 0; i < 2000; ++i) {
    const auto c = gen.rgb_code();
    CHECK(decode_depth_value(c[0], c[1], c[2]) == code_oracle(c[0], c[1], c[2]));
  }
}

TEST_CASE("depth decoding rejects out-of-range channels") {
  CHECK_THROWS_AS(decode_depth_value(256, 0, 0), InvalidInput);
  CHECK_THROWS_AS(decode_depth_value(0, -1, 0), InvalidInput);
  EncodedDepthImage img(1, 2);
  img.at(0, 1) = {0, 0, 300};
  CHECK_THROWS_AS(decode_depth(img), InvalidInput);
}

TEST_CASE("depth decoding is monotone in the integer code") {
  Gen gen(12);
  for (int i = 0; i < 2000; ++i) {
    const auto a = gen.rgb_code();
    const auto b = gen.rgb_code();
    const auto ca = depth_code(a[0], a[1], a[2]);
    const auto cb = depth_code(b[0], b[1], b[2]);
    const double da = decode_depth_value(a[0], a[1], a[2]);
    const double db = decode_depth_value(b[0], b[1], b[2]);
    if (ca < cb) CHECK(da < db);
    if (ca == cb) CHECK(da == db);
  }
}

TEST_CASE("depth encode/decode round trip stays within one code step") {
  Gen gen(13);
  const double step = 1000.0 / 16777215.0;
  DepthMap d(4, 5);
  for (auto& v : d.data()) v = gen.uniform(0.0, 1000.0);
  const auto back = decode_depth(encode_depth(d));
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(std::abs(back.data()[i] - d.data()[i]) < step);
  CHECK(encode_depth_value(-5.0) == std::array<int, 3>{0, 0, 0});
  CHECK(encode_depth_value(5000.0) == std::array<int, 3>{255, 255, 255});
}

TEST_CASE("global_to_local worked examples") {
  auto near = [](Vec2 a, Vec2 b) { return std::abs(a.x - b.x) < 1e-12 && std::abs(a.y - b.y) < 1e-12; };
  CHECK(near(global_to_local({3, 4}, {0, 0, -90}), {3, 4}));
  CHECK(near(global_to_local({1, 0}, {0, 0, 0}), {0, -1}));
  CHECK(near(local_to_global({3, 4}, {0, 0, -90}), {3, 4}));
  CHECK(near(local_to_global({0, -1}, {0, 0, 0}), {1, 0}));
  Gen gen(21);
  for (int i = 0; i < 100; ++i) {
    const auto pose = gen.pose();
    CHECK(near(global_to_local({pose.x, pose.y}, pose), {0, 0}));
  }
}

TEST_CASE("global_to_local is an isometry with an exact inverse") {
  Gen gen(22);
  for (int i = 0; i < 2000; ++i) {
    const auto pose = gen.pose();
    const Vec2 a = gen.point();
    const Vec2 b = gen.point();
    const Vec2 la = global_to_local(a, pose);
    const Vec2 lb = global_to_local(b, pose);
    CHECK(std::abs(distance(la, lb) - distance(a, b)) < 1e-9);
    const Vec2 back = local_to_global(la, pose);
    CHECK(std::abs(back.x - a.x) < 1e-9);
    CHECK(std::abs(back.y - a.y) < 1e-9);
  }
}

TEST_CASE("a point straight ahead maps to negative local y") {
  const VehiclePose pose{10, -3, 30};
  const Vec2 ahead = Vec2{pose.x, pose.y} + 5.0 * heading_vector(pose);
  const Vec2 local = global_to_local(ahead, pose);
  CHECK(local.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(local.y == doctest::Approx(-5.0));
}

TEST_CASE("heading normalization lands in (-180, 180]") {
  CHECK(normalize_angle_deg(180.0) == 180.0);
  CHECK(normalize_angle_deg(-180.0) == 180.0);
  CHECK(normalize_angle_deg(540.0) == 180.0);
  CHECK(normalize_angle_deg(-190.0) == doctest::Approx(170.0));
}

TEST_CASE("camera BEV grid: worked examples") {
  const CameraSpec front = CameraRig::standard().front;
  SdcConfig cfg;

  SUBCASE("empty depth gives an empty grid") {
    const DepthMap d(160, 320, 0.0);
    const ClassMap k(160, 320, 3);
    CHECK(count_set_cells(build_camera_sdc(d, k, front, 320, cfg)) == 0);
  }
  SUBCASE("center pixel at 32 m lands on row 80 in its class") {
    DepthMap d(160, 320, 0.0);
    ClassMap k(160, 320, 0);
    d.at(80, 160) = 32.0;
    k.at(80, 160) = 7;
    const auto g = build_camera_sdc(d, k, front, 320, cfg);
    CHECK(count_set_cells(g) == 1);
    CHECK(g.at(7, 80, 160) == 1);
  }
  SUBCASE("two pixels in one cell keep the nearer class") {
    DepthMap d(160, 320, 0.0);
    ClassMap k(160, 320, 0);
    d.at(10, 160) = 32.05;
    k.at(10, 160) = 4;
    d.at(100, 160) = 32.01;
    k.at(100, 160) = 9;
    const auto g = build_camera_sdc(d, k, front, 320, cfg);
    CHECK(count_set_cells(g) == 1);
    CHECK(g.at(9, 79, 160) == 1);
    CHECK(g.at(4, 79, 160) == 0);
  }
  SUBCASE("shape mismatch is rejected") {
    CHECK_THROWS_AS(build_camera_sdc(DepthMap(160, 320), ClassMap(160, 321), front, 320, cfg), InvalidInput);
  }
}

TEST_CASE("camera BEV grid equals the brute-force oracle on random tiny inputs") {
  Gen gen(31);
  const auto cfg = tiny_sdc_config();
  for (int trial = 0; trial < 200; ++trial) {
    const auto cam = tiny_camera();
    const auto d = gen.depth_map(8, 8, cfg.forward_range);
    const auto k = gen.class_map(8, 8, cfg.num_classes);
    CHECK(build_camera_sdc(d, k, cam, cfg.front_cols, cfg) == camera_oracle(d, k, cam, cfg.front_cols, cfg));
  }
}

TEST_CASE("probability input reduces by argmax") {
  Gen gen(32);
  const auto cfg = tiny_sdc_config();
  Grid3<float> p(cfg.num_classes, 8, 8, 0.0f);
  for (auto& v : p.data()) v = static_cast<float>(gen.uniform(0.0, 1.0));
  const auto d = gen.depth_map(8, 8, cfg.forward_range);
  const auto k = argmax_classes(p);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      for (int ch = 0; ch < cfg.num_classes; ++ch) CHECK(p.at(ch, r, c) <= p.at(k.at(r, c), r, c));
    }
  }
  CHECK(build_camera_sdc(d, p, tiny_camera(), 8, cfg) == build_camera_sdc(d, k, tiny_camera(), 8, cfg));
}

TEST_CASE("merge: worked examples") {
  const auto cfg = tiny_sdc_config();
  const SdcGrid empty(cfg.num_classes, cfg.rows, cfg.side_cols, 0);

  SUBCASE("all empty") { CHECK(count_set_cells(merge_sdc(empty, empty, empty, cfg).grid) == 0); }

  SUBCASE("front only is placed in the middle columns") {
    Gen gen(41);
    const auto front = gen.sdc_grid(cfg.num_classes, cfg.rows, cfg.front_cols, 0.5);
    const auto m = merge_sdc(front, empty, empty, cfg).grid;
    for (int k = 0; k < cfg.num_classes; ++k) {
      for (int r = 0; r < cfg.rows; ++r) {
        for (int c = 0; c < cfg.merged_cols; ++c) {
          const bool inside = c >= 8 && c < 16;
          CHECK(m.at(k, r, c) == (inside ? front.at(k, r, c - 8) : 0));
        }
      }
    }
  }

  SUBCASE("a single left cell appears at its rotated location") {
    // Cell (row 4, col 3): forward 7 m, lateral -1/3 m before rotation.
    SdcGrid left = empty;
    left.at(2, 4, 3) = 1;
    const auto m = merge_sdc(empty, left, empty, cfg).grid;
    const double a = -42.0 * M_PI / 180.0;
    const double fwd = 7.0 * std::cos(a) - (-1.0 / 3.0) * std::sin(a);
    const double lat = 7.0 * std::sin(a) + (-1.0 / 3.0) * std::cos(a);
    const int row = static_cast<int>(std::floor(8.0 - fwd / 2.0));
    const int col = static_cast<int>(std::floor(12.0 + lat / (16.0 / 24.0)));
    CHECK(count_set_cells(m) == 1);
    CHECK(m.at(2, row, col) == 1);
    CHECK(col < 12);
  }

  SUBCASE("wrong shapes are rejected") {
    const SdcGrid bad(cfg.num_classes, cfg.rows, 7, 0);
    CHECK_THROWS_AS(merge_sdc(bad, empty, empty, cfg), InvalidInput);
  }
}

TEST_CASE("merge equals the rotation oracle on random tiny inputs") {
  Gen gen(42);
  for (double rot : {42.0, 0.0, 60.0}) {
    const auto cfg = tiny_sdc_config(rot);
    for (int trial = 0; trial < 200; ++trial) {
      const double density = gen.uniform(0.05, 0.9);
      const auto f = gen.sdc_grid(cfg.num_classes, cfg.rows, cfg.front_cols, density);
      const auto l = gen.sdc_grid(cfg.num_classes, cfg.rows, cfg.side_cols, density);
      const auto r = gen.sdc_grid(cfg.num_classes, cfg.rows, cfg.side_cols, density);
      const auto m = merge_sdc(f, l, r, cfg).grid;
      CHECK(m == merge_oracle(f, l, r, cfg));
      CHECK(count_set_cells(m) <= count_set_cells(f) + count_set_cells(l) + count_set_cells(r));
      for (int row = 0; row < cfg.rows; ++row) {
        for (int col = 0; col < cfg.merged_cols; ++col) {
          int sum = 0;
          for (int k = 0; k < cfg.num_classes; ++k) sum += m.at(k, row, col);
          CHECK(sum <= 1);
        }
      }
    }
  }
}

TEST_CASE("composite split with and without side cameras") {
  Gen gen(43);
  const auto rig = CameraRig::standard();
  SdcConfig cfg;
  const auto d = gen.depth_map(160, rig.composite_width(), 70.0);
  const auto k = gen.class_map(160, rig.composite_width(), cfg.num_classes);
  const auto with = build_sdc_from_composite(d, k, rig, cfg, true);
  const auto without = build_sdc_from_composite(d, k, rig, cfg, false);
  CHECK(with.grid.cols() == 768);
  CHECK(count_set_cells(without.grid) < count_set_cells(with.grid));
  // Without sides only the central front block can be set.
  for (int kk = 0; kk < cfg.num_classes; ++kk) {
    for (int r = 0; r < cfg.rows; ++r) {
      for (int c = 0; c < 224; ++c) CHECK(without.grid.at(kk, r, c) == 0);
    }
  }
  CHECK(build_sdc_from_composite(d, k, rig, cfg, true).grid == with.grid);
}

TEST_CASE("SDC dump round trip") {
  Gen gen(44);
  const auto cfg = tiny_sdc_config();
  SdcMap m;
  m.grid = gen.sdc_grid(cfg.num_classes, cfg.rows, cfg.merged_cols, 0.3);
  m.cell_forward = 2.0;
  m.cell_lateral = 0.5;
  const std::string path = "/tmp/fusedrive_sdc_roundtrip.bin";
  write_sdc(m, path);
  const auto back = read_sdc(path);
  CHECK(back.grid == m.grid);
  CHECK(back.cell_forward == 2.0);
  CHECK(back.cell_lateral == 0.5);
}
