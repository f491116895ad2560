#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "voxrf/field.hpp"
#include "voxrf/rng.hpp"

using namespace voxrf;
namespace fs = std::filesystem;

namespace {

VoxelRadianceField random_field(int nx, int ny, int nz, uint64_t seed) {
  VoxelRadianceField f(nx, ny, nz, {{-1, -0.5, 0}, {1, 1.5, 2}});
  Rng rng(seed, "field-params");
  for (double& v : f.raw_density()) v = rng.next_double() * 4.0 - 2.0;
  for (double& v : f.raw_color()) v = rng.next_double() * 4.0 - 2.0;
  return f;
}

}  // namespace

TEST_CASE("construction guards resolution and bounds") {
  Aabb b{{-1, -1, -1}, {1, 1, 1}};
  CHECK_THROWS_AS(VoxelRadianceField(1, 4, 4, b), ValidationError);
  CHECK_THROWS_AS(VoxelRadianceField(4, 4, 0, b), ValidationError);
  CHECK_THROWS_AS(VoxelRadianceField(4, 4, 4, Aabb{{1, 0, 0}, {0, 1, 1}}), ValidationError);
  VoxelRadianceField f(3, 4, 5, b);
  CHECK(f.vertex_count() == 3u * 4u * 5u);
  CHECK(f.raw_color().size() == f.vertex_count() * 3);
}

TEST_CASE("fresh field has the requested density and gray color everywhere") {
  Aabb b{{-1, -1, -1}, {1, 1, 1}};
  auto f = VoxelRadianceField::init_field(8, 8, 8, b, 0.1);
  // constants interpolate to themselves, so any point works
  for (Vec3 p : {Vec3{0, 0, 0}, Vec3{-1, -1, -1}, Vec3{0.37, -0.82, 0.11}, Vec3{1, 1, 1}}) {
    FieldSample s = f.query(p);
    CHECK(s.sigma == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(s.color.x == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.color.y == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.color.z == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK(f.raw_density()[0] == doctest::Approx(softplus_inverse(0.1)).epsilon(1e-12));
  CHECK(f.raw_color()[0] == 0.0);
}

TEST_CASE("queries at vertices return activated raw values exactly") {
  auto f = random_field(4, 3, 5, 11);
  const Aabb& b = f.bounds();
  Vec3 h = b.extent();
  for (int k = 0; k < 5; ++k)
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 4; ++i) {
        Vec3 p{b.lo.x + h.x * i / 3.0, b.lo.y + h.y * j / 2.0, b.lo.z + h.z * k / 4.0};
        std::size_t v = (static_cast<std::size_t>(k) * 3 + j) * 4 + i;
        FieldSample s = f.query(p);
        CHECK(s.sigma == doctest::Approx(softplus(f.raw_density()[v])).epsilon(1e-12));
        for (int c = 0; c < 3; ++c)
          CHECK(s.color[c] == doctest::Approx(sigmoid(f.raw_color()[v * 3 + c])).epsilon(1e-12));
      }
}

TEST_CASE("interpolation happens before activation") {
  // two vertices along x with known raws: the midpoint sees the raw average
  Aabb b{{0, 0, 0}, {1, 1, 1}};
  VoxelRadianceField f(2, 2, 2, b);
  for (double& v : f.raw_density()) v = -1.0;
  f.raw_density()[0] = 2.0;  // vertex (0,0,0)
  f.raw_density()[1] = 0.5;  // vertex (1,0,0)
  Vec3 p{0.25, 0, 0};
  double pre = 0.75 * 2.0 + 0.25 * 0.5;
  CHECK(f.query(p).sigma == doctest::Approx(softplus(pre)).epsilon(1e-12));
  // activating first would give a different number
  CHECK(f.query(p).sigma != doctest::Approx(0.75 * softplus(2.0) + 0.25 * softplus(0.5)));
}

TEST_CASE("midpoint of a cell averages all eight corners") {
  auto f = random_field(2, 2, 2, 3);
  Vec3 mid = (f.bounds().lo + f.bounds().hi) * 0.5;
  double pre = 0;
  for (int v = 0; v < 8; ++v) pre += f.raw_density()[v] / 8.0;
  CHECK(f.query(mid).sigma == doctest::Approx(softplus(pre)).epsilon(1e-12));
}

TEST_CASE("outside the bounds the field is exactly empty") {
  auto f = random_field(4, 4, 4, 5);
  const Aabb& b = f.bounds();
  for (Vec3 p : {Vec3{b.lo.x - 1e-9, 0, 1}, Vec3{0, b.hi.y + 1e-9, 1}, Vec3{100, 100, 100}}) {
    FieldSample s = f.query(p);
    CHECK(s.sigma == 0.0);
    CHECK(s.color.x == 0.0);
    GradientBuffer g;
    g.resize_for(f.vertex_count());
    f.query_backward(p, 1.0, {1, 1, 1}, g);
    for (double v : g.d_density) CHECK(v == 0.0);
  }
  // boundary faces are still inside
  CHECK(f.query({b.lo.x, 0.0, 1.0}).sigma > 0.0);
  CHECK(f.query(b.hi).sigma > 0.0);
}

TEST_CASE("query_backward matches finite differences") {
  auto f = random_field(4, 3, 5, 17);
  Rng rng(99, "probe-points");
  for (int trial = 0; trial < 5; ++trial) {
    Vec3 p = rng.next_in_box(f.bounds().lo, f.bounds().hi);
    double d_sigma = rng.next_double() * 2 - 1;
    Vec3 d_color{rng.next_double() * 2 - 1, rng.next_double() * 2 - 1, rng.next_double() * 2 - 1};

    GradientBuffer g;
    g.resize_for(f.vertex_count());
    f.query_backward(p, d_sigma, d_color, g);

    const double h = 1e-6;
    auto loss = [&]() {
      FieldSample s = f.query(p);
      return d_sigma * s.sigma + d_color.x * s.color.x + d_color.y * s.color.y +
             d_color.z * s.color.z;
    };
    for (std::size_t v = 0; v < f.vertex_count(); ++v) {
      double orig = f.raw_density()[v];
      f.raw_density()[v] = orig + h;
      double up = loss();
      f.raw_density()[v] = orig - h;
      double dn = loss();
      f.raw_density()[v] = orig;
      double fd = (up - dn) / (2 * h);
      CHECK(g.d_density[v] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
      for (int c = 0; c < 3; ++c) {
        double o = f.raw_color()[v * 3 + c];
        f.raw_color()[v * 3 + c] = o + h;
        double cu = loss();
        f.raw_color()[v * 3 + c] = o - h;
        double cd = loss();
        f.raw_color()[v * 3 + c] = o;
        CHECK(g.d_color[v * 3 + c] == doctest::Approx((cu - cd) / (2 * h)).epsilon(1e-5).scale(1.0));
      }
    }
  }
}

TEST_CASE("eight-corner gradient of a uniform field splits evenly") {
  Aabb b{{0, 0, 0}, {1, 1, 1}};
  VoxelRadianceField f(2, 2, 2, b);
  for (double& v : f.raw_density()) v = 0.7;
  GradientBuffer g;
  g.resize_for(8);
  f.query_backward({0.5, 0.5, 0.5}, 1.0, {0, 0, 0}, g);
  for (int v = 0; v < 8; ++v)
    CHECK(g.d_density[v] == doctest::Approx(softplus_deriv(0.7) / 8.0).epsilon(1e-12));
}

TEST_CASE("vertex spacing reports the coarsest axis") {
  VoxelRadianceField f(5, 3, 9, {{0, 0, 0}, {1, 1, 2}});
  // spacings: x 0.25, y 0.5, z 0.25
  CHECK(f.vertex_spacing() == doctest::Approx(0.5));
}

TEST_CASE("inject_floater overwrites a ball of vertices") {
  Aabb b{{-1, -1, -1}, {1, 1, 1}};
  auto f = VoxelRadianceField::init_field(17, 17, 17, b, 0.1);
  Vec3 center{0.2, -0.3, 0.1};
  f.inject_floater(center, 0.3, 6.0, {0.9, 0.1, 0.2});
  FieldSample s = f.query(center);
  CHECK(s.sigma == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(s.color.x == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(s.color.y == doctest::Approx(0.1).epsilon(1e-9));
  // far corner untouched
  CHECK(f.query({-0.9, 0.9, -0.9}).sigma == doctest::Approx(0.1).epsilon(1e-9));
  // a ball smaller than the vertex spacing placed between vertices is a bug
  CHECK_THROWS_AS(f.inject_floater({0.0625, 0.0625, 0.0625}, 0.01, 5.0, {1, 1, 1}),
                  ValidationError);
  CHECK_THROWS_AS(f.inject_floater(center, 0.3, 6.0, {1.5, 0, 0}), ValidationError);
}

TEST_CASE("checkpoint round trip is bit exact") {
  fs::path dir = fs::temp_directory_path() / "voxrf_ckpt_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto f = random_field(6, 5, 4, 23);
  std::string p1 = (dir / "a.ckpt").string();
  std::string p2 = (dir / "b.ckpt").string();
  f.save_checkpoint(p1);
  VoxelRadianceField g = VoxelRadianceField::load_checkpoint(p1);
  CHECK(g.nx() == 6);
  CHECK(g.ny() == 5);
  CHECK(g.nz() == 4);
  CHECK(g.bounds().lo.y == f.bounds().lo.y);
  g.save_checkpoint(p2);

  std::ifstream a(p1, std::ios::binary), bstream(p2, std::ios::binary);
  std::string da((std::istreambuf_iterator<char>(a)), {});
  std::string db((std::istreambuf_iterator<char>(bstream)), {});
  CHECK(da == db);
  CHECK(!da.empty());

  // params survive as float32
  for (std::size_t i = 0; i < f.vertex_count(); ++i)
    CHECK(g.raw_density()[i] == static_cast<double>(static_cast<float>(f.raw_density()[i])));
  fs::remove_all(dir);
}

TEST_CASE("checkpoint loader rejects corrupt files") {
  fs::path dir = fs::temp_directory_path() / "voxrf_ckpt_bad";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto f = random_field(3, 3, 3, 31);
  std::string good = (dir / "good.ckpt").string();
  f.save_checkpoint(good);

  SUBCASE("missing file") {
    CHECK_THROWS_AS(VoxelRadianceField::load_checkpoint((dir / "nope.ckpt").string()), IoError);
  }
  SUBCASE("bad magic") {
    std::fstream s(good, std::ios::in | std::ios::out | std::ios::binary);
    s.seekp(0);
    s.write("JUNK", 4);
    s.close();
    CHECK_THROWS_AS(VoxelRadianceField::load_checkpoint(good), IoError);
  }
  SUBCASE("truncated payload") {
    std::ifstream in(good, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), {});
    in.close();
    std::ofstream out(good, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size() - 13));
    out.close();
    CHECK_THROWS_AS(VoxelRadianceField::load_checkpoint(good), IoError);
  }
  SUBCASE("non-finite parameter") {
    std::ifstream in(good, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), {});
    in.close();
    const uint32_t nan_bits = 0x7fc00000u;
    std::memcpy(data.data() + data.size() - 4, &nan_bits, 4);
    std::ofstream out(good, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.close();
    CHECK_THROWS_AS(VoxelRadianceField::load_checkpoint(good), ValidationError);
  }
  fs::remove_all(dir);
}
