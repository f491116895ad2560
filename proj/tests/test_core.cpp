#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <thread>

#include "voxrf/common.hpp"
#include "voxrf/parallel.hpp"
#include "voxrf/rng.hpp"

using namespace voxrf;

TEST_CASE("vector algebra basics") {
  Vec3 a{1, 2, 3}, b{4, -5, 6};
  CHECK(dot(a, b) == doctest::Approx(12.0));
  Vec3 c = cross(Vec3{1, 0, 0}, Vec3{0, 1, 0});
  CHECK(c.x == 0);
  CHECK(c.y == 0);
  CHECK(c.z == 1);
  CHECK(norm(Vec3{3, 4, 0}) == doctest::Approx(5.0));
  CHECK_THROWS_AS(normalized(Vec3{0, 0, 0}), ValidationError);
}

TEST_CASE("rotation helpers") {
  Mat3 id = Mat3::identity();
  CHECK(determinant(id) == doctest::Approx(1.0));
  Vec3 v{1, 2, 3};
  Vec3 r = id * v;
  CHECK(r.x == 1);
  CHECK(r.y == 2);
  CHECK(r.z == 3);
  Mat3 t = id.transposed();
  CHECK(determinant(t) == doctest::Approx(1.0));
}

TEST_CASE("softplus and sigmoid") {
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // softplus(1) = ln(1 + e)
  CHECK(softplus(1.0) == doctest::Approx(1.3132616875182228).epsilon(1e-12));
  CHECK(softplus(50.0) == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(softplus(-50.0) == doctest::Approx(std::exp(-50.0)).epsilon(1e-6));
  CHECK(softplus(softplus_inverse(0.1)) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(softplus_inverse(0.1) == doctest::Approx(-2.2521684610440907).epsilon(1e-12));
  CHECK_THROWS_AS(softplus_inverse(-1.0), ValidationError);

  CHECK(sigmoid(0.0) == doctest::Approx(0.5));
  CHECK(sigmoid(30.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sigmoid(-30.0) == doctest::Approx(0.0).epsilon(1e-9));
  // derivative by central difference
  double h = 1e-6;
  for (double x : {-2.0, -0.3, 0.0, 1.7}) {
    double fd = (sigmoid(x + h) - sigmoid(x - h)) / (2 * h);
    CHECK(sigmoid_deriv(x) == doctest::Approx(fd).epsilon(1e-6));
    double fd_sp = (softplus(x + h) - softplus(x - h)) / (2 * h);
    CHECK(softplus_deriv(x) == doctest::Approx(fd_sp).epsilon(1e-6));
  }
}

TEST_CASE("softened density maps to [0,1)") {
  CHECK(softened_density(0.0) == doctest::Approx(0.0));
  CHECK(softened_density(1e9) == doctest::Approx(1.0));
  // sigma = ln 3 sits exactly at the display midpoint
  CHECK(softened_density(std::log(3.0)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(softened_density(0.5) > 0.0);
  CHECK(softened_density(0.5) < softened_density(2.0));
}

TEST_CASE("aabb validation and containment") {
  Aabb box{{-1, -1, -1}, {1, 1, 1}};
  box.validate();
  CHECK(box.contains({0, 0, 0}));
  CHECK(box.contains({1, 1, 1}));  // faces count as inside
  CHECK(!box.contains({1.0001, 0, 0}));
  CHECK(box.diagonal() == doctest::Approx(2 * std::sqrt(3.0)));
  Aabb bad{{1, 0, 0}, {0, 1, 1}};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("rng streams are deterministic and independent") {
  Rng a(42, "jitter", 7), b(42, "jitter", 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c(42, "jitter", 8), d(42, "batch", 7);
  Rng e(43, "jitter", 7);
  Rng base(42, "jitter", 7);
  // different index, purpose, or seed should not reproduce the stream
  CHECK(c.next_u64() != base.next_u64());
  Rng base2(42, "jitter", 7);
  base2.next_u64();
  CHECK(d.next_u64() != base2.next_u64());
}

TEST_CASE("rng uniforms stay in range and fill it") {
  Rng r(1, "test");
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = r.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);

  std::set<uint64_t> seen;
  Rng s(1, "below");
  for (int i = 0; i < 3000; ++i) {
    uint64_t v = s.next_below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
  CHECK_THROWS_AS(s.next_below(0), ValidationError);
}

TEST_CASE("rng box sampling respects bounds") {
  Rng r(9, "box");
  Vec3 lo{-2, 0, 1}, hi{-1, 3, 4};
  for (int i = 0; i < 1000; ++i) {
    Vec3 p = r.next_in_box(lo, hi);
    for (int a = 0; a < 3; ++a) {
      CHECK(p[a] >= lo[a]);
      CHECK(p[a] < hi[a]);
    }
  }
}

TEST_CASE("parallel_for covers every index exactly once") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) hits[i] += 1;
  });
  for (int h : hits) CHECK(h == 1);
  // zero work is a no-op
  parallel_for(0, [&](std::size_t, std::size_t) { CHECK(false); });
}

TEST_CASE("chunk-ordered merging is thread-count independent") {
  // The pattern every hot loop uses: parallel compute into slots, merge in
  // index order. The merged sum must be bit-identical however the slots were
  // filled.
  std::vector<double> values(5000);
  Rng r(3, "vals");
  for (double& v : values) v = r.next_double() * 2.0 - 1.0;

  auto run = [&] {
    std::vector<double> slot(values.size());
    parallel_for(values.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) slot[i] = std::sin(values[i]) / (1.0 + values[i] * values[i]);
    });
    double sum = 0;
    for (double s : slot) sum += s;
    return sum;
  };
  double first = run();
  for (int rep = 0; rep < 3; ++rep) CHECK(run() == first);
}
