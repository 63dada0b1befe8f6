#include <cmath>
#include <random>

#include <doctest.h>

#include "inductherm/geometry.hpp"

using namespace inductherm;

namespace {

// 16x16 on the unit square: inner 6x6 workpiece, 2x2 coils left and right.
RegionGrid battery16() {
  const double h = 1.0 / 16;
  return RegionGrid::from_rects(1.0, 1.0, 16, 16, Rect{5 * h, 11 * h, 5 * h, 11 * h},
                                {{Rect{2 * h, 4 * h, 7 * h, 9 * h}, 1}, {Rect{12 * h, 14 * h, 7 * h, 9 * h}, -1}});
}

}  // namespace

TEST_CASE("region partition") {
  const RegionGrid g = battery16();
  int w = 0, ind = 0, air = 0;
  for (int c = 0; c < g.size(); ++c) {
    switch (g.region(c)) {
      case Region::Workpiece: ++w; break;
      case Region::Inductor: ++ind; break;
      case Region::Air: ++air; break;
    }
  }
  CHECK(w == 36);
  CHECK(ind == 8);
  CHECK(w + ind + air == 256);
  CHECK(g.workpiece_cells().size() == 36);

  const double h = 1.0 / 16;
  CHECK_THROWS_AS(RegionGrid::from_rects(1.0, 1.0, 16, 16, Rect{5 * h, 11 * h, 5 * h, 11 * h},
                                         {{Rect{4 * h, 7 * h, 7 * h, 9 * h}, 1}}),
                  GeometryError);
  CHECK_THROWS_AS(RegionGrid::from_rects(1.0, 1.0, 16, 16, Rect{0.0, 0.5, 0.25, 0.75}, {}), GeometryError);
}

TEST_CASE("mask text") {
  const RegionGrid g = battery16();
  const RegionGrid m = RegionGrid::from_mask_text(g.mask_text(), 1.0, 1.0);
  REQUIRE(m.size() == g.size());
  for (int c = 0; c < g.size(); ++c) {
    CHECK(m.region(c) == g.region(c));
    CHECK(m.polarity(c) == g.polarity(c));
  }
  CHECK_THROWS_AS(RegionGrid::from_mask_text(".....\n..W..\n....\n.....\n", 1.0, 1.0), GeometryError);
  CHECK_THROWS_AS(RegionGrid::from_mask_text(".....\n..W..\n..x..\n.....\n", 1.0, 1.0), GeometryError);
}

TEST_CASE("laplacian of x^2 is 2 in the interior") {
  const RegionGrid g = battery16();
  ScalarField f(static_cast<std::size_t>(g.size()));
  for (int c = 0; c < g.size(); ++c) f[static_cast<std::size_t>(c)] = g.x(c) * g.x(c) + 3.0 * g.y(c);
  const ScalarField lap = laplacian(g, g.domain_faces(), f);
  for (int c = 0; c < g.size(); ++c)
    if (!g.on_domain_boundary(c)) CHECK(lap[static_cast<std::size_t>(c)] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("curl of a linear potential") {
  const RegionGrid g = battery16();
  ScalarField a(static_cast<std::size_t>(g.size()));
  for (int c = 0; c < g.size(); ++c) a[static_cast<std::size_t>(c)] = 0.7 * g.x(c) + 0.2;
  const CellVector cv = curl2d(g, a);
  for (int c = 0; c < g.size(); ++c) {
    CHECK(std::abs(cv.x[static_cast<std::size_t>(c)]) < 1e-12);
    CHECK(cv.y[static_cast<std::size_t>(c)] == doctest::Approx(-0.7).epsilon(1e-12));
  }
}

TEST_CASE("summation by parts and laplacian symmetry") {
  const RegionGrid g = battery16();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (const auto* faces : {&g.domain_faces(), &g.workpiece_faces()}) {
    ScalarField f(static_cast<std::size_t>(g.size())), u(f.size());
    FaceField flux(faces->size());
    for (auto& v : f) v = nd(rng);
    for (auto& v : u) v = nd(rng);
    for (auto& v : flux) v = nd(rng);
    const ScalarField d = div(g, *faces, flux);
    const FaceField gf = grad(g, *faces, f);
    double lhs = 0.0, mag = 0.0;
    for (std::size_t c = 0; c < f.size(); ++c) {
      lhs += g.cell_volume() * f[c] * d[c];
      mag += std::abs(g.cell_volume() * f[c] * d[c]);
    }
    for (std::size_t k = 0; k < faces->size(); ++k) lhs += (*faces)[k].area() * gf[k] * flux[k];
    CHECK(std::abs(lhs) <= 1e-12 * mag);

    const ScalarField lf = laplacian(g, *faces, f), lu = laplacian(g, *faces, u);
    double a = 0.0, b = 0.0;
    for (std::size_t c = 0; c < f.size(); ++c) {
      a += lf[c] * u[c];
      b += f[c] * lu[c];
    }
    CHECK(std::abs(a - b) <= 1e-12 * (std::abs(a) + std::abs(b) + 1.0));
  }
}

TEST_CASE("quadrature") {
  const RegionGrid g = battery16();
  const ScalarField one(static_cast<std::size_t>(g.size()), 1.0), zero(one.size(), 0.0);
  CHECK(integrate(g, one, Region::Workpiece) == doctest::Approx(36.0 / 256.0).epsilon(1e-14));
  CHECK(integrate(g, one) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(integrate(g, zero, Region::Workpiece) == 0.0);
  ScalarField x(one.size());
  for (int c = 0; c < g.size(); ++c) x[static_cast<std::size_t>(c)] = g.x(c) - 0.5;
  CHECK(std::abs(integrate(g, x, Region::Workpiece)) < 1e-15);
}
