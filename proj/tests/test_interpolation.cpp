#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "cascade/filter.hpp"
#include "cascade/interpolation.hpp"
#include "support.hpp"

using namespace cascade;
using testing_support::evaluate_at;
using testing_support::random_solenoidal;

namespace {

std::vector<Vec3> random_points(int count, int dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 2.0 * std::numbers::pi + 1.0);
  std::vector<Vec3> pts(count, Vec3{0.0, 0.0, 0.0});
  for (auto& p : pts) {
    for (int i = 0; i < dim; ++i) p[i] = dist(rng);
  }
  return pts;
}

}  // namespace

TEST_CASE("constant field interpolates to the constant", "[interp]") {
  const Grid g(2, 16);
  SpectralField u(g, 1);
  u.component(0)[0] = 0.7;
  u.component(1)[0] = -1.2;
  for (auto scheme : {InterpolationScheme::spectral, InterpolationScheme::cubic}) {
    FieldInterpolant it(u, scheme, 2);
    for (const auto& x : random_points(20, 2, 3)) {
      double v[2];
      it.evaluate(x, v);
      CHECK(v[0] == Catch::Approx(0.7).margin(1e-14));
      CHECK(v[1] == Catch::Approx(-1.2).margin(1e-14));
    }
  }
}

TEST_CASE("sin mode off grid, spectral evaluation", "[interp]") {
  const Grid g(2, 16);
  PhysicalField p(g, 0);
  for (std::size_t i = 0; i < g.physical_size(); ++i) p.values[i] = std::sin(g.position(i)[0]);
  FieldInterpolant it(forward_transform(p), InterpolationScheme::spectral);
  double v;
  it.evaluate(Vec3{std::numbers::pi / 2, 0.3, 0.0}, &v);
  CHECK(std::abs(v - 1.0) < 1e-10);
  double val, grad[2];
  it.evaluate_with_gradient(Vec3{0.4, 1.1, 0.0}, &val, grad);
  CHECK(std::abs(grad[0] - std::cos(0.4)) < 1e-12);
  CHECK(std::abs(grad[1]) < 1e-12);
}

TEST_CASE("spectral evaluation matches direct mode sum", "[interp]") {
  const Grid g(3, 16);
  SpectralField u = random_solenoidal(g, 5, 11);
  FieldInterpolant it(u, InterpolationScheme::spectral);
  for (const auto& x : random_points(5, 3, 8)) {
    double v[3];
    it.evaluate(x, v);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(v[c] - evaluate_at(u, c, x.data())) < 1e-12);
  }
}

TEST_CASE("cubic spline agrees with spectral evaluation on filtered fields", "[interp]") {
  const Grid g(2, 64);
  SpectralField u = random_solenoidal(g, 21, 5);
  const auto kernel = make_filter_kernel(g, KernelProfile::bump, 4.0 * g.spacing());
  SpectralField ubar = mollify(u, kernel);
  FieldInterpolant exact(ubar, InterpolationScheme::spectral);
  FieldInterpolant cubic(ubar, InterpolationScheme::cubic, 8);
  const auto pts = random_points(1000, 2, 21);
  double err = 0.0, scale = 0.0;
  for (const auto& x : pts) {
    double a[2], b[2];
    exact.evaluate(x, a);
    cubic.evaluate(x, b);
    for (int c = 0; c < 2; ++c) {
      err = std::max(err, std::abs(a[c] - b[c]));
      scale = std::max(scale, std::abs(a[c]));
    }
  }
  INFO("max error " << err << " field scale " << scale);
  CHECK(err < 1e-6);
}

TEST_CASE("cubic spline interpolates grid samples and its gradient converges", "[interp]") {
  const Grid g(3, 16);
  SpectralField u = random_solenoidal(g, 3, 9);
  PhysicalField p = inverse_transform(u);
  FieldInterpolant cubic(u, InterpolationScheme::cubic, 1);
  for (std::size_t i = 0; i < g.physical_size(); i += 97) {
    const auto x = g.position(i);
    double v[3];
    cubic.evaluate(Vec3{x[0], x[1], x[2]}, v);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(v[c] - p.component(c)[i]) < 1e-12);
  }
  FieldInterpolant exact(u, InterpolationScheme::spectral);
  double errs[2];
  int r = 0;
  for (int refine : {2, 4}) {
    FieldInterpolant fine(u, InterpolationScheme::cubic, refine);
    double e = 0.0;
    for (const auto& x : random_points(50, 3, 4)) {
      double a[3], ga[9], b[3], gb[9];
      exact.evaluate_with_gradient(x, a, ga);
      fine.evaluate_with_gradient(x, b, gb);
      for (int q = 0; q < 9; ++q) e = std::max(e, std::abs(ga[q] - gb[q]));
    }
    errs[r++] = e;
  }
  // spline derivative error is third order
  CHECK(errs[0] / errs[1] > 6.0);
}

TEST_CASE("non-finite positions are rejected", "[interp]") {
  const Grid g(2, 16);
  SpectralField u(g, 1);
  FieldInterpolant it(u);
  double v[2];
  CHECK_THROWS_AS(it.evaluate(Vec3{std::nan(""), 0.0, 0.0}, v), std::invalid_argument);
}
