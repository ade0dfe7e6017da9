#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "cascade/fft.hpp"
#include "cascade/spectral_ops.hpp"
#include "support.hpp"

using namespace cascade;
using namespace testing_support;
using Catch::Approx;

namespace {

PhysicalField sample(const Grid& g, int rank, auto&& fn) {
  PhysicalField f(g, rank);
  for (std::size_t p = 0; p < g.physical_size(); ++p) {
    const auto x = g.position(p);
    for (int c = 0; c < f.components(); ++c) f.component(c)[p] = fn(x, c);
  }
  return f;
}

std::size_t index_of(const Grid& g, int k0, int k1) {
  const int i0 = k0 < 0 ? k0 + g.n : k0;
  return static_cast<std::size_t>(i0) * g.half_n() + k1;
}

}  // namespace

TEST_CASE("grid rejects bad shapes", "[grid]") {
  CHECK_THROWS_AS(Grid(1, 16), std::invalid_argument);
  CHECK_THROWS_AS(Grid(4, 16), std::invalid_argument);
  CHECK_THROWS_AS(Grid(2, 6), std::invalid_argument);
  CHECK_THROWS_AS(Grid(2, 17), std::invalid_argument);
  CHECK_NOTHROW(Grid(3, 8));
  Grid g(2, 32);
  CHECK(g.spacing() == Approx(kTwoPi / 32));
  CHECK(g.wavenumber(15) == 15);
  CHECK(g.wavenumber(16) == -16);
  CHECK(g.wavenumber(31) == -1);
}

TEST_CASE("constant field has only the mean mode", "[fft]") {
  Grid g(2, 16);
  auto f = sample(g, 0, [](auto, int) { return 2.5; });
  auto s = forward_transform(f);
  CHECK(s.coeffs[0].real() == Approx(2.5).epsilon(1e-15));
  for (std::size_t i = 1; i < s.coeffs.size(); ++i) CHECK(std::abs(s.coeffs[i]) < 1e-15);
}

TEST_CASE("sin(x1) has two modes of magnitude one half", "[fft]") {
  Grid g(2, 32);
  auto f = sample(g, 0, [](auto x, int) { return std::sin(x[0]); });
  auto s = forward_transform(f);
  const auto ip = index_of(g, 1, 0);
  const auto im = index_of(g, -1, 0);
  CHECK(std::abs(s.coeffs[ip]) == Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(s.coeffs[im]) == Approx(0.5).epsilon(1e-14));
  int nonzero = 0;
  for (auto c : s.coeffs) nonzero += std::abs(c) > 1e-14;
  CHECK(nonzero == 2);
}

TEST_CASE("forward transform matches direct DFT summation", "[fft]") {
  Grid g(2, 16);
  auto f = random_physical(g, 0, 7);
  auto s = forward_transform(f);
  double worst = 0.0;
  for (std::size_t m = 0; m < s.coeffs.size(); ++m) {
    const auto k = g.wavevector(m);
    Complex acc{0.0, 0.0};
    for (std::size_t p = 0; p < g.physical_size(); ++p) {
      const auto x = g.position(p);
      const double ph = -(k[0] * x[0] + k[1] * x[1]);
      acc += f.values[p] * Complex{std::cos(ph), std::sin(ph)};
    }
    acc /= static_cast<double>(g.physical_size());
    worst = std::max(worst, std::abs(acc - s.coeffs[m]));
  }
  CHECK(worst < 1e-14);
  auto back = inverse_transform(s);
  CHECK(max_abs_diff(back, f) < 1e-12);
}

TEST_CASE("non-finite input is rejected", "[fft]") {
  Grid g(2, 8);
  PhysicalField f(g, 0);
  f.values[3] = std::nan("");
  CHECK_THROWS_AS(forward_transform(f), std::invalid_argument);
}

TEST_CASE("Hermitian symmetry on the self-conjugate plane", "[fft]") {
  Grid g(2, 16);
  auto s = forward_transform(random_physical(g, 0, 11));
  for (int k0 = 1; k0 < 8; ++k0) {
    CHECK(std::abs(s.coeffs[index_of(g, k0, 0)] - std::conj(s.coeffs[index_of(g, -k0, 0)])) < 1e-15);
  }
}

TEST_CASE("Parseval identity at several resolutions", "[fft][property]") {
  for (auto [dim, n] : {std::pair{2, 16}, {2, 64}, {3, 8}, {3, 16}}) {
    Grid g(dim, n);
    auto f = random_physical(g, 1, 100 + n + dim);
    double phys = 0.0;
    for (double v : f.values) phys += v * v;
    phys /= static_cast<double>(g.physical_size());
    const double spec = spectral_mean_square(forward_transform(f));
    CHECK(spec == Approx(phys).epsilon(1e-12));
  }
}

TEST_CASE("gradient of sin and of a constant", "[ops]") {
  Grid g(2, 32);
  auto s = forward_transform(sample(g, 0, [](auto x, int) { return std::sin(x[0]) + 3.0; }));
  auto grad = inverse_transform(spectral_gradient(s));
  auto expect = sample(g, 1, [](auto x, int c) { return c == 0 ? std::cos(x[0]) : 0.0; });
  CHECK(max_abs_diff(grad, expect) < 1e-13);
  auto grad2 = spectral_gradient(spectral_gradient(s));
  CHECK(grad2.rank == 2);
  CHECK_THROWS_AS(spectral_gradient(grad2), std::invalid_argument);
}

TEST_CASE("spectral gradient agrees with sixth-order differences", "[ops]") {
  Grid g(2, 128);
  auto s = random_band_limited(g, 0, 4, 21);
  auto f = inverse_transform(s);
  auto grad = inverse_transform(spectral_gradient(s));
  const int n = g.n;
  const double h = g.spacing();
  const double c1 = 3.0 / 4.0, c2 = -3.0 / 20.0, c3 = 1.0 / 60.0;
  double err = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      auto at = [&](int a, int b) { return f.values[((a + n) % n) * n + (b + n) % n]; };
      const double dx = (c1 * (at(i + 1, j) - at(i - 1, j)) + c2 * (at(i + 2, j) - at(i - 2, j)) +
                         c3 * (at(i + 3, j) - at(i - 3, j))) / h;
      const double dy = (c1 * (at(i, j + 1) - at(i, j - 1)) + c2 * (at(i, j + 2) - at(i, j - 2)) +
                         c3 * (at(i, j + 3) - at(i, j - 3))) / h;
      const std::size_t p = static_cast<std::size_t>(i) * n + j;
      err = std::max({err, std::abs(dx - grad.component(0)[p]), std::abs(dy - grad.component(1)[p])});
      scale = std::max({scale, std::abs(grad.component(0)[p]), std::abs(grad.component(1)[p])});
    }
  }
  CHECK(err / scale < 1e-6);
}

TEST_CASE("Leray projection", "[ops]") {
  Grid g(3, 16);
  SECTION("gradients are annihilated") {
    auto phi = random_band_limited(g, 0, 5, 3);
    auto p = leray_project(spectral_gradient(phi));
    double m = 0.0;
    for (auto c : p.coeffs) m = std::max(m, std::abs(c));
    CHECK(m < 1e-15);
  }
  SECTION("idempotent and divergence free") {
    auto u = random_band_limited(g, 1, 7, 4);
    auto p1 = leray_project(u);
    auto p2 = leray_project(p1);
    double d = 0.0;
    for (std::size_t i = 0; i < p1.coeffs.size(); ++i) d = std::max(d, std::abs(p1.coeffs[i] - p2.coeffs[i]));
    CHECK(d < 1e-14);
    CHECK(max_spectral_divergence(p1) < 1e-12);
  }
  SECTION("mean flow passes through") {
    auto u = random_band_limited(g, 1, 3, 5);
    auto p = leray_project(u);
    for (int c = 0; c < 3; ++c) CHECK(p.component(c)[0] == u.component(c)[0]);
  }
  CHECK_THROWS_AS(leray_project(random_band_limited(g, 0, 3, 1)), std::invalid_argument);
}

TEST_CASE("dealiasing", "[ops]") {
  Grid g(2, 32);
  auto low = random_band_limited(g, 0, 10, 8);
  auto kept = dealias(low);
  for (std::size_t i = 0; i < low.coeffs.size(); ++i) CHECK(kept.coeffs[i] == low.coeffs[i]);

  auto high = forward_transform(sample(g, 0, [](auto x, int) { return std::cos(11.0 * x[1]); }));
  for (auto c : dealias(high).coeffs) CHECK(std::abs(c) < 1e-14);

  auto s = forward_transform(sample(g, 0, [](auto x, int) { return std::sin(x[0]); }));
  auto prod = inverse_transform(dealiased_product(s, s));
  auto expect = sample(g, 0, [](auto x, int) { return 0.5 * (1.0 - std::cos(2.0 * x[0])); });
  CHECK(max_abs_diff(prod, expect) < 1e-12);
}

TEST_CASE("product rule after dealiased multiplication", "[ops][property]") {
  Grid g(2, 64);
  // Factors below n/6 keep the product inside the retained band.
  auto a = random_band_limited(g, 0, 9, 31);
  auto b = random_band_limited(g, 0, 9, 32);
  auto lhs = inverse_transform(spectral_gradient(dealiased_product(a, b)));
  auto pa = inverse_transform(a), pb = inverse_transform(b);
  auto ga = inverse_transform(spectral_gradient(a)), gb = inverse_transform(spectral_gradient(b));
  double err = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (std::size_t p = 0; p < g.physical_size(); ++p) {
      const double rhs = ga.component(i)[p] * pb.values[p] + pa.values[p] * gb.component(i)[p];
      err = std::max(err, std::abs(lhs.component(i)[p] - rhs));
    }
  }
  CHECK(err < 1e-10);
}

TEST_CASE("curl and Biot-Savart invert each other in 2D", "[ops]") {
  Grid g(2, 32);
  auto u = random_solenoidal(g, 8, 41);
  u.component(0)[0] = 0.3;
  u.component(1)[0] = -0.2;
  auto w = spectral_curl(u);
  auto back = velocity_from_vorticity(w, 0.3, -0.2);
  double d = 0.0;
  for (std::size_t i = 0; i < u.coeffs.size(); ++i) d = std::max(d, std::abs(u.coeffs[i] - back.coeffs[i]));
  CHECK(d < 1e-15);
}

TEST_CASE("refined inverse equals band-limited interpolant", "[fft]") {
  for (int dim : {2, 3}) {
    Grid g(dim, 16);
    auto s = random_band_limited(g, 0, 7, 50 + dim);
    auto fine = inverse_transform_refined(s, 3);
    const Grid fg(dim, 48);
    double err = 0.0;
    for (std::size_t p = 0; p < fg.physical_size(); p += 7) {
      const auto x = fg.position(p);
      err = std::max(err, std::abs(fine.values[p] - evaluate_at(s, 0, x.data())));
    }
    CHECK(err < 1e-13);
  }
}
