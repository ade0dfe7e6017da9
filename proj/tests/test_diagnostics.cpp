#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "cascade/diagnostics.hpp"
#include "cascade/fft.hpp"
#include "cascade/spectral_ops.hpp"
#include "support.hpp"

using namespace cascade;
using testing_support::random_solenoidal;

namespace {

SpectralField shear(const Grid& g, double amp) {
  PhysicalField p(g, 1);
  for (std::size_t i = 0; i < g.physical_size(); ++i) p.component(0)[i] = amp * std::sin(g.position(i)[1]);
  return forward_transform(p);
}

}  // namespace

TEST_CASE("spectrum of a single mode", "[diagnostics]") {
  const Grid g(2, 32);
  PhysicalField p(g, 1);
  const double a = 0.8;
  for (std::size_t i = 0; i < g.physical_size(); ++i) p.component(1)[i] = a * std::cos(3.0 * g.position(i)[0]);
  const auto spec = energy_spectrum(forward_transform(p));
  for (std::size_t k = 0; k < spec.k.size(); ++k) {
    // two modes +-3 each carrying |a/2|^2 / 2
    CHECK(std::abs(spec.energy[k] - (k == 3 ? a * a / 4.0 : 0.0)) < 1e-15);
  }
}

TEST_CASE("spectrum shell sum equals kinetic energy", "[diagnostics]") {
  for (int dim : {2, 3}) {
    const Grid g(dim, 16);
    const auto u = random_solenoidal(g, 7, 5 + dim);
    const auto p = inverse_transform(u);
    double e = 0.0;
    for (double v : p.values) e += 0.5 * v * v;
    e /= static_cast<double>(g.physical_size());
    CHECK(std::abs(energy_spectrum(u).total() - e) <= 1e-10 * e);
  }
}

TEST_CASE("second-order structure function", "[diagnostics]") {
  const Grid g(2, 16);
  SpectralField c(g, 1);
  c.component(0)[0] = 2.0;
  CHECK(structure_function_2(c, Vec3{0.3, 0.1, 0.0}) == 0.0);

  PhysicalField p(g, 1);
  for (std::size_t i = 0; i < g.physical_size(); ++i) p.component(0)[i] = std::sin(g.position(i)[0]);
  CHECK(std::abs(structure_function_2(forward_transform(p), Vec3{std::numbers::pi, 0.0, 0.0}) - 2.0) < 1e-13);

  // brute-force double loop over integer shifts
  const auto u = forward_transform(testing_support::random_physical(g, 1, 8));
  const auto up = inverse_transform(u);
  for (auto [a, b] : {std::pair{0, 0}, {1, 0}, {3, 5}, {8, 15}}) {
    double ref = 0.0;
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j) {
        const int ii = (i + a) % 16, jj = (j + b) % 16;
        for (int q = 0; q < 2; ++q) {
          const double d = up.component(q)[ii * 16 + jj] - up.component(q)[i * 16 + j];
          ref += d * d;
        }
      }
    }
    ref /= 256.0;
    const double s2 = structure_function_2(u, Vec3{a * g.spacing(), b * g.spacing(), 0.0});
    CHECK(std::abs(s2 - ref) < 1e-12);
    CHECK(s2 >= 0.0);
  }
}

TEST_CASE("longitudinal third-order structure function", "[diagnostics]") {
  const Grid g(3, 16);
  SpectralField c(g, 1);
  c.component(2)[0] = 1.0;
  const double r[] = {0.4, 0.9};
  for (double v : structure_function_3L(c, r)) CHECK(v == 0.0);

  // u(-x) = u(x) (real coefficients): increments are odd under x -> r - x
  SpectralField even = random_solenoidal(g, 4, 3);
  for (auto& z : even.coeffs) z = Complex{z.real(), 0.0};
  const auto p = inverse_transform(even);
  double scale = 0.0;
  for (double v : p.values) scale = std::max(scale, std::abs(v));
  for (double v : structure_function_3L(even, r)) CHECK(std::abs(v) < 1e-12 * scale * scale * scale);

  const auto u = random_solenoidal(g, 2, 19);
  const auto coarse = structure_function_3L(u, r);
  const auto dense = structure_function_3L(u, r, 640);
  for (std::size_t m = 0; m < 2; ++m) {
    INFO("r " << r[m] << " default " << coarse[m] << " dense " << dense[m]);
    CHECK(std::abs(coarse[m] - dense[m]) <= 1e-2 * std::abs(dense[m]));
  }
}

TEST_CASE("four-fifths coefficients", "[diagnostics]") {
  CHECK(four_fifths_coefficient(3) == -0.8);
  CHECK(four_fifths_coefficient(2) == -1.5);
  const Grid g(3, 16);
  auto u = random_solenoidal(g, 2, 4);
  u *= 1e-5;
  const double r[] = {2.0 * g.spacing(), 3.0 * g.spacing()};
  const auto table = four_fifths_check(u, r, KernelProfile::bump);
  CHECK(table.coefficient == -0.8);
  for (const auto& row : table.rows) {
    CHECK(row.indeterminate);
    CHECK(std::isnan(row.ratio));
  }
}

TEST_CASE("flux profile", "[diagnostics]") {
  const Grid g(2, 64);
  FlowState s(g, 0.01);
  s.u = shear(g, 1.0);
  s.f = SpectralField(g, 1);
  const double ell[] = {4.0 * g.spacing(), 8.0 * g.spacing(), 16.0 * g.spacing()};
  const auto prof = flux_profile(s, ell, KernelProfile::bump);
  for (double pi : prof.mean_flux) CHECK(std::abs(pi) < 1e-8);
  CHECK(std::abs(prof.dissipation - 0.005) < 1e-15);
  CHECK(prof.input == 0.0);
  const double bad[] = {8.0 * g.spacing(), 4.0 * g.spacing()};
  CHECK_THROWS_AS(flux_profile(s, bad, KernelProfile::bump), std::invalid_argument);

  // Galilean shift leaves the flux unchanged
  s.u = random_solenoidal(g, 12, 6);
  const auto before = flux_profile(s, ell, KernelProfile::bump);
  s.u.component(0)[0] += 3.0;
  s.u.component(1)[0] -= 1.5;
  const auto after = flux_profile(s, ell, KernelProfile::bump);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(before.mean_flux[i] - after.mean_flux[i]) < 1e-10);
}

TEST_CASE("scale report", "[diagnostics]") {
  const Grid g(2, 32);
  FlowState s(g, 1.0);
  s.u = shear(g, std::sqrt(2.0));
  const auto rep = scale_report(s);
  CHECK(std::abs(rep.dissipation - 1.0) < 1e-14);
  REQUIRE(rep.kolmogorov_length);
  CHECK(std::abs(*rep.kolmogorov_length - 1.0) < 1e-14);
  CHECK(std::abs(*rep.kolmogorov_time - 1.0) < 1e-14);
  CHECK(std::abs(rep.integral_scale - 2.0 * std::numbers::pi) < 1e-12);

  s.nu = 0.0;
  const auto inviscid = scale_report(s);
  CHECK_FALSE(inviscid.kolmogorov_length);
  CHECK_FALSE(inviscid.kolmogorov_time);
  CHECK_FALSE(inviscid.reynolds);
}
