#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "cascade/fft.hpp"
#include "cascade/filter.hpp"
#include "cascade/forcing.hpp"
#include "cascade/separation.hpp"
#include "cascade/solver.hpp"
#include "cascade/spectral_ops.hpp"
#include "support.hpp"

using namespace cascade;
using namespace testing_support;
using Catch::Approx;

namespace {

PhysicalField taylor_green_field(const Grid& g, double amp = 1.0) {
  PhysicalField u(g, 1);
  for (std::size_t p = 0; p < g.physical_size(); ++p) {
    const auto x = g.position(p);
    u.component(0)[p] = amp * std::sin(x[0]) * std::cos(x[1]);
    u.component(1)[p] = -amp * std::cos(x[0]) * std::sin(x[1]);
  }
  return u;
}

// Circular convolution with the grid-sampled bump, written out directly.
struct DirectMollifier {
  const Grid& g;
  double ell;
  std::vector<double> w;  // normalised weights indexed by offset
  DirectMollifier(const Grid& grid, double scale) : g(grid), ell(scale), w(grid.physical_size()) {
    const int n = g.n;
    double total = 0.0;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const double dx = (a <= n / 2 ? a : a - n) * g.spacing();
        const double dy = (b <= n / 2 ? b : b - n) * g.spacing();
        const double r = std::sqrt(dx * dx + dy * dy) / ell;
        const double v = r < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0;
        w[a * n + b] = v;
        total += v;
      }
    }
    for (auto& v : w) v /= total;
  }
  double at(std::span<const double> f, int i, int j) const {
    const int n = g.n;
    double s = 0.0;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const double wv = w[a * n + b];
        if (wv == 0.0) continue;
        s += wv * f[((i + a) % n) * n + (j + b) % n];
      }
    }
    return s;
  }
  PhysicalField apply(const PhysicalField& f) const {
    PhysicalField out(f.grid, f.rank);
    const int n = g.n;
    for (int c = 0; c < f.components(); ++c) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) out.component(c)[i * n + j] = at(f.component(c), i, j);
      }
    }
    return out;
  }
};

std::size_t mode(const Grid& g, int k0, int k1) {
  return static_cast<std::size_t>(k0 < 0 ? k0 + g.n : k0) * g.half_n() + k1;
}

double l2(const PhysicalField& f) {
  double s = 0.0;
  for (double v : f.values) s += v * v;
  return std::sqrt(s / static_cast<double>(f.values.size()));
}

}  // namespace

TEST_CASE("filter kernel invariants", "[filters]") {
  const Grid g(2, 64);
  CHECK_THROWS_AS(make_filter_kernel(g, KernelProfile::bump, 1.9 * g.spacing()), std::invalid_argument);
  for (auto profile : {KernelProfile::bump, KernelProfile::gaussian}) {
    auto k = make_filter_kernel(g, profile, 6 * g.spacing());
    CHECK(k.at(0) == 1.0);
    for (double m : *k.multiplier) CHECK(m <= 1.0);
  }
  const double ell = 5 * g.spacing();
  auto w = sampled_kernel_weights(g, ell);
  double total = 0.0;
  for (std::size_t p = 0; p < w.size(); ++p) {
    CHECK(w[p] >= 0.0);
    total += w[p];
    const auto x = g.position(p);
    const double dx = std::min(x[0], kTwoPi - x[0]), dy = std::min(x[1], kTwoPi - x[1]);
    if (std::hypot(dx, dy) >= ell) CHECK(w[p] == 0.0);
  }
  CHECK(total == Approx(1.0).epsilon(1e-14));
  // Repeated construction hits the cache.
  auto a = make_filter_kernel(g, KernelProfile::bump, ell);
  auto b = make_filter_kernel(g, KernelProfile::bump, ell);
  CHECK(a.multiplier.get() == b.multiplier.get());
}

TEST_CASE("gaussian kernel matches the bump second moment", "[filters]") {
  // Independent estimate: trapezoid in rho on a very fine grid.
  for (int dim : {2, 3}) {
    const int m = 200000;
    double num = 0.0, den = 0.0;
    for (int i = 1; i < m; ++i) {
      const double r = double(i) / m;
      const double b = std::exp(-1.0 / (1.0 - r * r));
      den += std::pow(r, dim - 1) * b;
      num += std::pow(r, dim + 1) * b;
    }
    CHECK(bump_axis_second_moment(dim) == Approx(num / den / dim).epsilon(1e-9));
  }
}

TEST_CASE("mollify basics", "[filters]") {
  const Grid g(2, 32);
  auto k = make_filter_kernel(g, KernelProfile::bump, 0.5);
  PhysicalField c(g, 0);
  for (auto& v : c.values) v = 1.7;
  auto cb = mollify(c, k);
  for (double v : cb.values) CHECK(v == Approx(1.7).epsilon(1e-15));

  PhysicalField s(g, 0);
  for (std::size_t p = 0; p < g.physical_size(); ++p) s.values[p] = std::sin(g.position(p)[0]);
  auto sb = mollify(s, k);
  const double g1 = k.at(mode(g, 1, 0));
  for (std::size_t p = 0; p < g.physical_size(); ++p) CHECK(std::abs(sb.values[p] - g1 * s.values[p]) < 1e-14);

  auto u = forward_transform(random_physical(g, 1, 4));
  CHECK(spectral_mean_square(mollify(u, k)) <= spectral_mean_square(u) * (1 + 1e-12));
}

TEST_CASE("spectral mollification equals direct convolution", "[filters]") {
  const Grid g(2, 32);
  auto f = random_physical(g, 0, 99);
  auto k = make_filter_kernel(g, KernelProfile::bump, 0.5);
  auto fast = mollify(f, k);
  auto slow = DirectMollifier(g, 0.5).apply(f);
  CHECK(max_abs_diff(fast, slow) / max_abs(slow) < 1e-8);
}

TEST_CASE("subfilter stress", "[filters]") {
  const Grid g(2, 64);
  auto k = make_filter_kernel(g, KernelProfile::bump, 0.4);

  SECTION("constant velocity has no stress") {
    SpectralField u(g, 1);
    u.component(0)[0] = 2.0;
    u.component(1)[0] = -1.0;
    for (auto c : subfilter_stress(u, k).coeffs) CHECK(std::abs(c) < 1e-15);
  }
  SECTION("shear flow closed form") {
    PhysicalField up(g, 1);
    for (std::size_t p = 0; p < g.physical_size(); ++p) up.component(0)[p] = std::sin(g.position(p)[1]);
    auto tau = inverse_transform(subfilter_stress(forward_transform(up), k));
    const double g1 = k.at(mode(g, 0, 1)), g2 = k.at(mode(g, 0, 2));
    double err = 0.0, other = 0.0;
    for (std::size_t p = 0; p < g.physical_size(); ++p) {
      const double y = g.position(p)[1];
      const double expect = 0.5 * (1.0 - g2 * std::cos(2 * y)) - g1 * g1 * std::sin(y) * std::sin(y);
      err = std::max(err, std::abs(tau.component(0)[p] - expect));
      for (int c = 1; c < 4; ++c) other = std::max(other, std::abs(tau.component(c)[p]));
    }
    CHECK(err < 1e-14);
    CHECK(other < 1e-15);
  }
  SECTION("symmetric tensor") {
    const Grid g3(3, 16);
    auto k3 = make_filter_kernel(g3, KernelProfile::bump, 4 * g3.spacing());
    auto tau = subfilter_stress(random_solenoidal(g3, 5, 8), k3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        auto a = tau.component(i * 3 + j), b = tau.component(j * 3 + i);
        for (std::size_t s = 0; s < a.size(); ++s) CHECK(std::abs(a[s] - b[s]) <= 1e-14);
      }
    }
  }
}

TEST_CASE("subfilter stress scales like l^2 on smooth data", "[filters]") {
  const Grid g(2, 256);
  auto u = random_solenoidal(g, 3, 14);
  const double h = g.spacing();
  auto big = inverse_transform(subfilter_stress(u, make_filter_kernel(g, KernelProfile::bump, 4 * h)));
  auto small = inverse_transform(subfilter_stress(u, make_filter_kernel(g, KernelProfile::bump, 2 * h)));
  CHECK(l2(big) / l2(small) == Approx(4.0).epsilon(0.15));
}

TEST_CASE("flux of a constant field vanishes", "[filters]") {
  const Grid g(2, 32);
  SpectralField u(g, 1);
  u.component(1)[0] = 3.0;
  auto pi = flux_pi(u, make_filter_kernel(g, KernelProfile::bump, 0.5));
  CHECK(max_abs(pi) < 1e-14);
}

TEST_CASE("Taylor-Green flux matches direct quadrature", "[filters]") {
  const Grid g(2, 32);
  const double ell = 0.6;
  auto k = make_filter_kernel(g, KernelProfile::bump, ell);
  const PhysicalField u = taylor_green_field(g);
  const DirectMollifier dm(g, ell);
  // Analytic gradients and products, filtered by direct convolution.
  PhysicalField grad(g, 2), prod(g, 2);
  for (std::size_t p = 0; p < g.physical_size(); ++p) {
    const auto x = g.position(p);
    const double c0 = std::cos(x[0]), s0 = std::sin(x[0]), c1 = std::cos(x[1]), s1 = std::sin(x[1]);
    grad.component(0)[p] = c0 * c1;   // d1 u1
    grad.component(1)[p] = s0 * s1;   // d1 u2
    grad.component(2)[p] = -s0 * s1;  // d2 u1
    grad.component(3)[p] = -c0 * c1;  // d2 u2
    const double a = u.component(0)[p], b = u.component(1)[p];
    prod.component(0)[p] = a * a;
    prod.component(1)[p] = a * b;
    prod.component(2)[p] = a * b;
    prod.component(3)[p] = b * b;
  }
  const PhysicalField ub = dm.apply(u), gb = dm.apply(grad), pb = dm.apply(prod);
  PhysicalField expect(g, 0);
  for (std::size_t p = 0; p < g.physical_size(); ++p) {
    double s = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double tau = pb.component(i * 2 + j)[p] - ub.component(i)[p] * ub.component(j)[p];
        s -= gb.component(i * 2 + j)[p] * tau;
      }
    }
    expect.values[p] = s;
  }
  const auto got = flux_pi(forward_transform(u), k);
  CHECK(max_abs_diff(got, expect) < 1e-8);
  CHECK(max_abs(expect) > 1e-6);
}

namespace {

double mean_abs_flux_slope(const SpectralField& u, std::initializer_list<double> widths) {
  const double h = u.grid.spacing();
  std::vector<double> ls, vs;
  for (double m : widths) {
    const auto pi = flux_pi(u, make_filter_kernel(u.grid, KernelProfile::bump, m * h));
    double a = 0.0;
    for (double v : pi.values) a += std::abs(v);
    ls.push_back(std::log(m * h));
    vs.push_back(std::log(a / static_cast<double>(pi.values.size())));
  }
  return (vs.back() - vs.front()) / (ls.back() - ls.front());
}

}  // namespace

TEST_CASE("flux vanishes like l^2 on smooth 3D data", "[filters]") {
  const Grid g(3, 128);
  const double slope = mean_abs_flux_slope(random_solenoidal(g, 1, 61), {4.0, 8.0, 16.0});
  CHECK(slope > 1.7);
  CHECK(slope < 2.3);
}

TEST_CASE("2D flux has no l^2 term", "[filters]") {
  // For a traceless 2x2 gradient A, tr(A A A^T) = 0, so the leading
  // gradient-expansion flux cancels and the next order is l^4.
  const Grid g(2, 256);
  const double slope = mean_abs_flux_slope(random_solenoidal(g, 2, 61), {2.0, 4.0});
  CHECK(slope > 3.5);
}

TEST_CASE("filtered acceleration", "[filters]") {
  const Grid g(2, 32);
  auto k = make_filter_kernel(g, KernelProfile::bump, 0.5);

  SECTION("rest and uniform motion have zero acceleration") {
    FlowState s(g, 0.3);
    CHECK(max_abs(filtered_acceleration(s, k)) == 0.0);
    s.u.component(0)[0] = 1.2;
    s.u.component(1)[0] = 0.4;
    CHECK(max_abs(filtered_acceleration(s, k)) < 1e-15);
  }
  SECTION("decaying Taylor-Green against a two-snapshot difference") {
    const double nu = 0.05, t = 0.3, dt = 1e-4;
    auto at_time = [&](double tt) { return forward_transform(taylor_green_field(g, std::exp(-2 * nu * tt))); };
    FlowState s(g, nu);
    s.u = at_time(t);
    const PhysicalField a = filtered_acceleration(s, k);
    const PhysicalField up = inverse_transform(mollify(at_time(t + dt), k));
    const PhysicalField um = inverse_transform(mollify(at_time(t - dt), k));
    const SpectralField ubs = mollify(s.u, k);
    const PhysicalField ub = inverse_transform(ubs), gb = inverse_transform(spectral_gradient(ubs));
    double err = 0.0, scale = 0.0;
    for (int j = 0; j < 2; ++j) {
      for (std::size_t p = 0; p < g.physical_size(); ++p) {
        double e = (up.component(j)[p] - um.component(j)[p]) / (2 * dt);
        for (int i = 0; i < 2; ++i) e += ub.component(i)[p] * gb.component(i * 2 + j)[p];
        err = std::max(err, std::abs(a.component(j)[p] - e));
        scale = std::max(scale, std::abs(e));
      }
    }
    CHECK(err / scale < 1e-4);
  }
  SECTION("term-by-term assembly agrees") {
    FlowState s(g, 0.02, 0.1);
    s.u = random_solenoidal(g, 9, 2);
    s.f = random_solenoidal(g, 4, 3);
    const auto a = filtered_acceleration(s, k);
    const auto b = filtered_acceleration_terms(s, k);
    CHECK(max_abs_diff(a, b) / max_abs(a) < 1e-12);
  }
}

TEST_CASE("resolved energy budget", "[filters]") {
  const Grid g(2, 64);
  auto k = make_filter_kernel(g, KernelProfile::bump, 6 * g.spacing());

  SECTION("zero flow") {
    FlowState s(g, 0.1);
    auto b = resolved_budget(s, k);
    CHECK(b.mean_energy_rate == 0.0);
    CHECK(b.residual_rms == 0.0);
    CHECK(b.global_rate() == 0.0);
  }
  SECTION("unforced inviscid flow: transport integrates to zero") {
    FlowState s(g, 0.0);
    s.u = random_solenoidal(g, 8, 31);
    auto b = resolved_budget(s, k);
    CHECK(std::abs(b.mean_transport) < 1e-10);
    CHECK(std::abs(b.mean_residual) < 1e-10);
    CHECK(std::abs(b.mean_energy_rate - b.global_rate()) < 1e-12);
  }
  SECTION("forced run: time-integrated budget closes") {
    FlowState s(g, 0.005);
    s.u = random_solenoidal(g, 12, 44);
    ForcingSpec spec;
    spec.kind = ForcingKind::shell;
    spec.k_f = 8;
    spec.law = AmplitudeLaw::fixed_input_rate;
    spec.input_rate = 0.1;
    auto forcing = make_forcing(g, spec);
    const double dt = 2e-3;
    const double e0 = resolved_budget(s, k).resolved_energy;
    double integral = 0.0, scale = 0.0;
    for (int i = 0; i < 100; ++i) {
      const SpectralField f = forcing->sample(s.u, s.step);
      s.f = f;
      const auto before = resolved_budget(s, k);
      advance(s, f, dt);
      const auto after = resolved_budget(s, k);
      integral += 0.5 * dt * (before.global_rate() + after.global_rate());
      scale += 0.5 * dt * (std::abs(before.mean_flux) + std::abs(before.mean_forcing_work) + before.mean_viscous);
    }
    const double e1 = resolved_budget(s, k).resolved_energy;
    CHECK(std::abs((e1 - e0) - integral) / scale < 1e-4);
  }
}

TEST_CASE("separation quadrature", "[filters]") {
  const Grid g(2, 64);
  for (int dim : {2, 3}) {
    const Grid gd(dim, 32);
    for (auto prof : {SeparationProfile::bump, SeparationProfile::gaussian_truncated}) {
      const double R = 0.8;
      auto q = make_separation_quadrature(gd, R, prof);
      // 3D rounds 64 up to a 6 x 12 product rule
      CHECK(q.directions == (dim == 2 ? 32 : 72));
      CHECK(q.nodes.size() == static_cast<std::size_t>(q.directions * 4));
      double wsum = 0.0;
      for (std::size_t j = 0; j < q.nodes.size(); ++j) {
        wsum += q.weights[j];
        CHECK(std::hypot(q.nodes[j][0], q.nodes[j][1], q.nodes[j][2]) <= R);
      }
      CHECK(wsum == Approx(1.0).epsilon(1e-14));
      CHECK(separation_average([](const Vec3&) { return 2.5; }, q) == Approx(2.5).epsilon(1e-14));
      CHECK(std::abs(separation_average([](const Vec3& r) { return r[0]; }, q)) < 1e-15);
      // Radial oracle: midpoint rule on a fine grid in rho.
      const int m = 400000;
      double num = 0.0, den = 0.0;
      for (int i = 0; i < m; ++i) {
        const double rho = (i + 0.5) / m;
        const double w = std::pow(rho, dim - 1) * separation_profile(prof, rho);
        num += w * rho * rho;
        den += w;
      }
      const double expect = R * R * num / den;
      const double got = separation_average([](const Vec3& r) { return r[0] * r[0] + r[1] * r[1] + r[2] * r[2]; }, q);
      CHECK(got == Approx(expect).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(make_separation_quadrature(g, 1.5 * g.spacing(), SeparationProfile::bump), std::invalid_argument);
}

TEST_CASE("separation average of sampled fields", "[filters]") {
  const Grid g(2, 16);
  auto q = make_separation_quadrature(g, 1.0, SeparationProfile::bump, 8, 2);
  std::vector<PhysicalField> samples;
  for (std::size_t j = 0; j < q.nodes.size(); ++j) {
    PhysicalField f(g, 0);
    for (auto& v : f.values) v = 3.0;
    samples.push_back(f);
  }
  auto avg = separation_average(samples, q);
  for (double v : avg.values) CHECK(v == Approx(3.0).epsilon(1e-14));
  samples.pop_back();
  CHECK_THROWS_AS(separation_average(samples, q), std::invalid_argument);
}
