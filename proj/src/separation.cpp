#include "cascade/separation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cascade/quadrature.hpp"

namespace cascade {

std::string to_string(SeparationProfile p) {
  return p == SeparationProfile::bump ? "bump" : "gaussian_truncated";
}

SeparationProfile separation_profile_from_string(const std::string& s) {
  if (s == "bump") return SeparationProfile::bump;
  if (s == "gaussian_truncated" || s == "gaussian") return SeparationProfile::gaussian_truncated;
  throw std::invalid_argument("unknown separation profile '" + s + "'");
}

double separation_profile(SeparationProfile p, double rho) {
  if (rho >= 1.0 || rho < 0.0) return 0.0;
  if (p == SeparationProfile::bump) return std::exp(-1.0 / (1.0 - rho * rho));
  return std::exp(-2.0 * rho * rho);  // sigma = R/2, cut at R
}

DirectionRule make_direction_rule(int dim, int count) {
  if (count < 2) throw std::invalid_argument("direction rule needs at least 2 directions");
  DirectionRule r;
  if (dim == 2) {
    for (int j = 0; j < count; ++j) {
      const double th = 2.0 * std::numbers::pi * j / count;
      r.directions.push_back({std::cos(th), std::sin(th), 0.0});
      r.weights.push_back(1.0 / count);
    }
    return r;
  }
  // about twice as many azimuths as polar nodes balances the exactness degrees
  int polar = std::max(2, static_cast<int>(std::lround(std::sqrt(count / 2.0))));
  int azimuth = (count + polar - 1) / polar;
  if (azimuth % 2) ++azimuth;
  const QuadratureRule mu = gauss_legendre(polar);
  for (int a = 0; a < polar; ++a) {
    const double st = std::sqrt(1.0 - mu.nodes[a] * mu.nodes[a]);
    for (int b = 0; b < azimuth; ++b) {
      const double ph = 2.0 * std::numbers::pi * (b + 0.5) / azimuth;
      r.directions.push_back({st * std::cos(ph), st * std::sin(ph), mu.nodes[a]});
      r.weights.push_back(0.5 * mu.weights[a] / azimuth);
    }
  }
  return r;
}

SeparationQuadrature make_separation_quadrature(const Grid& g, double radius, SeparationProfile profile,
                                                int directions, int radii) {
  if (!(radius >= 2.0 * g.spacing())) {
    throw std::invalid_argument("separation radius " + std::to_string(radius) +
                                " is below two grid spacings");
  }
  if (radii < 1) throw std::invalid_argument("separation quadrature needs at least one radius");
  if (directions == 0) directions = g.dim == 2 ? 32 : 64;
  SeparationQuadrature q;
  q.dim = g.dim;
  q.radius = radius;
  q.profile = profile;
  q.radii = radii;
  const int d = g.dim;
  const QuadratureRule rad = gauss_for_weight(
      [&](double rho) { return std::pow(rho, d - 1) * separation_profile(profile, rho); }, radii, 0.0, 1.0);
  const DirectionRule dirs = make_direction_rule(d, directions);
  q.directions = static_cast<int>(dirs.directions.size());
  double mass = 0.0;
  for (double w : rad.weights) mass += w;
  for (std::size_t a = 0; a < rad.nodes.size(); ++a) {
    q.radial_nodes.push_back(rad.nodes[a]);
    for (std::size_t b = 0; b < dirs.directions.size(); ++b) {
      Vec3 r{};
      for (int i = 0; i < 3; ++i) r[i] = radius * rad.nodes[a] * dirs.directions[b][i];
      q.nodes.push_back(r);
      q.weights.push_back(rad.weights[a] / mass * dirs.weights[b]);
    }
  }
  return q;
}

double separation_average(const std::function<double(const Vec3&)>& f, const SeparationQuadrature& q) {
  double s = 0.0;
  for (std::size_t j = 0; j < q.nodes.size(); ++j) s += q.weights[j] * f(q.nodes[j]);
  return s;
}

PhysicalField separation_average(std::span<const PhysicalField> samples, const SeparationQuadrature& q) {
  if (samples.size() != q.nodes.size()) {
    throw std::invalid_argument("separation_average: one sample per quadrature node required");
  }
  PhysicalField out(samples[0].grid, samples[0].rank);
  for (std::size_t j = 0; j < samples.size(); ++j) {
    if (samples[j].values.size() != out.values.size()) {
      throw std::invalid_argument("separation_average: sample shape mismatch");
    }
    for (std::size_t p = 0; p < out.values.size(); ++p) out.values[p] += q.weights[j] * samples[j].values[p];
  }
  return out;
}

}  // namespace cascade
