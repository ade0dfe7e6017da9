#include "cascade/interpolation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cascade/fft.hpp"
#include "cascade/spectral_ops.hpp"

namespace cascade {
namespace {


void require_finite(const Vec3& x, int dim) {
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(x[i])) throw std::invalid_argument("interpolation: non-finite position");
  }
}

// Cubic B-spline weights and derivatives for fractional offset s in [0, 1).
void bspline_weights(double s, double* w, double* dw) {
  const double s2 = s * s, s3 = s2 * s;
  const double t = 1.0 - s;
  w[0] = t * t * t / 6.0;
  w[1] = (3.0 * s3 - 6.0 * s2 + 4.0) / 6.0;
  w[2] = (-3.0 * s3 + 3.0 * s2 + 3.0 * s + 1.0) / 6.0;
  w[3] = s3 / 6.0;
  dw[0] = -0.5 * t * t;
  dw[1] = 1.5 * s2 - 2.0 * s;
  dw[2] = -1.5 * s2 + s + 0.5;
  dw[3] = 0.5 * s2;
}

}  // namespace

std::string to_string(InterpolationScheme s) { return s == InterpolationScheme::spectral ? "spectral" : "cubic"; }

InterpolationScheme interpolation_scheme_from_string(const std::string& s) {
  if (s == "spectral") return InterpolationScheme::spectral;
  if (s == "cubic") return InterpolationScheme::cubic;
  throw std::invalid_argument("unknown interpolation scheme '" + s + "'");
}

FieldInterpolant::FieldInterpolant(const SpectralField& field, InterpolationScheme scheme, int refine)
    : FieldInterpolant(std::span<const SpectralField>(&field, 1), scheme, refine) {}

FieldInterpolant::FieldInterpolant(std::span<const SpectralField> fields, InterpolationScheme scheme, int refine)
    : grid_(fields.empty() ? Grid(2, 8) : fields[0].grid), scheme_(scheme), refine_(refine) {
  if (fields.empty()) throw std::invalid_argument("FieldInterpolant: no fields");
  if (refine < 1) throw std::invalid_argument("FieldInterpolant: refinement factor must be >= 1");
  for (const auto& f : fields) {
    require_same_grid(grid_, f.grid, "FieldInterpolant");
    ncomp_ += f.components();
  }
  const std::size_t blk = grid_.spectral_size();

  if (scheme_ == InterpolationScheme::spectral) {
    for (std::size_t s = 0; s < blk; ++s) {
      bool any = false;
      for (const auto& f : fields) {
        for (int c = 0; c < f.components() && !any; ++c) any = f.component(c)[s] != Complex{0.0, 0.0};
      }
      if (!any) continue;
      modes_.push_back(grid_.wavevector(s));
      mode_weight_.push_back(grid_.mode_weight(s));
      for (const auto& f : fields) {
        for (int c = 0; c < f.components(); ++c) mode_coeff_.push_back(f.component(c)[s]);
      }
    }
    return;
  }

  nf_ = grid_.n * refine_;
  const double step = kTwoPi / nf_;
  std::vector<double> factor(blk);
  for (std::size_t s = 0; s < blk; ++s) {
    const auto k = grid_.wavevector(s);
    double b = 1.0;
    for (int i = 0; i < grid_.dim; ++i) b *= (4.0 + 2.0 * std::cos(step * k[i])) / 6.0;
    factor[s] = 1.0 / b;
  }
  std::size_t nodes = 1;
  for (int i = 0; i < grid_.dim; ++i) nodes *= static_cast<std::size_t>(nf_);
  spline_.assign(nodes * static_cast<std::size_t>(ncomp_), 0.0);
  int offset = 0;
  for (const auto& f : fields) {
    SpectralField pre = f;
    apply_multiplier(pre, factor);
    PhysicalField fine = inverse_transform_refined(pre, refine_);
    for (int c = 0; c < f.components(); ++c) {
      auto src = fine.component(c);
      for (std::size_t p = 0; p < nodes; ++p) spline_[p * ncomp_ + offset + c] = src[p];
    }
    offset += f.components();
  }
}

void FieldInterpolant::spectral_eval(const Vec3& x, double* value, double* grad) const {
  const int d = grid_.dim;
  const int nyq = grid_.n / 2;
  std::fill(value, value + ncomp_, 0.0);
  if (grad) std::fill(grad, grad + d * ncomp_, 0.0);
  std::vector<Complex> acc(static_cast<std::size_t>(ncomp_));
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    const auto& k = modes_[m];
    // Nyquist is split evenly between +-n/2, i.e. a cosine along that axis.
    Complex phase{1.0, 0.0};
    Complex dphase[3];
    Complex axis[3], daxis[3];
    for (int i = 0; i < d; ++i) {
      const double kx = k[i] * x[i];
      if (std::abs(k[i]) == nyq) {
        axis[i] = Complex{std::cos(kx), 0.0};
        daxis[i] = Complex{-k[i] * std::sin(kx), 0.0};
      } else {
        axis[i] = Complex{std::cos(kx), std::sin(kx)};
        daxis[i] = Complex{0.0, static_cast<double>(k[i])} * axis[i];
      }
      phase *= axis[i];
    }
    if (grad) {
      for (int i = 0; i < d; ++i) {
        dphase[i] = daxis[i];
        for (int j = 0; j < d; ++j) {
          if (j != i) dphase[i] *= axis[j];
        }
      }
    }
    const double w = mode_weight_[m];
    const Complex* c = &mode_coeff_[m * ncomp_];
    for (int q = 0; q < ncomp_; ++q) {
      value[q] += w * (c[q] * phase).real();
      if (grad) {
        for (int i = 0; i < d; ++i) grad[i * ncomp_ + q] += w * (c[q] * dphase[i]).real();
      }
    }
  }
}

void FieldInterpolant::cubic_eval(const Vec3& x, double* value, double* grad) const {
  const int d = grid_.dim;
  const double inv_h = nf_ / kTwoPi;
  int base[3];
  double w[3][4], dw[3][4];
  for (int i = 0; i < d; ++i) {
    const double u = x[i] * inv_h;
    const double fl = std::floor(u);
    bspline_weights(u - fl, w[i], dw[i]);
    for (int a = 0; a < 4; ++a) dw[i][a] *= inv_h;
    long long b = static_cast<long long>(fl) - 1;
    b %= nf_;
    if (b < 0) b += nf_;
    base[i] = static_cast<int>(b);
  }
  std::fill(value, value + ncomp_, 0.0);
  if (grad) std::fill(grad, grad + d * ncomp_, 0.0);
  const std::size_t n = static_cast<std::size_t>(nf_);
  const int C = ncomp_;
  auto idx = [&](int axis, int a) {
    int j = base[axis] + a;
    return static_cast<std::size_t>(j >= nf_ ? j - nf_ : j);
  };
  if (d == 2) {
    for (int a = 0; a < 4; ++a) {
      const std::size_t row = idx(0, a) * n;
      for (int b = 0; b < 4; ++b) {
        const double* c = &spline_[(row + idx(1, b)) * C];
        const double wv = w[0][a] * w[1][b];
        for (int q = 0; q < C; ++q) value[q] += wv * c[q];
        if (grad) {
          const double g0 = dw[0][a] * w[1][b], g1 = w[0][a] * dw[1][b];
          for (int q = 0; q < C; ++q) {
            grad[q] += g0 * c[q];
            grad[C + q] += g1 * c[q];
          }
        }
      }
    }
    return;
  }
  for (int a = 0; a < 4; ++a) {
    const std::size_t plane = idx(0, a) * n;
    for (int b = 0; b < 4; ++b) {
      const std::size_t row = (plane + idx(1, b)) * n;
      const double wab = w[0][a] * w[1][b];
      for (int e = 0; e < 4; ++e) {
        const double* c = &spline_[(row + idx(2, e)) * C];
        const double wv = wab * w[2][e];
        for (int q = 0; q < C; ++q) value[q] += wv * c[q];
        if (grad) {
          const double g0 = dw[0][a] * w[1][b] * w[2][e];
          const double g1 = w[0][a] * dw[1][b] * w[2][e];
          const double g2 = wab * dw[2][e];
          for (int q = 0; q < C; ++q) {
            grad[q] += g0 * c[q];
            grad[C + q] += g1 * c[q];
            grad[2 * C + q] += g2 * c[q];
          }
        }
      }
    }
  }
}

void FieldInterpolant::evaluate(const Vec3& x, double* out) const {
  require_finite(x, grid_.dim);
  if (scheme_ == InterpolationScheme::spectral) {
    spectral_eval(x, out, nullptr);
  } else {
    cubic_eval(x, out, nullptr);
  }
}

void FieldInterpolant::evaluate_with_gradient(const Vec3& x, double* value, double* grad) const {
  require_finite(x, grid_.dim);
  if (scheme_ == InterpolationScheme::spectral) {
    spectral_eval(x, value, grad);
  } else {
    cubic_eval(x, value, grad);
  }
}

void FieldInterpolant::evaluate(std::span<const Vec3> x, std::span<double> out) const {
  if (out.size() != x.size() * static_cast<std::size_t>(ncomp_)) {
    throw std::invalid_argument("FieldInterpolant::evaluate: output size mismatch");
  }
  for (std::size_t p = 0; p < x.size(); ++p) evaluate(x[p], &out[p * ncomp_]);
}

std::vector<Vec3> interpolate_velocity(const SpectralField& u, std::span<const Vec3> positions,
                                       InterpolationScheme scheme, int refine) {
  if (u.rank != 1) throw std::invalid_argument("interpolate_velocity: needs a vector field");
  FieldInterpolant interp(u, scheme, refine);
  std::vector<Vec3> out(positions.size(), Vec3{0.0, 0.0, 0.0});
  double v[3];
  for (std::size_t p = 0; p < positions.size(); ++p) {
    interp.evaluate(positions[p], v);
    for (int i = 0; i < u.grid.dim; ++i) out[p][i] = v[i];
  }
  return out;
}

}  // namespace cascade
