#include "cascade/fft.hpp"

#include <fftw3.h>

#include <atomic>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace cascade {
namespace {

std::atomic<FftRigor> g_rigor{FftRigor::estimate};

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  ~PlanPair() {
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

const PlanPair& plans_for(int dim, int n) {
  static std::map<std::tuple<int, int, int>, std::unique_ptr<PlanPair>> cache;
  const int rigor = static_cast<int>(g_rigor.load());
  std::lock_guard lock(planner_mutex());
  auto key = std::make_tuple(dim, n, rigor);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;

  const Grid g(dim, n);
  AlignedVector<double> real(g.physical_size());
  AlignedVector<Complex> spec(g.spectral_size());
  int dims[3] = {n, n, n};
  const unsigned flags = rigor == static_cast<int>(FftRigor::measure) ? FFTW_MEASURE : FFTW_ESTIMATE;
  auto pp = std::make_unique<PlanPair>();
  pp->forward = fftw_plan_dft_r2c(dim, dims, real.data(),
                                  reinterpret_cast<fftw_complex*>(spec.data()), flags);
  pp->inverse = fftw_plan_dft_c2r(dim, dims, reinterpret_cast<fftw_complex*>(spec.data()),
                                  real.data(), flags | FFTW_DESTROY_INPUT);
  if (!pp->forward || !pp->inverse) throw std::runtime_error("FFTW plan creation failed");
  auto& ref = *pp;
  cache.emplace(key, std::move(pp));
  return ref;
}

AlignedVector<Complex>& scratch(std::size_t size) {
  thread_local AlignedVector<Complex> buf;
  if (buf.size() < size) buf.resize(size);
  return buf;
}

}  // namespace

void set_fft_rigor(FftRigor rigor) { g_rigor.store(rigor); }

void forward_block(const Grid& g, std::span<const double> in, std::span<Complex> out) {
  const auto& p = plans_for(g.dim, g.n);
  // r2c out-of-place leaves the input untouched.
  fftw_execute_dft_r2c(p.forward, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(g.physical_size());
  for (auto& c : out) c *= scale;
}

void inverse_block(const Grid& g, std::span<const Complex> in, std::span<double> out) {
  const auto& p = plans_for(g.dim, g.n);
  auto& buf = scratch(in.size());
  std::copy(in.begin(), in.end(), buf.begin());
  fftw_execute_dft_c2r(p.inverse, reinterpret_cast<fftw_complex*>(buf.data()), out.data());
}

SpectralField forward_transform(const PhysicalField& f) {
  if (!f.all_finite()) throw std::invalid_argument("forward_transform: non-finite input values");
  SpectralField out(f.grid, f.rank);
  for (int c = 0; c < f.components(); ++c) forward_block(f.grid, f.component(c), out.component(c));
  return out;
}

PhysicalField inverse_transform(const SpectralField& f) {
  PhysicalField out(f.grid, f.rank);
  for (int c = 0; c < f.components(); ++c) inverse_block(f.grid, f.component(c), out.component(c));
  return out;
}

PhysicalField inverse_transform_refined(const SpectralField& f, int factor) {
  if (factor < 1) throw std::invalid_argument("refinement factor must be >= 1");
  if (factor == 1) return inverse_transform(f);
  const Grid& g = f.grid;
  const Grid fine(g.dim, g.n * factor, g.dealias_fraction);
  SpectralField padded(fine, f.rank);

  const int n = g.n;
  const int nf = fine.n;
  const int h = g.half_n();
  const int hf = fine.half_n();
  // Targets of an original full-axis index: Nyquist splits evenly in two.
  auto full_targets = [&](int i, int* idx, double* w) {
    const int k = g.wavenumber(i);
    if (k == -n / 2) {
      idx[0] = nf - n / 2;
      w[0] = 0.5;
      idx[1] = n / 2;
      w[1] = 0.5;
      return 2;
    }
    idx[0] = k >= 0 ? k : k + nf;
    w[0] = 1.0;
    return 1;
  };

  for (int c = 0; c < f.components(); ++c) {
    auto src = f.component(c);
    auto dst = padded.component(c);
    for (std::size_t s = 0; s < src.size(); ++s) {
      if (src[s] == Complex{0.0, 0.0}) continue;
      std::size_t rest = s;
      const int last = static_cast<int>(rest % static_cast<std::size_t>(h));
      rest /= static_cast<std::size_t>(h);
      const double wlast = (last == n / 2) ? 0.5 : 1.0;
      if (g.dim == 2) {
        const int i0 = static_cast<int>(rest);
        int idx[2];
        double w[2];
        const int m = full_targets(i0, idx, w);
        for (int a = 0; a < m; ++a) {
          dst[static_cast<std::size_t>(idx[a]) * hf + last] += src[s] * (w[a] * wlast);
        }
      } else {
        const int i1 = static_cast<int>(rest % static_cast<std::size_t>(n));
        const int i0 = static_cast<int>(rest / static_cast<std::size_t>(n));
        int idx0[2], idx1[2];
        double w0[2], w1[2];
        const int m0 = full_targets(i0, idx0, w0);
        const int m1 = full_targets(i1, idx1, w1);
        for (int a = 0; a < m0; ++a) {
          for (int b = 0; b < m1; ++b) {
            const std::size_t t =
                (static_cast<std::size_t>(idx0[a]) * nf + idx1[b]) * hf + last;
            dst[t] += src[s] * (w0[a] * w1[b] * wlast);
          }
        }
      }
    }
  }
  return inverse_transform(padded);
}

}  // namespace cascade
