#include "cascade/forcing.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "cascade/spectral_ops.hpp"

namespace cascade {

std::string to_string(ForcingKind k) {
  switch (k) {
    case ForcingKind::none: return "none";
    case ForcingKind::shell: return "shell";
    case ForcingKind::lundgren_band: return "lundgren_band";
  }
  return "?";
}

std::string to_string(AmplitudeLaw l) {
  return l == AmplitudeLaw::fixed_input_rate ? "fixed_input_rate" : "fixed_amplitude";
}

std::vector<std::size_t> band_modes(const Grid& g, double k_lo, double k_hi) {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < g.spectral_size(); ++s) {
    const auto k = g.wavevector(s);
    const double kk = std::sqrt(double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2]);
    if (kk >= k_lo && kk <= k_hi && kk > 0.0) out.push_back(s);
  }
  return out;
}

SpectralField band_project(const SpectralField& u, double k_lo, double k_hi) {
  SpectralField out(u.grid, u.rank);
  for (std::size_t s : band_modes(u.grid, k_lo, k_hi)) {
    for (int c = 0; c < u.components(); ++c) out.component(c)[s] = u.component(c)[s];
  }
  return out;
}

namespace {

void check_band(const Grid& g, double k_lo, double k_hi, double k_f) {
  if (!(k_f > 0.0)) throw std::invalid_argument("forcing: k_f must be positive");
  if (k_lo < 0.5 * k_f - 1e-12 || k_hi > 2.0 * k_f + 1e-12 || k_lo > k_hi) {
    throw std::invalid_argument("forcing: shell must lie inside [k_f/2, 2 k_f]");
  }
  if (!(k_hi < g.dealias_cutoff())) {
    throw std::invalid_argument("forcing: band not resolvable, upper edge " + std::to_string(k_hi) +
                                " >= dealias cutoff " + std::to_string(g.dealias_cutoff()));
  }
}

// Index of -k for a mode on a self-conjugate plane of the half spectrum.
std::size_t mirror_index(const Grid& g, std::size_t s) {
  const auto k = g.wavevector(s);
  const std::size_t h = static_cast<std::size_t>(g.half_n());
  const auto wrap = [&](int v) { return static_cast<std::size_t>(v <= 0 ? -v : g.n - v) % g.n; };
  if (g.dim == 2) return wrap(k[0]) * h + static_cast<std::size_t>(s % h);
  return (wrap(k[0]) * g.n + wrap(k[1])) * h + static_cast<std::size_t>(s % h);
}

class ShellForcing final : public ForcingSampler {
 public:
  ShellForcing(const Grid& g, const ForcingSpec& spec) : grid_(g), spec_(spec) {
    check_band(g, spec.band_lo(), spec.band_hi(), spec.k_f);
    support_ = band_modes(g, spec.band_lo(), spec.band_hi());
    if (support_.empty()) warning_ = "shell forcing has no modes in its band";
    // On the k_last = 0 plane only one of each +-k pair is drawn.
    for (std::size_t s : support_) {
      const bool self_conj = (s % static_cast<std::size_t>(g.half_n())) == 0;
      if (!self_conj) {
        drawn_.push_back({s, s});
        continue;
      }
      const std::size_t m = mirror_index(g, s);
      if (s < m) drawn_.push_back({s, m});
    }
    if (spec.law == AmplitudeLaw::fixed_input_rate && !(spec.input_rate > 0.0)) {
      throw std::invalid_argument("shell forcing: fixed_input_rate needs input_rate > 0");
    }
    if (spec.law == AmplitudeLaw::fixed_amplitude && spec.amplitude < 0.0) {
      throw std::invalid_argument("shell forcing: amplitude must be >= 0");
    }
  }

  SpectralField sample(const SpectralField& u, std::int64_t step) const override {
    require_same_grid(u.grid, grid_, "shell forcing");
    const int d = grid_.dim;
    std::seed_seq seq{static_cast<std::uint32_t>(spec_.seed), static_cast<std::uint32_t>(spec_.seed >> 32),
                      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(static_cast<std::uint64_t>(step) >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);

    SpectralField g(grid_, 1);
    for (const auto& [s, m] : drawn_) {
      const auto kv = grid_.wavevector(s);
      double k2 = 0.0;
      for (int i = 0; i < d; ++i) k2 += double(kv[i]) * kv[i];
      Complex v[3];
      for (int i = 0; i < d; ++i) v[i] = Complex{normal(rng), normal(rng)};
      Complex kv_dot{0.0, 0.0};
      for (int i = 0; i < d; ++i) kv_dot += double(kv[i]) * v[i];
      double norm = 0.0;
      for (int i = 0; i < d; ++i) {
        v[i] -= double(kv[i]) * kv_dot / k2;
        norm += std::norm(v[i]);
      }
      norm = std::sqrt(norm);
      if (norm == 0.0) continue;
      double work = 0.0;
      for (int i = 0; i < d; ++i) work += (std::conj(u.component(i)[s]) * v[i]).real();
      const double sign = work < 0.0 ? -1.0 : 1.0;
      for (int i = 0; i < d; ++i) {
        g.component(i)[s] = sign * v[i] / norm;
        if (m != s) g.component(i)[m] = std::conj(g.component(i)[s]);
      }
    }

    const double rms = std::sqrt(spectral_mean_square(g));
    if (rms == 0.0) return g;
    if (spec_.law == AmplitudeLaw::fixed_amplitude) return (spec_.amplitude / rms) * g;

    // fixed_input_rate: rescale so <u.f> = input_rate. While the band is
    // still (nearly) empty the rescaling would blow up, so start from an
    // amplitude set by the input rate and forcing scale.
    const double work = spectral_inner(u, g);
    const double bootstrap = std::pow(spec_.input_rate, 2.0 / 3.0) * std::cbrt(spec_.k_f);
    const double scale = work > 0.0 ? spec_.input_rate / work : 0.0;
    if (work > 0.0 && scale * rms <= 10.0 * bootstrap) return scale * g;
    return (bootstrap / rms) * g;
  }

  const std::vector<std::size_t>& support() const override { return support_; }
  std::string warning() const override { return warning_; }

 private:
  Grid grid_;
  ForcingSpec spec_;
  std::vector<std::size_t> support_;
  std::vector<std::pair<std::size_t, std::size_t>> drawn_;
  std::string warning_;
};

class LundgrenForcing final : public ForcingSampler {
 public:
  LundgrenForcing(const Grid& g, double alpha, double k_lo, double k_hi, double k_f)
      : grid_(g), alpha_(alpha), k_lo_(k_lo), k_hi_(k_hi) {
    check_band(g, k_lo, k_hi, k_f);
    support_ = band_modes(g, k_lo, k_hi);
    if (alpha < 0.0) warning_ = "lundgren forcing with alpha < 0 damps the band";
  }

  SpectralField sample(const SpectralField& u, std::int64_t) const override {
    require_same_grid(u.grid, grid_, "lundgren forcing");
    SpectralField f(grid_, 1);
    for (std::size_t s : support_) {
      for (int c = 0; c < grid_.dim; ++c) f.component(c)[s] = alpha_ * u.component(c)[s];
    }
    return f;
  }

  const std::vector<std::size_t>& support() const override { return support_; }
  std::string warning() const override { return warning_; }

 private:
  Grid grid_;
  double alpha_, k_lo_, k_hi_;
  std::vector<std::size_t> support_;
  std::string warning_;
};

}  // namespace

std::unique_ptr<ForcingSampler> make_shell_forcing(const Grid& g, const ForcingSpec& spec) {
  return std::make_unique<ShellForcing>(g, spec);
}

std::unique_ptr<ForcingSampler> make_lundgren_forcing(const Grid& g, double alpha, double k_f,
                                                      double k_lo, double k_hi) {
  const double lo = k_lo > 0.0 ? k_lo : 0.5 * k_f;
  const double hi = k_hi > 0.0 ? k_hi : 2.0 * k_f;
  return std::make_unique<LundgrenForcing>(g, alpha, lo, hi, k_f);
}

std::unique_ptr<ForcingSampler> make_forcing(const Grid& g, const ForcingSpec& spec) {
  switch (spec.kind) {
    case ForcingKind::none: return nullptr;
    case ForcingKind::shell: return make_shell_forcing(g, spec);
    case ForcingKind::lundgren_band:
      return make_lundgren_forcing(g, spec.alpha, spec.k_f, spec.k_lo, spec.k_hi);
  }
  return nullptr;
}

}  // namespace cascade
