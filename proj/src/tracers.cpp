#include "cascade/tracers.hpp"

#include <algorithm>
#include <cmath>

#include "cascade/diagnostics.hpp"
#include "cascade/errors.hpp"
#include "cascade/fft.hpp"

namespace cascade {
namespace {

FlowState node_state(const FlowSnapshot& s, const SpectralField& f, double friction) {
  FlowState st(s.grid, s.nu, friction);
  st.t = s.t;
  st.u = s.u;
  st.f = f;
  return st;
}

}  // namespace

FilteredNode make_filtered_node(const FlowSnapshot& s, const FilterKernel& k, double friction) {
  FilteredNode node;
  node.t = s.t;
  node.u = mollify(s.u, k);
  node.du_before = filtered_tendency(node_state(s, s.f_before, friction), k);
  node.du_after = filtered_tendency(node_state(s, s.f_after, friction), k);
  return node;
}

FilteredHistory::FilteredHistory(std::vector<FilteredNode> nodes, InterpolationScheme scheme, int refine)
    : nodes_(std::move(nodes)), scheme_(scheme), refine_(refine) {
  if (nodes_.empty()) throw MissingData("filtered history needs at least one stored time");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i].t > nodes_[i - 1].t)) throw std::invalid_argument("stored times must increase");
  }
  if (nodes_.size() == 1) throw MissingData("a time-dependent history needs at least two stored times");
}

FilteredHistory::FilteredHistory(FilteredNode node, InterpolationScheme scheme, int refine)
    : frozen_(true), scheme_(scheme), refine_(refine) {
  nodes_.push_back(std::move(node));
}

FilteredHistory FilteredHistory::frozen(const SpectralField& ubar, InterpolationScheme scheme, int refine) {
  FilteredNode n;
  n.u = ubar;
  n.du_before = SpectralField(ubar.grid, ubar.rank);
  n.du_after = n.du_before;
  return FilteredHistory(std::move(n), scheme, refine);
}

double FilteredHistory::t_begin() const { return frozen_ ? -INFINITY : nodes_.front().t; }
double FilteredHistory::t_end() const { return frozen_ ? INFINITY : nodes_.back().t; }

int FilteredHistory::node_at(double t) const {
  if (frozen_) return 0;
  const double span = nodes_.back().t - nodes_.front().t;
  const double tol = 1e-9 * span / static_cast<double>(nodes_.size() - 1);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (std::abs(nodes_[i].t - t) <= tol) return static_cast<int>(i);
  }
  return -1;
}

std::size_t FilteredHistory::interval_for(double t, double h) const {
  if (frozen_) return 0;
  const double mid = t + 0.5 * h;
  if (!(mid > nodes_.front().t && mid < nodes_.back().t)) {
    throw MissingData("time " + format_double(mid) + " lies outside the stored window [" +
                      format_double(nodes_.front().t) + ", " + format_double(nodes_.back().t) + "]");
  }
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), mid,
                             [](double v, const FilteredNode& n) { return v < n.t; });
  return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

std::shared_ptr<const FieldInterpolant> FilteredHistory::interval(std::size_t iv) const {
  std::lock_guard lock(cache_->mutex);
  auto it = cache_->live.find(iv);
  if (it != cache_->live.end()) return it->second;
  std::shared_ptr<const FieldInterpolant> made;
  if (frozen_) {
    made = std::make_shared<FieldInterpolant>(nodes_[0].u, scheme_, refine_);
  } else {
    const auto& a = nodes_[iv];
    const auto& b = nodes_[iv + 1];
    const SpectralField parts[4] = {a.u, a.du_after, b.u, b.du_before};
    made = std::make_shared<FieldInterpolant>(std::span<const SpectralField>(parts, 4), scheme_, refine_);
  }
  // two live intervals are enough for monotone sweeps
  auto& order = cache_->order;
  if (order.size() >= 2) {
    cache_->live.erase(order.front());
    order.erase(order.begin());
  }
  cache_->live.emplace(iv, made);
  order.push_back(iv);
  return made;
}

void FilteredHistory::velocity(std::size_t iv, double t, std::span<const Vec3> x, std::span<Vec3> v) const {
  const auto interp = interval(iv);
  const int d = dim();
  if (frozen_) {
    double buf[3];
    for (std::size_t p = 0; p < x.size(); ++p) {
      interp->evaluate(x[p], buf);
      v[p] = Vec3{buf[0], buf[1], d == 3 ? buf[2] : 0.0};
    }
    return;
  }
  const double ta = nodes_[iv].t;
  const double dt = nodes_[iv + 1].t - ta;
  const double s = (t - ta) / dt;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = (s3 - 2.0 * s2 + s) * dt;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = (s3 - s2) * dt;
  double buf[12];
  for (std::size_t p = 0; p < x.size(); ++p) {
    interp->evaluate(x[p], buf);
    Vec3 out{0.0, 0.0, 0.0};
    for (int c = 0; c < d; ++c) {
      out[c] = h00 * buf[c] + h10 * buf[d + c] + h01 * buf[2 * d + c] + h11 * buf[3 * d + c];
    }
    v[p] = out;
  }
}

FieldInterpolant FilteredHistory::node_interpolant(std::size_t i) const {
  const auto& n = nodes_.at(i);
  SpectralField avg = n.du_before;
  avg += n.du_after;
  avg *= 0.5;
  const SpectralField parts[2] = {n.u, avg};
  return FieldInterpolant(std::span<const SpectralField>(parts, 2), scheme_, refine_);
}

void integrate_trajectories(const FilteredHistory& h, std::span<const Vec3> origin, double t_start,
                            std::span<const double> offsets, const AdvectOptions& opt,
                            const TrajectoryRecorder& record) {
  if (offsets.empty()) return;
  if (opt.substeps < 1) throw std::invalid_argument("integrate_trajectories: substeps must be >= 1");
  const double sign = offsets.front() > 0.0 ? 1.0 : -1.0;
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const double prev = k == 0 ? 0.0 : std::abs(offsets[k - 1]);
    if (!(offsets[k] * sign > prev)) {
      throw std::invalid_argument("integrate_trajectories: offsets must share a sign and grow in magnitude");
    }
  }
  const double t_final = t_start + offsets.back();
  if (t_final < h.t_begin() || t_final > h.t_end() || t_start < h.t_begin() || t_start > h.t_end()) {
    throw MissingData("requested lag reaches " + format_double(t_final) + ", outside the stored window [" +
                      format_double(h.t_begin()) + ", " + format_double(h.t_end()) + "]");
  }

  // Breakpoints: stops plus stored times crossed on the way.
  struct Break {
    double offset;
    int stop;  // -1 for node times
  };
  std::vector<Break> breaks;
  for (std::size_t k = 0; k < offsets.size(); ++k) breaks.push_back({offsets[k], static_cast<int>(k)});
  if (!h.is_frozen()) {
    for (const auto& n : h.nodes()) {
      const double off = n.t - t_start;
      if (off * sign > 0.0 && off * sign < std::abs(offsets.back())) {
        bool clash = false;
        for (double o : offsets) clash = clash || std::abs(o - off) <= 1e-12 * std::abs(offsets.back());
        if (!clash) breaks.push_back({off, -1});
      }
    }
  }
  std::sort(breaks.begin(), breaks.end(),
            [&](const Break& a, const Break& b) { return a.offset * sign < b.offset * sign; });

  const std::size_t np = origin.size();
  std::vector<Vec3> disp(np, Vec3{0.0, 0.0, 0.0});
  std::vector<Vec3> pos(np), k1(np), k2(np), k3(np), k4(np);
  const int d = h.dim();
  auto stage = [&](std::size_t iv, double t, const std::vector<Vec3>* dk, double c, std::vector<Vec3>& out) {
    for (std::size_t p = 0; p < np; ++p) {
      for (int i = 0; i < 3; ++i) {
        pos[p][i] = origin[p][i] + disp[p][i] + (dk ? c * (*dk)[p][i] : 0.0);
      }
    }
    h.velocity(iv, t, pos, out);
  };

  double done = 0.0;  // current offset
  std::size_t stop_index = 0;
  std::size_t last_iv = 0;
  for (const Break& b : breaks) {
    const double len = std::abs(b.offset - done);
    const double prev = stop_index == 0 ? 0.0 : std::abs(offsets[stop_index - 1]);
    double cap = (std::abs(offsets[stop_index]) - prev) / opt.substeps;
    if (opt.max_step > 0.0) cap = std::min(cap, opt.max_step);
    const auto nsteps = std::max<long long>(1, static_cast<long long>(std::ceil(len / cap - 1e-9)));
    const double hstep = sign * len / static_cast<double>(nsteps);
    for (long long s = 0; s < nsteps; ++s) {
      const double t = t_start + done + static_cast<double>(s) * hstep;
      const std::size_t iv = h.interval_for(t, hstep);
      last_iv = iv;
      stage(iv, t, nullptr, 0.0, k1);
      stage(iv, t + 0.5 * hstep, &k1, 0.5 * hstep, k2);
      stage(iv, t + 0.5 * hstep, &k2, 0.5 * hstep, k3);
      stage(iv, t + hstep, &k3, hstep, k4);
      for (std::size_t p = 0; p < np; ++p) {
        for (int i = 0; i < d; ++i) {
          disp[p][i] += hstep / 6.0 * (k1[p][i] + 2.0 * k2[p][i] + 2.0 * k3[p][i] + k4[p][i]);
        }
      }
    }
    done = b.offset;
    if (b.stop >= 0) {
      std::vector<Vec3> vel(np);
      stage(last_iv, t_start + done, nullptr, 0.0, vel);
      record(static_cast<std::size_t>(b.stop), disp, vel);
      ++stop_index;
    }
  }
}

std::vector<Vec3> lattice_points(const Grid& g, int per_axis) {
  if (per_axis < 1) throw std::invalid_argument("lattice_points: need at least one point per axis");
  const double step = g.length() / per_axis;
  std::vector<Vec3> pts;
  const int n2 = g.dim == 3 ? per_axis : 1;
  for (int a = 0; a < per_axis; ++a) {
    for (int b = 0; b < per_axis; ++b) {
      for (int c = 0; c < n2; ++c) pts.push_back(Vec3{a * step, b * step, g.dim == 3 ? c * step : 0.0});
    }
  }
  return pts;
}

std::vector<double> geometric_lags(double tau_min, int count) {
  if (!(tau_min > 0.0) || count < 1) throw std::invalid_argument("geometric_lags: need tau_min > 0 and count >= 1");
  std::vector<double> lags;
  for (int m = 0; m < count; ++m) lags.push_back(std::ldexp(tau_min, m));
  return lags;
}

double turnover_time(const SpectralField& ubar, double scale) {
  const auto rule = make_direction_rule(ubar.grid.dim, ubar.grid.dim == 2 ? 32 : 64);
  double s2 = 0.0;
  for (std::size_t j = 0; j < rule.directions.size(); ++j) {
    Vec3 r = rule.directions[j];
    for (auto& c : r) c *= scale;
    s2 += rule.weights[j] * structure_function_2(ubar, r);
  }
  if (!(s2 > 0.0)) return INFINITY;
  return scale / std::sqrt(s2);
}

TracerPairEnsemble make_tracer_ensemble(int dim, double t0, double scale, std::vector<Vec3> base,
                                        const SeparationQuadrature& separation, std::vector<double> lags,
                                        std::vector<double> base_weight) {
  if (base.empty()) throw std::invalid_argument("tracer ensemble needs base points");
  if (separation.dim != dim) throw std::invalid_argument("tracer ensemble: separation rule dimension mismatch");
  for (std::size_t m = 0; m < lags.size(); ++m) {
    if (!(lags[m] > 0.0) || (m > 0 && !(lags[m] > lags[m - 1]))) {
      throw std::invalid_argument("tracer ensemble: lags must be positive and increasing");
    }
  }
  if (base_weight.empty()) base_weight.assign(base.size(), 1.0 / static_cast<double>(base.size()));
  if (base_weight.size() != base.size()) throw std::invalid_argument("tracer ensemble: window size mismatch");
  double wsum = 0.0;
  for (double w : base_weight) {
    if (w < 0.0) throw std::invalid_argument("tracer ensemble: window must be nonnegative");
    wsum += w;
  }
  for (double& w : base_weight) w /= wsum;

  TracerPairEnsemble e;
  e.dim = dim;
  e.t0 = t0;
  e.scale = scale;
  e.base = std::move(base);
  e.base_weight = std::move(base_weight);
  e.separation = separation;
  e.lags = std::move(lags);
  for (const auto& x : e.base) {
    e.x0.push_back(x);
    for (const auto& r : e.separation.nodes) e.x0.push_back(Vec3{x[0] + r[0], x[1] + r[1], x[2] + r[2]});
  }
  return e;
}

void advect(TracerPairEnsemble& e, const FilteredHistory& h, int direction, const AdvectOptions& opt) {
  if (direction != 1 && direction != -1) throw std::invalid_argument("advect: direction must be +1 or -1");
  if (h.dim() != e.dim) throw std::invalid_argument("advect: dimension mismatch");
  if (e.lags.empty()) throw std::invalid_argument("advect: no lags requested");
  TracerTrack& tr = direction > 0 ? e.forward : e.backward;
  tr.x.assign(e.lags.size(), {});
  tr.v.assign(e.lags.size(), {});
  std::vector<double> offsets;
  for (double tau : e.lags) offsets.push_back(direction * tau);
  integrate_trajectories(h, e.x0, e.t0, offsets, opt,
                         [&](std::size_t k, const std::vector<Vec3>& disp, const std::vector<Vec3>& vel) {
                           tr.x[k] = disp;
                           tr.v[k] = vel;
                         });
  if (e.v0.empty()) {
    e.v0.resize(e.x0.size());
    const std::size_t iv = h.interval_for(e.t0, direction * e.lags.front());
    h.velocity(iv, e.t0, e.x0, e.v0);
  }
  tr.done = true;
}

std::vector<double> dispersion_per_base(const TracerPairEnsemble& e, int lag_index, int direction) {
  const std::size_t nb = e.base.size();
  std::vector<double> out(nb, 0.0);
  if (lag_index < 0) return out;
  const TracerTrack& tr = e.track(direction);
  if (!tr.done || static_cast<std::size_t>(lag_index) >= tr.x.size()) {
    throw std::invalid_argument("dispersion: lag not computed");
  }
  const auto& disp = tr.x[static_cast<std::size_t>(lag_index)];
  const std::size_t stride = e.stride();
  const auto& w = e.separation.weights;
  for (std::size_t i = 0; i < nb; ++i) {
    const Vec3& db = disp[i * stride];
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const Vec3& dp = disp[i * stride + 1 + j];
      double s = 0.0;
      for (int c = 0; c < e.dim; ++c) {
        const double q = dp[c] - db[c];
        s += q * q;
      }
      acc += w[j] * s;
    }
    out[i] = acc;
  }
  return out;
}

double dispersion(const TracerPairEnsemble& e, int lag_index, int direction) {
  const auto per = dispersion_per_base(e, lag_index, direction);
  double s = 0.0;
  for (std::size_t i = 0; i < per.size(); ++i) s += e.base_weight[i] * per[i];
  return s;
}

AsymmetryFit asymmetry_coefficient(const TracerPairEnsemble& e, double flag_threshold) {
  if (!e.forward.done || !e.backward.done) {
    throw std::invalid_argument("asymmetry_coefficient: both directions must be advected");
  }
  const std::size_t m = e.lags.size();
  if (m < 4) throw std::invalid_argument("asymmetry_coefficient: need at least four lags");
  AsymmetryFit fit;
  for (std::size_t k = 0; k < m; ++k) {
    const double tau = e.lags[k];
    const double fwd = dispersion(e, static_cast<int>(k), 1);
    const double bwd = dispersion(e, static_cast<int>(k), -1);
    fit.tau.push_back(tau);
    fit.forward.push_back(fwd);
    fit.backward.push_back(bwd);
    fit.asymmetry.push_back((fwd - bwd) / (4.0 * tau * tau * tau));
  }
  double st = 0.0, sa = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    st += fit.tau[k];
    sa += fit.asymmetry[k];
  }
  const double tm = st / m, am = sa / m;
  double stt = 0.0, sta = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    stt += (fit.tau[k] - tm) * (fit.tau[k] - tm);
    sta += (fit.tau[k] - tm) * (fit.asymmetry[k] - am);
  }
  fit.c1 = sta / stt;
  fit.a0 = am - fit.c1 * tm;
  double ss = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double r = fit.asymmetry[k] - (fit.a0 + fit.c1 * fit.tau[k]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(m - 2));
  fit.a0_stderr = fit.residual * std::sqrt(1.0 / m + tm * tm / stt);
  fit.flagged = fit.residual > flag_threshold * std::abs(fit.a0);
  return fit;
}

namespace {

double half_mean_square_velocity_increment(const TracerPairEnsemble& e, const std::vector<Vec3>& v) {
  const std::size_t stride = e.stride();
  const auto& w = e.separation.weights;
  double total = 0.0;
  for (std::size_t i = 0; i < e.base.size(); ++i) {
    const Vec3& vb = v[i * stride];
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const Vec3& vp = v[i * stride + 1 + j];
      double s = 0.0;
      for (int c = 0; c < e.dim; ++c) s += (vp[c] - vb[c]) * (vp[c] - vb[c]);
      acc += w[j] * s;
    }
    total += e.base_weight[i] * acc;
  }
  return 0.5 * total;
}

}  // namespace

double ottmann_lagrangian(const TracerPairEnsemble& e) {
  if (!e.forward.done || !e.backward.done) {
    throw std::invalid_argument("ottmann_lagrangian: both directions must be advected");
  }
  if (e.lags.size() < 2 || std::abs(e.lags[1] - 2.0 * e.lags[0]) > 1e-12 * e.lags[1]) {
    throw std::invalid_argument("ottmann_lagrangian: needs lags tau and 2 tau");
  }
  auto centred = [&](std::size_t k) {
    const double gp = half_mean_square_velocity_increment(e, e.forward.v[k]);
    const double gm = half_mean_square_velocity_increment(e, e.backward.v[k]);
    return (gp - gm) / (2.0 * e.lags[k]);
  };
  return (4.0 * centred(0) - centred(1)) / 3.0;
}

double ottmann_eulerian(const FieldInterpolant& node, const TracerPairEnsemble& e) {
  const int d = e.dim;
  if (node.components() != 2 * d) throw std::invalid_argument("ottmann_eulerian: expects [u, du/dt] components");
  const std::size_t np = e.x0.size();
  std::vector<Vec3> u(np), a(np);
  double val[6], grad[18];
  const int C = 2 * d;
  for (std::size_t p = 0; p < np; ++p) {
    node.evaluate_with_gradient(e.x0[p], val, grad);
    for (int c = 0; c < d; ++c) {
      double adv = 0.0;
      for (int i = 0; i < d; ++i) adv += val[i] * grad[i * C + c];
      u[p][c] = val[c];
      a[p][c] = val[d + c] + adv;
    }
  }
  const std::size_t stride = e.stride();
  const auto& w = e.separation.weights;
  double total = 0.0;
  for (std::size_t i = 0; i < e.base.size(); ++i) {
    const std::size_t b = i * stride;
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const std::size_t p = b + 1 + j;
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += (u[p][c] - u[b][c]) * (a[p][c] - a[b][c]);
      acc += w[j] * s;
    }
    total += e.base_weight[i] * acc;
  }
  return total;
}

double ottmann_eulerian_torus(const SpectralField& ubar, const PhysicalField& accel, const SeparationQuadrature& q) {
  require_same_grid(ubar.grid, accel.grid, "ottmann_eulerian_torus");
  const Grid& g = ubar.grid;
  const SpectralField ahat = forward_transform(accel);
  double total = 0.0;
  for (std::size_t s = 0; s < g.spectral_size(); ++s) {
    const auto k = g.wavevector(s);
    double psi = 0.0;
    for (std::size_t j = 0; j < q.nodes.size(); ++j) {
      double kr = 0.0;
      for (int i = 0; i < g.dim; ++i) kr += k[i] * q.nodes[j][i];
      psi += q.weights[j] * std::cos(kr);
    }
    double re = 0.0;
    for (int c = 0; c < g.dim; ++c) {
      const Complex x = ubar.component(c)[s], y = ahat.component(c)[s];
      re += x.real() * y.real() + x.imag() * y.imag();
    }
    total += g.mode_weight(s) * (1.0 - psi) * re;
  }
  return 2.0 * total;
}

}  // namespace cascade
