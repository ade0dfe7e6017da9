// Tracer pairs advected by the filtered velocity, forward and backward in
// time from a release time t0, and the statistics built on them: pair
// dispersion, its forward/backward asymmetry, and the Lagrangian and
// Eulerian forms of the Ott-Mann relation.
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "cascade/filter.hpp"
#include "cascade/interpolation.hpp"
#include "cascade/separation.hpp"
#include "cascade/snapshot_io.hpp"

namespace cascade {

/// Filtered velocity at one stored time, with its time derivative under the
/// force used before and after that time (the force is piecewise constant,
/// so the derivative jumps at stored times).
struct FilteredNode {
  double t = 0.0;
  SpectralField u;
  SpectralField du_before;
  SpectralField du_after;
};

FilteredNode make_filtered_node(const FlowSnapshot& s, const FilterKernel& k, double friction);

/// ubar(x, t) between stored nodes: cubic Hermite in time using the value
/// and one-sided derivative at each end of an interval, spatial evaluation
/// by a FieldInterpolant. A single node with `frozen` set is valid at all t.
class FilteredHistory {
 public:
  FilteredHistory(std::vector<FilteredNode> nodes, InterpolationScheme scheme, int refine);
  static FilteredHistory frozen(const SpectralField& ubar, InterpolationScheme scheme, int refine);

  const Grid& grid() const { return nodes_.front().u.grid; }
  int dim() const { return grid().dim; }
  bool is_frozen() const { return frozen_; }
  double t_begin() const;
  double t_end() const;
  const std::vector<FilteredNode>& nodes() const { return nodes_; }
  /// Index of the node at time t (within 1e-9 of the node spacing), or -1.
  int node_at(double t) const;

  /// Interval containing the open interval (t, t + h); h != 0.
  std::size_t interval_for(double t, double h) const;

  /// Velocities at time t on interval `iv`.
  void velocity(std::size_t iv, double t, std::span<const Vec3> x, std::span<Vec3> v) const;

  /// Interpolant for [ubar, d ubar/dt] at node `i` with the force averaged
  /// over both sides of the node; used by the Eulerian estimators.
  FieldInterpolant node_interpolant(std::size_t i) const;

  InterpolationScheme scheme() const { return scheme_; }
  int refine() const { return refine_; }

 private:
  FilteredHistory(FilteredNode node, InterpolationScheme scheme, int refine);
  std::shared_ptr<const FieldInterpolant> interval(std::size_t iv) const;

  struct Cache {
    std::mutex mutex;
    std::map<std::size_t, std::shared_ptr<const FieldInterpolant>> live;
    std::vector<std::size_t> order;
  };

  std::vector<FilteredNode> nodes_;
  bool frozen_ = false;
  InterpolationScheme scheme_;
  int refine_ = 1;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

struct AdvectOptions {
  int substeps = 4;          // RK4 steps per lag doubling
  double max_step = 0.0;     // optional cap on |step|; 0 means none
};

using TrajectoryRecorder =
    std::function<void(std::size_t stop, const std::vector<Vec3>& displacement, const std::vector<Vec3>& velocity)>;

/// Integrate dX/dt = ubar(X, t) for X = origin + displacement from t_start,
/// stopping at t_start + offsets[k] (all of one sign, increasing in
/// magnitude) and calling record(k, displacement, ubar(X, t)) at each stop.
/// Steps never straddle stored node times. Displacements start at zero.
void integrate_trajectories(const FilteredHistory& h, std::span<const Vec3> origin, double t_start,
                            std::span<const double> offsets, const AdvectOptions& opt,
                            const TrajectoryRecorder& record);

struct TracerTrack {
  bool done = false;
  std::vector<std::vector<Vec3>> x;  // displacement X - x0, [lag][particle]
  std::vector<std::vector<Vec3>> v;
};

struct TracerPairEnsemble {
  int dim = 2;
  double t0 = 0.0;
  double scale = 0.0;
  std::vector<Vec3> base;
  std::vector<double> base_weight;  // window phi, sums to 1
  SeparationQuadrature separation;
  std::vector<double> lags;  // tau_m > 0, increasing
  std::vector<Vec3> x0;      // particle p = i * (1 + J) + {0: base, 1 + j: partner j}
  std::vector<Vec3> v0;
  TracerTrack forward, backward;

  std::size_t stride() const { return 1 + separation.nodes.size(); }
  const TracerTrack& track(int direction) const { return direction > 0 ? forward : backward; }
};

/// Regular lattice with `per_axis` points per axis, anchored at the origin.
std::vector<Vec3> lattice_points(const Grid& g, int per_axis);

/// tau_m = tau_min * 2^m for m = 0 .. count-1.
std::vector<double> geometric_lags(double tau_min, int count);

/// ell / rms(delta ubar over |r| = ell), direction averaged.
double turnover_time(const SpectralField& ubar, double scale);

TracerPairEnsemble make_tracer_ensemble(int dim, double t0, double scale, std::vector<Vec3> base,
                                        const SeparationQuadrature& separation, std::vector<double> lags,
                                        std::vector<double> base_weight = {});

/// Fill the forward (+1) or backward (-1) track. Throws MissingData when the
/// history does not cover t0 +- max lag.
void advect(TracerPairEnsemble& e, const FilteredHistory& h, int direction, const AdvectOptions& opt = {});

/// <|dX - r|^2>_R, phi-weighted over base points, at lag index m (m = -1: tau = 0).
double dispersion(const TracerPairEnsemble& e, int lag_index, int direction);
std::vector<double> dispersion_per_base(const TracerPairEnsemble& e, int lag_index, int direction);

struct AsymmetryFit {
  double a0 = 0.0;
  double c1 = 0.0;
  double residual = 0.0;  // rms misfit of A(tau)
  double a0_stderr = 0.0;
  bool flagged = false;   // residual above threshold * |a0|
  std::vector<double> tau;
  std::vector<double> forward;
  std::vector<double> backward;
  std::vector<double> asymmetry;
};

/// A(tau) = (fwd - bwd) / (4 tau^3), least-squares line A0 + c1 tau.
/// Needs both tracks and at least four lags.
AsymmetryFit asymmetry_coefficient(const TracerPairEnsemble& e, double flag_threshold = 0.1);

/// 1/2 d/dtau <|delta v|^2>_R at tau = 0: centred differences at the two
/// smallest lags combined by Richardson extrapolation.
double ottmann_lagrangian(const TracerPairEnsemble& e);

/// <delta ubar . delta a>_R averaged over the ensemble's base points, with
/// ubar, its gradient and d ubar/dt from `node` (components [u, du/dt]).
double ottmann_eulerian(const FieldInterpolant& node, const TracerPairEnsemble& e);

/// Same quantity averaged over the whole torus, spectrally:
/// 2 sum_k (1 - psi_hat(k)) Re(conj(ubar_k) . a_k).
double ottmann_eulerian_torus(const SpectralField& ubar, const PhysicalField& accel,
                              const SeparationQuadrature& q);

}  // namespace cascade
