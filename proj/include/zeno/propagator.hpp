#ifndef ZENO_PROPAGATOR_HPP
#define ZENO_PROPAGATOR_HPP

#include "zeno/grid.hpp"
#include "zeno/observables.hpp"
#include "zeno/physics.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace zeno {

/// The field stopped being finite; the run cannot continue.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
  double time;
};

template <typename Scalar = double>
struct FixedEnd {
  Scalar t_final{};
};

/// Stop once the relative loss rate |dN/dt|/N has stayed below
/// loss_rate_eps for a trailing quiet_window, or give up at t_max. The
/// window only counts once a step above loss_rate_eps has occurred with the
/// cumulative relative loss already at loss_rate_eps * quiet_window, so a
/// start-up transient or a packet still approaching a distant beam never
/// counts as finished.
template <typename Scalar = double>
struct AutoEnd {
  Scalar loss_rate_eps{1e-6};
  Scalar quiet_window{20};
  Scalar t_max{2000};
};

template <typename Scalar = double>
struct TimeParams {
  Scalar dt{0.005};
  std::variant<FixedEnd<Scalar>, AutoEnd<Scalar>> end{AutoEnd<Scalar>{}};
  Eigen::Index snapshot_stride{200};

  void validate() const {
    if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0");
    if (snapshot_stride < 1) throw std::invalid_argument("snapshot_stride must be >= 1");
    if (const auto* a = std::get_if<AutoEnd<Scalar>>(&end)) {
      if (!(a->quiet_window > 0) || !(a->t_max >= a->quiet_window) || !(a->loss_rate_eps > 0)) {
        throw std::invalid_argument("auto end needs t_max >= quiet_window > 0 and loss_rate_eps > 0");
      }
    } else if (!(std::get<FixedEnd<Scalar>>(end).t_final >= 0)) {
      throw std::invalid_argument("t_final must be >= 0");
    }
  }
};

/// What evolve() records besides the per-step norm.
template <typename Scalar = double>
struct ObservableSchedule {
  Eigen::Index com_stride{20};
  Region<Scalar> com_region{Interval<Scalar>{}};
  bool snapshots{true};
  /// Called at every snapshot point with the current field.
  std::function<void(const WaveField<Scalar>&)> observer{};
};

/// Symmetric split-step integrator for
///   i hbar psi_t = -(hbar^2/2m) psi_xx - g |psi|^2 psi - i gamma Gamma(x,t) psi.
/// Kinetic half-steps are applied in spectral space; the nonlinear plus
/// dissipative part is integrated exactly with Gamma frozen at mid-step.
template <typename Scalar = double>
class SplitStepPropagator {
 public:
  using Complex = std::complex<Scalar>;

  SplitStepPropagator(const SpatialGrid<Scalar>& grid, Scalar dt, BeamSpec<Scalar> beam,
                      PhysicalConstants<Scalar> consts)
      : grid_(grid), dt_(dt), beam_(std::move(beam)), consts_(consts), fft_(grid.size()) {
    consts_.validate();
    beam_.validate();
    if (!(dt > 0)) throw std::invalid_argument("dt must be > 0");
    const Scalar c = consts_.hbar / consts_.mass;
    half_kinetic_ = grid_.k().unaryExpr([&](Scalar k) { return std::polar(Scalar(1), -c * k * k * dt_ / 4); });
    full_kinetic_ = grid_.k().unaryExpr([&](Scalar k) { return std::polar(Scalar(1), -c * k * k * dt_ / 2); });
    if (!beam_.time_dependent()) potential_factors(sample_beam(grid_, beam_, Scalar(0)));
  }

  const SpatialGrid<Scalar>& grid() const { return grid_; }
  Scalar dt() const { return dt_; }
  const BeamSpec<Scalar>& beam() const { return beam_; }

  /// Kinetic phase accumulated by the fastest mode in one step.
  Scalar max_kinetic_phase() const {
    const Scalar k = grid_.k_max();
    return consts_.hbar * k * k * dt_ / (2 * consts_.mass);
  }

  /// One full Strang step; throws BlowUpError on a non-finite result.
  void step(WaveField<Scalar>& field) {
    kinetic(field.psi, half_kinetic_);
    potential(field.psi, field.t + dt_ / 2);
    kinetic(field.psi, half_kinetic_);
    field.t += dt_;
    if (!field.all_finite()) throw BlowUpError("field became non-finite at t=" + std::to_string(field.t), field.t);
  }

  /// Advances up to max_steps steps, merging adjacent kinetic half-steps.
  /// on_step(t_end, norm) runs after every step with the norm of that step
  /// and returns true to stop early. Returns the number of steps taken; the
  /// field is always left at a full-step boundary.
  template <typename OnStep>
  Eigen::Index advance(WaveField<Scalar>& field, Eigen::Index max_steps, OnStep&& on_step) {
    if (max_steps <= 0) return 0;
    kinetic(field.psi, half_kinetic_);
    Eigen::Index taken = 0;
    for (;;) {
      potential(field.psi, field.t + dt_ / 2);
      field.t += dt_;
      ++taken;
      // the kinetic substeps are unitary, so this is the end-of-step norm
      const Scalar n = field.psi.squaredNorm() * grid_.dx();
      if (!std::isfinite(n)) {
        throw BlowUpError("field became non-finite at t=" + std::to_string(field.t), field.t);
      }
      const bool stop = on_step(field.t, n);
      if (stop || taken == max_steps) break;
      kinetic(field.psi, full_kinetic_);
    }
    kinetic(field.psi, half_kinetic_);
    return taken;
  }

 private:
  void kinetic(ComplexVector<Scalar>& psi, const ComplexVector<Scalar>& phase) {
    fft_.forward(psi, spectrum_);
    spectrum_.array() *= phase.array();
    fft_.inverse(spectrum_, psi);
  }

  void potential_factors(const RealVector<Scalar>& profile) {
    const Scalar rate = 2 * beam_.gamma / consts_.hbar;  // density decay rate per unit Gamma
    const Scalar coupling = consts_.g / consts_.hbar;
    amp_decay_.resize(profile.size());
    phase_gain_.resize(profile.size());
    for (Eigen::Index j = 0; j < profile.size(); ++j) {
      const Scalar x = rate * profile[j] * dt_;
      amp_decay_[j] = std::exp(-x / 2);
      // integral of e^{-rate Gamma s} over [0, dt]
      phase_gain_[j] = x > 0 ? coupling * (-std::expm1(-x)) / (rate * profile[j]) : coupling * dt_;
    }
  }

  void potential(ComplexVector<Scalar>& psi, Scalar t_mid) {
    if (beam_.time_dependent()) potential_factors(sample_beam(grid_, beam_, t_mid));
    for (Eigen::Index j = 0; j < psi.size(); ++j) {
      const Scalar rho0 = std::norm(psi[j]);
      psi[j] *= std::polar(amp_decay_[j], phase_gain_[j] * rho0);
    }
  }

  SpatialGrid<Scalar> grid_;
  Scalar dt_;
  BeamSpec<Scalar> beam_;
  PhysicalConstants<Scalar> consts_;
  SpectralTransform<Scalar> fft_;
  ComplexVector<Scalar> half_kinetic_;
  ComplexVector<Scalar> full_kinetic_;
  RealVector<Scalar> amp_decay_;
  RealVector<Scalar> phase_gain_;
  ComplexVector<Scalar> spectrum_;
};

/// Single Strang step on a copy of field.
template <typename Scalar>
WaveField<Scalar> step(const SpatialGrid<Scalar>& grid, WaveField<Scalar> field, Scalar dt,
                       const BeamSpec<Scalar>& beam, const PhysicalConstants<Scalar>& consts) {
  SplitStepPropagator<Scalar> prop(grid, dt, beam, consts);
  prop.step(field);
  return field;
}

namespace detail {

/// Tracks the trailing window over which the loss rate stayed below eps.
template <typename Scalar>
class QuiescenceMonitor {
 public:
  QuiescenceMonitor(const AutoEnd<Scalar>& rule, Scalar t0, Scalar n0)
      : rule_(rule), last_loud_(t0), prev_t_(t0), prev_n_(n0), n0_(n0) {}

  /// Returns true when the run may stop at time t.
  bool update(Scalar t, Scalar n) {
    const Scalar rate = std::abs(prev_n_ - n) / ((t - prev_t_) * n);
    if (!(rate < rule_.loss_rate_eps)) {
      last_loud_ = t;
      if (n0_ - n >= rule_.loss_rate_eps * rule_.quiet_window * n0_) armed_ = true;
    }
    prev_t_ = t;
    prev_n_ = n;
    return armed_ && t - last_loud_ >= rule_.quiet_window;
  }

 private:
  AutoEnd<Scalar> rule_;
  Scalar last_loud_;
  bool armed_{false};
  Scalar prev_t_;
  Scalar prev_n_;
  Scalar n0_;
};

}  // namespace detail

/// Integrates field forward per time, recording the norm after every step,
/// the center of mass every com_stride steps and density snapshots every
/// snapshot_stride steps (always including the first and last field).
template <typename Scalar>
Trajectory<Scalar> evolve(const SpatialGrid<Scalar>& grid, WaveField<Scalar> field, const TimeParams<Scalar>& time,
                          const BeamSpec<Scalar>& beam, const PhysicalConstants<Scalar>& consts,
                          const ObservableSchedule<Scalar>& probes = {}) {
  time.validate();
  if (field.size() != grid.size()) throw GridError("field length does not match grid");
  if (probes.com_stride < 1) throw std::invalid_argument("com_stride must be >= 1");

  SplitStepPropagator<Scalar> prop(grid, time.dt, beam, consts);
  Trajectory<Scalar> traj;
  const Scalar t0 = field.t;

  Eigen::Index max_steps = 0;
  std::optional<detail::QuiescenceMonitor<Scalar>> monitor;
  const Scalar n0 = norm(grid, field);
  if (const auto* fixed = std::get_if<FixedEnd<Scalar>>(&time.end)) {
    max_steps = static_cast<Eigen::Index>(std::llround(fixed->t_final / time.dt));
  } else {
    const auto& rule = std::get<AutoEnd<Scalar>>(time.end);
    max_steps = static_cast<Eigen::Index>(std::llround(rule.t_max / time.dt));
    monitor.emplace(rule, t0, n0);
  }

  const auto record_com = [&](const WaveField<Scalar>& f) {
    try {
      traj.com_series.push_back({f.t, center_of_mass(grid, f, resolve(probes.com_region, beam, f.t))});
    } catch (const ObservableError&) {
      traj.com_series.push_back({f.t, std::numeric_limits<Scalar>::quiet_NaN()});
    }
  };
  const auto record_snapshot = [&](const WaveField<Scalar>& f) {
    if (probes.snapshots) traj.snapshots.push_back({f.t, f.psi.cwiseAbs2()});
    if (probes.observer) probes.observer(f);
  };

  traj.norm_series.reserve(static_cast<std::size_t>(max_steps) + 1);
  traj.norm_series.push_back({field.t, n0});
  record_com(field);
  record_snapshot(field);

  bool quiet = !monitor.has_value();
  Eigen::Index done = 0;
  while (done < max_steps && !(monitor && quiet)) {
    const Eigen::Index to_com = probes.com_stride - done % probes.com_stride;
    const Eigen::Index to_snap = time.snapshot_stride - done % time.snapshot_stride;
    const Eigen::Index chunk = std::min({to_com, to_snap, max_steps - done});
    const Eigen::Index taken = prop.advance(field, chunk, [&](Scalar t, Scalar n) {
      traj.norm_series.push_back({t, n});
      if (monitor) quiet = monitor->update(t, n);
      return quiet && monitor.has_value();
    });
    done += taken;
    const bool last = done == max_steps || (monitor && quiet);
    if (done % probes.com_stride == 0 || last) record_com(field);
    if (done % time.snapshot_stride == 0 || last) record_snapshot(field);
  }

  traj.steps = done;
  traj.t_final = field.t;
  traj.quiescent = !monitor || quiet;
  traj.final_field = std::move(field);
  return traj;
}

}  // namespace zeno

#endif  // ZENO_PROPAGATOR_HPP
