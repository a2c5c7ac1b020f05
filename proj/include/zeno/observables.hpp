#ifndef ZENO_OBSERVABLES_HPP
#define ZENO_OBSERVABLES_HPP

#include "zeno/grid.hpp"
#include "zeno/physics.hpp"

#include <unsupported/Eigen/NonLinearOptimization>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace zeno {

class ObservableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Half-open position interval [lo, hi).
template <typename Scalar = double>
struct Interval {
  Scalar lo{-std::numeric_limits<Scalar>::infinity()};
  Scalar hi{std::numeric_limits<Scalar>::infinity()};

  bool contains(Scalar x) const { return x >= lo && x < hi; }
};

/// Everything to the right of (or left of) the beam's reference edge at the
/// time of evaluation, shifted by offset. Follows a moving beam.
template <typename Scalar = double>
struct BeamSide {
  bool right{true};
  Scalar offset{0};
};

template <typename Scalar = double>
using Region = std::variant<Interval<Scalar>, BeamSide<Scalar>>;

template <typename Scalar>
Interval<Scalar> resolve(const Region<Scalar>& region, const BeamSpec<Scalar>& beam, Scalar t) {
  if (const auto* iv = std::get_if<Interval<Scalar>>(&region)) return *iv;
  const auto& side = std::get<BeamSide<Scalar>>(region);
  const Scalar edge = beam.reference_edge(t) + side.offset;
  Interval<Scalar> out;
  if (side.right) {
    out.lo = edge;
  } else {
    out.hi = edge;
  }
  return out;
}

template <typename Scalar>
Scalar norm(const SpatialGrid<Scalar>& grid, const WaveField<Scalar>& field) {
  return field.psi.squaredNorm() * grid.dx();
}

/// Norm carried by the samples with x_j inside the region.
template <typename Scalar>
Scalar region_norm(const SpatialGrid<Scalar>& grid, const RealVector<Scalar>& density, const Interval<Scalar>& r) {
  Scalar sum = 0;
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    if (r.contains(grid.x()[j])) sum += density[j];
  }
  return sum * grid.dx();
}

/// Sum of |psi_j|^2 dx over samples with x_j >= x_b.
template <typename Scalar>
Scalar reflected_fraction(const SpatialGrid<Scalar>& grid, const WaveField<Scalar>& field, Scalar x_b) {
  if (!grid.contains(x_b)) {
    throw ObservableError("reflection boundary " + std::to_string(x_b) + " lies outside the domain");
  }
  const Eigen::Index first = grid.first_at_or_right_of(x_b);
  return field.psi.tail(grid.size() - first).squaredNorm() * grid.dx();
}

template <typename Scalar>
Scalar center_of_mass(const SpatialGrid<Scalar>& grid, const RealVector<Scalar>& density,
                      const Interval<Scalar>& region, Scalar floor = Scalar(1e-6)) {
  Scalar mass = 0;
  Scalar moment = 0;
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const Scalar x = grid.x()[j];
    if (!region.contains(x)) continue;
    mass += density[j];
    moment += x * density[j];
  }
  mass *= grid.dx();
  moment *= grid.dx();
  const Scalar total = density.sum() * grid.dx();
  if (!(mass >= floor * std::max(total, std::numeric_limits<Scalar>::min()))) {
    throw ObservableError("region [" + std::to_string(region.lo) + ", " + std::to_string(region.hi) +
                          ") carries too little norm for a center of mass");
  }
  return moment / mass;
}

template <typename Scalar>
Scalar center_of_mass(const SpatialGrid<Scalar>& grid, const WaveField<Scalar>& field,
                      const Interval<Scalar>& region = {}) {
  return center_of_mass(grid, RealVector<Scalar>(field.psi.cwiseAbs2()), region);
}

template <typename Scalar = double>
struct TimeSample {
  Scalar t{};
  Scalar value{};
};

template <typename Scalar = double>
struct Snapshot {
  Scalar t{};
  RealVector<Scalar> density;
};

/// Output of one evolution.
template <typename Scalar = double>
struct Trajectory {
  WaveField<Scalar> final_field;
  std::vector<TimeSample<Scalar>> norm_series;  // every step, starting at t = 0
  std::vector<TimeSample<Scalar>> com_series;
  std::vector<Snapshot<Scalar>> snapshots;
  Scalar t_final{};
  Eigen::Index steps{};
  bool quiescent{true};
};

/// Least-squares slope of value against t.
template <typename Scalar>
Scalar fit_slope(const std::vector<TimeSample<Scalar>>& samples) {
  if (samples.size() < 2) throw ObservableError("slope fit needs at least two samples");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> design(samples.size(), 2);
  RealVector<Scalar> rhs(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    design(i, 0) = 1;
    design(i, 1) = samples[i].t;
    rhs[i] = samples[i].value;
  }
  const Eigen::Matrix<Scalar, 2, 1> coef = design.colPivHouseholderQr().solve(rhs);
  return coef[1];
}

/// Velocity of the packet inside region, from the least-squares slope of its
/// center of mass over the stored snapshots with t in [window.lo, window.hi].
template <typename Scalar>
Scalar com_velocity(const SpatialGrid<Scalar>& grid, const Trajectory<Scalar>& traj, const Interval<Scalar>& window,
                    const Region<Scalar>& region, const BeamSpec<Scalar>& beam) {
  std::vector<TimeSample<Scalar>> samples;
  for (const auto& snap : traj.snapshots) {
    if (snap.t < window.lo || snap.t > window.hi) continue;
    samples.push_back({snap.t, center_of_mass(grid, snap.density, resolve(region, beam, snap.t))});
  }
  if (samples.size() < 5) {
    throw ObservableError("com_velocity needs >= 5 snapshots in the window, found " +
                          std::to_string(samples.size()));
  }
  return fit_slope(samples);
}

template <typename Scalar = double>
struct SechFit {
  Scalar amplitude{};
  Scalar width{};
  Scalar center{};
  Scalar residual{std::numeric_limits<Scalar>::infinity()};  // relative L2
  bool converged{false};

  static constexpr Scalar kResidualThreshold = Scalar(0.05);
  bool solitonic() const { return converged && residual < kResidualThreshold; }
};

namespace detail {

template <typename Scalar>
struct SechFunctor {
  using Scalar_ = Scalar;
  using InputType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using ValueType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using JacobianType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const RealVector<Scalar>& x;
  const RealVector<Scalar>& y;

  int inputs() const { return 3; }
  int values() const { return static_cast<int>(x.size()); }

  int operator()(const InputType& p, ValueType& r) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) r[i] = p[0] / std::cosh((x[i] - p[2]) / p[1]) - y[i];
    return 0;
  }

  int df(const InputType& p, JacobianType& jac) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const Scalar s = (x[i] - p[2]) / p[1];
      const Scalar sech = 1 / std::cosh(s);
      const Scalar dsech = -sech * std::tanh(s);  // d sech / ds
      jac(i, 0) = sech;
      jac(i, 1) = p[0] * dsech * (-s / p[1]);
      jac(i, 2) = p[0] * dsech * (-1 / p[1]);
    }
    return 0;
  }
};

}  // namespace detail

/// Fits |psi| to a sech[(x - c)/b] over the samples inside region.
template <typename Scalar>
SechFit<Scalar> fit_sech(const SpatialGrid<Scalar>& grid, const WaveField<Scalar>& field,
                         const Interval<Scalar>& region = {}) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    if (region.contains(grid.x()[j])) idx.push_back(j);
  }
  RealVector<Scalar> x(static_cast<Eigen::Index>(idx.size()));
  RealVector<Scalar> y(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    x[i] = grid.x()[idx[i]];
    y[i] = std::abs(field.psi[idx[i]]);
  }
  const Scalar mass = y.squaredNorm() * grid.dx();
  if (!(mass >= Scalar(0.1))) {
    throw ObservableError("sech fit region carries norm " + std::to_string(mass) + " < 0.1");
  }

  Eigen::Index peak = 0;
  const Scalar a0 = y.maxCoeff(&peak);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p(3);
  p << a0, mass / (2 * a0 * a0), x[peak];

  detail::SechFunctor<Scalar> functor{x, y};
  Eigen::LevenbergMarquardt<detail::SechFunctor<Scalar>, Scalar> lm(functor);
  lm.parameters.xtol = Scalar(1e-14);
  lm.parameters.ftol = Scalar(1e-14);
  lm.parameters.maxfev = 2000;
  const auto status = lm.minimize(p);

  SechFit<Scalar> fit;
  fit.amplitude = p[0];
  fit.width = std::abs(p[1]);
  fit.center = p[2];
  RealVector<Scalar> r(x.size());
  functor(p, r);
  fit.residual = r.norm() / y.norm();
  using Status = Eigen::LevenbergMarquardtSpace::Status;
  fit.converged = (status == Status::RelativeReductionTooSmall || status == Status::RelativeErrorTooSmall ||
                   status == Status::RelativeErrorAndReductionTooSmall || status == Status::CosinusTooSmall ||
                   status == Status::FtolTooSmall || status == Status::XtolTooSmall ||
                   status == Status::GtolTooSmall) &&
                  std::isfinite(fit.residual) && fit.amplitude > 0;
  return fit;
}

/// Scalars and series reported for one scenario run.
template <typename Scalar = double>
struct RunSummary {
  Scalar p_refl{};
  Scalar final_norm{};
  Scalar transmitted{};  // norm left of the beam's far edge at t_final
  Scalar t_final_used{};
  bool quiescent{true};
  std::vector<TimeSample<Scalar>> surviving_series;
  std::vector<TimeSample<Scalar>> com_series;
  std::vector<Snapshot<Scalar>> snapshots;
  std::optional<Scalar> fitted_out_velocity;
  std::optional<SechFit<Scalar>> fitted_sech;
};

}  // namespace zeno

#endif  // ZENO_OBSERVABLES_HPP
