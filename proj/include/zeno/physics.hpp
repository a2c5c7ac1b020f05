#ifndef ZENO_PHYSICS_HPP
#define ZENO_PHYSICS_HPP

#include "zeno/grid.hpp"

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>

namespace zeno {

class PhysicsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// m, hbar and the attractive coupling g; the sign of g is fixed by the
/// equation of motion (g > 0 means attraction).
template <typename Scalar = double>
struct PhysicalConstants {
  Scalar mass{1};
  Scalar hbar{1};
  Scalar g{1};

  void validate() const {
    if (!(mass > 0) || !(hbar > 0) || !(g > 0)) {
      throw PhysicsError("physical constants m, hbar, g must be strictly positive");
    }
  }
};

/// Bright soliton A e^{ivx} sech[A sqrt(g) (x - x0 - v t)]. When amplitude is
/// left unset it is fixed by unit normalization, A = sqrt(g)/2.
template <typename Scalar = double>
struct SolitonSpec {
  Scalar velocity{0};
  Scalar x0{0};
  std::optional<Scalar> amplitude{};

  Scalar amplitude_for(const PhysicalConstants<Scalar>& c) const {
    return amplitude ? *amplitude : std::sqrt(c.g) / 2;
  }
  /// Envelope length scale 1/(A sqrt(g)).
  Scalar width(const PhysicalConstants<Scalar>& c) const {
    return Scalar(1) / (amplitude_for(c) * std::sqrt(c.g));
  }
};

template <typename Scalar = double>
struct GaussianBeam {
  Scalar x_b{};
  Scalar w{};
};

/// Unit plateau on [x_l, x_r) with Gaussian edges of sharpness w.
template <typename Scalar = double>
struct FlatTopBeam {
  Scalar x_l{};
  Scalar x_r{};
  Scalar w{};
};

/// Gaussian whose center travels as x_b0 + u t.
template <typename Scalar = double>
struct MovingGaussianBeam {
  Scalar x_b0{};
  Scalar w{};
  Scalar u{};
};

template <typename Scalar = double>
using BeamShape = std::variant<GaussianBeam<Scalar>, FlatTopBeam<Scalar>, MovingGaussianBeam<Scalar>>;

template <typename Scalar = double>
struct BeamSpec {
  Scalar gamma{0};
  BeamShape<Scalar> shape{GaussianBeam<Scalar>{}};

  bool time_dependent() const {
    return std::holds_alternative<MovingGaussianBeam<Scalar>>(shape);
  }

  /// Position that separates the reflected side from the beam: the center
  /// for Gaussians, the right plateau edge for flat tops.
  Scalar reference_edge(Scalar t = 0) const {
    return std::visit(
        [t](const auto& s) -> Scalar {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, GaussianBeam<Scalar>>) {
            return s.x_b;
          } else if constexpr (std::is_same_v<S, FlatTopBeam<Scalar>>) {
            return s.x_r;
          } else {
            return s.x_b0 + s.u * t;
          }
        },
        shape);
  }

  /// Left extent of the beam, three sharpness lengths beyond its left
  /// edge (Gamma < 1.3e-4 there).
  Scalar far_edge(Scalar t = 0) const {
    return std::visit(
        [t](const auto& s) -> Scalar {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, GaussianBeam<Scalar>>) {
            return s.x_b - 3 * s.w;
          } else if constexpr (std::is_same_v<S, FlatTopBeam<Scalar>>) {
            return s.x_l - 3 * s.w;
          } else {
            return s.x_b0 + s.u * t - 3 * s.w;
          }
        },
        shape);
  }

  Scalar sharpness() const {
    return std::visit([](const auto& s) { return s.w; }, shape);
  }

  void validate() const {
    if (!(gamma >= 0) || !std::isfinite(gamma)) throw PhysicsError("beam gamma must be >= 0");
    std::visit(
        [](const auto& s) {
          if (!(s.w > 0) || !std::isfinite(s.w)) throw PhysicsError("beam w must be > 0");
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, FlatTopBeam<Scalar>>) {
            if (!(s.x_l < s.x_r)) throw PhysicsError("flat-top beam needs x_l < x_r");
          }
        },
        shape);
  }
};

/// Wave function samples and the time they belong to.
template <typename Scalar = double>
struct WaveField {
  ComplexVector<Scalar> psi;
  Scalar t{0};

  Eigen::Index size() const { return psi.size(); }
  bool all_finite() const { return psi.allFinite(); }
};

template <typename Scalar>
ComplexVector<Scalar> to_spectrum(SpectralTransform<Scalar>& transform, const WaveField<Scalar>& field) {
  return transform.forward(field.psi);
}

template <typename Scalar>
WaveField<Scalar> from_spectrum(SpectralTransform<Scalar>& transform, const ComplexVector<Scalar>& spectrum,
                                Scalar t = 0) {
  return WaveField<Scalar>{transform.inverse(spectrum), t};
}

template <typename Scalar>
Scalar beam_profile(const GaussianBeam<Scalar>& b, Scalar x, Scalar /*t*/ = 0) {
  const Scalar s = (x - b.x_b) / b.w;
  return std::exp(-s * s);
}

template <typename Scalar>
Scalar beam_profile(const FlatTopBeam<Scalar>& b, Scalar x, Scalar /*t*/ = 0) {
  if (x < b.x_l) {
    const Scalar s = (x - b.x_l) / b.w;
    return std::exp(-s * s);
  }
  if (x < b.x_r) return Scalar(1);
  const Scalar s = (x - b.x_r) / b.w;
  return std::exp(-s * s);
}

template <typename Scalar>
Scalar beam_profile(const MovingGaussianBeam<Scalar>& b, Scalar x, Scalar t) {
  const Scalar s = (x - (b.x_b0 + b.u * t)) / b.w;
  return std::exp(-s * s);
}

/// Dimensionless envelope Gamma(x, t) in [0, 1].
template <typename Scalar>
Scalar beam_profile(const BeamSpec<Scalar>& spec, Scalar x, Scalar t = 0) {
  return std::visit([x, t](const auto& s) { return beam_profile(s, x, t); }, spec.shape);
}

/// Gamma sampled on every grid point at time t.
template <typename Scalar>
RealVector<Scalar> sample_beam(const SpatialGrid<Scalar>& grid, const BeamSpec<Scalar>& spec, Scalar t = 0) {
  return grid.x().unaryExpr([&](Scalar x) { return beam_profile(spec, x, t); });
}

/// Closed-form moving soliton of the undamped equation.
template <typename Scalar>
std::complex<Scalar> analytic_soliton(Scalar x, Scalar t, const SolitonSpec<Scalar>& spec,
                                      const PhysicalConstants<Scalar>& c) {
  const Scalar a = spec.amplitude_for(c);
  const Scalar v = spec.velocity;
  const Scalar envelope = a / std::cosh(a * std::sqrt(c.g) * (x - spec.x0 - v * t));
  const Scalar phase = v * x - Scalar(0.5) * t * (v * v - a * a * c.g);
  return std::polar(envelope, phase);
}

template <typename Scalar>
WaveField<Scalar> analytic_soliton(const SpatialGrid<Scalar>& grid, Scalar t, const SolitonSpec<Scalar>& spec,
                                   const PhysicalConstants<Scalar>& c) {
  WaveField<Scalar> f{ComplexVector<Scalar>(grid.size()), t};
  for (Eigen::Index j = 0; j < grid.size(); ++j) f.psi[j] = analytic_soliton(grid.x()[j], t, spec, c);
  return f;
}

/// Initial state: the t = 0 soliton sampled on the grid and rescaled so the
/// discrete norm sum |psi_j|^2 dx is exactly one.
template <typename Scalar>
WaveField<Scalar> init_soliton(const SpatialGrid<Scalar>& grid, const SolitonSpec<Scalar>& spec,
                               const PhysicalConstants<Scalar>& c) {
  c.validate();
  if (!(spec.x0 >= grid.x_min() && spec.x0 < grid.x_max())) {
    throw PhysicsError("soliton center x0=" + std::to_string(spec.x0) + " lies outside the domain");
  }
  const Scalar width = spec.width(c);
  const Scalar margin = std::min(spec.x0 - grid.x_min(), grid.x_max() - spec.x0);
  if (margin < 10 * width) {
    throw PhysicsError("soliton of width " + std::to_string(width) +
                       " does not fit the domain with 10 widths of margin");
  }
  SolitonSpec<Scalar> unit = spec;
  unit.amplitude = std::sqrt(c.g) / 2;
  WaveField<Scalar> f = analytic_soliton(grid, Scalar(0), unit, c);
  const Scalar n = f.psi.squaredNorm() * grid.dx();
  f.psi /= std::sqrt(n);
  return f;
}

}  // namespace zeno

#endif  // ZENO_PHYSICS_HPP
