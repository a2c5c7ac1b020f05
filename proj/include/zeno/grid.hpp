#ifndef ZENO_GRID_HPP
#define ZENO_GRID_HPP

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace zeno {

template <typename Scalar>
using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform periodic 1D grid. Sample j sits at x_min + j*dx; x_max is the
/// periodic image of x_min and is not itself a sample.
template <typename Scalar = double>
class SpatialGrid {
 public:
  SpatialGrid(Scalar x_min, Scalar x_max, Eigen::Index n)
      : x_min_(x_min), x_max_(x_max), n_(n) {
    if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
      throw GridError("grid extent must be finite and positive");
    }
    if (n < 2 || (n & (n - 1)) != 0) {
      throw GridError("grid size must be a power of two >= 2, got " + std::to_string(n));
    }
    dx_ = (x_max - x_min) / static_cast<Scalar>(n);
    x_.resize(n);
    k_.resize(n);
    const Scalar dk = 2 * std::numbers::pi_v<Scalar> / (x_max - x_min);
    for (Eigen::Index j = 0; j < n; ++j) {
      x_[j] = x_min + static_cast<Scalar>(j) * dx_;
      // DFT ordering: 0, 1, ..., n/2-1, -n/2, ..., -1
      const Eigen::Index m = j < n / 2 ? j : j - n;
      k_[j] = static_cast<Scalar>(m) * dk;
    }
  }

  Scalar x_min() const { return x_min_; }
  Scalar x_max() const { return x_max_; }
  Scalar length() const { return x_max_ - x_min_; }
  Eigen::Index size() const { return n_; }
  Scalar dx() const { return dx_; }
  const RealVector<Scalar>& x() const { return x_; }
  const RealVector<Scalar>& k() const { return k_; }
  Scalar k_max() const { return k_.cwiseAbs().maxCoeff(); }

  bool contains(Scalar pos) const { return pos >= x_min_ && pos <= x_max_; }

  /// Index of the first sample with x_j >= pos (n if none).
  Eigen::Index first_at_or_right_of(Scalar pos) const {
    if (pos <= x_min_) return 0;
    auto j = static_cast<Eigen::Index>(std::ceil((pos - x_min_) / dx_));
    // guard against rounding in the division
    while (j > 0 && x_[j - 1] >= pos) --j;
    while (j < n_ && x_[j] < pos) ++j;
    return j;
  }

 private:
  Scalar x_min_;
  Scalar x_max_;
  Eigen::Index n_;
  Scalar dx_{};
  RealVector<Scalar> x_;
  RealVector<Scalar> k_;
};

template <typename Scalar>
SpatialGrid<Scalar> make_grid(Scalar x_min, Scalar x_max, Eigen::Index n) {
  return SpatialGrid<Scalar>(x_min, x_max, n);
}

/// Unitary discrete Fourier pair on a grid: sum |c_k|^2 == sum |psi_j|^2.
///
/// Holds kissfft plans and is therefore not safe to share between threads;
/// give each evolution its own instance.
template <typename Scalar = double>
class SpectralTransform {
 public:
  explicit SpectralTransform(Eigen::Index n)
      : n_(n), scale_(Scalar(1) / std::sqrt(static_cast<Scalar>(n))) {
    fft_.SetFlag(Eigen::FFT<Scalar>::Unscaled);
  }

  Eigen::Index size() const { return n_; }

  void forward(const ComplexVector<Scalar>& field, ComplexVector<Scalar>& spectrum) {
    check(field.size());
    spectrum.resize(n_);
    fft_.fwd(spectrum.data(), field.data(), n_);
    spectrum *= scale_;
  }

  void inverse(const ComplexVector<Scalar>& spectrum, ComplexVector<Scalar>& field) {
    check(spectrum.size());
    field.resize(n_);
    fft_.inv(field.data(), spectrum.data(), n_);
    field *= scale_;
  }

  ComplexVector<Scalar> forward(const ComplexVector<Scalar>& field) {
    ComplexVector<Scalar> out;
    forward(field, out);
    return out;
  }

  ComplexVector<Scalar> inverse(const ComplexVector<Scalar>& spectrum) {
    ComplexVector<Scalar> out;
    inverse(spectrum, out);
    return out;
  }

 private:
  void check(Eigen::Index len) const {
    if (len != n_) {
      throw GridError("field length " + std::to_string(len) + " does not match transform size " +
                      std::to_string(n_));
    }
  }

  Eigen::Index n_;
  Scalar scale_;
  Eigen::FFT<Scalar> fft_;
};

}  // namespace zeno

#endif  // ZENO_GRID_HPP
