#include "zeno/observables.hpp"
#include "zeno/propagator.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace zeno;

namespace {

const PhysicalConstants<double> unit{};
const BeamSpec<double> no_beam{0.0, GaussianBeam<double>{-5.0, 0.1}};

Trajectory<double> free_run(const SpatialGrid<double>& grid, const SolitonSpec<double>& s, double t_final) {
  TimeParams<double> time;
  time.end = FixedEnd<double>{t_final};
  time.snapshot_stride = 200;
  return evolve(grid, init_soliton(grid, s, unit), time, no_beam, unit);
}

}  // namespace

TEST_CASE("norm is a quadratic functional") {
  const auto grid = make_grid(-40.0, 40.0, 4096);
  auto f = init_soliton(grid, SolitonSpec<double>{-0.25, 10.0}, unit);
  CHECK(norm(grid, f) == doctest::Approx(1.0).epsilon(1e-12));
  f.psi *= 0.5;
  CHECK(norm(grid, f) == doctest::Approx(0.25).epsilon(1e-12));
  f.psi *= 2.0 * std::exp(-0.3 * 2.0);  // amplitude decay e^{-gamma t} with gamma t = 0.6
  CHECK(norm(grid, f) == doctest::Approx(std::exp(-2 * 0.6)).epsilon(1e-12));
}

TEST_CASE("norm agrees in position and spectral space") {
  const auto grid = make_grid(-40.0, 40.0, 4096);
  SpectralTransform<double> t(grid.size());
  const auto f = init_soliton(grid, SolitonSpec<double>{0.4, -3.0}, unit);
  const double spectral = to_spectrum(t, f).squaredNorm() * grid.dx();
  CHECK(std::abs(spectral - norm(grid, f)) < 1e-10);
  const auto back = from_spectrum(t, to_spectrum(t, f), f.t);
  CHECK((back.psi - f.psi).norm() < 1e-12);
}

TEST_CASE("reflected_fraction") {
  const auto grid = make_grid(-40.0, 40.0, 4096);
  const auto f = init_soliton(grid, SolitonSpec<double>{-0.25, 10.0}, unit);
  CHECK(reflected_fraction(grid, f, -30.0) == doctest::Approx(norm(grid, f)).epsilon(1e-12));
  CHECK(reflected_fraction(grid, f, grid.x_min()) == norm(grid, f));
  CHECK_THROWS_AS(reflected_fraction(grid, f, -41.0), ObservableError);
  CHECK_THROWS_AS(reflected_fraction(grid, f, 40.5), ObservableError);

  // packet centered half a cell left of a grid point splits exactly in two
  const double xb = grid.x()[1792] - grid.dx() / 2;
  const auto centered = init_soliton(grid, SolitonSpec<double>{0.3, xb}, unit);
  CHECK(std::abs(reflected_fraction(grid, centered, xb) - 0.5 * norm(grid, centered)) < 1e-6);
}

TEST_CASE("reflected_fraction is non-increasing in the boundary") {
  const auto grid = make_grid(-40.0, 40.0, 1024);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d;
  WaveField<double> f{ComplexVector<double>(grid.size()), 0.0};
  for (auto& z : f.psi) z = {d(rng), d(rng)};
  double prev = reflected_fraction(grid, f, grid.x_min());
  for (double xb = -39.9; xb < 40.0; xb += 0.173) {
    const double cur = reflected_fraction(grid, f, xb);
    REQUIRE(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("center_of_mass") {
  const auto grid = make_grid(-40.0, 40.0, 4096);
  const auto f = init_soliton(grid, SolitonSpec<double>{-0.25, 10.0}, unit);
  CHECK(center_of_mass(grid, f) == doctest::Approx(10.0).epsilon(1e-7));

  WaveField<double> spikes{ComplexVector<double>::Zero(grid.size()), 0.0};
  const Eigen::Index b = grid.first_at_or_right_of(7.0), a = grid.size() - b;
  REQUIRE(grid.x()[a] == -grid.x()[b]);
  spikes.psi[a] = 1.0;
  spikes.psi[b] = 1.0;
  CHECK(std::abs(center_of_mass(grid, spikes)) < 1e-12);

  CHECK_THROWS_AS(center_of_mass(grid, f, Interval<double>{-40.0, -30.0}), ObservableError);
}

TEST_CASE("center of mass of a free soliton moves at its velocity") {
  const auto grid = make_grid(-40.0, 40.0, 4096);
  const auto traj = free_run(grid, SolitonSpec<double>{-0.25, 10.0}, 20.0);
  CHECK(std::abs(center_of_mass(grid, traj.final_field) - (10.0 - 0.25 * 20.0)) < 1e-3);
}

TEST_CASE("com_velocity") {
  const auto grid = make_grid(-40.0, 40.0, 4096);
  {
    const auto traj = free_run(grid, SolitonSpec<double>{0.0, 5.0}, 10.0);
    CHECK(std::abs(com_velocity(grid, traj, Interval<double>{0.0, 10.0}, Region<double>{Interval<double>{}},
                                no_beam)) < 1e-4);
  }
  const auto traj = free_run(grid, SolitonSpec<double>{-0.25, 10.0}, 10.0);
  const double v = com_velocity(grid, traj, Interval<double>{0.0, 10.0}, Region<double>{Interval<double>{}}, no_beam);
  CHECK(std::abs(v + 0.25) < 1e-3);
  // region following the beam edge
  const double v_side = com_velocity(grid, traj, Interval<double>{0.0, 10.0},
                                     Region<double>{BeamSide<double>{true, 0.0}}, no_beam);
  CHECK(std::abs(v_side + 0.25) < 1e-3);
  CHECK_THROWS_AS(com_velocity(grid, traj, Interval<double>{0.0, 3.5}, Region<double>{Interval<double>{}}, no_beam),
                  ObservableError);
}

TEST_CASE("fit_sech recovers an exact soliton") {
  const auto grid = make_grid(-40.0, 40.0, 4096);
  const auto f = analytic_soliton(grid, 0.0, SolitonSpec<double>{-0.25, 10.0}, unit);
  const auto fit = fit_sech(grid, f);
  CHECK(fit.converged);
  CHECK(fit.solitonic());
  CHECK(fit.amplitude == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(fit.width == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(fit.center == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(fit.residual < 1e-8);
}

TEST_CASE("fit_sech flags a flat noise field") {
  const auto grid = make_grid(-40.0, 40.0, 1024);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.05, 0.15);
  WaveField<double> f{ComplexVector<double>(grid.size()), 0.0};
  for (auto& z : f.psi) z = u(rng);
  const auto fit = fit_sech(grid, f);
  CHECK_FALSE(fit.solitonic());

  WaveField<double> faint{ComplexVector<double>::Constant(grid.size(), 1e-3), 0.0};
  CHECK_THROWS_AS(fit_sech(grid, faint), ObservableError);
}

TEST_CASE("fit_slope on exact lines") {
  std::vector<TimeSample<double>> s;
  for (int i = 0; i < 6; ++i) s.push_back({double(i), 3.0 - 0.5 * i});
  CHECK(fit_slope(s) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(fit_slope(std::vector<TimeSample<double>>{{0.0, 1.0}}), ObservableError);
}
