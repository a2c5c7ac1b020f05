#ifndef ZENO_EXPERIMENTS_HPP
#define ZENO_EXPERIMENTS_HPP

#include "zeno/grid.hpp"
#include "zeno/observables.hpp"
#include "zeno/physics.hpp"
#include "zeno/propagator.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace zeno {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  double x_min{-40};
  double x_max{40};
  Eigen::Index n{4096};

  SpatialGrid<double> build() const { return make_grid(x_min, x_max, n); }
};

/// Recording options that can be written to and read from a config file.
struct ObserveSpec {
  Eigen::Index com_stride{20};
  bool snapshots{true};
  /// Relative loss rate above which the packet counts as touching the beam.
  double contact_eps{1e-6};
};

struct ScenarioConfig {
  std::string label{"scenario"};
  GridSpec grid{};
  PhysicalConstants<double> consts{};
  SolitonSpec<double> soliton{-0.25, 10.0};
  BeamSpec<double> beam{200.0, GaussianBeam<double>{-5.0, 0.1}};
  TimeParams<double> time{};
  ObserveSpec observe{};

  /// Throws ScenarioError naming the first violated constraint.
  void validate() const;
  /// Latest time the run may reach.
  double time_horizon() const;
};

/// Result of run_scenario: the summary plus what the writers need.
struct ScenarioResult {
  ScenarioConfig config;
  RunSummary<double> summary;
  /// Snapshot index where the packet was closest to the beam.
  std::optional<std::size_t> closest_snapshot;
  double t_last_contact{0};
};

ScenarioResult run_scenario(const ScenarioConfig& config);

/// run_scenario for a moving beam; the summary always carries the
/// post-encounter velocity.
ScenarioResult stop_soliton(const ScenarioConfig& config);

enum class SweepParameter { W, Gamma, Velocity };

std::string to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(const std::string& name);

struct SweepAxis {
  SweepParameter parameter{SweepParameter::W};
  std::vector<double> values;
};

struct SweepSpec {
  ScenarioConfig base{};
  std::vector<SweepAxis> axes;

  void validate() const;
  std::size_t cell_count() const;
  /// Row-major multi-index of a flat cell number.
  std::vector<std::size_t> cell_index(std::size_t flat) const;
  ScenarioConfig cell_config(std::size_t flat) const;
};

struct SweepCell {
  std::vector<double> coords;
  double p_refl{};
  double final_norm{};
  double t_final{};
  bool quiescent{false};
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

struct SweepTable {
  std::vector<SweepParameter> axes;
  std::vector<SweepCell> cells;  // row-major, first axis slowest
};

/// Runs every cell on up to `threads` workers. `order`, when given, is the
/// permutation in which cells are dispatched; the table is always assembled
/// in axis order.
SweepTable run_sweep(const SweepSpec& spec, unsigned threads = 1,
                     const std::vector<std::size_t>& order = {});

struct FigurePreset {
  std::string name;
  std::string description;
  std::vector<ScenarioConfig> scenarios;
  std::optional<SweepSpec> sweep;
};

/// fig1, fig2a ... fig2j, fig3. full_resolution switches the contour
/// sweeps from 8x8 to 24x24 cells.
FigurePreset figure_preset(const std::string& name, bool full_resolution = false);
std::vector<std::string> figure_names();

/// Snapshot index whose whole-domain center of mass is nearest the beam.
std::optional<std::size_t> closest_encounter(const SpatialGrid<double>& grid, const Trajectory<double>& traj,
                                             const BeamSpec<double>& beam);

/// Last time at which the relative loss rate reached eps (t0 if never).
double last_contact_time(const std::vector<TimeSample<double>>& norm_series, double eps);

}  // namespace zeno

#endif  // ZENO_EXPERIMENTS_HPP
