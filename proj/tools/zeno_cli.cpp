// Command-line front end: run, sweep, figure, list-figures.

#include "zeno/experiments.hpp"
#include "zeno/io.hpp"

#include <CLI11.hpp>

#include <cctype>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <variant>

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kBlowUp = 3, kNoQuiescence = 4 };

struct Overrides {
  std::optional<double> dt;
  std::optional<long> grid_n;
  std::optional<long> snapshot_stride;
  unsigned threads = 1;
  bool quiet = false;
  std::string out = "out";
  bool full_resolution = false;

  void apply(zeno::ScenarioConfig& c) const {
    if (dt) c.time.dt = *dt;
    if (grid_n) c.grid.n = *grid_n;
    if (snapshot_stride) c.time.snapshot_stride = *snapshot_stride;
  }
};

std::string slug(const std::string& label) {
  std::string s;
  for (char ch : label) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u) || ch == '.' || ch == '-') {
      s += ch;
    } else if (!s.empty() && s.back() != '_') {
      s += '_';
    }
  }
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s.empty() ? "scenario" : s;
}

int run_one(const zeno::ScenarioConfig& config, const std::filesystem::path& dir, const Overrides& o) {
  const auto result = zeno::run_scenario(config);
  const auto manifest = zeno::io::write_outputs(result, dir);
  const auto& s = result.summary;
  if (!o.quiet) {
    std::printf("%s: P_refl=%.6f N(t_final)=%.6f t_final=%.3f%s -> %s\n", config.label.c_str(), s.p_refl,
                s.final_norm, s.t_final_used, s.quiescent ? "" : " (t_max reached before quiescence)",
                manifest.directory.string().c_str());
    if (s.fitted_out_velocity) std::printf("  outgoing velocity %.6f\n", *s.fitted_out_velocity);
  }
  return s.quiescent ? kOk : kNoQuiescence;
}

int run_sweep(zeno::SweepSpec spec, const std::filesystem::path& dir, const Overrides& o) {
  o.apply(spec.base);
  const auto table = zeno::run_sweep(spec, o.threads);
  zeno::io::write_sweep_outputs(spec, table, dir);
  bool all_quiet = true;
  for (const auto& cell : table.cells) {
    all_quiet = all_quiet && cell.ok() && cell.quiescent;
    if (o.quiet) continue;
    std::string coords;
    for (std::size_t k = 0; k < cell.coords.size(); ++k) {
      coords += (k ? " " : "") + zeno::to_string(table.axes[k]) + "=" + std::to_string(cell.coords[k]);
    }
    if (cell.ok()) {
      std::printf("%s  P_refl=%.6f%s\n", coords.c_str(), cell.p_refl, cell.quiescent ? "" : " (not quiescent)");
    } else {
      std::printf("%s  error: %s\n", coords.c_str(), cell.error.c_str());
    }
  }
  return all_quiet ? kOk : kNoQuiescence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dissipative Gross-Pitaevskii soliton reflection simulator"};
  app.require_subcommand(1);
  Overrides o;

  const auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
    sub->add_option("--dt", o.dt, "Time step override");
    sub->add_option("--grid-n", o.grid_n, "Grid size override (power of two)");
    sub->add_option("--threads", o.threads, "Worker threads for sweeps")->capture_default_str();
    sub->add_option("--snapshot-stride", o.snapshot_stride, "Steps between density snapshots");
    sub->add_flag("--quiet", o.quiet, "Suppress progress output");
  };

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run a single scenario from a config file");
  run->add_option("config", config_path, "Scenario config (YAML/JSON)")->required();
  add_common(run);

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep from a config file");
  sweep->add_option("config", config_path, "Sweep config (YAML/JSON)")->required();
  add_common(sweep);

  std::string figure_name;
  auto* figure = app.add_subcommand("figure", "Run a figure preset and write its dataset");
  figure->add_option("name", figure_name, "Preset name (see list-figures)")->required();
  figure->add_flag("--full-resolution", o.full_resolution, "Use 24x24 contour sweeps instead of 8x8");
  add_common(figure);

  auto* list = app.add_subcommand("list-figures", "List the figure presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      for (const auto& name : zeno::figure_names()) {
        std::cout << name << "  " << zeno::figure_preset(name).description << "\n";
      }
      return kOk;
    }
    if (*run || *sweep) {
      auto parsed = zeno::io::load_config(config_path);
      if (*run) {
        auto* config = std::get_if<zeno::ScenarioConfig>(&parsed);
        if (!config) throw zeno::io::ConfigError("run expects a scenario config; use `sweep` for sweep configs");
        o.apply(*config);
        return run_one(*config, o.out, o);
      }
      auto* spec = std::get_if<zeno::SweepSpec>(&parsed);
      if (!spec) throw zeno::io::ConfigError("sweep expects a config with a sweep block");
      return run_sweep(*spec, o.out, o);
    }
    auto preset = zeno::figure_preset(figure_name, o.full_resolution);
    const std::filesystem::path root = std::filesystem::path(o.out) / preset.name;
    if (preset.sweep) return run_sweep(*preset.sweep, root, o);
    int code = kOk;
    for (auto config : preset.scenarios) {
      o.apply(config);
      const std::filesystem::path dir = preset.scenarios.size() == 1 ? root : root / slug(config.label);
      code = std::max(code, run_one(config, dir, o));
    }
    return code;
  } catch (const zeno::io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const zeno::ScenarioError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const zeno::BlowUpError& e) {
    std::cerr << "numerical blow-up: " << e.what() << "\n";
    return kBlowUp;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
