#include "zeno/io.hpp"

#include <yaml-cpp/yaml.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace zeno::io {

namespace {

int line_of(const YAML::Node& node) {
  const auto mark = node.Mark();
  return mark.is_null() ? 0 : mark.line + 1;
}

/// A mapping node together with its dotted path, for error messages.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsMap()) throw ConfigError(path_ + ": expected a mapping", line_of(node_));
  }

  bool present() const { return static_cast<bool>(node_); }
  bool has(const std::string& key) const { return node_ && node_[key]; }

  void allow(std::initializer_list<const char*> keys) const {
    if (!node_) return;
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) throw ConfigError("unknown key '" + name(key) + "'", line_of(kv.first));
    }
  }

  Section child(const std::string& key) const { return Section(node_ ? node_[key] : YAML::Node{}, name(key)); }

  YAML::Node raw(const std::string& key) const { return node_ ? node_[key] : YAML::Node{}; }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (!has(key)) return fallback;
    return read<T>(key);
  }

  template <typename T>
  T require(const std::string& key, const std::string& why = "required") const {
    if (!has(key)) throw ConfigError(name(key) + ": " + why, line_of(node_));
    return read<T>(key);
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  int line(const std::string& key) const { return has(key) ? line_of(node_[key]) : line_of(node_); }
  int line() const { return line_of(node_); }

 private:
  template <typename T>
  T read(const std::string& key) const {
    const YAML::Node n = node_[key];
    try {
      const T value = n.as<T>();
      if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) throw ConfigError(name(key) + ": must be finite", line_of(n));
      }
      return value;
    } catch (const YAML::BadConversion&) {
      throw ConfigError(name(key) + ": cannot read '" + YAML::Dump(n) + "' as the expected type", line_of(n));
    }
  }

  YAML::Node node_;
  std::string path_;
};

void check(bool ok, const Section& s, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(s.name(key) + ": " + what, s.line(key));
}

ScenarioConfig read_scenario(const YAML::Node& root) {
  const Section top(root, "");
  ScenarioConfig c;
  c.label = top.get<std::string>("label", "scenario");

  const auto grid = top.child("grid");
  grid.allow({"x_min", "x_max", "n"});
  c.grid.x_min = grid.get("x_min", c.grid.x_min);
  c.grid.x_max = grid.get("x_max", c.grid.x_max);
  c.grid.n = grid.get<long>("n", c.grid.n);
  check(c.grid.x_max > c.grid.x_min, grid, "x_max", "must exceed x_min");
  check(c.grid.n >= 2 && (c.grid.n & (c.grid.n - 1)) == 0, grid, "n", "must be a power of two >= 2");

  const auto consts = top.child("constants");
  consts.allow({"m", "hbar", "g"});
  c.consts.mass = consts.get("m", c.consts.mass);
  c.consts.hbar = consts.get("hbar", c.consts.hbar);
  c.consts.g = consts.get("g", c.consts.g);
  check(c.consts.mass > 0, consts, "m", "must be > 0");
  check(c.consts.hbar > 0, consts, "hbar", "must be > 0");
  check(c.consts.g > 0, consts, "g", "must be > 0");

  const auto sol = top.child("soliton");
  if (!sol.present()) throw ConfigError("soliton: required", top.line());
  sol.allow({"v", "x0"});
  c.soliton.velocity = sol.require<double>("v");
  c.soliton.x0 = sol.get("x0", 10.0);
  c.soliton.amplitude.reset();

  const auto beam = top.child("beam");
  if (!beam.present()) throw ConfigError("beam: required", top.line());
  const auto kind = beam.require<std::string>("kind");
  c.beam.gamma = beam.require<double>("gamma");
  check(c.beam.gamma >= 0, beam, "gamma", "must be >= 0");
  const double w = beam.require<double>("w");
  check(w > 0, beam, "w", "must be > 0");
  if (kind == "gaussian") {
    beam.allow({"kind", "gamma", "w", "x_b"});
    c.beam.shape = GaussianBeam<double>{beam.require<double>("x_b", "required for a gaussian beam"), w};
  } else if (kind == "flat_top") {
    beam.allow({"kind", "gamma", "w", "x_l", "x_r"});
    const double xl = beam.require<double>("x_l", "required for a flat_top beam");
    const double xr = beam.require<double>("x_r", "required for a flat_top beam");
    check(xl < xr, beam, "x_r", "must exceed x_l");
    c.beam.shape = FlatTopBeam<double>{xl, xr, w};
  } else if (kind == "moving_gaussian") {
    beam.allow({"kind", "gamma", "w", "x_b0", "u"});
    c.beam.shape = MovingGaussianBeam<double>{beam.require<double>("x_b0", "required for a moving_gaussian beam"), w,
                                              beam.get("u", c.soliton.velocity / 2)};
  } else {
    throw ConfigError(beam.name("kind") + ": expected gaussian, flat_top or moving_gaussian, got '" + kind + "'",
                      beam.line("kind"));
  }

  const auto time = top.child("time");
  time.allow({"dt", "end", "t_final", "loss_rate_eps", "quiet_window", "t_max", "snapshot_stride"});
  c.time.dt = time.get("dt", c.time.dt);
  check(c.time.dt > 0, time, "dt", "must be > 0");
  c.time.snapshot_stride = time.get<long>("snapshot_stride", c.time.snapshot_stride);
  check(c.time.snapshot_stride >= 1, time, "snapshot_stride", "must be >= 1");
  const auto end = time.get<std::string>("end", time.has("t_final") ? "fixed" : "auto");
  if (end == "fixed") {
    time.allow({"dt", "end", "t_final", "snapshot_stride"});
    const double tf = time.require<double>("t_final", "required when end is fixed");
    check(tf >= 0, time, "t_final", "must be >= 0");
    c.time.end = FixedEnd<double>{tf};
  } else if (end == "auto") {
    time.allow({"dt", "end", "loss_rate_eps", "quiet_window", "t_max", "snapshot_stride"});
    AutoEnd<double> a;
    a.loss_rate_eps = time.get("loss_rate_eps", a.loss_rate_eps);
    a.quiet_window = time.get("quiet_window", a.quiet_window);
    a.t_max = time.get("t_max", a.t_max);
    check(a.loss_rate_eps > 0, time, "loss_rate_eps", "must be > 0");
    check(a.quiet_window > 0, time, "quiet_window", "must be > 0");
    check(a.t_max >= a.quiet_window, time, "t_max", "must be >= quiet_window");
    c.time.end = a;
  } else {
    throw ConfigError(time.name("end") + ": expected auto or fixed, got '" + end + "'", time.line("end"));
  }

  const auto obs = top.child("observe");
  obs.allow({"com_stride", "snapshots", "contact_eps"});
  c.observe.com_stride = obs.get<long>("com_stride", c.observe.com_stride);
  c.observe.snapshots = obs.get("snapshots", c.observe.snapshots);
  c.observe.contact_eps = obs.get("contact_eps", c.observe.contact_eps);
  check(c.observe.com_stride >= 1, obs, "com_stride", "must be >= 1");
  check(c.observe.contact_eps > 0, obs, "contact_eps", "must be > 0");

  try {
    c.validate();
  } catch (const ScenarioError& e) {
    throw ConfigError(e.what(), top.line());
  }
  return c;
}

/// Shortest text that reads back to the same double.
std::string num(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void emit_scenario_body(YAML::Emitter& out, const ScenarioConfig& c) {
  out << YAML::Key << "label" << YAML::Value << c.label;
  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "x_min" << YAML::Value << num(c.grid.x_min);
  out << YAML::Key << "x_max" << YAML::Value << num(c.grid.x_max);
  out << YAML::Key << "n" << YAML::Value << static_cast<long>(c.grid.n);
  out << YAML::EndMap;

  out << YAML::Key << "constants" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "m" << YAML::Value << num(c.consts.mass);
  out << YAML::Key << "hbar" << YAML::Value << num(c.consts.hbar);
  out << YAML::Key << "g" << YAML::Value << num(c.consts.g);
  out << YAML::EndMap;

  out << YAML::Key << "soliton" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "v" << YAML::Value << num(c.soliton.velocity);
  out << YAML::Key << "x0" << YAML::Value << num(c.soliton.x0);
  out << YAML::EndMap;

  out << YAML::Key << "beam" << YAML::Value << YAML::BeginMap;
  std::visit(
      [&out](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, GaussianBeam<double>>) {
          out << YAML::Key << "kind" << YAML::Value << "gaussian";
          out << YAML::Key << "x_b" << YAML::Value << num(s.x_b);
        } else if constexpr (std::is_same_v<S, FlatTopBeam<double>>) {
          out << YAML::Key << "kind" << YAML::Value << "flat_top";
          out << YAML::Key << "x_l" << YAML::Value << num(s.x_l);
          out << YAML::Key << "x_r" << YAML::Value << num(s.x_r);
        } else {
          out << YAML::Key << "kind" << YAML::Value << "moving_gaussian";
          out << YAML::Key << "x_b0" << YAML::Value << num(s.x_b0);
          out << YAML::Key << "u" << YAML::Value << num(s.u);
        }
        out << YAML::Key << "w" << YAML::Value << num(s.w);
      },
      c.beam.shape);
  out << YAML::Key << "gamma" << YAML::Value << num(c.beam.gamma);
  out << YAML::EndMap;

  out << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dt" << YAML::Value << num(c.time.dt);
  if (const auto* f = std::get_if<FixedEnd<double>>(&c.time.end)) {
    out << YAML::Key << "end" << YAML::Value << "fixed";
    out << YAML::Key << "t_final" << YAML::Value << num(f->t_final);
  } else {
    const auto& a = std::get<AutoEnd<double>>(c.time.end);
    out << YAML::Key << "end" << YAML::Value << "auto";
    out << YAML::Key << "loss_rate_eps" << YAML::Value << num(a.loss_rate_eps);
    out << YAML::Key << "quiet_window" << YAML::Value << num(a.quiet_window);
    out << YAML::Key << "t_max" << YAML::Value << num(a.t_max);
  }
  out << YAML::Key << "snapshot_stride" << YAML::Value << static_cast<long>(c.time.snapshot_stride);
  out << YAML::EndMap;

  out << YAML::Key << "observe" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "com_stride" << YAML::Value << static_cast<long>(c.observe.com_stride);
  out << YAML::Key << "snapshots" << YAML::Value << c.observe.snapshots;
  out << YAML::Key << "contact_eps" << YAML::Value << num(c.observe.contact_eps);
  out << YAML::EndMap;
}

void emit_sweep_block(YAML::Emitter& out, const SweepSpec& spec) {
  out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "axes" << YAML::Value << YAML::BeginSeq;
  for (const auto& axis : spec.axes) {
    out << YAML::BeginMap;
    out << YAML::Key << "param" << YAML::Value << to_string(axis.parameter);
    out << YAML::Key << "values" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double v : axis.values) out << num(v);
    out << YAML::EndSeq;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
}

void configure(YAML::Emitter& out, bool flow) {
  out.SetBoolFormat(YAML::TrueFalseBool);
  if (flow) {
    out.SetMapFormat(YAML::Flow);
    out.SetSeqFormat(YAML::Flow);
  }
}

std::string flatten(std::string s) {
  for (char& ch : s) {
    if (ch == '\n') ch = ' ';
  }
  return s;
}

}  // namespace

ParsedConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("parse error: " + e.msg, e.mark.is_null() ? 0 : e.mark.line + 1);
  }
  if (!root || !root.IsMap()) throw ConfigError("config must be a mapping at the top level", 1);

  const Section top(root, "");
  top.allow({"label", "grid", "constants", "soliton", "beam", "time", "observe", "sweep"});

  ScenarioConfig base = read_scenario(root);
  if (!top.has("sweep")) return base;

  const auto sweep = top.child("sweep");
  sweep.allow({"axes"});
  const YAML::Node axes = sweep.raw("axes");
  if (!axes || !axes.IsSequence()) throw ConfigError("sweep.axes: expected a list", sweep.line());
  SweepSpec spec;
  spec.base = base;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const Section axis(axes[i], "sweep.axes[" + std::to_string(i) + "]");
    axis.allow({"param", "values"});
    SweepAxis a;
    try {
      a.parameter = parse_sweep_parameter(axis.require<std::string>("param"));
    } catch (const ScenarioError& e) {
      throw ConfigError(axis.name("param") + ": " + e.what(), axis.line("param"));
    }
    a.values = axis.require<std::vector<double>>("values");
    spec.axes.push_back(std::move(a));
  }
  try {
    spec.validate();
  } catch (const ScenarioError& e) {
    throw ConfigError(std::string("sweep: ") + e.what(), sweep.line());
  }
  return spec;
}

ParsedConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const ScenarioConfig& config) {
  YAML::Emitter out;
  configure(out, false);
  out << YAML::BeginMap;
  emit_scenario_body(out, config);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string emit_config(const SweepSpec& spec) {
  YAML::Emitter out;
  configure(out, false);
  out << YAML::BeginMap;
  emit_scenario_body(out, spec.base);
  emit_sweep_block(out, spec);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string emit_config_line(const ScenarioConfig& config) {
  YAML::Emitter out;
  configure(out, true);
  out << YAML::BeginMap;
  emit_scenario_body(out, config);
  out << YAML::EndMap;
  return flatten(out.c_str());
}

std::string emit_config_line(const SweepSpec& spec) {
  YAML::Emitter out;
  configure(out, true);
  out << YAML::BeginMap;
  emit_scenario_body(out, spec.base);
  emit_sweep_block(out, spec);
  out << YAML::EndMap;
  return flatten(out.c_str());
}

}  // namespace zeno::io
