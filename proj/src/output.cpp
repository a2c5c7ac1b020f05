#include "zeno/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace zeno::io {

namespace {

namespace fs = std::filesystem;

constexpr const char* kUnits = "dimensionless units with m = hbar = g = 1 (x: length, t: time, density: 1/length)";

std::string num(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

class TextFile {
 public:
  explicit TextFile(fs::path path) : path_(std::move(path)), out_(path_, std::ios::binary | std::ios::trunc) {
    if (!out_) throw OutputError("cannot open " + path_.string() + " for writing");
  }

  std::ofstream& stream() { return out_; }

  void close() {
    out_.close();
    if (!out_) throw OutputError("failed writing " + path_.string());
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

void table_header(std::ofstream& out, const std::string& title, const std::string& config_line,
                  const std::string& columns) {
  out << "# " << title << "\n";
  out << "# units: " << kUnits << "\n";
  out << "# config: " << config_line << "\n";
  out << columns << "\n";
}

void write_series(const fs::path& path, const std::string& title, const std::string& config_line,
                  const std::string& columns, const std::vector<TimeSample<double>>& series) {
  TextFile f(path);
  auto& out = f.stream();
  table_header(out, title, config_line, columns);
  for (const auto& s : series) out << num(s.t) << ',' << num(s.value) << '\n';
  f.close();
}

std::string yaml_quote(const std::string& s) {
  std::string out = "'";
  for (char ch : s) {
    out += ch;
    if (ch == '\'') out += '\'';
  }
  return out + "'";
}

Manifest finish(const fs::path& dir, const std::vector<std::string>& files) {
  Manifest m;
  m.directory = dir;
  for (const auto& name : files) {
    const auto p = dir / name;
    m.entries.push_back({name, sha256_file(p), fs::file_size(p)});
  }
  TextFile f(dir / "manifest.txt");
  auto& out = f.stream();
  out << "# sha256  bytes  file\n";
  for (const auto& e : m.entries) out << e.sha256 << "  " << e.bytes << "  " << e.file << "\n";
  f.close();
  return m;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw OutputError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw OutputError("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

Manifest write_outputs(const ScenarioResult& result, const fs::path& dir) {
  ensure_dir(dir);
  const auto& c = result.config;
  const auto& s = result.summary;
  const auto grid = c.grid.build();
  const std::string echo = emit_config_line(c);
  std::vector<std::string> files;

  {
    TextFile f(dir / "config.yaml");
    f.stream() << emit_config(c);
    f.close();
    files.push_back("config.yaml");
  }
  {
    TextFile f(dir / "summary.yaml");
    auto& out = f.stream();
    out << "# run summary; " << kUnits << "\n";
    out << "label: " << yaml_quote(c.label) << "\n";
    out << "p_refl: " << num(s.p_refl) << "\n";
    out << "final_norm: " << num(s.final_norm) << "\n";
    out << "transmitted: " << num(s.transmitted) << "\n";
    out << "t_final: " << num(s.t_final_used) << "\n";
    out << "quiescent: " << (s.quiescent ? "true" : "false") << "\n";
    out << "t_last_contact: " << num(result.t_last_contact) << "\n";
    out << "reflection_boundary: " << num(c.beam.reference_edge(s.t_final_used)) << "\n";
    out << "fitted_out_velocity: " << (s.fitted_out_velocity ? num(*s.fitted_out_velocity) : "null") << "\n";
    if (s.fitted_sech) {
      out << "sech_amplitude: " << num(s.fitted_sech->amplitude) << "\n";
      out << "sech_width: " << num(s.fitted_sech->width) << "\n";
      out << "sech_center: " << num(s.fitted_sech->center) << "\n";
      out << "sech_residual: " << num(s.fitted_sech->residual) << "\n";
      out << "sech_converged: " << (s.fitted_sech->converged ? "true" : "false") << "\n";
    } else {
      out << "sech_amplitude: null\nsech_width: null\nsech_center: null\nsech_residual: null\n"
             "sech_converged: false\n";
    }
    if (result.closest_snapshot) {
      out << "closest_encounter_t: " << num(s.snapshots.at(*result.closest_snapshot).t) << "\n";
    } else {
      out << "closest_encounter_t: null\n";
    }
    out << "snapshot_count: " << s.snapshots.size() << "\n";
    out << "grid_n: " << grid.size() << "\n";
    out << "config: " << yaml_quote(echo) << "\n";
    f.close();
    files.push_back("summary.yaml");
  }

  write_series(dir / "surviving.csv", "surviving fraction N(t)", echo, "t,norm", s.surviving_series);
  files.push_back("surviving.csv");
  write_series(dir / "com.csv", "center of mass over the whole domain", echo, "t,com", s.com_series);
  files.push_back("com.csv");

  {
    TextFile f(dir / "heatmap.csv");
    auto& out = f.stream();
    table_header(out, "density snapshots", echo, "t,x,density");
    for (const auto& snap : s.snapshots) {
      const std::string t = num(snap.t);
      for (Eigen::Index j = 0; j < grid.size(); ++j) {
        out << t << ',' << num(grid.x()[j]) << ',' << num(snap.density[j]) << '\n';
      }
    }
    f.close();
    files.push_back("heatmap.csv");
  }

  if (result.closest_snapshot) {
    const auto& snap = s.snapshots.at(*result.closest_snapshot);
    TextFile f(dir / "profiles.csv");
    auto& out = f.stream();
    out << "# profiles at closest encounter t=" << num(snap.t) << "\n";
    out << "# units: " << kUnits << "\n";
    out << "# config: " << echo << "\n";
    out << "x,beam,amplitude,density\n";
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
      const double x = grid.x()[j];
      out << num(x) << ',' << num(beam_profile(c.beam, x, snap.t)) << ',' << num(std::sqrt(snap.density[j])) << ','
          << num(snap.density[j]) << '\n';
    }
    f.close();
    files.push_back("profiles.csv");
  }
  return finish(dir, files);
}

Manifest write_sweep_outputs(const SweepSpec& spec, const SweepTable& table, const fs::path& dir) {
  ensure_dir(dir);
  std::vector<std::string> files;
  {
    TextFile f(dir / "config.yaml");
    f.stream() << emit_config(spec);
    f.close();
    files.push_back("config.yaml");
  }
  {
    TextFile f(dir / "sweep.csv");
    auto& out = f.stream();
    std::string columns;
    for (auto p : table.axes) columns += to_string(p) + ",";
    columns += "p_refl,final_norm,t_final,quiescent,status";
    table_header(out, "reflected fraction sweep", emit_config_line(spec), columns);
    for (const auto& cell : table.cells) {
      for (double v : cell.coords) out << num(v) << ',';
      if (cell.ok()) {
        out << num(cell.p_refl) << ',' << num(cell.final_norm) << ',' << num(cell.t_final) << ','
            << (cell.quiescent ? 1 : 0) << ",ok\n";
      } else {
        std::string msg = cell.error;
        for (char& ch : msg) {
          if (ch == ',' || ch == '\n') ch = ';';
        }
        out << "nan,nan,nan,0,error: " << msg << '\n';
      }
    }
    f.close();
    files.push_back("sweep.csv");
  }
  return finish(dir, files);
}

std::vector<std::pair<std::string, std::string>> read_summary(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw OutputError("cannot read " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(": ");
    if (colon == std::string::npos) continue;
    out.emplace_back(line.substr(0, colon), line.substr(colon + 2));
  }
  return out;
}

}  // namespace zeno::io
