#include "igac/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "igac/elasticity.hpp"

namespace igac {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int to_int(const std::string& key, const std::string& v) {
  int x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key, key + ": expected an integer, got '" + v + "'");
  return x;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x)) {
    throw ConfigError(key, key + ": expected a number, got '" + v + "'");
  }
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, key + ": expected true or false, got '" + v + "'");
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, key + ": " + what);
}

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", x);
  return buf;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
  const char* key;
  Setter set;
  Getter get;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      {"scenario",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const auto s = scenario_from_name(v);
         std::string known;
         for (const auto& n : scenario_names()) known += (known.empty() ? "" : ", ") + n;
         require(s.has_value(), k, "unknown scenario '" + v + "' (known: " + known + ")");
         c.bench.scenario = *s;
       },
       [](const RunConfig& c) { return scenario_name(c.bench.scenario); }},
      {"degree",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.bench.p = to_int(k, v);
         require(c.bench.p == 2 || c.bench.p == 3, k, "must be 2 or 3, got " + v);
       },
       [](const RunConfig& c) { return std::to_string(c.bench.p); }},
      {"levels",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.bench.levels = to_int(k, v);
         require(c.bench.levels >= 1 && c.bench.levels <= 8, k, "must be between 1 and 8, got " + v);
       },
       [](const RunConfig& c) { return std::to_string(c.bench.levels); }},
      {"r0",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.bench.r0 = to_double(k, v);
         require(c.bench.r0 > 0.0, k, "must be positive, got " + v);
       },
       [](const RunConfig& c) { return num(c.bench.r0); }},
      {"base_elements",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.bench.base_elements = to_int(k, v);
         require(c.bench.base_elements >= 1, k, "must be at least 1, got " + v);
       },
       [](const RunConfig& c) { return std::to_string(c.bench.base_elements); }},
      {"grade_elements",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.bench.grade_elements = to_double(k, v);
         require(c.bench.grade_elements >= 0.0 && c.bench.grade_elements < 1.0, k, "must lie in [0, 1), got " + v);
       },
       [](const RunConfig& c) { return num(c.bench.grade_elements); }},
      {"grade_length",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.bench.grade_length = to_double(k, v);
         require(c.bench.grade_length >= 0.0 && c.bench.grade_length < 1.0, k, "must lie in [0, 1), got " + v);
       },
       [](const RunConfig& c) { return num(c.bench.grade_length); }},
      {"reference_offset",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.bench.reference_offset = to_int(k, v);
         require(c.bench.reference_offset >= 0 && c.bench.reference_offset <= 4, k,
                 "must be between 0 and 4, got " + v);
       },
       [](const RunConfig& c) { return std::to_string(c.bench.reference_offset); }},
      {"rtol",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.bench.newton.rtol = to_double(k, v);
         require(c.bench.newton.rtol > 0.0 && c.bench.newton.rtol < 1.0, k, "must lie in (0, 1), got " + v);
       },
       [](const RunConfig& c) { return num(c.bench.newton.rtol); }},
      {"atol",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.bench.newton.atol = to_double(k, v);
         require(c.bench.newton.atol >= 0.0, k, "must be non-negative, got " + v);
       },
       [](const RunConfig& c) { return num(c.bench.newton.atol); }},
      {"max_iter",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.bench.newton.max_iter = to_int(k, v);
         require(c.bench.newton.max_iter >= 1, k, "must be at least 1, got " + v);
       },
       [](const RunConfig& c) { return std::to_string(c.bench.newton.max_iter); }},
      {"load_steps",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.bench.newton.load_steps = to_int(k, v);
         require(c.bench.newton.load_steps >= 1, k, "must be at least 1, got " + v);
       },
       [](const RunConfig& c) { return std::to_string(c.bench.newton.load_steps); }},
      {"max_cuts",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.bench.newton.max_cuts = to_int(k, v);
         require(c.bench.newton.max_cuts >= 0, k, "must be non-negative, got " + v);
       },
       [](const RunConfig& c) { return std::to_string(c.bench.newton.max_cuts); }},
      {"multiplier_rows",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "lumped") {
           c.bench.newton.rows = MultiplierRows::Lumped;
         } else if (v == "consistent") {
           c.bench.newton.rows = MultiplierRows::Consistent;
         } else {
           throw ConfigError(k, k + ": expected lumped or consistent, got '" + v + "'");
         }
       },
       [](const RunConfig& c) {
         return std::string(c.bench.newton.rows == MultiplierRows::Lumped ? "lumped" : "consistent");
       }},
      {"threads",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.bench.threads = to_int(k, v);
         require(c.bench.threads >= 1 && c.bench.threads <= 256, k, "must be between 1 and 256, got " + v);
       },
       [](const RunConfig& c) { return std::to_string(c.bench.threads); }},
      {"out",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         require(!v.empty(), k, "must not be empty");
         c.out = v;
       },
       [](const RunConfig& c) { return c.out.string(); }},
      {"vtk", [](RunConfig& c, const std::string& k, const std::string& v) { c.vtk = to_bool(k, v); },
       [](const RunConfig& c) { return std::string(c.vtk ? "true" : "false"); }},
  };
  return f;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

void apply(RunConfig& c, const std::string& key, const std::string& value) {
  const Field* f = find_field(key);
  if (!f) throw ConfigError(key, "unknown key '" + key + "'");
  f->set(c, key, value);
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
  return os;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  auto os = open_out(p);
  os << text;
  os.flush();
  if (!os) throw std::runtime_error("write failed: " + p.string());
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.emplace_back(f.key);
    return k;
  }();
  return keys;
}

RunConfig parse_config_text(const std::string& text, const Overrides& overrides) {
  RunConfig c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(key, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    apply(c, key, value);
  }
  if (!seen.count("scenario")) throw ConfigError("scenario", "scenario: missing");
  for (const auto& [k, v] : overrides) apply(c, k, trim(v));
  try {
    c.bench = resolved(c.bench);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
  return c;
}

RunConfig parse_config(const std::filesystem::path& file, const Overrides& overrides) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str(), overrides);
  } catch (const ConfigError& e) {
    throw ConfigError(e.field(), file.string() + ": " + e.what());
  }
}

std::string config_text(const RunConfig& cfg) {
  std::string s;
  for (const auto& f : fields()) s += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return s;
}

std::string convergence_csv(const ConvergenceTable& table) {
  std::string s = "level,h,l2_disp,h1_disp,l2_mult_analytical,l2_mult_refined\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    s += std::to_string(i) + "," + csv_num(r.h) + "," + csv_num(r.l2_disp) + "," + csv_num(r.h1_disp) + "," +
         csv_num(r.l2_mult_analytical) + "," + csv_num(r.l2_mult_refined) + "\n";
  }
  if (table.rows.size() >= 2) {
    const auto r = table.rates();
    s += "rate,," + csv_num(r.l2_disp) + "," + csv_num(r.h1_disp) + "," + csv_num(r.l2_mult_analytical) + "," +
         csv_num(r.l2_mult_refined) + "\n";
  }
  return s;
}

std::string pressure_profile_csv(const std::vector<PressurePoint>& profile) {
  std::string s = "r_over_a,p_over_p0_numeric,p_over_p0_analytic\n";
  for (const auto& p : profile) {
    s += csv_num(p.r_over_a) + "," + csv_num(p.p_over_p0_numeric) + "," + csv_num(p.p_over_p0_analytic) + "\n";
  }
  return s;
}

std::string summary_text(const BenchResult& res) {
  std::ostringstream s;
  s << "scenario = " << scenario_name(res.config.scenario) << "\n";
  if (res.hertz) {
    s << "hertz_a = " << num(res.hertz->a) << "\n";
    s << "hertz_p0 = " << num(res.hertz->p0) << "\n";
    if (res.hertz->dim == 3) s << "hertz_a_pressure_formula = " << num(res.hertz->a_pressure_formula) << "\n";
  }
  s << "profile_a = " << num(res.profile_a) << "\n";
  s << "profile_p0 = " << num(res.profile_p0) << "\n";
  s << "complete = " << (res.complete ? "true" : "false") << "\n";
  if (!res.message.empty()) s << "message = " << res.message << "\n";
  s << "\nlevel,h,dofs,multipliers,newton_iterations,active,fixed_point\n";
  for (const auto& l : res.levels) {
    s << l.level << "," << csv_num(l.h) << "," << l.num_dofs << "," << l.num_multipliers << "," << l.newton_iterations
      << "," << l.active_count << "," << (l.active_set_fixed_point ? 1 : 0) << "\n";
  }
  return s.str();
}

void write_vtk(const LevelSolution& sol, const std::filesystem::path& file, int samples) {
  if (samples < 1) throw std::invalid_argument("write_vtk: samples must be >= 1");
  const NurbsPatch& P = *sol.patch;
  const int d = P.dim();
  const int m = samples + 1;
  std::array<const std::vector<double>*, 3> br{};
  std::array<int, 3> ne{1, 1, 1};
  for (int k = 0; k < d; ++k) {
    br[k] = &P.knots(k).breakpoints();
    ne[k] = static_cast<int>(br[k]->size()) - 1;
  }
  const int lattice = d == 2 ? m * m : m * m * m;
  const int cells = d == 2 ? samples * samples : samples * samples * samples;
  const long nel = static_cast<long>(ne[0]) * ne[1] * ne[2];

  // Points of every element lattice, dir 0 fastest. Stress is taken a
  // hair inside the element so degenerate edges of the map do not matter.
  std::vector<std::array<double, 3>> xi, xi_in;
  xi.reserve(nel * lattice);
  xi_in.reserve(nel * lattice);
  for (int e2 = 0; e2 < ne[2]; ++e2) {
    for (int e1 = 0; e1 < ne[1]; ++e1) {
      for (int e0 = 0; e0 < ne[0]; ++e0) {
        const std::array<int, 3> e{e0, e1, e2};
        for (int c = 0; c < lattice; ++c) {
          const std::array<int, 3> l{c % m, (c / m) % m, c / (m * m)};
          std::array<double, 3> p{}, q{};
          for (int k = 0; k < d; ++k) {
            const double a = (*br[k])[e[k]], b = (*br[k])[e[k] + 1];
            const double t = static_cast<double>(l[k]) / samples;
            p[k] = a + t * (b - a);
            const double ti = std::clamp(t, 1e-6, 1.0 - 1e-6);
            q[k] = a + ti * (b - a);
          }
          xi.push_back(p);
          xi_in.push_back(q);
        }
      }
    }
  }
  const auto stress = eval_stress(*sol.space, sol.problem.material, sol.result.state.u, xi_in);

  auto os = open_out(file);
  char buf[96];
  auto put3 = [&](double a, double b, double c) {
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", a, b, c);
    os << buf;
  };
  os << "# vtk DataFile Version 3.0\nigac solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << xi.size() << " double\n";
  ShapeEvaluator ev(P);
  std::vector<Eigen::VectorXd> disp;
  disp.reserve(xi.size());
  for (const auto& p : xi) {
    const auto& s = ev.eval(std::span<const double>(p.data(), d), false);
    put3(s.x(0), s.x(1), d == 3 ? s.x(2) : 0.0);
    disp.push_back(sol.space->evaluate(sol.result.state.u, std::span<const double>(p.data(), d)));
  }
  const long ncell = nel * cells;
  const int nv = d == 2 ? 4 : 8;
  os << "CELLS " << ncell << " " << ncell * (nv + 1) << "\n";
  for (long e = 0; e < nel; ++e) {
    const long base = e * lattice;
    for (int c = 0; c < cells; ++c) {
      const int i = c % samples, j = (c / samples) % samples, k = c / (samples * samples);
      auto id = [&](int a, int b, int g) { return base + a + m * (b + m * g); };
      os << nv;
      for (int g = 0; g < (d == 2 ? 1 : 2); ++g) {
        os << " " << id(i, j, k + g) << " " << id(i + 1, j, k + g) << " " << id(i + 1, j + 1, k + g) << " "
           << id(i, j + 1, k + g);
      }
      os << "\n";
    }
  }
  os << "CELL_TYPES " << ncell << "\n";
  for (long c = 0; c < ncell; ++c) os << (d == 2 ? 9 : 12) << "\n";
  os << "POINT_DATA " << xi.size() << "\nVECTORS displacement double\n";
  for (const auto& u : disp) put3(u(0), u(1), d == 3 ? u(2) : 0.0);
  os << "TENSORS stress double\n";
  for (const auto& s : stress) {
    Eigen::Matrix3d S = Eigen::Matrix3d::Zero();
    S.topLeftCorner(d, d) = s;
    for (int r = 0; r < 3; ++r) put3(S(r, 0), S(r, 1), S(r, 2));
  }
  os.flush();
  if (!os) throw std::runtime_error("write failed: " + file.string());
}

std::vector<std::filesystem::path> emit_outputs(const BenchResult& res, const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + cfg.out.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto put = [&](const char* name, const std::string& text) {
    const auto p = cfg.out / name;
    write_file(p, text);
    written.push_back(p);
  };
  put("config.txt", config_text(cfg));
  put("convergence.csv", convergence_csv(res.table));
  put("pressure_profile.csv", pressure_profile_csv(res.profile));
  put("summary.txt", summary_text(res));
  if (cfg.vtk && res.finest && res.finest->space) {
    const auto p = cfg.out / "solution.vtk";
    write_vtk(*res.finest, p, res.finest->patch->dim() == 2 ? 4 : 2);
    written.push_back(p);
  }
  return written;
}

}  // namespace igac
