#include "kdvlab/lab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <toml.hpp>

#include "kdvlab/error.hpp"

namespace kdvlab::lab {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, res.ptr);
  // Keep floats recognizable as floats in the TOML echo.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

namespace {

class Section {
 public:
  Section(const toml::table* t, std::string path) : t_(t), path_(std::move(path)) {}

  std::string key_path(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

  const toml::node* node(std::string_view key) {
    seen_.insert(std::string(key));
    return t_ ? t_->get(key) : nullptr;
  }

  double real(std::string_view key, double def) {
    const toml::node* n = node(key);
    if (!n) return def;
    if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer())) return *v;
    throw ConfigError(key_path(key), "expected a number");
  }

  int integer(std::string_view key, int def) {
    const toml::node* n = node(key);
    if (!n) return def;
    if (!n->is_integer()) throw ConfigError(key_path(key), "expected an integer");
    const std::int64_t v = *n->value<std::int64_t>();
    if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(key_path(key), "integer out of range");
    return static_cast<int>(v);
  }

  std::uint64_t u64(std::string_view key, std::uint64_t def) {
    const toml::node* n = node(key);
    if (!n) return def;
    if (!n->is_integer() || *n->value<std::int64_t>() < 0) throw ConfigError(key_path(key), "expected a nonnegative integer");
    return static_cast<std::uint64_t>(*n->value<std::int64_t>());
  }

  std::string text(std::string_view key, std::string def) {
    const toml::node* n = node(key);
    if (!n) return def;
    if (!n->is_string()) throw ConfigError(key_path(key), "expected a string");
    return *n->value<std::string>();
  }

  std::vector<double> reals(std::string_view key, std::vector<double> def) {
    const toml::node* n = node(key);
    if (!n) return def;
    const toml::array* a = n->as_array();
    if (!a) throw ConfigError(key_path(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < a->size(); ++i) {
      const toml::node& e = *a->get(i);
      if (!(e.is_floating_point() || e.is_integer())) throw ConfigError(key_path(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(*e.value<double>());
    }
    return out;
  }

  std::vector<int> integers(std::string_view key, std::vector<int> def) {
    const toml::node* n = node(key);
    if (!n) return def;
    const toml::array* a = n->as_array();
    if (!a) throw ConfigError(key_path(key), "expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < a->size(); ++i) {
      const toml::node& e = *a->get(i);
      if (!e.is_integer()) throw ConfigError(key_path(key) + "[" + std::to_string(i) + "]", "expected an integer");
      out.push_back(static_cast<int>(*e.value<std::int64_t>()));
    }
    return out;
  }

  ModeList modes(std::string_view key, ModeList def) {
    const toml::node* n = node(key);
    if (!n) return def;
    const toml::array* a = n->as_array();
    if (!a) throw ConfigError(key_path(key), "expected an array of [s, coefficient] pairs");
    ModeList out;
    for (std::size_t i = 0; i < a->size(); ++i) {
      const std::string at = key_path(key) + "[" + std::to_string(i) + "]";
      const toml::array* pair = a->get(i)->as_array();
      if (!pair || pair->size() != 2 || !pair->get(0)->is_integer() ||
          !(pair->get(1)->is_floating_point() || pair->get(1)->is_integer())) {
        throw ConfigError(at, "expected [s, coefficient]");
      }
      out.emplace_back(static_cast<int>(*pair->get(0)->value<std::int64_t>()), *pair->get(1)->value<double>());
    }
    return out;
  }

  void reject_unknown() const {
    if (!t_) return;
    for (const auto& [k, v] : *t_) {
      if (!seen_.count(std::string(k.str()))) throw ConfigError(key_path(k.str()), "unknown key");
    }
  }

 private:
  const toml::table* t_;
  std::string path_;
  std::set<std::string> seen_;
};

const toml::table* subtable(const toml::table& root, std::string_view key) {
  const toml::node* n = root.get(key);
  if (!n) return nullptr;
  if (!n->is_table()) throw ConfigError(std::string(key), "expected a table");
  return n->as_table();
}

std::string modes_str(const ModeList& m) {
  std::string s = "[";
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i) s += ", ";
    s += "[" + std::to_string(m[i].first) + ", " + format_double(m[i].second) + "]";
  }
  return s + "]";
}

template <class T, class F>
std::string list_str(const std::vector<T>& v, F fmt) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v[i]);
  }
  return s + "]";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

SpectralField field_from(const ModeList& m, int n_modes, int grid, const std::string& path) {
  SpectralField u(n_modes, grid);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto [s, c] = m[i];
    if (s == 0 || std::abs(s) > n_modes) {
      throw ConfigError(path + "[" + std::to_string(i) + "]", "mode index must satisfy 1 <= |s| <= grid.n_modes");
    }
    u.set_coeff(s, u.coeff(s) + c);
  }
  return u;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    const auto& b = e.source().begin;
    throw ConfigError(source + ":" + std::to_string(b.line) + ":" + std::to_string(b.column), std::string(e.description()));
  }
  ExperimentConfig c;
  Section top(&root, "");
  c.scenario = top.text("scenario", c.scenario);
  for (const char* t : {"grid", "perturbation", "measure", "sweep", "averaging", "equidist", "qi", "simulate", "seeds", "output"}) {
    top.node(t);
  }
  top.reject_unknown();

  Section g(subtable(root, "grid"), "grid");
  c.grid.n_modes = g.integer("n_modes", c.grid.n_modes);
  c.grid.grid_size = g.integer("grid_size", c.grid.grid_size);
  c.grid.dt_fast = g.real("dt_fast", c.grid.dt_fast);
  g.reject_unknown();

  Section p(subtable(root, "perturbation"), "perturbation");
  c.perturbation.map = p.text("map", c.perturbation.map);
  c.perturbation.profile = p.modes("profile", c.perturbation.profile);
  c.perturbation.zeta0 = p.real("zeta0", c.perturbation.zeta0);
  c.perturbation.gain = p.real("gain", c.perturbation.gain);
  c.perturbation.order = p.real("order", c.perturbation.order);
  p.reject_unknown();

  Section m(subtable(root, "measure"), "measure");
  c.measure.p = m.real("p", c.measure.p);
  c.measure.zeta0 = m.real("zeta0", c.measure.zeta0);
  c.measure.sigma_exponent = m.real("sigma_exponent", c.measure.sigma_exponent);
  c.measure.target_l2 = m.real("target_l2", c.measure.target_l2);
  c.measure.sigma_scale = m.real("sigma_scale", c.measure.sigma_scale);
  c.measure.max_admissibility_ratio = m.real("max_admissibility_ratio", c.measure.max_admissibility_ratio);
  m.reject_unknown();

  Section s(subtable(root, "sweep"), "sweep");
  c.sweep.eps = s.reals("eps", c.sweep.eps);
  c.sweep.horizon_slow = s.real("horizon_slow", c.sweep.horizon_slow);
  c.sweep.ensemble = s.integer("ensemble", c.sweep.ensemble);
  c.sweep.record_every = s.integer("record_every", c.sweep.record_every);
  c.sweep.report_p = s.real("report_p", c.sweep.report_p);
  c.sweep.rho = s.real("rho", c.sweep.rho);
  c.sweep.norm_ceiling_factor = s.real("norm_ceiling_factor", c.sweep.norm_ceiling_factor);
  s.reject_unknown();

  Section a(subtable(root, "averaging"), "averaging");
  c.averaging.N_angles = a.integer("N_angles", c.averaging.N_angles);
  c.averaging.M_samples = a.integer("M_samples", c.averaging.M_samples);
  c.averaging.scheme = a.text("scheme", c.averaging.scheme);
  c.averaging.fd_step = a.real("fd_step", c.averaging.fd_step);
  c.averaging.backend = a.text("backend", c.averaging.backend);
  c.averaging.lattice_shifts = a.integer("lattice_shifts", c.averaging.lattice_shifts);
  c.averaging.korobov_a = a.integer("korobov_a", c.averaging.korobov_a);
  a.reject_unknown();

  Section e(subtable(root, "equidist"), "equidist");
  c.equidist.m_angles = e.integer("m_angles", c.equidist.m_angles);
  c.equidist.order = e.integer("order", c.equidist.order);
  c.equidist.window_lo_slow = e.real("window_lo_slow", c.equidist.window_lo_slow);
  c.equidist.window_hi_slow = e.real("window_hi_slow", c.equidist.window_hi_slow);
  e.reject_unknown();

  Section q(subtable(root, "qi"), "qi");
  c.qi.n_list = q.integers("n_list", c.qi.n_list);
  c.qi.eps = q.real("eps", c.qi.eps);
  c.qi.horizon_slow = q.real("horizon_slow", c.qi.horizon_slow);
  c.qi.ensemble = q.integer("ensemble", c.qi.ensemble);
  c.qi.ball_samples = q.integer("ball_samples", c.qi.ball_samples);
  c.qi.record_points = q.integer("record_points", c.qi.record_points);
  q.reject_unknown();

  Section sim(subtable(root, "simulate"), "simulate");
  c.simulate.eps = sim.real("eps", c.simulate.eps);
  c.simulate.t_end_fast = sim.real("t_end_fast", c.simulate.t_end_fast);
  c.simulate.initial = sim.modes("initial", c.simulate.initial);
  c.simulate.record_every = sim.integer("record_every", c.simulate.record_every);
  c.simulate.backend = sim.text("backend", c.simulate.backend);
  c.simulate.n_actions = sim.integer("n_actions", c.simulate.n_actions);
  c.simulate.norm_p = sim.real("norm_p", c.simulate.norm_p);
  sim.reject_unknown();

  Section sd(subtable(root, "seeds"), "seeds");
  c.seed = sd.u64("base", c.seed);
  sd.reject_unknown();

  Section o(subtable(root, "output"), "output");
  c.output_dir = o.text("dir", c.output_dir);
  o.reject_unknown();

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const char* path, const std::string& what) {
    if (!ok) throw ConfigError(path, what);
  };
  require(grid.n_modes >= 1, "grid.n_modes", "must be >= 1");
  require(grid.grid_size >= 4 && (grid.grid_size & (grid.grid_size - 1)) == 0, "grid.grid_size", "must be a power of two");
  require(grid.grid_size > 3 * grid.n_modes, "grid.grid_size", "must exceed 3 * grid.n_modes (alias-free products)");
  require(grid.dt_fast > 0.0, "grid.dt_fast", "must be positive");

  try {
    (void)parse_smoothing_map(perturbation.map);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("perturbation.map", e.what());
  }
  require(perturbation.zeta0 > 1.0, "perturbation.zeta0", "must exceed 1");
  (void)field_from(perturbation.profile, grid.n_modes, grid.grid_size, "perturbation.profile");

  require(measure.p >= 0.0, "measure.p", "must be >= 0");
  require(measure.zeta0 > 1.0, "measure.zeta0", "must exceed 1");
  require(measure.sigma_exponent > 1.0, "measure.sigma_exponent", "must exceed 1 (summable sigma)");
  require(measure.target_l2 > 0.0 || measure.sigma_scale > 0.0, "measure.sigma_scale", "must be positive");

  require(!sweep.eps.empty(), "sweep.eps", "must be nonempty");
  for (std::size_t i = 0; i < sweep.eps.size(); ++i) {
    require(sweep.eps[i] > 0.0, "sweep.eps", "entries must be positive");
    require(i == 0 || sweep.eps[i] < sweep.eps[i - 1], "sweep.eps", "must be strictly decreasing");
  }
  require(sweep.horizon_slow > 0.0 && sweep.horizon_slow <= 1.0, "sweep.horizon_slow", "must lie in (0, 1]");
  require(sweep.ensemble >= 1, "sweep.ensemble", "must be >= 1");
  require(sweep.record_every >= 1, "sweep.record_every", "must be >= 1");
  require(sweep.report_p >= 0.0, "sweep.report_p", "must be >= 0");
  require(sweep.rho > 0.0, "sweep.rho", "must be positive");
  require(sweep.norm_ceiling_factor > 1.0, "sweep.norm_ceiling_factor", "must exceed 1");

  try {
    make_averaging().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("averaging", e.what());
  }

  require(equidist.m_angles >= 1 && equidist.m_angles <= grid.n_modes, "equidist.m_angles", "must lie in [1, grid.n_modes]");
  require(equidist.order >= 1, "equidist.order", "must be >= 1");
  require(equidist.window_lo_slow >= 0.0 && equidist.window_hi_slow > equidist.window_lo_slow &&
              equidist.window_hi_slow <= sweep.horizon_slow,
          "equidist.window_hi_slow", "window must satisfy 0 <= lo < hi <= sweep.horizon_slow");

  require(!qi.n_list.empty(), "qi.n_list", "must be nonempty");
  for (std::size_t i = 0; i < qi.n_list.size(); ++i) {
    require(qi.n_list[i] >= 1 && qi.n_list[i] <= 8, "qi.n_list", "entries must lie in [1, 8]");
    require(i == 0 || qi.n_list[i] > qi.n_list[i - 1], "qi.n_list", "must be increasing");
    require(qi.n_list[i] <= grid.n_modes, "qi.n_list", "entries must not exceed grid.n_modes");
  }
  require(qi.eps > 0.0, "qi.eps", "must be positive");
  require(qi.horizon_slow > 0.0, "qi.horizon_slow", "must be positive");
  require(qi.ensemble >= 1, "qi.ensemble", "must be >= 1");
  require(qi.ball_samples >= 0, "qi.ball_samples", "must be >= 0");
  require(qi.record_points >= 1, "qi.record_points", "must be >= 1");

  require(simulate.eps >= 0.0, "simulate.eps", "must be >= 0");
  require(simulate.t_end_fast > 0.0, "simulate.t_end_fast", "must be positive");
  require(simulate.record_every >= 1, "simulate.record_every", "must be >= 1");
  require(simulate.n_actions >= 1 && simulate.n_actions <= grid.n_modes, "simulate.n_actions", "must lie in [1, grid.n_modes]");
  require(simulate.norm_p >= 0.0, "simulate.norm_p", "must be >= 0");
  try {
    (void)parse_backend(simulate.backend);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("simulate.backend", e.what());
  }
  (void)field_from(simulate.initial, grid.n_modes, grid.grid_size, "simulate.initial");

  try {
    make_measure().validate(measure.max_admissibility_ratio);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("measure", e.what());
  }
  try {
    (void)make_perturbation();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("perturbation", e.what());
  }
}

PerturbationSpec ExperimentConfig::make_perturbation() const {
  SpectralField prof = field_from(perturbation.profile, grid.n_modes, grid.grid_size, "perturbation.profile");
  const SmoothingMap map = parse_smoothing_map(perturbation.map);
  if (map == SmoothingMap::none) return PerturbationSpec::fixed(std::move(prof), perturbation.zeta0);
  return PerturbationSpec::smoothing(map, perturbation.gain, perturbation.zeta0, std::move(prof), perturbation.order);
}

MeasureSpec ExperimentConfig::make_measure() const {
  const SobolevIndex p(measure.p);
  if (measure.target_l2 > 0.0) {
    return MeasureSpec::power_law_with_l2(grid.n_modes, p, measure.zeta0, measure.sigma_exponent, measure.target_l2);
  }
  return MeasureSpec::power_law(grid.n_modes, p, measure.zeta0, measure.sigma_exponent, measure.sigma_scale);
}

AveragingConfig ExperimentConfig::make_averaging() const {
  AveragingConfig a;
  a.N_angles = averaging.N_angles;
  a.M_samples = averaging.M_samples;
  a.scheme = parse_quad_scheme(averaging.scheme);
  a.fd_step = averaging.fd_step;
  a.backend = parse_backend(averaging.backend);
  a.lattice_shifts = averaging.lattice_shifts;
  a.korobov_a = averaging.korobov_a;
  return a;
}

SpectralField ExperimentConfig::make_initial() const {
  return field_from(simulate.initial, grid.n_modes, grid.grid_size, "simulate.initial");
}

namespace {

std::string body(const ExperimentConfig& c) {
  const auto d = [](double x) { return format_double(x); };
  const auto i = [](int x) { return std::to_string(x); };
  std::string s;
  s += "scenario = " + quoted(c.scenario) + "\n\n";
  s += "[grid]\n";
  s += "n_modes = " + i(c.grid.n_modes) + "\n";
  s += "grid_size = " + i(c.grid.grid_size) + "\n";
  s += "dt_fast = " + d(c.grid.dt_fast) + "\n\n";
  s += "[perturbation]\n";
  s += "map = " + quoted(c.perturbation.map) + "\n";
  s += "profile = " + modes_str(c.perturbation.profile) + "\n";
  s += "zeta0 = " + d(c.perturbation.zeta0) + "\n";
  s += "gain = " + d(c.perturbation.gain) + "\n";
  s += "order = " + d(c.perturbation.order) + "\n\n";
  s += "[measure]\n";
  s += "p = " + d(c.measure.p) + "\n";
  s += "zeta0 = " + d(c.measure.zeta0) + "\n";
  s += "sigma_exponent = " + d(c.measure.sigma_exponent) + "\n";
  s += "target_l2 = " + d(c.measure.target_l2) + "\n";
  s += "sigma_scale = " + d(c.measure.sigma_scale) + "\n";
  s += "max_admissibility_ratio = " + d(c.measure.max_admissibility_ratio) + "\n\n";
  s += "[sweep]\n";
  s += "eps = " + list_str(c.sweep.eps, d) + "\n";
  s += "horizon_slow = " + d(c.sweep.horizon_slow) + "\n";
  s += "ensemble = " + i(c.sweep.ensemble) + "\n";
  s += "record_every = " + i(c.sweep.record_every) + "\n";
  s += "report_p = " + d(c.sweep.report_p) + "\n";
  s += "rho = " + d(c.sweep.rho) + "\n";
  s += "norm_ceiling_factor = " + d(c.sweep.norm_ceiling_factor) + "\n\n";
  s += "[averaging]\n";
  s += "N_angles = " + i(c.averaging.N_angles) + "\n";
  s += "M_samples = " + i(c.averaging.M_samples) + "\n";
  s += "scheme = " + quoted(c.averaging.scheme) + "\n";
  s += "fd_step = " + d(c.averaging.fd_step) + "\n";
  s += "backend = " + quoted(c.averaging.backend) + "\n";
  s += "lattice_shifts = " + i(c.averaging.lattice_shifts) + "\n";
  s += "korobov_a = " + i(c.averaging.korobov_a) + "\n\n";
  s += "[equidist]\n";
  s += "m_angles = " + i(c.equidist.m_angles) + "\n";
  s += "order = " + i(c.equidist.order) + "\n";
  s += "window_lo_slow = " + d(c.equidist.window_lo_slow) + "\n";
  s += "window_hi_slow = " + d(c.equidist.window_hi_slow) + "\n\n";
  s += "[qi]\n";
  s += "n_list = " + list_str(c.qi.n_list, i) + "\n";
  s += "eps = " + d(c.qi.eps) + "\n";
  s += "horizon_slow = " + d(c.qi.horizon_slow) + "\n";
  s += "ensemble = " + i(c.qi.ensemble) + "\n";
  s += "ball_samples = " + i(c.qi.ball_samples) + "\n";
  s += "record_points = " + i(c.qi.record_points) + "\n\n";
  s += "[simulate]\n";
  s += "eps = " + d(c.simulate.eps) + "\n";
  s += "t_end_fast = " + d(c.simulate.t_end_fast) + "\n";
  s += "initial = " + modes_str(c.simulate.initial) + "\n";
  s += "record_every = " + i(c.simulate.record_every) + "\n";
  s += "backend = " + quoted(c.simulate.backend) + "\n";
  s += "n_actions = " + i(c.simulate.n_actions) + "\n";
  s += "norm_p = " + d(c.simulate.norm_p) + "\n\n";
  s += "[seeds]\n";
  s += "base = " + std::to_string(c.seed) + "\n";
  return s;
}

}  // namespace

std::string ExperimentConfig::canonical() const {
  return body(*this) + "\n[output]\ndir = " + quoted(output_dir) + "\n";
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : body(*this)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string ExperimentConfig::hash_hex() const { return fmt::format("{:016x}", hash()); }

}  // namespace kdvlab::lab
