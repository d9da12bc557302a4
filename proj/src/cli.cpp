#include "kdvcrit/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "kdvcrit/acceptance.hpp"
#include "kdvcrit/io.hpp"
#include "kdvcrit/kernel.hpp"
#include "kdvcrit/number_theory.hpp"
#include "kdvcrit/pde.hpp"
#include "kdvcrit/spectral.hpp"
#include "kdvcrit/synthesis.hpp"
#include "kdvcrit/unreachable.hpp"

namespace kdv::cli {

using io::json;

namespace {

// Thrown by a subcommand whose checks ran but did not all pass.
struct CheckFailed : Error {
  using Error::Error;
};

json cj(cplx c) { return json::array({c.real(), c.imag()}); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

double to_double(const std::string& s) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw UsageError("not a number: '" + s + "'");
  return v;
}

std::vector<double> number_list(const std::string& s) {
  std::vector<double> v;
  for (const auto& tok : split(s, ',')) v.push_back(to_double(tok));
  if (v.empty()) throw UsageError("empty list");
  return v;
}

// Writes to the named file, or to out when the path is empty or "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& out) : os_(&out) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw UsageError("cannot open output file " + path);
    os_ = file_.get();
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

// Config file values become flag tokens placed ahead of the command line
// tokens, so explicit flags win under the take-last policy.
void append_config_tokens(const json& j, const std::string& prefix, std::vector<std::string>& tok) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::string name = prefix.empty() ? it.key() : prefix + "-" + it.key();
    std::replace(name.begin(), name.end(), '_', '-');
    const json& v = it.value();
    if (v.is_object()) {
      append_config_tokens(v, name, tok);
    } else if (v.is_boolean()) {
      if (v.get<bool>()) tok.push_back("--" + name);
    } else if (v.is_array()) {
      std::string s;
      for (const auto& e : v) {
        if (!s.empty()) s += ",";
        s += e.is_string() ? e.get<std::string>() : (e.is_number_float() ? io::fmt(e.get<double>()) : e.dump());
      }
      tok.push_back("--" + name);
      tok.push_back(s);
    } else if (v.is_string()) {
      tok.push_back("--" + name);
      tok.push_back(v.get<std::string>());
    } else if (v.is_number_float()) {
      tok.push_back("--" + name);
      tok.push_back(io::fmt(v.get<double>()));
    } else if (v.is_number()) {
      tok.push_back("--" + name);
      tok.push_back(v.dump());
    } else {
      throw UsageError("config key '" + name + "' has an unsupported value");
    }
  }
}

json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const std::exception& ex) {
    throw UsageError("config file " + path + ": " + ex.what());
  }
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  return j;
}

// Pulls --config out of the argument list and splices its tokens in after the subcommand.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  std::vector<std::string> rest;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!path) return rest;
  auto sub = std::find_if(rest.begin(), rest.end(), [](const std::string& a) { return a.empty() || a[0] != '-'; });
  if (sub == rest.end()) throw UsageError("--config needs a subcommand");
  std::vector<std::string> tok;
  append_config_tokens(load_config(*path), "", tok);
  rest.insert(sub + 1, tok.begin(), tok.end());
  return rest;
}

CLI::App* add_sub(CLI::App& app, const std::string& name, const std::string& desc) {
  CLI::App* s = app.add_subcommand(name, desc);
  s->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  s->fallthrough(false);
  // Handled before parsing; declared so it shows in the help text.
  s->add_option("--config", "JSON file with default values for the flags below");
  return s;
}

// ---------------------------------------------------------------- lengths

struct LengthsArgs {
  int nmax = 10;
  bool json_out = false, csv_out = false;
  std::string out;
};

double t_star_or_nan(const LengthClass& c) { return c.nLpos ? t_star(c) : std::nan(""); }

int run_lengths(const LengthsArgs& a, std::ostream& out) {
  if (a.nmax < 1) throw UsageError("--nmax must be at least 1");
  if (a.json_out && a.csv_out) throw UsageError("--json and --csv are exclusive");
  const auto classes = length_classes(a.nmax);
  Sink sink(a.out, out);
  if (a.csv_out) {
    io::Table t;
    t.header = {"N", "L", "k", "l", "p", "n_L", "n_L_pos", "dim_MN", "T_star"};
    for (const auto& c : classes) {
      const double ts = t_star_or_nan(c);
      for (const auto& pr : c.pairs)
        t.rows.push_back({double(c.N), c.L, double(pr.k), double(pr.l), pr.p, double(c.nL), double(c.nLpos),
                          double(c.dimMN), ts});
    }
    io::write_csv(*sink, t);
    return 0;
  }
  json arr = json::array();
  for (const auto& c : classes) {
    json pairs = json::array();
    for (const auto& pr : c.pairs) pairs.push_back({{"k", pr.k}, {"l", pr.l}, {"p", pr.p}, {"caseE0", pr.caseE0}});
    const double ts = t_star_or_nan(c);
    json row = {{"N", c.N}, {"L", c.L}, {"pairs", pairs}, {"n_L", c.nL}, {"n_L_pos", c.nLpos}, {"dim_MN", c.dimMN}};
    row["T_star"] = std::isfinite(ts) ? json(ts) : json(nullptr);
    arr.push_back(row);
  }
  *sink << io::dump(arr) << "\n";
  return 0;
}

// ---------------------------------------------------------------- constants

struct PairArgs {
  int k = 0, l = 0;
};

int run_constants(const PairArgs& a, bool json_out, std::ostream& out) {
  const CriticalPair pr = make_pair(a.k, a.l);
  const UnreachableData u = constants(pr);
  const int caseN = pr.caseE0 ? 2 : 1;
  std::optional<cplx> ratio;
  if (!pr.caseE0 && pr.k != pr.l) ratio = e1_over_e(pr);
  if (json_out) {
    json j = {{"k", pr.k},
              {"l", pr.l},
              {"N", pr.N},
              {"L", pr.L},
              {"p", pr.p},
              {"eta", json::array({cj(u.eta.eta[0]), cj(u.eta.eta[1]), cj(u.eta.eta[2])})},
              {"Gamma", cj(u.Gamma)},
              {"Lambda", cj(u.Lambda)},
              {"E", cj(u.E)},
              {"E1", cj(u.E1)},
              {"F", cj(u.F)},
              {"F1", cj(u.F1)},
              {"F1_published", cj(u.F1_published)},
              {"exp_eta1L", cj(u.exp_eta1L)},
              {"caseE0", pr.caseE0},
              {"case", caseN}};
    j["E1_over_E"] = ratio ? cj(*ratio) : json(nullptr);
    out << io::dump(j) << "\n";
    return 0;
  }
  auto c = [](cplx v) { return io::fmt(v.real()) + " " + io::fmt(v.imag()) + "i"; };
  out << "k = " << pr.k << "\nl = " << pr.l << "\nN = " << pr.N << "\nL = " << io::fmt(pr.L)
      << "\np = " << io::fmt(pr.p) << "\n";
  for (int j = 0; j < 3; ++j) out << "eta" << j + 1 << " = " << c(u.eta.eta[j]) << "\n";
  out << "Gamma = " << c(u.Gamma) << "\nLambda = " << c(u.Lambda) << "\nE = " << c(u.E) << "\nE1 = " << c(u.E1)
      << "\nF = " << c(u.F) << "\nF1 = " << c(u.F1) << "\n";
  if (ratio) out << "E1/E = " << c(*ratio) << "\n";
  out << "caseE0 = " << (pr.caseE0 ? "true" : "false") << "\ncase = " << caseN << "\n";
  return 0;
}

// ---------------------------------------------------------------- spectral

int run_spectral(double L, const std::string& range, const std::string& path, std::ostream& out) {
  if (!(L > 0)) throw UsageError("--L must be positive");
  const auto zs = parse_range(range);
  io::Table t;
  t.header = {"z"};
  for (int j = 1; j <= 3; ++j) {
    t.header.push_back("lambda" + std::to_string(j) + "_re");
    t.header.push_back("lambda" + std::to_string(j) + "_im");
  }
  // Scaled quantities are written as mantissa plus log scale.
  for (const char* n : {"detQ", "P", "G", "H"}) {
    t.header.push_back(std::string(n) + "_re");
    t.header.push_back(std::string(n) + "_im");
    t.header.push_back(std::string(n) + "_logscale");
  }
  t.header.insert(t.header.end(), {"Xi_re", "Xi_im", "detQ_rel"});
  for (double z : zs) {
    const SpectralFrame f = frame(z, L);
    std::vector<double> row = {z};
    for (const auto& l : f.lambda) row.insert(row.end(), {l.real(), l.imag()});
    for (const Scaled* s : {&f.detQ, &f.P, &f.G, &f.H}) row.insert(row.end(), {s->m.real(), s->m.imag(), s->s});
    row.insert(row.end(), {f.Xi.real(), f.Xi.imag(), f.detQ_rel});
    t.rows.push_back(std::move(row));
  }
  Sink sink(path, out);
  io::write_csv(*sink, t);
  return 0;
}

// ---------------------------------------------------------------- kernel

struct KernelArgs {
  PairArgs pair;
  double zmin = 1.0, zmax = 1000.0;
  int points = 101;
  std::string out;
};

int run_kernel(const KernelArgs& a, std::ostream& out) {
  const CriticalPair pr = make_pair(a.pair.k, a.pair.l);
  if (a.points < 1) throw UsageError("--points must be positive");
  if (!(a.zmax >= a.zmin)) throw UsageError("--zmax must not be below --zmin");
  const bool logg = a.zmin > 0;
  io::Table t;
  t.header = {"z", "intB_re", "intB_im", "pole"};
  for (int i = 0; i < a.points; ++i) {
    const double f = a.points == 1 ? 0.0 : double(i) / (a.points - 1);
    const double z = logg ? a.zmin * std::pow(a.zmax / a.zmin, f) : a.zmin + f * (a.zmax - a.zmin);
    try {
      const cplx v = intB_closed(pr, z);
      t.rows.push_back({z, v.real(), v.imag(), 0.0});
    } catch (const NearPole&) {
      t.rows.push_back({z, std::nan(""), std::nan(""), 1.0});
    }
  }
  Sink sink(a.out, out);
  io::write_csv(*sink, t);
  return 0;
}

json fit_json(const LevelFit& f) {
  return {{"slope", f.slope}, {"zmin", f.zmin}, {"zmax", f.zmax}, {"points", f.points}};
}

int run_kernel_asym(const PairArgs& a, std::ostream& out) {
  const CriticalPair pr = make_pair(a.k, a.l);
  const AsymptoticReport r = verify_expansion(pr);
  json levels = json::array();
  for (int i = 0; i < 3; ++i) {
    json f = fit_json(r.levels[i]);
    f["expected"] = r.expected[i];
    levels.push_back(f);
  }
  json j = {{"k", pr.k},           {"l", pr.l},          {"caseE0", r.caseE0},
            {"c1", cj(r.c1)},      {"c2", cj(r.c2)},     {"levels", levels},
            {"grid_points", r.z_grid.size()}, {"excluded", r.excluded}};
  out << io::dump(j) << "\n";
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimArgs {
  std::string system = "linear";
  int k = 0, l = 0;
  double L = 0.0;
  int nx = 128, nt = 1024;
  double T = 1.0;
  std::string closure = "high-order";
  std::string control_type = "zero";
  double control_amplitude = 1.0, control_nu = 1.0, control_omega = 0.0;
  std::string control_file;
  std::string initial_type = "zero";
  double initial_amplitude = 1.0;
  int initial_mode = 1;
  std::string initial_component = "re";
  int store_stride = 1;
  std::string out, out_first;
};

Closure closure_from(const std::string& s) {
  if (s == "high-order") return Closure::HighOrder;
  if (s == "reflective") return Closure::Reflective;
  throw UsageError("--closure must be high-order or reflective");
}

std::optional<CriticalPair> sim_pair(const SimArgs& a) {
  if (a.k || a.l) return make_pair(a.k, a.l);
  return std::nullopt;
}

double interpolate(const std::vector<double>& ts, const std::vector<double>& us, double t) {
  if (t <= ts.front()) return us.front();
  if (t >= ts.back()) return us.back();
  const size_t j = std::upper_bound(ts.begin(), ts.end(), t) - ts.begin();
  const double f = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
  return us[j - 1] + f * (us[j] - us[j - 1]);
}

std::vector<double> sim_control(const SimArgs& a, const Grid& g, const std::optional<CriticalPair>& pr) {
  std::vector<double> u(g.nt + 1, 0.0);
  const double A = a.control_amplitude;
  auto bump = [&](double t) {
    const double s = 2.0 * t / g.T - 1.0;
    return std::abs(s) < 1.0 ? std::exp(-a.control_nu / (1.0 - s * s)) : 0.0;
  };
  if (a.control_type == "zero") return u;
  if (a.control_type == "bump" || a.control_type == "sine-bump") {
    for (int i = 0; i <= g.nt; ++i) {
      const double t = i * g.dt();
      u[i] = A * bump(t) * (a.control_type == "bump" ? 1.0 : std::sin(a.control_omega * t));
    }
    return u;
  }
  if (a.control_type == "synthesized") {
    if (!pr) throw UsageError("synthesized control needs --k and --l");
    SpectrumOptions so;
    so.min_time_steps = g.nt;
    const SpectrumTriple sp = steering_spectrum(make_spec(*pr, g.T), so);
    u = control_on_nodes(sp, g.T, g.nt);
    double m = 0.0;
    for (double v : u) m = std::max(m, std::abs(v));
    // Rescaled so that max |u| equals the amplitude.
    if (m > 0)
      for (double& v : u) v *= A / m;
    return u;
  }
  if (a.control_type == "file") {
    if (a.control_file.empty()) throw UsageError("file control needs --control-file");
    std::ifstream f(a.control_file);
    if (!f) throw UsageError("cannot open control file " + a.control_file);
    const io::Table t = io::read_csv(f);
    auto col = [&](const std::string& name) {
      auto it = std::find(t.header.begin(), t.header.end(), name);
      if (it == t.header.end()) throw UsageError("control file lacks column " + name);
      return size_t(it - t.header.begin());
    };
    const size_t ct = col("t"), cu = col("u");
    std::vector<double> ts, us;
    for (const auto& r : t.rows) {
      ts.push_back(r[ct]);
      us.push_back(r[cu]);
    }
    if (ts.size() < 2 || !std::is_sorted(ts.begin(), ts.end())) throw UsageError("control file needs increasing t");
    for (int i = 0; i <= g.nt; ++i) u[i] = A * interpolate(ts, us, i * g.dt());
    return u;
  }
  throw UsageError("--control-type must be zero, bump, sine-bump, synthesized or file");
}

std::vector<double> sim_initial(const SimArgs& a, const Grid& g, const std::optional<CriticalPair>& pr) {
  const auto x = g.x();
  std::vector<double> y(g.nx, 0.0);
  if (a.initial_type == "zero") return y;
  if (a.initial_type == "sine") {
    for (int i = 0; i < g.nx; ++i) y[i] = a.initial_amplitude * std::sin(pi * a.initial_mode * x[i] / g.L);
    return y;
  }
  if (a.initial_type == "psi") {
    if (!pr) throw UsageError("psi initial data needs --k and --l");
    if (a.initial_component != "re" && a.initial_component != "im")
      throw UsageError("--initial-component must be re or im");
    const EtaTriple e = eta_triple(*pr);
    for (int i = 0; i < g.nx; ++i) {
      const cplx v = phi(e, x[i]);
      y[i] = a.initial_amplitude * (a.initial_component == "re" ? v.real() : v.imag());
    }
    return y;
  }
  throw UsageError("--initial-type must be zero, sine or psi");
}

void write_trajectory(const Trajectory& tr, const std::string& path, std::ostream& out) {
  io::Table t;
  t.header = {"t"};
  for (double x : tr.grid.x()) t.header.push_back(io::fmt(x));
  for (size_t i = 0; i < tr.t.size(); ++i) {
    std::vector<double> row = {tr.t[i]};
    row.insert(row.end(), tr.states[i].begin(), tr.states[i].end());
    t.rows.push_back(std::move(row));
  }
  Sink sink(path, out);
  io::write_csv(*sink, t);
}

json traj_summary(const Trajectory& tr) {
  return {{"final_l2", l2_norm(tr.final_state, tr.grid.dx())},
          {"max_l2", tr.max_l2},
          {"l2_h1", tr.l2_h1},
          {"energy_residual", tr.energy_residual},
          {"picard_max", tr.picard_max},
          {"stored_rows", tr.t.size()}};
}

int run_simulate(const SimArgs& a, std::ostream& out, std::ostream& err) {
  const auto pr = sim_pair(a);
  if (pr && a.L > 0) throw UsageError("give either --L or --k/--l, not both");
  if (!pr && !(a.L > 0)) throw UsageError("simulate needs --L or --k/--l");
  if (a.store_stride < 1) throw UsageError("--store-stride must be at least 1");
  const Grid g{pr ? pr->L : a.L, a.nx, a.T, a.nt};
  g.validate();
  SolveOptions opt;
  opt.closure = closure_from(a.closure);
  opt.store_stride = a.store_stride;
  const auto u = sim_control(a, g, pr);
  const auto y0 = sim_initial(a, g, pr);
  json summary = {{"system", a.system}, {"L", g.L}, {"nx", g.nx}, {"T", g.T}, {"nt", g.nt}};
  // Trajectory CSV goes to --out or stdout; the summary then moves to stderr.
  std::ostream& meta = a.out.empty() || a.out == "-" ? err : out;
  if (a.system == "linear") {
    const Trajectory tr = solve_linear(g, y0, u, nullptr, opt);
    write_trajectory(tr, a.out, out);
    summary["y"] = traj_summary(tr);
  } else if (a.system == "second-order") {
    if (a.initial_type != "zero") throw UsageError("second-order system starts from zero data");
    const SecondOrder so = solve_second_order(g, u, opt);
    write_trajectory(so.y2, a.out, out);
    if (!a.out_first.empty()) write_trajectory(so.y1, a.out_first, out);
    summary["y1"] = traj_summary(so.y1);
    summary["y2"] = traj_summary(so.y2);
  } else if (a.system == "nonlinear") {
    const Trajectory tr = solve_nonlinear(g, y0, u, opt);
    write_trajectory(tr, a.out, out);
    summary["y"] = traj_summary(tr);
  } else {
    throw UsageError("--system must be linear, second-order or nonlinear");
  }
  meta << io::dump(summary) << "\n";
  return 0;
}

// ---------------------------------------------------------------- gramian

struct GramArgs {
  int k = 0, l = 0;
  double L = 0.0;
  double T = 2.0;
  int nx = 128, nt = 400;
  std::string closure = "high-order";
};

int run_gramian(const GramArgs& a, std::ostream& out) {
  const bool by_pair = a.k || a.l;
  if (by_pair && a.L > 0) throw UsageError("give either --L or --k/--l, not both");
  if (!by_pair && !(a.L > 0)) throw UsageError("gramian needs --L or --k/--l");
  const double L = by_pair ? make_pair(a.k, a.l).L : a.L;
  const Grid g{L, a.nx, a.T, a.nt};
  g.validate();
  const auto x = g.x();
  std::vector<std::vector<double>> dirs;
  json used = json::array();
  if (by_pair) {
    // Real and imaginary parts of phi for every pair sharing this length.
    const CriticalPair pr = make_pair(a.k, a.l);
    const LengthClass c = representations(pr.N);
    std::vector<std::vector<double>> cand;
    for (const auto& q : c.pairs) {
      const EtaTriple e = eta_triple(q);
      std::vector<double> re(g.nx), im(g.nx);
      for (int i = 0; i < g.nx; ++i) {
        const cplx v = phi(e, x[i]);
        re[i] = v.real();
        im[i] = v.imag();
      }
      for (int part = 0; part < 2; ++part) {
        const auto& v = part == 0 ? re : im;
        used.push_back({{"k", q.k}, {"l", q.l}, {"part", part == 0 ? "re" : "im"}, {"norm", l2_norm(v, g.dx())}});
        cand.push_back(v);
      }
    }
    double top = 0.0;
    for (const auto& v : cand) top = std::max(top, l2_norm(v, g.dx()));
    for (size_t i = 0; i < cand.size(); ++i) {
      const bool keep = l2_norm(cand[i], g.dx()) > 1e-8 * top;
      used[i]["kept"] = keep;
      if (keep) dirs.push_back(cand[i]);
    }
  } else {
    std::vector<double> v(g.nx);
    for (int i = 0; i < g.nx; ++i) v[i] = 1.0 - std::cos(2.0 * pi * x[i] / L);
    dirs.push_back(v);
    used.push_back({{"direction", "1 - cos(2 pi x / L)"}, {"kept", true}});
  }
  const GramianReport r = gramian(g, dirs, closure_from(a.closure));
  const size_t show = std::min<size_t>(10, r.singular_values.size());
  json j = {{"L", L},
            {"T", g.T},
            {"nx", g.nx},
            {"nt", g.nt},
            {"directions", used},
            {"singular_values_top", std::vector<double>(r.singular_values.begin(), r.singular_values.begin() + show)},
            {"singular_value_min", r.singular_values.empty() ? 0.0 : r.singular_values.back()},
            {"restricted", r.restricted},
            {"complement_top", r.complement.empty() ? 0.0 : r.complement.front()},
            {"ratio_max", r.ratio_max},
            {"ratio_min", r.ratio_min}};
  out << io::dump(j) << "\n";
  return 0;
}

// ---------------------------------------------------------------- synthesize

struct SynthArgs {
  PairArgs pair;
  double T = 0.4;
  std::string caseN = "auto";
  double gamma = 0.0;
  int nt = 0;
  std::string out;
};

int parse_case(const std::string& s) {
  if (s == "auto") return 0;
  if (s == "1") return 1;
  if (s == "2") return 2;
  throw UsageError("--case must be auto, 1 or 2");
}

ControlSpec synth_spec(const PairArgs& p, double T, const std::string& c, double gamma) {
  const CriticalPair pr = make_pair(p.k, p.l);
  std::optional<double> g;
  if (gamma != 0.0) g = gamma;
  return make_spec(pr, T, g, parse_case(c));
}

json spec_json(const ControlSpec& s) {
  return {{"k", s.pair.k},        {"l", s.pair.l},     {"T", s.T},         {"beta", s.beta},
          {"nu", s.nu},           {"nu_sq", s.nu * s.nu}, {"nu_sq_published", s.nu_sq_published},
          {"gamma", s.gamma},     {"case", s.caseN},   {"p", s.pair.p}};
}

int run_synthesize(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  const ControlSpec s = synth_spec(a.pair, a.T, a.caseN, a.gamma);
  SpectrumOptions so;
  so.min_time_steps = a.nt;
  json summary = spec_json(s);
  std::ostream& meta = a.out.empty() || a.out == "-" ? err : out;
  SpectrumTriple sp;
  try {
    sp = steering_spectrum(s, so);
  } catch (const SupportLeak& ex) {
    summary["support_leak"] = ex.what();
    meta << io::dump(summary) << "\n";
    throw CheckFailed(ex.what());
  }
  io::Table t;
  t.header = {"t", "u", "w_re", "w_im"};
  for (size_t i = 0; i < sp.t.size(); ++i) {
    if (sp.t[i] < -1e-12 * s.T || sp.t[i] > s.T * (1 + 1e-12)) continue;
    t.rows.push_back({sp.t[i], sp.u_time[i], sp.w_time[i].real(), sp.w_time[i].imag()});
  }
  {
    Sink sink(a.out, out);
    io::write_csv(*sink, t);
  }
  summary["Z"] = sp.Z;
  summary["dt"] = sp.dt;
  summary["samples"] = t.rows.size();
  summary["log_scale"] = sp.log_scale;
  summary["outside_mass_rel"] = sp.outside_mass_rel;
  summary["imag_rel"] = sp.imag_rel;
  summary["hermitian_defect"] = sp.hermitian_defect;
  meta << io::dump(summary) << "\n";
  return 0;
}

// ---------------------------------------------------------------- verify-signs

struct SignArgs {
  PairArgs pair;
  std::string tsweep = "0.4,0.2,0.1,0.05";
  std::string caseN = "auto";
  double gamma = 0.0;
};

int run_verify_signs(const SignArgs& a, std::ostream& out) {
  const auto ts = number_list(a.tsweep);
  json rows = json::array();
  bool ok = true;
  double first = 0.0, last = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    const ControlSpec s = synth_spec(a.pair, ts[i], a.caseN, a.gamma);
    const IntegralResult I = integral_I(s);
    const bool re_ok = I.ratio_re >= 0.7 && I.ratio_re <= 1.3;
    const bool im_ok = I.I.imag() < 0;
    ok = ok && re_ok && im_ok;
    const double dev = std::abs(I.ratio_re - 1.0);
    if (i == 0) first = dev;
    last = dev;
    json row = spec_json(s);
    // I and the normalizer carry a common factor exp(log_ref).
    row["I"] = cj(I.I);
    row["normalizer"] = I.w_norm2;
    row["log_ref"] = I.log_ref;
    row["re_ratio"] = I.ratio_re;
    row["im_over_T_norm"] = I.ratio_im_T;
    row["re_in_band"] = re_ok;
    row["im_negative"] = im_ok;
    row["im_below_minus_p"] = I.ratio_im_T < -s.pair.p;
    row["points"] = I.points;
    row["refinement_change"] = I.refinement_change;
    rows.push_back(row);
  }
  const bool trend = ts.size() < 2 || last < first;
  ok = ok && trend;
  json j = {{"k", a.pair.k}, {"l", a.pair.l}, {"sweep", rows}, {"trend_to_one", trend}, {"pass", ok}};
  out << io::dump(j) << "\n";
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------- verify-all

struct AllArgs {
  std::string only;
  std::string json_path;
  bool timing = false;
};

int run_verify_all(const AllArgs& a, std::ostream& out, std::ostream& err) {
  const auto only = split(a.only, ',');
  for (const auto& o : only) {
    bool any = false;
    for (const auto& c : acceptance::criteria()) any = any || acceptance::selected(c, {o});
    if (!any) throw UsageError("--only: no criterion matches '" + o + "'");
  }
  const auto rep = acceptance::run(only, [&](const acceptance::CheckResult& r) {
    err << acceptance::summary_line(r) << "\n";
    err.flush();
  });
  const std::string text = io::dump(rep.to_json(a.timing));
  if (a.json_path.empty()) {
    out << text << "\n";
  } else {
    Sink sink(a.json_path, out);
    *sink << text << "\n";
  }
  return rep.all_pass() ? 0 : 1;
}

void add_pair(CLI::App* s, PairArgs& p) {
  s->add_option("--k", p.k, "first index of the critical pair")->required();
  s->add_option("--l", p.l, "second index of the critical pair")->required();
}

}  // namespace

std::vector<double> parse_range(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() == 1 && s.find(':') == std::string::npos) return {to_double(parts[0])};
  if (parts.size() != 3) throw UsageError("range must be a or a:b:n");
  const double a = to_double(parts[0]), b = to_double(parts[1]);
  const double nd = to_double(parts[2]);
  const int n = int(nd);
  if (n < 1 || n != nd) throw UsageError("range count must be a positive integer");
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

int dispatch(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
  CLI::App app{"Critical-length KdV control toolkit", "kdvcrit"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  LengthsArgs la;
  auto* s_len = add_sub(app, "lengths", "Critical lengths grouped by class");
  s_len->add_option("--nmax", la.nmax, "largest k searched")->required();
  s_len->add_flag("--json", la.json_out, "JSON output (default)");
  s_len->add_flag("--csv", la.csv_out, "CSV output, one row per pair");
  s_len->add_option("--out", la.out, "output file");

  PairArgs ca;
  bool c_json = false;
  auto* s_const = add_sub(app, "constants", "Exponents and the constants Gamma, Lambda, E, E1, F, F1");
  add_pair(s_const, ca);
  s_const->add_flag("--json", c_json, "JSON output");

  double sL = 0.0;
  std::string srange, sout;
  auto* s_spec = add_sub(app, "spectral", "Roots, det Q, P, Xi, G, H on a z grid");
  s_spec->add_option("--L", sL, "interval length")->required();
  s_spec->add_option("--z", srange, "z value or range a:b:n")->required();
  s_spec->add_option("--out", sout, "CSV file");

  KernelArgs ka;
  auto* s_ker = add_sub(app, "kernel", "Closed-form x-integral of the kernel");
  add_pair(s_ker, ka.pair);
  s_ker->add_option("--zmin", ka.zmin, "first z (log grid when positive)");
  s_ker->add_option("--zmax", ka.zmax, "last z");
  s_ker->add_option("--points", ka.points, "number of samples");
  s_ker->add_option("--out", ka.out, "CSV file");

  PairArgs kaa;
  auto* s_asym = add_sub(app, "kernel-asym", "Fitted decay slopes of the kernel expansion");
  add_pair(s_asym, kaa);

  SimArgs sa;
  auto* s_sim = add_sub(app, "simulate", "Linear, second-order or nonlinear boundary-controlled solve");
  s_sim->add_option("--system", sa.system, "linear | second-order | nonlinear");
  s_sim->add_option("--k", sa.k, "pair selecting L");
  s_sim->add_option("--l", sa.l, "pair selecting L");
  s_sim->add_option("--L", sa.L, "interval length");
  s_sim->add_option("--nx", sa.nx, "interior nodes");
  s_sim->add_option("--nt", sa.nt, "time steps");
  s_sim->add_option("--T", sa.T, "final time");
  s_sim->add_option("--closure", sa.closure, "high-order | reflective");
  s_sim->add_option("--control-type", sa.control_type, "zero | bump | sine-bump | synthesized | file");
  s_sim->add_option("--control-amplitude", sa.control_amplitude, "control amplitude (max |u| for synthesized)");
  s_sim->add_option("--control-nu", sa.control_nu, "bump sharpness");
  s_sim->add_option("--control-omega", sa.control_omega, "sine frequency");
  s_sim->add_option("--control-file", sa.control_file, "CSV with columns t and u");
  s_sim->add_option("--initial-type", sa.initial_type, "zero | sine | psi");
  s_sim->add_option("--initial-amplitude", sa.initial_amplitude, "initial amplitude");
  s_sim->add_option("--initial-mode", sa.initial_mode, "sine mode");
  s_sim->add_option("--initial-component", sa.initial_component, "re | im part of phi");
  s_sim->add_option("--store-stride", sa.store_stride, "store every n-th time node");
  s_sim->add_option("--out", sa.out, "trajectory CSV (y2 for second-order)");
  s_sim->add_option("--out-first", sa.out_first, "y1 trajectory CSV for second-order");

  GramArgs ga;
  auto* s_gram = add_sub(app, "gramian", "Singular values of the control-to-state map");
  s_gram->add_option("--k", ga.k, "pair selecting L and the directions");
  s_gram->add_option("--l", ga.l, "pair selecting L and the directions");
  s_gram->add_option("--L", ga.L, "interval length (direction 1 - cos(2 pi x/L))");
  s_gram->add_option("--T", ga.T, "final time");
  s_gram->add_option("--nx", ga.nx, "interior nodes");
  s_gram->add_option("--nt", ga.nt, "time steps");
  s_gram->add_option("--closure", ga.closure, "high-order | reflective");

  SynthArgs sy;
  auto* s_syn = add_sub(app, "synthesize", "Steering control and its w companion");
  add_pair(s_syn, sy.pair);
  s_syn->add_option("--T", sy.T, "control time")->required();
  s_syn->add_option("--case", sy.caseN, "auto | 1 | 2");
  s_syn->add_option("--gamma", sy.gamma, "contour shift (scanned when omitted)");
  s_syn->add_option("--nt", sy.nt, "minimum samples inside [0, T]");
  s_syn->add_option("--out", sy.out, "CSV file with t, u, w_re, w_im");

  SignArgs sg;
  auto* s_sig = add_sub(app, "verify-signs", "Signs of Re I and Im I over a T sweep");
  add_pair(s_sig, sg.pair);
  s_sig->add_option("--tsweep", sg.tsweep, "comma separated T values");
  s_sig->add_option("--case", sg.caseN, "auto | 1 | 2");
  s_sig->add_option("--gamma", sg.gamma, "contour shift (scanned when omitted)");

  AllArgs aa;
  auto* s_all = add_sub(app, "verify-all", "Run the acceptance suite");
  s_all->add_option("--only", aa.only, "comma separated ids, names or groups");
  s_all->add_option("--json", aa.json_path, "report file (stdout when omitted)");
  s_all->add_flag("--timing", aa.timing, "include runtimes in the report");

  try {
    const auto args = expand_config(raw);
    std::vector<std::string> argv_s = {"kdvcrit"};
    argv_s.insert(argv_s.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_s) argv.push_back(s.data());
    try {
      app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : 2;
    }
    if (s_len->parsed()) return run_lengths(la, out);
    if (s_const->parsed()) return run_constants(ca, c_json, out);
    if (s_spec->parsed()) return run_spectral(sL, srange, sout, out);
    if (s_ker->parsed()) return run_kernel(ka, out);
    if (s_asym->parsed()) return run_kernel_asym(kaa, out);
    if (s_sim->parsed()) return run_simulate(sa, out, err);
    if (s_gram->parsed()) return run_gramian(ga, out);
    if (s_syn->parsed()) return run_synthesize(sy, out, err);
    if (s_sig->parsed()) return run_verify_signs(sg, out);
    if (s_all->parsed()) return run_verify_all(aa, out, err);
    return 2;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const NotCritical& e) {
    err << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const CaseError& e) {
    err << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const CheckFailed& e) {
    err << "check failed: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace kdv::cli
