#include "kdvcrit/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <random>
#include <ratio>

#include "kdvcrit/kernel.hpp"
#include "kdvcrit/numerics.hpp"
#include "kdvcrit/pde.hpp"
#include "kdvcrit/spectral.hpp"
#include "kdvcrit/synthesis.hpp"
#include "kdvcrit/unreachable.hpp"

namespace kdv::acceptance {

using io::json;

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> c = {
      {1, "root-residuals", "spectral"},
      {2, "root-asymptotics", "spectral"},
      {3, "gamma-lambda", "unreachable"},
      {4, "e-dichotomy", "unreachable"},
      {5, "e1-over-e", "unreachable"},
      {6, "kernel-expansion", "kernel"},
      {7, "pde-convergence", "pde"},
      {8, "projection-identity", "pde"},
      {9, "gramian-dichotomy", "pde"},
      {10, "steering-construction", "synthesis"},
      {11, "interpolation-bounds", "synthesis"},
      {12, "representations", "number_theory"},
  };
  return c;
}

bool selected(const Criterion& c, const std::vector<std::string>& only) {
  if (only.empty()) return true;
  for (const auto& s : only)
    if (s == c.name || s == c.group || s == std::to_string(c.id)) return true;
  return false;
}

bool Report::all_pass() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const CheckResult& r) { return r.status == "fail"; });
}

json Report::to_json(bool timing) const {
  json arr = json::array();
  for (const auto& r : checks) {
    json j;
    j["id"] = r.id;
    j["name"] = r.name;
    j["group"] = r.group;
    j["status"] = r.status;
    j["measured"] = r.measured;
    j["tolerance"] = r.tolerance;
    j["relation"] = r.relation;
    j["details"] = r.details;
    if (timing) j["runtime_s"] = r.runtime;
    arr.push_back(j);
  }
  json out;
  out["all_pass"] = all_pass();
  out["checks"] = arr;
  return out;
}

std::string summary_line(const CheckResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-4s %2d %-22s measured %.6g %s %.6g", r.status == "pass" ? "PASS" : "FAIL",
                r.id, r.name.c_str(), r.measured, r.relation.c_str(), r.tolerance);
  return buf;
}

namespace {

json cjson(cplx c) { return json::array({c.real(), c.imag()}); }

void verdict(CheckResult& r, bool ok) { r.status = ok ? "pass" : "fail"; }

// exp(-1/(s(1-s))) on (a, b), zero outside.
double bump(double t, double a, double b) {
  const double s = (t - a) / (b - a);
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return std::exp(-1.0 / (s * (1.0 - s)));
}

// Distance from each approximation to the nearest exact root; max over j.
double match_error(const Roots& exact, const Roots& approx) {
  double e = 0.0;
  for (const cplx& a : approx) {
    double m = 1e300;
    for (const cplx& x : exact) m = std::min(m, std::abs(a - x));
    e = std::max(e, m);
  }
  return e;
}

// 1. Root residuals and Vieta identities.
void c1(CheckResult& r) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1e6, 1e6);
  double worst = 0.0, worst_vieta = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double z = U(rng);
    const Roots l = roots(cplx(z, 0.0));
    const double scale = 1.0 + std::abs(z);
    for (const cplx& x : l) worst = std::max(worst, cubic_residual(x, cplx(z, 0.0)) / scale);
    const cplx s1 = l[0] + l[1] + l[2];
    const cplx s2 = l[0] * l[1] + l[1] * l[2] + l[2] * l[0] - 1.0;
    const cplx s3 = l[0] * l[1] * l[2] + I1 * z;
    worst_vieta = std::max({worst_vieta, std::abs(s1) / scale, std::abs(s2) / scale, std::abs(s3) / scale});
  }
  r.measured = std::max(worst, worst_vieta);
  r.tolerance = 1e-12;
  r.relation = "<=";
  r.details = {{"samples", 10000}, {"max_residual_rel", worst}, {"max_vieta_rel", worst_vieta}};
  verdict(r, r.measured <= r.tolerance);
}

// 2. Root expansion orders: order 1 error ~ z^{-1/3}, order 2 error ~ z^{-5/3}.
void c2(CheckResult& r) {
  const auto zs = dyadic_grid(1e3, 1e6, 2);
  std::vector<double> e1, e2, s1, s2, s3;
  const double p = make_pair(2, 1).p;
  for (double z : zs) {
    const Roots ex = roots(cplx(z, 0.0));
    e1.push_back(match_error(ex, asymptotic_roots(z, 1)));
    e2.push_back(match_error(ex, asymptotic_roots(z, 2)));
    const Roots exs = shifted_roots(cplx(z, 0.0), p);
    s1.push_back(match_error(exs, asymptotic_shifted_roots(z, p, 1)));
    s2.push_back(match_error(exs, asymptotic_shifted_roots(z, p, 2)));
    s3.push_back(match_error(exs, asymptotic_shifted_roots(z, p, 3)));
  }
  const double k1 = loglog_slope(zs, e1), k2 = loglog_slope(zs, e2);
  const double d1 = std::abs(k1 + 1.0 / 3.0), d2 = std::abs(k2 + 5.0 / 3.0);
  r.measured = std::max(d1, d2);
  r.tolerance = 0.05;
  r.relation = "<=";
  r.details = {{"slope_order1", k1},
               {"expected_order1", -1.0 / 3.0},
               {"slope_order2", k2},
               {"expected_order2", -5.0 / 3.0},
               {"shifted_slopes_p21", json::array({loglog_slope(zs, s1), loglog_slope(zs, s2),
                                                   loglog_slope(zs, s3)})},
               {"points", zs.size()}};
  verdict(r, r.measured <= r.tolerance);
}

std::vector<CriticalPair> pairs_k20() { return enumerate_pairs(20); }

// 3. Gamma = Lambda = -(8 pi^3 / L^3) i kl(k+l).
void c3(CheckResult& r) {
  double worst = 0.0;
  int n = 0;
  for (const auto& pr : pairs_k20()) {
    const UnreachableData u = constants(pr);
    const cplx ref = -(8.0 * pi * pi * pi / (pr.L * pr.L * pr.L)) * I1 * double(pr.k * pr.l * (pr.k + pr.l));
    worst = std::max({worst, std::abs(u.Gamma - ref) / std::abs(ref), std::abs(u.Lambda - ref) / std::abs(ref)});
    ++n;
  }
  r.measured = worst;
  r.tolerance = 1e-12;
  r.relation = "<=";
  r.details = {{"pairs", n}, {"kmax", 20}};
  verdict(r, worst <= r.tolerance);
}

// 4. |E| < 1e-12 exactly when 3 | 2k+l.
void c4(CheckResult& r) {
  int mismatches = 0, n = 0;
  double max_zero = 0.0, min_nonzero = 1e300;
  for (const auto& pr : pairs_k20()) {
    const UnreachableData u = constants(pr);
    const bool div = (2 * pr.k + pr.l) % 3 == 0;
    const double a = std::abs(u.E);
    if ((a < 1e-12) != div) ++mismatches;
    if (div)
      max_zero = std::max(max_zero, a);
    else
      min_nonzero = std::min(min_nonzero, a / std::abs(u.Gamma));
    ++n;
  }
  r.measured = mismatches;
  r.tolerance = 0;
  r.relation = "==";
  r.details = {{"pairs", n}, {"max_abs_E_divisible", max_zero}, {"min_abs_E_over_Gamma_other", min_nonzero}};
  verdict(r, mismatches == 0);
}

// 5. E1/E closed form and Im(E1/E) = -pL/6.
void c5(CheckResult& r) {
  double worst = 0.0, worst_im = 0.0;
  int n = 0;
  for (const auto& pr : pairs_k20()) {
    if (pr.caseE0) continue;
    const cplx v = e1_over_e(pr), c = e1_over_e_closed_form(pr);
    worst = std::max(worst, std::abs(v - c));
    worst_im = std::max(worst_im, std::abs(v.imag() + pr.p * pr.L / 6.0));
    ++n;
  }
  r.measured = std::max(worst, worst_im);
  r.tolerance = 1e-10;
  r.relation = "<=";
  r.details = {{"pairs", n}, {"max_closed_form_diff", worst}, {"max_imag_diff", worst_im}};
  verdict(r, r.measured <= r.tolerance);
}

// 6. Expansion slopes for (2,1) and (4,1) plus closed form against quadrature.
void c6(CheckResult& r) {
  bool ok = true;
  json d;
  struct Window {
    double lo, hi;
  };
  auto check = [&](int k, int l, const std::array<Window, 3>& w) {
    const AsymptoticReport a = verify_expansion(make_pair(k, l));
    json jj;
    for (int lv = 0; lv < 3; ++lv) {
      const double s = a.levels[lv].slope;
      const bool in = s >= w[lv].lo && s <= w[lv].hi;
      ok = ok && in;
      jj["level" + std::to_string(lv)] = {{"slope", s}, {"window", json::array({w[lv].lo, w[lv].hi})},
                                          {"points", a.levels[lv].points}};
    }
    jj["excluded"] = a.excluded.size();
    d["(" + std::to_string(k) + "," + std::to_string(l) + ")"] = jj;
  };
  check(2, 1, {Window{-4.0 / 3 - 0.05, -4.0 / 3 + 0.05}, Window{-2.05, -1.95}, Window{-1e9, -7.0 / 3 + 0.1}});
  check(4, 1, {Window{-2.05, -1.95}, Window{-8.0 / 3 - 0.07, -8.0 / 3 + 0.07}, Window{-1e9, -3.0 + 0.1}});
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> U(1.0, 4.0);
  double worst = 0.0;
  const CriticalPair prs[2] = {make_pair(2, 1), make_pair(4, 1)};
  int done = 0;
  for (int i = 0; done < 20 && i < 100; ++i) {
    const double z = std::pow(10.0, U(rng));
    const CriticalPair& pr = prs[i % 2];
    try {
      const cplx a = intB_closed(pr, z), b = intB_quadrature(pr, z);
      worst = std::max(worst, std::abs(a - b) / std::abs(b));
      ++done;
    } catch (const NearPole&) {
    }
  }
  d["spot_checks"] = done;
  d["max_spot_rel"] = worst;
  ok = ok && done == 20 && worst <= 1e-9;
  r.measured = worst;
  r.tolerance = 1e-9;
  r.relation = "<=";
  r.details = d;
  verdict(r, ok);
}

// Exact zero-boundary solution Re(phi e^{-ipt}) for (2,1).
struct PsiSolution {
  CriticalPair pr = make_pair(2, 1);
  EtaTriple e = eta_triple(pr);
  double period() const { return 2.0 * pi / pr.p; }
  std::vector<double> at(const Grid& g, double t) const {
    auto x = g.x();
    std::vector<double> y(x.size());
    for (size_t i = 0; i < x.size(); ++i) y[i] = (phi(e, x[i]) * std::exp(-I1 * pr.p * t)).real();
    return y;
  }
  double error(const Grid& g) const {
    const auto y0 = at(g, 0.0);
    const std::vector<double> u(g.nt + 1, 0.0);
    const Trajectory tr = solve_linear(g, y0, u);
    const auto ex = at(g, g.T);
    std::vector<double> d(ex.size());
    for (size_t i = 0; i < d.size(); ++i) d[i] = tr.final_state[i] - ex[i];
    return l2_norm(d, g.dx()) / l2_norm(ex, g.dx());
  }
};

// 7. Convergence in dx and dt, conservation drift.
void c7(CheckResult& r) {
  const PsiSolution ps;
  const double T = ps.period();
  std::vector<double> hx, ex_, ht, et;
  for (int n : {64, 128, 256, 512}) {
    const Grid g{ps.pr.L, n, T, 1 << 17};
    hx.push_back(g.dx());
    ex_.push_back(ps.error(g));
  }
  for (int nt : {64, 128, 256, 512}) {
    const Grid g{ps.pr.L, 512, T, nt};
    ht.push_back(g.dt());
    et.push_back(ps.error(g));
  }
  const double ox = loglog_slope(hx, ex_);
  const double ot = loglog_slope(ht, et);
  // Drift over one period at nx = 512.
  const Grid g{ps.pr.L, 512, T, 4096};
  const auto y0 = ps.at(g, 0.0);
  const double n0 = l2_norm(y0, g.dx());
  double drift = 0.0;
  SolveOptions o;
  o.observer = [&](int, double, const std::vector<double>& y) {
    drift = std::max(drift, std::abs(l2_norm(y, g.dx()) / n0 - 1.0));
  };
  solve_linear(g, y0, std::vector<double>(g.nt + 1, 0.0), nullptr, o);
  r.measured = std::min(ox, ot);
  r.tolerance = 1.9;
  r.relation = ">=";
  r.details = {{"order_dx", ox},       {"errors_dx", ex_},  {"nt_dx_ladder", 1 << 17},
               {"order_dt", ot},       {"errors_dt", et},   {"nx_dt_ladder", 512},
               {"drift_nx512", drift}, {"drift_tol", 1e-6}, {"T", T}};
  verdict(r, ox >= 1.9 && ot >= 1.9 && drift <= 1e-6);
}

// 8. Projection identity with a smooth compactly supported control.
void c8(CheckResult& r) {
  const CriticalPair pr = make_pair(2, 1);
  const EtaTriple e = eta_triple(pr);
  const double T = 6.0;
  auto run = [&](int nx, int nt) {
    const Grid g{pr.L, nx, T, nt};
    std::vector<double> u(nt + 1);
    for (int i = 0; i <= nt; ++i) {
      const double t = g.dt() * i;
      u[i] = bump(t, 0.5, T / 2) * std::sin(3.0 * t);
    }
    return projection_identity(
        g, u, [&](double x) { return phi(e, x); }, [&](double x) { return phi(e, x, 1); }, pr.p);
  };
  const ProjectionCheck coarse = run(256, 2048), fine = run(512, 4096);
  const double factor = coarse.rel / fine.rel;
  json d = {{"rel_nx512_nt4096", fine.rel},
            {"rel_nx256_nt2048", coarse.rel},
            {"refinement_factor", factor},
            {"lhs", cjson(fine.lhs)},
            {"rhs", cjson(fine.rhs)}};

  // Frequency-domain form of the same quantity for a synthesized 0 -> 0 control (reported).
  try {
    // Long horizon keeps the spectrum within reach of the time step.
    const ControlSpec s = make_spec(pr, 6.0);
    SpectrumOptions so;
    so.min_time_steps = 32768;
    const SpectrumTriple sp = steering_spectrum(s, so);
    const Grid g{pr.L, 512, s.T, 32768};
    const auto u = control_on_nodes(sp, s.T, g.nt);
    const ProjectionCheck pc = projection_identity(
        g, u, [&](double x) { return phi(e, x); }, [&](double x) { return phi(e, x, 1); }, pr.p);
    const IntegralResult I = integral_I(s);
    const cplx freq = constants(pr).E * I.I * std::exp(I.log_ref);
    d["frequency_identity"] = {{"time_side", cjson(pc.rhs)},
                               {"frequency_side", cjson(freq)},
                               {"rel", std::abs(pc.rhs - freq) / std::abs(freq)},
                               {"target", 0.05},
                               {"gating", false}};
  } catch (const Error& ex) {
    d["frequency_identity"] = {{"error", ex.what()}};
  }
  r.measured = fine.rel;
  r.tolerance = 1e-2;
  r.relation = "<=";
  r.details = d;
  verdict(r, fine.rel <= 1e-2 && factor >= 2.0);
}

// 9. Restricted singular value ratio at critical vs non-critical length.
void c9(CheckResult& r) {
  const EtaTriple e = eta_triple(make_pair(1, 1));
  json ladder = json::array();
  double crit = 0.0;
  bool decreasing = true;
  double prev = 1e300;
  for (int n : {64, 128, 256}) {
    const Grid g{2.0 * pi, n, 2.0, 400};
    auto x = g.x();
    std::vector<double> v(n);
    // phi = 2i(cos x - 1) here: the direction 1 - cos x sits in the imaginary part.
    for (int i = 0; i < n; ++i) v[i] = phi(e, x[i]).imag();
    const GramianReport gr = gramian(g, {v});
    ladder.push_back({{"nx", n}, {"ratio", gr.ratio_max}});
    decreasing = decreasing && gr.ratio_max < prev;
    prev = gr.ratio_max;
    crit = gr.ratio_max;
  }
  const Grid g{1.0, 256, 2.0, 400};
  auto x = g.x();
  std::vector<double> v(g.nx);
  for (int i = 0; i < g.nx; ++i) v[i] = 1.0 - std::cos(2.0 * pi * x[i]);
  const GramianReport gn = gramian(g, {v});
  r.measured = crit;
  r.tolerance = 1e-6;
  r.relation = "<=";
  r.details = {{"critical_L", 2.0 * pi},        {"critical_ladder", ladder},
               {"decreasing_with_nx", decreasing}, {"noncritical_L", 1.0},
               {"noncritical_ratio", gn.ratio_min}, {"noncritical_tol", 1e-4},
               {"T", 2.0},                          {"nt", 400}};
  verdict(r, crit <= 1e-6 && gn.ratio_min >= 1e-4);
}

// 10. Control construction: support, steering, sign conditions of I and J.
void c10(CheckResult& r) {
  bool ok = true;
  json d;
  {
    const ControlSpec s = make_spec(make_pair(1, 1), 1.5);
    SpectrumOptions so;
    so.min_time_steps = 4096;
    double leak = 1.0, ratio = 1.0, imag = 1.0;
    try {
      const SpectrumTriple sp = steering_spectrum(s, so);
      leak = sp.outside_mass_rel;
      imag = sp.imag_rel;
      const Grid g{s.pair.L, 512, s.T, 4096};
      const auto u = control_on_nodes(sp, s.T, g.nt);
      const Trajectory tr = solve_linear(g, std::vector<double>(g.nx, 0.0), u);
      ratio = l2_norm(tr.final_state, g.dx()) / tr.max_l2;
      const auto pw = paley_wiener_check(control_on_nodes(sp, s.T, 2000), s.T, s.pair.L);
      d["paley_wiener_bounded"] = pw.bounded;
      ok = ok && pw.bounded;
    } catch (const SupportLeak& ex) {
      d["support_leak"] = ex.what();
    }
    d["steering"] = {{"pair", "(1,1)"},       {"T", s.T},           {"outside_mass", leak},
                     {"outside_tol", 1e-6},   {"imag_rel", imag},   {"final_over_max", ratio},
                     {"final_tol", 0.02},     {"nx", 512},          {"nt", 4096}};
    ok = ok && leak <= 1e-6 && ratio <= 0.02 && imag <= 1e-10;
    r.measured = ratio;
  }
  const std::vector<double> sweep = {0.4, 0.2, 0.1, 0.05};
  double worst_dev = 0.0;
  for (auto [k, l] : {std::pair{3, 2}, std::pair{4, 1}}) {
    json rows = json::array();
    double first = 0.0, last = 0.0;
    for (size_t i = 0; i < sweep.size(); ++i) {
      const ControlSpec s = make_spec(make_pair(k, l), sweep[i]);
      const IntegralResult I = integral_I(s);
      const double dev = std::abs(I.ratio_re - 1.0);
      if (i == 0) first = dev;
      last = dev;
      worst_dev = std::max(worst_dev, dev);
      const bool in = I.ratio_re >= 0.7 && I.ratio_re <= 1.3 && I.I.imag() < 0;
      ok = ok && in;
      rows.push_back({{"T", s.T},
                      {"case", s.caseN},
                      {"gamma", s.gamma},
                      {"nu_sq", s.nu * s.nu},
                      {"nu_sq_published", s.nu_sq_published},
                      {"re_ratio", I.ratio_re},
                      {"im_over_T_norm", I.ratio_im_T},
                      {"im_below_minus_p", I.ratio_im_T < -s.pair.p},
                      {"im_negative", I.I.imag() < 0},
                      {"dilation_ratio_a13", I.frac13 / std::pow(s.T, 1.0 / 3.0)},
                      {"dilation_ratio_a23", I.frac23 / std::pow(s.T, 2.0 / 3.0)},
                      {"points", I.points}});
    }
    ok = ok && last < first;
    d["(" + std::to_string(k) + "," + std::to_string(l) + ")"] = {{"sweep", rows}, {"trend_to_one", last < first}};
  }
  d["max_re_deviation"] = worst_dev;
  r.tolerance = 0.02;
  r.relation = "<=";
  r.details = d;
  verdict(r, ok);
}

// Deterministic smooth test functions on [0, 1].
std::vector<std::vector<double>> test_functions(int count, int n) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<std::vector<double>> out;
  for (int f = 0; f < count; ++f) {
    const int terms = 1 + f % 4;
    std::vector<double> u(n, 0.0);
    for (int m = 0; m < terms; ++m) {
      const double a = 0.6 * U(rng), w = 0.1 + (1.0 - a - 0.1) * U(rng);
      const double amp = 2.0 * U(rng) - 1.0, om = 60.0 * U(rng), ph = 2 * pi * U(rng);
      for (int i = 0; i < n; ++i) {
        const double t = double(i) / (n - 1);
        u[i] += amp * bump(t, a, a + w) * std::cos(om * t + ph);
      }
    }
    out.push_back(std::move(u));
  }
  return out;
}

// 11. Dilation ratio and the four interpolation inequalities.
void c11(CheckResult& r) {
  static_assert(std::ratio_add<std::ratio<3, 7>, std::ratio<4, 7>>::num == 1 &&
                std::ratio_add<std::ratio<3, 7>, std::ratio<4, 7>>::den == 1);
  static_assert(std::ratio_add<std::ratio<5, 7>, std::ratio<2, 7>>::num == 1 &&
                std::ratio_add<std::ratio<5, 7>, std::ratio<2, 7>>::den == 1);
  static_assert(std::ratio_add<std::ratio<7, 13>, std::ratio<6, 13>>::num == 1 &&
                std::ratio_add<std::ratio<7, 13>, std::ratio<6, 13>>::den == 1);
  static_assert(std::ratio_add<std::ratio<9, 13>, std::ratio<4, 13>>::num == 1 &&
                std::ratio_add<std::ratio<9, 13>, std::ratio<4, 13>>::den == 1);
  bool ok = true;
  json d;
  // Dilations of fixed shapes over T in {1, 1/2, 1/4, 1/8}.
  const int n = 2049;
  const auto shapes = test_functions(8, n);
  double worst38 = 0.0;
  for (double alpha : {1.0 / 3.0, 2.0 / 3.0}) {
    double m = 0.0;
    for (double T : {1.0, 0.5, 0.25, 0.125})
      for (const auto& w : shapes) m = std::max(m, dilation_ratio(w, T, alpha));
    const double C = dilation_constant(alpha);
    d[alpha < 0.5 ? "dilation_alpha13" : "dilation_alpha23"] = {{"max_ratio", m}, {"constant", C}};
    ok = ok && m <= C;
    worst38 = std::max(worst38, m / C);
  }
  // Interpolation: ||u||_{s0} <= ||u||_{sa}^{ta} ||u||_{sb}^{tb} with C = 1.
  const auto fs = test_functions(100, n);
  double worst = 0.0;
  json ineq = json::array();
  for (const auto& q : interpolation_inequalities()) {
    const bool sums = q.num_a * q.den_b + q.num_b * q.den_a == q.den_a * q.den_b;
    const double ta = double(q.num_a) / q.den_a, tb = double(q.num_b) / q.den_b;
    const bool orders = std::abs(ta * q.s_a + tb * q.s_b - q.s_left) < 1e-15;
    double m = 0.0;
    for (const auto& u : fs) {
      const double lhs = fractional_norm(u, q.s_left, 1.0).value;
      const double rhs = std::pow(fractional_norm(u, q.s_a, 1.0).value, ta) *
                         std::pow(fractional_norm(u, q.s_b, 1.0).value, tb);
      m = std::max(m, lhs / rhs);
    }
    worst = std::max(worst, m);
    ok = ok && sums && orders && m <= 1.0 + 1e-12;
    ineq.push_back({{"exponents", std::to_string(q.num_a) + "/" + std::to_string(q.den_a) + " + " +
                                      std::to_string(q.num_b) + "/" + std::to_string(q.den_b)},
                    {"sum_is_one", sums},
                    {"max_ratio", m}});
  }
  d["interpolation"] = ineq;
  d["functions"] = fs.size();
  r.measured = std::max(worst, worst38);
  r.tolerance = 1.0 + 1e-12;
  r.relation = "<=";
  r.details = d;
  verdict(r, ok);
}

// 12. representations against a brute-force table; T^> for single pairs.
void c12(CheckResult& r) {
  const std::int64_t Nmax = 10000;
  std::map<std::int64_t, std::vector<std::pair<int, int>>> table;
  for (int k = 1; k * k <= Nmax; ++k)
    for (int l = 1; l <= k; ++l) {
      const std::int64_t N = std::int64_t(k) * k + std::int64_t(k) * l + std::int64_t(l) * l;
      if (N <= Nmax) table[N].push_back({k, l});
    }
  int mismatches = 0, classes = 0, single = 0;
  double worst_t = 0.0;
  for (std::int64_t N = 1; N <= Nmax; ++N) {
    auto it = table.find(N);
    try {
      const LengthClass c = representations(N);
      std::vector<std::pair<int, int>> got;
      for (const auto& pr : c.pairs) got.push_back({pr.k, pr.l});
      auto want = it == table.end() ? std::vector<std::pair<int, int>>{} : it->second;
      std::sort(got.begin(), got.end());
      std::sort(want.begin(), want.end());
      if (got != want) ++mismatches;
      ++classes;
      if (c.nL == 1 && c.pairs[0].k > c.pairs[0].l) {
        const double ts = t_star(c);
        worst_t = std::max(worst_t, std::abs(ts - pi / c.pairs[0].p) / ts);
        ++single;
      }
    } catch (const NotCritical&) {
      if (it != table.end()) ++mismatches;
    }
  }
  r.measured = mismatches;
  r.tolerance = 0;
  r.relation = "==";
  r.details = {{"Nmax", Nmax}, {"classes", classes}, {"single_pair_classes", single}, {"max_tstar_rel", worst_t}};
  verdict(r, mismatches == 0 && worst_t <= 1e-14);
}

}  // namespace

Report run(const std::vector<std::string>& only, const std::function<void(const CheckResult&)>& on_done) {
  static const std::map<int, void (*)(CheckResult&)> fns = {
      {1, c1}, {2, c2}, {3, c3}, {4, c4}, {5, c5}, {6, c6}, {7, c7}, {8, c8}, {9, c9}, {10, c10}, {11, c11}, {12, c12}};
  Report rep;
  for (const auto& c : criteria()) {
    if (!selected(c, only)) continue;
    CheckResult r;
    r.id = c.id;
    r.name = c.name;
    r.group = c.group;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fns.at(c.id)(r);
    } catch (const std::exception& ex) {
      r.status = "fail";
      r.details["error"] = ex.what();
    }
    r.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_done) on_done(r);
    rep.checks.push_back(std::move(r));
  }
  return rep;
}

}  // namespace kdv::acceptance
