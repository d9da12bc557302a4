#include "kdvcrit/synthesis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <limits>

#include "kdvcrit/numerics.hpp"
#include "kdvcrit/spectral.hpp"
#include "kdvcrit/unreachable.hpp"

namespace kdv {

namespace {

constexpr double kContourDepth = 0.5;
const double kCollision = 2.0 / (3.0 * std::sqrt(3.0));

// log of the path integrand exp(-nu/(1-s^2) - i w s) s'(tau) along
// s(tau) = tau - i d (1 - tau^2), excluding log s'.
cplx path_log(double nu, double w, double tau) {
  const cplx s(tau, -kContourDepth * (1.0 - tau * tau));
  return -nu / (1.0 - s * s) - I1 * w * s;
}

// Real part of the log integrand in sigma = log(1 - tau), including the Jacobian.
double sigma_log(double nu, double w, double sg) {
  return path_log(nu, w, 1.0 - std::exp(sg)).real() + sg;
}

// Deformed-path part of C(w) for w >= 0. The vertical leg from 0 to -i d
// contributes a purely imaginary amount, so 2 Re of this equals 2 Re C(w).
// Integrated in sigma = log(1 - tau) on Gauss panels sized by the peak curvature.
Scaled path_part(double nu, double w) {
  constexpr double smin = -40.0;
  double best = -std::numeric_limits<double>::infinity(), sb = 0.0;
  const int ns = 800;
  for (int i = 0; i <= ns; ++i) {
    const double sg = smin + (0.0 - smin) * i / ns;
    const double v = sigma_log(nu, w, sg);
    if (v > best) {
      best = v;
      sb = sg;
    }
  }
  const double step = -smin / ns;
  double a = std::max(smin, sb - step), b = std::min(0.0, sb + step);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 50; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (sigma_log(nu, w, c) > sigma_log(nu, w, d))
      b = d;
    else
      a = c;
  }
  const double ss = 0.5 * (a + b);
  const double peak = std::max(best, sigma_log(nu, w, ss));
  const double e = 1e-3;
  const double f2 = (sigma_log(nu, w, ss + e) - 2 * sigma_log(nu, w, ss) + sigma_log(nu, w, ss - e)) / (e * e);
  const double width = f2 < -1e-6 ? std::min(1.0, 1.0 / std::sqrt(-f2)) : 1.0;
  // Extend each side until the integrand is below e^{-60} of the peak.
  double lo = ss, hi = ss;
  while (lo > smin && sigma_log(nu, w, lo) > peak - 60.0) lo = std::max(smin, lo - width);
  while (hi < 0.0 && sigma_log(nu, w, hi) > peak - 60.0) hi = std::min(0.0, hi + width);
  auto f = [&](double sg) -> cplx {
    const double u = std::exp(sg), tau = 1.0 - u;
    const cplx ex = path_log(nu, w, tau) - peak + sg;
    if (ex.real() < -745.0) return 0.0;
    return std::exp(ex) * cplx(1.0, 2.0 * kContourDepth * tau);
  };
  const int panels = std::clamp(int(std::ceil((hi - lo) / width)), 2, 400);
  const cplx sum = hi > lo ? integrate_panels(f, lo, hi, panels) : cplx(0.0);
  return Scaled{sum, peak}.normalized();
}

// C~(z): path part at beta z for z >= 0 and its conjugate for z < 0,
// so that vhat_1(z) = C~(z) + conj C~(z) and C~(z) ~ e^{-i beta z} slowly varying.
Scaled ctilde(double nu, double beta, double z) {
  const Scaled c = path_part(nu, beta * std::abs(z));
  return z >= 0 ? c : conj(c);
}

// Log-magnitude envelope scan over z = +-zeta^3, zeta on a log grid;
// returns [zeta_lo, zeta_hi] (signed) where f > max + log_cut.
std::pair<double, double> envelope_range(const std::function<double(double)>& logf, double log_cut,
                                         double& logmax) {
  std::vector<double> zs;
  for (int i = 0; i <= 400; ++i) {
    const double zeta = std::pow(10.0, -1.0 + 4.5 * i / 400.0);
    zs.push_back(zeta);
    zs.push_back(-zeta);
  }
  zs.push_back(0.0);
  std::vector<double> lv(zs.size());
  logmax = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < zs.size(); ++i) {
    const double z = zs[i] * zs[i] * zs[i];
    double v;
    try {
      v = logf(z);
    } catch (const Error&) {
      v = -std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(v)) v = -std::numeric_limits<double>::infinity();
    lv[i] = v;
    logmax = std::max(logmax, v);
  }
  double lo = 0.0, hi = 0.0;
  for (size_t i = 0; i < zs.size(); ++i)
    if (lv[i] > logmax + log_cut) {
      lo = std::min(lo, zs[i]);
      hi = std::max(hi, zs[i]);
    }
  // One grid step of margin (log grid ratio 10^{4.5/400}).
  const double r = std::pow(10.0, 4.5 / 400.0);
  return {std::min(lo * r, -0.1), std::max(hi * r, 0.1)};
}

int derivative_order(const ControlSpec& s) { return s.caseN == 1 ? 1 : 3; }

}  // namespace

double nu_for_beta(double beta) { return 1.617 / std::sqrt(beta); }

Scaled bump_half(double nu, double w) {
  if (nu <= 0) throw DomainError("nu must be positive");
  return w >= 0 ? path_part(nu, w) : conj(path_part(nu, -w));
}

cplx bump_half_direct(double nu, double w) {
  auto f = [&](double s) -> cplx {
    if (s >= 1.0) return 0.0;
    return std::exp(-nu / (1.0 - s * s)) * std::exp(-I1 * (w * s));
  };
  return integrate_panels(f, 0.0, 1.0, std::max(64, int(std::ceil(std::abs(w) / 2.0))));
}

Scaled bump_vhat1(double nu, double beta, double z) {
  if (nu <= 0 || beta <= 0) throw DomainError("nu and beta must be positive");
  const Scaled c = path_part(nu, beta * std::abs(z));
  return Scaled{cplx(2.0 * c.m.real(), 0.0), c.s};
}

Scaled bump_vhat(const ControlSpec& s, double z) {
  const Scaled v1 = bump_vhat1(s.nu, s.beta, z);
  return v1 * std::polar(1.0, -s.beta * z);
}

Scaled h_derivative_on_line(const CriticalPair& pr, double gamma, double z, int d) {
  if (d != 1 && d != 3) throw DomainError("derivative order must be 1 or 3");
  return h_taylor(cplx(z, gamma), pr.L)[d];
}

double min_log_h_derivative(const CriticalPair& pr, double gamma, int d,
                            const std::vector<double>& zs) {
  double m = std::numeric_limits<double>::infinity();
  for (double z : zs) {
    const Scaled h = h_derivative_on_line(pr, gamma, z, d);
    m = std::min(m, h.zero() ? -std::numeric_limits<double>::infinity() : h.log_abs());
  }
  return m;
}

cplx what_prefactor(const ControlSpec& s, double z) {
  const cplx mu3L = mu_directions()[2] * s.pair.L;
  if (s.caseN == 1) return 3.0 / mu3L;
  return 27.0 / (mu3L * mu3L * mu3L) * z;
}

ControlSpec make_spec(const CriticalPair& pr, double T, std::optional<double> gamma,
                      int case_override) {
  if (!(T > 0)) throw DomainError("T must be positive");
  ControlSpec s;
  s.pair = pr;
  s.T = T;
  s.beta = T / 2.0;
  s.nu = nu_for_beta(s.beta);
  s.nu_sq_published = 5.223 / T;
  s.caseN = case_override ? case_override : (pr.caseE0 ? 2 : 1);
  if (s.caseN != 1 && s.caseN != 2) throw DomainError("case must be 1 or 2");
  if (gamma) {
    if (*gamma == 0.0) throw DomainError("gamma must be nonzero");
    s.gamma = *gamma;
    return s;
  }
  // Working grid: the resolved range of vhat H, 2001 points uniform in z^{1/3}.
  double lmax;
  auto logu = [&](double z) {
    return bump_vhat1(s.nu, s.beta, z).log_abs() + frame(cplx(z, 0.0), pr.L).H.log_abs();
  };
  const auto [lo, hi] = envelope_range(logu, std::log(1e-14), lmax);
  std::vector<double> zs;
  for (int i = 0; i <= 2000; ++i) {
    const double zeta = lo + (hi - lo) * i / 2000.0;
    zs.push_back(zeta * zeta * zeta);
  }
  const int d = s.caseN == 1 ? 1 : 3;
  for (double g : {0.5, 1.0, 1.5, 2.0}) {
    try {
      if (min_log_h_derivative(pr, g, d, zs) > std::log(1e-10)) {
        s.gamma = g;
        return s;
      }
    } catch (const RootDerivativeSingular&) {
    }
  }
  throw DomainError("no admissible gamma in {0.5, 1, 1.5, 2}");
}

SpectrumTriple steering_spectrum(const ControlSpec& s, const SpectrumOptions& opt) {
  const double L = s.pair.L;
  const int d = derivative_order(s);
  auto uhat_s = [&](double z) { return bump_vhat(s, z) * frame(cplx(z, 0.0), L).H; };
  double lmax;
  const auto [lo, hi] =
      envelope_range([&](double z) { return uhat_s(z).log_abs(); }, std::log(opt.cutoff), lmax);
  const double Z = std::max(-lo * lo * lo, hi * hi * hi);
  const double window = opt.window_factor * s.T;
  const double dz = 2.0 * pi / window;
  const double t0 = -0.5 * (opt.window_factor - 1.0) * s.T;
  int N = 1024;
  while (N * dz < 2.2 * Z || N < opt.window_factor * opt.min_time_steps) N *= 2;
  if (N > (1 << 24)) throw ResolutionError("spectrum needs more than 2^24 samples");

  // Scale all values by exp(-ref) when the magnitudes leave the safe range.
  const double ref = std::abs(lmax) > 600.0 ? lmax : 0.0;

  SpectrumTriple sp;
  sp.Z = Z;
  sp.log_scale = ref;
  sp.dt = window / N;
  sp.z.resize(N);
  sp.vhat.assign(N, 0.0);
  sp.uhat.assign(N, 0.0);
  sp.what.assign(N, 0.0);
  fftw_complex* a = fftw_alloc_complex(N);
  fftw_complex* b = fftw_alloc_complex(N);
  fftw_plan plan = fftw_plan_dft_1d(N, a, a, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_plan planw = fftw_plan_dft_1d(N, b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
  for (int i = 0; i < N; ++i) {
    const int k = i - N / 2;
    const double z = k * dz;
    sp.z[i] = z;
    cplx uh = 0.0, wh = 0.0, vh = 0.0;
    if (std::abs(z) <= Z) {
      const Scaled v = bump_vhat(s, z);
      vh = v.rel(ref);
      uh = (v * frame(cplx(z, 0.0), L).H).rel(ref);
      wh = (v * h_derivative_on_line(s.pair, s.gamma, z, d) * what_prefactor(s, z)).rel(ref);
    }
    sp.vhat[i] = vh;
    sp.uhat[i] = uh;
    sp.what[i] = wh;
    const int idx = (k + N) % N;
    const cplx ph = std::polar(1.0, z * t0);
    const cplx ua = uh * ph, wa = wh * ph;
    a[idx][0] = ua.real();
    a[idx][1] = ua.imag();
    b[idx][0] = wa.real();
    b[idx][1] = wa.imag();
  }
  fftw_execute(plan);
  fftw_execute(planw);
  const double c = dz / std::sqrt(2.0 * pi);
  sp.t.resize(N);
  sp.u_time.resize(N);
  sp.w_time.resize(N);
  double umax = 0.0, imax = 0.0, inside = 0.0, outside = 0.0;
  for (int j = 0; j < N; ++j) {
    const double t = t0 + j * sp.dt;
    const cplx u = c * cplx(a[j][0], a[j][1]);
    sp.t[j] = t;
    sp.u_time[j] = u.real();
    sp.w_time[j] = c * cplx(b[j][0], b[j][1]);
    umax = std::max(umax, std::abs(u));
    imax = std::max(imax, std::abs(u.imag()));
    const double m = std::norm(u);
    if (t < -1e-12 * s.T || t > s.T * (1 + 1e-12))
      outside += m;
    else
      inside += m;
  }
  fftw_destroy_plan(plan);
  fftw_destroy_plan(planw);
  fftw_free(a);
  fftw_free(b);
  sp.imag_rel = umax > 0 ? imax / umax : 0.0;
  sp.outside_mass_rel = (inside + outside) > 0 ? outside / (inside + outside) : 0.0;
  double hmax = 0.0, hdef = 0.0;
  for (int i = 1; i < N; ++i) {
    const int m = N - i;  // index of -z_i
    hmax = std::max(hmax, std::abs(sp.uhat[i]));
    hdef = std::max(hdef, std::abs(sp.uhat[m] - std::conj(sp.uhat[i])));
  }
  sp.hermitian_defect = hmax > 0 ? hdef / hmax : 0.0;
  if (sp.outside_mass_rel > opt.leak_tol)
    throw SupportLeak("control mass outside [0, T]: " + std::to_string(sp.outside_mass_rel));
  return sp;
}

std::vector<double> control_on_nodes(const SpectrumTriple& sp, double T, int nt) {
  std::vector<double> out(nt + 1);
  const double t0 = sp.t.front();
  for (int i = 0; i <= nt; ++i) {
    const double t = T * i / nt;
    const double x = (t - t0) / sp.dt;
    const int j = std::clamp(int(std::floor(x)), 0, int(sp.t.size()) - 2);
    const double f = x - j;
    out[i] = (1 - f) * sp.u_time[j] + f * sp.u_time[j + 1];
  }
  return out;
}

namespace {

struct Integrands {
  const ControlSpec& s;
  cplx cE;      // E or F
  int d;
  double ref = 0.0;

  // Non-oscillatory part of the I integrand and |what|^2, both times e^{-ref}.
  std::pair<cplx, double> operator()(double z) const {
    const CriticalPair& pr = s.pair;
    const Scaled c0 = ctilde(s.nu, s.beta, z), c1 = ctilde(s.nu, s.beta, z - pr.p);
    const EtaArray eta = eta_triple(pr).eta;
    const KernelParts k = kernel_parts(eta, pr.p, pr.L, z);
    const Scaled prod = c0 * conj(c1);
    const Scaled ker = Scaled{k.S_rel / (k.Xi * k.Xit), k.s}.normalized();
    const cplx fi = std::polar(1.0, -s.beta * pr.p) / cE * (2.0 * prod.m.real()) * ker.m *
                    std::exp(prod.s + ker.s - ref);
    const Scaled h = h_derivative_on_line(pr, s.gamma, z, d);
    const double lw = 2.0 * std::log(std::abs(what_prefactor(s, z))) + std::log(2.0) +
                      2.0 * c0.log_abs() + 2.0 * h.log_abs() - ref;
    return {fi, std::exp(lw)};
  }

  double log_w(double z) const {
    const Scaled c0 = ctilde(s.nu, s.beta, z);
    const Scaled h = h_derivative_on_line(s.pair, s.gamma, z, d);
    return 2.0 * std::log(std::abs(what_prefactor(s, z))) + std::log(2.0) + 2.0 * c0.log_abs() +
           2.0 * h.log_abs();
  }
};

cplx sign_constant(const ControlSpec& s) {
  const UnreachableData u = constants(s.pair);
  const cplx c = s.caseN == 1 ? u.E : u.F;
  if (std::abs(c) < 1e-12)
    throw CaseError(s.caseN == 1 ? "E vanishes for this pair" : "F vanishes for this pair");
  return c;
}

// Points closer than this to a root collision are interpolated from outside.
constexpr double kBridge = 1e-2;

template <class F>
struct Bridged {
  const F& f;
  std::vector<double> centers;

  std::pair<cplx, double> operator()(double z) const {
    for (double c : centers)
      if (std::abs(z - c) < kBridge) return interpolate(z, c);
    return f(z);
  }

  std::pair<cplx, double> interpolate(double z, double c) const {
    static const double offs[8] = {-0.026, -0.021, -0.016, -0.012, 0.012, 0.016, 0.021, 0.026};
    std::pair<cplx, double> vals[8];
    for (int i = 0; i < 8; ++i) vals[i] = f(c + offs[i]);
    cplx a = 0.0;
    double b = 0.0;
    for (int i = 0; i < 8; ++i) {
      double w = 1.0;
      for (int j = 0; j < 8; ++j)
        if (j != i) w *= (z - c - offs[j]) / (offs[i] - offs[j]);
      a += w * vals[i].first;
      b += w * vals[i].second;
    }
    return {a, b};
  }
};

void finish(IntegralResult& r, const ControlSpec& s) {
  r.ratio_re = r.I.real() / r.w_norm2;
  r.ratio_im_T = r.I.imag() / (s.T * r.w_norm2);
}

}  // namespace

IntegralResult integral_I(const ControlSpec& s, const IntegralOptions& opt) {
  Integrands f{s, sign_constant(s), derivative_order(s)};
  double lmax;
  const auto [lo, hi] =
      envelope_range([&](double z) { return f.log_w(z); }, std::log(1e-28), lmax);
  f.ref = lmax;
  const double p = s.pair.p;
  Bridged<Integrands> g{f, {kCollision, -kCollision, p + kCollision, p - kCollision}};

  IntegralResult r;
  r.log_ref = lmax;
  r.zeta_max = std::max(-lo, hi);
  cplx prevI = 0.0;
  double prevW = 0.0;
  for (int n = opt.min_intervals; n <= opt.max_intervals; n *= 2) {
    const double h = (hi - lo) / n;
    std::vector<double> wr(n + 1), wi(n + 1), ww(n + 1), w13(n + 1), w23(n + 1);
    for (int i = 0; i <= n; ++i) {
      const double zeta = lo + h * i;
      const double z = zeta * zeta * zeta, jac = 3.0 * zeta * zeta;
      const auto [fi, fw] = g(z);
      wr[i] = jac * fi.real();
      wi[i] = jac * fi.imag();
      ww[i] = jac * fw;
      w13[i] = ww[i] * std::pow(1.0 + std::abs(z), -1.0 / 3.0);
      w23[i] = ww[i] * std::pow(1.0 + std::abs(z), -2.0 / 3.0);
    }
    r.I = cplx(simpson(wr, h), simpson(wi, h));
    r.w_norm2 = simpson(ww, h);
    r.frac13 = simpson(w13, h) / r.w_norm2;
    r.frac23 = simpson(w23, h) / r.w_norm2;
    r.points = n + 1;
    if (n > opt.min_intervals) {
      r.refinement_change =
          std::max(std::abs(r.I - prevI) / std::abs(r.I), std::abs(r.w_norm2 - prevW) / r.w_norm2);
      if (r.refinement_change < opt.rtol) break;
    }
    prevI = r.I;
    prevW = r.w_norm2;
  }
  finish(r, s);
  return r;
}

IntegralResult integral_I_brute(const ControlSpec& s, double Z, int n) {
  if (n % 2) ++n;
  Integrands f{s, sign_constant(s), derivative_order(s)};
  double lmax;
  envelope_range([&](double z) { return f.log_w(z); }, std::log(1e-28), lmax);
  f.ref = lmax;
  const CriticalPair& pr = s.pair;
  const EtaArray eta = eta_triple(pr).eta;
  auto full = [&](double z) -> std::pair<cplx, double> {
    const Scaled v0 = bump_vhat1(s.nu, s.beta, z), v1 = bump_vhat1(s.nu, s.beta, z - pr.p);
    const KernelParts k = kernel_parts(eta, pr.p, pr.L, z);
    const Scaled ker = Scaled{k.S_rel / (k.Xi * k.Xit), k.s}.normalized();
    const cplx fi = std::polar(1.0, -s.beta * pr.p) / f.cE * (v0 * v1 * ker).rel(lmax);
    if (v0.zero()) return {fi, 0.0};
    const Scaled hd = h_derivative_on_line(pr, s.gamma, z, f.d);
    const double lw = 2.0 * std::log(std::abs(what_prefactor(s, z))) + 2.0 * v0.log_abs() +
                      2.0 * hd.log_abs() - lmax;
    return {fi, std::exp(lw)};
  };
  struct Full {
    const decltype(full)& g;
    std::pair<cplx, double> operator()(double z) const { return g(z); }
  } fw{full};
  Bridged<Full> g{fw, {kCollision, -kCollision, pr.p + kCollision, pr.p - kCollision}};
  const double h = 2.0 * Z / n;
  std::vector<double> wr(n + 1), wi(n + 1), ww(n + 1);
  for (int i = 0; i <= n; ++i) {
    const auto [fi, fwv] = g(-Z + h * i);
    wr[i] = fi.real();
    wi[i] = fi.imag();
    ww[i] = fwv;
  }
  IntegralResult r;
  r.log_ref = lmax;
  r.I = cplx(simpson(wr, h), simpson(wi, h));
  r.w_norm2 = simpson(ww, h);
  r.points = n + 1;
  finish(r, s);
  return r;
}

namespace {

// |uhat_k|^2 and xi_k of the zero extension, padded; returns dxi.
double padded_spectrum(const std::vector<double>& u, double dt, std::vector<double>& xi,
                       std::vector<double>& pw) {
  const int n = int(u.size());
  int M = 1024;
  while (M < 8 * n) M *= 2;
  double* in = fftw_alloc_real(M);
  fftw_complex* out = fftw_alloc_complex(M / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(M, in, out, FFTW_ESTIMATE);
  std::fill(in, in + M, 0.0);
  std::copy(u.begin(), u.end(), in);
  fftw_execute(plan);
  const double c = dt / std::sqrt(2.0 * pi);
  const double dxi = 2.0 * pi / (M * dt);
  xi.resize(M / 2 + 1);
  pw.resize(M / 2 + 1);
  for (int k = 0; k <= M / 2; ++k) {
    const double mult = (k == 0 || k == M / 2) ? 1.0 : 2.0;  // +-xi folded together
    xi[k] = k * dxi;
    pw[k] = mult * c * c * (out[k][0] * out[k][0] + out[k][1] * out[k][1]);
  }
  fftw_destroy_plan(plan);
  fftw_free(in);
  fftw_free(out);
  return dxi;
}

}  // namespace

SobolevNorm fractional_norm(const std::vector<double>& u, double s, double T) {
  if (u.size() < 2) throw DomainError("need at least two samples");
  if (s < -2 || s > 2) throw DomainError("order must lie in [-2, 2]");
  const double dt = T / double(u.size() - 1);
  std::vector<double> xi, pw;
  const double dxi = padded_spectrum(u, dt, xi, pw);
  double sum = 0.0;
  for (size_t k = 0; k < xi.size(); ++k) sum += std::pow(1.0 + xi[k] * xi[k], s) * pw[k];
  return {s, std::sqrt(sum * dxi)};
}

double dilation_ratio(const std::vector<double>& w, double T, double alpha) {
  const double dt = T / double(w.size() - 1);
  std::vector<double> xi, pw;
  const double dxi = padded_spectrum(w, dt, xi, pw);
  double num = 0.0, l2 = 0.0;
  for (size_t k = 0; k < xi.size(); ++k) num += std::pow(1.0 + xi[k], -alpha) * pw[k];
  for (double v : w) l2 += v * v;
  return num * dxi / (std::pow(T, alpha) * l2 * dt);
}

double dilation_constant(double alpha) { return 1.0 + 1.0 / (pi * (1.0 - alpha)); }

const std::vector<Interpolation>& interpolation_inequalities() {
  static const std::vector<Interpolation> v = {
      {3, 7, 4, 7, 0.0, -2.0 / 3.0, 0.5},
      {5, 7, 2, 7, -1.0 / 3.0, -2.0 / 3.0, 0.5},
      {7, 13, 6, 13, 0.0, -1.0, 7.0 / 6.0},
      {9, 13, 4, 13, -1.0 / 3.0, -1.0, 7.0 / 6.0},
  };
  return v;
}

}  // namespace kdv
