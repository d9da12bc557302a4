#include "kdvcrit/kernel.hpp"

#include <algorithm>

#include "kdvcrit/numerics.hpp"

namespace kdv {

cplx exp_ratio(cplx a, double L) {
  const cplx w = a * L;
  if (std::abs(w) < kSeriesSwitch) {
    return L * (1.0 + w / 2.0 + w * w / 6.0 + w * w * w / 24.0 + w * w * w * w / 120.0);
  }
  return expm1c(w) / a;
}

namespace {

struct ExpTerm {
  cplx coef;
  cplx b;  // constant part of the exponent, already shifted
  cplx a;  // rate in x
};

// The six terms of sum_j (e^{l_{j+1}L} - e^{l_j L}) e^{l_{j+2} x}, shifted by s.
std::array<ExpTerm, 6> numerator_terms(const Roots& l, double L, double s) {
  std::array<ExpTerm, 6> t;
  for (int j = 0; j < 3; ++j) {
    t[2 * j] = {1.0, l[(j + 1) % 3] * L - s, l[(j + 2) % 3]};
    t[2 * j + 1] = {-1.0, l[j] * L - s, l[(j + 2) % 3]};
  }
  return t;
}

// sum_j (l_{j+1} - l_j) e^{-l_{j+2} L}, shifted by its dominant exponent.
cplx denominator(const Roots& l, double L, double& s, double& rel) {
  s = -1e300;
  for (int j = 0; j < 3; ++j) s = std::max(s, (-l[j] * L).real());
  cplx d = 0.0;
  double m = 0.0;
  for (int j = 0; j < 3; ++j) {
    const cplx t = (l[(j + 1) % 3] - l[j]) * std::exp(-l[(j + 2) % 3] * L - s);
    d += t;
    m = std::max(m, std::abs(t));
  }
  rel = m > 0 ? std::abs(d) / m : 0.0;
  return d;
}

cplx vandermonde(const Roots& l) { return (l[1] - l[0]) * (l[2] - l[1]) * (l[2] - l[0]); }

// int_0^L e^{b + a x} dx without forming large intermediates.
cplx integrate_term(cplx b, cplx a, double L) {
  if (std::abs(a) * L < kSeriesSwitch) return std::exp(b) * exp_ratio(a, L);
  return (std::exp(b + a * L) - std::exp(b)) / a;
}

}  // namespace

KernelParts kernel_parts(const EtaArray& eta, double p, double L, double z) {
  KernelParts k;
  k.lam = roots(cplx(z, 0.0));
  k.lamt = shifted_roots(cplx(z, 0.0), p);
  double r1, r2;
  k.D_rel = denominator(k.lam, L, k.sD, r1);
  k.Dt_rel = denominator(k.lamt, L, k.sDt, r2);
  k.pole_measure = std::min(r1, r2);
  k.Xi = vandermonde(k.lam);
  k.Xit = vandermonde(k.lamt);
  const auto f = numerator_terms(k.lam, L, k.sD);
  const auto g = numerator_terms(k.lamt, L, k.sDt);
  cplx S = 0.0;
  for (const auto& tf : f)
    for (const auto& tg : g)
      for (int n = 0; n < 3; ++n) {
        const cplx ce = (eta[(n + 1) % 3] - eta[n]) * eta[(n + 2) % 3];
        const cplx a = tf.a + tg.a + eta[(n + 2) % 3];
        S += tf.coef * tg.coef * ce * integrate_term(tf.b + tg.b, a, L);
      }
  k.S_rel = S;
  k.s = k.sD + k.sDt;
  return k;
}

cplx intB_general(const EtaArray& eta, double p, double L, double z) {
  const auto k = kernel_parts(eta, p, L, z);
  if (k.pole_measure < 1e-10) throw NearPole("kernel denominator vanishes near this z");
  return k.S_rel / (k.D_rel * k.Dt_rel);
}

cplx intB_closed(const CriticalPair& pr, double z) {
  return intB_general(eta_triple(pr).eta, pr.p, pr.L, z);
}

namespace {

struct BFactors {
  std::array<ExpTerm, 6> f, g;
  cplx d1, d2;
  EtaArray eta;

  BFactors(const EtaArray& e, double p, double L, double z) : eta(e) {
    const Roots lam = roots(cplx(z, 0.0)), lamt = shifted_roots(cplx(z, 0.0), p);
    double s1, s2, r1, r2;
    d1 = denominator(lam, L, s1, r1);
    d2 = denominator(lamt, L, s2, r2);
    if (std::min(r1, r2) < 1e-10) throw NearPole("kernel denominator vanishes near this z");
    f = numerator_terms(lam, L, s1);
    g = numerator_terms(lamt, L, s2);
  }

  cplx operator()(double x) const {
    cplx n1 = 0.0, n2 = 0.0, phx = 0.0;
    for (const auto& t : f) n1 += t.coef * std::exp(t.b + t.a * x);
    for (const auto& t : g) n2 += t.coef * std::exp(t.b + t.a * x);
    for (int n = 0; n < 3; ++n)
      phx += (eta[(n + 1) % 3] - eta[n]) * eta[(n + 2) % 3] * std::exp(eta[(n + 2) % 3] * x);
    return n1 / d1 * (n2 / d2) * phx;
  }
};

}  // namespace

cplx B_eval_general(const EtaArray& eta, double p, double L, double z, double x) {
  if (x < 0 || x > L) throw DomainError("x outside [0, L]");
  return BFactors(eta, p, L, z)(x);
}

cplx B_eval(const CriticalPair& pr, double z, double x) {
  return B_eval_general(eta_triple(pr).eta, pr.p, pr.L, z, x);
}

cplx intB_quadrature(const CriticalPair& pr, double z, double tol) {
  const auto eta = eta_triple(pr).eta;
  const auto lam = roots(cplx(z, 0.0));
  double rate = std::abs(eta[2]) + std::abs(eta[0]);
  for (const auto& x : lam) rate += 2.0 * std::abs(x);
  // Panels of about half a period; doubled until two passes agree.
  int n = std::max(4, int(std::ceil(rate * pr.L / pi)));
  const BFactors B(eta, pr.p, pr.L, z);
  auto f = [&](double x) { return B(x); };
  cplx prev = integrate_panels(f, 0.0, pr.L, n);
  for (int it = 0; it < 6; ++it) {
    n *= 2;
    const cplx cur = integrate_panels(f, 0.0, pr.L, n);
    if (std::abs(cur - prev) <= tol * std::abs(cur)) return cur;
    prev = cur;
  }
  return prev;
}

std::vector<double> dyadic_grid(double zmin, double zmax, int per_octave) {
  std::vector<double> g;
  for (int i = 0;; ++i) {
    const double z = zmin * std::exp2(double(i) / per_octave);
    if (z > zmax * (1 + 1e-12)) break;
    g.push_back(z);
  }
  return g;
}

AsymptoticReport verify_expansion(const CriticalPair& pr, const std::vector<double>& z_grid) {
  if (z_grid.size() < 8) throw DomainError("expansion check needs at least 8 grid points");
  AsymptoticReport rep;
  rep.pair = pr;
  rep.caseE0 = pr.caseE0;
  rep.z_grid = z_grid;
  const auto d = constants(pr);
  double e1, e2;
  if (!pr.caseE0) {
    rep.c1 = d.E;
    rep.c2 = d.E1;
    e1 = -4.0 / 3.0;
    e2 = -2.0;
    rep.expected = {-4.0 / 3.0, -2.0, -7.0 / 3.0};
  } else {
    rep.c1 = d.F;
    rep.c2 = d.F1;
    e1 = -2.0;
    e2 = -8.0 / 3.0;
    rep.expected = {-2.0, -8.0 / 3.0, -3.0};
  }
  std::array<std::vector<double>, 3> zs, rs;
  for (double z : z_grid) {
    cplx v;
    try {
      v = intB_closed(pr, z);
    } catch (const NearPole&) {
      rep.excluded.push_back(z);
      continue;
    }
    const cplx r0 = v, r1 = r0 - rep.c1 * std::pow(z, e1), r2 = r1 - rep.c2 * std::pow(z, e2);
    const cplx r[3] = {r0, r1, r2};
    for (int lv = 0; lv < 3; ++lv) {
      // Third level: double precision cancellation above 1e5.
      if (lv == 2 && z > 1e5 * (1 + 1e-12)) continue;
      if (std::abs(r[lv]) == 0.0) continue;
      zs[lv].push_back(z);
      rs[lv].push_back(std::abs(r[lv]));
    }
  }
  for (int lv = 0; lv < 3; ++lv) {
    auto& f = rep.levels[lv];
    f.points = int(zs[lv].size());
    if (f.points >= 2) {
      f.slope = loglog_slope(zs[lv], rs[lv]);
      f.zmin = zs[lv].front();
      f.zmax = zs[lv].back();
    } else {
      f.slope = -std::numeric_limits<double>::infinity();
    }
  }
  return rep;
}

AsymptoticReport verify_expansion(const CriticalPair& pr) {
  return verify_expansion(pr, dyadic_grid(1e3, 1e6, 2));
}

}  // namespace kdv
