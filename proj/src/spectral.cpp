#include "kdvcrit/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>

#include "kdvcrit/numerics.hpp"

namespace kdv {

namespace {

void sort_roots(Roots& r) {
  std::sort(r.begin(), r.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
}

// Closest pair first: (a, b) nearly equal, c apart.
std::array<int, 3> collision_order(const Roots& l) {
  const double d01 = std::abs(l[0] - l[1]), d12 = std::abs(l[1] - l[2]),
               d02 = std::abs(l[0] - l[2]);
  if (d01 <= d12 && d01 <= d02) return {0, 1, 2};
  if (d12 <= d02) return {1, 2, 0};
  return {0, 2, 1};
}

// det[[1,1,1],[f],[g]] / Vandermonde from divided differences.
cplx det_over_xi(cplx fab, cplx fabc, cplx gab, cplx gabc) { return fab * gabc - fabc * gab; }

}  // namespace

double cubic_residual(cplx lam, cplx z) { return std::abs(lam * lam * lam + lam + I1 * z); }

Roots roots(cplx z) {
  Eigen::Matrix3cd C = Eigen::Matrix3cd::Zero();
  C(0, 1) = -1.0;
  C(0, 2) = -I1 * z;
  C(1, 0) = 1.0;
  C(2, 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(C, false);
  Roots r;
  for (int i = 0; i < 3; ++i) {
    cplx x = es.eigenvalues()(i);
    for (int it = 0; it < 2; ++it) {
      const cplx d = 3.0 * x * x + 1.0;
      if (std::abs(d) == 0.0) break;
      const cplx y = x - (x * x * x + x + I1 * z) / d;
      if (cubic_residual(y, z) < cubic_residual(x, z)) x = y;
    }
    r[i] = x;
  }
  sort_roots(r);
  return r;
}

Roots shifted_roots(cplx z, double p) {
  Roots r = roots(std::conj(z - p));
  for (auto& x : r) x = std::conj(x);
  sort_roots(r);
  return r;
}

Roots mu_directions() {
  Roots m;
  for (int j = 1; j <= 3; ++j) m[j - 1] = std::polar(1.0, -pi / 6.0 - 2.0 * j * pi / 3.0);
  return m;
}

Roots tilde_mu_directions() {
  Roots m;
  for (int j = 1; j <= 3; ++j) m[j - 1] = std::polar(1.0, pi / 6.0 + 2.0 * j * pi / 3.0);
  return m;
}

Roots asymptotic_roots(double z, int order) {
  if (!(z > 0)) throw DomainError("asymptotic roots need z > 0");
  if (order < 1 || order > 3) throw DomainError("order must be 1, 2 or 3");
  const auto mu = mu_directions();
  const double c = std::cbrt(z);
  Roots r;
  for (int j = 0; j < 3; ++j) {
    r[j] = mu[j] * c;
    if (order >= 2) r[j] -= 1.0 / (3.0 * mu[j] * c);
  }
  return r;
}

Roots asymptotic_shifted_roots(double z, double p, int order) {
  if (!(z > 0)) throw DomainError("asymptotic roots need z > 0");
  if (order < 1 || order > 3) throw DomainError("order must be 1, 2 or 3");
  const auto mu = tilde_mu_directions();
  const double c = std::cbrt(z);
  Roots r;
  for (int j = 0; j < 3; ++j) {
    r[j] = mu[j] * c;
    if (order >= 2) r[j] -= 1.0 / (3.0 * mu[j] * c);
    if (order >= 3) r[j] += -mu[j] * p / (3.0 * c * c) - p / (9.0 * mu[j] * c * c * c * c);
  }
  return r;
}

cplx dd1_exp(cplx a, cplx b, double L) {
  const cplx d = b - a;
  if (d == cplx(0.0, 0.0)) return L * std::exp(a * L);
  return std::exp(a * L) * expm1c(d * L) / d;
}

cplx dd2_exp(cplx a, cplx b, cplx c, double L) {
  return (dd1_exp(b, c, L) - dd1_exp(a, b, L)) / (c - a);
}

SpectralFrame frame_from_roots(cplx z, double L, const Roots& l) {
  if (!(L > 0)) throw DomainError("L must be positive");
  SpectralFrame f;
  f.z = z;
  f.L = L;
  f.lambda = l;
  f.Xi = (l[1] - l[0]) * (l[2] - l[1]) * (l[2] - l[0]);

  double sq = -1e300, sp = -1e300;
  for (int j = 0; j < 3; ++j) {
    sq = std::max(sq, (-l[j] * L).real());
    sp = std::max(sp, (l[j] * L).real());
  }
  cplx q = 0.0, pp = 0.0;
  double qmax = 0.0;
  for (int j = 0; j < 3; ++j) {
    const cplx t = (l[(j + 1) % 3] - l[j]) * std::exp(-l[(j + 2) % 3] * L - sq);
    q += t;
    qmax = std::max(qmax, std::abs(t));
    pp += l[j] * (std::exp(l[(j + 2) % 3] * L - sp) - std::exp(l[(j + 1) % 3] * L - sp));
  }
  f.detQ = Scaled{q, sq}.normalized();
  f.P = Scaled{pp, sp}.normalized();
  f.detQ_rel = qmax > 0 ? std::abs(q) / qmax : 0.0;

  if (std::abs(f.Xi) < 1e-6) {
    f.divided_difference = true;
    const auto o = collision_order(l);
    const cplx a = l[o[0]], b = l[o[1]], c = l[o[2]];
    const cplx fab = dd1_exp(a, b, L), fabc = dd2_exp(a, b, c, L);
    const cplx gab = std::exp(b * L) + a * fab;
    const cplx gabc = dd1_exp(b, c, L) + a * fabc;
    f.G = Scaled{-fabc, 0.0}.normalized();
    f.H = Scaled{det_over_xi(fab, fabc, gab, gabc), 0.0}.normalized();
  } else {
    f.G = f.P / f.Xi;
    f.H = f.detQ / f.Xi;
  }
  return f;
}

SpectralFrame frame(cplx z, double L) { return frame_from_roots(z, L, roots(z)); }

cplx y_hat(cplx z, double x, cplx u_hat, double L) {
  if (x < 0 || x > L) throw DomainError("x outside [0, L]");
  if (u_hat == cplx(0.0, 0.0)) return 0.0;
  const SpectralFrame f = frame(z, L);
  const auto& l = f.lambda;
  if (f.divided_difference) {
    const auto o = collision_order(l);
    const cplx a = l[o[0]], b = l[o[1]], c = l[o[2]];
    const cplx num = det_over_xi(dd1_exp(a, b, L), dd2_exp(a, b, c, L), dd1_exp(a, b, x),
                                 dd2_exp(a, b, c, x));
    const cplx H = f.H.value();
    if (std::abs(H) < 1e-12) throw NearPole("det Q vanishes near this z");
    return u_hat * num / H;
  }
  if (f.detQ_rel < 1e-10) throw NearPole("det Q vanishes near this z");
  double s = -1e300;
  for (int j = 0; j < 3; ++j)
    for (int i : {(j + 1) % 3, j}) s = std::max(s, (l[i] * L + l[(j + 2) % 3] * x).real());
  cplx num = 0.0;
  for (int j = 0; j < 3; ++j) {
    const cplx ex = l[(j + 2) % 3] * x;
    num += std::exp(l[(j + 1) % 3] * L + ex - s) - std::exp(l[j] * L + ex - s);
  }
  return u_hat * (Scaled{num, s}.normalized() / f.detQ).value();
}

cplx dx_y_hat0(cplx z, cplx u_hat, double L) {
  const SpectralFrame f = frame(z, L);
  if (!f.divided_difference && f.detQ_rel < 1e-10) throw NearPole("det Q vanishes near this z");
  return u_hat * (f.G / f.H).value();
}

std::array<Roots, 4> root_jets(cplx z0) {
  std::array<Roots, 4> J;
  J[0] = roots(z0);
  for (int j = 0; j < 3; ++j) {
    const cplx l0 = J[0][j];
    const cplx D = 3.0 * l0 * l0 + 1.0;
    if (std::abs(D) < 1e-8) throw RootDerivativeSingular("3 lambda^2 + 1 vanishes");
    const cplx a1 = -I1 / D;
    const cplx a2 = -3.0 * l0 * a1 * a1 / D;
    const cplx a3 = -(6.0 * l0 * a1 * a2 + a1 * a1 * a1) / D;
    J[1][j] = a1;
    J[2][j] = a2;
    J[3][j] = a3;
  }
  return J;
}

std::array<Scaled, 4> h_taylor(cplx z0, double L) {
  const auto R = root_jets(z0);
  std::array<Jet, 3> lam;
  for (int j = 0; j < 3; ++j) lam[j] = Jet(R[0][j], R[1][j], R[2][j], R[3][j]);
  double s = -1e300;
  for (int j = 0; j < 3; ++j) s = std::max(s, (-R[0][j] * L).real());
  Jet q;
  for (int j = 0; j < 3; ++j)
    q = q + (lam[(j + 1) % 3] - lam[j]) * exp_shifted(lam[(j + 2) % 3] * cplx(-L), s);
  const Jet xi = (lam[1] - lam[0]) * (lam[2] - lam[1]) * (lam[2] - lam[0]);
  const Jet h = q / xi;
  std::array<Scaled, 4> out;
  const double fact[4] = {1, 1, 2, 6};
  for (int d = 0; d < 4; ++d) out[d] = Scaled{h.c[d] * fact[d], s}.normalized();
  return out;
}

PaleyWienerReport paley_wiener_check(const std::vector<double>& u, double T, double L,
                                     double zmax, int nz) {
  PaleyWienerReport rep;
  const int n = int(u.size());
  if (n < 2) return rep;
  const double dt = T / (n - 1);
  for (double c : {-1.0, 0.0, 1.0}) {
    PaleyWienerLine line;
    line.c = c;
    for (int k = 0; k < nz; ++k) {
      const double x = -zmax + 2.0 * zmax * k / (nz - 1);
      const cplx z(x, c);
      cplx uh = 0.0;
      for (int i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        uh += w * u[i] * std::exp(-I1 * z * (i * dt));
      }
      uh *= dt / std::sqrt(2.0 * pi);
      const double damp = std::exp(-T * std::abs(c));
      line.C_u = std::max(line.C_u, std::abs(uh) * damp);
      const SpectralFrame f = frame(z, L);
      if (!f.divided_difference && f.detQ_rel < 1e-8) {
        ++line.poles_skipped;
        continue;
      }
      const cplx v = uh * (f.G / f.H).value();
      line.C_uGH = std::max(line.C_uGH, std::abs(v) * damp);
    }
    line.finite = std::isfinite(line.C_u) && std::isfinite(line.C_uGH);
    rep.bounded = rep.bounded && line.finite;
    rep.lines.push_back(line);
  }
  return rep;
}

}  // namespace kdv
