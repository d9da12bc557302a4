#include "kdvcrit/unreachable.hpp"

#include "kdvcrit/numerics.hpp"

namespace kdv {

namespace {

bool close_rel(cplx a, cplx b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

// (e^{aL} - 1)/a with its limit L at a = 0.
cplx exp_integral(cplx a, double L) {
  if (std::abs(a) * L < 1e-3) {
    const cplx w = a * L;
    return L * (1.0 + w / 2.0 + w * w / 6.0 + w * w * w / 24.0 + w * w * w * w / 120.0);
  }
  return expm1c(a * L) / a;
}

}  // namespace

EtaTriple eta_triple(const CriticalPair& pr) {
  EtaTriple e;
  e.pair = pr;
  e.p = pr.p;
  const double L = pr.L;
  e.eta[0] = -I1 * (2.0 * pi / (3.0 * L)) * double(2 * pr.k + pr.l);
  e.eta[1] = e.eta[0] + I1 * (2.0 * pi / L) * double(pr.k);
  e.eta[2] = e.eta[1] + I1 * (2.0 * pi / L) * double(pr.l);
  for (const auto& h : e.eta) {
    const double r = std::abs(h * h * h + h - I1 * pr.p);
    if (r > 1e-10) throw InvariantViolation("eta does not solve eta^3 + eta = ip");
  }
  return e;
}

cplx phi(const EtaTriple& e, double x, int deriv) {
  cplx s = 0.0;
  for (int j = 0; j < 3; ++j) {
    const cplx a = e.eta[(j + 2) % 3];
    s += (e.eta[(j + 1) % 3] - e.eta[j]) * std::pow(a, deriv) * std::exp(a * x);
  }
  return s;
}

cplx psi(const EtaTriple& e, double t, double x) { return std::exp(-I1 * t * e.p) * phi(e, x); }

cplx psi_residual(const EtaTriple& e, double t, double x) {
  const cplx ph = std::exp(-I1 * t * e.p);
  return ph * (-I1 * e.p * phi(e, x) + phi(e, x, 1) + phi(e, x, 3));
}

cplx eta_moment(const EtaTriple& e, int m) {
  cplx s = 0.0;
  for (int j = 0; j < 3; ++j) s += (e.eta[(j + 1) % 3] - e.eta[j]) * std::pow(e.eta[(j + 2) % 3], m);
  return s;
}

cplx gamma_closed_form(const CriticalPair& pr) {
  const double L = pr.L;
  return -I1 * (8.0 * pi * pi * pi / (L * L * L)) * double(pr.k) * double(pr.l) *
         double(pr.k + pr.l);
}

namespace {

void fill_EF(UnreachableData& d, cplx G, cplx Lam) {
  const double p = d.eta.p, L = d.eta.pair.L;
  const cplx e = d.exp_eta1L;
  const cplx ipL = I1 * p * L;
  const cplx mix = -2.0 * G / 3.0 - Lam / 3.0;
  d.E = (e - 1.0) * mix / 3.0;
  d.F = 2.0 / 27.0 * (Lam - G) * (e - 1.0) + ipL * e * mix / 9.0;
  d.E1 = -(1.0 + ipL) * d.E / 3.0 + d.F;
  const cplx tail = 2.0 * (G - Lam) / (3.0 * (2.0 * G + Lam));
  d.F1 = d.F * (-2.0 / 3.0 - ipL / 6.0 + tail);
  d.F1_published = d.F * (-2.0 / 3.0 - ipL / 3.0 + tail);
}

}  // namespace

UnreachableData constants(const CriticalPair& pr) {
  UnreachableData d;
  d.eta = eta_triple(pr);
  const auto& h = d.eta.eta;
  d.exp_eta1L = std::exp(h[0] * pr.L);
  // 2k+l divisible by 3 makes eta_1 L a multiple of 2 pi i exactly.
  if (pr.caseE0) d.exp_eta1L = 1.0;
  d.Gamma = eta_moment(d.eta, 2);
  bool direct = pr.p != 0.0;
  for (const auto& x : h) direct = direct && std::abs(x) > 1e-14;
  if (direct) {
    cplx s = 0.0;
    for (int j = 0; j < 3; ++j) s += (h[(j + 1) % 3] - h[j]) / h[(j + 2) % 3];
    d.Lambda = I1 * pr.p * s;
  } else {
    // ip/eta = eta^2 + 1 on the roots; this form survives eta = 0.
    cplx s = 0.0;
    for (int j = 0; j < 3; ++j) s += (h[(j + 1) % 3] - h[j]) * (h[(j + 2) % 3] * h[(j + 2) % 3] + 1.0);
    d.Lambda = s;
  }
  fill_EF(d, d.Gamma, d.Lambda);

  const cplx g = gamma_closed_form(pr);
  if (!close_rel(d.Gamma, g, 1e-10) || !close_rel(d.Lambda, g, 1e-10))
    throw InvariantViolation("Gamma = Lambda closed form violated");
  const bool e_zero = std::abs(d.E) < 1e-12;
  if (e_zero != pr.caseE0) throw InvariantViolation("E = 0 does not match 3 | 2k+l");
  return d;
}

UnreachableData constants_substituted(const CriticalPair& pr) {
  UnreachableData d;
  d.eta = eta_triple(pr);
  d.exp_eta1L = pr.caseE0 ? cplx(1.0) : std::exp(d.eta.eta[0] * pr.L);
  d.Gamma = d.Lambda = gamma_closed_form(pr);
  const cplx g = d.Gamma, e = d.exp_eta1L, ipL = I1 * pr.p * pr.L;
  d.E = -(e - 1.0) * g / 3.0;
  d.F = -g / 9.0 * ipL * e;
  d.E1 = -(1.0 + ipL) * d.E / 3.0 + d.F;
  d.F1 = d.F * (-2.0 / 3.0 - ipL / 6.0);
  d.F1_published = d.F * (-2.0 / 3.0 - ipL / 3.0);
  return d;
}

cplx e1_over_e(const CriticalPair& pr) {
  if (pr.caseE0) throw CaseError("E vanishes when 3 divides 2k+l");
  const auto d = constants(pr);
  return d.E1 / d.E;
}

cplx e1_over_e_closed_form(const CriticalPair& pr) {
  if (pr.caseE0) throw CaseError("E vanishes when 3 divides 2k+l");
  const double pL = pr.p * pr.L;
  // exp(eta_1 L) = exp(-2 pi i (2k+l)/3): residue 2 gives exp(2 pi i/3), residue 1 exp(4 pi i/3)
  const int r = (2 * pr.k + pr.l) % 3;
  const double sgn = (r == 2) ? 1.0 : -1.0;
  return cplx(-1.0 / 3.0 + sgn * std::sqrt(3.0) / 18.0 * pL, -pL / 6.0);
}

cplx phi_square_integral(const EtaTriple& e) {
  cplx s = 0.0;
  for (int j = 0; j < 3; ++j)
    for (int m = 0; m < 3; ++m) {
      const cplx cj = e.eta[(j + 1) % 3] - e.eta[j], cm = e.eta[(m + 1) % 3] - e.eta[m];
      s += cj * cm * exp_integral(e.eta[(j + 2) % 3] + e.eta[(m + 2) % 3], e.pair.L);
    }
  return s;
}

double phi_abs2_integral(const EtaTriple& e) {
  cplx s = 0.0;
  for (int j = 0; j < 3; ++j)
    for (int m = 0; m < 3; ++m) {
      const cplx cj = e.eta[(j + 1) % 3] - e.eta[j], cm = e.eta[(m + 1) % 3] - e.eta[m];
      s += cj * std::conj(cm) *
           exp_integral(e.eta[(j + 2) % 3] + std::conj(e.eta[(m + 2) % 3]), e.pair.L);
    }
  return s.real();
}

namespace {

Eigen::MatrixXd gram_of(const std::vector<std::vector<double>>& b, int stride, double h) {
  const int m = int(b.size());
  Eigen::MatrixXd G(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j) {
      std::vector<double> f;
      for (size_t q = 0; q < b[i].size(); q += stride) f.push_back(b[i][q] * b[j][q]);
      G(i, j) = G(j, i) = simpson(f, h * stride);
    }
  return G;
}

}  // namespace

MNBasis mn_basis(const LengthClass& cls, int n) {
  if (n < 4 || n % 4) throw DomainError("mn_basis needs n divisible by 4");
  MNBasis B;
  B.cls = cls;
  const double L = cls.L, h = L / n;
  double fmax = 0.0;
  for (const auto& pr : cls.pairs)
    for (const auto& x : eta_triple(pr).eta) fmax = std::max(fmax, std::abs(x));
  // Richardson uses every other node, so the coarse grid must also resolve.
  if (fmax > 0 && (2.0 * pi / fmax) / (2.0 * h) < 16.0)
    throw ResolutionError("grid has fewer than 16 points per period");
  B.x = linspace(0.0, L, n + 1);
  for (const auto& pr : cls.pairs) {
    const auto e = eta_triple(pr);
    std::vector<double> re(n + 1), im(n + 1);
    for (int i = 0; i <= n; ++i) {
      const cplx v = phi(e, B.x[i]);
      re[i] = v.real();
      im[i] = v.imag();
    }
    if (pr.p != 0.0) {
      B.basis.push_back(re);
      B.basis.push_back(im);
    } else {
      // One of Re, Im vanishes identically when k = l; keep the other.
      double nr = 0, ni = 0;
      for (int i = 0; i <= n; ++i) {
        nr += re[i] * re[i];
        ni += im[i] * im[i];
      }
      const double small = std::min(nr, ni), big = std::max(nr, ni);
      if (small > 1e-20 * big) throw InvariantViolation("degenerate profile has two components");
      B.basis.push_back(nr > ni ? re : im);
    }
  }
  B.gram = gram_of(B.basis, 1, h);
  const Eigen::MatrixXd coarse = gram_of(B.basis, 2, h);
  B.richardson_change = (B.gram - coarse).cwiseAbs().maxCoeff() / B.gram.cwiseAbs().maxCoeff();
  if (B.richardson_change > 1e-8) throw ResolutionError("Gram matrix not converged under halving");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B.gram);
  const auto& s = svd.singularValues();
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > 1e-10 * s(0)) ++B.rank;
  return B;
}

}  // namespace kdv
