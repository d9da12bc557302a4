#include <doctest.h>

#include <random>

#include "kdvcrit/numerics.hpp"
#include "kdvcrit/unreachable.hpp"

using namespace kdv;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

TEST_CASE("eta triples") {
  for (const auto& pr : enumerate_pairs(20)) {
    const EtaTriple e = eta_triple(pr);
    const cplx target = std::exp(-2.0 * pi * I1 * double(2 * pr.k + pr.l) / 3.0);
    for (const auto& x : e.eta) {
      CHECK(x.real() == 0.0);
      CHECK(std::abs(x * x * x + x - I1 * pr.p) <= 1e-12 * (1 + std::norm(x) * std::abs(x)));
      CHECK(std::abs(std::exp(x * pr.L) - target) <= 1e-12);
    }
    CHECK(std::abs(e.eta[0] + e.eta[1] + e.eta[2]) <= 1e-13);
    CHECK(std::abs(eta_moment(e, 0)) <= 1e-13);
    CHECK(std::abs(eta_moment(e, 1)) <= 1e-12);
    const double g = std::abs(eta_moment(e, 2));
    CHECK(std::abs(eta_moment(e, 3)) <= 1e-12 * std::max(1.0, g));
    CHECK(std::abs(eta_moment(e, 4) + eta_moment(e, 2)) <= 1e-12 * std::max(1.0, g));
  }
  // 2k + l = 5: exp(eta_1 L) = exp(2 pi i / 3).
  CHECK(std::abs(std::exp(eta_triple(make_pair(2, 1)).eta[0] * make_pair(2, 1).L) - std::polar(1.0, 2 * pi / 3)) < 1e-13);
  CHECK(std::abs(std::exp(eta_triple(make_pair(1, 1)).eta[0] * 2.0 * pi) - 1.0) < 1e-13);
}

TEST_CASE("phi and Psi") {
  std::mt19937_64 rng(5);
  for (auto [k, l] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {4, 1}, {6, 5}, {9, 1}}) {
    const CriticalPair pr = make_pair(k, l);
    const EtaTriple e = eta_triple(pr);
    const double s = std::abs(eta_moment(e, 2)) + 1.0;
    CHECK(std::abs(phi(e, 0.0)) <= 1e-13 * s);
    CHECK(std::abs(phi(e, pr.L)) <= 1e-12 * s);
    CHECK(std::abs(phi(e, 0.0, 1)) <= 1e-12 * s);
    CHECK(std::abs(phi(e, pr.L, 1)) <= 1e-11 * s);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      const double t = 10.0 * U(rng), x = pr.L * U(rng);
      CHECK(std::abs(psi_residual(e, t, x)) <= 1e-10 * s * s);
      CHECK(std::abs(psi(e, t, x) - std::exp(-I1 * t * pr.p) * phi(e, x)) <= 1e-14 * s);
    }
  }
  // (1,1): phi = 2i(cos x - 1).
  const EtaTriple e = eta_triple(make_pair(1, 1));
  for (double x : linspace(0.0, 2 * pi, 17)) CHECK(std::abs(phi(e, x) - 2.0 * I1 * (std::cos(x) - 1.0)) < 1e-13);
}

TEST_CASE("Gamma = Lambda and the E dichotomy over all pairs with k <= 20") {
  for (const auto& pr : enumerate_pairs(20)) {
    const UnreachableData u = constants(pr);
    const cplx closed = gamma_closed_form(pr);
    CHECK(closed == cplx(0.0, -8.0 * pi * pi * pi / (pr.L * pr.L * pr.L) * pr.k * pr.l * (pr.k + pr.l)));
    CHECK(rel(u.Gamma, closed) <= 1e-12);
    CHECK(rel(u.Lambda, closed) <= 1e-12);
    if (pr.caseE0) {
      CHECK(std::abs(u.E) < 1e-12);
      const cplx f = -I1 * pr.p * pr.L * (2.0 * u.Gamma + u.Lambda) / 27.0;
      CHECK(std::abs(u.E1 - f) <= 1e-12 * std::max(1.0, std::abs(f)));
      CHECK(std::abs(u.F - f) <= 1e-12 * std::max(1.0, std::abs(f)));
      CHECK(std::abs(u.F + u.Gamma * I1 * pr.p * pr.L * u.exp_eta1L / 9.0) <= 1e-12 * std::max(1.0, std::abs(f)));
    } else {
      CHECK(std::abs(u.E) > 1e-3 * std::abs(u.Gamma));
    }
    // Formulas through (Gamma, Lambda) against the substituted closed form.
    const UnreachableData s = constants_substituted(pr);
    for (auto [a, b] : {std::pair{u.E, s.E}, {u.E1, s.E1}, {u.F, s.F}, {u.F1, s.F1}})
      CHECK(std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(u.Gamma)));
  }
  const UnreachableData one = constants(make_pair(1, 1));
  CHECK(std::abs(one.E) < 1e-15);
  CHECK(std::abs(one.F) < 1e-15);
  const UnreachableData four = constants(make_pair(4, 1));
  CHECK(std::abs(four.E) < 1e-12);
  CHECK(std::abs(four.F) > 1e-4);
}

TEST_CASE("E1 over E") {
  for (const auto& pr : enumerate_pairs(20)) {
    if (pr.caseE0) {
      CHECK_THROWS_AS(e1_over_e(pr), CaseError);
      continue;
    }
    const cplx r = e1_over_e(pr);
    const cplx e = std::exp(eta_triple(pr).eta[0] * pr.L);
    const double sgn = std::abs(e - std::polar(1.0, 2 * pi / 3)) < 1e-9 ? 1.0 : -1.0;
    const double pL = pr.p * pr.L;
    const cplx want(-1.0 / 3.0 + sgn * std::sqrt(3.0) * pL / 18.0, -pL / 6.0);
    CHECK(std::abs(r - want) <= 1e-10);
    CHECK(std::abs(r.imag() + pL / 6.0) <= 1e-12);
    CHECK(std::abs(e1_over_e_closed_form(pr) - want) <= 1e-12);
  }
  // 2k + l = 8 sits on the plus branch.
  const CriticalPair p32 = make_pair(3, 2);
  CHECK(std::abs(std::exp(eta_triple(p32).eta[0] * p32.L) - std::polar(1.0, 2 * pi / 3)) < 1e-12);
}

TEST_CASE("phi integrals against quadrature") {
  for (auto [k, l] : std::vector<std::pair<int, int>>{{2, 1}, {3, 2}, {5, 1}}) {
    const CriticalPair pr = make_pair(k, l);
    const EtaTriple e = eta_triple(pr);
    const cplx sq = integrate_gk([&](double x) { return phi(e, x) * phi(e, x); }, 0.0, pr.L, 1e-14);
    const double ab = integrate_gk_real([&](double x) { return std::norm(phi(e, x)); }, 0.0, pr.L, 1e-14);
    CHECK(std::abs(phi_square_integral(e) - sq) <= 1e-11 * ab);
    CHECK(phi_abs2_integral(e) == doctest::Approx(ab).epsilon(1e-11));
  }
}

TEST_CASE("Re and Im of c Psi are orthogonal with equal norms; the norm is conserved") {
  const CriticalPair pr = make_pair(3, 1);
  const EtaTriple e = eta_triple(pr);
  const cplx c(0.3, -1.1);
  double n0 = -1.0;
  for (double t : linspace(0.0, 2 * pi / pr.p, 9)) {
    auto f1 = [&](double x) { return (c * psi(e, t, x)).real(); };
    auto f2 = [&](double x) { return (c * psi(e, t, x)).imag(); };
    const double a = integrate_gk_real([&](double x) { return f1(x) * f1(x); }, 0, pr.L, 1e-14);
    const double b = integrate_gk_real([&](double x) { return f2(x) * f2(x); }, 0, pr.L, 1e-14);
    const double ab = integrate_gk_real([&](double x) { return f1(x) * f2(x); }, 0, pr.L, 1e-14);
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
    CHECK(std::abs(ab) <= 1e-10 * a);
    if (n0 < 0) n0 = a;
    CHECK(a == doctest::Approx(n0).epsilon(1e-10));
  }
}

TEST_CASE("M_N basis") {
  for (std::int64_t N : {3, 7, 13, 49, 91}) {
    const LengthClass c = representations(N);
    const MNBasis B = mn_basis(c, 2048);
    CHECK(int(B.basis.size()) == c.dimMN);
    CHECK(B.rank == c.dimMN);
    CHECK(B.richardson_change <= 1e-8);
    CHECK(B.gram.rows() == c.dimMN);
  }
  // L = 2 pi: the direction 1 - cos x lies in the span.
  const MNBasis B = mn_basis(representations(3), 512);
  const auto& v = B.basis[0];
  double vv = 0, vw = 0, ww = 0;
  for (size_t i = 0; i < B.x.size(); ++i) {
    const double w = 1.0 - std::cos(B.x[i]);
    vv += v[i] * v[i];
    vw += v[i] * w;
    ww += w * w;
  }
  CHECK(std::sqrt(std::max(0.0, 1.0 - vw * vw / (vv * ww))) <= 1e-8);
  CHECK_THROWS_AS(mn_basis(representations(91), 16), ResolutionError);
}
