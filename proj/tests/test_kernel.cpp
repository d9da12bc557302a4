#include <doctest.h>

#include <random>

#include "kdvcrit/kernel.hpp"
#include "kdvcrit/numerics.hpp"

using namespace kdv;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

// B(z, x) straight from its definition, without any scaling; fine for |z| <= 1e3.
struct PlainB {
  CriticalPair pr;
  EtaArray eta;
  Roots lam, lamt;
  PlainB(const CriticalPair& p, double z) : pr(p), eta(eta_triple(p).eta), lam(roots(z)), lamt(roots(z - p.p)) {
    for (auto& v : lamt) v = std::conj(v);
  }
  cplx factor(const Roots& l, double x) const {
    const double L = pr.L;
    cplx num = 0.0, den = 0.0;
    for (int j = 0; j < 3; ++j) {
      num += (std::exp(l[(j + 1) % 3] * L) - std::exp(l[j] * L)) * std::exp(l[(j + 2) % 3] * x);
      den += (l[(j + 1) % 3] - l[j]) * std::exp(-l[(j + 2) % 3] * L);
    }
    return num / den;
  }
  cplx operator()(double x) const {
    cplx phx = 0.0;
    for (int n = 0; n < 3; ++n) phx += (eta[(n + 1) % 3] - eta[n]) * eta[(n + 2) % 3] * std::exp(eta[(n + 2) % 3] * x);
    return factor(lam, x) * factor(lamt, x) * phx;
  }
};

}  // namespace

TEST_CASE("closed form against plain quadrature of the definition") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(std::log(10.0), std::log(1e3));
  for (auto [k, l] : std::vector<std::pair<int, int>>{{2, 1}, {3, 1}, {3, 2}, {4, 1}, {5, 3}}) {
    const CriticalPair pr = make_pair(k, l);
    for (int i = 0; i < 6; ++i) {
      const double z = (i % 2 ? -1.0 : 1.0) * std::exp(U(rng));
      cplx closed;
      try {
        closed = intB_closed(pr, z);
      } catch (const NearPole&) {
        continue;
      }
      // Gauss panels of about half an oscillation period; doubling confirms convergence.
      const PlainB B(pr, z);
      const int n = int(std::ceil((4.0 * std::cbrt(std::abs(z)) + 2.0) * pr.L / pi));
      const cplx q = integrate_panels(B, 0.0, pr.L, n);
      CHECK(rel(q, integrate_panels(B, 0.0, pr.L, 2 * n)) <= 1e-10);
      CHECK(rel(closed, q) <= 1e-9);
      const double x = pr.L * 0.37;
      CHECK(rel(B_eval(pr, z, x), B(x)) <= 1e-11);
    }
  }
  const CriticalPair p21 = make_pair(2, 1);
  CHECK(rel(intB_closed(p21, 1e3), intB_quadrature(p21, 1e3)) <= 1e-9);
}

TEST_CASE("conjugation symmetry") {
  for (auto [k, l] : std::vector<std::pair<int, int>>{{2, 1}, {4, 1}, {5, 2}}) {
    const CriticalPair pr = make_pair(k, l);
    auto eta = eta_triple(pr).eta;
    EtaArray neg = {-eta[0], -eta[1], -eta[2]};
    for (double z : dyadic_grid(10.0, 1e5, 1)) {
      const cplx a = intB_closed(pr, -z);
      const cplx b = std::conj(intB_general(neg, -pr.p, pr.L, z));
      CHECK(rel(a, b) <= 1e-12);
      const cplx ba = B_eval(pr, -z, 1.3);
      const cplx bb = std::conj(B_eval_general(neg, -pr.p, pr.L, z, 1.3));
      CHECK(rel(ba, bb) <= 1e-12);
    }
  }
}

TEST_CASE("exp ratio branch") {
  const double L = 3.0;
  CHECK(exp_ratio(0.0, L) == cplx(L, 0.0));
  for (double arg : {0.0, 0.7, 1.9, -2.5}) {
    const cplx dir = std::polar(1.0, arg);
    const cplx a = dir * ((kSeriesSwitch - 1e-9) / L), b = dir * ((kSeriesSwitch + 1e-9) / L);
    // The two sides straddle the switch; remove the smooth change L^2/2 + a L^3/3 before comparing.
    const cplx mid = 0.5 * (a + b);
    const cplx jump = exp_ratio(b, L) - exp_ratio(a, L) - (b - a) * (L * L / 2.0 + mid * L * L * L / 3.0);
    CHECK(std::abs(jump) < 1e-12 * std::abs(exp_ratio(a, L)));
    const cplx c = dir * (0.5 / L);
    CHECK(rel(exp_ratio(c, L), (std::exp(c * L) - 1.0) / c) < 1e-14);
  }
}

TEST_CASE("decay of intB") {
  // |intB| z^{4/3} stays bounded when E != 0 and |intB| z^2 when E = 0.
  for (auto [k, l] : std::vector<std::pair<int, int>>{{2, 1}, {4, 1}}) {
    const CriticalPair pr = make_pair(k, l);
    const double pw = pr.caseE0 ? 2.0 : 4.0 / 3.0;
    double lo = 1e300, hi = 0.0;
    for (double z : dyadic_grid(10.0, 1e6, 2)) {
      double v;
      try {
        v = std::abs(intB_closed(pr, z)) * std::pow(1.0 + z, pw);
      } catch (const NearPole&) {
        continue;
      }
      if (z >= 1e3) lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(std::isfinite(hi));
    CHECK(hi / lo < 10.0);
  }
}

TEST_CASE("expansion slopes for every pair with k <= 6") {
  for (const auto& pr : enumerate_pairs(6)) {
    CAPTURE(pr.k);
    CAPTURE(pr.l);
    const AsymptoticReport r = verify_expansion(pr);
    CHECK(r.excluded.size() < r.z_grid.size() / 4);
    if (pr.p == 0.0) {
      // F = F1 = 0 and the kernel integral vanishes to rounding.
      CHECK(std::abs(r.c1) < 1e-15);
      for (double z : dyadic_grid(10.0, 1e6, 1))
        CHECK(std::abs(intB_closed(pr, z)) <= 1e-14 * std::abs(gamma_closed_form(pr)));
      continue;
    }
    const double w2 = pr.caseE0 ? 0.07 : 0.05;
    CHECK(std::abs(r.levels[0].slope - r.expected[0]) <= 0.05);
    CHECK(std::abs(r.levels[1].slope - r.expected[1]) <= w2);
    // Remainder after two terms: |r2| z^{-e3} must not grow from one decade to the next.
    const double e1 = r.expected[0], e2 = r.expected[1], e3 = r.expected[2];
    auto scaled = [&](double z) {
      const cplx v = intB_closed(pr, z) - r.c1 * std::pow(z, e1) - r.c2 * std::pow(z, e2);
      return std::abs(v) * std::pow(z, -e3);
    };
    double m4 = 0.0, m5 = 0.0;
    for (double z : dyadic_grid(1e4, 1e5, 4)) m4 = std::max(m4, scaled(z));
    for (double z : dyadic_grid(1e5, 1e6, 4)) m5 = std::max(m5, scaled(z));
    CHECK(m5 <= 1.5 * m4);
  }
  // Fitted third-level slopes on the regression window for the pairs the windows were set for.
  for (auto [k, l] : std::vector<std::pair<int, int>>{{2, 1}, {3, 1}, {3, 2}, {4, 1}, {5, 2}}) {
    const AsymptoticReport r = verify_expansion(make_pair(k, l));
    CHECK(r.levels[2].slope <= r.expected[2] + 0.1);
  }
  CHECK_THROWS_AS(verify_expansion(make_pair(2, 1), dyadic_grid(1e3, 4e3, 1)), DomainError);
}
