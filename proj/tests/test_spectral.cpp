#include <doctest.h>

#include <algorithm>
#include <random>

#include "kdvcrit/numerics.hpp"
#include "kdvcrit/spectral.hpp"

using namespace kdv;

namespace {

// Durand-Kerner iteration for l^3 + l + iz, independent of the eigenvalue route.
Roots dk_roots(cplx z) {
  Roots r = {cplx(0.4, 0.9), cplx(0.4, 0.9) * cplx(0.4, 0.9), cplx(0.4, 0.9) * cplx(0.4, 0.9) * cplx(0.4, 0.9)};
  const double s = std::max(1.0, std::cbrt(std::abs(z)));
  for (auto& x : r) x *= s;
  for (int it = 0; it < 500; ++it)
    for (int i = 0; i < 3; ++i) {
      cplx den = 1.0;
      for (int j = 0; j < 3; ++j)
        if (j != i) den *= r[i] - r[j];
      r[i] -= (r[i] * r[i] * r[i] + r[i] + I1 * z) / den;
    }
  return r;
}

double set_distance(Roots a, Roots b) {
  double worst = 0.0;
  for (const auto& x : a) {
    double best = 1e300;
    for (const auto& y : b) best = std::min(best, std::abs(x - y));
    worst = std::max(worst, best);
  }
  return worst;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("roots at z = 0") {
  const Roots r = roots(0.0);
  CHECK(set_distance(r, {cplx(0, 0), cplx(0, 1), cplx(0, -1)}) < 1e-15);
}

TEST_CASE("roots: residual, Vieta and an independent solver") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double mag = std::pow(10.0, 6.0 * (0.5 * U(rng) + 0.5));
    const cplx z = i % 2 ? cplx(mag * U(rng), 0.0) : cplx(mag * U(rng), 10.0 * U(rng));
    const Roots r = roots(z);
    const double tol = 1e-12 * (1.0 + std::abs(z));
    for (const auto& l : r) CHECK(cubic_residual(l, z) <= tol);
    CHECK(std::abs(r[0] + r[1] + r[2]) <= tol);
    CHECK(std::abs(r[0] * r[1] + r[1] * r[2] + r[2] * r[0] - 1.0) <= tol);
    CHECK(std::abs(r[0] * r[1] * r[2] + I1 * z) <= tol);
    CHECK(set_distance(r, dk_roots(z)) <= 1e-9 * (1.0 + std::cbrt(std::abs(z))));
  }
}

TEST_CASE("roots are sorted by real part for real z") {
  for (double z : linspace(-50.0, 50.0, 401)) {
    const Roots r = roots(z);
    CHECK(r[0].real() <= r[1].real());
    CHECK(r[1].real() <= r[2].real());
  }
}

TEST_CASE("large-z roots follow the cube-root directions") {
  const Roots r = roots(1e6);
  const cplx mu3 = std::polar(1.0, -pi / 6.0);
  CHECK(std::abs(r[2] - (mu3 * 100.0 - 1.0 / (3.0 * mu3 * 100.0))) <= 1e-8);
  CHECK(std::abs(asymptotic_roots(1e6, 1)[2] - mu3 * 100.0) < 1e-12);
  CHECK(std::abs(mu_directions()[1] - I1) < 1e-15);
  CHECK_THROWS_AS(asymptotic_roots(0.0, 1), DomainError);
  CHECK_THROWS_AS(asymptotic_roots(1.0, 4), DomainError);
}

TEST_CASE("asymptotic error ratio scales like z^(-2/3)") {
  std::vector<double> zs, ratio;
  for (double z = 1e3; z <= 1e6; z *= 2.0) {
    const Roots ex = roots(z), a1 = asymptotic_roots(z, 1), a2 = asymptotic_roots(z, 2);
    double e1 = 0, e2 = 0;
    for (int j = 0; j < 3; ++j) {
      e1 = std::max(e1, std::abs(ex[j] - a1[j]));
      e2 = std::max(e2, std::abs(ex[j] - a2[j]));
    }
    zs.push_back(z);
    ratio.push_back(e2 / e1);
  }
  // The z^{-1} correction vanishes, so the second-order error is O(z^{-5/3}).
  CHECK(loglog_slope(zs, ratio) == doctest::Approx(-4.0 / 3.0).epsilon(0.03));
}

TEST_CASE("shifted roots are conjugates of roots at z - p") {
  const double p = 0.2077;
  for (double z : {-30.0, -1.0, 0.1, 0.5, 2.0, 1e4}) {
    const Roots t = shifted_roots(z, p);
    for (const auto& m : t) CHECK(std::abs(m * m * m + m - I1 * (z - p)) <= 1e-12 * (1 + std::abs(z)));
    Roots c = roots(z - p);
    for (auto& x : c) x = std::conj(x);
    CHECK(set_distance(t, c) < 1e-13 * (1 + std::abs(z)));
  }
  const Roots a = asymptotic_shifted_roots(1e6, p, 3), e = shifted_roots(1e6, p);
  CHECK(set_distance(a, e) < 1e-9);
}

TEST_CASE("H(0) vanishes at L = 2 pi") {
  const SpectralFrame f = frame(0.0, 2.0 * pi);
  CHECK(std::abs(f.H.value()) < 1e-13);
  CHECK(std::abs(f.Xi) > 1.0);
  CHECK(std::abs(frame(0.0, 5.0).H.value()) > 1e-3);
}

TEST_CASE("G and H do not depend on root order") {
  for (cplx z : {cplx(0.3, 0.0), cplx(3.0, 0.5), cplx(-40.0, 0.0), cplx(500.0, -1.0), cplx(2e4, 0.0)}) {
    Roots r = roots(z);
    const SpectralFrame f0 = frame_from_roots(z, 7.0, r);
    std::sort(r.begin(), r.end(), [](cplx a, cplx b) { return a.imag() < b.imag(); });
    do {
      const SpectralFrame f = frame_from_roots(z, 7.0, r);
      CHECK(rel(f.G.value(), f0.G.value()) <= 1e-13);
      CHECK(rel(f.H.value(), f0.H.value()) <= 1e-13);
    } while (std::next_permutation(r.begin(), r.end(), [](cplx a, cplx b) { return a.imag() < b.imag(); }));
  }
}

TEST_CASE("divided differences keep G and H continuous at root collisions") {
  const double zc = 2.0 / (3.0 * std::sqrt(3.0));
  const double L = 5.0;
  const SpectralFrame c = frame(zc, L);
  CHECK(c.divided_difference);
  for (double d : {1e-3, 1e-4}) {
    const SpectralFrame a = frame(zc - d, L), b = frame(zc + d, L);
    CHECK(std::abs(0.5 * (a.H.value() + b.H.value()) - c.H.value()) <= 10 * d * d * std::abs(c.H.value()) + 1e-12);
    CHECK(std::abs(0.5 * (a.G.value() + b.G.value()) - c.G.value()) <= 10 * d * d * std::abs(c.G.value()) + 1e-12);
  }
  CHECK(std::abs(dd1_exp(0.5, 0.5, 2.0) - 2.0 * std::exp(1.0)) < 1e-14);
}

TEST_CASE("|H| against its leading asymptotic magnitude") {
  const auto mu = mu_directions();
  const double L = 2.0 * pi * std::sqrt(7.0 / 3.0);
  std::vector<double> zs, err;
  for (double z = 1e3; z <= 1e6; z *= 2.0) {
    const SpectralFrame f = frame(z, L);
    const double lead = -(f.lambda[0] * L).real() - std::log(std::abs((mu[1] - mu[0]) * (mu[2] - mu[0]))) -
                        2.0 / 3.0 * std::log(z);
    zs.push_back(z);
    err.push_back(std::abs(std::expm1(f.H.log_abs() - lead)));
  }
  CHECK(loglog_slope(zs, err) <= -0.6);
}

TEST_CASE("y_hat: boundary values, scaled vs plain, and the x-derivative") {
  const double L = 5.3;
  const cplx u = cplx(0.7, -0.2);
  for (cplx z : {cplx(0.9, 0.0), cplx(-12.0, 0.0), cplx(200.0, 0.0), cplx(1000.0, 0.0), cplx(30.0, 1.0)}) {
    CHECK(std::abs(y_hat(z, 0.0, u, L)) < 1e-12);
    CHECK(std::abs(y_hat(z, L, u, L)) < 1e-12 * std::max(1.0, std::abs(y_hat(z, 0.5 * L, u, L))));
    CHECK(std::abs(y_hat(z, 1.0, 0.0, L)) == 0.0);
    const Roots l = roots(z);
    for (double x : {0.5, 2.0, 4.9}) {
      cplx num = 0.0, den = 0.0;
      for (int j = 0; j < 3; ++j) {
        num += (std::exp(l[(j + 1) % 3] * L) - std::exp(l[j] * L)) * std::exp(l[(j + 2) % 3] * x);
        den += (l[(j + 1) % 3] - l[j]) * std::exp(-l[(j + 2) % 3] * L);
      }
      CHECK(rel(y_hat(z, x, u, L), u * num / den) <= 1e-12);
    }
    const double h = 1e-4;
    const cplx fd = (-3.0 * y_hat(z, 0.0, u, L) + 4.0 * y_hat(z, h, u, L) - y_hat(z, 2 * h, u, L)) / (2 * h);
    const SpectralFrame f = frame(z, L);
    const cplx formula = u * (f.P / f.detQ).value();
    CHECK(std::abs(fd - formula) <= 1e-6 * std::abs(formula) * std::max(1.0, std::norm(l[2])));
    CHECK(rel(dx_y_hat0(z, u, L), formula) <= 1e-12);
  }
  CHECK_THROWS_AS(y_hat(1.0, -0.1, 1.0, L), DomainError);
}

TEST_CASE("H derivatives from the Taylor jets match finite differences") {
  const double L = 6.1;
  const cplx z0(3.0, 0.7);
  const auto T = h_taylor(z0, L);
  CHECK(rel(T[0].value(), frame(z0, L).H.value()) <= 1e-12);
  const double h = 1e-3;
  auto H = [&](cplx z) { return frame(z, L).H.value(); };
  const cplx d1 = (H(z0 + h) - H(z0 - h)) / (2 * h);
  const cplx d2 = (H(z0 + h) - 2.0 * H(z0) + H(z0 - h)) / (h * h);
  const cplx d3 = (H(z0 + 2 * h) - 2.0 * H(z0 + h) + 2.0 * H(z0 - h) - H(z0 - 2 * h)) / (2 * h * h * h);
  CHECK(rel(T[1].value(), d1) <= 1e-6);
  CHECK(rel(T[2].value(), d2) <= 1e-5);
  CHECK(rel(T[3].value(), d3) <= 1e-4);
}

TEST_CASE("Paley-Wiener check") {
  const double T = 1.0, L = 4.0;
  const auto zero = paley_wiener_check(std::vector<double>(101, 0.0), T, L, 50.0, 201);
  CHECK(zero.bounded);
  for (const auto& l : zero.lines) CHECK(l.C_u == 0.0);
  const auto ind = paley_wiener_check(std::vector<double>(401, 1.0), T, L, 50.0, 201);
  CHECK(ind.bounded);
  // |hat 1_[0,T]| <= T / sqrt(2 pi) on the real line, attained at z = 0.
  CHECK(ind.lines[1].C_u == doctest::Approx(T / std::sqrt(2.0 * pi)).epsilon(1e-6));
  // On Im z = +-1 the transform is bounded by its L1 norm scale times e^{T}.
  CHECK(ind.lines[0].C_u <= T / std::sqrt(2.0 * pi) * 1.0001);
  CHECK(ind.lines[2].C_u <= T / std::sqrt(2.0 * pi) * 1.0001);
}
