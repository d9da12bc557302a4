#include <doctest.h>

#include <random>

#include "kdvcrit/numerics.hpp"
#include "kdvcrit/synthesis.hpp"

using namespace kdv;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("control parameters") {
  const ControlSpec s = make_spec(make_pair(3, 2), 0.4, 1.0);
  CHECK(s.beta == doctest::Approx(0.2));
  CHECK(s.nu == doctest::Approx(1.617 / std::sqrt(0.2)).epsilon(1e-14));
  CHECK(s.nu_sq_published == doctest::Approx(5.223 / 0.4));
  CHECK(s.caseN == 1);
  CHECK(make_spec(make_pair(4, 1), 0.4, 1.0).caseN == 2);
  CHECK(make_spec(make_pair(3, 2), 0.4, 1.0, 2).caseN == 2);
  CHECK_THROWS_AS(make_spec(make_pair(3, 2), -1.0), DomainError);
  CHECK_THROWS_AS(make_spec(make_pair(3, 2), 0.4, 0.0), DomainError);
  CHECK(nu_for_beta(0.2) == doctest::Approx(s.nu));
}

TEST_CASE("bump transform: contour value against the real segment") {
  for (double nu : {1.0, 3.6, 8.0})
    for (double w : {0.0, 0.3, 2.0, 9.0, 25.0, 40.0}) {
      const cplx a = bump_half(nu, w).value();
      const cplx b = bump_half_direct(nu, w);
      // Only the contour part is returned; the vertical leg from 0 is purely imaginary.
      CHECK(std::abs(a.real() - b.real()) <= 1e-11 * std::abs(b));
    }
}

TEST_CASE("vhat_1 is real, even, and matches a direct cosine transform") {
  const double nu = 4.0, beta = 0.3;
  for (double z : {0.0, 1.0, 7.5, 30.0, 120.0}) {
    const cplx a = bump_vhat1(nu, beta, z).value(), b = bump_vhat1(nu, beta, -z).value();
    CHECK(std::abs(a.imag()) <= 1e-14 * std::abs(a) + 1e-300);
    CHECK(rel(a, b) <= 1e-13);
    auto f = [&](double t) -> cplx {
      const double s = t - 1.0;
      return std::abs(s) < 1 ? std::exp(-nu / (1 - s * s)) * std::cos(beta * z * s) : 0.0;
    };
    const double d = integrate_panels(f, 0.0, 2.0, 128).real();
    CHECK(std::abs(d - integrate_panels(f, 0.0, 2.0, 64).real()) <= 1e-14 * std::exp(-nu));
    CHECK(std::abs(a.real() - d) <= 1e-12 * std::max(std::abs(d), 1e-3 * std::exp(-nu)));
  }
  ControlSpec s = make_spec(make_pair(2, 1), 2.0 * beta, 1.0);
  s.nu = nu;
  for (double z : {0.5, -3.0, 17.0}) {
    const cplx v = bump_vhat(s, z).value();
    const cplx v1 = bump_vhat1(nu, beta, z).value();
    CHECK(rel(v, std::exp(-I1 * beta * z) * v1) <= 1e-12);
  }
}

TEST_CASE("H derivatives on the shifted line against finite differences") {
  const CriticalPair pr = make_pair(2, 1);
  const double g = 1.0, h = 1e-3;
  for (double z : {-4.0, 0.5, 6.0}) {
    auto H = [&](double x) { return frame(cplx(x, g), pr.L).H.value(); };
    const cplx d1 = (H(z - 2 * h) - 8.0 * H(z - h) + 8.0 * H(z + h) - H(z + 2 * h)) / (12 * h);
    const cplx d3 = (H(z + 2 * h) - 2.0 * H(z + h) + 2.0 * H(z - h) - H(z - 2 * h)) / (2 * h * h * h);
    CHECK(rel(h_derivative_on_line(pr, g, z, 1).value(), d1) <= 1e-8);
    CHECK(rel(h_derivative_on_line(pr, g, z, 3).value(), d3) <= 1e-4);
  }
}

TEST_CASE("integral I: smart quadrature against the brute-force oracle") {
  const ControlSpec s = make_spec(make_pair(2, 1), 3.0);
  const IntegralResult a = integral_I(s);
  const double Z = a.zeta_max * a.zeta_max * a.zeta_max;
  const IntegralResult b = integral_I_brute(s, Z, 20001);
  const cplx ia = a.I * std::exp(a.log_ref - b.log_ref);
  CHECK(rel(ia, b.I) <= 1e-6);
  CHECK(a.w_norm2 > 0.0);
  CHECK(a.refinement_change <= 1e-6);
  CHECK(a.I.imag() < 0.0);
}

TEST_CASE("fractional norms") {
  const int n = 801;
  const double T = 1.3;
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) {
    const double t = i * T / (n - 1), s = 2 * t / T - 1;
    u[i] = std::abs(s) < 1 ? std::exp(-1 / (1 - s * s)) * (1 + std::sin(9 * t)) : 0.0;
  }
  double sum = 0.0;
  for (double v : u) sum += v * v;
  const double dt = T / (n - 1);
  CHECK(fractional_norm(u, 0.0, T).value == doctest::Approx(std::sqrt(dt * sum)).epsilon(1e-10));
  double prev = 0.0;
  for (double s : {-1.0, -2.0 / 3.0, -1.0 / 3.0, 0.0, 0.5, 1.0}) {
    const double v = fractional_norm(u, s, T).value;
    CHECK(v > prev);
    prev = v;
  }
  CHECK_THROWS_AS(fractional_norm(u, 3.0, T), DomainError);
}

TEST_CASE("dilation ratio stays under its constant") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> N(0.0, 1.0);
  for (double alpha : {1.0 / 3.0, 2.0 / 3.0})
    for (double T : {0.05, 1.0, 4.0}) {
      std::vector<double> w(1025);
      for (double& v : w) v = N(rng);
      CHECK(dilation_ratio(w, T, alpha) <= dilation_constant(alpha));
      std::fill(w.begin(), w.end(), 1.0);
      CHECK(dilation_ratio(w, T, alpha) <= dilation_constant(alpha));
    }
}

TEST_CASE("interpolation exponents") {
  for (const auto& q : interpolation_inequalities()) {
    CHECK(q.num_a * q.den_b + q.num_b * q.den_a == q.den_a * q.den_b);
    const double a = double(q.num_a) / q.den_a, b = double(q.num_b) / q.den_b;
    CHECK(a * q.s_a + b * q.s_b == doctest::Approx(q.s_left).scale(1.0));
  }
}

TEST_CASE("steering spectrum for (1,1)") {
  const ControlSpec s = make_spec(make_pair(1, 1), 1.5);
  const SpectrumTriple sp = steering_spectrum(s);
  CHECK(sp.outside_mass_rel <= 1e-6);
  CHECK(sp.imag_rel <= 1e-10);
  CHECK(sp.hermitian_defect <= 1e-12);
  // Time reversal about T/2 maps the even bump to itself.
  const auto u = control_on_nodes(sp, s.T, 400);
  REQUIRE(u.size() == 401);
  CHECK(std::abs(u.front()) <= 1e-6 * *std::max_element(u.begin(), u.end()));
}
