#include "kdvcrit/numerics.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace kdv {

Jet operator+(const Jet& a, const Jet& b) {
  Jet r;
  for (int i = 0; i < 4; ++i) r.c[i] = a.c[i] + b.c[i];
  return r;
}
Jet operator-(const Jet& a, const Jet& b) {
  Jet r;
  for (int i = 0; i < 4; ++i) r.c[i] = a.c[i] - b.c[i];
  return r;
}
Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; i + j < 4; ++j) r.c[i + j] += a.c[i] * b.c[j];
  return r;
}
Jet operator*(const Jet& a, cplx s) {
  Jet r;
  for (int i = 0; i < 4; ++i) r.c[i] = a.c[i] * s;
  return r;
}
Jet operator/(const Jet& a, const Jet& b) {
  Jet q;
  for (int i = 0; i < 4; ++i) {
    cplx s = a.c[i];
    for (int j = 1; j <= i; ++j) s -= b.c[j] * q.c[i - j];
    q.c[i] = s / b.c[0];
  }
  return q;
}
Jet exp_shifted(const Jet& a, double shift) {
  // exp(a0 - shift) * exp(a1 d + a2 d^2 + a3 d^3)
  const cplx e0 = std::exp(a.c[0] - shift);
  const cplx a1 = a.c[1], a2 = a.c[2], a3 = a.c[3];
  Jet r;
  r.c[0] = e0;
  r.c[1] = e0 * a1;
  r.c[2] = e0 * (a2 + a1 * a1 / 2.0);
  r.c[3] = e0 * (a3 + a1 * a2 + a1 * a1 * a1 / 6.0);
  return r;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(std::abs(y[i])));
  }
  return fit_line(lx, ly).slope;
}

double trapezoid(const std::vector<double>& f, double h) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * h;
}
cplx trapezoid(const std::vector<cplx>& f, double h) {
  if (f.size() < 2) return 0.0;
  cplx s = 0.5 * (f.front() + f.back());
  for (size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * h;
}

double simpson(const std::vector<double>& f, double h) {
  const size_t n = f.size() - 1;
  if (n < 2 || n % 2) throw DomainError("simpson needs an even number of intervals");
  double s = f.front() + f.back();
  for (size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
  return s * h / 3.0;
}

cplx integrate_gk(const std::function<cplx(double)>& f, double a, double b, double tol, int depth) {
  using boost::math::quadrature::gauss_kronrod;
  auto re = [&](double t) { return f(t).real(); };
  auto im = [&](double t) { return f(t).imag(); };
  // Real and imaginary parts are integrated separately; the cost doubles but
  // boost's complex support needs an error estimate per component anyway.
  double r = gauss_kronrod<double, 31>::integrate(re, a, b, depth, tol);
  double i = gauss_kronrod<double, 31>::integrate(im, a, b, depth, tol);
  return {r, i};
}

double integrate_gk_real(const std::function<double(double)>& f, double a, double b, double tol,
                         int depth) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate(f, a, b, depth, tol);
}

cplx integrate_panels(const std::function<cplx(double)>& f, double a, double b, int n) {
  using G = boost::math::quadrature::gauss<double, 30>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  cplx s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double lo = a + (b - a) * i / n, hi = a + (b - a) * (i + 1) / n;
    const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
    cplx t = 0.0;
    for (size_t k = 0; k < x.size(); ++k) {
      if (x[k] == 0.0)
        t += w[k] * f(c);
      else
        t += w[k] * (f(c - r * x[k]) + f(c + r * x[k]));
    }
    s += r * t;
  }
  return s;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace kdv
