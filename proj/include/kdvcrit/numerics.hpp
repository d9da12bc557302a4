#pragma once

#include <array>
#include <functional>
#include <vector>

#include "kdvcrit/common.hpp"

namespace kdv {

// Truncated Taylor series c0 + c1 d + c2 d^2 + c3 d^3.
struct Jet {
  std::array<cplx, 4> c{};
  Jet() = default;
  Jet(cplx a) { c[0] = a; }
  Jet(cplx a, cplx b, cplx d2, cplx d3) : c{a, b, d2, d3} {}
};
Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, cplx s);
Jet operator/(const Jet& a, const Jet& b);
// exp(a - shift), keeping the constant part explicit.
Jet exp_shifted(const Jet& a, double shift);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
// Slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

double trapezoid(const std::vector<double>& f, double h);
cplx trapezoid(const std::vector<cplx>& f, double h);
// Composite Simpson; needs an even number of intervals.
double simpson(const std::vector<double>& f, double h);

// Adaptive Gauss-Kronrod (boost) for a complex integrand.
cplx integrate_gk(const std::function<cplx(double)>& f, double a, double b, double tol = 1e-13,
                  int depth = 20);
double integrate_gk_real(const std::function<double(double)>& f, double a, double b,
                         double tol = 1e-13, int depth = 20);

// Composite 30-point Gauss-Legendre on n equal panels.
cplx integrate_panels(const std::function<cplx(double)>& f, double a, double b, int n);

std::vector<double> linspace(double a, double b, int n);

}  // namespace kdv
