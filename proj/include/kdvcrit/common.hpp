#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kdv {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I1{0.0, 1.0};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotCritical : Error { using Error::Error; };
struct NoPositiveFrequency : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct NearPole : Error { using Error::Error; };
struct InvariantViolation : Error { using Error::Error; };
struct CaseError : Error { using Error::Error; };
struct ResolutionError : Error { using Error::Error; };
struct LinearSolveFailure : Error { using Error::Error; };
struct FixedPointDiverged : Error { using Error::Error; };
struct NotReachable : Error { using Error::Error; };
struct SupportLeak : Error { using Error::Error; };
struct RootDerivativeSingular : Error { using Error::Error; };
struct UsageError : Error { using Error::Error; };

// Complex number stored as m * exp(s). Keeps quantities such as det Q,
// which grow like exp(0.87 L z^{1/3}), representable in double.
struct Scaled {
  cplx m{0.0, 0.0};
  double s = 0.0;

  static Scaled from_exp(cplx w) {
    return {std::polar(1.0, w.imag()), w.real()};
  }
  cplx value() const { return m * std::exp(s); }
  double log_abs() const { return std::log(std::abs(m)) + s; }
  bool zero() const { return m == cplx(0.0, 0.0); }
  Scaled normalized() const {
    double a = std::abs(m);
    if (a == 0.0 || !std::isfinite(a)) return *this;
    double e = std::log(a);
    return {m / a, s + e};
  }
  // Value rescaled to exp(ref) units: m * exp(s - ref).
  cplx rel(double ref) const { return m * std::exp(s - ref); }
};

inline Scaled operator*(const Scaled& a, const Scaled& b) {
  return Scaled{a.m * b.m, a.s + b.s}.normalized();
}
inline Scaled operator*(const Scaled& a, cplx c) {
  return Scaled{a.m * c, a.s}.normalized();
}
inline Scaled operator/(const Scaled& a, const Scaled& b) {
  return Scaled{a.m / b.m, a.s - b.s}.normalized();
}
inline Scaled operator/(const Scaled& a, cplx c) {
  return Scaled{a.m / c, a.s}.normalized();
}
inline Scaled operator+(const Scaled& a, const Scaled& b) {
  if (a.zero()) return b;
  if (b.zero()) return a;
  double s = std::max(a.s, b.s);
  return Scaled{a.rel(s) + b.rel(s), s}.normalized();
}
inline Scaled conj(const Scaled& a) { return {std::conj(a.m), a.s}; }

// exp(w) - 1 without cancellation for small |w|.
inline cplx expm1c(cplx w) {
  double x = w.real(), y = w.imag();
  double sh = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * sh * sh, std::exp(x) * std::sin(y)};
}

}  // namespace kdv
