#pragma once

#include <optional>
#include <vector>

#include "kdvcrit/kernel.hpp"
#include "kdvcrit/number_theory.hpp"

namespace kdv {

struct ControlSpec {
  CriticalPair pair;
  double T = 0.4;
  double beta = 0.2;   // T/2
  double nu = 0.0;     // 1.617 / sqrt(beta)
  double gamma = 1.0;
  int caseN = 1;       // 1: exp(eta_1 L) != 1, 2: exp(eta_1 L) = 1
  double nu_sq_published = 0.0;  // 5.223 / T, reported alongside nu^2
};

// gamma: fixed value, or scanned over {0.5, 1, 1.5, 2} when absent.
ControlSpec make_spec(const CriticalPair& pr, double T, std::optional<double> gamma = std::nullopt,
                      int case_override = 0);
double nu_for_beta(double beta);

// C(w) = int_0^1 exp(-nu/(1-s^2)) exp(-i w s) ds for real w, scaled.
Scaled bump_half(double nu, double w);
// Same integral by plain adaptive quadrature on the real segment (small |w| reference).
cplx bump_half_direct(double nu, double w);
// vhat(z) = int_0^2 exp(-nu/(1-(t-1)^2)) exp(-i beta t z) dt.
Scaled bump_vhat(const ControlSpec& s, double z);
// vhat_1(z) = exp(i beta z) vhat(z), real and even.
Scaled bump_vhat1(double nu, double beta, double z);

// d-th derivative of H at z + i gamma.
Scaled h_derivative_on_line(const CriticalPair& pr, double gamma, double z, int d);
// Smallest log|H^{(d)}(z + i gamma)| over the grid.
double min_log_h_derivative(const CriticalPair& pr, double gamma, int d,
                            const std::vector<double>& zs);

// what = k_w(z) vhat H^{(d)}_gamma
cplx what_prefactor(const ControlSpec& s, double z);

struct SpectrumTriple {
  std::vector<double> z;
  std::vector<cplx> vhat, uhat, what;
  std::vector<double> t;
  std::vector<double> u_time;
  std::vector<cplx> w_time;
  double outside_mass_rel = 0.0;  // of u outside [0, T]
  double imag_rel = 0.0;          // max |Im u| / max |u|
  double hermitian_defect = 0.0;  // max |uhat(-z) - conj uhat(z)| / max |uhat|
  double dt = 0.0;
  double Z = 0.0;
  double log_scale = 0.0;  // stored values are true values times exp(-log_scale)
};

struct SpectrumOptions {
  double window_factor = 8.0;  // reconstruction window in units of T
  int min_time_steps = 0;      // lower bound on samples inside [0, T]
  double cutoff = 1e-14;       // |uhat| relative cutoff defining Z
  double leak_tol = 1e-6;
};

SpectrumTriple steering_spectrum(const ControlSpec& s, const SpectrumOptions& opt = {});
// u sampled on [0, T] at nt+1 nodes by linear interpolation of the reconstruction.
std::vector<double> control_on_nodes(const SpectrumTriple& sp, double T, int nt);

struct IntegralResult {
  cplx I;                   // I (case 1) or J (case 2), times exp(-log_ref)
  double w_norm2 = 0.0;     // int |what|^2 dz, times exp(-log_ref)
  double log_ref = 0.0;
  double ratio_re = 0.0;    // Re I / int |w|^2
  double ratio_im_T = 0.0;  // Im I / (T int |w|^2)
  double frac13 = 0.0;      // int |what|^2 (1+|z|)^{-1/3} / int |what|^2
  double frac23 = 0.0;
  int points = 0;
  double refinement_change = 0.0;
  double zeta_max = 0.0;
};

struct IntegralOptions {
  int min_intervals = 1 << 12;
  int max_intervals = 1 << 16;
  double rtol = 1e-6;
};

IntegralResult integral_I(const ControlSpec& s, const IntegralOptions& opt = {});
// Reference: full oscillatory integrand on a uniform z grid over [-Z, Z].
IntegralResult integral_I_brute(const ControlSpec& s, double Z, int n);

struct SobolevNorm {
  double s = 0.0;
  double value = 0.0;
};
// Norm of the zero extension of samples u_i = u(i T/(n-1)) via padded FFT.
SobolevNorm fractional_norm(const std::vector<double>& u, double s, double T);

// int |what|^2 (1+|z|)^{-alpha} dz / (T^alpha int |w|^2) for samples on [0, T].
double dilation_ratio(const std::vector<double>& w, double T, double alpha);
// Constant valid for support length T <= 1.
double dilation_constant(double alpha);

struct Interpolation {
  int num_a, den_a, num_b, den_b;  // exponents
  double s_left, s_a, s_b;         // Sobolev orders
};
const std::vector<Interpolation>& interpolation_inequalities();

}  // namespace kdv
