#pragma once

#include <array>
#include <vector>

#include "kdvcrit/common.hpp"

namespace kdv {

using Roots = std::array<cplx, 3>;

// Roots of l^3 + l + i z = 0, sorted by (Re, Im).
Roots roots(cplx z);
// Roots of m^3 + m - i (z - p) = 0, i.e. the conjugates of roots(conj(z - p)).
Roots shifted_roots(cplx z, double p);

double cubic_residual(cplx lam, cplx z);

// mu_j = exp(-i pi/6 - 2 j i pi/3), j = 1..3 stored at index j-1.
Roots mu_directions();
Roots tilde_mu_directions();

Roots asymptotic_roots(double z, int order);
Roots asymptotic_shifted_roots(double z, double p, int order);

struct SpectralFrame {
  cplx z;
  double L = 0.0;
  Roots lambda{};
  Scaled detQ;
  Scaled P;
  cplx Xi;  // (l2-l1)(l3-l2)(l3-l1)
  Scaled G;
  Scaled H;
  bool divided_difference = false;
  // |det Q| over its largest term; small values flag a nearby zero of det Q.
  double detQ_rel = 1.0;
};

// Frame built from a given (possibly permuted) root triple.
SpectralFrame frame_from_roots(cplx z, double L, const Roots& lam);
SpectralFrame frame(cplx z, double L);

// Divided differences of t -> exp(tL); exposed for tests.
cplx dd1_exp(cplx a, cplx b, double L);
cplx dd2_exp(cplx a, cplx b, cplx c, double L);

// Fourier-side solution profile of the linear boundary-control problem.
cplx y_hat(cplx z, double x, cplx u_hat, double L);
cplx dx_y_hat0(cplx z, cplx u_hat, double L);

// Taylor coefficients of the roots at z0 up to third order (index = order).
std::array<Roots, 4> root_jets(cplx z0);
// H^{(d)}(z0) for d = 0..3 as scaled values.
std::array<Scaled, 4> h_taylor(cplx z0, double L);

struct PaleyWienerLine {
  double c = 0.0;        // Im z
  double C_u = 0.0;      // max |u_hat| e^{-T|c|}
  double C_uGH = 0.0;    // max |u_hat G/H| e^{-T|c|} over non-pole samples
  int poles_skipped = 0;
  bool finite = true;
};
struct PaleyWienerReport {
  std::vector<PaleyWienerLine> lines;
  bool bounded = true;
};

// u sampled at t_i = i dt on [0, T]; transform u_hat(z) = (2 pi)^{-1/2} int u e^{-izt} dt.
PaleyWienerReport paley_wiener_check(const std::vector<double>& u, double T, double L,
                                     double zmax = 200.0, int nz = 801);

}  // namespace kdv
