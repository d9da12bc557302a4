#pragma once

#include <vector>

#include <Eigen/Dense>

#include "kdvcrit/number_theory.hpp"

namespace kdv {

struct EtaTriple {
  CriticalPair pair;
  std::array<cplx, 3> eta{};
  double p = 0.0;
};

struct UnreachableData {
  EtaTriple eta;
  cplx Gamma, Lambda, E, E1, F, F1;
  // F1 with the -ipL/3 coefficient as printed in the source formula; kept for comparison.
  cplx F1_published;
  cplx exp_eta1L;
};

struct MNBasis {
  LengthClass cls;
  std::vector<double> x;                 // quadrature nodes on [0, L]
  std::vector<std::vector<double>> basis; // real functions sampled on x
  Eigen::MatrixXd gram;
  int rank = 0;
  double richardson_change = 0.0;
};

EtaTriple eta_triple(const CriticalPair& pr);

// sum_j (eta_{j+1} - eta_j) eta_{j+2}^d exp(eta_{j+2} x)
cplx phi(const EtaTriple& e, double x, int deriv = 0);
cplx psi(const EtaTriple& e, double t, double x);
// Psi_t + Psi_x + Psi_xxx evaluated exactly from the exponentials.
cplx psi_residual(const EtaTriple& e, double t, double x);
// sum_j (eta_{j+1} - eta_j) eta_{j+2}^m
cplx eta_moment(const EtaTriple& e, int m);

UnreachableData constants(const CriticalPair& pr);
// E, E1, F, F1 with Gamma = Lambda substituted by the closed form.
UnreachableData constants_substituted(const CriticalPair& pr);
cplx gamma_closed_form(const CriticalPair& pr);

cplx e1_over_e(const CriticalPair& pr);
cplx e1_over_e_closed_form(const CriticalPair& pr);

// Exact integrals over [0, L] of phi^2 and |phi|^2.
cplx phi_square_integral(const EtaTriple& e);
double phi_abs2_integral(const EtaTriple& e);

// n intervals (even) on [0, L].
MNBasis mn_basis(const LengthClass& cls, int n);

}  // namespace kdv
