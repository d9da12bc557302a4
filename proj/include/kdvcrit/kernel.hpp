#pragma once

#include <vector>

#include "kdvcrit/spectral.hpp"
#include "kdvcrit/unreachable.hpp"

namespace kdv {

struct KernelSample {
  double z = 0.0;
  cplx intB;
  bool scaled = true;
  CriticalPair pair;
};

// Pieces of the closed form: intB = S / (D D~) with S = S_rel e^{s}.
struct KernelParts {
  cplx S_rel;       // sum of the 108 integrated exponential terms, scaled
  double s = 0.0;   // log scale carried by S_rel
  cplx D_rel, Dt_rel;  // det Q(z), conj det Q(z - p) scaled by e^{sD}, e^{sDt}
  double sD = 0.0, sDt = 0.0;
  Roots lam{}, lamt{};
  cplx Xi, Xit;     // Vandermonde of lam and of lamt
  double pole_measure = 1.0;  // min relative size of the two denominators
};

using EtaArray = std::array<cplx, 3>;

KernelParts kernel_parts(const EtaArray& eta, double p, double L, double z);

cplx B_eval(const CriticalPair& pr, double z, double x);
cplx B_eval_general(const EtaArray& eta, double p, double L, double z, double x);

cplx intB_closed(const CriticalPair& pr, double z);
cplx intB_general(const EtaArray& eta, double p, double L, double z);
// Adaptive Gauss-Kronrod in x; test oracle only.
cplx intB_quadrature(const CriticalPair& pr, double z, double tol = 1e-13);

// (e^{aL} - 1)/a with the series branch below |a|L = 1e-3.
cplx exp_ratio(cplx a, double L);
inline constexpr double kSeriesSwitch = 1e-3;

struct LevelFit {
  double slope = 0.0;
  double zmin = 0.0, zmax = 0.0;
  int points = 0;
};

struct AsymptoticReport {
  CriticalPair pair;
  bool caseE0 = false;
  std::vector<double> z_grid;
  std::vector<double> excluded;
  std::array<LevelFit, 3> levels;  // after subtracting 0, 1, 2 terms
  cplx c1, c2;                     // (E, E1) or (F, F1)
  std::array<double, 3> expected{};  // leading slopes -4/3,-2,-7/3 or -2,-8/3,-3
};

std::vector<double> dyadic_grid(double zmin, double zmax, int per_octave = 2);
AsymptoticReport verify_expansion(const CriticalPair& pr, const std::vector<double>& z_grid);
AsymptoticReport verify_expansion(const CriticalPair& pr);

}  // namespace kdv
