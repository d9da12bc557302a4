#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "kdvcrit/common.hpp"
#include "kdvcrit/simd.hpp"

namespace kdv {

struct Grid {
  double L = 2.0 * pi;
  int nx = 128;  // interior nodes
  double T = 1.0;
  int nt = 256;
  double dx() const { return L / (nx + 1); }
  double dt() const { return T / nt; }
  std::vector<double> x() const;  // interior nodes
  void validate() const;
};

// HighOrder: fourth-order interior stencils with one-sided closures (default).
// Reflective: second-order centered with odd ghost at x=0 and the Neumann ghost at x=L;
// its symmetric part is negative semidefinite.
enum class Closure { HighOrder, Reflective };

// y' = A y + b u approximates y_t = -(y_x + y_xxx) with y(0)=y(L)=0, y_x(L)=u.
struct Operator {
  int n = 0;
  double h = 0.0;
  Closure closure = Closure::HighOrder;
  simd::Band A;
  std::vector<double> b;
  simd::Band D1;                 // first derivative with zero Dirichlet data
  std::vector<double> dx0;       // weights on nodes 1.. for y_x(0)
  int kl = 0, ku = 0;            // bandwidths of A
  Eigen::MatrixXd dense() const;
};

// Finite-difference weights at 0 for the d-th derivative from values at offs (units of h)
// plus optional first-derivative data (scaled by h) at deriv_offs.
std::vector<double> fd_weights(const std::vector<double>& offs, int d,
                               const std::vector<double>& deriv_offs = {});

Operator build_operator(int nx, double L, Closure c = Closure::HighOrder);

// Crank-Nicolson step with banded LU of (I - dt/2 A).
class CnStepper {
 public:
  CnStepper(const Operator& op, double dt);
  // y <- step; f0/f1 forcing at both ends of the step (may be null).
  void step(std::vector<double>& y, double u0, double u1, const std::vector<double>* f0 = nullptr,
            const std::vector<double>* f1 = nullptr) const;
  // Solve (I - dt/2 A) v = rhs in place.
  void solve(std::vector<double>& rhs) const;
  // rhs = (I + dt/2 A) y
  void explicit_half(const std::vector<double>& y, std::vector<double>& out) const;
  const Operator& op() const { return op_; }
  double dt() const { return dt_; }

 private:
  const Operator& op_;
  double dt_;
  int ldab_ = 0;
  std::vector<double> ab_;
  std::vector<int> ipiv_;
};

struct Trajectory {
  Grid grid;
  std::vector<double> t;                       // stored times
  std::vector<std::vector<double>> states;     // stored interior states
  std::vector<double> control;                 // u at every time node
  std::vector<double> final_state;
  double max_l2 = 0.0;          // max_t ||y||_{L2}
  double l2_h1 = 0.0;           // (int ||y_x||^2 dt)^{1/2}
  double energy_residual = 0.0; // sum over steps of |discrete energy law defect|
  int picard_max = 0;
};

using Observer = std::function<void(int step, double t, const std::vector<double>& y)>;
using Forcing = std::function<void(int step, std::vector<double>& f)>;

struct SolveOptions {
  Closure closure = Closure::HighOrder;
  int store_stride = 0;  // 0: keep only the final state
  Observer observer;
};

double l2_norm(const std::vector<double>& y, double h);

Trajectory solve_linear(const Grid& g, const std::vector<double>& y0, const std::vector<double>& u,
                        const Forcing& f = nullptr, const SolveOptions& opt = {});

struct SecondOrder {
  Trajectory y1, y2;
};
SecondOrder solve_second_order(const Grid& g, const std::vector<double>& u1,
                               const SolveOptions& opt = {},
                               const std::function<void(int, double, const std::vector<double>&,
                                                        const std::vector<double>&)>& obs = nullptr);

Trajectory solve_nonlinear(const Grid& g, const std::vector<double>& y0, const std::vector<double>& u,
                           const SolveOptions& opt = {});

// 2 int y2(T) phi e^{-ipT} dx against int int y1^2 phi_x e^{-ipt}.
struct ProjectionCheck {
  cplx lhs, rhs;
  double rel = 0.0;
};
ProjectionCheck projection_identity(const Grid& g, const std::vector<double>& u1,
                                    const std::function<cplx(double)>& phi,
                                    const std::function<cplx(double)>& phi_x, double p);

// Columns map nodal control values (L2(0,T) weights) to final states (L2(0,L) weights).
Eigen::MatrixXd control_map(const Grid& g, Closure c = Closure::HighOrder);

struct GramianReport {
  std::vector<double> singular_values;     // of the full map, descending
  std::vector<double> restricted;          // of the projection onto the directions
  std::vector<double> complement;          // of the projection onto their complement
  double ratio_max = 0.0;                  // restricted.front() / singular_values.front()
  double ratio_min = 0.0;                  // restricted.back() / singular_values.front()
};
// directions sampled on interior nodes; orthonormalized internally.
GramianReport gramian(const Grid& g, const std::vector<std::vector<double>>& directions,
                      Closure c = Closure::HighOrder);

struct HumResult {
  std::vector<double> control;
  double residual_rel = 0.0;
  int iterations = 0;
};
// Minimum-norm control steering 0 to target (interior nodes) at time T.
HumResult hum_control(const Grid& g, const std::vector<double>& target, double tol = 1e-8,
                      Closure c = Closure::HighOrder);

}  // namespace kdv
