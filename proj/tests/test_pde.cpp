#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "kdvcrit/numerics.hpp"
#include "kdvcrit/pde.hpp"
#include "kdvcrit/unreachable.hpp"

using namespace kdv;

namespace {

std::vector<double> bump_control(const Grid& g, double amp) {
  std::vector<double> u(g.nt + 1);
  for (int i = 0; i <= g.nt; ++i) {
    const double s = 2.0 * i * g.dt() / g.T - 1.0;
    u[i] = std::abs(s) < 1 ? amp * std::exp(-1.0 / (1.0 - s * s)) * std::sin(5.0 * i * g.dt()) : 0.0;
  }
  return u;
}

double diff_norm(const std::vector<double>& a, const std::vector<double>& b, double h) {
  std::vector<double> d(a.size());
  for (size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return l2_norm(d, h);
}

// Error at T of the scheme against Re(c Psi) for (2,1).
double psi_error(int nx, int nt, double T) {
  const CriticalPair pr = make_pair(2, 1);
  const EtaTriple e = eta_triple(pr);
  const cplx c(0.8, 0.3);
  const Grid g{pr.L, nx, T, nt};
  const auto x = g.x();
  std::vector<double> y0(nx), ex(nx);
  for (int i = 0; i < nx; ++i) {
    y0[i] = (c * psi(e, 0.0, x[i])).real();
    ex[i] = (c * psi(e, T, x[i])).real();
  }
  const Trajectory tr = solve_linear(g, y0, std::vector<double>(nt + 1, 0.0));
  return diff_norm(tr.final_state, ex, g.dx()) / l2_norm(ex, g.dx());
}

}  // namespace

TEST_CASE("finite difference weights") {
  const auto w = fd_weights({-1, 0, 1}, 1);
  REQUIRE(w.size() == 3);
  CHECK(w[0] == doctest::Approx(-0.5));
  CHECK(std::abs(w[1]) < 1e-14);
  CHECK(w[2] == doctest::Approx(0.5));
  const auto w3 = fd_weights({-2, -1, 0, 1, 2}, 3);
  CHECK(w3[0] == doctest::Approx(-0.5));
  CHECK(w3[1] == doctest::Approx(1.0));
  CHECK(std::abs(w3[2]) < 1e-13);
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS((Grid{1.0, 8, 1.0, 10}).validate(), DomainError);
  CHECK_THROWS_AS((Grid{-1.0, 64, 1.0, 10}).validate(), DomainError);
  CHECK_NOTHROW((Grid{1.0, 64, 1.0, 10}).validate());
}

TEST_CASE("zero data stays zero") {
  const Grid g{5.0, 64, 1.0, 50};
  const std::vector<double> z(g.nx, 0.0), u(g.nt + 1, 0.0);
  for (double v : solve_linear(g, z, u).final_state) CHECK(v == 0.0);
  for (double v : solve_nonlinear(g, z, u).final_state) CHECK(v == 0.0);
  const SecondOrder so = solve_second_order(g, u);
  for (double v : so.y2.final_state) CHECK(v == 0.0);
  for (double v : hum_control(g, z).control) CHECK(v == 0.0);
}

TEST_CASE("reflective closure is dissipative") {
  const Operator op = build_operator(64, 3.0, Closure::Reflective);
  const Eigen::MatrixXd A = op.dense();
  const Eigen::MatrixXd S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().maxCoeff() <= 1e-10 * A.cwiseAbs().maxCoeff());
  // With u = 0 the L2 norm never grows.
  const Grid g{3.0, 64, 2.0, 200};
  std::vector<double> y0(g.nx);
  const auto x = g.x();
  for (int i = 0; i < g.nx; ++i) y0[i] = std::sin(pi * x[i] / 3.0) * std::sin(2 * pi * x[i] / 3.0);
  SolveOptions opt;
  opt.closure = Closure::Reflective;
  opt.store_stride = 1;
  const Trajectory tr = solve_linear(g, y0, std::vector<double>(g.nt + 1, 0.0), nullptr, opt);
  for (size_t i = 1; i < tr.states.size(); ++i)
    CHECK(l2_norm(tr.states[i], g.dx()) <= l2_norm(tr.states[i - 1], g.dx()) * (1 + 1e-13));
}

TEST_CASE("exact solution Re(c Psi): second order in dx and dt") {
  const double T = 1.0;
  const double e1 = psi_error(64, 4096, T), e2 = psi_error(128, 4096, T);
  CHECK(std::log2(e1 / e2) >= 1.9);
  const double f1 = psi_error(512, 16, T), f2 = psi_error(512, 32, T);
  CHECK(std::log2(f1 / f2) >= 1.9);
  CHECK(e2 < 1e-2);
}

TEST_CASE("energy law residual shrinks under refinement") {
  auto run = [](int nx, int nt) {
    const Grid g{6.0, nx, 2.0, nt};
    return solve_linear(g, std::vector<double>(nx, 0.0), bump_control(g, 1.0)).energy_residual;
  };
  const double a = run(64, 200), b = run(128, 400);
  CHECK(b < a);
  CHECK(b < 1e-2);
}

TEST_CASE("store stride and trajectory layout") {
  const Grid g{6.0, 48, 1.0, 10};
  SolveOptions opt;
  opt.store_stride = 3;
  const Trajectory tr = solve_linear(g, std::vector<double>(g.nx, 0.0), bump_control(g, 1.0), nullptr, opt);
  REQUIRE(tr.t.size() == 5);  // 0, 3, 6, 9, 10
  CHECK(tr.t.back() == doctest::Approx(1.0));
  CHECK(tr.states.back() == tr.final_state);
  CHECK_THROWS_AS(solve_linear(g, std::vector<double>(g.nx, 0.0), std::vector<double>(3, 0.0)), DomainError);
}

TEST_CASE("small-data expansion of the nonlinear solve") {
  const Grid g{7.0, 96, 2.0, 200};
  const std::vector<double> z(g.nx, 0.0);
  const auto u1 = bump_control(g, 1.0);
  const SecondOrder so = solve_second_order(g, u1);
  std::vector<double> eps, gap, rem;
  for (double e : {0.4, 0.2, 0.1, 0.05}) {
    std::vector<double> u(u1);
    for (double& v : u) v *= e;
    const Trajectory nl = solve_nonlinear(g, z, u);
    const Trajectory lin = solve_linear(g, z, u);
    std::vector<double> r(g.nx);
    for (int i = 0; i < g.nx; ++i)
      r[i] = nl.final_state[i] - e * so.y1.final_state[i] - e * e * so.y2.final_state[i];
    eps.push_back(e);
    gap.push_back(diff_norm(nl.final_state, lin.final_state, g.dx()));
    rem.push_back(l2_norm(r, g.dx()));
  }
  CHECK(loglog_slope(eps, gap) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(loglog_slope(eps, rem) == doctest::Approx(3.0).epsilon(0.05));
  std::vector<double> big(u1);
  for (double& v : big) v *= 1e4;
  CHECK_THROWS_AS(solve_nonlinear(g, z, big), FixedPointDiverged);
}

TEST_CASE("gramian structure") {
  const Grid g{1.0, 48, 1.0, 100};
  const auto x = g.x();
  std::vector<double> v(g.nx);
  for (int i = 0; i < g.nx; ++i) v[i] = 1.0 - std::cos(2 * pi * x[i]);
  const GramianReport r = gramian(g, {v});
  for (size_t i = 1; i < r.singular_values.size(); ++i) CHECK(r.singular_values[i] <= r.singular_values[i - 1]);
  CHECK(r.singular_values.back() >= 0.0);
  CHECK(r.ratio_min >= 1e-4);
  // Zero-time limit at a fixed grid: sqrt(T) decay once T is far below h^3.
  const double s10 = gramian(Grid{1.0, 48, 1e-10, 4}, {v}).singular_values.front();
  const double s12 = gramian(Grid{1.0, 48, 1e-12, 4}, {v}).singular_values.front();
  CHECK(s10 < 1e-2 * r.singular_values.front());
  CHECK(s12 / s10 == doctest::Approx(0.1).epsilon(0.1));
}

TEST_CASE("HUM steering") {
  const Grid g{1.0, 48, 1.0, 100};
  const auto x = g.x();
  // A reachable target: the final state of some control.
  const Trajectory tr = solve_linear(g, std::vector<double>(g.nx, 0.0), bump_control(g, 1.0));
  const HumResult h = hum_control(g, tr.final_state, 1e-8);
  CHECK(h.residual_rel <= 1e-6);
  const Trajectory back = solve_linear(g, std::vector<double>(g.nx, 0.0), h.control);
  CHECK(diff_norm(back.final_state, tr.final_state, g.dx()) <= 1e-6 * l2_norm(tr.final_state, g.dx()));

  // At L = 2 pi the direction 1 - cos x is not reachable.
  const Grid c{2 * pi, 64, 2.0, 200};
  const auto xc = c.x();
  std::vector<double> t(c.nx);
  for (int i = 0; i < c.nx; ++i) t[i] = 1.0 - std::cos(xc[i]);
  CHECK_THROWS_AS(hum_control(c, t, 1e-8), NotReachable);
}

TEST_CASE("projection identity improves under refinement") {
  const CriticalPair pr = make_pair(2, 1);
  const EtaTriple e = eta_triple(pr);
  auto ph = [&](double x) { return phi(e, x); };
  auto phx = [&](double x) { return phi(e, x, 1); };
  auto run = [&](int nx, int nt) {
    const Grid g{pr.L, nx, 6.0, nt};
    std::vector<double> u(nt + 1);
    for (int i = 0; i <= nt; ++i) {
      const double s = 2.0 * i * g.dt() / 3.0 - 1.0;
      u[i] = std::abs(s) < 1 ? std::exp(-0.5 / (1 - s * s)) * std::sin(3.0 * i * g.dt()) : 0.0;
    }
    return projection_identity(g, u, ph, phx, pr.p).rel;
  };
  const double a = run(128, 1024), b = run(256, 2048);
  CHECK(b < a);
  CHECK(b < 0.05);
}
