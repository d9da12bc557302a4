#include "kdvcrit/pde.hpp"

#include <lapacke.h>

#include <algorithm>
#include <map>

#include "kdvcrit/numerics.hpp"

namespace kdv {

std::vector<double> Grid::x() const {
  std::vector<double> v(nx);
  for (int i = 0; i < nx; ++i) v[i] = (i + 1) * dx();
  return v;
}

void Grid::validate() const {
  if (!(L > 0) || !(T > 0)) throw DomainError("grid needs L > 0 and T > 0");
  if (nx < 32) throw DomainError("grid needs nx >= 32");
  if (nt < 1) throw DomainError("grid needs nt >= 1");
}

std::vector<double> fd_weights(const std::vector<double>& offs, int d,
                               const std::vector<double>& deriv_offs) {
  const int m = int(offs.size() + deriv_offs.size());
  Eigen::MatrixXd M(m, m);
  for (int k = 0; k < m; ++k) {
    for (size_t c = 0; c < offs.size(); ++c) M(k, c) = std::pow(offs[c], k);
    for (size_t c = 0; c < deriv_offs.size(); ++c)
      M(k, offs.size() + c) = k >= 1 ? k * std::pow(deriv_offs[c], k - 1) : 0.0;
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  double f = 1.0;
  for (int i = 2; i <= d; ++i) f *= i;
  rhs(d) = f;
  Eigen::VectorXd w = M.fullPivLu().solve(rhs);
  return {w.data(), w.data() + m};
}

namespace {

using Row = std::map<int, double>;  // node -> weight

simd::Band to_band(const std::vector<Row>& rows, int n, int* kl = nullptr, int* ku = nullptr) {
  int lo = 0, hi = 0;
  for (int i = 0; i < n; ++i)
    for (const auto& [j, w] : rows[i]) {
      (void)w;
      lo = std::min(lo, j - i);
      hi = std::max(hi, j - i);
    }
  simd::Band B;
  B.n = n;
  for (int o = lo; o <= hi; ++o) {
    B.offsets.push_back(o);
    B.diags.emplace_back(n, 0.0);
  }
  for (int i = 0; i < n; ++i)
    for (const auto& [j, w] : rows[i]) B.diags[j - i - lo][i] += w;
  if (kl) *kl = -lo;
  if (ku) *ku = hi;
  return B;
}

std::vector<double> iota_offs(int from, int count) {
  std::vector<double> o(count);
  for (int i = 0; i < count; ++i) o[i] = from + i;
  return o;
}

}  // namespace

Eigen::MatrixXd Operator::dense() const {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (size_t d = 0; d < A.offsets.size(); ++d)
    for (int i = 0; i < n; ++i) {
      const int j = i + A.offsets[d];
      if (j >= 0 && j < n) M(i, j) = A.diags[d][i];
    }
  return M;
}

Operator build_operator(int nx, double L, Closure c) {
  Operator op;
  const int n = nx;
  const double h = L / (n + 1);
  op.n = n;
  op.h = h;
  op.closure = c;
  op.b.assign(n, 0.0);
  std::vector<Row> rows(n), d1(n);
  // Nodes are 0..n+1; row index r = node - 1.
  auto put = [&](std::vector<Row>& R, int r, int node, double w) {
    if (node >= 1 && node <= n) R[r][node - 1] += w;
  };

  if (c == Closure::HighOrder) {
    const std::map<int, double> c1{{-2, 1.0 / 12}, {-1, -8.0 / 12}, {1, 8.0 / 12}, {2, -1.0 / 12}};
    const std::map<int, double> c3{{-3, 1.0 / 8}, {-2, -1.0}, {-1, 13.0 / 8},
                                   {1, -13.0 / 8}, {2, 1.0},  {3, -1.0 / 8}};
    const int wl = 7, wr = 6;
    for (int j = 1; j <= n; ++j) {
      const int r = j - 1;
      if (j - 3 >= 0 && j + 3 <= n + 1) {
        for (auto [o, w] : c1) put(rows, r, j + o, -w / h);
        for (auto [o, w] : c3) put(rows, r, j + o, -w / (h * h * h));
      } else if (j - 3 < 0) {
        const auto offs = iota_offs(-j, wl);
        const auto w1 = fd_weights(offs, 1), w3 = fd_weights(offs, 3);
        for (int q = 0; q < wl; ++q) put(rows, r, j + int(offs[q]), -(w1[q] / h + w3[q] / (h * h * h)));
      } else {
        const auto offs = iota_offs(n + 1 - j - wr + 1, wr);
        const std::vector<double> dr{double(n + 1 - j)};
        const auto w1 = fd_weights(offs, 1, dr), w3 = fd_weights(offs, 3, dr);
        for (int q = 0; q < wr; ++q) put(rows, r, j + int(offs[q]), -(w1[q] / h + w3[q] / (h * h * h)));
        // Derivative datum is h*u in the weight units.
        op.b[r] -= (w1[wr] / h + w3[wr] / (h * h * h)) * h;
      }
      if (j >= 2 && j + 2 <= n + 1) {
        for (auto [o, w] : c1) put(d1, r, j + o, w / h);
      } else {
        const auto offs = j < 2 ? iota_offs(-j, 6) : iota_offs(n + 1 - j - 5, 6);
        const auto w = fd_weights(offs, 1);
        for (int q = 0; q < 6; ++q) put(d1, r, j + int(offs[q]), w[q] / h);
      }
    }
  } else {
    const std::map<int, double> c1{{-1, -0.5}, {1, 0.5}};
    const std::map<int, double> c3{{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}};
    for (int j = 1; j <= n; ++j) {
      const int r = j - 1;
      Row full;
      for (auto [o, w] : c1) full[j + o] += w / h;
      for (auto [o, w] : c3) full[j + o] += w / (h * h * h);
      for (auto [node, w] : full) {
        if (node == -1) {
          put(rows, r, 1, w);  // ghost y_{-1} = -y_1
        } else if (node == n + 2) {
          put(rows, r, n, -w);  // ghost y_{n+2} = y_n + 2 h u
          op.b[r] -= w * 2.0 * h;
        } else {
          put(rows, r, node, -w);
        }
      }
      for (auto [o, w] : c1) put(d1, r, j + o, w / h);
    }
  }
  op.A = to_band(rows, n, &op.kl, &op.ku);
  op.D1 = to_band(d1, n);
  const auto offs = iota_offs(0, 7);
  const auto w = fd_weights(offs, 1);
  op.dx0.assign(6, 0.0);
  for (int q = 1; q < 7; ++q) op.dx0[q - 1] = w[q] / h;
  return op;
}

CnStepper::CnStepper(const Operator& op, double dt) : op_(op), dt_(dt) {
  const int n = op.n, kl = op.kl, ku = op.ku;
  ldab_ = 2 * kl + ku + 1;
  ab_.assign(size_t(ldab_) * n, 0.0);
  for (size_t d = 0; d < op.A.offsets.size(); ++d) {
    const int o = op.A.offsets[d];
    for (int i = 0; i < n; ++i) {
      const int j = i + o;
      if (j < 0 || j >= n) continue;
      ab_[size_t(kl + ku + i - j) + size_t(j) * ldab_] += -0.5 * dt * op.A.diags[d][i];
    }
  }
  for (int i = 0; i < n; ++i) ab_[size_t(kl + ku) + size_t(i) * ldab_] += 1.0;
  ipiv_.assign(n, 0);
  const int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku, ab_.data(), ldab_, ipiv_.data());
  if (info != 0) throw LinearSolveFailure("banded LU failed");
}

void CnStepper::solve(std::vector<double>& rhs) const {
  const int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', op_.n, op_.kl, op_.ku, 1, ab_.data(),
                                  ldab_, ipiv_.data(), rhs.data(), op_.n);
  if (info != 0) throw LinearSolveFailure("banded solve failed");
}

void CnStepper::explicit_half(const std::vector<double>& y, std::vector<double>& out) const {
  out.resize(op_.n);
  simd::band_matvec(op_.A, y.data(), out.data());
  for (int i = 0; i < op_.n; ++i) out[i] = y[i] + 0.5 * dt_ * out[i];
}

void CnStepper::step(std::vector<double>& y, double u0, double u1, const std::vector<double>* f0,
                     const std::vector<double>* f1) const {
  std::vector<double> rhs;
  explicit_half(y, rhs);
  simd::axpy(0.5 * dt_ * (u0 + u1), op_.b.data(), rhs.data(), op_.n);
  if (f0) simd::axpy(0.5 * dt_, f0->data(), rhs.data(), op_.n);
  if (f1) simd::axpy(0.5 * dt_, f1->data(), rhs.data(), op_.n);
  solve(rhs);
  y.swap(rhs);
}

double l2_norm(const std::vector<double>& y, double h) {
  return std::sqrt(h * simd::dot(y.data(), y.data(), int(y.size())));
}

namespace {

double dx_at_zero(const Operator& op, const std::vector<double>& y) {
  double s = 0.0;
  for (size_t q = 0; q < op.dx0.size() && q < y.size(); ++q) s += op.dx0[q] * y[q];
  return s;
}

// Running diagnostics shared by the solvers.
struct Monitor {
  const Operator& op;
  double dt;
  double max_l2 = 0.0, h1 = 0.0, energy = 0.0;
  double prevE = 0.0, prevFlux = 0.0, prevH1 = 0.0;
  std::vector<double> yx;

  Monitor(const Operator& o, double d) : op(o), dt(d) {}
  void start(const std::vector<double>& y, double u) {
    prevE = op.h * simd::dot(y.data(), y.data(), op.n);
    max_l2 = std::sqrt(prevE);
    const double d0 = dx_at_zero(op, y);
    prevFlux = u * u - d0 * d0;
    prevH1 = h1norm2(y);
  }
  double h1norm2(const std::vector<double>& y) {
    yx.resize(op.n);
    simd::band_matvec(op.D1, y.data(), yx.data());
    return op.h * simd::dot(yx.data(), yx.data(), op.n);
  }
  void next(const std::vector<double>& y, double u) {
    const double E = op.h * simd::dot(y.data(), y.data(), op.n);
    const double d0 = dx_at_zero(op, y);
    const double flux = u * u - d0 * d0;
    energy += std::abs((E - prevE) - 0.5 * dt * (flux + prevFlux));
    const double hh = h1norm2(y);
    h1 += 0.5 * dt * (hh + prevH1);
    max_l2 = std::max(max_l2, std::sqrt(E));
    prevE = E;
    prevFlux = flux;
    prevH1 = hh;
  }
  void finish(Trajectory& tr) const {
    tr.max_l2 = max_l2;
    tr.l2_h1 = std::sqrt(h1);
    tr.energy_residual = energy;
  }
};

void store(Trajectory& tr, const SolveOptions& opt, int i, double t, const std::vector<double>& y,
           int nt) {
  if (opt.store_stride > 0 && (i % opt.store_stride == 0 || i == nt)) {
    tr.t.push_back(t);
    tr.states.push_back(y);
  }
}

void check_inputs(const Grid& g, const std::vector<double>& y0, const std::vector<double>& u) {
  g.validate();
  if (int(y0.size()) != g.nx) throw DomainError("initial state size differs from nx");
  if (int(u.size()) != g.nt + 1) throw DomainError("control needs nt+1 samples");
}

}  // namespace

Trajectory solve_linear(const Grid& g, const std::vector<double>& y0, const std::vector<double>& u,
                        const Forcing& f, const SolveOptions& opt) {
  check_inputs(g, y0, u);
  const Operator op = build_operator(g.nx, g.L, opt.closure);
  const CnStepper cn(op, g.dt());
  Trajectory tr;
  tr.grid = g;
  tr.control = u;
  std::vector<double> y = y0, f0(g.nx, 0.0), f1(g.nx, 0.0);
  Monitor mon(op, g.dt());
  mon.start(y, u[0]);
  store(tr, opt, 0, 0.0, y, g.nt);
  if (opt.observer) opt.observer(0, 0.0, y);
  if (f) f(0, f0);
  for (int i = 0; i < g.nt; ++i) {
    if (f) f(i + 1, f1);
    cn.step(y, u[i], u[i + 1], f ? &f0 : nullptr, f ? &f1 : nullptr);
    if (f) f0.swap(f1);
    const double t = (i + 1) * g.dt();
    mon.next(y, u[i + 1]);
    store(tr, opt, i + 1, t, y, g.nt);
    if (opt.observer) opt.observer(i + 1, t, y);
  }
  mon.finish(tr);
  tr.final_state = y;
  return tr;
}

namespace {

// -(y^2/2)_x in conservative form.
void quad_forcing(const Operator& op, const std::vector<double>& y, std::vector<double>& out) {
  std::vector<double> s(op.n);
  for (int i = 0; i < op.n; ++i) s[i] = 0.5 * y[i] * y[i];
  out.resize(op.n);
  simd::band_matvec(op.D1, s.data(), out.data());
  for (auto& v : out) v = -v;
}

}  // namespace

SecondOrder solve_second_order(
    const Grid& g, const std::vector<double>& u1, const SolveOptions& opt,
    const std::function<void(int, double, const std::vector<double>&, const std::vector<double>&)>&
        obs) {
  const std::vector<double> zero(g.nx, 0.0);
  check_inputs(g, zero, u1);
  const Operator op = build_operator(g.nx, g.L, opt.closure);
  const CnStepper cn(op, g.dt());
  SecondOrder out;
  out.y1.grid = out.y2.grid = g;
  out.y1.control = u1;
  out.y2.control.assign(g.nt + 1, 0.0);
  std::vector<double> y1 = zero, y2 = zero, F0, F1;
  Monitor m1(op, g.dt()), m2(op, g.dt());
  m1.start(y1, u1[0]);
  m2.start(y2, 0.0);
  quad_forcing(op, y1, F0);
  store(out.y1, opt, 0, 0.0, y1, g.nt);
  store(out.y2, opt, 0, 0.0, y2, g.nt);
  if (obs) obs(0, 0.0, y1, y2);
  for (int i = 0; i < g.nt; ++i) {
    cn.step(y1, u1[i], u1[i + 1]);
    quad_forcing(op, y1, F1);
    cn.step(y2, 0.0, 0.0, &F0, &F1);
    F0.swap(F1);
    const double t = (i + 1) * g.dt();
    m1.next(y1, u1[i + 1]);
    m2.next(y2, 0.0);
    store(out.y1, opt, i + 1, t, y1, g.nt);
    store(out.y2, opt, i + 1, t, y2, g.nt);
    if (obs) obs(i + 1, t, y1, y2);
  }
  m1.finish(out.y1);
  m2.finish(out.y2);
  out.y1.final_state = y1;
  out.y2.final_state = y2;
  return out;
}

Trajectory solve_nonlinear(const Grid& g, const std::vector<double>& y0, const std::vector<double>& u,
                           const SolveOptions& opt) {
  check_inputs(g, y0, u);
  const Operator op = build_operator(g.nx, g.L, opt.closure);
  const CnStepper cn(op, g.dt());
  const double dt = g.dt();
  Trajectory tr;
  tr.grid = g;
  tr.control = u;
  std::vector<double> y = y0, N0, Nk, base, next;
  Monitor mon(op, dt);
  mon.start(y, u[0]);
  store(tr, opt, 0, 0.0, y, g.nt);
  if (opt.observer) opt.observer(0, 0.0, y);
  for (int i = 0; i < g.nt; ++i) {
    quad_forcing(op, y, N0);
    cn.explicit_half(y, base);
    simd::axpy(0.5 * dt * (u[i] + u[i + 1]), op.b.data(), base.data(), op.n);
    simd::axpy(0.5 * dt, N0.data(), base.data(), op.n);
    std::vector<double> yk = y;
    double prev = std::numeric_limits<double>::infinity();
    int grow = 0, it = 0;
    bool done = false;
    for (it = 1; it <= 25; ++it) {
      quad_forcing(op, yk, Nk);
      next = base;
      simd::axpy(0.5 * dt, Nk.data(), next.data(), op.n);
      cn.solve(next);
      double diff = 0.0, scale = 0.0;
      for (int q = 0; q < op.n; ++q) {
        diff = std::max(diff, std::abs(next[q] - yk[q]));
        scale = std::max(scale, std::abs(next[q]));
      }
      yk.swap(next);
      if (!std::isfinite(diff)) throw FixedPointDiverged("Picard iteration produced non-finite values");
      if (diff <= 1e-11 * std::max(scale, 1e-300) || diff == 0.0) {
        done = true;
        break;
      }
      grow = diff > prev ? grow + 1 : 0;
      if (grow >= 3) throw FixedPointDiverged("Picard iteration diverges");
      prev = diff;
    }
    if (!done) throw FixedPointDiverged("Picard iteration did not converge in 25 iterations");
    tr.picard_max = std::max(tr.picard_max, it);
    y.swap(yk);
    const double t = (i + 1) * dt;
    mon.next(y, u[i + 1]);
    store(tr, opt, i + 1, t, y, g.nt);
    if (opt.observer) opt.observer(i + 1, t, y);
  }
  mon.finish(tr);
  tr.final_state = y;
  return tr;
}

ProjectionCheck projection_identity(const Grid& g, const std::vector<double>& u1,
                                    const std::function<cplx(double)>& phi,
                                    const std::function<cplx(double)>& phi_x, double p) {
  const auto x = g.x();
  const double h = g.dx(), dt = g.dt();
  std::vector<double> phr(g.nx), phi_r(g.nx), pxr(g.nx), pxi(g.nx);
  for (int i = 0; i < g.nx; ++i) {
    const cplx a = phi(x[i]), b = phi_x(x[i]);
    phr[i] = a.real();
    phi_r[i] = a.imag();
    pxr[i] = b.real();
    pxi[i] = b.imag();
  }
  cplx rhs = 0.0;
  std::vector<double> sq(g.nx);
  auto obs = [&](int i, double t, const std::vector<double>& y1, const std::vector<double>&) {
    for (int q = 0; q < g.nx; ++q) sq[q] = y1[q] * y1[q];
    const cplx inner(h * simd::dot(sq.data(), pxr.data(), g.nx), h * simd::dot(sq.data(), pxi.data(), g.nx));
    const double w = (i == 0 || i == g.nt) ? 0.5 : 1.0;
    rhs += w * dt * inner * std::exp(-I1 * p * t);
  };
  const auto so = solve_second_order(g, u1, {}, obs);
  const auto& y2 = so.y2.final_state;
  const cplx proj(h * simd::dot(y2.data(), phr.data(), g.nx), h * simd::dot(y2.data(), phi_r.data(), g.nx));
  ProjectionCheck pc;
  pc.lhs = 2.0 * proj * std::exp(-I1 * p * g.T);
  pc.rhs = rhs;
  pc.rel = std::abs(pc.lhs - pc.rhs) / std::abs(pc.rhs);
  return pc;
}

Eigen::MatrixXd control_map(const Grid& g, Closure c) {
  g.validate();
  const Operator op = build_operator(g.nx, g.L, c);
  const CnStepper cn(op, g.dt());
  const int n = g.nx, nt = g.nt;
  // G[m] = S^m Bv with S = M1^{-1} M2 and Bv = M1^{-1} (dt/2) b.
  std::vector<std::vector<double>> G(nt);
  G[0] = op.b;
  for (auto& v : G[0]) v *= 0.5 * g.dt();
  cn.solve(G[0]);
  std::vector<double> tmp;
  for (int m = 1; m < nt; ++m) {
    cn.explicit_half(G[m - 1], tmp);
    cn.solve(tmp);
    G[m] = tmp;
  }
  Eigen::MatrixXd Phi = Eigen::MatrixXd::Zero(n, nt + 1);
  const double sh = std::sqrt(op.h);
  for (int k = 0; k <= nt; ++k) {
    const double wk = (k == 0 || k == nt) ? 0.5 * g.dt() : g.dt();
    const double s = sh / std::sqrt(wk);
    for (int i = 0; i < n; ++i) {
      double v = 0.0;
      if (k <= nt - 1) v += G[nt - 1 - k][i];
      if (k >= 1) v += G[nt - k][i];
      Phi(i, k) = s * v;
    }
  }
  return Phi;
}

namespace {

std::vector<double> sqrt_eigs_desc(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  std::vector<double> v;
  for (int i = int(es.eigenvalues().size()) - 1; i >= 0; --i)
    v.push_back(std::sqrt(std::max(es.eigenvalues()(i), 0.0)));
  return v;
}

}  // namespace

GramianReport gramian(const Grid& g, const std::vector<std::vector<double>>& directions, Closure c) {
  const Eigen::MatrixXd Phi = control_map(g, c);
  const Eigen::MatrixXd W = Phi * Phi.transpose();
  GramianReport rep;
  rep.singular_values = sqrt_eigs_desc(W);
  const int n = g.nx, m = int(directions.size());
  if (m == 0) return rep;
  Eigen::MatrixXd V(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) V(i, j) = directions[j][i];
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
  rep.restricted = sqrt_eigs_desc(Q.transpose() * W * Q);
  const Eigen::MatrixXd Pc = Eigen::MatrixXd::Identity(n, n) - Q * Q.transpose();
  auto comp = sqrt_eigs_desc(Pc * W * Pc);
  comp.resize(std::max(0, n - m));
  rep.complement = comp;
  const double top = rep.singular_values.front();
  rep.ratio_max = top > 0 ? rep.restricted.front() / top : 0.0;
  rep.ratio_min = top > 0 ? rep.restricted.back() / top : 0.0;
  return rep;
}

HumResult hum_control(const Grid& g, const std::vector<double>& target, double tol, Closure c) {
  if (int(target.size()) != g.nx) throw DomainError("target size differs from nx");
  HumResult res;
  const double sh = std::sqrt(g.dx());
  Eigen::VectorXd y(g.nx);
  for (int i = 0; i < g.nx; ++i) y(i) = sh * target[i];
  res.control.assign(g.nt + 1, 0.0);
  const double ny = y.norm();
  if (ny == 0.0) return res;
  const Eigen::MatrixXd Phi = control_map(g, c);
  const Eigen::MatrixXd W = Phi * Phi.transpose();
  // Conjugate gradient on W lambda = y.
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(g.nx), r = y, d = r;
  double rr = r.squaredNorm(), best = std::sqrt(rr);
  int since_best = 0;
  const int maxit = 4 * g.nx;
  int it = 0;
  for (; it < maxit && std::sqrt(rr) > tol * ny; ++it) {
    const Eigen::VectorXd Wd = W * d;
    const double alpha = rr / d.dot(Wd);
    lam += alpha * d;
    r -= alpha * Wd;
    const double rr2 = r.squaredNorm();
    d = r + (rr2 / rr) * d;
    rr = rr2;
    if (std::sqrt(rr) < 0.9 * best) {
      best = std::sqrt(rr);
      since_best = 0;
    } else if (++since_best > 200) {
      break;
    }
  }
  res.iterations = it;
  const Eigen::VectorXd v = Phi.transpose() * lam;
  const Eigen::VectorXd reached = Phi * v;
  res.residual_rel = (reached - y).norm() / ny;
  if (res.residual_rel > std::max(tol, 1e-6))
    throw NotReachable("conjugate gradient stagnated above tolerance");
  // A control far larger than the map's gain allows means the target sits on a
  // numerically collapsed direction.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W, Eigen::EigenvaluesOnly);
  const double gain = std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
  if (v.norm() * gain > 1e4 * ny) throw NotReachable("target has a component outside the reachable range");
  for (int k = 0; k <= g.nt; ++k) {
    const double wk = (k == 0 || k == g.nt) ? 0.5 * g.dt() : g.dt();
    res.control[k] = v(k) / std::sqrt(wk);
  }
  return res;
}

}  // namespace kdv
