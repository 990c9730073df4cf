#pragma once

// Self-contained convex solver for programs with a linear objective,
// linear inequality constraints and convex quadratic constraints.
// Quadratic constraints are lowered to second-order cones and the conic
// problem is solved with a primal-dual interior-point method on the
// homogeneous self-dual embedding (Nesterov-Todd scaling, Mehrotra
// predictor-corrector steps).

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "rsma/streams.hpp"

namespace rsma::socp {

/// a^T z <= b
struct LinearConstraint {
  Vec a;
  double b = 0.0;
};

/// ||F z + f||^2 + q^T z <= r
struct QuadConstraint {
  Eigen::MatrixXd F;
  Vec f;
  Vec q;
  double r = 0.0;
};

struct ConvexProgram {
  int n = 0;  // decision dimension
  Vec c;      // linear objective, minimized
  std::vector<LinearConstraint> linear;
  std::vector<QuadConstraint> quadratic;

  void validate() const {
    if (n < 1) throw std::invalid_argument("ConvexProgram: empty decision vector");
    if (c.size() != n) throw std::invalid_argument("ConvexProgram: objective dimension");
    for (const auto& lc : linear)
      if (lc.a.size() != n)
        throw std::invalid_argument("ConvexProgram: linear constraint dimension");
    for (const auto& qc : quadratic) {
      if (qc.q.size() != n || qc.F.cols() != n || qc.f.size() != qc.F.rows())
        throw std::invalid_argument("ConvexProgram: quadratic constraint dimension");
    }
  }
};

enum class SolveStatus { optimal, infeasible, max_iter };

struct PrimalDualSolution {
  Vec z;                 // primal point
  Vec linear_duals;      // one multiplier per linear constraint
  Vec quadratic_duals;   // one multiplier per quadratic constraint
  double objective = 0.0;
  SolveStatus status = SolveStatus::max_iter;
  double primal_residual = std::numeric_limits<double>::infinity();
  double dual_residual = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

struct SolverOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iters = 200;
};

namespace detail {

// Conic form: minimize c'x  s.t.  G x + s = h,  s in R+^nl x prod SOC(d_i).
struct ConicData {
  Eigen::MatrixXd G;
  Vec h;
  int nl = 0;
  std::vector<int> soc_dims;
  int m() const { return static_cast<int>(G.rows()); }
  int degree() const { return nl + static_cast<int>(soc_dims.size()); }
};

inline ConicData lower(const ConvexProgram& p) {
  ConicData d;
  d.nl = static_cast<int>(p.linear.size());
  int m = d.nl;
  for (const auto& qc : p.quadratic) {
    d.soc_dims.push_back(static_cast<int>(qc.F.rows()) + 2);
    m += d.soc_dims.back();
  }
  d.G = Eigen::MatrixXd::Zero(m, p.n);
  d.h = Vec::Zero(m);
  for (int i = 0; i < d.nl; ++i) {
    d.G.row(i) = p.linear[i].a.transpose();
    d.h(i) = p.linear[i].b;
  }
  // ||Fz+f||^2 <= r - q'z  becomes  ((1+w)/2, Fz+f, (1-w)/2) in SOC with
  // w = r - q'z.
  int row = d.nl;
  for (const auto& qc : p.quadratic) {
    const int k = static_cast<int>(qc.F.rows());
    d.G.row(row) = 0.5 * qc.q.transpose();
    d.h(row) = 0.5 * (1.0 + qc.r);
    d.G.block(row + 1, 0, k, p.n) = -qc.F;
    d.h.segment(row + 1, k) = qc.f;
    d.G.row(row + 1 + k) = -0.5 * qc.q.transpose();
    d.h(row + 1 + k) = 0.5 * (1.0 - qc.r);
    row += k + 2;
  }
  return d;
}

// Nesterov-Todd scaling for one cone block; stores W^2 and W^-2 as dense
// blocks (problem sizes here are small) plus lambda = W z.
struct NtBlock {
  Eigen::MatrixXd W;      // symmetric scaling
  Eigen::MatrixXd W2;     // W^2
  Eigen::MatrixXd Winv2;  // W^-2
  Vec lambda;
};

inline double soc_residual(const Eigen::Ref<const Vec>& u) {
  return u(0) * u(0) - u.tail(u.size() - 1).squaredNorm();
}

inline NtBlock nt_orthant(const Eigen::Ref<const Vec>& s, const Eigen::Ref<const Vec>& z) {
  NtBlock b;
  const Vec w = (s.array() / z.array()).sqrt();
  b.W = w.asDiagonal();
  b.W2 = w.array().square().matrix().asDiagonal();
  b.Winv2 = w.array().square().inverse().matrix().asDiagonal();
  b.lambda = (s.array() * z.array()).sqrt();
  return b;
}

inline NtBlock nt_soc(const Eigen::Ref<const Vec>& s, const Eigen::Ref<const Vec>& z) {
  const int d = static_cast<int>(s.size());
  const double rs = soc_residual(s), rz = soc_residual(z);
  const Vec sb = s / std::sqrt(rs);
  const Vec zb = z / std::sqrt(rz);
  const double gamma = std::sqrt((1.0 + sb.dot(zb)) / 2.0);
  Vec wb = zb;
  wb(0) = zb(0);
  wb.tail(d - 1) = -zb.tail(d - 1);
  wb = (sb + wb) / (2.0 * gamma);
  const double eta = std::pow(rs / rz, 0.25);

  Eigen::MatrixXd Wbar(d, d);
  const Vec w1 = wb.tail(d - 1);
  Wbar(0, 0) = wb(0);
  Wbar.block(0, 1, 1, d - 1) = w1.transpose();
  Wbar.block(1, 0, d - 1, 1) = w1;
  Wbar.block(1, 1, d - 1, d - 1) =
      Eigen::MatrixXd::Identity(d - 1, d - 1) + w1 * w1.transpose() / (1.0 + wb(0));

  NtBlock b;
  b.W = eta * Wbar;
  // Wbar^2 = 2 wb wb' - J and (Wbar^2)^-1 = 2 (J wb)(J wb)' - J
  Eigen::MatrixXd J = -Eigen::MatrixXd::Identity(d, d);
  J(0, 0) = 1.0;
  b.W2 = eta * eta * (2.0 * wb * wb.transpose() - J);
  Vec jw = wb;
  jw.tail(d - 1) = -w1;
  b.Winv2 = (2.0 * jw * jw.transpose() - J) / (eta * eta);
  b.lambda = b.W * z;
  return b;
}

// Jordan product u o v for one SOC block.
inline Vec soc_prod(const Vec& u, const Vec& v) {
  Vec r(u.size());
  r(0) = u.dot(v);
  r.tail(u.size() - 1) = u(0) * v.tail(v.size() - 1) + v(0) * u.tail(u.size() - 1);
  return r;
}

// Solve Arw(lambda) x = d for one SOC block.
inline Vec soc_solve(const Vec& lambda, const Vec& d) {
  const int n = static_cast<int>(lambda.size());
  const Vec l1 = lambda.tail(n - 1);
  const double det = lambda(0) * lambda(0) - l1.squaredNorm();
  Vec x(n);
  x(0) = (lambda(0) * d(0) - l1.dot(d.tail(n - 1))) / det;
  x.tail(n - 1) = (d.tail(n - 1) - x(0) * l1) / lambda(0);
  return x;
}

// Largest step alpha with u + alpha du staying in the cone (inf when free).
inline double orthant_step(const Eigen::Ref<const Vec>& u, const Eigen::Ref<const Vec>& du) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (du(i) < 0.0) a = std::min(a, -u(i) / du(i));
  return a;
}

inline double soc_step(const Eigen::Ref<const Vec>& u, const Eigen::Ref<const Vec>& du) {
  const int n = static_cast<int>(u.size());
  const double c2 = du(0) * du(0) - du.tail(n - 1).squaredNorm();
  const double c1 = u(0) * du(0) - u.tail(n - 1).dot(du.tail(n - 1));
  const double c0 = soc_residual(u);
  const double inf = std::numeric_limits<double>::infinity();
  // the leading entry must stay nonnegative (guards against passing through
  // the origin into the negative cone on near-tangent steps)
  double a = du(0) < 0.0 ? -u(0) / du(0) : inf;
  // smallest positive root of c2 a^2 + 2 c1 a + c0 = 0
  if (std::abs(c2) < 1e-300) {
    if (c1 >= 0.0) return a;
    return std::min(a, -c0 / (2.0 * c1));
  }
  const double disc = c1 * c1 - c2 * c0;
  if (disc < 0.0) return c2 > 0.0 ? a : 0.0;
  // numerically stable quadratic roots (c2 may underflow to ~0)
  const double q = -(c1 + std::copysign(std::sqrt(disc), c1));
  if (q != 0.0) {
    const double r1 = q / c2;
    const double r2 = c0 / q;
    if (r1 > 0.0) a = std::min(a, r1);
    if (r2 > 0.0) a = std::min(a, r2);
  }
  return a;
}

struct ConeWork {
  const ConicData* cone = nullptr;
  std::vector<NtBlock> blocks;

  template <typename Fn>
  void for_each_block(Fn&& fn) const {
    int off = 0, bi = 0;
    if (cone->nl > 0) fn(bi++, off, cone->nl, true), off += cone->nl;
    for (int d : cone->soc_dims) fn(bi++, off, d, false), off += d;
  }

  void update(const Vec& s, const Vec& z) {
    blocks.clear();
    int off = 0;
    if (cone->nl > 0) {
      blocks.push_back(nt_orthant(s.segment(0, cone->nl), z.segment(0, cone->nl)));
      off = cone->nl;
    }
    for (int d : cone->soc_dims) {
      blocks.push_back(nt_soc(s.segment(off, d), z.segment(off, d)));
      off += d;
    }
  }

  Vec apply_W(const Vec& v) const { return apply(v, [](const NtBlock& b) -> const Eigen::MatrixXd& { return b.W; }); }
  Vec apply_W2(const Vec& v) const { return apply(v, [](const NtBlock& b) -> const Eigen::MatrixXd& { return b.W2; }); }
  Vec apply_Winv2(const Vec& v) const { return apply(v, [](const NtBlock& b) -> const Eigen::MatrixXd& { return b.Winv2; }); }

  // W^-1 v via W^-2 (W v)? avoid: W^-1 = W^-2 * W is wrong order-free since
  // symmetric blocks commute with themselves: W^-1 v = W^-2 (W v).
  Vec apply_Winv(const Vec& v) const { return apply_Winv2(apply_W(v)); }

  Vec lambda() const {
    Vec l(cone->m());
    for_each_block([&](int bi, int off, int d, bool) { l.segment(off, d) = blocks[bi].lambda; });
    return l;
  }

  // Jordan product in the scaled space, blockwise.
  Vec prod(const Vec& u, const Vec& v) const {
    Vec r(cone->m());
    for_each_block([&](int, int off, int d, bool orthant) {
      if (orthant)
        r.segment(off, d) = u.segment(off, d).cwiseProduct(v.segment(off, d));
      else
        r.segment(off, d) = soc_prod(u.segment(off, d), v.segment(off, d));
    });
    return r;
  }

  // Solve lambda o x = d blockwise.
  Vec lambda_solve(const Vec& d) const {
    Vec r(cone->m());
    for_each_block([&](int bi, int off, int dim, bool orthant) {
      if (orthant)
        r.segment(off, dim) =
            d.segment(off, dim).cwiseQuotient(blocks[bi].lambda);
      else
        r.segment(off, dim) = soc_solve(blocks[bi].lambda, d.segment(off, dim));
    });
    return r;
  }

  Vec identity() const {
    Vec e = Vec::Zero(cone->m());
    for_each_block([&](int, int off, int d, bool orthant) {
      if (orthant)
        e.segment(off, d).setOnes();
      else
        e(off) = 1.0;
    });
    return e;
  }

  double max_step(const Vec& u, const Vec& du) const {
    double a = std::numeric_limits<double>::infinity();
    for_each_block([&](int, int off, int d, bool orthant) {
      a = std::min(a, orthant ? orthant_step(u.segment(off, d), du.segment(off, d))
                              : soc_step(u.segment(off, d), du.segment(off, d)));
    });
    return a;
  }

 private:
  template <typename Sel>
  Vec apply(const Vec& v, Sel&& sel) const {
    Vec r(cone->m());
    for_each_block([&](int bi, int off, int d, bool) {
      r.segment(off, d) = sel(blocks[bi]) * v.segment(off, d);
    });
    return r;
  }
};

struct ConicResult {
  Vec x, z;
  SolveStatus status = SolveStatus::max_iter;
  double pres = 0.0, dres = 0.0, relgap = 0.0;
  int iterations = 0;
};

inline ConicResult solve_conic(const Vec& c, const ConicData& cone,
                               const SolverOptions& opt) {
  const int n = static_cast<int>(c.size());
  const int m = cone.m();
  const Eigen::MatrixXd& G = cone.G;
  const Vec& h = cone.h;

  ConeWork work;
  work.cone = &cone;
  // neutral interior start on the self-dual embedding
  Vec x = Vec::Zero(n);
  Vec e = work.identity();
  Vec s = e, z = e;
  double tau = 1.0, kappa = 1.0;

  const double hnorm = std::max(1.0, h.norm());
  const double cnorm = std::max(1.0, c.norm());
  const int deg = cone.degree();

  ConicResult res;
  // best primal-dual pair so far; returned if later iterations break down
  double best_merit = std::numeric_limits<double>::infinity();
  Vec best_x = x, best_z = z;
  double best_pres = 0.0, best_dres = 0.0, best_relgap = 0.0, best_tau = tau;
  for (int it = 0; it < opt.max_iters; ++it) {
    res.iterations = it;
    const Vec rx = G.transpose() * z + c * tau;
    const Vec rz = s + G * x - h * tau;
    const double rtau = kappa + c.dot(x) + h.dot(z);
    const double gap = s.dot(z);
    const double mu = (gap + tau * kappa) / (deg + 1);

    const double pcost = c.dot(x) / tau;
    res.pres = rz.norm() / (tau * hnorm);
    res.dres = rx.norm() / (tau * cnorm);
    res.relgap = gap / (tau * tau) / std::max(1.0, std::abs(pcost));
    const double merit = std::max({res.pres, res.dres, res.relgap});
    if (merit < best_merit) {
      best_merit = merit;
      best_x = x;
      best_z = z;
      best_tau = tau;
      best_pres = res.pres;
      best_dres = res.dres;
      best_relgap = res.relgap;
    }
    if (res.pres <= opt.feas_tol && res.dres <= opt.feas_tol &&
        res.relgap <= opt.gap_tol) {
      res.x = x / tau;
      res.z = z / tau;
      res.status = SolveStatus::optimal;
      return res;
    }
    // numerical breakdown near the solution: return the best iterate
    if (merit > 1e3 * best_merit && best_merit < 1e-6) break;
    // infeasibility certificates (tau -> 0, kappa > 0)
    const double hz = h.dot(z);
    if (hz < -1e-12) {
      const Vec zc = z / (-hz);
      if ((G.transpose() * zc).norm() <= opt.feas_tol * cnorm) {
        res.z = zc;
        res.status = SolveStatus::infeasible;
        return res;
      }
    }
    const double cx = c.dot(x);
    if (cx < -1e-12) {
      const Vec xc = x / (-cx);
      if ((G * xc + s / (-cx)).norm() <= opt.feas_tol * hnorm) {
        // dual infeasible (objective unbounded below); cannot happen for the
        // power-bounded programs built here, flagged as infeasible.
        res.status = SolveStatus::infeasible;
        return res;
      }
    }

    work.update(s, z);
    const Vec lambda = work.lambda();

    // KKT matrix [0 G'; G -W^2] factored through G' W^-2 G
    Eigen::MatrixXd GW(m, n);
    {
      // GW = W^-2 G, assembled blockwise
      work.for_each_block([&](int bi, int off, int d, bool) {
        GW.middleRows(off, d) = work.blocks[bi].Winv2 * G.middleRows(off, d);
      });
    }
    Eigen::MatrixXd M = G.transpose() * GW;
    M.diagonal().array() += 1e-13 * (1.0 + M.diagonal().maxCoeff());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);

    auto kraw = [&](const Vec& bx, const Vec& bz, Vec& xv, Vec& zv) {
      xv = ldlt.solve(bx + GW.transpose() * bz);
      zv = work.apply_Winv2(G * xv - bz);
    };
    // iterative refinement on the full KKT system
    //   G' z = bx,  G x - W^2 z = bz
    auto ksolve = [&](const Vec& bx, const Vec& bz, Vec& xv, Vec& zv) {
      kraw(bx, bz, xv, zv);
      double prev = std::numeric_limits<double>::infinity();
      for (int ref = 0; ref < 8; ++ref) {
        const Vec r1 = bx - G.transpose() * zv;
        const Vec r2 = bz - (G * xv - work.apply_W2(zv));
        const double rn = std::sqrt(r1.squaredNorm() + r2.squaredNorm());
        if (!(rn < 0.5 * prev)) break;
        prev = rn;
        Vec cx(n), cz(m);
        kraw(r1, r2, cx, cz);
        xv += cx;
        zv += cz;
      }
    };

    Vec x1(n), z1(m);
    ksolve(-c, h, x1, z1);
    const double denom = c.dot(x1) + h.dot(z1) - kappa / tau;

    auto direction = [&](double sigma, const Vec& d1, double d2, Vec& dx, Vec& dz,
                         Vec& ds, double& dtau, double& dkappa) {
      const double rs = 1.0 - sigma;
      const Vec wld = work.apply_W(work.lambda_solve(d1));
      Vec x2(n), z2(m);
      ksolve(-rs * rx, -rs * rz + wld, x2, z2);
      dtau = (-rs * rtau + d2 / tau - c.dot(x2) - h.dot(z2)) / denom;
      dx = x2 + dtau * x1;
      dz = z2 + dtau * z1;
      ds = -wld - work.apply_W2(dz);
      dkappa = (-d2 - kappa * dtau) / tau;
    };

    // predictor
    Vec dx(n), dz(m), ds(m), d1 = work.prod(lambda, lambda);
    double dtau, dkappa;
    direction(0.0, d1, tau * kappa, dx, dz, ds, dtau, dkappa);

    double alpha = std::min({work.max_step(s, ds), work.max_step(z, dz),
                             dtau < 0 ? -tau / dtau : std::numeric_limits<double>::infinity(),
                             dkappa < 0 ? -kappa / dkappa : std::numeric_limits<double>::infinity()});
    alpha = std::min(1.0, alpha);
    const double sigma = std::min(1.0, std::pow(1.0 - alpha, 3.0));

    // corrector (Mehrotra)
    const Vec corr = work.prod(work.apply_Winv(ds), work.apply_W(dz));
    d1 = work.prod(lambda, lambda) + corr - sigma * mu * e;
    const double d2 = tau * kappa + dtau * dkappa - sigma * mu;
    direction(sigma, d1, d2, dx, dz, ds, dtau, dkappa);

    alpha = std::min({work.max_step(s, ds), work.max_step(z, dz),
                      dtau < 0 ? -tau / dtau : std::numeric_limits<double>::infinity(),
                      dkappa < 0 ? -kappa / dkappa : std::numeric_limits<double>::infinity()});
    alpha = std::min(1.0, 0.99 * alpha);

    x += alpha * dx;
    s += alpha * ds;
    z += alpha * dz;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
  }
  res.x = best_x / best_tau;
  res.z = best_z / best_tau;
  res.pres = best_pres;
  res.dres = best_dres;
  res.relgap = best_relgap;
  // accept the best iterate when it is within a small factor of the target:
  // double-precision normal equations bottom out around 1e-8 scaled residuals
  if (best_merit <= 100.0 * std::max(opt.feas_tol, opt.gap_tol))
    res.status = SolveStatus::optimal;
  return res;
}

}  // namespace detail

/// Solve the program. The warm-start hint is accepted for interface
/// stability but the homogeneous embedding starts from its neutral point.
inline void polish(const ConvexProgram& program, PrimalDualSolution& sol);

inline PrimalDualSolution solve(const ConvexProgram& program,
                                const SolverOptions& options = {},
                                const Vec* /*warm_hint*/ = nullptr) {
  program.validate();
  const auto cone = detail::lower(program);
  const auto res = detail::solve_conic(program.c, cone, options);

  PrimalDualSolution sol;
  sol.status = res.status;
  sol.iterations = res.iterations;
  sol.primal_residual = res.pres;
  sol.dual_residual = res.dres;
  sol.gap = res.relgap;
  sol.linear_duals = Vec::Zero(static_cast<Eigen::Index>(program.linear.size()));
  sol.quadratic_duals = Vec::Zero(static_cast<Eigen::Index>(program.quadratic.size()));
  if (res.x.size() > 0) {
    sol.z = res.x;
    sol.objective = program.c.dot(res.x);
  }
  if (res.z.size() > 0) {
    for (size_t i = 0; i < program.linear.size(); ++i)
      sol.linear_duals(static_cast<Eigen::Index>(i)) = res.z(static_cast<Eigen::Index>(i));
    int row = cone.nl;
    for (size_t j = 0; j < program.quadratic.size(); ++j) {
      const int d = cone.soc_dims[j];
      // multiplier of the scalar quadratic constraint recovered from the
      // SOC dual block (z0, z1, zlast): mu = (z0 - zlast)/2
      sol.quadratic_duals(static_cast<Eigen::Index>(j)) =
          0.5 * (res.z(row) - res.z(row + d - 1));
      row += d;
    }
  }
  if (sol.status == SolveStatus::optimal && sol.z.size() == program.n)
    polish(program, sol);
  return sol;
}

struct KktReport {
  double stationarity = 0.0;
  double primal_feasibility = 0.0;
  double dual_feasibility = 0.0;
  double complementarity = 0.0;
};

inline KktReport kkt_residuals(const ConvexProgram& program,
                               const PrimalDualSolution& sol) {
  KktReport rep;
  Vec grad = program.c;
  for (size_t i = 0; i < program.linear.size(); ++i) {
    const auto& lc = program.linear[i];
    const double mu = sol.linear_duals(static_cast<Eigen::Index>(i));
    const double viol = lc.a.dot(sol.z) - lc.b;
    grad += mu * lc.a;
    rep.primal_feasibility = std::max(rep.primal_feasibility, viol);
    rep.dual_feasibility = std::max(rep.dual_feasibility, -mu);
    rep.complementarity = std::max(rep.complementarity, std::abs(mu * viol));
  }
  for (size_t j = 0; j < program.quadratic.size(); ++j) {
    const auto& qc = program.quadratic[j];
    const double nu = sol.quadratic_duals(static_cast<Eigen::Index>(j));
    const Vec resid = qc.F * sol.z + qc.f;
    const double g = resid.squaredNorm() + qc.q.dot(sol.z) - qc.r;
    grad += nu * (2.0 * qc.F.transpose() * resid + qc.q);
    rep.primal_feasibility = std::max(rep.primal_feasibility, g);
    rep.dual_feasibility = std::max(rep.dual_feasibility, -nu);
    rep.complementarity = std::max(rep.complementarity, std::abs(nu * g));
  }
  rep.stationarity = grad.lpNorm<Eigen::Infinity>();
  return rep;
}

/// Newton refinement of the KKT equality system on the active set reported by
/// the interior-point solve. The IPM iterates bottom out near the accuracy of
/// the scaled KKT solves; with the correct active set, these few equality
/// Newton steps converge to machine precision. The polished point is kept
/// only when it strictly reduces the worst KKT residual.
inline void polish(const ConvexProgram& program, PrimalDualSolution& sol) {
  const int n = program.n;
  std::vector<size_t> al, aq;
  for (size_t i = 0; i < program.linear.size(); ++i) {
    const auto& lc = program.linear[i];
    const double viol = lc.a.dot(sol.z) - lc.b;
    if (sol.linear_duals(static_cast<Eigen::Index>(i)) > 1e-9 ||
        std::abs(viol) <= 1e-7 * (1.0 + std::abs(lc.b)))
      al.push_back(i);
  }
  for (size_t j = 0; j < program.quadratic.size(); ++j) {
    const auto& qc = program.quadratic[j];
    const double g = (qc.F * sol.z + qc.f).squaredNorm() + qc.q.dot(sol.z) - qc.r;
    if (sol.quadratic_duals(static_cast<Eigen::Index>(j)) > 1e-9 ||
        std::abs(g) <= 1e-7 * (1.0 + std::abs(qc.r)))
      aq.push_back(j);
  }
  const int m = static_cast<int>(al.size() + aq.size());
  if (m == 0 || m > n) return;

  const KktReport before = kkt_residuals(program, sol);
  Vec z = sol.z;
  Vec nu(m);
  for (size_t i = 0; i < al.size(); ++i)
    nu(static_cast<Eigen::Index>(i)) =
        std::max(0.0, sol.linear_duals(static_cast<Eigen::Index>(al[i])));
  for (size_t j = 0; j < aq.size(); ++j)
    nu(static_cast<Eigen::Index>(al.size() + j)) =
        std::max(0.0, sol.quadratic_duals(static_cast<Eigen::Index>(aq[j])));

  for (int it = 0; it < 3; ++it) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, n);
    Vec grad = program.c;
    Vec rf(m);
    int row = 0;
    for (size_t i : al) {
      const auto& lc = program.linear[i];
      grad += nu(row) * lc.a;
      J.row(row) = lc.a.transpose();
      rf(row) = lc.a.dot(z) - lc.b;
      ++row;
    }
    for (size_t j : aq) {
      const auto& qc = program.quadratic[j];
      const Vec resid = qc.F * z + qc.f;
      const Vec gvec = 2.0 * qc.F.transpose() * resid + qc.q;
      grad += nu(row) * gvec;
      H += 2.0 * nu(row) * qc.F.transpose() * qc.F;
      J.row(row) = gvec.transpose();
      rf(row) = resid.squaredNorm() + qc.q.dot(z) - qc.r;
      ++row;
    }
    Eigen::MatrixXd Km = Eigen::MatrixXd::Zero(n + m, n + m);
    Km.topLeftCorner(n, n) = H;
    Km.topRightCorner(n, m) = J.transpose();
    Km.bottomLeftCorner(m, n) = J;
    Vec rhs(n + m);
    rhs << -grad, -rf;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Km);
    if (!lu.isInvertible()) return;
    const Vec d = lu.solve(rhs);
    if (!d.allFinite()) return;
    z += d.head(n);
    nu += d.tail(m);
  }
  if ((nu.array() < -1e-10).any()) return;

  PrimalDualSolution cand = sol;
  cand.z = z;
  cand.objective = program.c.dot(z);
  for (size_t i = 0; i < al.size(); ++i)
    cand.linear_duals(static_cast<Eigen::Index>(al[i])) =
        std::max(0.0, nu(static_cast<Eigen::Index>(i)));
  for (size_t j = 0; j < aq.size(); ++j)
    cand.quadratic_duals(static_cast<Eigen::Index>(aq[j])) =
        std::max(0.0, nu(static_cast<Eigen::Index>(al.size() + j)));
  const KktReport after = kkt_residuals(program, cand);
  const auto worst = [](const KktReport& r) {
    return std::max({r.stationarity, r.primal_feasibility, r.complementarity});
  };
  if (worst(after) < worst(before)) sol = std::move(cand);
}

/// One-constraint-per-line text dump for external cross-checking.
inline void dump(const ConvexProgram& program, std::ostream& os) {
  os << "vars " << program.n << "\n";
  os << "min";
  for (int i = 0; i < program.n; ++i) os << " " << program.c(i);
  os << "\n";
  for (const auto& lc : program.linear) {
    os << "lin";
    for (int i = 0; i < program.n; ++i) os << " " << lc.a(i);
    os << " <= " << lc.b << "\n";
  }
  for (const auto& qc : program.quadratic) {
    os << "quad rows=" << qc.F.rows();
    for (Eigen::Index r = 0; r < qc.F.rows(); ++r)
      for (int i = 0; i < program.n; ++i) os << " " << qc.F(r, i);
    os << " f";
    for (Eigen::Index r = 0; r < qc.f.size(); ++r) os << " " << qc.f(r);
    os << " q";
    for (int i = 0; i < program.n; ++i) os << " " << qc.q(i);
    os << " <= " << qc.r << "\n";
  }
}

}  // namespace rsma::socp
