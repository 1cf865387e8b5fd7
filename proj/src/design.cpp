#include "seriesdesign/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace seriesdesign {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// g(t) = d/dt[Phi(t)/v(t)] and q'(t).
void g_and_dq(const TriangularKernel& k, const OrthonormalBasis& basis, double t, Vector& g, double& dq) {
  const BasisValues b = basis.evaluate(t);
  const double u = k.u(t), du = k.du(t), v = k.v(t), dv = k.dv(t);
  g = (b.derivative * v - b.value * dv) / (v * v);
  dq = (du * v - u * dv) / (v * v);
  if (!(dq > 0.0)) {
    std::ostringstream msg;
    msg << "degenerate kernel: q'(" << t << ") = " << dq;
    throw DegenerateKernel(msg.str());
  }
}

}  // namespace

DesignGrid::DesignGrid(std::vector<double> points, double min_gap) : points_(std::move(points)), min_gap_(min_gap) {
  if (!(min_gap_ >= 0.0)) {
    throw ContractViolation("DesignGrid: min_gap must be nonnegative");
  }
  if (points_.size() < 2) {
    throw ContractViolation("DesignGrid: at least two points required");
  }
  if (points_.front() != 0.0 || points_.back() != 1.0) {
    throw ContractViolation("DesignGrid: first point must be 0 and last point 1");
  }
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double gap = points_[i] - points_[i - 1];
    if (!(gap > 0.0) || gap < min_gap_ - 1e-12) {
      std::ostringstream msg;
      msg << "DesignGrid: gap " << gap << " between points " << i - 1 << " and " << i << " violates min_gap "
          << min_gap_;
      throw ContractViolation(msg.str());
    }
  }
}

DesignGrid DesignGrid::equidistant(int n, double min_gap) {
  if (n < 2) {
    throw ContractViolation("DesignGrid::equidistant: n must be >= 2");
  }
  std::vector<double> pts(n);
  for (int i = 0; i < n; ++i) {
    pts[i] = static_cast<double>(i) / (n - 1);
  }
  pts.back() = 1.0;
  return DesignGrid(std::move(pts), min_gap);
}

DesignGrid DesignGrid::mirrored() const {
  std::vector<double> pts(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    pts[i] = 1.0 - points_[points_.size() - 1 - i];
  }
  pts.front() = 0.0;
  pts.back() = 1.0;
  return DesignGrid(std::move(pts), min_gap_);
}

DesignGrid comparative_design(int n) {
  if (n == 4) {
    return DesignGrid({0.0, 0.45, 0.90, 1.0});
  }
  if (n == 7) {
    return DesignGrid({0.0, 0.18, 0.36, 0.54, 0.72, 0.90, 1.0});
  }
  throw ContractViolation("comparative_design: only n = 4 and n = 7 are defined");
}

SymMatrix build_M(const TriangularKernel& kernel, const OrthonormalBasis& basis, const QuadratureRule& rule) {
  const int J = basis.size();
  Matrix M = Matrix::Zero(J, J);
  Vector g(J);
  double dq = 0.0;
  rule.for_each_node(0.0, 1.0, [&](double t, double w) {
    g_and_dq(kernel, basis, t, g, dq);
    M.noalias() += (w / dq) * g * g.transpose();
  });
  return SymMatrix(M);
}

SymMatrix build_C(const TriangularKernel& kernel, const OrthonormalBasis& basis, const QuadratureRule& rule) {
  const double u0 = kernel.u(0.0);
  if (u0 == 0.0) {
    throw ContractViolation("case B/C: C undefined, use M");
  }
  const Vector p0 = basis.evaluate(0.0).value;
  const Matrix C = build_M(kernel, basis, rule).matrix() + p0 * p0.transpose() / (u0 * kernel.v(0.0));
  return SymMatrix(C);
}

BetaSet build_betas_B(const TriangularKernel& kernel, const OrthonormalBasis& basis, const DesignGrid& design) {
  const int n = design.size();
  const int J = basis.size();
  BetaSet out;
  out.betas.reserve(n - 1);
  out.dq.reserve(n - 1);
  Matrix B = Matrix::Zero(J, J);
  double t_prev = design[0];
  Vector prev = basis.evaluate(t_prev).value / kernel.v(t_prev);
  double q_prev = kernel.u(t_prev) / kernel.v(t_prev);
  for (int i = 1; i < n; ++i) {
    const double t = design[i];
    const double v = kernel.v(t);
    const Vector cur = basis.evaluate(t).value / v;
    const double q = kernel.u(t) / v;
    const double dq = q - q_prev;
    if (!(dq > 0.0)) {
      std::ostringstream msg;
      msg << "zero q-increment on [" << t_prev << ", " << t << "]";
      throw DegenerateKernel(msg.str());
    }
    Vector beta = (cur - prev) / std::sqrt(dq);
    B.noalias() += beta * beta.transpose();
    out.betas.push_back(std::move(beta));
    out.dq.push_back(dq);
    prev = cur;
    q_prev = q;
    t_prev = t;
  }
  out.B = SymMatrix(B);
  return out;
}

WeightSet optimal_weights(const SymMatrix& M, const BetaSet& betas, const GeneralizedInverse& B_ginv) {
  if (M.dim() != B_ginv.inverse.dim() || betas.betas.size() != betas.dq.size()) {
    throw ContractViolation("optimal_weights: inconsistent dimensions");
  }
  const Matrix MBg = M.matrix() * B_ginv.inverse.matrix();
  WeightSet out;
  for (std::size_t i = 0; i < betas.betas.size(); ++i) {
    if (betas.betas[i].size() != M.dim()) {
      throw ContractViolation("optimal_weights: beta has wrong length");
    }
    Vector gamma = MBg * betas.betas[i];
    out.mus.push_back(gamma / std::sqrt(betas.dq[i]));
    out.gammas.push_back(std::move(gamma));
  }
  return out;
}

bool constraint_feasible(const SymMatrix& M, const SymMatrix& B, const GeneralizedInverse& B_ginv,
                         double rel_tol) {
  const Matrix residual = M.matrix() - M.matrix() * B_ginv.inverse.matrix() * B.matrix();
  const double scale = std::max(1.0, M.max_abs());
  return residual.cwiseAbs().maxCoeff() <= rel_tol * scale;
}

DesignProblem::DesignProblem(TriangularKernel kernel, OrthonormalBasis basis, const QuadratureRule& rule)
    : kernel_(std::move(kernel)), basis_(std::move(basis)), M_(build_M(kernel_, basis_, rule)) {
  if (kernel_.u(0.0) != 0.0) {
    C_ = build_C(kernel_, basis_, rule);
  }
}

MomentMatrices DesignProblem::moments(const DesignGrid& design) const {
  BetaSet bs = build_betas_B(kernel_, basis_, design);
  MomentMatrices out;
  out.M = M_;
  out.C = C_;
  out.B_ginv = psd_solve_or_ginverse(bs.B);
  out.B = std::move(bs.B);
  out.betas = std::move(bs.betas);
  out.dq = std::move(bs.dq);
  return out;
}

double DesignProblem::criterion(const DesignGrid& design) const {
  const BetaSet bs = build_betas_B(kernel_, basis_, design);
  const GeneralizedInverse gi = psd_solve_or_ginverse(bs.B);
  if (!constraint_feasible(M_, bs.B, gi)) {
    return kInf;
  }
  return (M_.matrix() * gi.inverse.matrix() * M_.matrix()).trace();
}

double criterion(const TriangularKernel& kernel, const OrthonormalBasis& basis, const DesignGrid& design) {
  return DesignProblem(kernel, basis).criterion(design);
}

OptimizedDesign optimize_design(const TriangularKernel& kernel, const OrthonormalBasis& basis, int n,
                                const PsoConfig& pso, double min_gap) {
  if (n < 3) {
    throw ContractViolation("optimize_design: n must be >= 3");
  }
  if (kernel.u(0.0) != 0.0 && n < basis.size() + 1) {
    throw ContractViolation("optimize_design: n must be >= J + 1 when u(0) != 0");
  }
  if (!(min_gap > 0.0) || (n - 1) * min_gap > 1.0) {
    throw ContractViolation("optimize_design: infeasible combination of n and min_gap");
  }
  pso.validate();

  const DesignProblem problem(kernel, basis);
  const int d = n - 2;
  std::vector<double> pts(n);
  auto to_points = [&](const Vector& x) -> bool {
    pts.front() = 0.0;
    pts.back() = 1.0;
    for (int i = 0; i < d; ++i) {
      pts[i + 1] = x(i);
    }
    std::sort(pts.begin() + 1, pts.end() - 1);
    for (int i = 1; i < n; ++i) {
      if (pts[i] - pts[i - 1] < min_gap) {
        return false;
      }
    }
    return true;
  };
  auto objective = [&](const Vector& x) {
    if (!to_points(x)) {
      return kInf;
    }
    try {
      return problem.criterion(DesignGrid(pts, min_gap));
    } catch (const NumericalError&) {
      return kInf;
    }
  };

  const Vector lower = Vector::Constant(d, min_gap);
  const Vector upper = Vector::Constant(d, 1.0 - min_gap);
  const PsoResult res = pso_minimize(objective, lower, upper, pso);
  if (!std::isfinite(res.value) || !to_points(res.argmin)) {
    throw NumericalError("optimize_design: no feasible design found");
  }

  DesignGrid best(pts, min_gap);
  double value = problem.criterion(best);
  const DesignGrid mirror = best.mirrored();
  if (mirror[1] < best[1]) {
    const double mirror_value = problem.criterion(mirror);
    if (std::abs(mirror_value - value) <= 1e-9 * std::abs(value)) {
      best = mirror;
      value = mirror_value;
    }
  }
  return {best, value, res.evaluations};
}

L2Distance expected_l2_distance(const TriangularKernel& kernel, const OrthonormalBasis& basis,
                                const FunctionModel& f, const DesignGrid& design, const WeightSet& weights,
                                const QuadratureRule& rule) {
  const int n = design.size();
  const int J = basis.size();
  if (static_cast<int>(weights.mus.size()) != n - 1) {
    throw ContractViolation("expected_l2_distance: need one weight per design interval");
  }
  double V = 0.0;
  Vector bias = Vector::Zero(J);
  Vector g(J);
  double dq = 0.0;
  for (int i = 1; i < n; ++i) {
    const Vector& mu = weights.mus[i - 1];
    if (mu.size() != J) {
      throw ContractViolation("expected_l2_distance: weight has wrong length");
    }
    rule.for_each_node(design[i - 1], design[i], [&](double t, double w) {
      g_and_dq(kernel, basis, t, g, dq);
      const double v = kernel.v(t);
      const double hf = (f.df(t) * v - f.f(t) * kernel.dv(t)) / (v * v);
      const Vector diff = g / dq - mu;
      V += w * diff.squaredNorm() * dq;
      bias += (w * hf) * diff;
    });
  }

  const Vector theta = fourier_coefficients(basis, f, rule);
  const SymMatrix G = kernel.u(0.0) != 0.0 ? build_C(kernel, basis, rule) : build_M(kernel, basis, rule);
  const double c = theta.dot(G.matrix() * theta);
  const double norm2 = theta.squaredNorm();
  return {V, bias.squaredNorm(), norm2 * norm2 / ((1.0 + c) * (1.0 + c))};
}

}  // namespace seriesdesign
