#pragma once

#include <optional>
#include <vector>

#include "seriesdesign/basis.hpp"
#include "seriesdesign/kernel.hpp"

namespace seriesdesign {

/// Sampling times 0 = t_1 < ... < t_n = 1 with consecutive gaps >= min_gap.
class DesignGrid {
 public:
  /// Throws ContractViolation on n < 2, wrong endpoints, non-increasing points or a gap below min_gap.
  explicit DesignGrid(std::vector<double> points, double min_gap = 1e-3);

  static DesignGrid equidistant(int n, double min_gap = 1e-3);

  const std::vector<double>& points() const { return points_; }
  int size() const { return static_cast<int>(points_.size()); }
  double operator[](int i) const { return points_[i]; }
  double min_gap() const { return min_gap_; }

  /// Points of the design reflected through t -> 1 - t.
  DesignGrid mirrored() const;

 private:
  std::vector<double> points_;
  double min_gap_;
};

/// The fixed comparison grids (0, .45, .90, 1) for n = 4 and (0, .18, ..., .90, 1) for n = 7.
DesignGrid comparative_design(int n);

/// Increments beta_i = (Phi(t_i)/v(t_i) - Phi(t_{i-1})/v(t_{i-1})) / sqrt(dq_i) and B = sum beta_i beta_i^T.
struct BetaSet {
  std::vector<Vector> betas;
  std::vector<double> dq;
  SymMatrix B;
};

struct MomentMatrices {
  SymMatrix M;
  std::optional<SymMatrix> C;
  SymMatrix B;
  GeneralizedInverse B_ginv;
  std::vector<Vector> betas;
  std::vector<double> dq;
};

struct WeightSet {
  std::vector<Vector> gammas;
  std::vector<Vector> mus;
};

/**
 * M = integral of g g^T / q' over [0,1] with g = d/dt[Phi/v].
 * Throws DegenerateKernel if q' <= 0 at a quadrature node.
 */
SymMatrix build_M(const TriangularKernel& kernel, const OrthonormalBasis& basis,
                  const QuadratureRule& rule = default_rule());

/// C = M + Phi(0) Phi(0)^T / (u(0) v(0)). Throws ContractViolation when u(0) = 0.
SymMatrix build_C(const TriangularKernel& kernel, const OrthonormalBasis& basis,
                  const QuadratureRule& rule = default_rule());

/// Throws DegenerateKernel when q does not increase across an interval.
BetaSet build_betas_B(const TriangularKernel& kernel, const OrthonormalBasis& basis, const DesignGrid& design);

/// gamma_i = M B^- beta_i and mu_i = gamma_i / sqrt(dq_i).
WeightSet optimal_weights(const SymMatrix& M, const BetaSet& betas, const GeneralizedInverse& B_ginv);

/// True when M = M B^- B holds to rel_tol, i.e. the unbiasedness constraint is satisfiable.
bool constraint_feasible(const SymMatrix& M, const SymMatrix& B, const GeneralizedInverse& B_ginv,
                         double rel_tol = 1e-8);

/**
 * Kernel and basis bound together with M computed once. Used by the
 * optimizer, which evaluates the criterion many times for fixed M.
 */
class DesignProblem {
 public:
  DesignProblem(TriangularKernel kernel, OrthonormalBasis basis, const QuadratureRule& rule = default_rule());

  const TriangularKernel& kernel() const { return kernel_; }
  const OrthonormalBasis& basis() const { return basis_; }
  const SymMatrix& M() const { return M_; }
  const std::optional<SymMatrix>& C() const { return C_; }

  MomentMatrices moments(const DesignGrid& design) const;

  /// tr(M B^- M), or +inf when the constraint M = sum gamma_i beta_i^T cannot be met.
  double criterion(const DesignGrid& design) const;

 private:
  TriangularKernel kernel_;
  OrthonormalBasis basis_;
  SymMatrix M_;
  std::optional<SymMatrix> C_;
};

/// tr(M B^- M); see DesignProblem::criterion.
double criterion(const TriangularKernel& kernel, const OrthonormalBasis& basis, const DesignGrid& design);

struct OptimizedDesign {
  DesignGrid design;
  double criterion;
  int evaluations;
};

/**
 * Minimizes the criterion over the n - 2 interior points with particle swarm
 * search on [min_gap, 1 - min_gap]. Each particle is sorted before
 * evaluation; sorted points closer than min_gap score +inf.
 *
 * When the mirrored design scores the same to 1e-9 relative, the one with
 * the smaller first interior point is returned.
 *
 * Requires n >= 3, and n >= J + 1 when u(0) != 0.
 */
OptimizedDesign optimize_design(const TriangularKernel& kernel, const OrthonormalBasis& basis, int n,
                                const PsoConfig& pso, double min_gap = 1e-3);

struct L2Distance {
  double V;
  double bias;
  /// ||theta||^4 / (1 + c)^2 with c = theta^T C theta (u(0) != 0) or theta^T M theta.
  double k_factor;
};

/**
 * Variance and bias parts of the expected squared distance between the
 * continuous-time estimator and its discretization with weights mu_i,
 * integrated per design interval.
 */
L2Distance expected_l2_distance(const TriangularKernel& kernel, const OrthonormalBasis& basis,
                                const FunctionModel& f, const DesignGrid& design, const WeightSet& weights,
                                const QuadratureRule& rule = default_rule());

}  // namespace seriesdesign
