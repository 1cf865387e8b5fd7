#pragma once

#include <utility>
#include <vector>

#include "seriesdesign/design.hpp"

namespace seriesdesign {

/// Observations Y_{t_1}, ..., Y_{t_n} at the design points.
struct Sample {
  Sample(DesignGrid design, Vector observations);

  DesignGrid design;
  Vector observations;
};

struct EstimateResult {
  Vector theta_blue;
  double shrink_factor = 0.0;
  Vector theta_shrunk;
  KernelCase kase = KernelCase::A;
  /// c (case A) or m (case B); 0 in case C, where nothing is shrunk.
  double c_or_m = 0.0;
};

/**
 * Linear unbiased estimator of the first J coefficients for a fixed
 * kernel, basis and design, prepared once and applied to many samples.
 *
 * The estimator is a J x n matrix A with theta_blue = A Y. With
 * z = sum beta_i (Y_i/v_i - Y_{i-1}/v_{i-1}) / sqrt(dq_i), so E z = B theta:
 *
 * - u(0) != 0: theta = C^{-1} (M B^- z + Phi(0) Y_0 / (u(0) v(0))).
 * - u(0) = 0, one index d with phi_d / v constant: the other coordinates
 *   solve the reduced system B~ theta~ = z~, and theta_d is recovered from
 *   the errorless Y_0 = Phi(0)^T theta.
 * - u(0) = 0 otherwise: theta = B^{-1} z.
 *
 * Any other singular configuration throws UnderdeterminedDesign.
 */
class SeriesEstimator {
 public:
  SeriesEstimator(TriangularKernel kernel, OrthonormalBasis basis, DesignGrid design,
                  const QuadratureRule& rule = default_rule());

  const DesignGrid& design() const { return design_; }
  const OrthonormalBasis& basis() const { return basis_; }
  const MomentMatrices& moments() const { return moments_; }

  /// J x n matrix A with theta_blue = A Y.
  const Matrix& blue_operator() const { return A_; }
  /// J x n matrix R of the Riemann-sum estimator.
  const Matrix& riemann_operator() const { return R_; }
  /// Index of the structurally degenerate coordinate on the u(0) = 0 path, or -1.
  int degenerate_index() const { return degenerate_; }

  Vector blue(const Vector& y) const;
  Vector riemann(const Vector& y) const;
  EstimateResult shrink(const Vector& theta_blue, double y0) const;
  EstimateResult estimate(const Vector& y) const;

  /// Exact covariance A Sigma A^T of the BLUE under the kernel.
  Matrix blue_covariance() const;

 private:
  void check_length(const Vector& y) const;

  TriangularKernel kernel_;
  OrthonormalBasis basis_;
  DesignGrid design_;
  MomentMatrices moments_;
  Matrix A_;
  Matrix R_;
  int degenerate_ = -1;
};

Vector blue_estimate(const Sample& sample, const TriangularKernel& kernel, const OrthonormalBasis& basis);

/**
 * Shrinks the BLUE by c/(1+c) with c = theta^T C theta when u(0) != 0, or by
 * m/(1+m) with m = theta^T M theta when u(0) = 0 and |y0| <= 1e-9. When
 * u(0) = 0 and |y0| > 1e-9 the estimate is returned unshrunk.
 */
EstimateResult shrink_estimate(const Vector& theta_blue, const TriangularKernel& kernel,
                               const OrthonormalBasis& basis, double y0 = 0.0,
                               const QuadratureRule& rule = default_rule());

/// theta_j = sum_{i>=2} (t_i - t_{i-1}) phi_j(t_{i-1}) Y_{t_{i-1}}.
Vector riemann_estimate(const Sample& sample, const OrthonormalBasis& basis);

/// (f_hat, f_check): reconstructions from theta_shrunk and theta_blue.
std::pair<SeriesFunction, SeriesFunction> estimate_functions(const EstimateResult& result,
                                                             const OrthonormalBasis& basis);

}  // namespace seriesdesign
