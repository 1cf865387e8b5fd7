#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "seriesdesign/errors.hpp"

namespace seriesdesign {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RealFunction = std::function<double(double)>;

/**
 * Composite Gauss-Legendre rule: `order` nodes on each of `panels` uniform
 * subintervals of the integration range.
 *
 * A rule with order m integrates polynomials of degree < 2m exactly on
 * every panel.
 */
class QuadratureRule {
 public:
  explicit QuadratureRule(int order = 16, int panels = 16);

  int order() const { return order_; }
  int panels() const { return panels_; }

  /// Reference nodes and weights on [-1, 1].
  const std::vector<double>& reference_nodes() const { return nodes_; }
  const std::vector<double>& reference_weights() const { return weights_; }

  /// Calls visit(t, w) for every node t in [a, b] with its weight w.
  template <class Visit>
  void for_each_node(double a, double b, Visit&& visit) const {
    const double h = (b - a) / panels_;
    for (int p = 0; p < panels_; ++p) {
      const double lo = a + p * h;
      const double half = 0.5 * h;
      for (std::size_t k = 0; k < nodes_.size(); ++k) {
        visit(lo + half * (nodes_[k] + 1.0), half * weights_[k]);
      }
    }
  }

  /// All nodes and weights on [a, b], in panel order.
  void nodes_on(double a, double b, std::vector<double>& t, std::vector<double>& w) const;

 private:
  int order_;
  int panels_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Default rule used across the library: order 16, 16 panels.
const QuadratureRule& default_rule();

/// Composite Gauss-Legendre approximation of the integral of f over [a, b].
/// Throws NonIntegrableSample naming the node if f is not finite there.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureRule& rule = default_rule()) {
  if (!(a < b)) {
    throw ContractViolation("integrate: requires a < b");
  }
  double sum = 0.0;
  rule.for_each_node(a, b, [&](double t, double w) {
    const double y = f(t);
    if (!std::isfinite(y)) {
      std::ostringstream msg;
      msg << "non-integrable sample: f(" << t << ") = " << y;
      throw NonIntegrableSample(msg.str());
    }
    sum += w * y;
  });
  return sum;
}

/**
 * Dense symmetric matrix. Symmetry is exact: the constructor checks the
 * input is symmetric to a relative tolerance and then stores (A + A^T) / 2.
 */
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m, double rel_tol = 1e-10);

  static SymMatrix zero(Eigen::Index dim);
  static SymMatrix identity(Eigen::Index dim);

  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  double trace() const { return m_.trace(); }
  double max_abs() const { return m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff(); }

  /// Attempts a clamped Cholesky factorization; sets the PSD flag on success.
  bool certify_psd(double rel_tol = 1e-10);
  bool psd_certified() const { return psd_; }

 private:
  Matrix m_;
  bool psd_ = false;
};

/**
 * Cholesky factor L (A = L L^T) where pivots below rel_tol times the largest
 * diagonal entry are clamped to exact zeros, which zeroes the corresponding
 * column of L. Throws NotPsdError for a pivot below -rel_tol * scale or a
 * clamped row whose remaining entries do not vanish.
 */
Matrix clamped_cholesky(const Matrix& a, double rel_tol = 1e-12);

enum class InverseBranch { Inverse, Block, Spectral };

const char* to_string(InverseBranch branch);

struct GeneralizedInverse {
  SymMatrix inverse;
  int rank = 0;
  InverseBranch branch = InverseBranch::Inverse;
  /// Indices whose rows and columns were structurally zero (block branch).
  std::vector<int> degenerate;
};

/**
 * Inverse of a symmetric PSD matrix, or a generalized inverse when it is
 * singular.
 *
 * - PD to tolerance: the ordinary inverse.
 * - Singular only through rows/columns with all entries below
 *   rel_tol * max diagonal: zero block on those indices, inverse of the
 *   complementary principal submatrix elsewhere.
 * - Otherwise: spectral pseudoinverse, eigenvalues below rel_tol * lambda_max
 *   dropped.
 *
 * Every branch satisfies B B^- B = B. A negative eigenvalue below
 * -rel_tol * lambda_max throws NotPsdError.
 */
GeneralizedInverse psd_solve_or_ginverse(const SymMatrix& b, double rel_tol = 1e-10);

struct PsoConfig {
  int swarm_size = 40;
  int iterations = 300;
  double inertia = 0.729;
  double cognitive = 1.494;
  double social = 1.494;
  std::uint64_t seed = 42;

  /// Throws ContractViolation if a field is out of range.
  void validate() const;
};

struct PsoResult {
  Vector argmin;
  double value = 0.0;
  int evaluations = 0;
};

using Objective = std::function<double(const Vector&)>;

/**
 * Global-best particle swarm minimization over the box [lower, upper].
 *
 * Non-finite objective values count as +inf. Positions are clamped to the
 * box. Particles are evaluated in index order, so a fixed seed and config
 * reproduce the result bit for bit.
 */
PsoResult pso_minimize(const Objective& objective, const Vector& lower, const Vector& upper,
                       const PsoConfig& config);

/// SplitMix64 step; used to derive independent seeds from a master seed.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace seriesdesign
