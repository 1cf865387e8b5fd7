#pragma once

#include <vector>

#include "seriesdesign/basis.hpp"
#include "seriesdesign/kernel.hpp"

namespace seriesdesign {

/**
 * MISE-optimal signed measure for one Fourier coefficient in the
 * continuous-time model:
 *
 *   xi*(dt) = theta_j / (1 + c) * (P0 delta_0 + P1 delta_1 + p(t) dt).
 *
 * c, P0, P1 and p depend only on the kernel and f, never on j.
 */
struct OracleMeasure {
  KernelCase kase = KernelCase::A;
  double c = 0.0;
  double P0 = 0.0;
  double P1 = 0.0;
  RealFunction p;
  double theta_j = 1.0;

  /// theta_j / (1 + c)
  double scale() const { return theta_j / (1.0 + c); }
};

/**
 * Builds the oracle measure from u, v, f and their derivatives. The density
 * is evaluated in closed form, p = -(1/v) h' with
 * h = (f'v - f v') / (u'v - u v').
 *
 * Throws UnsupportedCase if f.smooth is false. A case-C tag with |f(0)| at
 * or below the tolerance is treated as case B.
 */
OracleMeasure oracle_measure(const TriangularKernel& kernel, const FunctionModel& f, double theta_j,
                             const QuadratureRule& rule = default_rule(), double zero_tol = 1e-9);

/// integral f^2 / (1 + c) in cases A and B; 0 in case C.
double oracle_mise(const TriangularKernel& kernel, const FunctionModel& f,
                   const QuadratureRule& rule = default_rule());

/// integral of g against the measure, atoms included.
double integrate_against(const OracleMeasure& measure, const RealFunction& g,
                         const QuadratureRule& rule = default_rule());

/**
 * Max over the grid of | integral K(s,t) xi*(ds) - theta_j f(t) / (1 + c) |.
 * The density integral is split at s = t. Case C throws UnsupportedCase.
 */
double verify_optimality(const OracleMeasure& measure, const TriangularKernel& kernel, const FunctionModel& f,
                         const std::vector<double>& grid, const QuadratureRule& rule = default_rule());

struct DerivativeMiseComparison {
  double mise_star;   ///< S / (1 + S), S = sum of squares
  double mise_tilde;  ///< sum of x_j^2 / (1 + x_j^2)
};

/// MISE of the oracle derivative estimator versus the coordinatewise shrinkage oracle.
DerivativeMiseComparison tsybakov_comparison(const std::vector<double>& theta_bar);

}  // namespace seriesdesign
