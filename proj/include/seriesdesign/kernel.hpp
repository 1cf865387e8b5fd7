#pragma once

#include <string>
#include <vector>

#include "seriesdesign/numerics.hpp"

namespace seriesdesign {

/**
 * Triangular covariance kernel K(s,t) = u(min(s,t)) v(max(s,t)) of a
 * Markovian Gaussian process on [0,1].
 *
 * The record carries u, v and their first two derivatives; everything else
 * (q = u/v, its derivatives, the moment matrices, the oracle density) is
 * derived analytically from these six functions.
 */
struct TriangularKernel {
  std::string name;
  std::vector<double> params;
  RealFunction u, du, d2u;
  RealFunction v, dv, d2v;

  /// exp(-L |s - t|): u = e^{Lt}, v = e^{-Lt}.
  static TriangularKernel exponential(double L);
  /// Brownian motion, K(s,t) = min(s,t): u = t, v = 1.
  static TriangularKernel brownian();
};

/// q = u/v with its first and second derivatives.
struct QValues {
  double q;
  double dq;
  double d2q;
};

enum class KernelCase { A, B, C };

const char* to_string(KernelCase c);

double covariance(const TriangularKernel& kernel, double s, double t);

/// Matrix K(t_i, t_j) over the given times.
Matrix covariance_matrix(const TriangularKernel& kernel, const std::vector<double>& times);

/// Throws DegenerateKernel if v(t) = 0.
QValues q_funcs(const TriangularKernel& kernel, double t);

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;
  std::vector<std::string> notes;
};

/// Checks v != 0, q strictly increasing and PSD covariance on a uniform grid.
ValidationReport validate(const TriangularKernel& kernel, int grid_size = 101);

/// A if |u(0)| > zero_tol; otherwise B if |f0| <= zero_tol, else C.
KernelCase case_tag(const TriangularKernel& kernel, double f0, double zero_tol = 1e-9);

}  // namespace seriesdesign
