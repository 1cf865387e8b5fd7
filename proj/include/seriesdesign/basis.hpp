#pragma once

#include <functional>
#include <string>

#include "seriesdesign/numerics.hpp"

namespace seriesdesign {

/// Values and derivatives of the first J basis functions at one time point.
struct BasisValues {
  Vector value;
  Vector derivative;
  /// Second derivatives; built-in kinds fill it, custom evaluators may leave it empty.
  Vector second{};
};

enum class BasisKind { TrigFull, Cosine, Custom };

const char* to_string(BasisKind kind);

/**
 * First J functions of an orthonormal system on [0,1].
 *
 * TrigFull: 1, sqrt2 cos(2 pi k t), sqrt2 sin(2 pi k t), ... interleaved.
 * Cosine:   1, sqrt2 cos(2 pi (j-1) t) for j >= 2.
 * Custom:   user-supplied evaluator; orthonormality is not enforced.
 */
class OrthonormalBasis {
 public:
  using Evaluator = std::function<BasisValues(double)>;

  static OrthonormalBasis trig_full(int J);
  static OrthonormalBasis cosine(int J);
  static OrthonormalBasis custom(int J, Evaluator eval, std::string name = "custom");

  int size() const { return J_; }
  BasisKind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  /// Evaluation without the domain check; callers guarantee t in [0,1].
  BasisValues evaluate(double t) const;

 private:
  OrthonormalBasis(int J, BasisKind kind, Evaluator eval, std::string name);

  int J_;
  BasisKind kind_;
  Evaluator eval_;
  std::string name_;
};

/**
 * Regression function with two derivatives. `smooth` records whether f''
 * is bounded on [0,1]; the oracle refuses models without it.
 */
struct FunctionModel {
  std::string name;
  RealFunction f, df, d2f;
  bool smooth = true;

  /// 4t(t-1).
  static FunctionModel quadratic();
  /// sqrt(t(1-t)); derivatives blow up at the endpoints, so smooth = false.
  static FunctionModel sqrt_arch();
  static FunctionModel zero();
  static FunctionModel constant(double value);
  /// Finite series sum theta^T Phi(t) in the given basis.
  static FunctionModel series(const OrthonormalBasis& basis, const Vector& theta);
  /// Looks up "4t(t-1)", "sqrt(t(1-t))", "zero" or "one"; throws ContractViolation otherwise.
  static FunctionModel by_name(const std::string& id);
};

/// Throws DomainError for t outside [0,1].
BasisValues phi(const OrthonormalBasis& basis, double t);

/// theta_j = integral of f phi_j over [0,1].
Vector fourier_coefficients(const OrthonormalBasis& basis, const FunctionModel& f,
                            const QuadratureRule& rule = default_rule());
Vector fourier_coefficients(const OrthonormalBasis& basis, const RealFunction& f,
                            const QuadratureRule& rule = default_rule());

/// Largest entry of |Gram - I|.
double gram_check(const OrthonormalBasis& basis, const QuadratureRule& rule = default_rule());

/// Pointwise series sum t -> Phi(t)^T theta.
class SeriesFunction {
 public:
  SeriesFunction(OrthonormalBasis basis, Vector theta);

  double operator()(double t) const;
  double derivative(double t) const;
  const Vector& coefficients() const { return theta_; }

 private:
  OrthonormalBasis basis_;
  Vector theta_;
};

/// Throws ContractViolation when theta has the wrong length.
SeriesFunction reconstruct(const OrthonormalBasis& basis, const Vector& theta);

}  // namespace seriesdesign
