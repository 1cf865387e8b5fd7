#include "seriesdesign/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace seriesdesign {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

}  // namespace

const char* to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::TrigFull:
      return "trig";
    case BasisKind::Cosine:
      return "cosine";
    case BasisKind::Custom:
      return "custom";
  }
  return "?";
}

OrthonormalBasis::OrthonormalBasis(int J, BasisKind kind, Evaluator eval, std::string name)
    : J_(J), kind_(kind), eval_(std::move(eval)), name_(std::move(name)) {
  if (J < 1) {
    throw ContractViolation("OrthonormalBasis: J must be positive");
  }
}

OrthonormalBasis OrthonormalBasis::trig_full(int J) {
  auto eval = [J](double t) {
    BasisValues out{Vector(J), Vector(J), Vector(J)};
    out.value(0) = 1.0;
    out.derivative(0) = 0.0;
    out.second(0) = 0.0;
    for (int j = 2; j <= J; ++j) {
      const int k = j / 2;
      const double w = kTwoPi * k;
      if (j % 2 == 0) {
        out.value(j - 1) = kSqrt2 * std::cos(w * t);
        out.derivative(j - 1) = -kSqrt2 * w * std::sin(w * t);
      } else {
        out.value(j - 1) = kSqrt2 * std::sin(w * t);
        out.derivative(j - 1) = kSqrt2 * w * std::cos(w * t);
      }
      out.second(j - 1) = -w * w * out.value(j - 1);
    }
    return out;
  };
  return OrthonormalBasis(J, BasisKind::TrigFull, eval, "trig");
}

OrthonormalBasis OrthonormalBasis::cosine(int J) {
  auto eval = [J](double t) {
    BasisValues out{Vector(J), Vector(J), Vector(J)};
    out.value(0) = 1.0;
    out.derivative(0) = 0.0;
    out.second(0) = 0.0;
    for (int j = 2; j <= J; ++j) {
      const double w = kTwoPi * (j - 1);
      out.value(j - 1) = kSqrt2 * std::cos(w * t);
      out.derivative(j - 1) = -kSqrt2 * w * std::sin(w * t);
      out.second(j - 1) = -w * w * out.value(j - 1);
    }
    return out;
  };
  return OrthonormalBasis(J, BasisKind::Cosine, eval, "cosine");
}

OrthonormalBasis OrthonormalBasis::custom(int J, Evaluator eval, std::string name) {
  return OrthonormalBasis(J, BasisKind::Custom, std::move(eval), std::move(name));
}

BasisValues OrthonormalBasis::evaluate(double t) const {
  BasisValues out = eval_(t);
  if (out.value.size() != J_ || out.derivative.size() != J_ || (out.second.size() != 0 && out.second.size() != J_)) {
    throw ContractViolation("OrthonormalBasis: evaluator returned wrong length");
  }
  return out;
}

BasisValues phi(const OrthonormalBasis& basis, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    std::ostringstream msg;
    msg << "phi: time " << t << " outside [0,1]";
    throw DomainError(msg.str());
  }
  return basis.evaluate(t);
}

FunctionModel FunctionModel::quadratic() {
  FunctionModel m;
  m.name = "4t(t-1)";
  m.f = [](double t) { return 4.0 * t * (t - 1.0); };
  m.df = [](double t) { return 8.0 * t - 4.0; };
  m.d2f = [](double) { return 8.0; };
  return m;
}

FunctionModel FunctionModel::sqrt_arch() {
  FunctionModel m;
  m.name = "sqrt(t(1-t))";
  m.f = [](double t) { return std::sqrt(std::max(0.0, t * (1.0 - t))); };
  m.df = [](double t) { return (1.0 - 2.0 * t) / (2.0 * std::sqrt(t * (1.0 - t))); };
  m.d2f = [](double t) {
    const double s = t * (1.0 - t);
    return -1.0 / (4.0 * s * std::sqrt(s));
  };
  m.smooth = false;
  return m;
}

FunctionModel FunctionModel::zero() {
  FunctionModel m;
  m.name = "zero";
  m.f = [](double) { return 0.0; };
  m.df = m.f;
  m.d2f = m.f;
  return m;
}

FunctionModel FunctionModel::constant(double value) {
  FunctionModel m;
  m.name = value == 1.0 ? "one" : "constant";
  m.f = [value](double) { return value; };
  m.df = [](double) { return 0.0; };
  m.d2f = m.df;
  return m;
}

FunctionModel FunctionModel::series(const OrthonormalBasis& basis, const Vector& theta) {
  if (theta.size() != basis.size()) {
    throw ContractViolation("FunctionModel::series: coefficient length mismatch");
  }
  FunctionModel m;
  m.name = "series";
  m.f = [basis, theta](double t) { return basis.evaluate(t).value.dot(theta); };
  m.df = [basis, theta](double t) { return basis.evaluate(t).derivative.dot(theta); };
  // central difference of the analytic first derivative when the basis has no second derivative
  m.d2f = [basis, theta](double t) {
    const BasisValues b = basis.evaluate(t);
    if (b.second.size() == basis.size()) {
      return b.second.dot(theta);
    }
    const double h = 1e-5;
    const double lo = std::max(0.0, t - h);
    const double hi = std::min(1.0, t + h);
    return (basis.evaluate(hi).derivative.dot(theta) - basis.evaluate(lo).derivative.dot(theta)) / (hi - lo);
  };
  return m;
}

FunctionModel FunctionModel::by_name(const std::string& id) {
  if (id == "4t(t-1)") {
    return quadratic();
  }
  if (id == "sqrt(t(1-t))") {
    return sqrt_arch();
  }
  if (id == "zero") {
    return zero();
  }
  if (id == "one") {
    return constant(1.0);
  }
  throw ContractViolation("unknown model '" + id + "'");
}

Vector fourier_coefficients(const OrthonormalBasis& basis, const RealFunction& f, const QuadratureRule& rule) {
  Vector theta = Vector::Zero(basis.size());
  rule.for_each_node(0.0, 1.0, [&](double t, double w) {
    const double y = f(t);
    if (!std::isfinite(y)) {
      std::ostringstream msg;
      msg << "non-integrable sample: f(" << t << ") = " << y;
      throw NonIntegrableSample(msg.str());
    }
    theta += (w * y) * basis.evaluate(t).value;
  });
  return theta;
}

Vector fourier_coefficients(const OrthonormalBasis& basis, const FunctionModel& f, const QuadratureRule& rule) {
  return fourier_coefficients(basis, f.f, rule);
}

double gram_check(const OrthonormalBasis& basis, const QuadratureRule& rule) {
  const int J = basis.size();
  Matrix gram = Matrix::Zero(J, J);
  rule.for_each_node(0.0, 1.0, [&](double t, double w) {
    const Vector p = basis.evaluate(t).value;
    gram.noalias() += w * p * p.transpose();
  });
  return (gram - Matrix::Identity(J, J)).cwiseAbs().maxCoeff();
}

SeriesFunction::SeriesFunction(OrthonormalBasis basis, Vector theta)
    : basis_(std::move(basis)), theta_(std::move(theta)) {
  if (theta_.size() != basis_.size()) {
    throw ContractViolation("reconstruct: coefficient length mismatch");
  }
}

double SeriesFunction::operator()(double t) const { return basis_.evaluate(t).value.dot(theta_); }

double SeriesFunction::derivative(double t) const { return basis_.evaluate(t).derivative.dot(theta_); }

SeriesFunction reconstruct(const OrthonormalBasis& basis, const Vector& theta) {
  return SeriesFunction(basis, theta);
}

}  // namespace seriesdesign
