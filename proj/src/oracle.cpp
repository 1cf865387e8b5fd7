#include "seriesdesign/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace seriesdesign {

namespace {

// h = (f'v - f v') / (u'v - u v') and its derivative.
struct HValues {
  double h;
  double dh;
};

HValues h_values(const TriangularKernel& k, const FunctionModel& f, double t) {
  const double u = k.u(t), du = k.du(t), d2u = k.d2u(t);
  const double v = k.v(t), dv = k.dv(t), d2v = k.d2v(t);
  const double fv = f.f(t), df = f.df(t), d2f = f.d2f(t);
  const double num = df * v - fv * dv;
  const double dnum = d2f * v - fv * d2v;
  const double den = du * v - u * dv;
  const double dden = d2u * v - u * d2v;
  if (den <= 0.0) {
    throw DegenerateKernel("oracle: q' <= 0 at t=" + std::to_string(t));
  }
  return {num / den, (dnum * den - num * dden) / (den * den)};
}

}  // namespace

OracleMeasure oracle_measure(const TriangularKernel& kernel, const FunctionModel& f, double theta_j,
                             const QuadratureRule& rule, double zero_tol) {
  if (!f.smooth) {
    throw UnsupportedCase("oracle requires C2 model ('" + f.name + "' has unbounded f'')");
  }
  OracleMeasure m;
  m.theta_j = theta_j;
  m.kase = case_tag(kernel, f.f(0.0), zero_tol);

  if (m.kase == KernelCase::C) {
    m.c = 0.0;
    m.P0 = 1.0 / f.f(0.0);
    m.P1 = 0.0;
    m.p = [](double) { return 0.0; };
    return m;
  }

  // c = int (d/dt[f/v])^2 / q' dt (+ f(0)^2 / (u(0) v(0)) in case A)
  m.c = integrate(
      [&](double t) {
        const double v = kernel.v(t);
        const double num = f.df(t) * v - f.f(t) * kernel.dv(t);
        const double den = kernel.du(t) * v - kernel.u(t) * kernel.dv(t);
        return num * num / (v * v * den);
      },
      0.0, 1.0, rule);

  const double u0 = kernel.u(0.0);
  const double v0 = kernel.v(0.0);
  const double f0 = f.f(0.0);
  if (m.kase == KernelCase::A) {
    m.c += f0 * f0 / (u0 * v0);
    const double den0 = kernel.du(0.0) * v0 - u0 * kernel.dv(0.0);
    m.P0 = (f0 * kernel.du(0.0) - f.df(0.0) * u0) / (u0 * den0);
  } else {
    m.P0 = 0.0;
  }
  m.P1 = h_values(kernel, f, 1.0).h / kernel.v(1.0);
  m.p = [kernel, f](double t) { return -h_values(kernel, f, t).dh / kernel.v(t); };
  return m;
}

double oracle_mise(const TriangularKernel& kernel, const FunctionModel& f, const QuadratureRule& rule) {
  const OracleMeasure m = oracle_measure(kernel, f, 1.0, rule);
  if (m.kase == KernelCase::C) {
    return 0.0;
  }
  const double energy = integrate([&](double t) { return f.f(t) * f.f(t); }, 0.0, 1.0, rule);
  return energy / (1.0 + m.c);
}

double integrate_against(const OracleMeasure& measure, const RealFunction& g, const QuadratureRule& rule) {
  double total = measure.P0 * g(0.0) + measure.P1 * g(1.0);
  if (measure.kase != KernelCase::C) {
    total += integrate([&](double s) { return g(s) * measure.p(s); }, 0.0, 1.0, rule);
  }
  return measure.scale() * total;
}

double verify_optimality(const OracleMeasure& measure, const TriangularKernel& kernel, const FunctionModel& f,
                         const std::vector<double>& grid, const QuadratureRule& rule) {
  if (measure.kase == KernelCase::C) {
    throw UnsupportedCase("verify_optimality: identity not available in case C");
  }
  double worst = 0.0;
  for (double t : grid) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw DomainError("verify_optimality: grid point outside [0,1]");
    }
    const double ut = kernel.u(t);
    const double vt = kernel.v(t);
    double total = measure.P0 * kernel.u(0.0) * vt + measure.P1 * ut * kernel.v(1.0);
    if (t > 0.0) {
      total += vt * integrate([&](double s) { return kernel.u(s) * measure.p(s); }, 0.0, t, rule);
    }
    if (t < 1.0) {
      total += ut * integrate([&](double s) { return kernel.v(s) * measure.p(s); }, t, 1.0, rule);
    }
    const double residual = std::abs(measure.scale() * total - measure.scale() * f.f(t));
    worst = std::max(worst, residual);
  }
  return worst;
}

DerivativeMiseComparison tsybakov_comparison(const std::vector<double>& theta_bar) {
  double sum_sq = 0.0;
  double tilde = 0.0;
  for (double x : theta_bar) {
    const double x2 = x * x;
    sum_sq += x2;
    tilde += x2 / (1.0 + x2);
  }
  return {sum_sq / (1.0 + sum_sq), tilde};
}

}  // namespace seriesdesign
