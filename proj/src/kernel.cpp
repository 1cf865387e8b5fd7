#include "seriesdesign/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace seriesdesign {

namespace {

void check_time(double t, const char* what) {
  if (!(t >= 0.0 && t <= 1.0)) {
    std::ostringstream msg;
    msg << what << ": time " << t << " outside [0,1]";
    throw DomainError(msg.str());
  }
}

}  // namespace

TriangularKernel TriangularKernel::exponential(double L) {
  if (!(L > 0.0)) {
    throw ContractViolation("exponential kernel: L must be positive");
  }
  TriangularKernel k;
  k.name = "exponential";
  k.params = {L};
  k.u = [L](double t) { return std::exp(L * t); };
  k.du = [L](double t) { return L * std::exp(L * t); };
  k.d2u = [L](double t) { return L * L * std::exp(L * t); };
  k.v = [L](double t) { return std::exp(-L * t); };
  k.dv = [L](double t) { return -L * std::exp(-L * t); };
  k.d2v = [L](double t) { return L * L * std::exp(-L * t); };
  return k;
}

TriangularKernel TriangularKernel::brownian() {
  TriangularKernel k;
  k.name = "brownian";
  k.u = [](double t) { return t; };
  k.du = [](double) { return 1.0; };
  k.d2u = [](double) { return 0.0; };
  k.v = [](double) { return 1.0; };
  k.dv = [](double) { return 0.0; };
  k.d2v = [](double) { return 0.0; };
  return k;
}

const char* to_string(KernelCase c) {
  switch (c) {
    case KernelCase::A:
      return "A";
    case KernelCase::B:
      return "B";
    case KernelCase::C:
      return "C";
  }
  return "?";
}

double covariance(const TriangularKernel& kernel, double s, double t) {
  check_time(s, "covariance");
  check_time(t, "covariance");
  return kernel.u(std::min(s, t)) * kernel.v(std::max(s, t));
}

Matrix covariance_matrix(const TriangularKernel& kernel, const std::vector<double>& times) {
  const auto n = static_cast<Eigen::Index>(times.size());
  Matrix cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    check_time(times[i], "covariance_matrix");
    for (Eigen::Index j = 0; j <= i; ++j) {
      cov(i, j) = kernel.u(std::min(times[i], times[j])) * kernel.v(std::max(times[i], times[j]));
      cov(j, i) = cov(i, j);
    }
  }
  return cov;
}

QValues q_funcs(const TriangularKernel& kernel, double t) {
  check_time(t, "q_funcs");
  const double u = kernel.u(t);
  const double du = kernel.du(t);
  const double d2u = kernel.d2u(t);
  const double v = kernel.v(t);
  const double dv = kernel.dv(t);
  const double d2v = kernel.d2v(t);
  if (v == 0.0) {
    std::ostringstream msg;
    msg << "degenerate kernel: v(" << t << ") = 0";
    throw DegenerateKernel(msg.str());
  }
  const double num = du * v - u * dv;  // numerator of q'
  const double dnum = d2u * v - u * d2v;
  QValues out;
  out.q = u / v;
  out.dq = num / (v * v);
  out.d2q = (dnum * v - 2.0 * num * dv) / (v * v * v);
  return out;
}

ValidationReport validate(const TriangularKernel& kernel, int grid_size) {
  if (grid_size < 2) {
    throw ContractViolation("validate: grid_size must be >= 2");
  }
  ValidationReport report;
  auto fail = [&](std::string msg) {
    report.ok = false;
    report.violations.push_back(std::move(msg));
  };

  std::vector<double> grid(grid_size);
  for (int i = 0; i < grid_size; ++i) {
    grid[i] = static_cast<double>(i) / (grid_size - 1);
  }

  bool v_ok = true;
  for (double t : grid) {
    const double v = kernel.v(t);
    if (v == 0.0 || !std::isfinite(v)) {
      std::ostringstream msg;
      msg << "v vanishes at t=" << t;
      fail(msg.str());
      v_ok = false;
      break;
    }
  }
  if (v_ok) {
    double prev = kernel.u(grid[0]) / kernel.v(grid[0]);
    for (int i = 1; i < grid_size; ++i) {
      const double q = kernel.u(grid[i]) / kernel.v(grid[i]);
      if (!(q > prev)) {
        std::ostringstream msg;
        msg << "q not increasing at t=" << grid[i];
        fail(msg.str());
        break;
      }
      prev = q;
    }
  }

  Matrix cov(grid_size, grid_size);
  for (int i = 0; i < grid_size; ++i) {
    for (int j = 0; j < grid_size; ++j) {
      cov(i, j) = kernel.u(std::min(grid[i], grid[j])) * kernel.v(std::max(grid[i], grid[j]));
    }
    if (cov(i, i) < 0.0) {
      std::ostringstream msg;
      msg << "negative variance K(t,t) at t=" << grid[i];
      fail(msg.str());
    }
  }
  try {
    clamped_cholesky(cov, 1e-12);
  } catch (const NotPsdError& e) {
    fail(std::string("covariance not PSD on grid: ") + e.what());
  }

  if (kernel.u(0.0) == 0.0) {
    report.notes.emplace_back("u(0)=0, zero-variance at t=0");
  }
  return report;
}

KernelCase case_tag(const TriangularKernel& kernel, double f0, double zero_tol) {
  if (zero_tol < 0.0) {
    throw ContractViolation("case_tag: zero_tol must be nonnegative");
  }
  if (std::abs(kernel.u(0.0)) > zero_tol) {
    return KernelCase::A;
  }
  return std::abs(f0) <= zero_tol ? KernelCase::B : KernelCase::C;
}

}  // namespace seriesdesign
