#include "seriesdesign/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seriesdesign {

namespace {

constexpr double kZeroTol = 1e-9;
constexpr int kStructureGrid = 64;

EstimateResult shrink_with(const Vector& theta_blue, double u0, double y0, const SymMatrix& M,
                           const std::optional<SymMatrix>& C) {
  if (!theta_blue.allFinite()) {
    throw ContractViolation("shrink_estimate: theta_blue must be finite");
  }
  EstimateResult out;
  out.theta_blue = theta_blue;
  if (std::abs(u0) > kZeroTol) {
    out.kase = KernelCase::A;
    out.c_or_m = theta_blue.dot(C->matrix() * theta_blue);
  } else if (std::abs(y0) <= kZeroTol) {
    out.kase = KernelCase::B;
    out.c_or_m = theta_blue.dot(M.matrix() * theta_blue);
  } else {
    out.kase = KernelCase::C;
    out.c_or_m = 0.0;
    out.shrink_factor = 1.0;
    out.theta_shrunk = theta_blue;
    return out;
  }
  out.c_or_m = std::max(0.0, out.c_or_m);
  out.shrink_factor = out.c_or_m / (1.0 + out.c_or_m);
  out.theta_shrunk = out.shrink_factor * theta_blue;
  return out;
}

// Indices j with phi_j / v constant on a uniform grid.
std::vector<int> structural_constants(const TriangularKernel& kernel, const OrthonormalBasis& basis) {
  const int J = basis.size();
  Vector lo = Vector::Constant(J, std::numeric_limits<double>::infinity());
  Vector hi = -lo;
  Vector scale = Vector::Zero(J);
  for (int k = 0; k < kStructureGrid; ++k) {
    const double t = static_cast<double>(k) / (kStructureGrid - 1);
    const Vector r = basis.evaluate(t).value / kernel.v(t);
    lo = lo.cwiseMin(r);
    hi = hi.cwiseMax(r);
    scale = scale.cwiseMax(r.cwiseAbs());
  }
  std::vector<int> out;
  for (int j = 0; j < J; ++j) {
    if (hi(j) - lo(j) <= 1e-12 * std::max(1.0, scale(j))) {
      out.push_back(j);
    }
  }
  return out;
}

std::string underdetermined(const std::string& detail) {
  return "design underdetermines theta: increase n (" + detail + ")";
}

}  // namespace

Sample::Sample(DesignGrid d, Vector y) : design(std::move(d)), observations(std::move(y)) {
  if (observations.size() != design.size()) {
    throw ContractViolation("Sample: observation count differs from design size");
  }
  if (!observations.allFinite()) {
    throw ContractViolation("Sample: observations must be finite");
  }
}

SeriesEstimator::SeriesEstimator(TriangularKernel kernel, OrthonormalBasis basis, DesignGrid design,
                                 const QuadratureRule& rule)
    : kernel_(std::move(kernel)), basis_(std::move(basis)), design_(std::move(design)) {
  const DesignProblem problem(kernel_, basis_, rule);
  moments_ = problem.moments(design_);

  const int n = design_.size();
  const int J = basis_.size();

  // Z maps Y to z: row i of the difference operator carries beta_i.
  Matrix Z = Matrix::Zero(J, n);
  for (int i = 1; i < n; ++i) {
    const double s = 1.0 / std::sqrt(moments_.dq[i - 1]);
    Z.col(i) += moments_.betas[i - 1] * (s / kernel_.v(design_[i]));
    Z.col(i - 1) -= moments_.betas[i - 1] * (s / kernel_.v(design_[i - 1]));
  }

  const double u0 = kernel_.u(0.0);
  const Vector p0 = basis_.evaluate(0.0).value;
  const GeneralizedInverse& gi = moments_.B_ginv;

  if (std::abs(u0) > kZeroTol) {
    if (gi.branch == InverseBranch::Spectral || !constraint_feasible(moments_.M, moments_.B, gi)) {
      throw UnderdeterminedDesign(underdetermined("B singular"));
    }
    const Eigen::LLT<Matrix> llt(moments_.C->matrix());
    if (llt.info() != Eigen::Success) {
      throw UnderdeterminedDesign(underdetermined("C not invertible"));
    }
    Matrix rhs = moments_.M.matrix() * gi.inverse.matrix() * Z;
    rhs.col(0) += p0 / (u0 * kernel_.v(0.0));
    A_ = llt.solve(rhs);
  } else {
    std::vector<int> degenerate;
    for (int j : structural_constants(kernel_, basis_)) {
      if (std::abs(p0(j)) > kZeroTol) {
        degenerate.push_back(j);
      }
    }
    if (degenerate.size() > 1) {
      throw UnderdeterminedDesign(underdetermined("more than one constant phi_j / v"));
    }
    A_ = Matrix::Zero(J, n);
    if (degenerate.empty()) {
      const Eigen::LLT<Matrix> llt(moments_.B.matrix());
      if (gi.branch != InverseBranch::Inverse || llt.info() != Eigen::Success) {
        throw UnderdeterminedDesign(underdetermined("B singular"));
      }
      A_ = llt.solve(Z);
    } else {
      const int d = degenerate.front();
      std::vector<int> keep;
      for (int j = 0; j < J; ++j) {
        if (j != d) {
          keep.push_back(j);
        }
      }
      const int r = J - 1;
      Matrix Bt(r, r);
      Matrix Zt(r, n);
      for (int a = 0; a < r; ++a) {
        Zt.row(a) = Z.row(keep[a]);
        for (int b = 0; b < r; ++b) {
          Bt(a, b) = moments_.B.matrix()(keep[a], keep[b]);
        }
      }
      if (r > 0) {
        const Eigen::LLT<Matrix> llt(Bt);
        if (llt.info() != Eigen::Success ||
            psd_solve_or_ginverse(SymMatrix(Bt)).branch != InverseBranch::Inverse) {
          throw UnderdeterminedDesign(underdetermined("reduced B singular"));
        }
        const Matrix sol = llt.solve(Zt);
        for (int a = 0; a < r; ++a) {
          A_.row(keep[a]) = sol.row(a);
        }
      }
      // Y_0 = Phi(0)^T theta exactly.
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
      row(0) = 1.0;
      for (int j : keep) {
        row -= p0(j) * A_.row(j);
      }
      A_.row(d) = row / p0(d);
      degenerate_ = d;
    }
  }

  R_ = Matrix::Zero(J, n);
  for (int i = 1; i < n; ++i) {
    R_.col(i - 1) += (design_[i] - design_[i - 1]) * basis_.evaluate(design_[i - 1]).value;
  }
}

void SeriesEstimator::check_length(const Vector& y) const {
  if (y.size() != design_.size()) {
    throw ContractViolation("SeriesEstimator: observation count differs from design size");
  }
}

Vector SeriesEstimator::blue(const Vector& y) const {
  check_length(y);
  return A_ * y;
}

Vector SeriesEstimator::riemann(const Vector& y) const {
  check_length(y);
  return R_ * y;
}

EstimateResult SeriesEstimator::shrink(const Vector& theta_blue, double y0) const {
  return shrink_with(theta_blue, kernel_.u(0.0), y0, moments_.M, moments_.C);
}

EstimateResult SeriesEstimator::estimate(const Vector& y) const { return shrink(blue(y), y(0)); }

Matrix SeriesEstimator::blue_covariance() const {
  return A_ * covariance_matrix(kernel_, design_.points()) * A_.transpose();
}

Vector blue_estimate(const Sample& sample, const TriangularKernel& kernel, const OrthonormalBasis& basis) {
  return SeriesEstimator(kernel, basis, sample.design).blue(sample.observations);
}

EstimateResult shrink_estimate(const Vector& theta_blue, const TriangularKernel& kernel,
                               const OrthonormalBasis& basis, double y0, const QuadratureRule& rule) {
  if (theta_blue.size() != basis.size()) {
    throw ContractViolation("shrink_estimate: theta_blue has wrong length");
  }
  const double u0 = kernel.u(0.0);
  const SymMatrix M = build_M(kernel, basis, rule);
  std::optional<SymMatrix> C;
  if (std::abs(u0) > kZeroTol) {
    C = build_C(kernel, basis, rule);
  }
  return shrink_with(theta_blue, u0, y0, M, C);
}

Vector riemann_estimate(const Sample& sample, const OrthonormalBasis& basis) {
  const DesignGrid& d = sample.design;
  Vector theta = Vector::Zero(basis.size());
  for (int i = 1; i < d.size(); ++i) {
    theta += (d[i] - d[i - 1]) * sample.observations(i - 1) * basis.evaluate(d[i - 1]).value;
  }
  return theta;
}

std::pair<SeriesFunction, SeriesFunction> estimate_functions(const EstimateResult& result,
                                                             const OrthonormalBasis& basis) {
  return {SeriesFunction(basis, result.theta_shrunk), SeriesFunction(basis, result.theta_blue)};
}

}  // namespace seriesdesign
