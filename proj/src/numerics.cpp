#include "seriesdesign/numerics.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <random>

namespace seriesdesign {

namespace {

// Legendre nodes on [-1,1] by Newton iteration from the Chebyshev-like guess.
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(order, 0.0);
  weights.assign(order, 0.0);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        break;
      }
    }
    // recompute derivative at the converged node
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= order; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = order * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[order - 1 - i] = x;
    weights[i] = w;
    weights[order - 1 - i] = w;
  }
  if (order % 2 == 1) {
    nodes[order / 2] = 0.0;
  }
}

}  // namespace

QuadratureRule::QuadratureRule(int order, int panels) : order_(order), panels_(panels) {
  if (order < 1 || panels < 1) {
    throw ContractViolation("QuadratureRule: order and panels must be positive");
  }
  if (order == 1) {
    nodes_ = {0.0};
    weights_ = {2.0};
  } else {
    gauss_legendre(order, nodes_, weights_);
  }
}

void QuadratureRule::nodes_on(double a, double b, std::vector<double>& t, std::vector<double>& w) const {
  t.clear();
  w.clear();
  t.reserve(static_cast<std::size_t>(order_) * panels_);
  w.reserve(static_cast<std::size_t>(order_) * panels_);
  for_each_node(a, b, [&](double x, double wx) {
    t.push_back(x);
    w.push_back(wx);
  });
}

const QuadratureRule& default_rule() {
  static const QuadratureRule rule(16, 16);
  return rule;
}

SymMatrix::SymMatrix(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) {
    throw ContractViolation("SymMatrix: matrix is not square");
  }
  const double scale = std::max(1.0, m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff());
  if (m.size() > 0 && (m - m.transpose()).cwiseAbs().maxCoeff() > rel_tol * scale) {
    throw ContractViolation("SymMatrix: input is not symmetric");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::zero(Eigen::Index dim) { return SymMatrix(Matrix::Zero(dim, dim)); }

SymMatrix SymMatrix::identity(Eigen::Index dim) { return SymMatrix(Matrix::Identity(dim, dim)); }

bool SymMatrix::certify_psd(double rel_tol) {
  try {
    clamped_cholesky(m_, rel_tol);
    psd_ = true;
  } catch (const NotPsdError&) {
    psd_ = false;
  }
  return psd_;
}

Matrix clamped_cholesky(const Matrix& a, double rel_tol) {
  const Eigen::Index n = a.rows();
  Matrix l = Matrix::Zero(n, n);
  if (n == 0) {
    return l;
  }
  const double scale = a.diagonal().cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    if (a.cwiseAbs().maxCoeff() > 0.0) {
      throw NotPsdError("clamped_cholesky: zero diagonal with nonzero off-diagonal entries");
    }
    return l;
  }
  const double tol = rel_tol * scale;
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) {
      d -= l(j, k) * l(j, k);
    }
    if (d < -tol) {
      throw NotPsdError("clamped_cholesky: negative pivot at index " + std::to_string(j));
    }
    if (d <= tol) {
      // clamped pivot: the remaining column must vanish as well
      for (Eigen::Index i = j + 1; i < n; ++i) {
        double r = a(i, j);
        for (Eigen::Index k = 0; k < j; ++k) {
          r -= l(i, k) * l(j, k);
        }
        if (std::abs(r) > std::sqrt(tol * scale)) {
          throw NotPsdError("clamped_cholesky: inconsistent zero pivot at index " + std::to_string(j));
        }
      }
      continue;
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double r = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) {
        r -= l(i, k) * l(j, k);
      }
      l(i, j) = r / ljj;
    }
  }
  return l;
}

const char* to_string(InverseBranch branch) {
  switch (branch) {
    case InverseBranch::Inverse:
      return "inverse";
    case InverseBranch::Block:
      return "block";
    case InverseBranch::Spectral:
      return "spectral";
  }
  return "unknown";
}

namespace {

Matrix spectral_pinv(const Matrix& m, double rel_tol, int& rank) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  const Vector& lambda = eig.eigenvalues();
  const double lmax = lambda.cwiseAbs().maxCoeff();
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  rank = 0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda(k) > rel_tol * lmax) {
      const Vector v = eig.eigenvectors().col(k);
      out += (v * v.transpose()) / lambda(k);
      ++rank;
    }
  }
  return out;
}

}  // namespace

GeneralizedInverse psd_solve_or_ginverse(const SymMatrix& b, double rel_tol) {
  if (!(rel_tol > 0.0)) {
    throw ContractViolation("psd_solve_or_ginverse: rel_tol must be positive");
  }
  const Eigen::Index n = b.dim();
  GeneralizedInverse out;
  if (n == 0) {
    out.inverse = SymMatrix::zero(0);
    return out;
  }
  const Matrix& m = b.matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  if (lmax <= 0.0) {
    if (lmin < 0.0) {
      throw NotPsdError("psd_solve_or_ginverse: matrix is negative definite");
    }
    out.inverse = SymMatrix::zero(n);
    out.rank = 0;
    out.branch = InverseBranch::Spectral;
    return out;
  }
  if (lmin < -rel_tol * lmax) {
    throw NotPsdError("psd_solve_or_ginverse: matrix is not PSD (eigenvalue " + std::to_string(lmin) + ")");
  }

  const double diag_scale = m.diagonal().maxCoeff();
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (m.row(i).cwiseAbs().maxCoeff() <= rel_tol * diag_scale) {
      out.degenerate.push_back(static_cast<int>(i));
    } else {
      keep.push_back(static_cast<int>(i));
    }
  }

  if (out.degenerate.empty() && lmin > rel_tol * lmax) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() == Eigen::Success) {
      out.inverse = SymMatrix(llt.solve(Matrix::Identity(n, n)), 1e-6);
      out.rank = static_cast<int>(n);
      out.branch = InverseBranch::Inverse;
      return out;
    }
  }

  if (!out.degenerate.empty()) {
    const auto k = static_cast<Eigen::Index>(keep.size());
    Matrix sub(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) {
        sub(i, j) = m(keep[i], keep[j]);
      }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> sub_eig(sub, Eigen::EigenvaluesOnly);
    const double smin = sub_eig.eigenvalues().minCoeff();
    const double smax = sub_eig.eigenvalues().maxCoeff();
    Eigen::LLT<Matrix> llt(sub);
    if (smin > rel_tol * smax && llt.info() == Eigen::Success) {
      const Matrix sub_inv = llt.solve(Matrix::Identity(k, k));
      Matrix full = Matrix::Zero(n, n);
      for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
          full(keep[i], keep[j]) = sub_inv(i, j);
        }
      }
      out.inverse = SymMatrix(full, 1e-6);
      out.rank = static_cast<int>(k);
      out.branch = InverseBranch::Block;
      return out;
    }
  }

  int rank = 0;
  out.inverse = SymMatrix(spectral_pinv(m, rel_tol, rank), 1e-6);
  out.rank = rank;
  out.branch = InverseBranch::Spectral;
  return out;
}

void PsoConfig::validate() const {
  if (swarm_size < 2) {
    throw ContractViolation("PsoConfig: swarm_size must be >= 2");
  }
  if (iterations < 1) {
    throw ContractViolation("PsoConfig: iterations must be >= 1");
  }
  if (!(inertia > 0.0 && inertia < 1.0)) {
    throw ContractViolation("PsoConfig: inertia must lie in (0,1)");
  }
  if (!(cognitive > 0.0) || !(social > 0.0)) {
    throw ContractViolation("PsoConfig: cognitive and social must be positive");
  }
}

PsoResult pso_minimize(const Objective& objective, const Vector& lower, const Vector& upper,
                       const PsoConfig& config) {
  config.validate();
  const Eigen::Index dim = lower.size();
  if (dim == 0) {
    throw ContractViolation("pso_minimize: dimension must be positive");
  }
  if (upper.size() != dim) {
    throw ContractViolation("pso_minimize: bound sizes differ");
  }
  if (!(lower.array() < upper.array()).all()) {
    throw ContractViolation("pso_minimize: requires lower < upper componentwise");
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  auto evaluate = [&](const Vector& x) {
    const double y = objective(x);
    return std::isfinite(y) ? y : inf;
  };

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vector range = upper - lower;
  const Vector vmax = 0.5 * range;

  const int swarm = config.swarm_size;
  std::vector<Vector> position(swarm, Vector(dim));
  std::vector<Vector> velocity(swarm, Vector(dim));
  std::vector<Vector> best_position(swarm);
  std::vector<double> best_value(swarm, inf);

  PsoResult result;
  result.value = inf;
  for (int i = 0; i < swarm; ++i) {
    for (Eigen::Index d = 0; d < dim; ++d) {
      position[i](d) = lower(d) + unit(rng) * range(d);
      velocity[i](d) = (2.0 * unit(rng) - 1.0) * 0.1 * range(d);
    }
    best_position[i] = position[i];
    best_value[i] = evaluate(position[i]);
    ++result.evaluations;
    if (best_value[i] < result.value || result.argmin.size() == 0) {
      result.value = best_value[i];
      result.argmin = position[i];
    }
  }

  for (int it = 0; it < config.iterations; ++it) {
    for (int i = 0; i < swarm; ++i) {
      Vector& x = position[i];
      Vector& v = velocity[i];
      for (Eigen::Index d = 0; d < dim; ++d) {
        const double r1 = unit(rng);
        const double r2 = unit(rng);
        double vd = config.inertia * v(d) + config.cognitive * r1 * (best_position[i](d) - x(d)) +
                    config.social * r2 * (result.argmin(d) - x(d));
        vd = std::clamp(vd, -vmax(d), vmax(d));
        double xd = x(d) + vd;
        if (xd < lower(d)) {
          xd = lower(d);
          vd = 0.0;
        } else if (xd > upper(d)) {
          xd = upper(d);
          vd = 0.0;
        }
        x(d) = xd;
        v(d) = vd;
      }
      const double y = evaluate(x);
      ++result.evaluations;
      if (y < best_value[i]) {
        best_value[i] = y;
        best_position[i] = x;
        if (y < result.value) {
          result.value = y;
          result.argmin = x;
        }
      }
    }
  }
  return result;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace seriesdesign
