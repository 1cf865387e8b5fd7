#include "seriesdesign/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

namespace seriesdesign {

GpSampler::GpSampler(const TriangularKernel& kernel, const std::vector<double>& times)
    : L_(clamped_cholesky(covariance_matrix(kernel, times), 1e-12)) {}

Vector GpSampler::draw(std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(L_.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    z(i) = normal(rng);
  }
  return L_ * z;
}

Vector sample_gp(const TriangularKernel& kernel, const FunctionModel& f, const DesignGrid& design,
                 std::mt19937_64& rng) {
  const GpSampler sampler(kernel, design.points());
  Vector y = sampler.draw(rng);
  for (int i = 0; i < design.size(); ++i) {
    y(i) += f.f(design[i]);
  }
  return y;
}

double integrated_squared_error(const RealFunction& fhat, const FunctionModel& f, const QuadratureRule& rule) {
  return integrate(
      [&](double t) {
        const double d = fhat(t) - f.f(t);
        return d * d;
      },
      0.0, 1.0, rule);
}

const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Shrunk:
      return "shrunk";
    case EstimatorKind::Blue:
      return "blue";
    case EstimatorKind::Riemann:
      return "riemann";
  }
  return "?";
}

EstimatorKind estimator_from_string(const std::string& name) {
  if (name == "shrunk") {
    return EstimatorKind::Shrunk;
  }
  if (name == "blue") {
    return EstimatorKind::Blue;
  }
  if (name == "riemann") {
    return EstimatorKind::Riemann;
  }
  throw ContractViolation("unknown estimator '" + name + "'");
}

TriangularKernel KernelSpec::build() const {
  if (type == "exponential") {
    return TriangularKernel::exponential(L);
  }
  if (type == "brownian") {
    return TriangularKernel::brownian();
  }
  throw ContractViolation("kernel.type: unknown kernel '" + type + "'");
}

OrthonormalBasis BasisSpec::build() const {
  if (kind == "cosine" || kind == "cosine-only") {
    return OrthonormalBasis::cosine(J);
  }
  if (kind == "trig" || kind == "trig-full") {
    return OrthonormalBasis::trig_full(J);
  }
  throw ContractViolation("basis.kind: unknown basis '" + kind + "'");
}

void SimulationConfig::validate() const {
  kernel.build();
  basis.build();
  FunctionModel::by_name(model);
  if (estimators.empty()) {
    throw ContractViolation("estimators: at least one estimator required");
  }
  if (S < 1) {
    throw ContractViolation("S: must be >= 1");
  }
  if (quad_order < 1 || quad_panels < 1) {
    throw ContractViolation("quadrature: order and panels must be positive");
  }
  if (threads < 0) {
    throw ContractViolation("threads: must be nonnegative");
  }
  pso.validate();
  if (design_name == "explicit") {
    DesignGrid(points, 0.0);
  } else if (design_name != "optimal" && design_name != "comparative-n4" && design_name != "comparative-n7" &&
             design_name != "equidistant") {
    throw ContractViolation("design: unknown name '" + design_name + "'");
  }
}

const EstimatorSummary& SimulationReport::get(EstimatorKind kind) const {
  for (const auto& e : estimators) {
    if (e.kind == kind) {
      return e;
    }
  }
  throw ContractViolation(std::string("report has no estimator '") + to_string(kind) + "'");
}

DesignGrid resolve_design(const SimulationConfig& config) {
  if (config.design_name == "optimal") {
    return optimize_design(config.kernel.build(), config.basis.build(), config.n, config.pso, config.min_gap).design;
  }
  if (config.design_name == "comparative-n4") {
    return comparative_design(4);
  }
  if (config.design_name == "comparative-n7") {
    return comparative_design(7);
  }
  if (config.design_name == "equidistant") {
    return DesignGrid::equidistant(config.n);
  }
  if (config.design_name == "explicit") {
    return DesignGrid(config.points, 0.0);
  }
  throw ContractViolation("design: unknown name '" + config.design_name + "'");
}

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ (index + 1) * 0xD1B54A32D192ED03ULL);
}

SimulationReport run_mise(const SimulationConfig& config) {
  config.validate();
  return run_mise(config, resolve_design(config));
}

SimulationReport run_mise(const SimulationConfig& config, const DesignGrid& design) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  const TriangularKernel kernel = config.kernel.build();
  const OrthonormalBasis basis = config.basis.build();
  const FunctionModel f = FunctionModel::by_name(config.model);
  const QuadratureRule rule(config.quad_order, config.quad_panels);
  const SeriesEstimator estimator(kernel, basis, design, rule);
  const GpSampler sampler(kernel, design.points());

  // ISE = sum_k w_k (Phi(t_k)^T theta - f(t_k))^2 over fixed nodes.
  std::vector<double> nodes, weights;
  rule.nodes_on(0.0, 1.0, nodes, weights);
  const auto nq = static_cast<Eigen::Index>(nodes.size());
  Matrix phi_nodes(nq, basis.size());
  Vector f_nodes(nq);
  Vector w_nodes(nq);
  for (Eigen::Index k = 0; k < nq; ++k) {
    phi_nodes.row(k) = basis.evaluate(nodes[k]).value.transpose();
    f_nodes(k) = f.f(nodes[k]);
    w_nodes(k) = weights[k];
  }
  auto ise = [&](const Vector& theta) {
    const Vector diff = phi_nodes * theta - f_nodes;
    return w_nodes.dot(diff.cwiseAbs2());
  };

  Vector f_design(design.size());
  for (int i = 0; i < design.size(); ++i) {
    f_design(i) = f.f(design[i]);
  }

  const int S = config.S;
  const auto K = config.estimators.size();
  std::vector<double> errors(static_cast<std::size_t>(S) * K);

  auto run_replicate = [&](int l) {
    std::mt19937_64 rng(replicate_seed(config.seed, static_cast<std::uint64_t>(l)));
    const Vector y = f_design + sampler.draw(rng);
    const EstimateResult est = estimator.estimate(y);
    for (std::size_t e = 0; e < K; ++e) {
      double value = 0.0;
      switch (config.estimators[e]) {
        case EstimatorKind::Shrunk:
          value = ise(est.theta_shrunk);
          break;
        case EstimatorKind::Blue:
          value = ise(est.theta_blue);
          break;
        case EstimatorKind::Riemann:
          value = ise(estimator.riemann(y));
          break;
      }
      errors[static_cast<std::size_t>(l) * K + e] = value;
    }
  };

  int threads = config.threads > 0 ? config.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, S);
  if (threads == 1) {
    for (int l = 0; l < S; ++l) {
      run_replicate(l);
    }
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(threads);
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int l = w; l < S; l += threads) {
            run_replicate(l);
          }
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) {
      th.join();
    }
    for (const auto& failure : failures) {
      if (failure) {
        std::rethrow_exception(failure);
      }
    }
  }

  SimulationReport report;
  report.S = S;
  report.seed = config.seed;
  report.points = design.points();
  report.criterion = DesignProblem(kernel, basis, rule).criterion(design);
  for (std::size_t e = 0; e < K; ++e) {
    double sum = 0.0;
    for (int l = 0; l < S; ++l) {
      sum += errors[static_cast<std::size_t>(l) * K + e];
    }
    const double mean = sum / S;
    double ss = 0.0;
    for (int l = 0; l < S; ++l) {
      const double d = errors[static_cast<std::size_t>(l) * K + e] - mean;
      ss += d * d;
    }
    const double sd = S > 1 ? std::sqrt(ss / (S - 1)) : 0.0;
    report.estimators.push_back({config.estimators[e], mean, sd / std::sqrt(static_cast<double>(S))});
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace seriesdesign
