#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "seriesdesign/estimator.hpp"

namespace seriesdesign {

/**
 * Exact sampler for the error process at fixed times. Factorizes the
 * covariance once with zero pivots clamped, so zero-variance points such
 * as t = 0 under Brownian errors get exactly zero noise.
 */
class GpSampler {
 public:
  /// Throws NotPsdError if the covariance is indefinite beyond the clamp tolerance.
  GpSampler(const TriangularKernel& kernel, const std::vector<double>& times);

  const Matrix& factor() const { return L_; }

  /// One draw of the error vector.
  Vector draw(std::mt19937_64& rng) const;

 private:
  Matrix L_;
};

/// f(t_i) + eps_i for one draw of the error process.
Vector sample_gp(const TriangularKernel& kernel, const FunctionModel& f, const DesignGrid& design,
                 std::mt19937_64& rng);

/// integral over [0,1] of (fhat - f)^2.
double integrated_squared_error(const RealFunction& fhat, const FunctionModel& f,
                                const QuadratureRule& rule = default_rule());

enum class EstimatorKind { Shrunk, Blue, Riemann };

const char* to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);

struct KernelSpec {
  std::string type = "exponential";  ///< "exponential" or "brownian"
  double L = 1.0;

  TriangularKernel build() const;
};

struct BasisSpec {
  std::string kind = "cosine";  ///< "cosine" ("cosine-only") or "trig" ("trig-full")
  int J = 3;

  OrthonormalBasis build() const;
};

struct SimulationConfig {
  KernelSpec kernel;
  BasisSpec basis;
  std::string model = "4t(t-1)";
  /// "optimal", "comparative-n4", "comparative-n7", "equidistant" or "explicit".
  std::string design_name = "optimal";
  int n = 4;
  /// Used when design_name is "explicit".
  std::vector<double> points;
  std::vector<EstimatorKind> estimators{EstimatorKind::Shrunk, EstimatorKind::Blue};
  int S = 1000;
  std::uint64_t seed = 1;
  int quad_order = 16;
  int quad_panels = 16;
  PsoConfig pso;
  double min_gap = 1e-3;
  /// Worker threads; 0 means hardware concurrency.
  int threads = 0;

  /// Throws ContractViolation naming the offending field.
  void validate() const;
};

struct EstimatorSummary {
  EstimatorKind kind;
  double mise;
  double stderr_;
};

struct SimulationReport {
  std::vector<EstimatorSummary> estimators;
  int S = 0;
  std::uint64_t seed = 0;
  std::vector<double> points;
  double criterion = 0.0;
  double wall_seconds = 0.0;

  const EstimatorSummary& get(EstimatorKind kind) const;
};

/// Resolves the named design; "optimal" runs the design optimizer with the config's PSO settings.
DesignGrid resolve_design(const SimulationConfig& config);

/// Seed of replicate `index` derived from the master seed.
std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t index);

/**
 * Monte-Carlo MISE of each requested estimator. Replicate l draws from a
 * generator seeded by replicate_seed(seed, l), and the average is summed in
 * replicate order, so the report does not depend on the thread count.
 */
SimulationReport run_mise(const SimulationConfig& config);

/// Same, for an already resolved design.
SimulationReport run_mise(const SimulationConfig& config, const DesignGrid& design);

}  // namespace seriesdesign
