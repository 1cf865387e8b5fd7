#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "seriesdesign/estimator.hpp"
#include "seriesdesign/simulator.hpp"

using namespace seriesdesign;

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kPi = std::numbers::pi;

Vector values_at(const DesignGrid& d, const RealFunction& f) {
  Vector y(d.size());
  for (int i = 0; i < d.size(); ++i) {
    y(i) = f(d[i]);
  }
  return y;
}

Vector random_theta(std::mt19937_64& rng, int J) {
  std::normal_distribution<double> normal;
  Vector theta(J);
  for (int j = 0; j < J; ++j) {
    theta(j) = normal(rng);
  }
  return theta;
}

}  // namespace

TEST_CASE("Sample validation") {
  const DesignGrid d({0.0, 0.5, 1.0});
  CHECK_NOTHROW(Sample(d, Vector::Zero(3)));
  CHECK_THROWS_AS(Sample(d, Vector::Zero(2)), ContractViolation);
  Vector bad = Vector::Zero(3);
  bad(1) = std::nan("");
  CHECK_THROWS_AS(Sample(d, bad), ContractViolation);
}

TEST_CASE("noiseless phi_2 is recovered exactly on the optimal exponential grid") {
  const auto k = TriangularKernel::exponential(1.0);
  const auto b = OrthonormalBasis::cosine(3);
  const DesignGrid d = optimize_design(k, b, 4, PsoConfig{}).design;
  const Vector y = values_at(d, [](double t) { return kSqrt2 * std::cos(2 * kPi * t); });
  const Vector theta = blue_estimate(Sample(d, y), k, b);
  CHECK((theta - Vector::Unit(3, 1)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("noiseless phi_2 is recovered exactly under Brownian errors") {
  const auto k = TriangularKernel::brownian();
  const auto b = OrthonormalBasis::cosine(3);
  const DesignGrid d({0.0, 0.25, 0.47, 1.0});
  const Vector y = values_at(d, [](double t) { return kSqrt2 * std::cos(2 * kPi * t); });
  const Vector theta = blue_estimate(Sample(d, y), k, b);
  CHECK((theta - Vector::Unit(3, 1)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("in-span signals are reproduced exactly") {
  std::mt19937_64 rng(2);
  for (const auto& k : {TriangularKernel::exponential(1.0), TriangularKernel::exponential(5.0),
                        TriangularKernel::brownian()}) {
    for (const auto& b : {OrthonormalBasis::cosine(3), OrthonormalBasis::trig_full(3)}) {
      for (const auto& pts : {std::vector<double>{0.0, 0.25, 0.47, 1.0},
                              std::vector<double>{0.0, 0.12, 0.27, 0.45, 0.57, 0.76, 1.0}}) {
        const DesignGrid d(pts);
        const SeriesEstimator est(k, b, d);
        const Vector theta = random_theta(rng, 3);
        const SeriesFunction f = reconstruct(b, theta);
        CHECK((est.blue(values_at(d, f)) - theta).cwiseAbs().maxCoeff() < 1e-8);
      }
    }
  }
}

TEST_CASE("Brownian path agrees with the block formula when Y_0 = 0") {
  // theta_{2..J} = B~^{-1} z~ and theta_1 = -Phi_{2..J}(0)^T theta_{2..J}
  const auto k = TriangularKernel::brownian();
  const auto b = OrthonormalBasis::cosine(3);
  const DesignGrid d({0.0, 0.2, 0.55, 0.8, 1.0});
  const SeriesEstimator est(k, b, d);
  CHECK(est.degenerate_index() == 0);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  Vector y(5);
  y << 0.0, normal(rng), normal(rng), normal(rng), normal(rng);

  Matrix Bt = Matrix::Zero(2, 2);
  Vector zt = Vector::Zero(2);
  for (int i = 1; i < d.size(); ++i) {
    const double dt = d[i] - d[i - 1];
    const Vector diff = (b.evaluate(d[i]).value - b.evaluate(d[i - 1]).value).tail(2) / std::sqrt(dt);
    Bt += diff * diff.transpose();
    zt += diff * (y(i) - y(i - 1)) / std::sqrt(dt);
  }
  const Vector tail = Bt.inverse() * zt;
  const double head = -b.evaluate(0.0).value.tail(2).dot(tail);

  const Vector theta = est.blue(y);
  CHECK(std::abs(theta(0) - head) < 1e-10);
  CHECK((theta.tail(2) - tail).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pure noise gives a mean-zero BLUE") {
  const auto k = TriangularKernel::exponential(1.0);
  const auto b = OrthonormalBasis::cosine(3);
  const DesignGrid d({0.0, 0.25, 0.52, 1.0});
  const SeriesEstimator est(k, b, d);
  const GpSampler sampler(k, d.points());
  const int S = 2000;
  Vector sum = Vector::Zero(3);
  Vector sumsq = Vector::Zero(3);
  for (int l = 0; l < S; ++l) {
    std::mt19937_64 rng(replicate_seed(5, l));
    const Vector th = est.blue(sampler.draw(rng));
    sum += th;
    sumsq += th.cwiseAbs2();
  }
  const Vector mean = sum / S;
  const Vector se = ((sumsq / S - mean.cwiseAbs2()) / (S - 1)).cwiseSqrt();
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(mean(j)) < 3 * se(j));
  }
}

TEST_CASE("exact BLUE covariance matches the empirical one") {
  const auto k = TriangularKernel::brownian();
  const auto b = OrthonormalBasis::cosine(3);
  const DesignGrid d({0.0, 0.25, 0.47, 1.0});
  const SeriesEstimator est(k, b, d);
  const Matrix exact = est.blue_covariance();
  const GpSampler sampler(k, d.points());
  const int S = 20000;
  Matrix acc = Matrix::Zero(3, 3);
  std::mt19937_64 rng(123);
  for (int l = 0; l < S; ++l) {
    const Vector th = est.blue(sampler.draw(rng));
    acc += th * th.transpose();
  }
  const Matrix emp = acc / S;
  for (int i = 0; i < 3; ++i) {
    // Var of a squared Gaussian is 2 sigma^4.
    const double se = std::sqrt(2.0) * exact(i, i) / std::sqrt(static_cast<double>(S));
    CHECK(std::abs(emp(i, i) - exact(i, i)) < 4 * se + 1e-12);
  }
}

TEST_CASE("design underdetermining theta is rejected") {
  const auto b = OrthonormalBasis::cosine(3);
  CHECK_THROWS_AS(SeriesEstimator(TriangularKernel::exponential(1.0), b, DesignGrid({0.0, 0.5, 1.0})),
                  UnderdeterminedDesign);
  CHECK_THROWS_AS(SeriesEstimator(TriangularKernel::brownian(), b, DesignGrid({0.0, 0.3, 0.7, 1.0})),
                  UnderdeterminedDesign);
  try {
    SeriesEstimator(TriangularKernel::exponential(1.0), b, DesignGrid({0.0, 0.5, 1.0}));
  } catch (const UnderdeterminedDesign& e) {
    CHECK(std::string(e.what()).find("design underdetermines theta: increase n") != std::string::npos);
  }
}

TEST_CASE("shrink_estimate examples") {
  const auto ek = TriangularKernel::exponential(1.0);
  const EstimateResult zero = shrink_estimate(Vector::Zero(3), ek, OrthonormalBasis::cosine(3));
  CHECK(zero.shrink_factor == 0.0);
  CHECK(zero.theta_shrunk.cwiseAbs().maxCoeff() == 0.0);

  const EstimateResult one = shrink_estimate(Vector::Ones(1), ek, OrthonormalBasis::cosine(1));
  CHECK(one.kase == KernelCase::A);
  CHECK(std::abs(one.c_or_m - 1.5) < 1e-12);
  CHECK(std::abs(one.theta_shrunk(0) - 0.6) < 1e-12);

  Vector th(3);
  th << 0.1, -0.4, 0.2;
  const auto bm = TriangularKernel::brownian();
  const auto b = OrthonormalBasis::cosine(3);
  const EstimateResult caseB = shrink_estimate(th, bm, b, 0.0);
  CHECK(caseB.kase == KernelCase::B);
  CHECK(caseB.c_or_m == doctest::Approx(th.dot(build_M(bm, b).matrix() * th)));

  const EstimateResult caseC = shrink_estimate(th, bm, b, 0.7);
  CHECK(caseC.kase == KernelCase::C);
  CHECK(caseC.shrink_factor == 1.0);
  CHECK(caseC.theta_shrunk == th);
}

TEST_CASE("shrinkage strictly reduces the norm outside case C") {
  std::mt19937_64 rng(44);
  const auto b = OrthonormalBasis::cosine(3);
  for (const auto& k : {TriangularKernel::exponential(1.0), TriangularKernel::brownian()}) {
    for (int trial = 0; trial < 50; ++trial) {
      const Vector th = random_theta(rng, 3);
      const EstimateResult r = shrink_estimate(th, k, b, 0.0);
      CHECK(r.shrink_factor >= 0.0);
      CHECK(r.shrink_factor < 1.0);
      CHECK(r.theta_shrunk.norm() < th.norm());
      CHECK(r.shrink_factor == r.c_or_m / (1.0 + r.c_or_m));
      CHECK((r.theta_shrunk - r.shrink_factor * r.theta_blue).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("prepared estimator agrees with the free functions") {
  const auto k = TriangularKernel::exponential(5.0);
  const auto b = OrthonormalBasis::cosine(3);
  const DesignGrid d({0.0, 0.12, 0.27, 0.45, 0.57, 0.76, 1.0});
  const SeriesEstimator est(k, b, d);
  std::mt19937_64 rng(6);
  const Vector y = sample_gp(k, FunctionModel::quadratic(), d, rng);
  const EstimateResult r = est.estimate(y);
  const Vector blue = blue_estimate(Sample(d, y), k, b);
  CHECK((r.theta_blue - blue).cwiseAbs().maxCoeff() < 1e-12);
  const EstimateResult s = shrink_estimate(blue, k, b, y(0));
  CHECK(std::abs(r.shrink_factor - s.shrink_factor) < 1e-12);
  CHECK((est.riemann(y) - riemann_estimate(Sample(d, y), b)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("riemann_estimate examples") {
  const auto b = OrthonormalBasis::cosine(3);
  const DesignGrid d101 = DesignGrid::equidistant(101);
  const Vector ones = Vector::Ones(101);
  CHECK(std::abs(riemann_estimate(Sample(d101, ones), b)(0) - 1.0) < 1.0 / 100 + 1e-12);

  const DesignGrid d1001 = DesignGrid::equidistant(1001);
  const Vector y = values_at(d1001, [](double t) { return kSqrt2 * std::cos(2 * kPi * t); });
  CHECK(std::abs(riemann_estimate(Sample(d1001, y), b)(1) - 1.0) < 5e-3);

  const DesignGrid d2({0.0, 1.0});
  Vector y2(2);
  y2 << 0.8, -3.0;
  const Vector r = riemann_estimate(Sample(d2, y2), b);
  CHECK((r - 0.8 * b.evaluate(0.0).value).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("estimate_functions examples") {
  const auto b = OrthonormalBasis::cosine(3);
  EstimateResult r;
  r.theta_blue = Vector::Unit(3, 1);
  r.shrink_factor = 0.25;
  r.theta_shrunk = 0.25 * r.theta_blue;
  const auto [fhat, fcheck] = estimate_functions(r, b);
  CHECK(std::abs(fcheck(0.0) - kSqrt2) < 1e-15);
  for (double t : {0.0, 0.3, 0.9}) {
    CHECK(std::abs((fcheck(t) - fhat(t)) - 0.75 * reconstruct(b, r.theta_blue)(t)) < 1e-14);
  }

  EstimateResult z;
  z.theta_blue = Vector::Ones(3);
  z.theta_shrunk = Vector::Zero(3);
  CHECK(estimate_functions(z, b).first(0.4) == 0.0);
}
