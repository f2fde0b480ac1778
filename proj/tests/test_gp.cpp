#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "stepmap/gp.hpp"

using namespace stepmap;

namespace {

struct Dataset {
  std::vector<Eigen::Vector4d> X;
  std::vector<double> y;
};

Dataset smooth_dataset(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Dataset d;
  for (int i = 0; i < n; ++i) {
    Eigen::Vector4d x(unif(rng), unif(rng), unif(rng), unif(rng));
    d.X.push_back(x);
    d.y.push_back(std::sin(3.0 * x[0]) + x[1] * x[1] - 0.5 * x[2] + 0.2 * x[3] * x[0]);
  }
  return d;
}

// Dense-inverse posterior using the hyperparameters the model selected.
struct DenseOracle {
  Eigen::MatrixXd Kn_inv;
  Eigen::VectorXd ys;
  Eigen::MatrixXd Xm;
  double l, noise, mean, stdev;

  explicit DenseOracle(const Dataset& d, const GpModel& model) {
    const int n = static_cast<int>(d.X.size());
    l = model.lengthscales()[0];
    noise = model.noise_variance();
    mean = 0.0;
    for (double v : d.y) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : d.y) var += (v - mean) * (v - mean);
    var /= n;
    stdev = (var > 1e-24) ? std::sqrt(var) : 1.0;

    Xm.resize(n, 4);
    ys.resize(n);
    for (int i = 0; i < n; ++i) {
      Xm.row(i) = d.X[static_cast<size_t>(i)].transpose();
      ys[i] = (d.y[static_cast<size_t>(i)] - mean) / stdev;
    }
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        K(i, j) = std::exp(-(Xm.row(i) - Xm.row(j)).squaredNorm() / (2.0 * l * l));
    K.diagonal().array() += noise;
    Kn_inv = K.inverse();
  }

  GpModel::Prediction predict(const Eigen::Vector4d& x) const {
    const int n = static_cast<int>(Xm.rows());
    Eigen::VectorXd k_star(n);
    for (int i = 0; i < n; ++i)
      k_star[i] = std::exp(-(Xm.row(i).transpose() - x).squaredNorm() / (2.0 * l * l));
    GpModel::Prediction out;
    out.mean = mean + stdev * k_star.dot(Kn_inv * ys);
    out.variance = stdev * stdev * std::max(0.0, 1.0 - k_star.dot(Kn_inv * k_star));
    return out;
  }
};

// Log marginal likelihood recomputed densely for one hyperparameter choice.
double lml_oracle(const Dataset& d, double l, double noise) {
  const int n = static_cast<int>(d.X.size());
  double mean = 0.0;
  for (double v : d.y) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : d.y) var += (v - mean) * (v - mean);
  var /= n;
  const double stdev = (var > 1e-24) ? std::sqrt(var) : 1.0;

  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      K(i, j) = std::exp(
          -(d.X[static_cast<size_t>(i)] - d.X[static_cast<size_t>(j)]).squaredNorm() /
          (2.0 * l * l));
  K.diagonal().array() += noise;
  Eigen::VectorXd ys(n);
  for (int i = 0; i < n; ++i) ys[i] = (d.y[static_cast<size_t>(i)] - mean) / stdev;

  const Eigen::LLT<Eigen::MatrixXd> llt(K);
  REQUIRE(llt.info() == Eigen::Success);
  const Eigen::VectorXd alpha = llt.solve(ys);
  double log_det_half = 0.0;
  for (int i = 0; i < n; ++i) log_det_half += std::log(llt.matrixLLT()(i, i));
  return -0.5 * ys.dot(alpha) - log_det_half - 0.5 * n * 1.8378770664093455;
}

}  // namespace

TEST_CASE("[DERIVED] GP posterior matches a dense-inverse oracle") {
  const Dataset d = smooth_dataset(25, 91u);
  const GpModel model = GpModel::fit(d.X, d.y);
  const DenseOracle oracle(d, model);

  std::mt19937_64 rng(7u);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int q = 0; q < 5; ++q) {
    const Eigen::Vector4d x(unif(rng), unif(rng), unif(rng), unif(rng));
    const auto got = model.predict(x);
    const auto want = oracle.predict(x);
    CHECK(std::abs(got.mean - want.mean) < 1e-8);
    CHECK(std::abs(got.variance - want.variance) < 1e-8);
    CHECK(got.variance >= 0.0);
  }
}

TEST_CASE("[PAPER] hyperparameters maximize the log marginal likelihood over the fixed grid") {
  const Dataset d = smooth_dataset(30, 12u);
  const GpConfig cfg;  // {0.1, 0.2, 0.5, 1.0} x {1e-4, 1e-2}
  const GpModel model = GpModel::fit(d.X, d.y, cfg);

  double best_lml = -1e300;
  double best_l = 0.0, best_noise = 0.0;
  for (double l : cfg.lengthscale_grid) {
    for (double noise : cfg.noise_grid) {
      const double lml = lml_oracle(d, l, noise);
      if (lml > best_lml) {
        best_lml = lml;
        best_l = l;
        best_noise = noise;
      }
    }
  }
  CHECK(model.lengthscales()[0] == best_l);
  CHECK(model.noise_variance() == best_noise);
  CHECK(std::abs(model.log_marginal_likelihood() - best_lml) < 1e-8);
  // The kernel is isotropic: all four reported lengthscales agree.
  for (int k = 1; k < 4; ++k) CHECK(model.lengthscales()[k] == model.lengthscales()[0]);
}

TEST_CASE("[DERIVED] degenerate and boundary GP behaviour") {
  SUBCASE("single observation: prior mean snaps to the observation") {
    const std::vector<Eigen::Vector4d> X{Eigen::Vector4d(0.5, 0.5, 0.5, 0.5)};
    const std::vector<double> y{3.7};
    const GpModel model = GpModel::fit(X, y);
    // Zero sample variance forces the unit-stdev fallback.
    CHECK(model.y_std() == 1.0);
    CHECK(model.y_mean() == 3.7);
    // Smaller noise always wins the LML tie for a single point.
    CHECK(model.noise_variance() == 1e-4);

    const auto at = model.predict(X[0]);
    CHECK(std::abs(at.mean - 3.7) < 1e-12);
    CHECK(std::abs(at.variance - 1e-4 / (1.0 + 1e-4)) < 1e-9);

    const auto far = model.predict(Eigen::Vector4d(100, 100, 100, 100));
    CHECK(std::abs(far.mean - 3.7) < 1e-12);
    CHECK(std::abs(far.variance - 1.0) < 1e-12);
  }

  SUBCASE("far queries revert to the prior") {
    const Dataset d = smooth_dataset(20, 4u);
    const GpModel model = GpModel::fit(d.X, d.y);
    double mean = 0.0;
    for (double v : d.y) mean += v;
    mean /= static_cast<double>(d.y.size());
    const auto far = model.predict(Eigen::Vector4d(1e3, 1e3, 1e3, 1e3));
    CHECK(std::abs(far.mean - mean) < 1e-12);
    CHECK(std::abs(far.variance - model.y_std() * model.y_std()) < 1e-12);
  }

  SUBCASE("variance at a training point never exceeds the noise floor") {
    const Dataset d = smooth_dataset(25, 5u);
    const GpModel model = GpModel::fit(d.X, d.y);
    const double cap = model.y_std() * model.y_std() * model.noise_variance() + 1e-9;
    for (const auto& x : d.X) {
      const auto pred = model.predict(x);
      CHECK(pred.variance >= 0.0);
      CHECK(pred.variance <= cap);
    }
  }

  SUBCASE("invalid inputs throw") {
    CHECK_THROWS_AS((void)GpModel::fit({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(
        (void)GpModel::fit({Eigen::Vector4d::Zero(), Eigen::Vector4d::Ones()}, {1.0}),
        std::invalid_argument);
    CHECK_THROWS_AS(
        (void)GpModel::fit({Eigen::Vector4d::Zero()}, {std::nan("")}),
        std::invalid_argument);
    Eigen::Vector4d bad = Eigen::Vector4d::Zero();
    bad[2] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS((void)GpModel::fit({bad}, {1.0}), std::invalid_argument);
    GpConfig empty;
    empty.lengthscale_grid.clear();
    CHECK_THROWS_AS((void)GpModel::fit({Eigen::Vector4d::Zero()}, {1.0}, empty),
                    std::invalid_argument);
  }
}

TEST_CASE("[PAPER] expected improvement closed form") {
  SUBCASE("zero or negative variance degenerates to max(0, mean - best)") {
    CHECK(expected_improvement(2.0, 0.0, 1.0) == 1.0);
    CHECK(expected_improvement(0.5, 0.0, 1.0) == 0.0);
    CHECK(expected_improvement(1.0, -1.0, 0.0) == 1.0);
  }

  SUBCASE("at mean == best, EI = sigma * phi(0)") {
    CHECK(std::abs(expected_improvement(0.0, 4.0, 0.0) - 2.0 * 0.3989422804014327) < 1e-12);
  }

  SUBCASE("pdf/cdf spot values") {
    CHECK(normal_pdf(0.0) == 0.3989422804014327);
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(std::abs(normal_cdf(1.959963984540054) - 0.975) < 1e-12);
    CHECK(std::abs(normal_cdf(-1.2) + normal_cdf(1.2) - 1.0) < 1e-15);
    CHECK(normal_pdf(1.3) == normal_pdf(-1.3));
  }

  SUBCASE("monotonicity and limits") {
    CHECK(expected_improvement(0.3, 1.0, 0.0) > expected_improvement(0.3, 1.0, 0.5));
    CHECK(expected_improvement(0.3, 2.0, 0.5) > expected_improvement(0.3, 1.0, 0.5));
    CHECK(std::abs(expected_improvement(10.0, 1e-12, 0.0) - 10.0) < 1e-6);
    CHECK(expected_improvement(-50.0, 1e-12, 0.0) == 0.0);
  }
}

TEST_CASE("[DERIVED] expected improvement agrees with Monte-Carlo quadrature") {
  const double mean = 0.3, var = 1.0, best = 0.5;
  std::mt19937_64 rng(1234u);
  std::normal_distribution<double> normal(mean, std::sqrt(var));
  const int n = 1'000'000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += std::max(0.0, normal(rng) - best);
  const double mc = acc / static_cast<double>(n);
  CHECK(std::abs(expected_improvement(mean, var, best) - mc) < 3e-3);
}
