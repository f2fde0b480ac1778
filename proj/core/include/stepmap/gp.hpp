#pragma once

#include <Eigen/Dense>
#include <vector>

namespace stepmap {

struct GpConfig {
  std::vector<double> lengthscale_grid{0.1, 0.2, 0.5, 1.0};
  std::vector<double> noise_grid{1e-4, 1e-2};
};

// Exact GP regression with a unit-variance squared-exponential kernel over
// [0,1]^4 inputs and standardized observations. Hyperparameters are picked by
// maximum log marginal likelihood over the fixed grid.
class GpModel {
 public:
  struct Prediction {
    double mean = 0.0;
    double variance = 0.0;  // latent-function variance, raw units
  };

  static GpModel fit(const std::vector<Eigen::Vector4d>& X, const std::vector<double>& y,
                     const GpConfig& cfg = {});

  Prediction predict(const Eigen::Vector4d& x) const;

  double log_marginal_likelihood() const { return lml_; }
  const Eigen::Vector4d& lengthscales() const { return lengthscales_; }
  double noise_variance() const { return noise_; }
  double y_mean() const { return y_mean_; }
  double y_std() const { return y_std_; }
  int size() const { return static_cast<int>(X_.rows()); }

 private:
  double kernel(const Eigen::Vector4d& a, const Eigen::Vector4d& b) const;

  Eigen::MatrixXd X_;      // n x 4
  Eigen::MatrixXd L_;      // Cholesky factor of K + noise I
  Eigen::VectorXd alpha_;  // (K + noise I)^{-1} y_std
  Eigen::Vector4d lengthscales_ = Eigen::Vector4d::Constant(0.5);
  double noise_ = 1e-4;
  double y_mean_ = 0.0;
  double y_std_ = 1.0;
  double lml_ = 0.0;
};

double normal_pdf(double z);
double normal_cdf(double z);

// Expected improvement for maximization; the variance is the latent GP
// variance. Degenerate (zero-variance) points fall back to max(0, mean-best).
double expected_improvement(double mean, double variance, double best);

}  // namespace stepmap
