#include "stepmap/gp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stepmap {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kLog2Pi = 1.8378770664093455;

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, double lengthscale) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  const double inv2l2 = 1.0 / (2.0 * lengthscale * lengthscale);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double d2 = (X.row(i) - X.row(j)).squaredNorm();
      K(i, j) = K(j, i) = std::exp(-d2 * inv2l2);
    }
  }
  return K;
}

}  // namespace

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double expected_improvement(double mean, double variance, double best) {
  if (variance <= 0.0) return std::max(0.0, mean - best);
  const double sigma = std::sqrt(variance);
  const double z = (mean - best) / sigma;
  const double ei = (mean - best) * normal_cdf(z) + sigma * normal_pdf(z);
  return std::max(0.0, ei);
}

double GpModel::kernel(const Eigen::Vector4d& a, const Eigen::Vector4d& b) const {
  const double l = lengthscales_[0];
  return std::exp(-(a - b).squaredNorm() / (2.0 * l * l));
}

GpModel GpModel::fit(const std::vector<Eigen::Vector4d>& X, const std::vector<double>& y,
                     const GpConfig& cfg) {
  const int n = static_cast<int>(X.size());
  if (n < 1 || y.size() != X.size())
    throw std::invalid_argument("gp_fit: need at least one (x, y) observation");
  for (const auto& x : X)
    if (!x.allFinite()) throw std::invalid_argument("gp_fit: non-finite input");
  for (double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("gp_fit: non-finite observation");
  if (cfg.lengthscale_grid.empty() || cfg.noise_grid.empty())
    throw std::invalid_argument("gp_fit: empty hyperparameter grid");

  Eigen::MatrixXd Xm(n, 4);
  for (int i = 0; i < n; ++i) Xm.row(i) = X[static_cast<size_t>(i)].transpose();

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double stdev = (var > 1e-24) ? std::sqrt(var) : 1.0;

  Eigen::VectorXd ys(n);
  for (int i = 0; i < n; ++i) ys[i] = (y[static_cast<size_t>(i)] - mean) / stdev;

  GpModel best;
  best.lml_ = -std::numeric_limits<double>::infinity();
  bool found = false;

  for (double l : cfg.lengthscale_grid) {
    const Eigen::MatrixXd K = kernel_matrix(Xm, l);
    for (double noise : cfg.noise_grid) {
      // Cholesky with escalating jitter; the contract allows a 10x retry
      // ladder before giving up.
      double jitter = 0.0;
      Eigen::LLT<Eigen::MatrixXd> llt;
      bool ok = false;
      for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::MatrixXd Kn = K;
        Kn.diagonal().array() += noise + jitter;
        llt.compute(Kn);
        if (llt.info() == Eigen::Success) {
          ok = true;
          break;
        }
        jitter = (jitter == 0.0) ? 1e-12 : jitter * 10.0;
      }
      if (!ok) continue;

      const Eigen::VectorXd alpha = llt.solve(ys);
      double log_det = 0.0;
      const auto& L = llt.matrixLLT();
      for (int i = 0; i < n; ++i) log_det += std::log(L(i, i));
      const double lml =
          -0.5 * ys.dot(alpha) - log_det - 0.5 * static_cast<double>(n) * kLog2Pi;

      if (lml > best.lml_) {
        best.X_ = Xm;
        best.L_ = llt.matrixL();
        best.alpha_ = alpha;
        best.lengthscales_ = Eigen::Vector4d::Constant(l);
        best.noise_ = noise;
        best.y_mean_ = mean;
        best.y_std_ = stdev;
        best.lml_ = lml;
        found = true;
      }
    }
  }
  if (!found)
    throw std::runtime_error("gp_fit: Cholesky failed for every hyperparameter choice");
  return best;
}

GpModel::Prediction GpModel::predict(const Eigen::Vector4d& x) const {
  const int n = static_cast<int>(X_.rows());
  Prediction out;
  if (n == 0) {
    out.mean = y_mean_;
    out.variance = y_std_ * y_std_;
    return out;
  }
  Eigen::VectorXd k_star(n);
  for (int i = 0; i < n; ++i)
    k_star[i] = kernel(X_.row(i).transpose(), x);

  const double mean_std = k_star.dot(alpha_);
  const Eigen::VectorXd v = L_.triangularView<Eigen::Lower>().solve(k_star);
  const double var_std = std::max(0.0, 1.0 - v.squaredNorm());

  out.mean = y_mean_ + y_std_ * mean_std;
  out.variance = y_std_ * y_std_ * var_std;
  return out;
}

}  // namespace stepmap
