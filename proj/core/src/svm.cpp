#include "stepmap/svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace stepmap {

namespace {

double rbf(const std::array<double, 2>& a, const std::array<double, 2>& b, double gamma) {
  const double d0 = a[0] - b[0];
  const double d1 = a[1] - b[1];
  return std::exp(-gamma * (d0 * d0 + d1 * d1));
}

// gamma = 1 / (2 median(|x_i - x_j|^2)) over distinct pairs of standardized
// inputs; falls back to 1 when the points are degenerate.
double median_heuristic_gamma(const std::vector<std::array<double, 2>>& xs) {
  std::vector<double> d2;
  d2.reserve(xs.size() * (xs.size() - 1) / 2);
  for (size_t i = 0; i < xs.size(); ++i) {
    for (size_t j = i + 1; j < xs.size(); ++j) {
      const double dx = xs[i][0] - xs[j][0];
      const double dy = xs[i][1] - xs[j][1];
      d2.push_back(dx * dx + dy * dy);
    }
  }
  if (d2.empty()) return 1.0;
  std::nth_element(d2.begin(), d2.begin() + static_cast<ptrdiff_t>(d2.size() / 2), d2.end());
  const double med = d2[d2.size() / 2];
  if (!(med > 0.0)) return 1.0;
  return 1.0 / (2.0 * med);
}

// Platt-style sequential minimal optimization with per-sample box caps and a
// deterministic second-choice heuristic (argmax |E1 - E2|, ties to the lowest
// index, then ascending scans) so training is reproducible.
class SmoSolver {
 public:
  SmoSolver(const std::vector<std::array<double, 2>>& x, const std::vector<int>& y,
            const std::vector<double>& cap, double gamma, double tol, int max_passes)
      : x_(x), y_(y), cap_(cap), tol_(tol), max_passes_(max_passes) {
    const size_t n = x.size();
    kernel_.assign(n * n, 0.0);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j <= i; ++j) {
        const double k = rbf(x[i], x[j], gamma);
        kernel_[i * n + j] = k;
        kernel_[j * n + i] = k;
      }
    alpha_.assign(n, 0.0);
    error_.resize(n);
    for (size_t i = 0; i < n; ++i) error_[i] = -static_cast<double>(y[i]);
  }

  void solve() {
    const int n = static_cast<int>(x_.size());
    bool examine_all = true;
    int changed = 0;
    int passes = 0;
    while (changed > 0 || examine_all) {
      if (++passes > max_passes_)
        throw std::runtime_error("svm training did not converge within the pass budget");
      changed = 0;
      for (int i = 0; i < n; ++i) {
        if (examine_all || is_free(i)) changed += examine(i);
      }
      if (examine_all)
        examine_all = false;
      else if (changed == 0)
        examine_all = true;
    }
  }

  const std::vector<double>& alpha() const { return alpha_; }
  double bias() const { return bias_; }

 private:
  double k(int i, int j) const { return kernel_[static_cast<size_t>(i) * x_.size() + j]; }
  bool is_free(int i) const { return alpha_[i] > 0.0 && alpha_[i] < cap_[i]; }

  int examine(int i2) {
    const double r2 = error_[i2] * y_[i2];
    const bool violates = (r2 < -tol_ && alpha_[i2] < cap_[i2]) || (r2 > tol_ && alpha_[i2] > 0.0);
    if (!violates) return 0;
    const int n = static_cast<int>(x_.size());

    int best = -1;
    double best_gap = -1.0;
    for (int i = 0; i < n; ++i) {
      if (!is_free(i)) continue;
      const double gap = std::abs(error_[i2] - error_[i]);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best >= 0 && take_step(best, i2)) return 1;
    for (int off = 1; off <= n; ++off) {
      const int i = (i2 + off) % n;
      if (is_free(i) && take_step(i, i2)) return 1;
    }
    for (int off = 1; off <= n; ++off) {
      const int i = (i2 + off) % n;
      if (take_step(i, i2)) return 1;
    }
    return 0;
  }

  bool take_step(int i1, int i2) {
    if (i1 == i2) return false;
    const double a1_old = alpha_[i1];
    const double a2_old = alpha_[i2];
    const double y1 = y_[i1];
    const double y2 = y_[i2];
    const double e1 = error_[i1];
    const double e2 = error_[i2];
    const double s = y1 * y2;

    double lo, hi;
    if (y1 != y2) {
      lo = std::max(0.0, a2_old - a1_old);
      hi = std::min(cap_[i2], cap_[i1] + a2_old - a1_old);
    } else {
      lo = std::max(0.0, a1_old + a2_old - cap_[i1]);
      hi = std::min(cap_[i2], a1_old + a2_old);
    }
    if (lo >= hi) return false;

    const double k11 = k(i1, i1);
    const double k12 = k(i1, i2);
    const double k22 = k(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;

    // For an RBF kernel eta = 2(1 - k12) > 0 whenever the two points are
    // distinct; duplicated inputs give eta = 0 and no progress on this pair.
    if (!(eta > 0.0)) return false;
    double a2 = a2_old + y2 * (e1 - e2) / eta;
    a2 = std::clamp(a2, lo, hi);
    if (std::abs(a2 - a2_old) < 1e-12 * (a2 + a2_old + 1e-12)) return false;
    const double a1 = a1_old + s * (a2_old - a2);

    const double b1 =
        bias_ - e1 - y1 * (a1 - a1_old) * k11 - y2 * (a2 - a2_old) * k12;
    const double b2 =
        bias_ - e2 - y1 * (a1 - a1_old) * k12 - y2 * (a2 - a2_old) * k22;
    double b_new;
    if (a1 > 0.0 && a1 < cap_[i1])
      b_new = b1;
    else if (a2 > 0.0 && a2 < cap_[i2])
      b_new = b2;
    else
      b_new = 0.5 * (b1 + b2);

    const double db = b_new - bias_;
    const int n = static_cast<int>(x_.size());
    for (int i = 0; i < n; ++i)
      error_[i] += y1 * (a1 - a1_old) * k(i1, i) + y2 * (a2 - a2_old) * k(i2, i) + db;

    alpha_[i1] = a1;
    alpha_[i2] = a2;
    bias_ = b_new;
    return true;
  }

  const std::vector<std::array<double, 2>>& x_;
  const std::vector<int>& y_;
  const std::vector<double>& cap_;
  std::vector<double> kernel_;
  std::vector<double> alpha_;
  std::vector<double> error_;
  double bias_ = 0.0;
  double tol_;
  int max_passes_;
};

}  // namespace

void SvmHyperparams::validate() const {
  if (!(c_base > 0.0)) throw std::invalid_argument("svm: c_base must be > 0");
  if (!(weight_reachable > 0.0) || !(weight_unreachable > 0.0))
    throw std::invalid_argument("svm: class weights must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("svm: tolerance must be > 0");
  if (max_passes < 1) throw std::invalid_argument("svm: max_passes must be >= 1");
}

double SafeRegionModel::box_cap(int lbl) const {
  return hyperparams.c_base *
         (lbl > 0 ? hyperparams.weight_reachable : hyperparams.weight_unreachable);
}

double SafeRegionModel::decision_value(const InitialCondition& ic) const {
  const std::array<double, 2> x{(ic.xdot0 - mean[0]) / stddev[0],
                                (ic.s_des - mean[1]) / stddev[1]};
  double f = bias;
  for (size_t i = 0; i < support_x.size(); ++i)
    f += alpha[i] * label[i] * rbf(support_x[i], x, gamma);
  return f;
}

bool SafeRegionModel::classify(const InitialCondition& ic) const {
  return decision_value(ic) >= 0.0;
}

void SafeRegionModel::validate() const {
  hyperparams.validate();
  if (support_x.size() != alpha.size() || support_x.size() != label.size())
    throw std::invalid_argument("safe region: support vector arrays disagree in length");
  if (support_x.empty()) throw std::invalid_argument("safe region: no support vectors");
  if (!(gamma > 0.0)) throw std::invalid_argument("safe region: gamma must be > 0");
  if (!(stddev[0] > 0.0) || !(stddev[1] > 0.0))
    throw std::invalid_argument("safe region: standardization scale must be > 0");
  double balance = 0.0;
  double mass = 0.0;
  for (size_t i = 0; i < alpha.size(); ++i) {
    if (label[i] != 1 && label[i] != -1)
      throw std::invalid_argument("safe region: labels must be +/-1");
    if (alpha[i] <= 0.0 || alpha[i] > box_cap(label[i]) + 1e-9)
      throw std::invalid_argument("safe region: dual coefficient outside its box");
    balance += alpha[i] * label[i];
    mass += alpha[i];
  }
  if (std::abs(balance) > 1e-8 * std::max(1.0, mass))
    throw std::invalid_argument("safe region: dual equality constraint violated");
}

SafeRegionModel train_safe_region(const ReachMap& reach, const SvmHyperparams& hp) {
  reach.validate();
  hp.validate();

  const int nv = static_cast<int>(reach.velocities.size());
  const int np = static_cast<int>(reach.positions.size());
  const int n = nv * np;

  std::vector<std::array<double, 2>> raw(static_cast<size_t>(n));
  std::vector<int> y(static_cast<size_t>(n));
  int n_pos = 0;
  for (int iv = 0; iv < nv; ++iv)
    for (int jp = 0; jp < np; ++jp) {
      const int i = reach.index(iv, jp);
      raw[static_cast<size_t>(i)] = {reach.velocities[static_cast<size_t>(iv)],
                                     reach.positions[static_cast<size_t>(jp)]};
      y[static_cast<size_t>(i)] = reach.at(iv, jp) ? 1 : -1;
      if (y[static_cast<size_t>(i)] == 1) ++n_pos;
    }
  if (n_pos == 0 || n_pos == n)
    throw std::invalid_argument("train_safe_region: training map contains a single class");

  SafeRegionModel model;
  model.hyperparams = hp;
  model.velocity_range = {reach.velocities.front(), reach.velocities.back()};
  model.position_range = {reach.positions.front(), reach.positions.back()};

  // Standardize each axis with the population statistics of the cell grid.
  for (int d = 0; d < 2; ++d) {
    double m = 0.0;
    for (const auto& p : raw) m += p[d];
    m /= n;
    double v = 0.0;
    for (const auto& p : raw) v += (p[d] - m) * (p[d] - m);
    v /= n;
    model.mean[d] = m;
    model.stddev[d] = v > 0.0 ? std::sqrt(v) : 1.0;
  }
  std::vector<std::array<double, 2>> xs(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    xs[static_cast<size_t>(i)] = {(raw[static_cast<size_t>(i)][0] - model.mean[0]) / model.stddev[0],
                                  (raw[static_cast<size_t>(i)][1] - model.mean[1]) / model.stddev[1]};

  model.gamma = hp.gamma > 0.0 ? hp.gamma : median_heuristic_gamma(xs);

  std::vector<double> cap(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) cap[static_cast<size_t>(i)] = model.box_cap(y[static_cast<size_t>(i)]);

  SmoSolver solver(xs, y, cap, model.gamma, hp.tol, hp.max_passes);
  solver.solve();

  const std::vector<double>& a = solver.alpha();
  double dual = 0.0;
  for (int i = 0; i < n; ++i) {
    dual += a[static_cast<size_t>(i)];
    for (int j = 0; j < n; ++j)
      dual -= 0.5 * a[static_cast<size_t>(i)] * a[static_cast<size_t>(j)] *
              y[static_cast<size_t>(i)] * y[static_cast<size_t>(j)] *
              rbf(xs[static_cast<size_t>(i)], xs[static_cast<size_t>(j)], model.gamma);
  }
  model.dual_objective = dual;

  for (int i = 0; i < n; ++i) {
    if (a[static_cast<size_t>(i)] > 1e-12) {
      model.support_x.push_back(xs[static_cast<size_t>(i)]);
      model.alpha.push_back(a[static_cast<size_t>(i)]);
      model.label.push_back(y[static_cast<size_t>(i)]);
    }
  }
  model.bias = solver.bias();
  model.validate();
  return model;
}

void save_safe_region(const std::filesystem::path& path, const SafeRegionModel& model) {
  model.validate();
  nlohmann::json j;
  j["kernel"] = "rbf";
  j["gamma"] = model.gamma;
  j["bias"] = model.bias;
  j["c_base"] = model.hyperparams.c_base;
  j["weight_reachable"] = model.hyperparams.weight_reachable;
  j["weight_unreachable"] = model.hyperparams.weight_unreachable;
  j["tol"] = model.hyperparams.tol;
  j["max_passes"] = model.hyperparams.max_passes;
  j["mean"] = model.mean;
  j["stddev"] = model.stddev;
  j["velocity_range"] = model.velocity_range;
  j["position_range"] = model.position_range;
  j["dual_objective"] = model.dual_objective;
  j["support_x"] = model.support_x;
  j["alpha"] = model.alpha;
  j["label"] = model.label;
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

SafeRegionModel load_safe_region(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  SafeRegionModel model;
  model.gamma = j.at("gamma").get<double>();
  model.bias = j.at("bias").get<double>();
  model.hyperparams.c_base = j.at("c_base").get<double>();
  model.hyperparams.weight_reachable = j.at("weight_reachable").get<double>();
  model.hyperparams.weight_unreachable = j.at("weight_unreachable").get<double>();
  model.hyperparams.tol = j.at("tol").get<double>();
  model.hyperparams.max_passes = j.at("max_passes").get<int>();
  model.mean = j.at("mean").get<std::array<double, 2>>();
  model.stddev = j.at("stddev").get<std::array<double, 2>>();
  model.velocity_range = j.at("velocity_range").get<std::array<double, 2>>();
  model.position_range = j.at("position_range").get<std::array<double, 2>>();
  model.dual_objective = j.at("dual_objective").get<double>();
  model.support_x = j.at("support_x").get<std::vector<std::array<double, 2>>>();
  model.alpha = j.at("alpha").get<std::vector<double>>();
  model.label = j.at("label").get<std::vector<int>>();
  model.validate();
  return model;
}

}  // namespace stepmap
