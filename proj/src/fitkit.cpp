#include "lasertune/fitkit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lasertune/errors.hpp"

namespace lasertune {

Dataset::Dataset(std::size_t input_dim, std::vector<double> inputs,
                 std::vector<double> observations, std::vector<double> weights)
    : input_dim_(input_dim),
      inputs_(std::move(inputs)),
      observations_(std::move(observations)),
      weights_(std::move(weights)) {
  if (input_dim_ == 0) throw DomainError("dataset input dimension must be positive");
  if (inputs_.size() != observations_.size() * input_dim_) {
    throw DomainError("dataset inputs and observations differ in length");
  }
  if (!weights_.empty()) {
    if (weights_.size() != observations_.size()) {
      throw DomainError("dataset weights and observations differ in length");
    }
    for (double w : weights_) {
      if (!(w > 0.0)) throw DomainError("dataset weights must be positive");
    }
  }
}

Dataset Dataset::from_xy(std::span<const double> x, std::span<const double> y,
                         std::span<const double> weights) {
  return Dataset(1, {x.begin(), x.end()}, {y.begin(), y.end()}, {weights.begin(), weights.end()});
}

namespace {

std::size_t index_of(const std::vector<std::string>& names, std::string_view name) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("unknown parameter: " + std::string(name));
  return static_cast<std::size_t>(it - names.begin());
}

std::string format_params(std::span<const double> p) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ']';
  return os.str();
}

class Problem {
 public:
  Problem(const ModelSpec& model, const Dataset& data) : model_(model), data_(data) {}

  // Weighted residuals sqrt(w)(y - f); false if any prediction is non-finite.
  bool residuals(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    const std::span<const double> ps(p.data(), static_cast<std::size_t>(p.size()));
    r.resize(static_cast<Eigen::Index>(data_.size()));
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const double f = model_.evaluate(ps, data_.input(i));
      if (!std::isfinite(f)) return false;
      r[static_cast<Eigen::Index>(i)] = std::sqrt(data_.weight(i)) * (data_.observation(i) - f);
    }
    return true;
  }

  // Jacobian of the weighted model prediction (sign: +df/dp).
  void jacobian(const Eigen::VectorXd& p, const Eigen::VectorXd& r0, Eigen::MatrixXd& jac) const {
    const auto n = static_cast<Eigen::Index>(data_.size());
    const auto m = p.size();
    jac.resize(n, m);
    const std::span<const double> ps(p.data(), static_cast<std::size_t>(m));
    if (model_.gradient) {
      std::vector<double> g(static_cast<std::size_t>(m));
      for (Eigen::Index i = 0; i < n; ++i) {
        model_.gradient(ps, data_.input(static_cast<std::size_t>(i)), g);
        const double sw = std::sqrt(data_.weight(static_cast<std::size_t>(i)));
        for (Eigen::Index j = 0; j < m; ++j) jac(i, j) = sw * g[static_cast<std::size_t>(j)];
      }
      return;
    }
    const double eps = std::sqrt(std::numeric_limits<double>::epsilon());
    Eigen::VectorXd q = p;
    Eigen::VectorXd r1;
    for (Eigen::Index j = 0; j < m; ++j) {
      double h = eps * std::max(std::abs(p[j]), 1e-4);
      if (bounded(j) && p[j] + h > upper(j)) h = -h;
      q[j] = p[j] + h;
      if (!residuals(q, r1)) {
        q[j] = p[j] - h;
        h = -h;
        if (!residuals(q, r1)) {
          throw FitEvaluationError("model is non-finite next to parameters " +
                                   format_params(std::span<const double>(p.data(), p.size())));
        }
      }
      // r = sqrt(w)(y - f) so df = -(r1 - r0).
      jac.col(j) = -(r1 - r0) / h;
      q[j] = p[j];
    }
  }

  void clamp(Eigen::VectorXd& p) const {
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      if (bounded(j)) {
        const auto& b = *model_.bounds[static_cast<std::size_t>(j)];
        p[j] = std::clamp(p[j], b.lo, b.hi);
      }
    }
  }

 private:
  bool bounded(Eigen::Index j) const {
    return !model_.bounds.empty() && model_.bounds[static_cast<std::size_t>(j)].has_value();
  }
  double upper(Eigen::Index j) const { return model_.bounds[static_cast<std::size_t>(j)]->hi; }

  const ModelSpec& model_;
  const Dataset& data_;
};

}  // namespace

double FitResult::param(std::string_view name) const {
  return params[index_of(parameter_names, name)];
}

double FitResult::error(std::string_view name) const {
  return std_errors[index_of(parameter_names, name)];
}

FitResult fit_curve(const ModelSpec& model, const Dataset& data, std::span<const double> init,
                    const FitOptions& options) {
  const std::size_t m = model.parameter_count();
  if (!model.evaluate) throw DomainError("model '" + model.name + "' has no evaluator");
  if (init.size() != m) throw DomainError("initial parameter count does not match model");
  if (data.empty()) throw DomainError("dataset is empty");
  if (data.size() <= m) throw DomainError("need more data points than parameters");
  if (!model.bounds.empty()) {
    if (model.bounds.size() != m) throw DomainError("bounds must be given for every parameter");
    for (std::size_t j = 0; j < m; ++j) {
      if (!model.bounds[j]) continue;
      const auto& b = *model.bounds[j];
      if (!(b.lo < b.hi)) throw DomainError("bounds require lo < hi");
      if (init[j] < b.lo || init[j] > b.hi) {
        throw DomainError("initial value of '" + model.parameter_names[j] + "' is out of bounds");
      }
    }
  }

  Problem problem(model, data);
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(init.data(), static_cast<Eigen::Index>(m));
  Eigen::VectorXd r;
  if (!problem.residuals(p, r)) {
    throw FitEvaluationError("model '" + model.name + "' is non-finite at parameters " +
                             format_params(init));
  }

  FitResult result;
  result.model = model.name;
  result.parameter_names = model.parameter_names;

  double cost = r.squaredNorm();
  result.residual_history.push_back(std::sqrt(cost));
  double lambda = options.initial_damping;
  Eigen::MatrixXd jac;
  Eigen::VectorXd r_trial;
  bool need_jacobian = true;
  Eigen::MatrixXd jtj;
  Eigen::VectorXd jtr;

  int it = 0;
  while (it < options.max_iterations) {
    ++it;
    if (cost == 0.0 && it > 1) {
      result.converged = true;
      break;
    }
    if (need_jacobian) {
      problem.jacobian(p, r, jac);
      jtj = jac.transpose() * jac;
      jtr = jac.transpose() * r;
      need_jacobian = false;
    }
    Eigen::MatrixXd a = jtj;
    for (Eigen::Index j = 0; j < a.rows(); ++j) {
      const double d = jtj(j, j);
      a(j, j) += lambda * (d > 0.0 ? d : 1.0);
    }
    const Eigen::VectorXd step = a.ldlt().solve(jtr);
    if (!step.allFinite()) {
      lambda *= options.damping_increase;
      if (lambda > options.max_damping) break;
      continue;
    }
    if (step.norm() <= options.tolerance * (p.norm() + options.tolerance)) {
      result.converged = true;
      break;
    }
    Eigen::VectorXd trial = p + step;
    problem.clamp(trial);
    if (problem.residuals(trial, r_trial)) {
      const double trial_cost = r_trial.squaredNorm();
      if (trial_cost <= cost) {
        const double rel_step = (trial - p).norm() / (p.norm() + options.tolerance);
        p = trial;
        r = r_trial;
        cost = trial_cost;
        result.residual_history.push_back(std::sqrt(cost));
        lambda = std::max(lambda * options.damping_decrease, 1e-15);
        need_jacobian = true;
        if (rel_step <= options.tolerance) {
          result.converged = true;
          break;
        }
        continue;
      }
    }
    lambda *= options.damping_increase;
    if (lambda > options.max_damping) break;
  }

  result.iterations = it;
  result.params.assign(p.data(), p.data() + p.size());
  result.residual_norm = std::sqrt(cost);

  // Covariance at the final point.
  problem.jacobian(p, r, jac);
  jtj = jac.transpose() * jac;
  const auto n = static_cast<double>(data.size());
  const double s2 = cost / (n - static_cast<double>(m));
  result.std_errors.assign(m, std::numeric_limits<double>::infinity());

  // Invert the scale-normalized normal matrix over parameters with a nonzero
  // Jacobian column; the rest stay unidentified (infinite error).
  std::vector<Eigen::Index> live;
  for (Eigen::Index j = 0; j < jtj.rows(); ++j) {
    if (jtj(j, j) > 0.0 && std::isfinite(jtj(j, j))) live.push_back(j);
  }
  const auto k = static_cast<Eigen::Index>(live.size());
  if (k > 0) {
    Eigen::MatrixXd c(k, k);
    Eigen::VectorXd scale(k);
    for (Eigen::Index a = 0; a < k; ++a) scale[a] = std::sqrt(jtj(live[a], live[a]));
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) {
        c(a, b) = jtj(live[a], live[b]) / (scale[a] * scale[b]);
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(c);
    lu.setThreshold(1e-12);
    if (lu.isInvertible()) {
      const Eigen::MatrixXd inv = lu.inverse();
      for (Eigen::Index a = 0; a < k; ++a) {
        const double v = s2 * inv(a, a) / (scale[a] * scale[a]);
        result.std_errors[static_cast<std::size_t>(live[a])] =
            std::isfinite(v) ? std::sqrt(std::max(v, 0.0)) : std::numeric_limits<double>::infinity();
      }
    }
  }
  return result;
}

}  // namespace lasertune
