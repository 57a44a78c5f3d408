#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lasertune {

struct ParameterBounds {
  double lo;
  double hi;
};

/// A parametric model y = f(params, x) with x a point of fixed dimension.
struct ModelSpec {
  using Evaluator = std::function<double(std::span<const double> params,
                                         std::span<const double> x)>;
  /// Writes df/dparams into `grad` (size = parameter count).
  using Gradient = std::function<void(std::span<const double> params,
                                      std::span<const double> x,
                                      std::span<double> grad)>;

  std::string name;
  std::vector<std::string> parameter_names;
  Evaluator evaluate;
  Gradient gradient;  ///< optional; forward differences when empty
  std::vector<std::optional<ParameterBounds>> bounds;  ///< empty or one per parameter

  [[nodiscard]] std::size_t parameter_count() const { return parameter_names.size(); }
};

/// Observations with row-major flattened inputs.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t input_dim, std::vector<double> inputs, std::vector<double> observations,
          std::vector<double> weights = {});

  /// Scalar-input convenience constructor.
  static Dataset from_xy(std::span<const double> x, std::span<const double> y,
                         std::span<const double> weights = {});

  [[nodiscard]] std::size_t size() const { return observations_.size(); }
  [[nodiscard]] bool empty() const { return observations_.empty(); }
  [[nodiscard]] std::size_t input_dim() const { return input_dim_; }
  [[nodiscard]] std::span<const double> input(std::size_t i) const {
    return {inputs_.data() + i * input_dim_, input_dim_};
  }
  [[nodiscard]] double observation(std::size_t i) const { return observations_[i]; }
  [[nodiscard]] double weight(std::size_t i) const {
    return weights_.empty() ? 1.0 : weights_[i];
  }
  [[nodiscard]] std::span<const double> observations() const { return observations_; }

 private:
  std::size_t input_dim_ = 1;
  std::vector<double> inputs_;
  std::vector<double> observations_;
  std::vector<double> weights_;
};

struct FitOptions {
  int max_iterations = 200;
  double tolerance = 1e-10;       ///< on relative parameter step
  double initial_damping = 1e-3;
  double damping_increase = 10.0;
  double damping_decrease = 0.1;
  double max_damping = 1e16;
};

struct FitResult {
  std::string model;
  std::vector<std::string> parameter_names;
  std::vector<double> params;
  std::vector<double> std_errors;
  double residual_norm = 0.0;  ///< sqrt(sum w r^2)
  bool converged = false;
  int iterations = 0;
  /// Residual norm after every accepted step, starting with the initial point.
  std::vector<double> residual_history;

  [[nodiscard]] double param(std::string_view name) const;
  [[nodiscard]] double error(std::string_view name) const;
};

/// Damped least squares (Levenberg-Marquardt with Marquardt diagonal scaling).
///
/// Standard errors come from s^2 (J^T W J)^{-1} at the optimum with
/// s^2 = cost / (n - p). A singular normal matrix yields infinite errors and,
/// if no step can be taken, converged = false rather than an exception.
///
/// Throws DomainError for an invalid dataset or initial point, and
/// FitEvaluationError if the model is non-finite at the initial parameters.
/// Non-finite trial points are treated as rejected steps.
[[nodiscard]] FitResult fit_curve(const ModelSpec& model, const Dataset& data,
                                  std::span<const double> init, const FitOptions& options = {});

}  // namespace lasertune
