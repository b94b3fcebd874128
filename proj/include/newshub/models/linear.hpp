#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "newshub/features/features.hpp"
#include "newshub/label.hpp"

namespace newshub::models {

using features::CsrMatrix;

enum class LinearLoss { log, hinge, squared_hinge };

const char* to_string(LinearLoss loss) noexcept;

struct LinearModel {
  LinearLoss loss = LinearLoss::log;
  std::vector<double> weights;
  double bias = 0.0;
  // L-BFGS iterations or SGD epochs actually run.
  std::size_t iterations = 0;
  // Final gradient norm (log loss only).
  double gradient_norm = 0.0;

  double decision(CsrMatrix::Row row) const;
  // Decision value exactly zero maps to label 0.
  Label predict_row(CsrMatrix::Row row) const { return decision(row) > 0.0 ? Label::fake : Label::real; }
};

// 0.5 * w.w + C * sum log(1 + exp(-y_i (w.x_i + b))) with y in {-1, +1}.
// Fills the gradient (d weights then the bias) when grad is non-empty.
double logistic_objective(const CsrMatrix& x, std::span<const Label> y, std::span<const double> w,
                          double b, double c, std::span<double> grad);

struct LogisticOptions {
  double c = 1.0;
  std::size_t max_iter = 1000;
  double tol = 1e-6;
  std::size_t history = 10;
};

// Full-batch L-BFGS until the gradient norm is <= tol or max_iter is hit.
LinearModel train_logistic(const CsrMatrix& x, std::span<const Label> y, const LogisticOptions& opts = {});

struct SgdOptions {
  LinearLoss loss = LinearLoss::hinge;
  double c = 1.0;
  double learning_rate = 0.01;
  std::size_t epochs = 50;
  bool shuffle = true;
  std::uint64_t seed = 0;
  // Called after every epoch with the 1-based epoch number.
  std::function<void(std::size_t, const LinearModel&)> on_epoch;
};

// Epoch-shuffled stochastic subgradient descent on the per-sample objective
// 0.5 * w.w / n + C * loss_i.
LinearModel train_sgd(const CsrMatrix& x, std::span<const Label> y, const SgdOptions& opts);

nlohmann::json to_json(const LinearModel& m);
LinearModel linear_from_json(const nlohmann::json& j);

}  // namespace newshub::models
