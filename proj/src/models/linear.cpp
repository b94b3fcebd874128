#include "newshub/models/linear.hpp"

#include <cmath>
#include <deque>
#include <numeric>

#include "common.hpp"
#include "newshub/error.hpp"
#include "newshub/random.hpp"

namespace newshub::models {

using nlohmann::json;

namespace {

double sign_of(Label l) { return l == Label::fake ? 1.0 : -1.0; }

// log(1 + exp(-m)) without overflow.
double softplus_neg(double m) { return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

// 1 / (1 + exp(m)).
double sigmoid_neg(double m) {
  if (m >= 0) {
    const double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

const char* to_string(LinearLoss loss) noexcept {
  switch (loss) {
    case LinearLoss::log: return "log";
    case LinearLoss::hinge: return "hinge";
    case LinearLoss::squared_hinge: return "squared_hinge";
  }
  return "log";
}

double LinearModel::decision(CsrMatrix::Row row) const { return detail::dot(row, weights) + bias; }

double logistic_objective(const CsrMatrix& x, std::span<const Label> y, std::span<const double> w,
                          double b, double c, std::span<double> grad) {
  const std::size_t d = x.cols;
  if (w.size() != d) throw Error(Errc::input, "weight vector length differs from feature count");
  if (!grad.empty() && grad.size() != d + 1) throw Error(Errc::input, "gradient buffer must hold d + 1 values");
  double f = 0.5 * dot(w, w);
  if (!grad.empty()) {
    for (std::size_t j = 0; j < d; ++j) grad[j] = w[j];
    grad[d] = 0.0;
  }
  for (std::size_t i = 0; i < x.rows; ++i) {
    auto row = x.row(i);
    const double yi = sign_of(y[i]);
    const double m = yi * (detail::dot(row, w) + b);
    f += c * softplus_neg(m);
    if (grad.empty()) continue;
    const double coef = -c * yi * sigmoid_neg(m);
    for (std::size_t k = 0; k < row.size(); ++k) grad[row.indices[k]] += coef * row.values[k];
    grad[d] += coef;
  }
  return f;
}

LinearModel train_logistic(const CsrMatrix& x, std::span<const Label> y, const LogisticOptions& opts) {
  detail::check_training_input(x, y);
  const std::size_t d = x.cols;
  const std::size_t n = d + 1;
  std::vector<double> theta(n, 0.0), grad(n), next(n), next_grad(n), dir(n);
  auto eval = [&](const std::vector<double>& t, std::vector<double>& g) {
    return logistic_objective(x, y, std::span(t).first(d), t[d], opts.c, g);
  };
  double f = eval(theta, grad);
  std::deque<std::pair<std::vector<double>, std::vector<double>>> memory;
  std::deque<double> rho;
  std::size_t iter = 0;
  double gnorm = norm2(grad);

  while (iter < opts.max_iter && gnorm > opts.tol) {
    // Two-loop recursion for the quasi-Newton direction.
    dir = grad;
    std::vector<double> alpha(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
      alpha[k] = rho[k] * dot(memory[k].first, dir);
      for (std::size_t j = 0; j < n; ++j) dir[j] -= alpha[k] * memory[k].second[j];
    }
    double gamma = 1.0;
    if (!memory.empty()) {
      const auto& [s, yv] = memory.back();
      gamma = dot(s, yv) / dot(yv, yv);
    } else {
      gamma = 1.0 / std::max(1.0, gnorm);
    }
    for (double& v : dir) v *= gamma;
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const double beta = rho[k] * dot(memory[k].second, dir);
      for (std::size_t j = 0; j < n; ++j) dir[j] += memory[k].first[j] * (alpha[k] - beta);
    }
    for (double& v : dir) v = -v;
    double slope = dot(grad, dir);
    if (!(slope < 0.0)) {
      memory.clear();
      rho.clear();
      for (std::size_t j = 0; j < n; ++j) dir[j] = -grad[j] / std::max(1.0, gnorm);
      slope = dot(grad, dir);
    }

    double step = 1.0;
    bool accepted = false;
    double f_next = f;
    for (int tries = 0; tries < 60; ++tries) {
      for (std::size_t j = 0; j < n; ++j) next[j] = theta[j] + step * dir[j];
      f_next = eval(next, next_grad);
      if (f_next <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      // Near the optimum the objective is flat to rounding; accept steps
      // that still shrink the gradient.
      if (f_next <= f + 1e-12 * std::fabs(f) && norm2(next_grad) < gnorm) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++iter;
    if (!accepted) break;

    std::vector<double> s(n), yv(n);
    for (std::size_t j = 0; j < n; ++j) {
      s[j] = next[j] - theta[j];
      yv[j] = next_grad[j] - grad[j];
    }
    const double sy = dot(s, yv);
    if (sy > 1e-12 * norm2(s) * norm2(yv)) {
      memory.emplace_back(std::move(s), std::move(yv));
      rho.push_back(1.0 / sy);
      if (memory.size() > opts.history) {
        memory.pop_front();
        rho.pop_front();
      }
    }
    theta.swap(next);
    grad.swap(next_grad);
    f = f_next;
    gnorm = norm2(grad);
  }

  LinearModel m;
  m.loss = LinearLoss::log;
  m.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(d));
  m.bias = theta[d];
  m.iterations = iter;
  m.gradient_norm = gnorm;
  return m;
}

LinearModel train_sgd(const CsrMatrix& x, std::span<const Label> y, const SgdOptions& opts) {
  detail::check_training_input(x, y);
  if (opts.loss == LinearLoss::log) throw Error(Errc::validation, "use train_logistic for log loss");
  const std::size_t n = x.rows;
  const double shrink = 1.0 - opts.learning_rate / static_cast<double>(n);
  if (!(shrink > 0.0)) throw Error(Errc::validation, "learning rate too large for the sample count");

  std::vector<double> v(x.cols, 0.0);
  double scale = 1.0;
  double b = 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(opts.seed);

  LinearModel m;
  m.loss = opts.loss;
  auto materialize = [&] {
    m.weights.resize(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) m.weights[j] = v[j] * scale;
    m.bias = b;
  };

  for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
    if (opts.shuffle) shuffle(std::span(order), rng);
    for (std::size_t i : order) {
      auto row = x.row(i);
      const double yi = sign_of(y[i]);
      const double z = scale * detail::dot(row, v) + b;
      const double margin = yi * z;
      double dloss = 0.0;
      if (margin < 1.0) dloss = opts.loss == LinearLoss::hinge ? -yi : -2.0 * yi * (1.0 - margin);
      scale *= shrink;
      if (dloss != 0.0) {
        const double coef = -opts.learning_rate * opts.c * dloss / scale;
        for (std::size_t k = 0; k < row.size(); ++k) v[row.indices[k]] += coef * row.values[k];
        b -= opts.learning_rate * opts.c * dloss;
      }
      if (scale < 1e-9) {
        for (double& w : v) w *= scale;
        scale = 1.0;
      }
    }
    m.iterations = epoch;
    if (opts.on_epoch) {
      materialize();
      opts.on_epoch(epoch, m);
    }
  }
  materialize();
  for (double w : m.weights)
    if (!std::isfinite(w)) throw Error(Errc::training, "SGD diverged; lower the learning rate");
  return m;
}

json to_json(const LinearModel& m) {
  return {{"loss", to_string(m.loss)},
          {"weights", m.weights},
          {"bias", m.bias},
          {"iterations", m.iterations},
          {"gradient_norm", m.gradient_norm}};
}

LinearModel linear_from_json(const json& j) {
  LinearModel m;
  const auto loss = j.at("loss").get<std::string>();
  if (loss == "log") m.loss = LinearLoss::log;
  else if (loss == "hinge") m.loss = LinearLoss::hinge;
  else if (loss == "squared_hinge") m.loss = LinearLoss::squared_hinge;
  else throw Error(Errc::input, "unknown linear loss '" + loss + "'");
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.iterations = j.value("iterations", std::size_t{0});
  m.gradient_norm = j.value("gradient_norm", 0.0);
  return m;
}

}  // namespace newshub::models
