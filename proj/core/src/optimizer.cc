#include "irgail/optimizer.h"

#include <cmath>
#include <stdexcept>

#include "irgail/errors.h"

namespace irgail {

Adam::Adam(size_t num_params, AdamOptions options)
    : options_(options),
      first_moment_(num_params, 0.0),
      second_moment_(num_params, 0.0) {}

void Adam::Step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != first_moment_.size() || grad.size() != params.size()) {
    throw std::invalid_argument("Adam::Step: parameter/gradient size "
                                "mismatch");
  }
  double sq_norm = 0.0;
  for (double g : grad) {
    if (!std::isfinite(g)) {
      throw NumericalError("non-finite gradient passed to the optimizer");
    }
    sq_norm += g * g;
  }
  double scale = 1.0;
  if (options_.max_grad_norm > 0.0) {
    const double norm = std::sqrt(sq_norm);
    if (norm > options_.max_grad_norm) scale = options_.max_grad_norm / norm;
  }

  ++step_count_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
  const double lr = options_.learning_rate;
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = scale * grad[i];
    first_moment_[i] = b1 * first_moment_[i] + (1.0 - b1) * g;
    second_moment_[i] = b2 * second_moment_[i] + (1.0 - b2) * g * g;
    const double m_hat = first_moment_[i] / c1;
    const double v_hat = second_moment_[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + options_.epsilon);
  }
}

nlohmann::json Adam::ToJson() const {
  return {{"learning_rate", options_.learning_rate},
          {"beta1", options_.beta1},
          {"beta2", options_.beta2},
          {"epsilon", options_.epsilon},
          {"max_grad_norm", options_.max_grad_norm},
          {"step_count", step_count_},
          {"first_moment", first_moment_},
          {"second_moment", second_moment_}};
}

Adam Adam::FromJson(const nlohmann::json& j) {
  AdamOptions o;
  o.learning_rate = j.at("learning_rate").get<double>();
  o.beta1 = j.at("beta1").get<double>();
  o.beta2 = j.at("beta2").get<double>();
  o.epsilon = j.at("epsilon").get<double>();
  o.max_grad_norm = j.at("max_grad_norm").get<double>();
  Adam adam;
  adam.options_ = o;
  adam.step_count_ = j.at("step_count").get<long>();
  adam.first_moment_ = j.at("first_moment").get<std::vector<double>>();
  adam.second_moment_ = j.at("second_moment").get<std::vector<double>>();
  return adam;
}

}  // namespace irgail
