#ifndef IRGAIL_OPTIMIZER_H_
#define IRGAIL_OPTIMIZER_H_

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace irgail {

struct AdamOptions {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Global-norm gradient clipping; <= 0 disables.
  double max_grad_norm = 0.0;
};

// Adaptive-moment optimizer with bias correction.
class Adam {
 public:
  Adam() = default;
  Adam(size_t num_params, AdamOptions options);

  // Updates `params` in place. Throws NumericalError on a non-finite
  // gradient and std::invalid_argument on a size mismatch.
  void Step(std::span<double> params, std::span<const double> grad);

  long step_count() const { return step_count_; }
  const AdamOptions& options() const { return options_; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }

  nlohmann::json ToJson() const;
  static Adam FromJson(const nlohmann::json& j);

 private:
  AdamOptions options_;
  std::vector<double> first_moment_;
  std::vector<double> second_moment_;
  long step_count_ = 0;
};

}  // namespace irgail

#endif  // IRGAIL_OPTIMIZER_H_
