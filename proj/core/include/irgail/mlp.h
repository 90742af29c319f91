#ifndef IRGAIL_MLP_H_
#define IRGAIL_MLP_H_

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "irgail/random.h"
#include "irgail/tape.h"

namespace irgail {

enum class Activation { kTanh, kRelu };

std::string ToString(Activation activation);
Activation ParseActivation(const std::string& name);

// Fully connected network with a hidden activation and a linear output
// layer. Parameters are one flat vector: for each layer, the (out x in)
// row-major weight followed by the bias.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> widths, Activation activation);

  // Sum over layers of (in + 1) * out.
  static size_t ParameterCount(std::span<const int> widths);

  // Glorot-uniform weights, zero biases. `output_scale` shrinks the last
  // layer (useful for policy heads that should start near zero).
  void InitRandom(Rng& rng, double output_scale = 1.0);

  size_t input_dim() const { return widths_.front(); }
  size_t output_dim() const { return widths_.back(); }
  const std::vector<int>& widths() const { return widths_; }
  Activation activation() const { return activation_; }
  size_t num_params() const { return params_.size(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  // Batched evaluation without recording. Rows are samples. Throws
  // std::invalid_argument on a column-count mismatch.
  Matrix Forward(const Matrix& input) const;
  std::vector<double> Forward(std::span<const double> input) const;

  // Records the network on `tape`. Parameter gradients are accumulated into
  // `grad` (size num_params()); pass an empty span to freeze the network.
  Var Forward(Tape& tape, Var input, std::span<double> grad = {}) const;

  bool AllFinite() const;

  nlohmann::json ToJson() const;
  static Mlp FromJson(const nlohmann::json& j);

 private:
  std::vector<int> widths_;
  Activation activation_ = Activation::kTanh;
  std::vector<double> params_;
};

}  // namespace irgail

#endif  // IRGAIL_MLP_H_
