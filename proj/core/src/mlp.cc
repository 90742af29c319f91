#include "irgail/mlp.h"

#include <cmath>
#include <stdexcept>

namespace irgail {

namespace {
constexpr int kCheckpointVersion = 1;
}

std::string ToString(Activation activation) {
  return activation == Activation::kTanh ? "tanh" : "relu";
}

Activation ParseActivation(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

Mlp::Mlp(std::vector<int> widths, Activation activation)
    : widths_(std::move(widths)), activation_(activation) {
  if (widths_.size() < 2) {
    throw std::invalid_argument("an Mlp needs at least input and output "
                                "widths");
  }
  for (int w : widths_) {
    if (w <= 0) throw std::invalid_argument("Mlp widths must be positive");
  }
  params_.assign(ParameterCount(widths_), 0.0);
}

size_t Mlp::ParameterCount(std::span<const int> widths) {
  size_t count = 0;
  for (size_t i = 0; i + 1 < widths.size(); ++i) {
    count += static_cast<size_t>(widths[i] + 1) * widths[i + 1];
  }
  return count;
}

void Mlp::InitRandom(Rng& rng, double output_scale) {
  size_t offset = 0;
  const size_t layers = widths_.size() - 1;
  for (size_t l = 0; l < layers; ++l) {
    const int in = widths_[l];
    const int out = widths_[l + 1];
    double limit = std::sqrt(6.0 / (in + out));
    if (l + 1 == layers) limit *= output_scale;
    for (int k = 0; k < in * out; ++k) {
      params_[offset++] = rng.Uniform(-limit, limit);
    }
    for (int k = 0; k < out; ++k) params_[offset++] = 0.0;
  }
}

Matrix Mlp::Forward(const Matrix& input) const {
  if (input.cols() != static_cast<Eigen::Index>(input_dim())) {
    throw std::invalid_argument("Mlp::Forward: input has " +
                                std::to_string(input.cols()) +
                                " columns, network expects " +
                                std::to_string(input_dim()));
  }
  Matrix x = input;
  size_t offset = 0;
  const size_t layers = widths_.size() - 1;
  for (size_t l = 0; l < layers; ++l) {
    const int in = widths_[l];
    const int out = widths_[l + 1];
    Eigen::Map<const RowMajorMatrix> w(params_.data() + offset, out, in);
    offset += static_cast<size_t>(in) * out;
    Eigen::Map<const Eigen::RowVectorXd> b(params_.data() + offset, out);
    offset += out;
    Matrix y = x * w.transpose();
    y.rowwise() += b;
    if (l + 1 < layers) {
      if (activation_ == Activation::kTanh) {
        y = y.array().tanh().matrix();
      } else {
        y = y.cwiseMax(0.0);
      }
    }
    x = std::move(y);
  }
  return x;
}

std::vector<double> Mlp::Forward(std::span<const double> input) const {
  Matrix in(1, static_cast<Eigen::Index>(input.size()));
  for (size_t i = 0; i < input.size(); ++i) in(0, i) = input[i];
  const Matrix out = Forward(in);
  return std::vector<double>(out.data(), out.data() + out.size());
}

Var Mlp::Forward(Tape& tape, Var input, std::span<double> grad) const {
  if (!grad.empty() && grad.size() != params_.size()) {
    throw std::invalid_argument("Mlp::Forward: gradient buffer size mismatch");
  }
  Var x = input;
  size_t offset = 0;
  const size_t layers = widths_.size() - 1;
  auto view = [&](size_t n) {
    ParamView v{std::span<const double>(params_).subspan(offset, n),
                grad.empty() ? std::span<double>() : grad.subspan(offset, n)};
    offset += n;
    return v;
  };
  for (size_t l = 0; l < layers; ++l) {
    const int in = widths_[l];
    const int out = widths_[l + 1];
    ParamView w = view(static_cast<size_t>(in) * out);
    ParamView b = view(out);
    x = tape.Affine(x, w, b, in, out);
    if (l + 1 < layers) {
      x = activation_ == Activation::kTanh ? tape.Tanh(x) : tape.Relu(x);
    }
  }
  return x;
}

bool Mlp::AllFinite() const {
  for (double p : params_) {
    if (!std::isfinite(p)) return false;
  }
  return true;
}

nlohmann::json Mlp::ToJson() const {
  return {{"version", kCheckpointVersion},
          {"widths", widths_},
          {"activation", ToString(activation_)},
          {"params", params_}};
}

Mlp Mlp::FromJson(const nlohmann::json& j) {
  if (j.at("version").get<int>() != kCheckpointVersion) {
    throw std::runtime_error("unsupported network checkpoint version");
  }
  Mlp net(j.at("widths").get<std::vector<int>>(),
          ParseActivation(j.at("activation").get<std::string>()));
  auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != net.params_.size()) {
    throw std::runtime_error("network checkpoint has " +
                             std::to_string(params.size()) +
                             " parameters, architecture needs " +
                             std::to_string(net.params_.size()));
  }
  net.params_ = std::move(params);
  return net;
}

}  // namespace irgail
