#ifndef IRGAIL_TAPE_H_
#define IRGAIL_TAPE_H_

// Reverse-mode differentiation over batched matrices.
//
// Values are (batch x features) matrices. A Tape records a fixed set of
// primitives (affine, tanh, relu, exp, log, square, softplus, mean and a few
// structural ops such as concat/slice) and replays them backwards from a
// scalar loss. Trainable parameters live outside the tape; the tape reads
// them through a ParamView and, unless the view is frozen, accumulates their
// gradient in place.

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace irgail {

using Matrix = Eigen::MatrixXd;
using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Parameters as seen by the tape. An empty `grad` freezes the block.
struct ParamView {
  std::span<const double> value;
  std::span<double> grad;

  bool frozen() const { return grad.empty(); }
};

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  // Gradient of the last Backward() loss w.r.t. this node (zeros if the
  // node did not influence the loss).
  Matrix grad() const;
  double scalar() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf that never receives gradient.
  Var Constant(Matrix value);
  // Leaf whose gradient is kept (readable through Var::grad()).
  Var Variable(Matrix value);
  // 1 x n parameter row replicated over `rows` rows.
  Var RowParameter(ParamView row, Eigen::Index rows);

  // y = x W^T + b with W stored row-major as (out x in).
  Var Affine(Var x, ParamView weight, ParamView bias, int in, int out);

  Var Tanh(Var x);
  Var Relu(Var x);
  Var Exp(Var x);
  Var Log(Var x);
  Var Square(Var x);
  Var Softplus(Var x);
  // Elementwise clamp; gradient is zero where the input was clamped.
  Var Clamp(Var x, double lo, double hi);

  Var Add(Var a, Var b);
  Var Sub(Var a, Var b);
  Var Mul(Var a, Var b);
  Var Scale(Var x, double factor);
  Var Shift(Var x, double offset);
  // Elementwise product with a constant matrix of the same shape.
  Var MulConst(Var x, const Matrix& factor);

  // Mean over every entry -> 1 x 1.
  Var Mean(Var x);
  // Sum over columns -> rows x 1.
  Var SumCols(Var x);
  // log(mean(exp(x))) over every entry -> 1 x 1, max-shifted.
  Var LogMeanExp(Var x);

  Var ConcatCols(Var a, Var b);
  Var SliceCols(Var x, Eigen::Index start, Eigen::Index count);

  // Back-propagates from a 1 x 1 node. Throws std::invalid_argument for a
  // non-scalar loss.
  void Backward(Var loss);

  size_t size() const { return nodes_.size(); }

 private:
  friend class Var;

  struct Node {
    Matrix value;
    Matrix grad;  // empty until touched
    bool requires_grad = false;
    std::function<void(Tape&, const Matrix&)> backward;
  };

  Var Push(Matrix value, bool requires_grad,
           std::function<void(Tape&, const Matrix&)> backward);
  bool RequiresGrad(Var v) const { return nodes_[v.id_].requires_grad; }
  void Accumulate(int id, const Matrix& g);
  void CheckSameShape(Var a, Var b, const char* op) const;

  std::vector<Node> nodes_;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator*(double s, Var x);
Var operator*(Var x, double s);
Var operator-(Var x);

}  // namespace irgail

#endif  // IRGAIL_TAPE_H_
