#include "irgail/tape.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace irgail {

const Matrix& Var::value() const { return tape_->nodes_[id_].value; }

Matrix Var::grad() const {
  const auto& node = tape_->nodes_[id_];
  if (node.grad.size() == 0) {
    return Matrix::Zero(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) {
    throw std::invalid_argument("Var::scalar on a non-scalar node");
  }
  return v(0, 0);
}

Var Tape::Push(Matrix value, bool requires_grad,
               std::function<void(Tape&, const Matrix&)> backward) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::Accumulate(int id, const Matrix& g) {
  Node& node = nodes_[id];
  if (!node.requires_grad) return;
  if (node.grad.size() == 0) {
    node.grad = g;
  } else {
    node.grad += g;
  }
}

void Tape::CheckSameShape(Var a, Var b, const char* op) const {
  const Matrix& x = nodes_[a.id_].value;
  const Matrix& y = nodes_[b.id_].value;
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw std::invalid_argument(
        std::string(op) + ": shape mismatch (" + std::to_string(x.rows()) +
        "x" + std::to_string(x.cols()) + " vs " + std::to_string(y.rows()) +
        "x" + std::to_string(y.cols()) + ")");
  }
}

Var Tape::Constant(Matrix value) { return Push(std::move(value), false, {}); }

Var Tape::Variable(Matrix value) {
  return Push(std::move(value), true, [](Tape&, const Matrix&) {});
}

Var Tape::RowParameter(ParamView row, Eigen::Index rows) {
  const auto n = static_cast<Eigen::Index>(row.value.size());
  Eigen::Map<const Eigen::RowVectorXd> r(row.value.data(), n);
  Matrix value = r.replicate(rows, 1);
  const bool trainable = !row.frozen();
  return Push(std::move(value), trainable,
              [row, n](Tape&, const Matrix& g) {
                Eigen::Map<Eigen::RowVectorXd> gr(row.grad.data(), n);
                gr += g.colwise().sum();
              });
}

Var Tape::Affine(Var x, ParamView weight, ParamView bias, int in, int out) {
  const Matrix& xv = x.value();
  if (xv.cols() != in) {
    throw std::invalid_argument("Affine: input has " +
                                std::to_string(xv.cols()) +
                                " features, layer expects " +
                                std::to_string(in));
  }
  if (weight.value.size() != static_cast<size_t>(in) * out ||
      bias.value.size() != static_cast<size_t>(out)) {
    throw std::invalid_argument("Affine: parameter block size mismatch");
  }
  Eigen::Map<const RowMajorMatrix> w(weight.value.data(), out, in);
  Eigen::Map<const Eigen::RowVectorXd> b(bias.value.data(), out);
  Matrix y = xv * w.transpose();
  y.rowwise() += b;
  const bool needs = RequiresGrad(x) || !weight.frozen() || !bias.frozen();
  const int xid = x.id_;
  return Push(std::move(y), needs,
              [xid, weight, bias, in, out](Tape& t, const Matrix& g) {
                Eigen::Map<const RowMajorMatrix> w(weight.value.data(), out,
                                                   in);
                if (!weight.frozen()) {
                  Eigen::Map<RowMajorMatrix> gw(weight.grad.data(), out, in);
                  gw.noalias() += g.transpose() * t.nodes_[xid].value;
                }
                if (!bias.frozen()) {
                  Eigen::Map<Eigen::RowVectorXd> gb(bias.grad.data(), out);
                  gb += g.colwise().sum();
                }
                if (t.nodes_[xid].requires_grad) {
                  t.Accumulate(xid, g * w);
                }
              });
}

Var Tape::Tanh(Var x) {
  Matrix y = x.value().array().tanh().matrix();
  const int xid = x.id_;
  const int yid = static_cast<int>(nodes_.size());
  return Push(std::move(y), RequiresGrad(x),
              [xid, yid](Tape& t, const Matrix& g) {
                const Matrix& yv = t.nodes_[yid].value;
                t.Accumulate(xid,
                             (g.array() * (1.0 - yv.array().square())).matrix());
              });
}

Var Tape::Relu(Var x) {
  Matrix y = x.value().cwiseMax(0.0);
  const int xid = x.id_;
  return Push(std::move(y), RequiresGrad(x), [xid](Tape& t, const Matrix& g) {
    const Matrix& xv = t.nodes_[xid].value;
    t.Accumulate(xid, (xv.array() > 0.0).select(g, 0.0).matrix());
  });
}

Var Tape::Exp(Var x) {
  Matrix y = x.value().array().exp().matrix();
  const int xid = x.id_;
  const int yid = static_cast<int>(nodes_.size());
  return Push(std::move(y), RequiresGrad(x),
              [xid, yid](Tape& t, const Matrix& g) {
                t.Accumulate(xid, g.cwiseProduct(t.nodes_[yid].value));
              });
}

Var Tape::Log(Var x) {
  Matrix y = x.value().array().log().matrix();
  const int xid = x.id_;
  return Push(std::move(y), RequiresGrad(x), [xid](Tape& t, const Matrix& g) {
    t.Accumulate(xid, g.cwiseQuotient(t.nodes_[xid].value));
  });
}

Var Tape::Square(Var x) {
  Matrix y = x.value().array().square().matrix();
  const int xid = x.id_;
  return Push(std::move(y), RequiresGrad(x), [xid](Tape& t, const Matrix& g) {
    t.Accumulate(xid, 2.0 * g.cwiseProduct(t.nodes_[xid].value));
  });
}

Var Tape::Softplus(Var x) {
  const Matrix& xv = x.value();
  Matrix y = (xv.array().max(0.0) + (-xv.array().abs()).exp().log1p()).matrix();
  const int xid = x.id_;
  return Push(std::move(y), RequiresGrad(x), [xid](Tape& t, const Matrix& g) {
    const Matrix& xv = t.nodes_[xid].value;
    Matrix sig = (1.0 / (1.0 + (-xv.array()).exp())).matrix();
    t.Accumulate(xid, g.cwiseProduct(sig));
  });
}

Var Tape::Clamp(Var x, double lo, double hi) {
  Matrix y = x.value().cwiseMax(lo).cwiseMin(hi);
  const int xid = x.id_;
  return Push(std::move(y), RequiresGrad(x),
              [xid, lo, hi](Tape& t, const Matrix& g) {
                const Matrix& xv = t.nodes_[xid].value;
                t.Accumulate(xid, ((xv.array() >= lo) && (xv.array() <= hi))
                                      .select(g, 0.0)
                                      .matrix());
              });
}

Var Tape::Add(Var a, Var b) {
  CheckSameShape(a, b, "Add");
  const int aid = a.id_;
  const int bid = b.id_;
  return Push(a.value() + b.value(), RequiresGrad(a) || RequiresGrad(b),
              [aid, bid](Tape& t, const Matrix& g) {
                t.Accumulate(aid, g);
                t.Accumulate(bid, g);
              });
}

Var Tape::Sub(Var a, Var b) {
  CheckSameShape(a, b, "Sub");
  const int aid = a.id_;
  const int bid = b.id_;
  return Push(a.value() - b.value(), RequiresGrad(a) || RequiresGrad(b),
              [aid, bid](Tape& t, const Matrix& g) {
                t.Accumulate(aid, g);
                t.Accumulate(bid, -g);
              });
}

Var Tape::Mul(Var a, Var b) {
  CheckSameShape(a, b, "Mul");
  const int aid = a.id_;
  const int bid = b.id_;
  return Push(a.value().cwiseProduct(b.value()),
              RequiresGrad(a) || RequiresGrad(b),
              [aid, bid](Tape& t, const Matrix& g) {
                if (t.nodes_[aid].requires_grad) {
                  t.Accumulate(aid, g.cwiseProduct(t.nodes_[bid].value));
                }
                if (t.nodes_[bid].requires_grad) {
                  t.Accumulate(bid, g.cwiseProduct(t.nodes_[aid].value));
                }
              });
}

Var Tape::Scale(Var x, double factor) {
  const int xid = x.id_;
  return Push(factor * x.value(), RequiresGrad(x),
              [xid, factor](Tape& t, const Matrix& g) {
                t.Accumulate(xid, factor * g);
              });
}

Var Tape::Shift(Var x, double offset) {
  const int xid = x.id_;
  return Push((x.value().array() + offset).matrix(), RequiresGrad(x),
              [xid](Tape& t, const Matrix& g) { t.Accumulate(xid, g); });
}

Var Tape::MulConst(Var x, const Matrix& factor) {
  if (factor.rows() != x.rows() || factor.cols() != x.cols()) {
    throw std::invalid_argument("MulConst: shape mismatch");
  }
  const int xid = x.id_;
  return Push(x.value().cwiseProduct(factor), RequiresGrad(x),
              [xid, factor](Tape& t, const Matrix& g) {
                t.Accumulate(xid, g.cwiseProduct(factor));
              });
}

Var Tape::Mean(Var x) {
  const Matrix& xv = x.value();
  if (xv.size() == 0) throw std::invalid_argument("Mean of an empty node");
  Matrix y(1, 1);
  y(0, 0) = xv.mean();
  const int xid = x.id_;
  const Eigen::Index r = xv.rows();
  const Eigen::Index c = xv.cols();
  return Push(std::move(y), RequiresGrad(x),
              [xid, r, c](Tape& t, const Matrix& g) {
                t.Accumulate(xid, Matrix::Constant(r, c, g(0, 0) / (r * c)));
              });
}

Var Tape::SumCols(Var x) {
  Matrix y = x.value().rowwise().sum();
  const int xid = x.id_;
  const Eigen::Index c = x.cols();
  return Push(std::move(y), RequiresGrad(x),
              [xid, c](Tape& t, const Matrix& g) {
                t.Accumulate(xid, g.replicate(1, c));
              });
}

Var Tape::LogMeanExp(Var x) {
  const Matrix& xv = x.value();
  if (xv.size() == 0) throw std::invalid_argument("LogMeanExp of empty node");
  const double m = xv.maxCoeff();
  Matrix shifted = (xv.array() - m).exp().matrix();
  const double sum = shifted.sum();
  Matrix y(1, 1);
  y(0, 0) = m + std::log(sum / static_cast<double>(xv.size()));
  const int xid = x.id_;
  Matrix weights = shifted / sum;
  return Push(std::move(y), RequiresGrad(x),
              [xid, weights](Tape& t, const Matrix& g) {
                t.Accumulate(xid, g(0, 0) * weights);
              });
}

Var Tape::ConcatCols(Var a, Var b) {
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("ConcatCols: row count mismatch");
  }
  Matrix y(a.rows(), a.cols() + b.cols());
  y << a.value(), b.value();
  const int aid = a.id_;
  const int bid = b.id_;
  const Eigen::Index ac = a.cols();
  const Eigen::Index bc = b.cols();
  return Push(std::move(y), RequiresGrad(a) || RequiresGrad(b),
              [aid, bid, ac, bc](Tape& t, const Matrix& g) {
                if (t.nodes_[aid].requires_grad) {
                  t.Accumulate(aid, g.leftCols(ac));
                }
                if (t.nodes_[bid].requires_grad) {
                  t.Accumulate(bid, g.rightCols(bc));
                }
              });
}

Var Tape::SliceCols(Var x, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > x.cols()) {
    throw std::invalid_argument("SliceCols: range out of bounds");
  }
  Matrix y = x.value().middleCols(start, count);
  const int xid = x.id_;
  const Eigen::Index r = x.rows();
  const Eigen::Index c = x.cols();
  return Push(std::move(y), RequiresGrad(x),
              [xid, start, count, r, c](Tape& t, const Matrix& g) {
                Matrix full = Matrix::Zero(r, c);
                full.middleCols(start, count) = g;
                t.Accumulate(xid, full);
              });
}

void Tape::Backward(Var loss) {
  if (loss.tape_ != this) {
    throw std::invalid_argument("Backward: loss belongs to another tape");
  }
  if (nodes_[loss.id_].value.size() != 1) {
    throw std::invalid_argument("Backward requires a scalar (1x1) loss");
  }
  for (auto& node : nodes_) node.grad.resize(0, 0);
  if (!nodes_[loss.id_].requires_grad) return;
  nodes_[loss.id_].grad = Matrix::Ones(1, 1);
  for (int id = loss.id_; id >= 0; --id) {
    Node& node = nodes_[id];
    if (!node.requires_grad || node.grad.size() == 0 || !node.backward) {
      continue;
    }
    // Callbacks only accumulate into earlier nodes, so `node` stays valid.
    node.backward(*this, node.grad);
  }
}

Var operator+(Var a, Var b) { return a.tape()->Add(a, b); }
Var operator-(Var a, Var b) { return a.tape()->Sub(a, b); }
Var operator*(Var a, Var b) { return a.tape()->Mul(a, b); }
Var operator*(double s, Var x) { return x.tape()->Scale(x, s); }
Var operator*(Var x, double s) { return x.tape()->Scale(x, s); }
Var operator-(Var x) { return x.tape()->Scale(x, -1.0); }

}  // namespace irgail
