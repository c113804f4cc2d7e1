#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

namespace trajprop::nn {

/// Rows are batch entries, columns are features.
using Matrix = Eigen::MatrixXd;

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

struct LayerSpec {
  std::string kind;  // linear | prelu | lstm-cell
  std::string name;
  int in_dim = 0;
  int out_dim = 0;
  std::string init;
};

/// Owns parameters with stable addresses, in creation order.
class ParamSet {
 public:
  Param& add(std::string name, Eigen::Index rows, Eigen::Index cols);
  void add_spec(LayerSpec spec) { specs_.push_back(std::move(spec)); }

  std::vector<Param*> all();
  std::vector<const Param*> all() const;
  const std::vector<LayerSpec>& specs() const { return specs_; }
  std::size_t count() const;
  void zero_grad();

  /// Layer specs, shapes and flat weight arrays.
  nlohmann::json to_json() const;
  /// Load weights into an identically-shaped set; throws on any mismatch.
  void load_json(const nlohmann::json& j);

 private:
  std::deque<Param> params_;
  std::vector<LayerSpec> specs_;
};

class Tape;

/// Handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

/// Reverse-mode tape for one training step. Nodes are appended during the
/// forward pass; backward() walks them in reverse and accumulates parameter
/// gradients into Param::grad.
class Tape {
 public:
  using Backward = std::function<void(Tape&, int)>;

  Var constant(Matrix value);
  Var param(Param& p);

  Var push(Matrix value, Backward backward);

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  Matrix& grad(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }
  const Matrix& value(Var v) const { return value(v.id); }
  const Matrix& grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].grad; }

  /// Seeds d(loss)/d(loss) = 1; `loss` must be 1x1.
  void backward(Var loss);
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Param* param = nullptr;
    Backward backward;
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Param*, int> param_nodes_;
};

// Differentiable operations. Shapes follow Eigen conventions.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// a (B x n) + row vector b (1 x n) broadcast over rows.
Var add_row(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var sigmoid(Var a);
Var tanh(Var a);
Var exp(Var a);
Var square(Var a);
/// Parametric ReLU with a single 1x1 slope.
Var prelu(Var a, Var slope);
Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
/// Sum of all entries (1x1).
Var sum(Var a);
/// Mean of all entries (1x1).
Var mean(Var a);
/// a (B x n) times constant matrix m (n x p).
Var matmul_const(Var a, const Matrix& m);

}  // namespace trajprop::nn
