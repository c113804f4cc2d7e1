#pragma once

#include <string>
#include <utility>

#include "trajprop/nn/tape.hpp"
#include "trajprop/rng.hpp"

namespace trajprop::nn {

/// Affine map x W + b. Weights uniform in +-1/sqrt(in), bias zero.
class Linear {
 public:
  Linear() = default;
  Linear(ParamSet& ps, const std::string& name, int in_dim, int out_dim, Rng& rng);

  Var operator()(Tape& t, Var x) const;
  int in_dim() const { return in_; }
  int out_dim() const { return out_; }

 private:
  Param* w_ = nullptr;
  Param* b_ = nullptr;
  int in_ = 0;
  int out_ = 0;
  std::string name_;
};

/// PReLU with one learnable slope, initialised to 0.25.
class PReLU {
 public:
  PReLU() = default;
  PReLU(ParamSet& ps, const std::string& name);

  Var operator()(Tape& t, Var x) const;

 private:
  Param* slope_ = nullptr;
};

struct LstmState {
  Var h;
  Var c;
};

/// Standard LSTM cell; gate columns ordered input, forget, cell, output.
/// Forget-gate bias starts at 1.
class LstmCell {
 public:
  LstmCell() = default;
  LstmCell(ParamSet& ps, const std::string& name, int in_dim, int hidden, Rng& rng);

  LstmState step(Tape& t, Var x, const LstmState& s) const;
  LstmState zero_state(Tape& t, Eigen::Index batch) const;
  int hidden() const { return hidden_; }
  int in_dim() const { return in_; }

 private:
  Param* wx_ = nullptr;
  Param* wh_ = nullptr;
  Param* b_ = nullptr;
  int in_ = 0;
  int hidden_ = 0;
  std::string name_;
};

/// Linear followed by PReLU.
class Dense {
 public:
  Dense() = default;
  Dense(ParamSet& ps, const std::string& name, int in_dim, int out_dim, Rng& rng)
      : lin_(ps, name, in_dim, out_dim, rng), act_(ps, name + ".act") {}

  Var operator()(Tape& t, Var x) const { return act_(t, lin_(t, x)); }
  int out_dim() const { return lin_.out_dim(); }

 private:
  Linear lin_;
  PReLU act_;
};

}  // namespace trajprop::nn
