#include <gtest/gtest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "gradient_suite.hpp"
#include "trajprop/error.hpp"
#include "trajprop/nn/optim.hpp"

using namespace trajprop;
using nn::Matrix;

TEST(GradCheck, EveryLayerLossAndOp) {
  const auto& names = gradsuite::case_names();
  for (std::size_t kind = 0; kind < names.size(); ++kind) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto r = gradsuite::run_case(kind, derive_seed(99, names[kind], s));
      EXPECT_LT(r.rel_error, 1e-4) << r.name << " seed " << s;
    }
  }
}

TEST(GradCheck, DetectsAWrongGradient) {
  nn::ParamSet ps;
  auto& p = ps.add("x", 2, 2);
  p.value << 1, 2, 3, 4;
  // forward is sum(x^2) but backward claims d/dx = x
  auto build = [&](nn::Tape& t) {
    const nn::Var x = t.param(p);
    Matrix out(1, 1);
    out(0, 0) = x.value().squaredNorm();
    const int ix = x.id;
    return t.push(out, [ix](nn::Tape& tp, int self) { tp.grad(ix) += tp.grad(self)(0, 0) * tp.value(ix); });
  };
  EXPECT_GT(nn::check_gradients(build, ps.all()).max_rel_error, 0.1);
}

TEST(Losses, KVarietyOfOneIsMse) {
  Rng rng(1);
  const Matrix a = gradsuite::uniform(4, 6, rng), y = gradsuite::uniform(4, 6, rng);
  nn::Tape t;
  const double kv = nn::loss_k_variety({t.constant(a)}, t.constant(y)).value()(0, 0);
  const double mse = nn::loss_mse(t.constant(a), t.constant(y)).value()(0, 0);
  EXPECT_NEAR(kv, mse, 1e-15);
}

TEST(Losses, KVarietyGradientFlowsOnlyToArgmin) {
  nn::ParamSet ps;
  auto& near = ps.add("near", 1, 2);
  auto& far = ps.add("far", 1, 2);
  near.value << 0.1, 0.0;
  far.value << 5.0, 5.0;
  nn::Tape t;
  const Matrix y = Matrix::Zero(1, 2);
  t.backward(nn::loss_k_variety({t.param(near), t.param(far)}, t.constant(y)));
  EXPECT_GT(near.grad.norm(), 0.0);
  EXPECT_EQ(far.grad.norm(), 0.0);
}

TEST(Losses, KlIsNonNegativeAndZeroAtPrior) {
  Rng rng(2);
  nn::Tape t;
  EXPECT_NEAR(nn::loss_kl_gaussian(t.constant(Matrix::Zero(3, 4)), t.constant(Matrix::Zero(3, 4))).value()(0, 0), 0.0,
              1e-15);
  for (int i = 0; i < 10; ++i) {
    EXPECT_GE(nn::loss_kl_gaussian(t.constant(gradsuite::uniform(3, 4, rng, -2, 2)),
                                   t.constant(gradsuite::uniform(3, 4, rng, -2, 2)))
                  .value()(0, 0),
              0.0);
  }
}

TEST(Losses, BceKnownValue) {
  nn::Tape t;
  // sigmoid(0) = 0.5 -> -log(0.5)
  EXPECT_NEAR(nn::loss_bce(t.constant(Matrix::Zero(2, 1)), 1.0).value()(0, 0), std::log(2.0), 1e-15);
}

TEST(Adam, MinimisesQuadratic) {
  nn::ParamSet ps;
  auto& p = ps.add("x", 1, 3);
  p.value << 3, -2, 1;
  nn::Adam opt(ps.all(), {.lr = 0.1});
  for (int i = 0; i < 500; ++i) {
    nn::Tape t;
    t.backward(nn::sum(nn::square(t.param(p))));
    opt.step();
  }
  EXPECT_LT(p.value.norm(), 1e-2);
  EXPECT_EQ(opt.steps(), 500);
}

TEST(Adam, NonFiniteGradientIsDivergence) {
  nn::ParamSet ps;
  auto& p = ps.add("x", 1, 1);
  p.grad(0, 0) = std::nan("");
  nn::Adam opt(ps.all());
  try {
    opt.step();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDivergence);
  }
}

TEST(Tape, BackwardNeedsScalar) {
  nn::Tape t;
  EXPECT_THROW(t.backward(t.constant(Matrix::Zero(2, 2))), Error);
}

TEST(ParamSetJson, RoundTripAndShapeCheck) {
  Rng rng(3);
  nn::ParamSet a, b, c;
  nn::Dense(a, "d", 3, 4, rng);
  nn::Dense(b, "d", 3, 4, rng);
  nn::Dense(c, "d", 3, 5, rng);
  b.load_json(a.to_json());
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  try {
    c.load_json(a.to_json());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}
