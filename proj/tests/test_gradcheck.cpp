#include <gtest/gtest.h>

#include <cmath>

#include "tnet/diagnostics.hpp"
#include "tnet/error.hpp"
#include "tnet/gradcheck.hpp"

using namespace tnet;

TEST(FiniteDifference, QuadraticIsExact) {
  ParamStore params{{"x", Tensor::scalar(3.0)}};
  auto grad = ag::finite_difference_gradient([&] { return params.at("x")[0] * params.at("x")[0]; }, params);
  EXPECT_NEAR(grad.at("x")[0], 6.0, 1e-8);
  EXPECT_EQ(params.at("x")[0], 3.0);
}

TEST(FiniteDifference, TanhAtOne) {
  ParamStore params{{"x", Tensor::scalar(1.0)}};
  auto grad = ag::finite_difference_gradient([&] { return std::tanh(params.at("x")[0]); }, params);
  // 1 - tanh(1)^2, tests/oracles/oracles.py
  EXPECT_NEAR(grad.at("x")[0], 0.41997434161402614, 1e-8);
}

TEST(FiniteDifference, NonDeterministicLossIsRejected) {
  ParamStore params{{"x", Tensor::scalar(1.0)}};
  int calls = 0;
  EXPECT_THROW(ag::finite_difference_gradient([&] { return static_cast<double>(++calls); }, params),
               OracleInvalidError);
}

TEST(RelativeError, UsesTheLargerMagnitudeAndAFloor) {
  EXPECT_NEAR(ag::relative_error(1.0, 1.1), 0.1 / 1.1, 1e-15);
  EXPECT_DOUBLE_EQ(ag::relative_error(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(ag::relative_error(0.0, 1e-9), 1e-3);
}

TEST(ModelGradCheck, ListsEveryParameterAndPasses) {
  auto setup = diag::tiny_setup(Variant::TNetAS, {}, 3);
  auto report = diag::model_gradcheck(setup.model, setup.instances);
  EXPECT_TRUE(report.passed) << report.max_relative_error;
  ASSERT_EQ(report.entries.size(), setup.model.params().size());
  auto it = setup.model.params().begin();
  for (const auto& entry : report.entries) {
    EXPECT_EQ(entry.name, (it++)->first);
  }
}

TEST(ModelGradCheck, CorruptedDerivativeFails) {
  auto setup = diag::tiny_setup(Variant::TNetLF, {}, 3);
  auto report = diag::model_gradcheck(setup.model, setup.instances, 1e-4, 1e-5, diag::Fault{ag::Op::Tanh, 1.5});
  EXPECT_FALSE(report.passed);
}
