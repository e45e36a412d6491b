#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "support.hpp"
#include "tnet/error.hpp"

using namespace tnet;
using tnet::support::check_builder;
using tnet::support::project;
using tnet::support::random_tensor;

TEST(Tensor, RejectsZeroDimensionsAndSizeMismatch) {
  EXPECT_THROW(Tensor({0, 3}), DimensionError);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  Tensor t = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_DOUBLE_EQ(t.at(1, 2), 6.0);
  EXPECT_EQ(t.row(1)[0], 4.0);
}

TEST(Primitives, DocumentedValues) {
  ag::Graph g;
  auto t = ag::tanh(g.constant(Tensor::vector({0, 0, 0})));
  EXPECT_EQ(t.value(), Tensor::vector({0, 0, 0}));
  auto s = ag::softmax(g.constant(Tensor::vector({0, 0})));
  EXPECT_DOUBLE_EQ(s.value()[0], 0.5);
  EXPECT_DOUBLE_EQ(s.value()[1], 0.5);
  auto sig = ag::sigmoid(g.constant(Tensor::scalar(0.0)));
  EXPECT_DOUBLE_EQ(sig.value()[0], 0.5);
}

TEST(Primitives, ShapeMismatchNamesThePrimitive) {
  ag::Graph g;
  auto a = g.constant(Tensor({2, 3}));
  auto b = g.constant(Tensor({2, 3}));
  try {
    ag::matmul(a, b);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("matmul"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("[2x3]"), std::string::npos);
  }
  EXPECT_THROW(ag::add(a, g.constant(Tensor({3, 2}))), DimensionError);
}

TEST(Backward, SquareSum) {
  ag::Graph g;
  Tensor w = Tensor::vector({1, 2});
  auto wv = g.parameter("w", w);
  g.backward(ag::sum(ag::mul(wv, wv)));
  EXPECT_EQ(g.grad(wv), Tensor::vector({2, 4}));
  EXPECT_EQ(g.parameter_gradients().at("w"), Tensor::vector({2, 4}));
}

TEST(Backward, SigmoidAtZero) {
  ag::Graph g;
  Tensor x = Tensor::scalar(0.0);
  auto xv = g.parameter("x", x);
  g.backward(ag::sigmoid(xv));
  EXPECT_DOUBLE_EQ(g.grad(xv)[0], 0.25);
}

TEST(Backward, NonScalarIsAContractError) {
  ag::Graph g;
  Tensor x = Tensor::vector({1, 2});
  auto xv = g.parameter("x", x);
  EXPECT_THROW(g.backward(ag::tanh(xv)), ContractError);
}

TEST(Backward, RepeatedCallsGiveTheSameGradient) {
  ag::Graph g;
  Tensor x = Tensor::vector({0.3, -0.7});
  auto xv = g.parameter("x", x);
  auto loss = ag::sum(ag::tanh(ag::mul(xv, xv)));
  g.backward(loss);
  const auto first = g.grad(xv);
  g.backward(loss);
  EXPECT_EQ(g.grad(xv), first);
}

TEST(Backward, DiamondGraphSumsPathGradients) {
  Tensor x = Tensor::vector({0.4, -1.1, 0.8});
  ag::Graph g;
  auto xv = g.parameter("x", x);
  auto shared = ag::mul(xv, xv);
  auto loss = ag::sum(ag::add(ag::sigmoid(shared), ag::tanh(shared)));
  g.backward(loss);
  for (std::size_t i = 0; i < 3; ++i) {
    const double y = x[i] * x[i];
    const double s = 1.0 / (1.0 + std::exp(-y));
    const double expected = 2.0 * x[i] * (s * (1.0 - s) + 1.0 - std::tanh(y) * std::tanh(y));
    EXPECT_NEAR(g.grad(xv)[i], expected, 1e-14);
  }
  auto report = check_builder(
      [](const ParamVars& p) {
        auto sq = ag::mul(p.at("x"), p.at("x"));
        return ag::sum(ag::add(ag::sigmoid(sq), ag::tanh(sq)));
      },
      {{"x", x}});
  EXPECT_TRUE(report.passed) << report.max_relative_error;
}

TEST(Backward, ReluGradientAtZeroIsZero) {
  ag::Graph g;
  Tensor x = Tensor::vector({0.0, 1.0, -1.0});
  auto xv = g.parameter("x", x);
  g.backward(ag::sum(ag::relu(xv)));
  EXPECT_EQ(g.grad(xv), Tensor::vector({0.0, 1.0, 0.0}));
}

TEST(Backward, GatherRowsAccumulatesRepeatedIds) {
  ag::Graph g;
  Tensor table = Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6});
  auto tv = g.parameter("table", table);
  const std::size_t ids[] = {2, 0, 2};
  auto rows = ag::gather_rows(tv, ids);
  EXPECT_EQ(rows.value(), Tensor::matrix(3, 2, {5, 6, 1, 2, 5, 6}));
  g.backward(ag::sum(rows));
  EXPECT_EQ(g.grad(tv), Tensor::matrix(3, 2, {1, 1, 0, 0, 2, 2}));
}

TEST(Backward, InjectedFaultScalesTheGradient) {
  Tensor x = Tensor::vector({0.5});
  ag::Graph clean;
  auto a = clean.parameter("x", x);
  clean.backward(ag::sum(ag::tanh(a)));
  ag::Graph faulty;
  faulty.inject_fault(ag::Op::Tanh, 2.0);
  auto b = faulty.parameter("x", x);
  faulty.backward(ag::sum(ag::tanh(b)));
  EXPECT_DOUBLE_EQ(faulty.grad(b)[0], 2.0 * clean.grad(a)[0]);
}

TEST(Softmax, RowsSumToOneAndArePositive) {
  std::mt19937_64 rng(5);
  for (int draw = 0; draw < 200; ++draw) {
    ag::Graph g;
    auto s = ag::softmax(g.constant(random_tensor({4, 7}, rng, -50.0, 50.0)));
    for (std::size_t r = 0; r < 4; ++r) {
      double total = 0.0;
      for (double v : s.value().row(r)) {
        EXPECT_GT(v, 0.0);
        total += v;
      }
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
  ag::Graph g;
  auto extreme = ag::softmax(g.constant(Tensor::vector({1000.0, 0.0, -1000.0})));
  EXPECT_TRUE(extreme.value().all_finite());
}

TEST(RowMax, TiesPickTheLowestColumn) {
  ag::Graph g;
  auto r = ag::row_max(g.constant(Tensor::matrix(2, 3, {0, 3, 1, 2, 2, 2})));
  EXPECT_EQ(r.max.value(), Tensor::vector({3, 2}));
  EXPECT_EQ(r.argmax, (std::vector<std::size_t>{1, 0}));
}

TEST(CrossEntropy, MatchesLogSoftmax) {
  ag::Graph g;
  auto ce = ag::cross_entropy(g.constant(Tensor::vector({0, 0, 0})), 1);
  EXPECT_NEAR(ce.value()[0], std::log(3.0), 1e-15);
  auto big = ag::cross_entropy(g.constant(Tensor::vector({800, 0, 0})), 0);
  EXPECT_NEAR(big.value()[0], 0.0, 1e-15);
}

TEST(Op, NamesRoundTrip) {
  for (int i = 0; i <= static_cast<int>(ag::Op::CrossEntropy); ++i) {
    const auto op = static_cast<ag::Op>(i);
    EXPECT_EQ(ag::op_from_name(ag::op_name(op)), op);
  }
  EXPECT_FALSE(ag::op_from_name("nope").has_value());
}

namespace {

struct PrimitiveCase {
  const char* name;
  std::vector<Shape> shapes;
  std::function<ag::Var(const std::vector<ag::Var>&)> apply;
};

std::vector<PrimitiveCase> primitive_cases() {
  using V = std::vector<ag::Var>;
  const std::size_t ids[] = {1, 0, 1, 2};
  const double weights[] = {0.5, -1.5, 2.0};
  return {
      {"add", {{3, 2}, {3, 2}}, [](const V& x) { return ag::add(x[0], x[1]); }},
      {"add_bias", {{3, 2}, {2}}, [](const V& x) { return ag::add_bias(x[0], x[1]); }},
      {"sub", {{3, 2}, {3, 2}}, [](const V& x) { return ag::sub(x[0], x[1]); }},
      {"mul", {{3, 2}, {3, 2}}, [](const V& x) { return ag::mul(x[0], x[1]); }},
      {"scale", {{4}}, [](const V& x) { return ag::scale(x[0], -2.5); }},
      {"one_minus", {{4}}, [](const V& x) { return ag::one_minus(x[0]); }},
      {"matmul", {{3, 4}, {4, 2}}, [](const V& x) { return ag::matmul(x[0], x[1]); }},
      {"linear", {{3, 4}, {2, 4}, {2}}, [](const V& x) { return ag::linear(x[0], x[1], x[2]); }},
      {"linear_vector", {{4}, {2, 4}}, [](const V& x) { return ag::linear(x[0], x[1]); }},
      {"transpose", {{3, 2}}, [](const V& x) { return ag::transpose(x[0]); }},
      {"concat_cols", {{3, 2}, {3, 1}}, [](const V& x) { return ag::concat_cols(x[0], x[1]); }},
      {"slice_cols", {{3, 5}}, [](const V& x) { return ag::slice_cols(x[0], 1, 3); }},
      {"row", {{3, 2}}, [](const V& x) { return ag::row(x[0], 2); }},
      {"stack_rows", {{2}, {2}}, [](const V& x) { return ag::stack_rows(x); }},
      {"repeat_row", {{3}}, [](const V& x) { return ag::repeat_row(x[0], 4); }},
      {"mean_rows", {{3, 2}}, [](const V& x) { return ag::mean_rows(x[0]); }},
      {"gather_rows", {{3, 2}}, [ids](const V& x) { return ag::gather_rows(x[0], ids); }},
      {"windows", {{5, 2}}, [](const V& x) { return ag::windows(x[0], 3); }},
      {"sigmoid", {{3, 2}}, [](const V& x) { return ag::sigmoid(x[0]); }},
      {"tanh", {{3, 2}}, [](const V& x) { return ag::tanh(x[0]); }},
      {"relu", {{3, 2}}, [](const V& x) { return ag::relu(x[0]); }},
      {"softmax", {{3, 4}}, [](const V& x) { return ag::softmax(x[0]); }},
      {"row_max", {{3, 4}}, [](const V& x) { return ag::row_max(x[0]).max; }},
      {"scale_rows", {{3, 2}}, [weights](const V& x) { return ag::scale_rows(x[0], weights); }},
      {"add_n", {{2, 2}, {2, 2}, {2, 2}}, [](const V& x) { return ag::add_n(x); }},
      {"cross_entropy", {{3}}, [](const V& x) { return ag::cross_entropy(x[0], 2); }},
  };
}

}  // namespace

TEST(Primitives, JacobianMatchesFiniteDifferencesOverSeeds) {
  for (const auto& c : primitive_cases()) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(seed);
      ParamStore params;
      for (std::size_t i = 0; i < c.shapes.size(); ++i) {
        params.emplace("in" + std::to_string(i), random_tensor(c.shapes[i], rng, -2.0, 2.0));
      }
      auto report = check_builder(
          [&](const ParamVars& p) {
            std::vector<ag::Var> inputs;
            for (const auto& [name, var] : p) inputs.push_back(var);
            return project(c.apply(inputs), seed);
          },
          params);
      ASSERT_TRUE(report.passed) << c.name << " seed " << seed << " error " << report.max_relative_error;
    }
  }
}
