#include <doctest.h>

#include <cmath>

#include "pgcgan/nn.hpp"
#include "support.hpp"

using namespace pgcgan;

namespace {

Tensor3 fill_tensor(int b, int c, int t, std::uint64_t seed) {
  Rng rng(seed);
  Tensor3 out(b, c, t);
  for (double& x : out.v) x = rng.normal();
  return out;
}

// Direct definition of the padded strided correlation, kept separate from the
// im2col path under test.
double conv_ref(const nn::Conv1d& conv, const Tensor3& x, int b, int oc, int ot) {
  double acc = conv.bias(oc);
  for (int ic = 0; ic < conv.in_channels; ++ic)
    for (int k = 0; k < conv.kernel; ++k) {
      const int it = ot * conv.stride - conv.padding() + k;
      if (it >= 0 && it < x.time) acc += conv.weight(oc, ic * conv.kernel + k) * x.at(b, ic, it);
    }
  return acc;
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("conv1d hand-computed single channel") {
  Rng rng(1);
  nn::Conv1d conv = nn::make_conv1d(1, 1, 3, 1, rng);
  conv.weight << 1.0, 2.0, -1.0;
  conv.bias << 0.5;

  Tensor3 x(1, 1, 4);
  for (int t = 0; t < 4; ++t) x.at(0, 0, t) = t + 1.0;  // 1 2 3 4

  Tensor3 y = conv1d_forward(conv, x, false);
  y.require_shape(1, 1, 4, "conv out");
  // zero padded: y[t] = 1*x[t-1] + 2*x[t] - 1*x[t+1] + 0.5
  CHECK(y.at(0, 0, 0) == 0.0 + 2.0 - 2.0 + 0.5);
  CHECK(y.at(0, 0, 1) == 1.0 + 4.0 - 3.0 + 0.5);
  CHECK(y.at(0, 0, 2) == 2.0 + 6.0 - 4.0 + 0.5);
  CHECK(y.at(0, 0, 3) == 3.0 + 8.0 - 0.0 + 0.5);
}

TEST_CASE("strided conv1d subsamples the expected positions") {
  Rng rng(2);
  nn::Conv1d conv = nn::make_conv1d(1, 1, 3, 2, rng);
  conv.weight << 1.0, 1.0, 1.0;
  conv.bias << 0.0;
  Tensor3 x(1, 1, 5);
  for (int t = 0; t < 5; ++t) x.at(0, 0, t) = std::pow(10.0, t);  // 1 10 100 ...

  CHECK(conv.out_time(5) == 3);
  Tensor3 y = conv1d_forward(conv, x, false);
  CHECK(y.at(0, 0, 0) == 11.0);      // pad + 1 + 10
  CHECK(y.at(0, 0, 1) == 1110.0);    // 10 + 100 + 1000
  CHECK(y.at(0, 0, 2) == 11000.0);  // 1000 + 10000 + pad
}

TEST_CASE("conv1d agrees with the direct definition on random shapes") {
  Rng rng(3);
  for (int trial = 0; trial < 6; ++trial) {
    const int ic = 1 + static_cast<int>(rng.below(3));
    const int oc = 1 + static_cast<int>(rng.below(3));
    const int k = 1 + 2 * static_cast<int>(rng.below(3));
    const int stride = 1 + static_cast<int>(rng.below(2));
    nn::Conv1d conv = nn::make_conv1d(ic, oc, k, stride, rng);
    Tensor3 x = fill_tensor(2, ic, 7, 100 + trial);
    Tensor3 y = conv1d_forward(conv, x, false);
    for (int b = 0; b < 2; ++b)
      for (int j = 0; j < oc; ++j)
        for (int t = 0; t < y.time; ++t)
          CHECK(y.at(b, j, t) == doctest::Approx(conv_ref(conv, x, b, j, t)).epsilon(1e-12));
  }
}

TEST_CASE("relu clamps negatives in forward and gates the backward") {
  Rng rng(4);
  nn::Conv1d conv = nn::make_conv1d(2, 3, 3, 1, rng);
  Tensor3 x = fill_tensor(2, 2, 6, 5);
  Tensor3 y = conv1d_forward(conv, x, true);
  int clamped = 0;
  for (double v : y.v) {
    CHECK(v >= 0.0);
    clamped += v == 0.0 ? 1 : 0;
  }
  CHECK(clamped > 0);  // some units actually went negative pre-clamp

  Tensor3 dy(2, 3, 6);
  for (double& g : dy.v) g = 1.0;
  Eigen::MatrixXd dweight;
  Eigen::VectorXd dbias;
  Tensor3 dx = conv1d_backward(conv, x, y, dy, true, &dweight, &dbias, true);
  // the bias gradient counts exactly the active units per output channel
  for (int oc = 0; oc < 3; ++oc) {
    int active = 0;
    for (int b = 0; b < 2; ++b)
      for (int t = 0; t < 6; ++t) active += y.at(b, oc, t) > 0.0 ? 1 : 0;
    CHECK(dbias(oc) == static_cast<double>(active));
  }
  CHECK(dx.all_finite());
}

TEST_CASE("conv1d gradients match finite differences") {
  Rng rng(6);
  nn::Conv1d conv = nn::make_conv1d(2, 3, 3, 2, rng);
  Tensor3 x = fill_tensor(2, 2, 8, 7);
  Tensor3 w = fill_tensor(2, 3, conv.out_time(8), 8);  // loss weights

  auto loss = [&](bool relu) {
    Tensor3 y = conv1d_forward(conv, x, relu);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.v.size(); ++i) acc += y.v[i] * w.v[i];
    return acc;
  };

  for (bool relu : {false, true}) {
    Tensor3 y = conv1d_forward(conv, x, relu);
    Eigen::MatrixXd dweight;
    Eigen::VectorXd dbias;
    Tensor3 dx = conv1d_backward(conv, x, y, w, relu, &dweight, &dbias, true);

    const double h = 1e-6;
    Rng pick(9);
    for (int rep = 0; rep < 12; ++rep) {
      const long idx = static_cast<long>(pick.below(static_cast<std::uint64_t>(conv.weight.size())));
      const double orig = conv.weight.data()[idx];
      conv.weight.data()[idx] = orig + h;
      const double up = loss(relu);
      conv.weight.data()[idx] = orig - h;
      const double down = loss(relu);
      conv.weight.data()[idx] = orig;
      CHECK(dweight.data()[idx] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-4));
    }
    for (int oc = 0; oc < 3; ++oc) {
      const double orig = conv.bias(oc);
      conv.bias(oc) = orig + h;
      const double up = loss(relu);
      conv.bias(oc) = orig - h;
      const double down = loss(relu);
      conv.bias(oc) = orig;
      CHECK(dbias(oc) == doctest::Approx((up - down) / (2 * h)).epsilon(1e-4));
    }
    for (int rep = 0; rep < 12; ++rep) {
      const std::size_t idx = pick.below(x.v.size());
      const double orig = x.v[idx];
      x.v[idx] = orig + h;
      const double up = loss(relu);
      x.v[idx] = orig - h;
      const double down = loss(relu);
      x.v[idx] = orig;
      CHECK(dx.v[idx] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-4));
    }
  }
}

TEST_CASE("conv construction rejects bad hyperparameters") {
  Rng rng(10);
  CHECK_THROWS_AS(nn::make_conv1d(1, 1, 2, 1, rng), ValidationError);
  CHECK_THROWS_AS(nn::make_conv1d(0, 1, 3, 1, rng), ValidationError);
  CHECK_THROWS_AS(nn::make_conv1d(1, 1, 3, 0, rng), ValidationError);
}

TEST_CASE("adam reproduces a step-by-step reference") {
  nn::Adam adam(0.1, 0.9, 0.99);
  Eigen::VectorXd param(2);
  param << 1.0, -2.0;
  auto ref_param = param;
  Eigen::ArrayXd m = Eigen::ArrayXd::Zero(2), v = Eigen::ArrayXd::Zero(2);

  nn::ParamRef ref = nn::param_ref("p", param);
  for (int t = 1; t <= 3; ++t) {
    Eigen::ArrayXd grad(2);
    grad << 0.5 * t, -1.0;
    adam.tick();
    adam.update(ref, grad);

    m = 0.9 * m + 0.1 * grad;
    v = 0.99 * v + 0.01 * grad.square();
    const double bc1 = 1.0 - std::pow(0.9, t);
    const double bc2 = 1.0 - std::pow(0.99, t);
    ref_param.array() -= 0.1 * (m / bc1) / ((v / bc2).sqrt() + 1e-8);
    CHECK((param - ref_param).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK(adam.step() == 3);
}

TEST_CASE("adam rejects gradients of the wrong size") {
  nn::Adam adam(0.1, 0.9, 0.99);
  Eigen::VectorXd param(3);
  param.setZero();
  nn::ParamRef ref = nn::param_ref("p", param);
  adam.tick();
  CHECK_THROWS_AS(adam.update(ref, Eigen::ArrayXd::Zero(2)), ContractError);
}

TEST_CASE("gradmap accumulates by name") {
  nn::GradMap grads;
  Eigen::VectorXd g(2);
  g << 1.0, 2.0;
  grads.add("w", g);
  grads.add("w", g);
  CHECK(grads.slot("w", 2)(0) == 2.0);
  CHECK(grads.slot("w", 2)(1) == 4.0);
  CHECK(grads.slot("fresh", 3).size() == 3);
  CHECK(grads.slot("fresh", 3).abs().maxCoeff() == 0.0);
}

}  // TEST_SUITE
