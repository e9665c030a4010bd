#include "pgcgan/nn.hpp"

#include <cmath>

namespace pgcgan::nn {

Conv1d make_conv1d(int in_channels, int out_channels, int kernel, int stride, Rng& rng) {
  if (kernel < 1 || kernel % 2 == 0)
    throw ValidationError("conv kernel size must be odd, got " + std::to_string(kernel));
  if (in_channels < 1 || out_channels < 1 || stride < 1)
    throw ValidationError("conv channel counts and stride must be positive");
  Conv1d conv;
  conv.in_channels = in_channels;
  conv.out_channels = out_channels;
  conv.kernel = kernel;
  conv.stride = stride;
  const int fan_in = in_channels * kernel;
  const double scale = std::sqrt(2.0 / fan_in);
  conv.weight.resize(out_channels, fan_in);
  for (int r = 0; r < out_channels; ++r)
    for (int c = 0; c < fan_in; ++c) conv.weight(r, c) = scale * rng.normal();
  conv.bias = Eigen::VectorXd::Zero(out_channels);
  return conv;
}

Linear make_linear(int in, int out, Rng& rng) {
  Linear fc;
  const double scale = std::sqrt(2.0 / in);
  fc.weight.resize(out, in);
  for (int r = 0; r < out; ++r)
    for (int c = 0; c < in; ++c) fc.weight(r, c) = scale * rng.normal();
  fc.bias = Eigen::VectorXd::Zero(out);
  return fc;
}

namespace {

// col is (in_channels * kernel) x out_time for one sample.
void im2col(const Conv1d& conv, const Tensor3& x, int b, Eigen::MatrixXd& col) {
  const int T = x.time;
  const int To = conv.out_time(T);
  const int pad = conv.padding();
  col.setZero(conv.in_channels * conv.kernel, To);
  for (int ic = 0; ic < conv.in_channels; ++ic) {
    for (int kk = 0; kk < conv.kernel; ++kk) {
      const int row = ic * conv.kernel + kk;
      for (int ot = 0; ot < To; ++ot) {
        const int it = ot * conv.stride - pad + kk;
        if (it >= 0 && it < T) col(row, ot) = x.at(b, ic, it);
      }
    }
  }
}

void col2im_add(const Conv1d& conv, const Eigen::MatrixXd& dcol, int b, Tensor3& dx) {
  const int T = dx.time;
  const int To = static_cast<int>(dcol.cols());
  const int pad = conv.padding();
  for (int ic = 0; ic < conv.in_channels; ++ic) {
    for (int kk = 0; kk < conv.kernel; ++kk) {
      const int row = ic * conv.kernel + kk;
      for (int ot = 0; ot < To; ++ot) {
        const int it = ot * conv.stride - pad + kk;
        if (it >= 0 && it < T) dx.at(b, ic, it) += dcol(row, ot);
      }
    }
  }
}

}  // namespace

Tensor3 conv1d_forward(const Conv1d& conv, const Tensor3& x, bool relu) {
  if (x.channels != conv.in_channels)
    throw ContractError("conv1d: input has " + std::to_string(x.channels) +
                        " channels, layer expects " + std::to_string(conv.in_channels));
  const int To = conv.out_time(x.time);
  Tensor3 y(x.batch, conv.out_channels, To);
  Eigen::MatrixXd col;
  for (int b = 0; b < x.batch; ++b) {
    im2col(conv, x, b, col);
    Eigen::MatrixXd out = conv.weight * col;
    out.colwise() += conv.bias;
    if (relu) out = out.cwiseMax(0.0);
    for (int oc = 0; oc < conv.out_channels; ++oc)
      for (int ot = 0; ot < To; ++ot) y.at(b, oc, ot) = out(oc, ot);
  }
  return y;
}

Tensor3 conv1d_backward(const Conv1d& conv, const Tensor3& x, const Tensor3& y,
                        const Tensor3& dy, bool relu, Eigen::MatrixXd* dweight,
                        Eigen::VectorXd* dbias, bool want_dx) {
  const int To = conv.out_time(x.time);
  if (dy.batch != x.batch || dy.channels != conv.out_channels || dy.time != To)
    throw ContractError("conv1d backward: gradient shape mismatch");

  Tensor3 dx;
  if (want_dx) dx = Tensor3(x.batch, x.channels, x.time);
  if (dweight) dweight->setZero(conv.out_channels, conv.in_channels * conv.kernel);
  if (dbias) dbias->setZero(conv.out_channels);

  Eigen::MatrixXd col, dout(conv.out_channels, To);
  for (int b = 0; b < x.batch; ++b) {
    for (int oc = 0; oc < conv.out_channels; ++oc)
      for (int ot = 0; ot < To; ++ot) {
        double g = dy.at(b, oc, ot);
        if (relu && y.at(b, oc, ot) <= 0.0) g = 0.0;
        dout(oc, ot) = g;
      }
    if (dweight) {
      // dW needs the input columns; recomputing them trades time for memory
      im2col(conv, x, b, col);
      dweight->noalias() += dout * col.transpose();
    }
    if (dbias) *dbias += dout.rowwise().sum();
    if (want_dx) {
      Eigen::MatrixXd dcol = conv.weight.transpose() * dout;
      col2im_add(conv, dcol, b, dx);
    }
  }
  return dx;
}

void Adam::update(const ParamRef& param, const Eigen::ArrayXd& grad) {
  if (static_cast<std::size_t>(grad.size()) != param.size)
    throw ContractError("adam: gradient size mismatch for " + param.name);
  auto it = slots_.find(param.name);
  if (it == slots_.end()) {
    Slot s;
    s.m = Eigen::ArrayXd::Zero(static_cast<long>(param.size));
    s.v = Eigen::ArrayXd::Zero(static_cast<long>(param.size));
    it = slots_.emplace(param.name, std::move(s)).first;
  }
  Slot& s = it->second;
  s.m = beta1_ * s.m + (1.0 - beta1_) * grad;
  s.v = beta2_ * s.v + (1.0 - beta2_) * grad.square();
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  Eigen::Map<Eigen::ArrayXd> w(param.data, static_cast<long>(param.size));
  w -= lr_ * (s.m / bc1) / ((s.v / bc2).sqrt() + eps_);
}

}  // namespace pgcgan::nn
