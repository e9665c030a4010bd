#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "pgcgan/common.hpp"
#include "pgcgan/rng.hpp"
#include "pgcgan/tensor.hpp"

namespace pgcgan::nn {

// Temporal convolution. The weight is kept in its 2D reshape,
// out_channels x (in_channels * kernel), which is what both the GEMM path and
// spectral normalization operate on. Padding is symmetric: (kernel - 1) / 2.
struct Conv1d {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  int stride = 1;
  Eigen::MatrixXd weight;  // out_channels x (in_channels * kernel)
  Eigen::VectorXd bias;    // out_channels

  int padding() const { return (kernel - 1) / 2; }
  int out_time(int T) const { return (T + 2 * padding() - kernel) / stride + 1; }
};

Conv1d make_conv1d(int in_channels, int out_channels, int kernel, int stride, Rng& rng);

// y = conv(x) [+ ReLU]. Output shape batch x out_channels x out_time.
Tensor3 conv1d_forward(const Conv1d& conv, const Tensor3& x, bool relu);

// Backward through conv (+ the ReLU that produced `y` when relu is set).
// Accumulates into dweight/dbias when non-null; returns dL/dx when wanted.
Tensor3 conv1d_backward(const Conv1d& conv, const Tensor3& x, const Tensor3& y,
                        const Tensor3& dy, bool relu, Eigen::MatrixXd* dweight,
                        Eigen::VectorXd* dbias, bool want_dx);

struct Linear {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

Linear make_linear(int in, int out, Rng& rng);

// Named views over a model's parameter arrays, used by the optimizer and by
// checkpoint serialization. Data pointers stay valid while the model lives.
struct ParamRef {
  std::string name;
  double* data = nullptr;
  std::size_t size = 0;
  std::vector<int> shape;
};

inline ParamRef param_ref(const std::string& name, Eigen::MatrixXd& m) {
  return {name, m.data(), static_cast<std::size_t>(m.size()),
          {static_cast<int>(m.rows()), static_cast<int>(m.cols())}};
}
inline ParamRef param_ref(const std::string& name, Eigen::VectorXd& v) {
  return {name, v.data(), static_cast<std::size_t>(v.size()), {static_cast<int>(v.size())}};
}

// Gradient buffers keyed by parameter name.
struct GradMap {
  std::map<std::string, Eigen::ArrayXd> grads;

  Eigen::ArrayXd& slot(const std::string& name, std::size_t size) {
    auto it = grads.find(name);
    if (it == grads.end())
      it = grads.emplace(name, Eigen::ArrayXd::Zero(static_cast<long>(size))).first;
    return it->second;
  }
  void add(const std::string& name, const Eigen::MatrixXd& g) {
    slot(name, static_cast<std::size_t>(g.size())) +=
        Eigen::Map<const Eigen::ArrayXd>(g.data(), g.size());
  }
  void add(const std::string& name, const Eigen::VectorXd& g) {
    slot(name, static_cast<std::size_t>(g.size())) += g.array();
  }
};

// Adam with bias correction. One instance per optimized network; `tick()`
// advances the shared timestep once per training step, before the updates.
class Adam {
 public:
  Adam() = default;
  Adam(double lr, double beta1, double beta2) : lr_(lr), beta1_(beta1), beta2_(beta2) {}

  void tick() { ++step_; }
  void update(const ParamRef& param, const Eigen::ArrayXd& grad);

  long step() const { return step_; }
  double learning_rate() const { return lr_; }
  double beta1() const { return beta1_; }
  double beta2() const { return beta2_; }

  struct Slot {
    Eigen::ArrayXd m, v;
  };
  std::map<std::string, Slot>& slots() { return slots_; }
  const std::map<std::string, Slot>& slots() const { return slots_; }
  void set_step(long s) { step_ = s; }

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long step_ = 0;
  std::map<std::string, Slot> slots_;
};

}  // namespace pgcgan::nn
