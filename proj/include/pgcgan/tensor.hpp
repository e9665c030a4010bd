#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "pgcgan/common.hpp"

namespace pgcgan {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense batch of multichannel time series, laid out batch x channels x time.
// Sequences enter model space as one channel per joint coordinate.
struct Tensor3 {
  int batch = 0;
  int channels = 0;
  int time = 0;
  std::vector<double> v;

  Tensor3() = default;
  Tensor3(int b, int c, int t)
      : batch(b), channels(c), time(t), v(static_cast<std::size_t>(b) * c * t, 0.0) {}

  double& at(int b, int c, int t) {
    return v[(static_cast<std::size_t>(b) * channels + c) * time + t];
  }
  double at(int b, int c, int t) const {
    return v[(static_cast<std::size_t>(b) * channels + c) * time + t];
  }

  std::size_t size() const { return v.size(); }

  // channels x time view of one sample.
  Eigen::Map<RowMat> sample(int b) {
    return Eigen::Map<RowMat>(v.data() + static_cast<std::size_t>(b) * channels * time,
                              channels, time);
  }
  Eigen::Map<const RowMat> sample(int b) const {
    return Eigen::Map<const RowMat>(v.data() + static_cast<std::size_t>(b) * channels * time,
                                    channels, time);
  }

  bool same_shape(const Tensor3& o) const {
    return batch == o.batch && channels == o.channels && time == o.time;
  }

  bool all_finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }

  void require_shape(int b, int c, int t, const char* what) const {
    if (batch != b || channels != c || time != t)
      throw ContractError(std::string(what) + ": expected shape " + std::to_string(b) + "x" +
                          std::to_string(c) + "x" + std::to_string(t) + ", got " +
                          std::to_string(batch) + "x" + std::to_string(channels) + "x" +
                          std::to_string(time));
  }
};

}  // namespace pgcgan
