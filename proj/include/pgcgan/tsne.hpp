#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pgcgan/common.hpp"

namespace pgcgan {

struct TsneOptions {
  double perplexity = 30.0;
  int iters = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  int exaggeration_iters = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iter = 250;
  std::uint64_t seed = 0;
};

struct TsneResult {
  Eigen::MatrixXd embedding;       // M x 2
  std::vector<double> kl_history;  // objective per iteration, exaggeration removed
};

// Exact (all-pairs) t-SNE with the standard adaptive-gain gradient descent.
// Requires 3 * perplexity < M. Deterministic given the seed.
TsneResult tsne_embed(const Eigen::MatrixXd& features, const TsneOptions& options = {});

}  // namespace pgcgan
