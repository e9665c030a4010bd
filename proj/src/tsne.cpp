#include "pgcgan/tsne.hpp"

#include <cmath>
#include <limits>

#include "pgcgan/rng.hpp"

namespace pgcgan {

namespace {

constexpr double kProbFloor = 1e-12;

Eigen::MatrixXd pairwise_sq_dists(const Eigen::MatrixXd& x) {
  const Eigen::VectorXd sq = x.rowwise().squaredNorm();
  Eigen::MatrixXd d = (-2.0 * x * x.transpose()).rowwise() + sq.transpose();
  d.colwise() += sq;
  d = d.cwiseMax(0.0);
  d.diagonal().setZero();
  return d;
}

// Conditional distributions with per-point bandwidths matched to the target
// perplexity by binary search on beta = 1 / (2 sigma^2).
Eigen::MatrixXd conditional_probs(const Eigen::MatrixXd& dists, double perplexity) {
  const long m = dists.rows();
  const double log_u = std::log(perplexity);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(m, m);

  for (long i = 0; i < m; ++i) {
    double beta = 1.0;
    double beta_min = -std::numeric_limits<double>::infinity();
    double beta_max = std::numeric_limits<double>::infinity();

    Eigen::VectorXd row(m);
    for (int step = 0; step < 64; ++step) {
      double sum = 0.0, dot = 0.0;
      for (long j = 0; j < m; ++j) {
        if (j == i) {
          row(j) = 0.0;
          continue;
        }
        const double e = std::exp(-beta * dists(i, j));
        row(j) = e;
        sum += e;
        dot += dists(i, j) * e;
      }
      const double entropy = sum > 0.0 ? std::log(sum) + beta * dot / sum : 0.0;
      const double diff = entropy - log_u;
      if (std::abs(diff) < 1e-5 || sum == 0.0) break;
      if (diff > 0.0) {
        beta_min = beta;
        beta = std::isinf(beta_max) ? beta * 2.0 : 0.5 * (beta + beta_max);
      } else {
        beta_max = beta;
        beta = std::isinf(beta_min) ? beta * 0.5 : 0.5 * (beta + beta_min);
      }
    }
    const double sum = row.sum();
    if (sum > 0.0)
      p.row(i) = (row / sum).transpose();
    else
      p.row(i).setConstant(1.0 / static_cast<double>(m - 1));
    p(i, i) = 0.0;
  }
  return p;
}

}  // namespace

TsneResult tsne_embed(const Eigen::MatrixXd& features, const TsneOptions& options) {
  const long m = features.rows();
  if (!(options.perplexity > 0.0))
    throw ValidationError("t-SNE perplexity must be positive");
  if (3.0 * options.perplexity >= static_cast<double>(m))
    throw ValidationError("t-SNE needs 3 * perplexity < number of points (got perplexity " +
                          std::to_string(options.perplexity) + " for " + std::to_string(m) +
                          " points)");
  if (options.iters < 1) throw ValidationError("t-SNE iteration count must be >= 1");
  if (!features.allFinite()) throw ValidationError("t-SNE input has non-finite values");

  const Eigen::MatrixXd cond = conditional_probs(pairwise_sq_dists(features),
                                                 options.perplexity);
  Eigen::MatrixXd p = (cond + cond.transpose()) / (2.0 * static_cast<double>(m));
  p = p.cwiseMax(kProbFloor);
  p.diagonal().setZero();

  Rng rng = Rng::stream(options.seed, 0x74736e65ull);
  Eigen::MatrixXd y(m, 2);
  for (long i = 0; i < m; ++i)
    for (int j = 0; j < 2; ++j) y(i, j) = 1e-2 * rng.normal();

  Eigen::MatrixXd inc = Eigen::MatrixXd::Zero(m, 2);
  Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(m, 2);

  TsneResult result;
  result.kl_history.reserve(static_cast<std::size_t>(options.iters));

  for (int iter = 0; iter < options.iters; ++iter) {
    const bool exaggerate = iter < options.exaggeration_iters;
    const double p_scale = exaggerate ? options.early_exaggeration : 1.0;

    Eigen::MatrixXd num = pairwise_sq_dists(y);
    num = (1.0 + num.array()).inverse().matrix();
    num.diagonal().setZero();
    const double z = num.sum();
    Eigen::MatrixXd q = (num / z).cwiseMax(kProbFloor);

    Eigen::MatrixXd pq = (p_scale * p - q).cwiseProduct(num);
    Eigen::VectorXd row_sums = pq.rowwise().sum();
    Eigen::MatrixXd grad = 4.0 * (row_sums.asDiagonal() * y - pq * y);

    for (long i = 0; i < m; ++i)
      for (int j = 0; j < 2; ++j) {
        const bool same_dir = (grad(i, j) > 0.0) == (inc(i, j) > 0.0);
        gains(i, j) = same_dir ? std::max(gains(i, j) * 0.8, 0.01) : gains(i, j) + 0.2;
      }
    const double momentum =
        iter < options.momentum_switch_iter ? options.initial_momentum : options.final_momentum;
    inc = momentum * inc - options.learning_rate * gains.cwiseProduct(grad);
    y += inc;
    y.rowwise() -= y.colwise().mean();

    // objective against the plain (never exaggerated) target distribution
    double kl = 0.0;
    for (long i = 0; i < m; ++i)
      for (long j = 0; j < m; ++j)
        if (i != j) kl += p(i, j) * std::log(p(i, j) / q(i, j));
    result.kl_history.push_back(kl);
  }

  result.embedding = std::move(y);
  if (!result.embedding.allFinite())
    throw DivergenceError("t-SNE produced non-finite coordinates");
  return result;
}

}  // namespace pgcgan
