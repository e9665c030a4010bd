#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>

#include "pgcgan/model.hpp"
#include "support.hpp"

using namespace pgcgan;

namespace {

Tensor3 random_tensor(int b, int c, int t, std::uint64_t seed) {
  Rng rng(seed);
  Tensor3 out(b, c, t);
  for (double& x : out.v) x = rng.normal();
  return out;
}

std::vector<PathologyLabel> two_labels() {
  auto vocab = make_vocabulary({"a", "b"});
  return {PathologyLabel{0, vocab}, PathologyLabel{1, vocab}};
}

double weighted_sum(const Tensor3& x, const Tensor3& w) {
  double out = 0.0;
  for (std::size_t i = 0; i < x.v.size(); ++i) out += x.v[i] * w.v[i];
  return out;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("config validation rejects degenerate shapes") {
  GeneratorConfig g = testsup::tiny_generator_config();
  g.d = 0;
  CHECK_THROWS_AS(g.validate(), ValidationError);
  g = testsup::tiny_generator_config();
  g.kernel_size = 4;
  CHECK_THROWS_AS(g.validate(), ValidationError);
  g = testsup::tiny_generator_config();
  g.C = 1;
  CHECK_THROWS_AS(g.validate(), ValidationError);

  DiscriminatorConfig d = testsup::tiny_discriminator_config();
  d.conv_channels = {4, 4, 4, 4, 4};  // time shrinks to 1 and saturates there
  CHECK_NOTHROW(d.validate());
  d = testsup::tiny_discriminator_config();
  d.conv_channels = {};
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d = testsup::tiny_discriminator_config();
  d.stride = 0;
  CHECK_THROWS_AS(d.validate(), ValidationError);
}

TEST_CASE("init is deterministic in the seed") {
  auto cfg = testsup::tiny_generator_config();
  auto a = init_generator(cfg);
  auto b = init_generator(cfg);
  auto pa = generator_params(a);
  auto pb = generator_params(b);
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].name == pb[i].name);
    REQUIRE(pa[i].size == pb[i].size);
    for (std::size_t k = 0; k < pa[i].size; ++k) CHECK(pa[i].data[k] == pb[i].data[k]);
  }
  cfg.seed = 999;
  auto c = init_generator(cfg);
  auto pc = generator_params(c);
  bool any_diff = false;
  for (std::size_t k = 0; k < pa[0].size; ++k) any_diff |= pa[0].data[k] != pc[0].data[k];
  CHECK(any_diff);
}

TEST_CASE("generator layer shapes follow the config") {
  auto cfg = testsup::tiny_generator_config();  // T=8 d=3 C=2 latent=4 enc{6} dec{6} k=3
  auto g = init_generator(cfg);
  REQUIRE(g.encoder.size() == 2);
  CHECK(g.encoder[0].in_channels == 3);
  CHECK(g.encoder[0].out_channels == 6);
  CHECK(g.encoder[1].out_channels == 4);
  REQUIRE(g.decoder.size() == 2);
  CHECK(g.decoder[0].in_channels == 6);  // latent + C
  CHECK(g.decoder[1].out_channels == 3);
  for (const auto& conv : g.encoder) CHECK(conv.stride == 1);

  Tensor3 noise = random_tensor(2, 3, 8, 21);
  GeneratorCache cache;
  Tensor3 out = generator_forward(g, noise, two_labels(), &cache);
  out.require_shape(2, 3, 8, "generator output");
  cache.latent.require_shape(2, 4, 8, "latent");
  cache.conditioned.require_shape(2, 6, 8, "conditioned");
  CHECK(out.all_finite());
}

TEST_CASE("discriminator layer shapes and score range") {
  auto cfg = testsup::tiny_discriminator_config();  // T=8 d=3 C=2 conv{6,8} fc{5} k=3 s=2
  auto d = init_discriminator(cfg);
  REQUIRE(d.convs.size() == 2);
  CHECK(d.convs[0].conv.in_channels == 5);  // d + C
  CHECK(d.convs[0].conv.stride == 2);
  CHECK(d.convs[0].u.size() == 6);
  REQUIRE(d.fcs.size() == 2);
  CHECK(d.fcs.back().weight.rows() == 1);

  Tensor3 x = random_tensor(4, 3, 8, 3);
  auto vocab = make_vocabulary({"a", "b"});
  auto scores = discriminate(d, x, {PathologyLabel{0, vocab}});
  REQUIRE(scores.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(scores(i) > 0.0);
    CHECK(scores(i) < 1.0);
  }
}

TEST_CASE("conditioning appends constant one-hot channels") {
  Tensor3 latent = random_tensor(2, 4, 8, 9);
  auto labels = two_labels();
  Tensor3 cond = condition_latent(latent, labels, 2);
  cond.require_shape(2, 6, 8, "conditioned");
  for (int b = 0; b < 2; ++b)
    for (int c = 0; c < 4; ++c)
      for (int t = 0; t < 8; ++t) CHECK(cond.at(b, c, t) == latent.at(b, c, t));
  for (int t = 0; t < 8; ++t) {
    CHECK(cond.at(0, 4, t) == 1.0);
    CHECK(cond.at(0, 5, t) == 0.0);
    CHECK(cond.at(1, 4, t) == 0.0);
    CHECK(cond.at(1, 5, t) == 1.0);
  }
}

TEST_CASE("conditioning broadcasts a single label and rejects mismatches") {
  Tensor3 latent = random_tensor(3, 2, 5, 1);
  auto vocab = make_vocabulary({"a", "b"});
  Tensor3 cond = condition_latent(latent, {PathologyLabel{1, vocab}}, 2);
  for (int b = 0; b < 3; ++b)
    for (int t = 0; t < 5; ++t) {
      CHECK(cond.at(b, 2, t) == 0.0);
      CHECK(cond.at(b, 3, t) == 1.0);
    }
  auto labels = two_labels();
  CHECK_THROWS_AS(condition_latent(latent, labels, 2), ContractError);  // 2 labels, batch 3
  CHECK_THROWS_AS(condition_latent(latent, {PathologyLabel{5, vocab}}, 2), ContractError);
}

TEST_CASE("spectral normalization recovers a diagonal top singular value") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
  w(0, 0) = 3.0;
  w(1, 1) = 1.0;
  Eigen::VectorXd u0(2);
  u0 << 1.0, 1.0;
  auto result = spectral_normalize(w, u0, 50);
  CHECK(std::abs(result.sigma - 3.0) < 1e-6);
  CHECK(std::abs(result.normalized(0, 0) - 1.0) < 1e-6);
  CHECK(std::abs(result.u.norm() - 1.0) < 1e-12);
  CHECK(std::abs(result.v.norm() - 1.0) < 1e-12);
}

TEST_CASE("spectral normalization matches full SVD on random matrices") {
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng(1000 + trial);
    Eigen::MatrixXd w(16, 12);
    for (int i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(w);
    const double sigma1 = svd.singularValues()(0);

    Eigen::VectorXd u0(16);
    for (int i = 0; i < 16; ++i) u0(i) = rng.normal();
    auto result = spectral_normalize(w, u0, 200);
    CHECK(std::abs(result.sigma - sigma1) / sigma1 < 1e-6);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd2(result.normalized);
    CHECK(std::abs(svd2.singularValues()(0) - 1.0) < 1e-6);
  }
}

TEST_CASE("spectral normalization leaves a zero matrix untouched") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 3);
  Eigen::VectorXd u0 = Eigen::VectorXd::Ones(4);
  auto result = spectral_normalize(w, u0, 5);
  CHECK(result.sigma < kSigmaFloor);
  CHECK(result.normalized.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("frozen sigma agrees with the converged power iteration") {
  Rng rng(5);
  Eigen::MatrixXd w(6, 9);
  for (int i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
  Eigen::VectorXd u0(6);
  for (int i = 0; i < 6; ++i) u0(i) = rng.normal();
  auto result = spectral_normalize(w, u0, 300);
  CHECK(std::abs(frozen_sigma(w, result.u, result.v) - result.sigma) < 1e-9);
}

TEST_CASE("discriminate never mutates the model") {
  auto d = init_discriminator(testsup::tiny_discriminator_config());
  std::vector<Eigen::VectorXd> u_before, v_before;
  for (const auto& layer : d.convs) {
    u_before.push_back(layer.u);
    v_before.push_back(layer.v);
  }
  Eigen::MatrixXd w_before = d.convs[0].conv.weight;

  Tensor3 x = random_tensor(3, 3, 8, 17);
  auto vocab = make_vocabulary({"a", "b"});
  auto s1 = discriminate(d, x, {PathologyLabel{0, vocab}});
  auto s2 = discriminate(d, x, {PathologyLabel{0, vocab}});
  CHECK((s1 - s2).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t i = 0; i < d.convs.size(); ++i) {
    CHECK((d.convs[i].u - u_before[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((d.convs[i].v - v_before[i]).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK((d.convs[0].conv.weight - w_before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("training-mode forward advances the power iteration only") {
  auto d = init_discriminator(testsup::tiny_discriminator_config());
  Eigen::VectorXd u_before = d.convs[0].u;
  Eigen::MatrixXd w_before = d.convs[0].conv.weight;

  Tensor3 x = random_tensor(2, 3, 8, 19);
  auto vocab = make_vocabulary({"a", "b"});
  DiscriminatorCache cache;
  discriminate_train(d, x, {PathologyLabel{0, vocab}}, cache);
  CHECK((d.convs[0].u - u_before).cwiseAbs().maxCoeff() > 0.0);
  CHECK((d.convs[0].conv.weight - w_before).cwiseAbs().maxCoeff() == 0.0);

  // once u/v have settled, the frozen path agrees with the training path
  for (int i = 0; i < 200; ++i) {
    DiscriminatorCache c2;
    discriminate_train(d, x, {PathologyLabel{0, vocab}}, c2);
  }
  DiscriminatorCache c3;
  auto train_scores = discriminate_train(d, x, {PathologyLabel{0, vocab}}, c3);
  auto frozen_scores = discriminate(d, x, {PathologyLabel{0, vocab}});
  CHECK((train_scores - frozen_scores).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("each batch row is processed independently") {
  auto cfg = testsup::tiny_generator_config();
  auto g = init_generator(cfg);
  Tensor3 noise = random_tensor(2, cfg.d, cfg.T, 23);
  Tensor3 out = generator_forward(g, noise, two_labels());

  Tensor3 row0(1, cfg.d, cfg.T);
  for (int c = 0; c < cfg.d; ++c)
    for (int t = 0; t < cfg.T; ++t) row0.at(0, c, t) = noise.at(0, c, t);
  auto vocab = make_vocabulary({"a", "b"});
  Tensor3 solo = generator_forward(g, row0, {PathologyLabel{0, vocab}});
  for (int c = 0; c < cfg.d; ++c)
    for (int t = 0; t < cfg.T; ++t) CHECK(solo.at(0, c, t) == out.at(0, c, t));
}

TEST_CASE("generate is deterministic and label-sensitive") {
  auto cfg = testsup::tiny_generator_config();
  auto g = init_generator(cfg);
  auto vocab = make_vocabulary({"a", "b"});
  std::vector<PathologyLabel> la{PathologyLabel{0, vocab}};
  std::vector<PathologyLabel> lb{PathologyLabel{1, vocab}};

  Tensor3 x1 = generate(g, la, 42);
  Tensor3 x2 = generate(g, la, 42);
  CHECK(x1.v == x2.v);

  Tensor3 x3 = generate(g, la, 43);
  CHECK(x1.v != x3.v);

  Tensor3 x4 = generate(g, lb, 42);
  CHECK(x1.v != x4.v);
}

TEST_CASE("noise sampling is seeded and roughly standard normal") {
  auto cfg = testsup::tiny_generator_config();
  auto a = sample_noise(4, cfg, 7);
  auto b = sample_noise(4, cfg, 7);
  CHECK(a.values.v == b.values.v);
  a.values.require_shape(4, cfg.d, cfg.T, "noise");

  auto big = sample_noise(200, cfg, 11);
  double sum = 0.0, sumsq = 0.0;
  for (double x : big.values.v) {
    sum += x;
    sumsq += x * x;
  }
  const double n = static_cast<double>(big.values.v.size());
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(std::abs(sumsq / n - 1.0) < 0.1);
}

TEST_CASE("generator gradients match finite differences") {
  auto cfg = testsup::tiny_generator_config();
  auto g = init_generator(cfg);
  auto labels = two_labels();
  Tensor3 noise = random_tensor(2, cfg.d, cfg.T, 31);
  Tensor3 w = random_tensor(2, cfg.d, cfg.T, 37);

  GeneratorCache cache;
  generator_forward(g, noise, labels, &cache);
  nn::GradMap grads;
  generator_backward(g, cache, w, grads);

  auto loss = [&]() { return weighted_sum(generator_forward(g, noise, labels), w); };
  auto params = generator_params(g);
  Rng pick(301);
  const double h = 1e-5;
  int checked = 0;
  for (auto& p : params) {
    for (int rep = 0; rep < 6; ++rep) {
      const std::size_t idx = pick.below(p.size);
      const double orig = p.data[idx];
      p.data[idx] = orig + h;
      const double up = loss();
      p.data[idx] = orig - h;
      const double down = loss();
      p.data[idx] = orig;
      const double fd = (up - down) / (2 * h);
      const double analytic = grads.slot(p.name, p.size)(static_cast<long>(idx));
      CHECK(rel_err(fd, analytic) < 1e-5);
      ++checked;
    }
  }
  CHECK(checked >= 40);
}

TEST_CASE("discriminator parameter and input gradients match finite differences") {
  auto cfg = testsup::tiny_discriminator_config();
  auto d = init_discriminator(cfg);
  auto labels = two_labels();
  Tensor3 x = random_tensor(2, cfg.d, cfg.T, 41);
  Eigen::VectorXd alpha(2);
  alpha << 0.7, -1.3;

  DiscriminatorCache cache;
  discriminate(d, x, labels, &cache);
  nn::GradMap grads;
  Tensor3 dx = discriminator_backward(d, cache, alpha, &grads, true);
  dx.require_shape(2, cfg.d, cfg.T, "dinput");

  auto loss = [&]() { return alpha.dot(discriminate(d, x, labels)); };

  auto params = discriminator_trainable_params(d);
  Rng pick(401);
  const double h = 1e-5;
  for (auto& p : params) {
    for (int rep = 0; rep < 6; ++rep) {
      const std::size_t idx = pick.below(p.size);
      const double orig = p.data[idx];
      p.data[idx] = orig + h;
      const double up = loss();
      p.data[idx] = orig - h;
      const double down = loss();
      p.data[idx] = orig;
      const double fd = (up - down) / (2 * h);
      const double analytic = grads.slot(p.name, p.size)(static_cast<long>(idx));
      CHECK(rel_err(fd, analytic) < 1e-5);
    }
  }

  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t idx = pick.below(x.v.size());
    const double orig = x.v[idx];
    x.v[idx] = orig + h;
    const double up = loss();
    x.v[idx] = orig - h;
    const double down = loss();
    x.v[idx] = orig;
    const double fd = (up - down) / (2 * h);
    CHECK(rel_err(fd, dx.v[idx]) < 1e-5);
  }
}

}  // TEST_SUITE
