#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "pgcgan/training.hpp"
#include "support.hpp"

using namespace pgcgan;
using testsup::TempDir;
namespace fs = std::filesystem;

namespace {

Eigen::VectorXd scores(std::initializer_list<double> values) {
  Eigen::VectorXd out(static_cast<long>(values.size()));
  int i = 0;
  for (double v : values) out(i++) = v;
  return out;
}

// Tiny two-class training setup over random sequences.
struct Rig {
  VocabularyPtr vocab = make_vocabulary({"a", "b"});
  Checkpoint checkpoint;
  std::vector<GaitSequence> train;

  explicit Rig(std::uint64_t data_seed = 70) {
    checkpoint.generator = init_generator(testsup::tiny_generator_config());
    checkpoint.discriminator = init_discriminator(testsup::tiny_discriminator_config());
    checkpoint.vocabulary = vocab;
    checkpoint.normalization.mean = Eigen::VectorXd::Zero(3);
    checkpoint.normalization.stddev = Eigen::VectorXd::Ones(3);
    std::uint64_t k = data_seed;
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < 6; ++i)
        train.push_back(testsup::make_seq(vocab, c, 8, 3, ++k,
                                          "t" + std::to_string(c) + "_" + std::to_string(i)));
  }
};

TrainingConfig fast_config() {
  TrainingConfig config;
  config.batch_size = 4;
  config.max_steps = 5;
  config.stop_patience = 1000;  // never triggers in these short runs
  config.checkpoint_every = 0;
  config.seed = 3;
  return config;
}

std::vector<double> snapshot(const std::vector<nn::ParamRef>& params) {
  std::vector<double> out;
  for (const auto& p : params) out.insert(out.end(), p.data, p.data + p.size);
  return out;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("uninformative scores give the symmetric loss values") {
  auto half = scores({0.5, 0.5, 0.5});
  CHECK(discriminator_loss(half, half) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(generator_adversarial_loss(half) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("losses match hand-computed values") {
  auto real = scores({0.9, 0.8});
  auto fake = scores({0.3, 0.1});
  const double expect_d =
      -(std::log(0.9) + std::log(0.8)) / 2.0 - (std::log(0.7) + std::log(0.9)) / 2.0;
  CHECK(discriminator_loss(real, fake) == doctest::Approx(expect_d).epsilon(1e-12));
  const double expect_g = -(std::log(0.3) + std::log(0.1)) / 2.0;
  CHECK(generator_adversarial_loss(fake) == doctest::Approx(expect_g).epsilon(1e-12));
}

TEST_CASE("score clamping keeps losses finite at the extremes") {
  auto zero = scores({0.0});
  auto one = scores({1.0});
  const double per_side = -std::log(kScoreEps);
  CHECK(discriminator_loss(zero, one) == doctest::Approx(2.0 * per_side).epsilon(1e-9));
  CHECK(generator_adversarial_loss(zero) == doctest::Approx(per_side).epsilon(1e-9));
  CHECK(std::isfinite(discriminator_loss(one, zero)));
}

TEST_CASE("generator loss is the exact weighted sum") {
  TrainingConfig config;
  config.lambda_adv = 1.0;
  config.lambda_rec = 10.0;
  CHECK(generator_loss(0.7, 0.03, config) == 1.0 * 0.7 + 10.0 * 0.03);
  config.lambda_adv = 0.25;
  config.lambda_rec = 4.0;
  CHECK(generator_loss(1.5, 2.0, config) == 0.25 * 1.5 + 4.0 * 2.0);
  config.lambda_adv = 0.0;
  CHECK(generator_loss(123.0, 0.5, config) == 2.0);
}

TEST_CASE("reconstruction loss is the element mean square error") {
  Tensor3 real(1, 1, 2), fake(1, 1, 2);
  real.at(0, 0, 0) = 1.0;
  real.at(0, 0, 1) = 2.0;
  fake.at(0, 0, 0) = 0.0;
  fake.at(0, 0, 1) = 4.0;
  CHECK(reconstruction_loss(real, fake) == 2.5);

  Tensor3 other(1, 1, 3);
  CHECK_THROWS_AS(reconstruction_loss(real, other), ContractError);
}

TEST_CASE("empty score vectors are rejected") {
  Eigen::VectorXd empty;
  auto ok = scores({0.5});
  CHECK_THROWS_AS(discriminator_loss(empty, ok), ContractError);
  CHECK_THROWS_AS(discriminator_loss(ok, empty), ContractError);
  CHECK_THROWS_AS(generator_adversarial_loss(empty), ContractError);
}

TEST_CASE("training config validation") {
  TrainingConfig config;
  config.lambda_adv = 0.0;
  config.lambda_rec = 0.0;
  CHECK_THROWS_AS(config.validate(), ValidationError);
  config = {};
  config.learning_rate_d = 0.0;
  CHECK_THROWS_AS(config.validate(), ValidationError);
  config = {};
  config.adam_beta1 = 1.0;
  CHECK_THROWS_AS(config.validate(), ValidationError);
  config = {};
  config.batch_size = 0;
  CHECK_THROWS_AS(config.validate(), ValidationError);
}

TEST_CASE("discriminator step updates only the discriminator") {
  Rig rig;
  TrainingConfig config = fast_config();
  TrainingState state = TrainingState::init(config);

  auto g_before = snapshot(generator_params(rig.checkpoint.generator));
  Eigen::VectorXd u_before = rig.checkpoint.discriminator.convs[0].u;
  auto d_before = snapshot(discriminator_trainable_params(rig.checkpoint.discriminator));

  std::vector<int> indices{0, 1, 6, 7};
  Tensor3 real = sequences_to_tensor(rig.train, indices);
  std::vector<PathologyLabel> labels;
  for (int i : indices) labels.push_back(rig.train[i].label);

  auto result = train_discriminator_step(rig.checkpoint.discriminator,
                                         rig.checkpoint.generator, real, labels,
                                         state.adam_d, config, state.rng);
  CHECK(std::isfinite(result.loss));
  CHECK(result.accuracy >= 0.0);
  CHECK(result.accuracy <= 1.0);
  CHECK(state.adam_d.step() == 1);

  CHECK(snapshot(generator_params(rig.checkpoint.generator)) == g_before);
  CHECK(snapshot(discriminator_trainable_params(rig.checkpoint.discriminator)) != d_before);
  // power iteration advanced during the training forward
  CHECK((rig.checkpoint.discriminator.convs[0].u - u_before).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("generator step leaves the discriminator untouched") {
  Rig rig;
  TrainingConfig config = fast_config();
  TrainingState state = TrainingState::init(config);

  auto d_before = snapshot(discriminator_params(rig.checkpoint.discriminator));
  auto g_before = snapshot(generator_params(rig.checkpoint.generator));

  std::vector<int> indices{0, 1, 6, 7};
  Tensor3 real = sequences_to_tensor(rig.train, indices);
  std::vector<PathologyLabel> labels;
  for (int i : indices) labels.push_back(rig.train[i].label);

  auto result = train_generator_step(rig.checkpoint.generator, rig.checkpoint.discriminator,
                                     real, labels, state.adam_g, config, state.rng);
  CHECK(std::isfinite(result.adv));
  CHECK(result.rec >= 0.0);
  CHECK(snapshot(discriminator_params(rig.checkpoint.discriminator)) == d_before);
  CHECK(snapshot(generator_params(rig.checkpoint.generator)) != g_before);
}

TEST_CASE("train runs to max_steps and records history") {
  TempDir tmp("train_smoke");
  Rig rig;
  TrainingConfig config = fast_config();
  TrainOptions options;
  options.checkpoint_dir = tmp / "ckpt";
  options.history_csv = tmp / "history.csv";

  auto result = train(rig.checkpoint, rig.train, config, options);
  CHECK(result.reason == StopReason::max_steps);
  CHECK(result.steps_run == 5);
  REQUIRE(rig.checkpoint.state.has_value());
  REQUIRE(rig.checkpoint.state->history.size() == 5);
  for (int i = 0; i < 5; ++i) {
    const auto& rec = rig.checkpoint.state->history[i];
    CHECK(rec.step == i + 1);
    CHECK(std::isfinite(rec.l_d));
    CHECK(std::isfinite(rec.l_g_adv));
    CHECK(std::isfinite(rec.l_rec));
    CHECK(rec.d_acc_ema >= 0.0);
    CHECK(rec.d_acc_ema <= 1.0);
  }
  CHECK(fs::exists(tmp / "ckpt" / "final" / "config.json"));
  const std::string csv = testsup::read_file(tmp / "history.csv");
  CHECK(csv.rfind("step,l_d,l_g_adv,l_rec,d_acc_ema\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("training is deterministic for a fixed seed") {
  Rig a, b;
  TrainingConfig config = fast_config();
  auto ra = train(a.checkpoint, a.train, config);
  auto rb = train(b.checkpoint, b.train, config);
  CHECK(ra.steps_run == rb.steps_run);
  const auto& ha = a.checkpoint.state->history;
  const auto& hb = b.checkpoint.state->history;
  REQUIRE(ha.size() == hb.size());
  for (std::size_t i = 0; i < ha.size(); ++i) {
    CHECK(ha[i].l_d == hb[i].l_d);
    CHECK(ha[i].l_g_adv == hb[i].l_g_adv);
    CHECK(ha[i].l_rec == hb[i].l_rec);
  }
  CHECK(snapshot(generator_params(a.checkpoint.generator)) ==
        snapshot(generator_params(b.checkpoint.generator)));
  CHECK(snapshot(discriminator_params(a.checkpoint.discriminator)) ==
        snapshot(discriminator_params(b.checkpoint.discriminator)));
}

TEST_CASE("wide accuracy band stops training as an equilibrium") {
  TempDir tmp("train_eq");
  Rig rig;
  TrainingConfig config = fast_config();
  config.max_steps = 50;
  config.stop_band_low = 0.0;
  config.stop_band_high = 1.0;
  config.stop_patience = 3;
  TrainOptions options;
  options.checkpoint_dir = tmp / "ckpt";

  auto result = train(rig.checkpoint, rig.train, config, options);
  CHECK(result.reason == StopReason::discriminator_equilibrium);
  CHECK(result.steps_run == 3);
  CHECK(result.message.find("discriminator accuracy") != std::string::npos);
  CHECK(fs::exists(tmp / "ckpt" / "step_3" / "config.json"));
  CHECK(fs::exists(tmp / "ckpt" / "final" / "config.json"));
}

TEST_CASE("an impossible divergence threshold aborts without a final checkpoint") {
  TempDir tmp("train_div");
  Rig rig;
  TrainingConfig config = fast_config();
  config.divergence_threshold = 1e-12;
  TrainOptions options;
  options.checkpoint_dir = tmp / "ckpt";

  auto result = train(rig.checkpoint, rig.train, config, options);
  CHECK(result.reason == StopReason::diverged);
  CHECK(result.steps_run == 0);
  CHECK(!result.message.empty());
  CHECK(!fs::exists(tmp / "ckpt" / "final"));
  CHECK(params_finite(generator_params(rig.checkpoint.generator)));
}

TEST_CASE("checkpoints round trip bitwise including optimizer state") {
  TempDir tmp("ckpt_rt");
  Rig rig;
  TrainingConfig config = fast_config();
  config.max_steps = 3;
  train(rig.checkpoint, rig.train, config);

  save_checkpoint(tmp / "ck", rig.checkpoint);
  Checkpoint back = load_checkpoint(tmp / "ck");

  CHECK(snapshot(generator_params(back.generator)) ==
        snapshot(generator_params(rig.checkpoint.generator)));
  CHECK(snapshot(discriminator_params(back.discriminator)) ==
        snapshot(discriminator_params(rig.checkpoint.discriminator)));
  CHECK(back.vocabulary->names == rig.vocab->names);
  CHECK((back.normalization.mean - rig.checkpoint.normalization.mean).cwiseAbs().maxCoeff() ==
        0.0);

  REQUIRE(back.state.has_value());
  const auto& sa = *rig.checkpoint.state;
  const auto& sb = *back.state;
  CHECK(sb.step == sa.step);
  CHECK(sb.d_acc_ema == sa.d_acc_ema);
  CHECK(sb.band_steps == sa.band_steps);
  CHECK(sb.rng.save().state == sa.rng.save().state);
  CHECK(sb.rng.save().has_spare == sa.rng.save().has_spare);
  CHECK(sb.adam_g.step() == sa.adam_g.step());
  CHECK(sb.adam_g.learning_rate() == sa.adam_g.learning_rate());
  CHECK(sb.adam_d.beta1() == sa.adam_d.beta1());
  REQUIRE(sb.adam_g.slots().size() == sa.adam_g.slots().size());
  for (const auto& [name, slot] : sa.adam_g.slots()) {
    const auto it = sb.adam_g.slots().find(name);
    REQUIRE(it != sb.adam_g.slots().end());
    CHECK((it->second.m - slot.m).abs().maxCoeff() == 0.0);
    CHECK((it->second.v - slot.v).abs().maxCoeff() == 0.0);
  }
  REQUIRE(sb.history.size() == sa.history.size());
  for (std::size_t i = 0; i < sa.history.size(); ++i) {
    CHECK(sb.history[i].step == sa.history[i].step);
    CHECK(sb.history[i].l_d == sa.history[i].l_d);
  }
}

TEST_CASE("loading a checkpoint resumes training exactly") {
  TempDir tmp("resume");
  TrainingConfig config = fast_config();

  Rig whole;
  config.max_steps = 6;
  train(whole.checkpoint, whole.train, config);

  Rig parts;
  config.max_steps = 3;
  train(parts.checkpoint, parts.train, config);
  save_checkpoint(tmp / "mid", parts.checkpoint);

  Checkpoint resumed = load_checkpoint(tmp / "mid");
  config.max_steps = 6;
  auto result = train(resumed, parts.train, config);
  CHECK(result.steps_run == 6);

  CHECK(snapshot(generator_params(resumed.generator)) ==
        snapshot(generator_params(whole.checkpoint.generator)));
  CHECK(snapshot(discriminator_params(resumed.discriminator)) ==
        snapshot(discriminator_params(whole.checkpoint.discriminator)));
  const auto& ha = whole.checkpoint.state->history;
  const auto& hb = resumed.state->history;
  REQUIRE(hb.size() == ha.size());
  for (std::size_t i = 0; i < ha.size(); ++i) {
    CHECK(hb[i].step == ha[i].step);
    CHECK(hb[i].l_d == ha[i].l_d);
    CHECK(hb[i].l_rec == ha[i].l_rec);
  }
}

TEST_CASE("loading a non-checkpoint directory fails cleanly") {
  TempDir tmp("ckpt_bad");
  CHECK_THROWS_AS(load_checkpoint(tmp / "nope"), ValidationError);
  testsup::write_file(tmp / "junk" / "config.json", "{\"kind\": \"other\"}\n");
  CHECK_THROWS_AS(load_checkpoint(tmp / "junk"), ValidationError);
}

TEST_CASE("pure reconstruction training drives the error down on one sequence") {
  Rig rig;
  rig.train.resize(1);
  TrainingConfig config = fast_config();
  config.lambda_adv = 0.0;
  config.lambda_rec = 1.0;
  config.batch_size = 1;
  config.max_steps = 500;
  config.learning_rate_g = 5e-3;

  auto result = train(rig.checkpoint, rig.train, config);
  CHECK(result.steps_run == 500);
  const auto& hist = rig.checkpoint.state->history;
  double best = hist.front().l_rec;
  for (const auto& rec : hist) best = std::min(best, rec.l_rec);
  CHECK(best < hist.front().l_rec * 0.5);
  CHECK(hist.back().l_rec < hist.front().l_rec);
}

TEST_CASE("history csv uses the documented shape") {
  TempDir tmp("hist_csv");
  std::vector<StepRecord> records{{1, 1.5, 0.25, 0.125, 0.5}, {2, 0.75, 0.5, 0.0625, 0.25}};
  write_history_csv(tmp / "h.csv", records);
  CHECK(testsup::read_file(tmp / "h.csv") ==
        "step,l_d,l_g_adv,l_rec,d_acc_ema\n1,1.5,0.25,0.125,0.5\n2,0.75,0.5,0.0625,0.25\n");
}

}  // TEST_SUITE
