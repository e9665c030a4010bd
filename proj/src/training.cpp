#include "pgcgan/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

namespace pgcgan {

void TrainingConfig::validate() const {
  if (lambda_adv < 0.0 || lambda_rec < 0.0 || lambda_adv + lambda_rec <= 0.0)
    throw ValidationError("loss weights must be nonnegative with lambda_adv + lambda_rec > 0");
  if (learning_rate_g <= 0.0 || learning_rate_d <= 0.0)
    throw ValidationError("learning rates must be positive");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0 && adam_beta2 > 0.0 && adam_beta2 < 1.0))
    throw ValidationError("adam betas must lie in (0, 1)");
  if (batch_size < 1 || max_steps < 1 || d_steps_per_g_step < 1)
    throw ValidationError("batch_size, max_steps and d_steps_per_g_step must be >= 1");
  if (!(ema_decay > 0.0 && ema_decay < 1.0))
    throw ValidationError("ema_decay must lie in (0, 1)");
  if (stop_patience < 1) throw ValidationError("stop_patience must be >= 1");
}

TrainingState TrainingState::init(const TrainingConfig& config) {
  TrainingState state;
  state.rng = Rng::stream(config.seed, 0x747261696eull);  // training stream
  state.adam_g = nn::Adam(config.learning_rate_g, config.adam_beta1, config.adam_beta2);
  state.adam_d = nn::Adam(config.learning_rate_d, config.adam_beta1, config.adam_beta2);
  return state;
}

namespace {

inline double clamp_score(double s) {
  return std::min(std::max(s, kScoreEps), 1.0 - kScoreEps);
}

// derivative of clamp is zero outside the interior
inline bool interior(double s) { return s > kScoreEps && s < 1.0 - kScoreEps; }

}  // namespace

double discriminator_loss(const Eigen::VectorXd& real_scores,
                          const Eigen::VectorXd& fake_scores) {
  if (real_scores.size() == 0 || fake_scores.size() == 0)
    throw ContractError("discriminator_loss: empty score vectors");
  double loss = 0.0;
  for (double s : real_scores) loss -= std::log(clamp_score(s));
  loss /= static_cast<double>(real_scores.size());
  double fake = 0.0;
  for (double s : fake_scores) fake -= std::log(1.0 - clamp_score(s));
  return loss + fake / static_cast<double>(fake_scores.size());
}

double generator_adversarial_loss(const Eigen::VectorXd& fake_scores) {
  if (fake_scores.size() == 0)
    throw ContractError("generator_adversarial_loss: empty score vector");
  double loss = 0.0;
  for (double s : fake_scores) loss -= std::log(clamp_score(s));
  return loss / static_cast<double>(fake_scores.size());
}

double reconstruction_loss(const Tensor3& real_batch, const Tensor3& fake_batch) {
  if (!real_batch.same_shape(fake_batch))
    throw ContractError("reconstruction_loss: shape mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < real_batch.v.size(); ++i) {
    const double diff = real_batch.v[i] - fake_batch.v[i];
    sum += diff * diff;
  }
  return sum / static_cast<double>(real_batch.v.size());
}

double generator_loss(double adv, double rec, const TrainingConfig& config) {
  return config.lambda_adv * adv + config.lambda_rec * rec;
}

// ---- training steps ---------------------------------------------------------

DStepResult train_discriminator_step(DiscriminatorModel& d_model,
                                     const GeneratorModel& g_model, const Tensor3& real_batch,
                                     const std::vector<PathologyLabel>& labels,
                                     nn::Adam& adam_d, const TrainingConfig& config, Rng& rng) {
  const int B = real_batch.batch;

  Tensor3 noise = sample_noise_values(B, g_model.config.d, g_model.config.T, rng);
  Tensor3 fake = generator_forward(g_model, noise, labels);

  DiscriminatorCache real_cache, fake_cache;
  Eigen::VectorXd real_scores = discriminate_train(d_model, real_batch, labels, real_cache);
  Eigen::VectorXd fake_scores = discriminate_train(d_model, fake, labels, fake_cache);

  DStepResult result;
  result.loss = discriminator_loss(real_scores, fake_scores);
  if (!std::isfinite(result.loss))
    throw DivergenceError("discriminator loss is not finite");

  int correct = 0;
  for (double s : real_scores) correct += s > 0.5 ? 1 : 0;
  for (double s : fake_scores) correct += s < 0.5 ? 1 : 0;
  result.accuracy = static_cast<double>(correct) / (2.0 * B);

  // dL/dscore for -mean(log r) - mean(log(1 - f))
  Eigen::VectorXd dreal(B), dfake(B);
  for (int i = 0; i < B; ++i) {
    dreal(i) = interior(real_scores(i)) ? -1.0 / (B * clamp_score(real_scores(i))) : 0.0;
    dfake(i) = interior(fake_scores(i)) ? 1.0 / (B * (1.0 - clamp_score(fake_scores(i)))) : 0.0;
  }

  nn::GradMap grads;
  discriminator_backward(d_model, real_cache, dreal, &grads, /*want_dinput=*/false);
  discriminator_backward(d_model, fake_cache, dfake, &grads, /*want_dinput=*/false);

  adam_d.tick();
  for (const auto& param : discriminator_trainable_params(d_model))
    adam_d.update(param, grads.slot(param.name, param.size));
  return result;
}

GStepResult train_generator_step(GeneratorModel& g_model, const DiscriminatorModel& d_model,
                                 const Tensor3& real_batch,
                                 const std::vector<PathologyLabel>& labels, nn::Adam& adam_g,
                                 const TrainingConfig& config, Rng& rng) {
  const int B = real_batch.batch;

  Tensor3 noise = sample_noise_values(B, g_model.config.d, g_model.config.T, rng);
  GeneratorCache g_cache;
  Tensor3 fake = generator_forward(g_model, noise, labels, &g_cache);

  DiscriminatorCache d_cache;
  Eigen::VectorXd fake_scores = discriminate(d_model, fake, labels, &d_cache);

  GStepResult result;
  result.adv = generator_adversarial_loss(fake_scores);
  result.rec = reconstruction_loss(real_batch, fake);
  if (!std::isfinite(result.adv) || !std::isfinite(result.rec))
    throw DivergenceError("generator loss is not finite");

  Tensor3 dfake(fake.batch, fake.channels, fake.time);
  if (config.lambda_adv != 0.0) {
    Eigen::VectorXd dscores(B);
    for (int i = 0; i < B; ++i)
      dscores(i) = interior(fake_scores(i))
                       ? -config.lambda_adv / (B * clamp_score(fake_scores(i)))
                       : 0.0;
    dfake = discriminator_backward(d_model, d_cache, dscores, nullptr, /*want_dinput=*/true);
  }
  const double rec_scale = 2.0 * config.lambda_rec / static_cast<double>(fake.v.size());
  for (std::size_t i = 0; i < fake.v.size(); ++i)
    dfake.v[i] += rec_scale * (fake.v[i] - real_batch.v[i]);

  nn::GradMap grads;
  generator_backward(g_model, g_cache, dfake, grads);

  adam_g.tick();
  for (const auto& param : generator_params(g_model))
    adam_g.update(param, grads.slot(param.name, param.size));
  return result;
}

// ---- training loop ----------------------------------------------------------

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::max_steps: return "max_steps";
    case StopReason::discriminator_equilibrium: return "discriminator_equilibrium";
    case StopReason::diverged: return "diverged";
  }
  return "unknown";
}

void write_history_csv(const fs::path& path, const std::vector<StepRecord>& history) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write loss history to " + path.string());
  out << "step,l_d,l_g_adv,l_rec,d_acc_ema\n";
  char line[256];
  for (const auto& rec : history) {
    std::snprintf(line, sizeof(line), "%ld,%.9g,%.9g,%.9g,%.9g\n", rec.step, rec.l_d,
                  rec.l_g_adv, rec.l_rec, rec.d_acc_ema);
    out << line;
  }
}

TrainResult train(Checkpoint& checkpoint, const std::vector<GaitSequence>& train_split,
                  const TrainingConfig& config, const TrainOptions& options) {
  config.validate();
  if (train_split.empty()) throw ValidationError("train split is empty");

  if (!checkpoint.state) checkpoint.state = TrainingState::init(config);
  TrainingState& state = *checkpoint.state;
  GeneratorModel& g = checkpoint.generator;
  DiscriminatorModel& d = checkpoint.discriminator;

  const auto n = static_cast<std::uint64_t>(train_split.size());
  const int B = std::min<int>(config.batch_size, static_cast<int>(n));

  auto save_periodic = [&](const std::string& tag) {
    if (options.checkpoint_dir.empty()) return;
    save_checkpoint(options.checkpoint_dir / tag, checkpoint);
  };

  TrainResult result;
  result.reason = StopReason::max_steps;

  while (state.step < config.max_steps) {
    DStepResult d_result;
    std::vector<int> indices(B);
    std::vector<PathologyLabel> labels(B);
    Tensor3 real;

    try {
      for (int k = 0; k < config.d_steps_per_g_step; ++k) {
        for (int i = 0; i < B; ++i) indices[i] = static_cast<int>(state.rng.below(n));
        real = sequences_to_tensor(train_split, indices);
        for (int i = 0; i < B; ++i) labels[i] = train_split[indices[i]].label;
        d_result = train_discriminator_step(d, g, real, labels, state.adam_d, config,
                                            state.rng);
        state.d_acc_ema = config.ema_decay * state.d_acc_ema +
                          (1.0 - config.ema_decay) * d_result.accuracy;
      }
      // generator update on the same batch as the last discriminator step
      GStepResult g_result =
          train_generator_step(g, d, real, labels, state.adam_g, config, state.rng);

      if (std::abs(d_result.loss) > config.divergence_threshold ||
          std::abs(g_result.adv) > config.divergence_threshold ||
          std::abs(g_result.rec) > config.divergence_threshold)
        throw DivergenceError("loss exceeded divergence threshold");

      ++state.step;
      state.history.push_back(
          {state.step, d_result.loss, g_result.adv, g_result.rec, state.d_acc_ema});
    } catch (const DivergenceError& e) {
      // keep the last good checkpoint rather than overwrite it with a broken model
      result.reason = StopReason::diverged;
      result.message = e.what();
      break;
    }

    if (options.verbose && state.step % options.log_every == 0) {
      const auto& rec = state.history.back();
      std::cerr << "step " << rec.step << "  l_d=" << rec.l_d << "  l_g_adv=" << rec.l_g_adv
                << "  l_rec=" << rec.l_rec << "  d_acc_ema=" << rec.d_acc_ema << "\n";
    }

    const bool in_band =
        state.d_acc_ema >= config.stop_band_low && state.d_acc_ema <= config.stop_band_high;
    state.band_steps = in_band ? state.band_steps + 1 : 0;
    if (state.band_steps >= config.stop_patience) {
      result.reason = StopReason::discriminator_equilibrium;
      result.message = "discriminator accuracy EMA stayed in [" +
                       std::to_string(config.stop_band_low) + ", " +
                       std::to_string(config.stop_band_high) + "] for " +
                       std::to_string(config.stop_patience) + " steps";
      save_periodic("step_" + std::to_string(state.step));
      break;
    }

    if (config.checkpoint_every > 0 && state.step % config.checkpoint_every == 0)
      save_periodic("step_" + std::to_string(state.step));
  }

  result.steps_run = state.step;
  if (result.reason != StopReason::diverged) save_periodic("final");
  if (!options.history_csv.empty()) write_history_csv(options.history_csv, state.history);
  return result;
}

}  // namespace pgcgan
