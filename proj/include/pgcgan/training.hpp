#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pgcgan/data.hpp"
#include "pgcgan/model.hpp"
#include "pgcgan/nn.hpp"
#include "pgcgan/rng.hpp"

namespace pgcgan {

struct TrainingConfig {
  double lambda_adv = 1.0;
  double lambda_rec = 10.0;
  double learning_rate_g = 2e-4;
  double learning_rate_d = 2e-4;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  int batch_size = 64;
  int max_steps = 2000;
  int d_steps_per_g_step = 1;
  std::uint64_t seed = 0;

  // stopping heuristic: halt once the EMA of discriminator accuracy sits in
  // [stop_band_low, stop_band_high] for stop_patience consecutive steps
  double ema_decay = 0.99;
  double stop_band_low = 0.45;
  double stop_band_high = 0.55;
  int stop_patience = 500;

  double divergence_threshold = 1e6;
  int checkpoint_every = 500;

  void validate() const;
};

struct StepRecord {
  long step = 0;
  double l_d = 0.0;
  double l_g_adv = 0.0;
  double l_rec = 0.0;
  double d_acc_ema = 0.0;
};

struct TrainingState {
  long step = 0;
  Rng rng{0};
  double d_acc_ema = 0.5;
  int band_steps = 0;
  nn::Adam adam_g, adam_d;
  std::vector<StepRecord> history;

  static TrainingState init(const TrainingConfig& config);
};

// ---- losses -----------------------------------------------------------------

// Scores are clamped to [kScoreEps, 1 - kScoreEps] inside every log.
inline constexpr double kScoreEps = 1e-7;

// Negated value of the adversarial objective, batch-averaged:
// -mean(log real) - mean(log(1 - fake)).
double discriminator_loss(const Eigen::VectorXd& real_scores,
                          const Eigen::VectorXd& fake_scores);

// Non-saturating generator term: -mean(log fake).
double generator_adversarial_loss(const Eigen::VectorXd& fake_scores);

// Mean squared error over all batch*T*d elements.
double reconstruction_loss(const Tensor3& real_batch, const Tensor3& fake_batch);

// lambda_adv * adv + lambda_rec * rec, exactly.
double generator_loss(double adv, double rec, const TrainingConfig& config);

// ---- checkpoints ------------------------------------------------------------

// A trained (or training) model pair plus everything needed to use it:
// vocabulary, the train-split normalization, and optionally the optimizer
// state for exact resume.
struct Checkpoint {
  GeneratorModel generator;
  DiscriminatorModel discriminator;
  VocabularyPtr vocabulary;
  NormalizationStats normalization;
  std::optional<TrainingState> state;
};

// Directory layout: config.json plus one raw little-endian double array per
// named parameter (and per optimizer moment when state is present). The
// directory is self-contained; loading needs nothing else.
void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

// ---- training steps ---------------------------------------------------------

struct DStepResult {
  double loss = 0.0;
  double accuracy = 0.0;  // fraction of real > 0.5 and fake < 0.5
};

// One Adam step on the discriminator; the generator only runs forward.
DStepResult train_discriminator_step(DiscriminatorModel& d_model,
                                     const GeneratorModel& g_model, const Tensor3& real_batch,
                                     const std::vector<PathologyLabel>& labels,
                                     nn::Adam& adam_d, const TrainingConfig& config, Rng& rng);

struct GStepResult {
  double adv = 0.0;
  double rec = 0.0;
};

// One Adam step on the generator; gradients flow through the frozen
// discriminator (its parameters and power-iteration state are untouched).
GStepResult train_generator_step(GeneratorModel& g_model, const DiscriminatorModel& d_model,
                                 const Tensor3& real_batch,
                                 const std::vector<PathologyLabel>& labels, nn::Adam& adam_g,
                                 const TrainingConfig& config, Rng& rng);

// ---- training loop ----------------------------------------------------------

enum class StopReason { max_steps, discriminator_equilibrium, diverged };

const char* to_string(StopReason reason);

struct TrainOptions {
  std::filesystem::path checkpoint_dir;  // empty disables periodic checkpoints
  std::filesystem::path history_csv;     // empty disables the CSV
  bool verbose = false;
  int log_every = 100;
};

struct TrainResult {
  StopReason reason = StopReason::max_steps;
  long steps_run = 0;
  std::string message;
};

// Alternating optimization over a windowed, normalized train split. Batches
// are drawn uniformly with replacement from checkpoint.state->rng, which makes
// resume-from-checkpoint reproduce the interrupted run exactly.
TrainResult train(Checkpoint& checkpoint, const std::vector<GaitSequence>& train_split,
                  const TrainingConfig& config, const TrainOptions& options = {});

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<StepRecord>& history);

}  // namespace pgcgan
