#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "pgcgan/data.hpp"
#include "pgcgan/nn.hpp"
#include "pgcgan/tensor.hpp"

namespace pgcgan {

// Generator hyperparameters. Encoder maps d -> encoder_channels... -> latent_dim
// (ReLU throughout); decoder maps latent_dim + C -> decoder_channels... -> d with
// a linear output layer. All convolutions are stride 1 and shape preserving.
struct GeneratorConfig {
  int T = 60;
  int d = 0;
  int C = 0;
  int latent_dim = 32;
  std::vector<int> encoder_channels{64, 64};
  std::vector<int> decoder_channels{64, 64};
  int kernel_size = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GeneratorModel {
  GeneratorConfig config;
  std::vector<nn::Conv1d> encoder;  // d -> ec[0] -> ... -> latent_dim
  std::vector<nn::Conv1d> decoder;  // latent_dim + C -> dc[0] -> ... -> d
};

// Discriminator: spectrally normalized strided conv blocks over d + C input
// channels, global average over time, then fully connected layers into a
// sigmoid score.
struct DiscriminatorConfig {
  int T = 60;
  int d = 0;
  int C = 0;
  std::vector<int> conv_channels{64, 128, 128};
  std::vector<int> fc_widths{64};  // hidden widths; the final width-1 head is implied
  int kernel_size = 5;
  int stride = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

// Conv layer with persistent power-iteration state. u and v estimate the top
// singular pair of the 2D-reshaped weight; they are training state and only
// advance under the training writer.
struct SnConv1d {
  nn::Conv1d conv;
  Eigen::VectorXd u, v;
};

struct DiscriminatorModel {
  DiscriminatorConfig config;
  std::vector<SnConv1d> convs;
  std::vector<nn::Linear> fcs;  // hidden layers (ReLU) then width-1 head (sigmoid)
};

GeneratorModel init_generator(const GeneratorConfig& config);
DiscriminatorModel init_discriminator(const DiscriminatorConfig& config);

std::vector<nn::ParamRef> generator_params(GeneratorModel& model);
// Includes the u/v power-iteration vectors so checkpoints round-trip exactly.
std::vector<nn::ParamRef> discriminator_params(DiscriminatorModel& model);
// Subset actually updated by the optimizer (weights and biases, not u/v).
std::vector<nn::ParamRef> discriminator_trainable_params(DiscriminatorModel& model);

bool params_finite(const std::vector<nn::ParamRef>& params);

struct NoiseBatch {
  Tensor3 values;  // batch x d x T, standard normal
  std::uint64_t seed = 0;
};

NoiseBatch sample_noise(int batch, const GeneratorConfig& config, std::uint64_t seed);
// Draws from an already-positioned stream; used inside the training loop.
Tensor3 sample_noise_values(int batch, int d, int T, Rng& rng);

// ---- spectral normalization -------------------------------------------------

inline constexpr double kSigmaFloor = 1e-12;

struct SpectralNormResult {
  Eigen::MatrixXd normalized;
  Eigen::VectorXd u, v;
  double sigma = 0.0;
};

// Power iteration estimate of the top singular value; normalized = weight / sigma.
// `steps` >= 1, `u` unit norm (any nonzero vector is renormalized).
SpectralNormResult spectral_normalize(const Eigen::MatrixXd& weight,
                                      const Eigen::VectorXd& u, int steps);

// sigma from frozen u/v without advancing the power iteration.
double frozen_sigma(const Eigen::MatrixXd& weight, const Eigen::VectorXd& u,
                    const Eigen::VectorXd& v);

// ---- forward passes ---------------------------------------------------------

struct ConvTrace {
  Tensor3 input;
  Tensor3 output;  // post-activation
};

struct GeneratorCache {
  std::vector<ConvTrace> encoder;
  std::vector<ConvTrace> decoder;
  Tensor3 latent;       // post-encoder (B x latent_dim x T)
  Tensor3 conditioned;  // latent with one-hot channels appended
  Tensor3 output;       // B x d x T
};

Tensor3 encode(const GeneratorModel& model, const Tensor3& noise,
               GeneratorCache* cache = nullptr);

// Appends C one-hot channels, each constant along time. labels.size() must be
// 1 (broadcast) or match the batch.
Tensor3 condition_latent(const Tensor3& latent, const std::vector<PathologyLabel>& labels,
                         int num_classes);

Tensor3 decode(const GeneratorModel& model, const Tensor3& conditioned,
               GeneratorCache* cache = nullptr);

// Full generator pass over explicit noise. With a cache, records everything
// needed for generator_backward.
Tensor3 generator_forward(const GeneratorModel& model, const Tensor3& noise,
                          const std::vector<PathologyLabel>& labels,
                          GeneratorCache* cache = nullptr);

// decode(condition(encode(noise))) with noise drawn from `seed`; row i is
// conditioned on labels[i].
Tensor3 generate(const GeneratorModel& model, const std::vector<PathologyLabel>& labels,
                 std::uint64_t seed);

struct DiscriminatorCache {
  Tensor3 input;  // B x (d + C) x T
  std::vector<ConvTrace> convs;
  std::vector<Eigen::MatrixXd> w_hat;  // normalized conv weights used this pass
  std::vector<double> sigma;
  Eigen::MatrixXd pooled;               // channels x B
  std::vector<Eigen::MatrixXd> fc_in;   // input to each fc layer (per column sample)
  Eigen::VectorXd logits;               // B
  Eigen::VectorXd scores;               // B in (0, 1)
};

// Scores B sequences conditioned on their labels. Never mutates the model;
// spectral normalization uses the stored (frozen) u/v state.
Eigen::VectorXd discriminate(const DiscriminatorModel& model, const Tensor3& sequences,
                             const std::vector<PathologyLabel>& labels,
                             DiscriminatorCache* cache = nullptr);

// Training-mode forward: advances each layer's power iteration by
// `power_steps` before normalizing. Requires the training writer.
Eigen::VectorXd discriminate_train(DiscriminatorModel& model, const Tensor3& sequences,
                                   const std::vector<PathologyLabel>& labels,
                                   DiscriminatorCache& cache, int power_steps = 1);

// ---- backward passes --------------------------------------------------------

// dscores -> parameter grads (when dparams given) and/or dL/d(input sequence
// channels) (when want_dinput). The one-hot channels' gradient is dropped.
Tensor3 discriminator_backward(const DiscriminatorModel& model, const DiscriminatorCache& cache,
                               const Eigen::VectorXd& dscores, nn::GradMap* dparams,
                               bool want_dinput);

// doutput (B x d x T) -> generator parameter grads.
void generator_backward(const GeneratorModel& model, const GeneratorCache& cache,
                        const Tensor3& doutput, nn::GradMap& dparams);

}  // namespace pgcgan
