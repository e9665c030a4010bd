#include "pgcgan/model.hpp"

#include <cmath>

namespace pgcgan {

void GeneratorConfig::validate() const {
  if (T < 1 || d < 1 || C < 2)
    throw ValidationError("generator config requires T >= 1, d >= 1, C >= 2");
  if (latent_dim < 1) throw ValidationError("latent_dim must be >= 1");
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw ValidationError("kernel_size must be odd");
  if (encoder_channels.empty() || decoder_channels.empty())
    throw ValidationError("encoder/decoder channel lists must be non-empty");
}

void DiscriminatorConfig::validate() const {
  if (T < 1 || d < 1 || C < 2)
    throw ValidationError("discriminator config requires T >= 1, d >= 1, C >= 2");
  if (conv_channels.empty()) throw ValidationError("conv_channels must be non-empty");
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw ValidationError("kernel_size must be odd");
  if (stride < 1) throw ValidationError("stride must be >= 1");
  int t = T;
  for (std::size_t i = 0; i < conv_channels.size(); ++i) {
    t = (t + 2 * ((kernel_size - 1) / 2) - kernel_size) / stride + 1;
    if (t < 1) throw ValidationError("discriminator conv stack collapses time below 1");
  }
}

GeneratorModel init_generator(const GeneratorConfig& config) {
  config.validate();
  GeneratorModel model;
  model.config = config;
  Rng rng = Rng::stream(config.seed, 0x67656eull);  // generator init stream

  int in = config.d;
  for (int ch : config.encoder_channels) {
    model.encoder.push_back(nn::make_conv1d(in, ch, config.kernel_size, 1, rng));
    in = ch;
  }
  model.encoder.push_back(nn::make_conv1d(in, config.latent_dim, config.kernel_size, 1, rng));

  in = config.latent_dim + config.C;
  for (int ch : config.decoder_channels) {
    model.decoder.push_back(nn::make_conv1d(in, ch, config.kernel_size, 1, rng));
    in = ch;
  }
  model.decoder.push_back(nn::make_conv1d(in, config.d, config.kernel_size, 1, rng));
  return model;
}

DiscriminatorModel init_discriminator(const DiscriminatorConfig& config) {
  config.validate();
  DiscriminatorModel model;
  model.config = config;
  Rng rng = Rng::stream(config.seed, 0x64697363ull);  // discriminator init stream

  int in = config.d + config.C;
  for (int ch : config.conv_channels) {
    SnConv1d layer;
    layer.conv = nn::make_conv1d(in, ch, config.kernel_size, config.stride, rng);
    layer.u.resize(ch);
    for (int i = 0; i < ch; ++i) layer.u(i) = rng.normal();
    layer.u.normalize();
    Eigen::VectorXd vt = layer.conv.weight.transpose() * layer.u;
    layer.v = vt.norm() > 0 ? Eigen::VectorXd(vt / vt.norm())
                            : Eigen::VectorXd::Zero(vt.size());
    model.convs.push_back(std::move(layer));
    in = ch;
  }

  for (int width : config.fc_widths) {
    model.fcs.push_back(nn::make_linear(in, width, rng));
    in = width;
  }
  model.fcs.push_back(nn::make_linear(in, 1, rng));
  return model;
}

std::vector<nn::ParamRef> generator_params(GeneratorModel& model) {
  std::vector<nn::ParamRef> out;
  for (std::size_t i = 0; i < model.encoder.size(); ++i) {
    out.push_back(nn::param_ref("g.enc" + std::to_string(i) + ".w", model.encoder[i].weight));
    out.push_back(nn::param_ref("g.enc" + std::to_string(i) + ".b", model.encoder[i].bias));
  }
  for (std::size_t i = 0; i < model.decoder.size(); ++i) {
    out.push_back(nn::param_ref("g.dec" + std::to_string(i) + ".w", model.decoder[i].weight));
    out.push_back(nn::param_ref("g.dec" + std::to_string(i) + ".b", model.decoder[i].bias));
  }
  return out;
}

std::vector<nn::ParamRef> discriminator_trainable_params(DiscriminatorModel& model) {
  std::vector<nn::ParamRef> out;
  for (std::size_t i = 0; i < model.convs.size(); ++i) {
    out.push_back(nn::param_ref("d.conv" + std::to_string(i) + ".w", model.convs[i].conv.weight));
    out.push_back(nn::param_ref("d.conv" + std::to_string(i) + ".b", model.convs[i].conv.bias));
  }
  for (std::size_t i = 0; i < model.fcs.size(); ++i) {
    out.push_back(nn::param_ref("d.fc" + std::to_string(i) + ".w", model.fcs[i].weight));
    out.push_back(nn::param_ref("d.fc" + std::to_string(i) + ".b", model.fcs[i].bias));
  }
  return out;
}

std::vector<nn::ParamRef> discriminator_params(DiscriminatorModel& model) {
  auto out = discriminator_trainable_params(model);
  for (std::size_t i = 0; i < model.convs.size(); ++i) {
    out.push_back(nn::param_ref("d.conv" + std::to_string(i) + ".u", model.convs[i].u));
    out.push_back(nn::param_ref("d.conv" + std::to_string(i) + ".v", model.convs[i].v));
  }
  return out;
}

bool params_finite(const std::vector<nn::ParamRef>& params) {
  for (const auto& p : params)
    for (std::size_t i = 0; i < p.size; ++i)
      if (!std::isfinite(p.data[i])) return false;
  return true;
}

Tensor3 sample_noise_values(int batch, int d, int T, Rng& rng) {
  Tensor3 out(batch, d, T);
  for (double& x : out.v) x = rng.normal();
  return out;
}

NoiseBatch sample_noise(int batch, const GeneratorConfig& config, std::uint64_t seed) {
  if (batch < 1) throw ValidationError("noise batch must be >= 1");
  NoiseBatch out;
  out.seed = seed;
  Rng rng = Rng::stream(seed, 0x6e6f697365ull);  // noise stream
  out.values = sample_noise_values(batch, config.d, config.T, rng);
  return out;
}

SpectralNormResult spectral_normalize(const Eigen::MatrixXd& weight,
                                      const Eigen::VectorXd& u, int steps) {
  if (steps < 1) throw ValidationError("spectral_normalize needs steps >= 1");
  if (u.size() != weight.rows())
    throw ContractError("spectral_normalize: u length must equal weight rows");

  SpectralNormResult res;
  res.u = u;
  if (res.u.norm() > 0) res.u.normalize();
  res.v = Eigen::VectorXd::Zero(weight.cols());

  for (int s = 0; s < steps; ++s) {
    Eigen::VectorXd vt = weight.transpose() * res.u;
    const double vn = vt.norm();
    if (vn <= kSigmaFloor) break;  // (near-)zero matrix: keep current estimates
    res.v = vt / vn;
    Eigen::VectorXd ut = weight * res.v;
    const double un = ut.norm();
    if (un <= kSigmaFloor) break;
    res.u = ut / un;
  }
  res.sigma = res.u.dot(weight * res.v);
  // Degenerate estimate (zero matrix, or u stuck orthogonal to the range):
  // floor sigma and leave the weight untouched rather than divide by ~0.
  res.normalized = res.sigma > kSigmaFloor ? Eigen::MatrixXd(weight / res.sigma) : weight;
  return res;
}

double frozen_sigma(const Eigen::MatrixXd& weight, const Eigen::VectorXd& u,
                    const Eigen::VectorXd& v) {
  return u.dot(weight * v);
}

// ---- generator --------------------------------------------------------------

namespace {

Tensor3 run_conv_stack(const std::vector<nn::Conv1d>& stack, const Tensor3& input,
                       bool last_linear, std::vector<ConvTrace>* trace) {
  Tensor3 x = input;
  for (std::size_t i = 0; i < stack.size(); ++i) {
    const bool relu = !(last_linear && i + 1 == stack.size());
    Tensor3 y = nn::conv1d_forward(stack[i], x, relu);
    if (trace) trace->push_back({x, y});
    x = std::move(y);
  }
  return x;
}

void check_labels(const std::vector<PathologyLabel>& labels, int batch, int C) {
  if (labels.empty()) throw ContractError("label list must be non-empty");
  if (static_cast<int>(labels.size()) != batch && labels.size() != 1)
    throw ContractError("label count " + std::to_string(labels.size()) +
                        " does not match batch " + std::to_string(batch));
  for (const auto& label : labels)
    if (label.index < 0 || label.index >= C)
      throw ContractError("label index " + std::to_string(label.index) + " outside [0, " +
                          std::to_string(C) + ")");
}

}  // namespace

Tensor3 encode(const GeneratorModel& model, const Tensor3& noise, GeneratorCache* cache) {
  noise.require_shape(noise.batch, model.config.d, model.config.T, "encode input");
  Tensor3 latent = run_conv_stack(model.encoder, noise, /*last_linear=*/false,
                                  cache ? &cache->encoder : nullptr);
  if (cache) cache->latent = latent;
  return latent;
}

Tensor3 condition_latent(const Tensor3& latent, const std::vector<PathologyLabel>& labels,
                         int num_classes) {
  check_labels(labels, latent.batch, num_classes);
  Tensor3 out(latent.batch, latent.channels + num_classes, latent.time);
  for (int b = 0; b < latent.batch; ++b) {
    const int cls = labels[labels.size() == 1 ? 0 : b].index;
    for (int c = 0; c < latent.channels; ++c)
      for (int t = 0; t < latent.time; ++t) out.at(b, c, t) = latent.at(b, c, t);
    for (int t = 0; t < latent.time; ++t) out.at(b, latent.channels + cls, t) = 1.0;
  }
  return out;
}

Tensor3 decode(const GeneratorModel& model, const Tensor3& conditioned, GeneratorCache* cache) {
  const int expect = model.config.latent_dim + model.config.C;
  if (conditioned.channels != expect)
    throw ContractError("decode: conditioned latent has " + std::to_string(conditioned.channels) +
                        " channels, expected " + std::to_string(expect));
  Tensor3 out = run_conv_stack(model.decoder, conditioned, /*last_linear=*/true,
                               cache ? &cache->decoder : nullptr);
  if (cache) cache->output = out;
  return out;
}

Tensor3 generator_forward(const GeneratorModel& model, const Tensor3& noise,
                          const std::vector<PathologyLabel>& labels, GeneratorCache* cache) {
  Tensor3 latent = encode(model, noise, cache);
  Tensor3 conditioned = condition_latent(latent, labels, model.config.C);
  if (cache) cache->conditioned = conditioned;
  return decode(model, conditioned, cache);
}

Tensor3 generate(const GeneratorModel& model, const std::vector<PathologyLabel>& labels,
                 std::uint64_t seed) {
  if (labels.empty()) throw ValidationError("generate: labels must be non-empty");
  NoiseBatch noise = sample_noise(static_cast<int>(labels.size()), model.config, seed);
  return generator_forward(model, noise.values, labels);
}

void generator_backward(const GeneratorModel& model, const GeneratorCache& cache,
                        const Tensor3& doutput, nn::GradMap& dparams) {
  if (cache.decoder.size() != model.decoder.size() ||
      cache.encoder.size() != model.encoder.size())
    throw ContractError("generator_backward: cache does not match model");

  Eigen::MatrixXd dw;
  Eigen::VectorXd db;

  // decoder (last layer linear, others ReLU)
  Tensor3 grad = doutput;
  for (int i = static_cast<int>(model.decoder.size()) - 1; i >= 0; --i) {
    const bool relu = (i + 1 != static_cast<int>(model.decoder.size()));
    const auto& trace = cache.decoder[i];
    Tensor3 dx = nn::conv1d_backward(model.decoder[i], trace.input, trace.output, grad, relu,
                                     &dw, &db, /*want_dx=*/true);
    dparams.add("g.dec" + std::to_string(i) + ".w", dw);
    dparams.add("g.dec" + std::to_string(i) + ".b", db);
    grad = std::move(dx);
  }

  // drop the one-hot channels appended by condition_latent
  Tensor3 dlatent(grad.batch, model.config.latent_dim, grad.time);
  for (int b = 0; b < grad.batch; ++b)
    for (int c = 0; c < model.config.latent_dim; ++c)
      for (int t = 0; t < grad.time; ++t) dlatent.at(b, c, t) = grad.at(b, c, t);

  grad = std::move(dlatent);
  for (int i = static_cast<int>(model.encoder.size()) - 1; i >= 0; --i) {
    const auto& trace = cache.encoder[i];
    const bool want_dx = i > 0;
    Tensor3 dx = nn::conv1d_backward(model.encoder[i], trace.input, trace.output, grad,
                                     /*relu=*/true, &dw, &db, want_dx);
    dparams.add("g.enc" + std::to_string(i) + ".w", dw);
    dparams.add("g.enc" + std::to_string(i) + ".b", db);
    if (want_dx) grad = std::move(dx);
  }
}

// ---- discriminator ----------------------------------------------------------

namespace {

Eigen::VectorXd disc_forward_impl(const DiscriminatorModel& model, const Tensor3& sequences,
                                  const std::vector<PathologyLabel>& labels,
                                  const std::vector<Eigen::MatrixXd>& w_hat,
                                  const std::vector<double>& sigma,
                                  DiscriminatorCache* cache) {
  const auto& cfg = model.config;
  sequences.require_shape(sequences.batch, cfg.d, cfg.T, "discriminator input");
  check_labels(labels, sequences.batch, cfg.C);

  // append one-hot label channels, constant along time
  Tensor3 x(sequences.batch, cfg.d + cfg.C, cfg.T);
  for (int b = 0; b < sequences.batch; ++b) {
    const int cls = labels[labels.size() == 1 ? 0 : b].index;
    for (int c = 0; c < cfg.d; ++c)
      for (int t = 0; t < cfg.T; ++t) x.at(b, c, t) = sequences.at(b, c, t);
    for (int t = 0; t < cfg.T; ++t) x.at(b, cfg.d + cls, t) = 1.0;
  }
  if (cache) {
    cache->input = x;
    cache->w_hat = w_hat;
    cache->sigma = sigma;
    cache->convs.clear();
    cache->fc_in.clear();
  }

  for (std::size_t i = 0; i < model.convs.size(); ++i) {
    nn::Conv1d effective = model.convs[i].conv;
    effective.weight = w_hat[i];
    Tensor3 y = nn::conv1d_forward(effective, x, /*relu=*/true);
    if (cache) cache->convs.push_back({x, y});
    x = std::move(y);
  }

  // global average over time
  Eigen::MatrixXd pooled(x.channels, x.batch);
  for (int b = 0; b < x.batch; ++b)
    for (int c = 0; c < x.channels; ++c) {
      double s = 0.0;
      for (int t = 0; t < x.time; ++t) s += x.at(b, c, t);
      pooled(c, b) = s / x.time;
    }
  if (cache) cache->pooled = pooled;

  Eigen::MatrixXd h = pooled;
  for (std::size_t i = 0; i < model.fcs.size(); ++i) {
    if (cache) cache->fc_in.push_back(h);
    Eigen::MatrixXd z = (model.fcs[i].weight * h).colwise() + model.fcs[i].bias;
    if (i + 1 < model.fcs.size()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }

  Eigen::VectorXd logits = h.row(0).transpose();
  Eigen::VectorXd scores = (1.0 / (1.0 + (-logits.array()).exp())).matrix();
  if (cache) {
    cache->logits = logits;
    cache->scores = scores;
  }
  return scores;
}

}  // namespace

Eigen::VectorXd discriminate(const DiscriminatorModel& model, const Tensor3& sequences,
                             const std::vector<PathologyLabel>& labels,
                             DiscriminatorCache* cache) {
  std::vector<Eigen::MatrixXd> w_hat;
  std::vector<double> sigma;
  for (const auto& layer : model.convs) {
    const double s = frozen_sigma(layer.conv.weight, layer.u, layer.v);
    sigma.push_back(std::max(s, kSigmaFloor));
    w_hat.push_back(s > kSigmaFloor ? Eigen::MatrixXd(layer.conv.weight / s)
                                    : layer.conv.weight);
  }
  return disc_forward_impl(model, sequences, labels, w_hat, sigma, cache);
}

Eigen::VectorXd discriminate_train(DiscriminatorModel& model, const Tensor3& sequences,
                                   const std::vector<PathologyLabel>& labels,
                                   DiscriminatorCache& cache, int power_steps) {
  std::vector<Eigen::MatrixXd> w_hat;
  std::vector<double> sigma;
  for (auto& layer : model.convs) {
    SpectralNormResult res = spectral_normalize(layer.conv.weight, layer.u, power_steps);
    layer.u = res.u;
    layer.v = res.v;
    sigma.push_back(std::max(res.sigma, kSigmaFloor));
    w_hat.push_back(std::move(res.normalized));
  }
  return disc_forward_impl(model, sequences, labels, w_hat, sigma, &cache);
}

Tensor3 discriminator_backward(const DiscriminatorModel& model, const DiscriminatorCache& cache,
                               const Eigen::VectorXd& dscores, nn::GradMap* dparams,
                               bool want_dinput) {
  const int B = static_cast<int>(dscores.size());
  if (cache.scores.size() != B)
    throw ContractError("discriminator_backward: cache does not match gradient size");

  // sigmoid
  Eigen::VectorXd dlogits =
      dscores.array() * cache.scores.array() * (1.0 - cache.scores.array());

  // fully connected stack
  Eigen::MatrixXd dh = dlogits.transpose();  // 1 x B
  for (int i = static_cast<int>(model.fcs.size()) - 1; i >= 0; --i) {
    const Eigen::MatrixXd& input = cache.fc_in[i];
    if (i + 1 < static_cast<int>(model.fcs.size())) {
      // this layer's post-ReLU output was cached as the next layer's input
      dh = (cache.fc_in[i + 1].array() > 0.0).cast<double>() * dh.array();
    }
    if (dparams) {
      dparams->add("d.fc" + std::to_string(i) + ".w", Eigen::MatrixXd(dh * input.transpose()));
      dparams->add("d.fc" + std::to_string(i) + ".b", Eigen::VectorXd(dh.rowwise().sum()));
    }
    dh = model.fcs[i].weight.transpose() * dh;
  }

  // un-pool the global time average
  const auto& last = cache.convs.back().output;
  Tensor3 grad(last.batch, last.channels, last.time);
  for (int b = 0; b < last.batch; ++b)
    for (int c = 0; c < last.channels; ++c) {
      const double g = dh(c, b) / last.time;
      for (int t = 0; t < last.time; ++t) grad.at(b, c, t) = g;
    }

  // conv stack with spectral normalization chain rule
  Eigen::MatrixXd dw_hat;
  Eigen::VectorXd db;
  for (int i = static_cast<int>(model.convs.size()) - 1; i >= 0; --i) {
    const auto& layer = model.convs[i];
    const auto& trace = cache.convs[i];
    nn::Conv1d effective = layer.conv;
    effective.weight = cache.w_hat[i];
    const bool want_dx = want_dinput || i > 0;
    Tensor3 dx = nn::conv1d_backward(effective, trace.input, trace.output, grad, /*relu=*/true,
                                     dparams ? &dw_hat : nullptr, dparams ? &db : nullptr,
                                     want_dx);
    if (dparams) {
      // W_hat = W / sigma with sigma = u' W v (u, v treated as constants):
      // dW = (dW_hat - <dW_hat, W_hat> u v') / sigma
      const double inner = (dw_hat.array() * cache.w_hat[i].array()).sum();
      Eigen::MatrixXd dweight =
          (dw_hat - inner * (layer.u * layer.v.transpose())) / cache.sigma[i];
      dparams->add("d.conv" + std::to_string(i) + ".w", dweight);
      dparams->add("d.conv" + std::to_string(i) + ".b", db);
    }
    if (want_dx) grad = std::move(dx);
  }

  if (!want_dinput) return {};

  // keep only the d data channels; the one-hot channels are constants
  Tensor3 dinput(grad.batch, model.config.d, grad.time);
  for (int b = 0; b < grad.batch; ++b)
    for (int c = 0; c < model.config.d; ++c)
      for (int t = 0; t < grad.time; ++t) dinput.at(b, c, t) = grad.at(b, c, t);
  return dinput;
}

}  // namespace pgcgan
