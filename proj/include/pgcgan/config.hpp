#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pgcgan/data.hpp"
#include "pgcgan/training.hpp"

namespace pgcgan {

// Merged configuration tree for the command-line pipeline. Every field has a
// built-in default; a config file overrides defaults and dotted command-line
// flags override the file. Unknown keys are rejected by full dotted path.
struct RunConfig {
  std::uint64_t seed = 0;
  bool seed_explicit = false;  // set when a file or flag provided the seed

  struct Data {
    DataFormat format = DataFormat::csv;  // raw input format for ingest
    int min_length = 60;
    int window = 60;
    WindowPolicy window_policy = WindowPolicy::center_crop;
    double test_fraction = 0.2;
  } data;

  struct Model {
    int latent_dim = 32;
    std::vector<int> encoder_channels{64, 64};
    std::vector<int> decoder_channels{64, 64};
    int kernel_size = 5;
    std::vector<int> disc_channels{64, 128, 128};
    std::vector<int> disc_fc{64};
    int disc_stride = 2;
  } model;

  TrainingConfig training;

  struct Synthesis {
    int per_class = 100;                // used when counts is empty
    std::map<std::string, int> counts;  // explicit per-class counts
    bool denormalize = true;
    DataFormat format = DataFormat::jsonl;
  } synthesis;

  struct Evaluation {
    int pca_components = 50;
    double perplexity = 30.0;
    int tsne_iters = 1000;
    int max_points_per_side = 1000;
  } evaluation;

  struct Classify {
    std::vector<std::string> models{"gru", "lstm", "cnn"};
    int hidden = 128;
    int layers = 2;
    std::vector<int> conv_channels{64, 128, 128};
    int kernel_size = 5;
    int conv_stride = 2;
    double dropout = 0.3;
    double learning_rate = 1e-3;
    int epochs = 50;
    int batch_size = 64;
    double baseline = 90.13;
  } classify;
};

// Defaults overridden by the JSON document in `text`. Unknown keys throw a
// ValidationError naming the dotted path; wrong value types name the key too.
RunConfig parse_run_config(const std::string& text);

// Reads and parses `file`; an empty path returns pure defaults.
RunConfig load_run_config(const std::filesystem::path& file);

// One dotted override, e.g. ("training.max_steps", "500"). The value is
// parsed as JSON when possible and taken as a bare string otherwise.
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

// The full tree with current values; parses back identically.
std::string run_config_to_json(const RunConfig& config);

}  // namespace pgcgan
