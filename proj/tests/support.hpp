#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pgcgan/data.hpp"
#include "pgcgan/model.hpp"
#include "pgcgan/rng.hpp"

namespace testsup {

namespace fs = std::filesystem;

// Unique scratch directory, removed on destruction.
struct TempDir {
  fs::path path;

  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("pgcgan_test_" + tag + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  fs::path operator/(const std::string& name) const { return path / name; }
};

inline void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p);
  out << content;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline pgcgan::VocabularyPtr vocab_abc() {
  return pgcgan::make_vocabulary({"alpha", "beta", "gamma"});
}

// Deterministic random sequence with the given shape and label.
inline pgcgan::GaitSequence make_seq(const pgcgan::VocabularyPtr& vocab, int label, int T,
                                     int d, std::uint64_t seed,
                                     const std::string& id = "") {
  pgcgan::Rng rng(seed);
  pgcgan::GaitSequence seq;
  seq.frames.resize(T, d);
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < d; ++j) seq.frames(t, j) = rng.normal();
  seq.label = {label, vocab};
  seq.subject_id = "s" + std::to_string(label);
  seq.id = id.empty() ? "seq_" + std::to_string(seed) : id;
  seq.source_length = T;
  return seq;
}

// n sequences per class over the full vocabulary.
inline std::vector<pgcgan::GaitSequence> random_set(const pgcgan::VocabularyPtr& vocab,
                                                    int per_class, int T, int d,
                                                    std::uint64_t seed) {
  std::vector<pgcgan::GaitSequence> out;
  std::uint64_t k = seed;
  for (int c = 0; c < vocab->size(); ++c)
    for (int i = 0; i < per_class; ++i)
      out.push_back(make_seq(vocab, c, T, d, ++k,
                             "r" + std::to_string(c) + "_" + std::to_string(i)));
  return out;
}

// Small generator/discriminator pair over the same shapes.
inline pgcgan::GeneratorConfig tiny_generator_config(int T = 8, int d = 3, int C = 2) {
  pgcgan::GeneratorConfig g;
  g.T = T;
  g.d = d;
  g.C = C;
  g.latent_dim = 4;
  g.encoder_channels = {6};
  g.decoder_channels = {6};
  g.kernel_size = 3;
  g.seed = 11;
  return g;
}

inline pgcgan::DiscriminatorConfig tiny_discriminator_config(int T = 8, int d = 3, int C = 2) {
  pgcgan::DiscriminatorConfig dc;
  dc.T = T;
  dc.d = d;
  dc.C = C;
  dc.conv_channels = {6, 8};
  dc.fc_widths = {5};
  dc.kernel_size = 3;
  dc.stride = 2;
  dc.seed = 13;
  return dc;
}

}  // namespace testsup
