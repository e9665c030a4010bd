#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pgcgan/data.hpp"
#include "pgcgan/training.hpp"

namespace pgcgan {

struct SynthesisRequest {
  std::map<std::string, int> counts;  // class name -> how many; absent means 0
  std::uint64_t seed = 0;
  bool denormalize = true;
  DataFormat format = DataFormat::jsonl;

  int total() const;
  void validate(const Vocabulary& vocabulary) const;
};

// Generates the requested number of sequences per class, grouped in vocabulary
// order. Each class draws from its own seed-derived stream, so per-class output
// does not depend on the other classes' counts. Deterministic given the seed.
std::vector<GaitSequence> synthesize(const Checkpoint& checkpoint,
                                     const SynthesisRequest& request);

// Convenience: the same count for every class in the vocabulary.
SynthesisRequest balanced_request(const Vocabulary& vocabulary, int per_class,
                                  std::uint64_t seed);

// Writes `dir/manifest.json` plus the data files (data.jsonl, or a data/
// directory of CSV pairs). The manifest lists every sequence under the train
// split; synthetic data never becomes test data. When the sequences are still
// in normalized space, pass the statistics so readers can invert them.
DatasetManifest export_dataset(const std::vector<GaitSequence>& sequences,
                               const std::filesystem::path& dir, DataFormat format,
                               bool stored_normalized = false,
                               const NormalizationStats* stats = nullptr);

}  // namespace pgcgan
