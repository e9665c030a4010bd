#include "pgcgan/synthesis.hpp"

namespace fs = std::filesystem;

namespace pgcgan {

int SynthesisRequest::total() const {
  int n = 0;
  for (const auto& [name, count] : counts) n += count;
  return n;
}

void SynthesisRequest::validate(const Vocabulary& vocabulary) const {
  for (const auto& [name, count] : counts) {
    if (vocabulary.index_of(name) < 0)
      throw ValidationError("unknown class '" + name + "' in synthesis request");
    if (count < 0)
      throw ValidationError("negative count for class '" + name + "'");
  }
  if (total() < 1) throw ValidationError("synthesis request asks for zero sequences");
}

SynthesisRequest balanced_request(const Vocabulary& vocabulary, int per_class,
                                  std::uint64_t seed) {
  SynthesisRequest request;
  request.seed = seed;
  for (const auto& name : vocabulary.names) request.counts[name] = per_class;
  return request;
}

std::vector<GaitSequence> synthesize(const Checkpoint& checkpoint,
                                     const SynthesisRequest& request) {
  if (!checkpoint.vocabulary || checkpoint.vocabulary->size() == 0)
    throw ValidationError("checkpoint has no class vocabulary");
  const Vocabulary& vocab = *checkpoint.vocabulary;
  request.validate(vocab);

  const GeneratorConfig& gc = checkpoint.generator.config;
  const bool can_denorm = request.denormalize && checkpoint.normalization.mean.size() == gc.d;

  std::vector<GaitSequence> out;
  out.reserve(static_cast<std::size_t>(request.total()));
  for (int c = 0; c < vocab.size(); ++c) {
    const auto it = request.counts.find(vocab.names[c]);
    const int n = it == request.counts.end() ? 0 : it->second;
    if (n == 0) continue;

    Rng rng = Rng::stream(request.seed, static_cast<std::uint64_t>(c));
    Tensor3 noise = sample_noise_values(n, gc.d, gc.T, rng);
    std::vector<PathologyLabel> labels{{c, checkpoint.vocabulary}};
    Tensor3 batch = generator_forward(checkpoint.generator, noise, labels);
    if (!batch.all_finite())
      throw DivergenceError("generator produced non-finite values for class '" +
                            vocab.names[c] + "'");

    std::vector<Eigen::MatrixXd> frames = tensor_to_frames(batch);
    for (int i = 0; i < n; ++i) {
      GaitSequence seq;
      seq.frames = std::move(frames[i]);
      if (can_denorm) {
        for (int j = 0; j < gc.d; ++j)
          seq.frames.col(j) = seq.frames.col(j).array() * checkpoint.normalization.stddev(j) +
                              checkpoint.normalization.mean(j);
      }
      seq.label = {c, checkpoint.vocabulary};
      seq.subject_id = "synthetic";
      seq.id = "syn_" + vocab.names[c] + "_" + std::to_string(i);
      seq.source_length = gc.T;
      seq.synthetic = true;
      out.push_back(std::move(seq));
    }
  }
  return out;
}

DatasetManifest export_dataset(const std::vector<GaitSequence>& sequences, const fs::path& dir,
                               DataFormat format, bool stored_normalized,
                               const NormalizationStats* stats) {
  if (sequences.empty()) throw ValidationError("nothing to export");
  fs::create_directories(dir);

  DatasetManifest manifest;
  manifest.d = sequences.front().dims();
  manifest.T = sequences.front().length();
  manifest.min_length_filter = manifest.T;
  manifest.test_fraction = 0.0;
  manifest.stored_normalized = stored_normalized;
  manifest.data_format = format;
  if (stats) {
    manifest.norm_mean = stats->mean;
    manifest.norm_std = stats->stddev;
  }

  bool all_synthetic = true;
  std::map<std::string, int> counts;
  for (const auto& seq : sequences) {
    counts[seq.label.name()] += 1;
    all_synthetic = all_synthetic && seq.synthetic;
    manifest.split[seq.id] = "train";
  }
  manifest.synthetic = all_synthetic;
  manifest.counts = counts;
  if (sequences.front().label.vocabulary)
    manifest.vocabulary = sequences.front().label.vocabulary->names;
  else
    for (const auto& [name, count] : counts) manifest.vocabulary.push_back(name);

  const std::string data_name = format == DataFormat::csv ? "data" : "data.jsonl";
  save_dataset(sequences, dir / data_name, format);
  manifest.files["train"] = data_name;

  save_manifest(manifest, dir / "manifest.json");
  return manifest;
}

}  // namespace pgcgan
