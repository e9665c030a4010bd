#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "pgcgan/classify.hpp"
#include "pgcgan/config.hpp"
#include "pgcgan/data.hpp"
#include "pgcgan/evaluation.hpp"
#include "pgcgan/model.hpp"
#include "pgcgan/synthesis.hpp"
#include "pgcgan/toy.hpp"
#include "pgcgan/training.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace pgcgan;

namespace {

RunConfig config_from_json(const std::string& text) {
  return text.empty() ? RunConfig{} : parse_run_config(text);
}

GeneratorConfig generator_config(const RunConfig& run, const DatasetManifest& manifest) {
  GeneratorConfig g;
  g.T = manifest.T;
  g.d = manifest.d;
  g.C = static_cast<int>(manifest.vocabulary.size());
  g.latent_dim = run.model.latent_dim;
  g.encoder_channels = run.model.encoder_channels;
  g.decoder_channels = run.model.decoder_channels;
  g.kernel_size = run.model.kernel_size;
  g.seed = run.seed;
  return g;
}

DiscriminatorConfig discriminator_config(const RunConfig& run, const DatasetManifest& manifest) {
  DiscriminatorConfig d;
  d.T = manifest.T;
  d.d = manifest.d;
  d.C = static_cast<int>(manifest.vocabulary.size());
  d.conv_channels = run.model.disc_channels;
  d.fc_widths = run.model.disc_fc;
  d.kernel_size = run.model.kernel_size;
  d.stride = run.model.disc_stride;
  d.seed = run.seed;
  return d;
}

NormalizationStats manifest_stats(const DatasetManifest& manifest, const std::string& which) {
  if (manifest.norm_mean.size() != manifest.d || manifest.norm_std.size() != manifest.d)
    throw ValidationError(which + " manifest carries no normalization statistics");
  return {manifest.norm_mean, manifest.norm_std};
}

std::vector<GaitSequence> to_data_units(const ManifestedDataset& ds, const std::string& which) {
  std::vector<GaitSequence> seqs = ds.all();
  if (ds.manifest.stored_normalized)
    return denormalize(seqs, manifest_stats(ds.manifest, which));
  return seqs;
}

py::dict py_ingest(const fs::path& raw_path, const fs::path& out_dir,
                   const std::string& config_json) {
  const RunConfig run = config_from_json(config_json);
  IngestOptions opt;
  opt.in_format = run.data.format;
  opt.min_length = run.data.min_length;
  opt.window = run.data.window;
  opt.policy = run.data.window_policy;
  opt.test_fraction = run.data.test_fraction;
  opt.seed = run.seed;
  const ManifestedDataset ds = ingest(raw_path, out_dir, opt);

  py::dict out;
  out["total"] = ds.manifest.total_count();
  out["train"] = ds.train.size();
  out["test"] = ds.test.size();
  out["d"] = ds.manifest.d;
  out["T"] = ds.manifest.T;
  out["classes"] = ds.manifest.vocabulary;
  out["manifest"] = (out_dir / "manifest.json").string();
  return out;
}

py::dict py_train(const fs::path& manifest_path, const fs::path& out_dir,
                  const std::string& config_json) {
  const RunConfig run = config_from_json(config_json);
  const ManifestedDataset ds = load_manifested_dataset(manifest_path);
  if (ds.train.empty()) throw ValidationError("manifest has no train split");

  std::vector<GaitSequence> train_split = ds.train;
  const NormalizationStats stats = manifest_stats(ds.manifest, "train");
  if (!ds.manifest.stored_normalized) train_split = normalize(train_split, stats);

  Checkpoint ckpt;
  ckpt.generator = init_generator(generator_config(run, ds.manifest));
  ckpt.discriminator = init_discriminator(discriminator_config(run, ds.manifest));
  ckpt.vocabulary = ds.vocabulary;
  ckpt.normalization = stats;

  TrainingConfig tc = run.training;
  tc.seed = run.seed;

  fs::create_directories(out_dir);
  TrainOptions opts;
  opts.checkpoint_dir = out_dir / "checkpoints";
  opts.history_csv = out_dir / "history.csv";
  opts.log_every = 0;
  const TrainResult res = train(ckpt, train_split, tc, opts);

  py::dict out;
  out["steps"] = res.steps_run;
  out["reason"] = to_string(res.reason);
  out["message"] = res.message;
  out["history"] = (out_dir / "history.csv").string();
  if (res.reason != StopReason::diverged)
    out["checkpoint"] = (out_dir / "checkpoints" / "final").string();
  return out;
}

py::dict py_synthesize(const fs::path& checkpoint_dir, const fs::path& out_dir,
                       const std::string& config_json) {
  const RunConfig run = config_from_json(config_json);
  const Checkpoint ckpt = load_checkpoint(checkpoint_dir);
  if (!ckpt.vocabulary) throw ValidationError("checkpoint has no class vocabulary");

  SynthesisRequest req;
  if (!run.synthesis.counts.empty())
    req.counts = run.synthesis.counts;
  else
    req = balanced_request(*ckpt.vocabulary, run.synthesis.per_class, run.seed);
  req.seed = run.seed;
  req.denormalize = run.synthesis.denormalize;
  req.format = run.synthesis.format;
  req.validate(*ckpt.vocabulary);

  const std::vector<GaitSequence> sequences = synthesize(ckpt, req);
  const bool normalized_space = !run.synthesis.denormalize;
  const NormalizationStats* stats =
      normalized_space && ckpt.normalization.mean.size() > 0 ? &ckpt.normalization : nullptr;
  const DatasetManifest manifest =
      export_dataset(sequences, out_dir, req.format, normalized_space, stats);

  py::dict out;
  out["total"] = sequences.size();
  out["counts"] = manifest.counts;
  out["manifest"] = (out_dir / "manifest.json").string();
  return out;
}

py::dict py_evaluate(const fs::path& real_manifest, const fs::path& synth_manifest,
                     const fs::path& out_dir, const std::string& config_json) {
  const RunConfig run = config_from_json(config_json);
  const ManifestedDataset real = load_manifested_dataset(real_manifest);
  const ManifestedDataset synth = load_manifested_dataset(synth_manifest);

  const std::vector<GaitSequence> real_seqs = to_data_units(real, "real");
  std::vector<GaitSequence> synth_seqs = to_data_units(synth, "synthetic");
  synth_seqs = with_vocabulary(synth_seqs, real.vocabulary);

  ReportConfig rc;
  rc.pca_components = run.evaluation.pca_components;
  rc.perplexity = run.evaluation.perplexity;
  rc.tsne_iters = run.evaluation.tsne_iters;
  rc.max_points_per_side = run.evaluation.max_points_per_side;
  rc.seed = run.seed;
  const StructuralReport report = build_report(real_seqs, synth_seqs, rc);
  write_report(report, out_dir);

  py::dict out;
  out["r2_mean"] = report.r2.mean;
  out["r2_per_class"] = report.r2.per_class;
  out["nn_overlap"] = report.nn_overlap;
  out["warnings"] = report.r2.warnings;
  out["report"] = (out_dir / "report.json").string();
  return out;
}

py::dict py_benchmark(const fs::path& real_manifest, const fs::path& synth_manifest,
                      const fs::path& out_dir, const std::string& config_json) {
  const RunConfig run = config_from_json(config_json);
  const ManifestedDataset real = load_manifested_dataset(real_manifest);
  const ManifestedDataset synth = load_manifested_dataset(synth_manifest);

  std::vector<GaitSequence> real_train = real.train;
  std::vector<GaitSequence> real_test = real.test;
  if (!real.manifest.stored_normalized) {
    const NormalizationStats stats = manifest_stats(real.manifest, "real");
    real_train = normalize(real_train, stats);
    real_test = normalize(real_test, stats);
  }
  std::vector<GaitSequence> synth_seqs = synth.all();
  if (!synth.manifest.stored_normalized)
    synth_seqs = normalize(synth_seqs, manifest_stats(real.manifest, "real"));
  synth_seqs = with_vocabulary(synth_seqs, real.vocabulary);

  std::vector<ClassifierSpec> specs;
  for (std::size_t i = 0; i < run.classify.models.size(); ++i) {
    ClassifierSpec spec;
    spec.kind = classifier_kind_from_string(run.classify.models[i]);
    spec.hidden = run.classify.hidden;
    spec.layers = run.classify.layers;
    spec.conv_channels = run.classify.conv_channels;
    spec.kernel_size = run.classify.kernel_size;
    spec.conv_stride = run.classify.conv_stride;
    spec.dropout = run.classify.dropout;
    spec.learning_rate = run.classify.learning_rate;
    spec.epochs = run.classify.epochs;
    spec.batch_size = run.classify.batch_size;
    spec.seed = run.seed + i;
    specs.push_back(std::move(spec));
  }

  const BenchmarkGrid grid = run_benchmark(real_train, real_test, synth_seqs, specs);
  const BaselineComparison cmp = compare_baseline(grid, run.classify.baseline);

  fs::create_directories(out_dir);
  std::ofstream(out_dir / "grid.csv") << grid_to_csv(grid);
  std::ofstream(out_dir / "benchmark.json") << grid_to_json_string(grid) << "\n";

  py::dict cells;
  for (std::size_t row = 0; row < grid.kinds.size(); ++row) {
    py::dict regimes;
    for (const RegimeResult& cell : grid.rows[row])
      regimes[to_string(cell.regime)] = cell.accuracy;
    cells[to_string(grid.kinds[row])] = regimes;
  }

  py::dict out;
  out["accuracy"] = cells;
  out["csv"] = grid_to_csv(grid);
  out["best_model"] = cmp.best_model;
  out["best_augmented"] = cmp.best_augmented;
  out["baseline"] = cmp.baseline;
  out["delta"] = cmp.delta;
  return out;
}

py::dict py_make_toy(const fs::path& out_path, int classes, int per_class, int dims,
                     int min_length, int max_length, std::uint64_t seed,
                     const std::string& format) {
  ToyOptions opt;
  opt.classes = classes;
  opt.per_class = per_class;
  opt.dims = dims;
  opt.min_length = min_length;
  opt.max_length = max_length;
  opt.nominal_window = min_length;
  opt.seed = seed;
  const std::vector<GaitSequence> seqs = make_toy_sequences(opt);
  save_dataset(seqs, out_path, data_format_from_string(format));
  py::dict out;
  out["total"] = seqs.size();
  out["path"] = out_path.string();
  return out;
}

double py_r_squared(const std::vector<double>& reference, const std::vector<double>& candidate) {
  return r_squared(Eigen::Map<const Eigen::VectorXd>(reference.data(), reference.size()),
                   Eigen::Map<const Eigen::VectorXd>(candidate.data(), candidate.size()));
}

Eigen::MatrixXd rows_to_matrix(const std::vector<std::vector<double>>& rows,
                               const char* what) {
  if (rows.empty()) throw ValidationError(std::string(what) + " must not be empty");
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw ValidationError(std::string(what) + " rows must all have the same length");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

double py_nn_overlap(const std::vector<std::vector<double>>& real,
                     const std::vector<std::vector<double>>& synthetic) {
  return nn_overlap_score(rows_to_matrix(real, "real"), rows_to_matrix(synthetic, "synthetic"));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "pathology-conditioned gait GAN: ingest, train, synthesize, evaluate, benchmark";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_RuntimeError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

  m.def("ingest", &py_ingest, py::arg("raw_path"), py::arg("out_dir"),
        py::arg("config_json") = "",
        "Load raw sequences, filter, window, split, normalize and write a manifest.");
  m.def("train", &py_train, py::arg("manifest_path"), py::arg("out_dir"),
        py::arg("config_json") = "",
        "Train the GAN on a manifest's train split; writes checkpoints and a history CSV.");
  m.def("synthesize", &py_synthesize, py::arg("checkpoint_dir"), py::arg("out_dir"),
        py::arg("config_json") = "",
        "Generate class-conditional sequences from a checkpoint and export them.");
  m.def("evaluate", &py_evaluate, py::arg("real_manifest"), py::arg("synth_manifest"),
        py::arg("out_dir"), py::arg("config_json") = "",
        "Structural comparison of real and synthetic data; writes report.json and plots.");
  m.def("benchmark", &py_benchmark, py::arg("real_manifest"), py::arg("synth_manifest"),
        py::arg("out_dir"), py::arg("config_json") = "",
        "Train classifiers under real / synthetic / combined regimes and grid the results.");
  m.def("make_toy", &py_make_toy, py::arg("out_path"), py::arg("classes") = 3,
        py::arg("per_class") = 50, py::arg("dims") = 3, py::arg("min_length") = 24,
        py::arg("max_length") = 32, py::arg("seed") = 7, py::arg("format") = "jsonl",
        "Write a small class-conditioned sinusoid dataset, handy for smoke tests.");
  m.def("r_squared", &py_r_squared, py::arg("reference"), py::arg("candidate"));
  m.def("nn_overlap", &py_nn_overlap, py::arg("real"), py::arg("synthetic"));
  m.def("default_config", [] { return run_config_to_json(RunConfig{}); },
        "The full configuration tree with default values, as JSON.");
}
