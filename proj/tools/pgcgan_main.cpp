#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pgcgan/classify.hpp"
#include "pgcgan/config.hpp"
#include "pgcgan/data.hpp"
#include "pgcgan/evaluation.hpp"
#include "pgcgan/model.hpp"
#include "pgcgan/plot.hpp"
#include "pgcgan/synthesis.hpp"
#include "pgcgan/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pgcgan;

namespace {

std::uint64_t parse_seed_text(const std::string& text, const std::string& what) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(what + " is not a non-negative integer: '" + text + "'");
  }
}

// --section.key=value / --section.key value flags are config overrides, not
// CLI options; peel them off before CLI11 sees the command line.
std::vector<std::string> extract_overrides(std::vector<std::string>& args,
                                           std::vector<std::pair<std::string, std::string>>& out) {
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) == 0) {
      const std::size_t eq = a.find('=');
      const std::string key = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
      if (key.find('.') != std::string::npos) {
        if (eq != std::string::npos) {
          out.emplace_back(key, a.substr(eq + 1));
        } else {
          if (i + 1 >= args.size())
            throw ValidationError("flag '--" + key + "' expects a value");
          out.emplace_back(key, args[++i]);
        }
        continue;
      }
    }
    rest.push_back(a);
  }
  return rest;
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

// Real and synthetic sides must be compared in one space; this returns the
// sequences in raw data units.
std::vector<GaitSequence> to_data_units(const ManifestedDataset& ds, const std::string& which) {
  std::vector<GaitSequence> seqs = ds.all();
  if (ds.manifest.stored_normalized)
    return denormalize(seqs, manifest_stats(ds.manifest, which));
  return seqs;
}

void write_loss_plot(const fs::path& path, const std::vector<StepRecord>& history) {
  if (history.empty()) return;
  std::vector<double> x;
  x.reserve(history.size());
  for (const auto& rec : history) x.push_back(static_cast<double>(rec.step));
  auto series = [&](const std::string& name, int i, auto pick) {
    plot::Series s;
    s.name = name;
    s.color = plot::palette_color(i);
    s.x = x;
    s.y.reserve(history.size());
    for (const auto& rec : history) s.y.push_back(pick(rec));
    return s;
  };
  plot::write_line_svg(
      path, "training curves", "step", "value",
      {series("discriminator loss", 0, [](const StepRecord& r) { return r.l_d; }),
       series("generator adversarial", 1, [](const StepRecord& r) { return r.l_g_adv; }),
       series("reconstruction", 2, [](const StepRecord& r) { return r.l_rec; }),
       series("discriminator accuracy (EMA)", 3,
              [](const StepRecord& r) { return r.d_acc_ema; })});
}

void cmd_ingest(const fs::path& raw_path, const fs::path& out_dir, const RunConfig& run) {
  IngestOptions opt;
  opt.in_format = run.data.format;
  opt.min_length = run.data.min_length;
  opt.window = run.data.window;
  opt.policy = run.data.window_policy;
  opt.test_fraction = run.data.test_fraction;
  opt.seed = run.seed;

  ManifestedDataset ds = ingest(raw_path, out_dir, opt);

  std::map<std::string, int> train_counts, test_counts;
  for (const auto& seq : ds.train) ++train_counts[seq.label.name()];
  for (const auto& seq : ds.test) ++test_counts[seq.label.name()];

  std::cout << "ingested " << ds.manifest.total_count() << " sequences (d=" << ds.manifest.d
            << ", T=" << ds.manifest.T << "): " << ds.train.size() << " train, "
            << ds.test.size() << " test\n";
  std::cout << "class histogram:\n";
  for (const auto& name : ds.manifest.vocabulary)
    std::cout << "  " << name << ": " << ds.manifest.counts.at(name) << " ("
              << train_counts[name] << " train, " << test_counts[name] << " test)\n";
  std::cout << "wrote " << (out_dir / "manifest.json").string() << "\n";
}

void cmd_train(const fs::path& manifest_path, const fs::path& out_dir, const RunConfig& run) {
  ManifestedDataset ds = load_manifested_dataset(manifest_path);
  if (ds.train.empty()) throw ValidationError("manifest has no train split");

  std::vector<GaitSequence> train_split = ds.train;
  NormalizationStats stats = manifest_stats(ds.manifest, "train");
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
  opts.verbose = true;

  TrainResult res = train(ckpt, train_split, tc, opts);

  if (ckpt.state) write_loss_plot(out_dir / "loss_curves.svg", ckpt.state->history);
  std::ofstream(out_dir / "run_config.json") << run_config_to_json(run) << "\n";

  std::cout << "stopped after " << res.steps_run << " steps (" << to_string(res.reason)
            << ")";
  if (!res.message.empty()) std::cout << ": " << res.message;
  std::cout << "\n";
  std::cout << "history: " << (out_dir / "history.csv").string() << "\n";

  if (res.reason == StopReason::diverged)
    throw DivergenceError(res.message.empty() ? "training diverged" : res.message);
  std::cout << "final checkpoint: " << (opts.checkpoint_dir / "final").string() << "\n";
}

void cmd_synth(const fs::path& checkpoint_dir, const fs::path& out_dir, const RunConfig& run) {
  Checkpoint ckpt = load_checkpoint(checkpoint_dir);
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

  std::vector<GaitSequence> sequences = synthesize(ckpt, req);

  const bool normalized_space = !run.synthesis.denormalize;
  const NormalizationStats* stats =
      normalized_space && ckpt.normalization.mean.size() > 0 ? &ckpt.normalization : nullptr;
  DatasetManifest manifest =
      export_dataset(sequences, out_dir, req.format, normalized_space, stats);

  std::cout << "synthesized " << sequences.size() << " sequences:\n";
  for (const auto& name : manifest.vocabulary) {
    const auto it = manifest.counts.find(name);
    std::cout << "  " << name << ": " << (it == manifest.counts.end() ? 0 : it->second)
              << "\n";
  }
  std::cout << "wrote " << (out_dir / "manifest.json").string() << "\n";
}

void cmd_eval(const fs::path& real_manifest, const fs::path& synth_manifest,
              const fs::path& out_dir, const RunConfig& run) {
  ManifestedDataset real = load_manifested_dataset(real_manifest);
  ManifestedDataset synth = load_manifested_dataset(synth_manifest);

  std::vector<GaitSequence> real_seqs = to_data_units(real, "real");
  std::vector<GaitSequence> synth_seqs = to_data_units(synth, "synthetic");
  synth_seqs = with_vocabulary(synth_seqs, real.vocabulary);

  ReportConfig rc;
  rc.pca_components = run.evaluation.pca_components;
  rc.perplexity = run.evaluation.perplexity;
  rc.tsne_iters = run.evaluation.tsne_iters;
  rc.max_points_per_side = run.evaluation.max_points_per_side;
  rc.seed = run.seed;

  StructuralReport report = build_report(real_seqs, synth_seqs, rc);
  write_report(report, out_dir);

  std::cout << "mean R^2 across classes: " << report.r2.mean << "\n";
  std::cout << "nearest-neighbor overlap: " << report.nn_overlap << "\n";
  for (const auto& warning : report.r2.warnings) std::cout << "warning: " << warning << "\n";
  std::cout << "wrote " << (out_dir / "report.json").string() << "\n";
}

void cmd_benchmark(const fs::path& real_manifest, const fs::path& synth_manifest,
                   const fs::path& out_dir, const RunConfig& run) {
  ManifestedDataset real = load_manifested_dataset(real_manifest);
  if (real.train.empty() || real.test.empty())
    throw ValidationError("real manifest needs both train and test splits");
  ManifestedDataset synth = load_manifested_dataset(synth_manifest);

  // Classifiers consume the normalized space the GAN was trained in.
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

  BenchmarkGrid grid = run_benchmark(real_train, real_test, synth_seqs, specs);
  BaselineComparison cmp = compare_baseline(grid, run.classify.baseline);

  fs::create_directories(out_dir);
  const std::string csv = grid_to_csv(grid);
  std::ofstream(out_dir / "grid.csv") << csv;
  std::ofstream(out_dir / "benchmark.json") << grid_to_json_string(grid) << "\n";

  json cj;
  cj["kind"] = "pgcgan-baseline-comparison";
  cj["baseline"] = cmp.baseline;
  cj["best_augmented"] = cmp.best_augmented;
  cj["best_model"] = cmp.best_model;
  cj["delta"] = cmp.delta;
  cj["augmentation_beat_real"] = cmp.augmentation_beat_real;
  std::ofstream(out_dir / "baseline.json") << cj.dump(2) << "\n";

  std::cout << csv;
  std::cout << "best augmented: " << cmp.best_model << " at " << cmp.best_augmented
            << "% (baseline " << cmp.baseline << "%, delta " << cmp.delta << ")\n";
  std::cout << "wrote " << (out_dir / "grid.csv").string() << "\n";
}

void cmd_report(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError(dir.string() + " is not a directory");

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  json summary;
  summary["kind"] = "pgcgan-summary";

  auto parse_json_file = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    return json::parse(buf.str());
  };

  json datasets = json::array();
  for (const auto& p : files) {
    const std::string name = p.filename().string();
    try {
      if (name == "manifest.json") {
        const json m = parse_json_file(p);
        json entry;
        entry["path"] = fs::relative(p, dir).string();
        entry["total"] = 0;
        int total = 0;
        if (m.contains("counts"))
          for (const auto& [cls, n] : m["counts"].items()) total += n.get<int>();
        entry["total"] = total;
        entry["classes"] = m.value("vocabulary", json::array());
        entry["synthetic"] = m.value("synthetic", false);
        datasets.push_back(std::move(entry));
      } else if (name == "history.csv") {
        std::ifstream in(p);
        std::string line, last;
        long rows = -1;  // header
        while (std::getline(in, line))
          if (!line.empty()) {
            ++rows;
            last = line;
          }
        json tr;
        tr["path"] = fs::relative(p, dir).string();
        tr["steps"] = rows < 0 ? 0 : rows;
        tr["last_row"] = last;
        summary["training"] = std::move(tr);
      } else if (name == "report.json") {
        const json r = parse_json_file(p);
        json ev;
        ev["path"] = fs::relative(p, dir).string();
        if (r.contains("r2") && r["r2"].contains("mean")) ev["r2_mean"] = r["r2"]["mean"];
        if (r.contains("nn_overlap")) ev["nn_overlap"] = r["nn_overlap"];
        summary["evaluation"] = std::move(ev);
      } else if (name == "baseline.json") {
        json b = parse_json_file(p);
        b["path"] = fs::relative(p, dir).string();
        summary["benchmark_baseline"] = std::move(b);
      } else if (name == "grid.csv") {
        std::ifstream in(p);
        std::stringstream buf;
        buf << in.rdbuf();
        json g;
        g["path"] = fs::relative(p, dir).string();
        g["csv"] = buf.str();
        summary["benchmark_grid"] = std::move(g);
      }
    } catch (const json::exception&) {
      std::cerr << "warning: skipping unreadable " << p.string() << "\n";
    }
  }
  summary["datasets"] = std::move(datasets);

  const fs::path out = dir / "summary.json";
  std::ofstream(out) << summary.dump(2) << "\n";

  std::cout << "summary of " << dir.string() << ":\n";
  if (summary.contains("training"))
    std::cout << "  training steps: " << summary["training"]["steps"] << "\n";
  if (summary.contains("evaluation")) {
    if (summary["evaluation"].contains("r2_mean"))
      std::cout << "  mean R^2: " << summary["evaluation"]["r2_mean"] << "\n";
    if (summary["evaluation"].contains("nn_overlap"))
      std::cout << "  nn overlap: " << summary["evaluation"]["nn_overlap"] << "\n";
  }
  if (summary.contains("benchmark_grid"))
    std::cout << summary["benchmark_grid"]["csv"].get<std::string>();
  if (summary.contains("benchmark_baseline"))
    std::cout << "  best augmented: "
              << summary["benchmark_baseline"]["best_augmented"] << " (baseline "
              << summary["benchmark_baseline"]["baseline"] << ")\n";
  std::cout << "wrote " << out.string() << "\n";
}

int run(int argc, char** argv) {
  std::vector<std::string> raw_args(argv + 1, argv + argc);
  std::vector<std::pair<std::string, std::string>> overrides;
  std::vector<std::string> args = extract_overrides(raw_args, overrides);

  CLI::App app{"pathology-conditioned gait sequence GAN toolkit"};
  app.require_subcommand(1);
  app.fallthrough(true);

  std::string config_file;
  std::string seed_text;
  app.add_option("--config", config_file, "JSON config file");
  app.add_option("--seed", seed_text, "global seed (overrides config file)");

  std::string a_raw, a_out, a_manifest, a_ckpt, a_real, a_synth, a_dir;

  auto* c_ingest = app.add_subcommand("ingest", "preprocess a raw dataset");
  c_ingest->add_option("raw_path", a_raw, "raw dataset file or directory")->required();
  c_ingest->add_option("out_dir", a_out, "output directory")->required();
  std::string flag_policy, flag_format;
  int flag_min_length = -1, flag_window = -1;
  double flag_test_fraction = -1.0;
  c_ingest->add_option("--format", flag_format, "raw input format: csv or jsonl");
  c_ingest->add_option("--min-length", flag_min_length, "minimum source length");
  c_ingest->add_option("--window", flag_window, "fixed window length T");
  c_ingest->add_option("--policy", flag_policy, "windowing: center_crop or resample");
  c_ingest->add_option("--test-fraction", flag_test_fraction, "held-out fraction per class");

  auto* c_train = app.add_subcommand("train", "train the generative model");
  c_train->add_option("manifest", a_manifest, "manifest.json from ingest")->required();
  c_train->add_option("out_dir", a_out, "output directory")->required();

  auto* c_synth = app.add_subcommand("synth", "synthesize class-conditional sequences");
  c_synth->add_option("checkpoint", a_ckpt, "checkpoint directory")->required();
  c_synth->add_option("out_dir", a_out, "output directory")->required();
  int flag_per_class = -1;
  c_synth->add_option("--per-class", flag_per_class, "sequences per class");

  auto* c_eval = app.add_subcommand("eval", "structural comparison of real vs synthetic");
  c_eval->add_option("real_manifest", a_real, "manifest of the real dataset")->required();
  c_eval->add_option("synth_manifest", a_synth, "manifest of the synthetic dataset")
      ->required();
  c_eval->add_option("out_dir", a_out, "output directory")->required();

  auto* c_bench = app.add_subcommand("benchmark", "classifier augmentation benchmark");
  c_bench->add_option("real_manifest", a_real, "manifest of the real dataset")->required();
  c_bench->add_option("synth_manifest", a_synth, "manifest of the synthetic dataset")
      ->required();
  c_bench->add_option("out_dir", a_out, "output directory")->required();

  auto* c_report = app.add_subcommand("report", "aggregate pipeline outputs into a summary");
  c_report->add_option("dir", a_dir, "directory holding prior outputs")->required();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  RunConfig run_config = load_run_config(config_file);
  if (*c_ingest) {
    if (!flag_format.empty()) run_config.data.format = data_format_from_string(flag_format);
    if (flag_min_length >= 0) run_config.data.min_length = flag_min_length;
    if (flag_window >= 0) run_config.data.window = flag_window;
    if (!flag_policy.empty())
      run_config.data.window_policy = window_policy_from_string(flag_policy);
    if (flag_test_fraction >= 0.0) run_config.data.test_fraction = flag_test_fraction;
  }
  if (*c_synth && flag_per_class >= 0) run_config.synthesis.per_class = flag_per_class;
  for (const auto& [key, value] : overrides) apply_override(run_config, key, value);

  if (!seed_text.empty()) {
    run_config.seed = parse_seed_text(seed_text, "--seed");
    run_config.seed_explicit = true;
  }
  if (!run_config.seed_explicit)
    if (const char* env = std::getenv("PGCGAN_SEED"))
      run_config.seed = parse_seed_text(env, "PGCGAN_SEED");

  if (*c_ingest) cmd_ingest(a_raw, a_out, run_config);
  if (*c_train) cmd_train(a_manifest, a_out, run_config);
  if (*c_synth) cmd_synth(a_ckpt, a_out, run_config);
  if (*c_eval) cmd_eval(a_real, a_synth, a_out, run_config);
  if (*c_bench) cmd_benchmark(a_real, a_synth, a_out, run_config);
  if (*c_report) cmd_report(a_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
