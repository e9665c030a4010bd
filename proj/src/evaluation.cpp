#include "pgcgan/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>

#include "pgcgan/plot.hpp"
#include "pgcgan/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pgcgan {

double r_squared(const Eigen::VectorXd& reference, const Eigen::VectorXd& candidate) {
  if (reference.size() != candidate.size())
    throw ContractError("r_squared: curves differ in length (" +
                        std::to_string(reference.size()) + " vs " +
                        std::to_string(candidate.size()) + ")");
  if (reference.size() < 2) throw ValidationError("r_squared needs at least two points");
  if (reference.maxCoeff() == reference.minCoeff())
    throw ValidationError("r_squared is undefined for a constant reference curve");
  const double mean = reference.mean();
  const double ss_tot = (reference.array() - mean).square().sum();
  const double ss_res = (reference - candidate).squaredNorm();
  return 1.0 - ss_res / ss_tot;
}

EnvelopeSummary mean_envelope(const std::vector<GaitSequence>& sequences,
                              const PathologyLabel& cls) {
  std::vector<const GaitSequence*> members;
  for (const auto& seq : sequences)
    if (seq.label.index == cls.index) members.push_back(&seq);
  if (members.empty())
    throw ValidationError("no sequences of class '" + cls.name() + "'");

  const int T = members.front()->length(), d = members.front()->dims();
  EnvelopeSummary env;
  env.class_name = cls.name();
  env.count = static_cast<int>(members.size());
  env.mean = Eigen::MatrixXd::Zero(T, d);
  env.stddev = Eigen::MatrixXd::Zero(T, d);

  for (const auto* seq : members) {
    if (seq->length() != T || seq->dims() != d)
      throw ContractError("mean_envelope: sequences of class '" + cls.name() +
                          "' have mismatched shapes");
    env.mean += seq->frames;
  }
  env.mean /= static_cast<double>(members.size());
  for (const auto* seq : members)
    env.stddev += (seq->frames - env.mean).cwiseAbs2();
  env.stddev = (env.stddev / static_cast<double>(members.size())).cwiseSqrt();
  return env;
}

namespace {

Eigen::MatrixXd class_mean_curve(const std::vector<GaitSequence>& sequences, int cls,
                                 int* count = nullptr) {
  Eigen::MatrixXd sum;
  int n = 0;
  for (const auto& seq : sequences)
    if (seq.label.index == cls) {
      if (n == 0)
        sum = seq.frames;
      else
        sum += seq.frames;
      ++n;
    }
  if (count) *count = n;
  if (n > 0) sum /= static_cast<double>(n);
  return sum;
}

}  // namespace

ClassR2 class_r2(const std::vector<GaitSequence>& real,
                 const std::vector<GaitSequence>& synthetic) {
  if (real.empty() || synthetic.empty())
    throw ValidationError("class_r2 needs non-empty real and synthetic sets");
  const VocabularyPtr vocab = real.front().label.vocabulary;
  if (!vocab) throw ContractError("class_r2: sequences carry no vocabulary");
  const VocabularyPtr svocab = synthetic.front().label.vocabulary;
  if (svocab && svocab->names != vocab->names)
    throw ContractError("class_r2: real and synthetic vocabularies differ");
  if (real.front().length() != synthetic.front().length() ||
      real.front().dims() != synthetic.front().dims())
    throw ContractError("class_r2: real and synthetic shapes differ");

  ClassR2 out;
  double sum = 0.0;
  int included = 0;
  for (int c = 0; c < vocab->size(); ++c) {
    int n_real = 0, n_synth = 0;
    const Eigen::MatrixXd real_mean = class_mean_curve(real, c, &n_real);
    const Eigen::MatrixXd synth_mean = class_mean_curve(synthetic, c, &n_synth);
    if (n_real == 0 || n_synth == 0) {
      out.warnings.push_back("class '" + vocab->names[c] + "' missing on the " +
                             (n_real == 0 ? "real" : "synthetic") + " side; skipped");
      continue;
    }

    double class_sum = 0.0;
    int dims = 0;
    for (int j = 0; j < real_mean.cols(); ++j) {
      if (real_mean.col(j).maxCoeff() == real_mean.col(j).minCoeff()) {
        out.warnings.push_back("class '" + vocab->names[c] + "' dimension " +
                               std::to_string(j) +
                               " has a constant real mean curve; skipped");
        continue;
      }
      class_sum += r_squared(real_mean.col(j), synth_mean.col(j));
      ++dims;
    }
    if (dims == 0) {
      out.warnings.push_back("class '" + vocab->names[c] +
                             "' has no usable dimensions; skipped");
      continue;
    }
    const double value = class_sum / dims;
    out.per_class[vocab->names[c]] = value;
    sum += value;
    ++included;
  }
  if (included == 0) throw ValidationError("class_r2: no classes were comparable");
  out.mean = sum / included;
  return out;
}

PcaResult pca_project(const Eigen::MatrixXd& features, int k) {
  const long m = features.rows(), f = features.cols();
  if (k < 1) throw ValidationError("PCA needs k >= 1");
  if (m <= k)
    throw ValidationError("PCA needs more rows than components (got " + std::to_string(m) +
                          " rows for k=" + std::to_string(k) + ")");
  if (k > f) throw ValidationError("PCA k exceeds the feature dimension");
  if (!features.allFinite()) throw ValidationError("PCA input has non-finite values");

  PcaResult res;
  res.center = features.colwise().mean();
  const Eigen::MatrixXd centered = features.rowwise() - res.center;
  const double denom = static_cast<double>(m - 1);

  res.eigenvalues = Eigen::VectorXd::Zero(f);
  res.components = Eigen::MatrixXd::Zero(f, k);

  if (f <= m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        (centered.transpose() * centered) / denom);
    if (solver.info() != Eigen::Success) throw ValidationError("PCA eigensolve failed");
    for (long j = 0; j < f; ++j)
      res.eigenvalues(j) = std::max(0.0, solver.eigenvalues()(f - 1 - j));
    for (int j = 0; j < k; ++j) res.components.col(j) = solver.eigenvectors().col(f - 1 - j);
  } else {
    // wide data: eigensolve the m x m Gram matrix instead
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        (centered * centered.transpose()) / denom);
    if (solver.info() != Eigen::Success) throw ValidationError("PCA eigensolve failed");
    for (long j = 0; j < m; ++j)
      res.eigenvalues(j) = std::max(0.0, solver.eigenvalues()(m - 1 - j));
    for (int j = 0; j < k; ++j) {
      Eigen::VectorXd axis = centered.transpose() * solver.eigenvectors().col(m - 1 - j);
      const double norm = axis.norm();
      if (norm > 1e-12) res.components.col(j) = axis / norm;
    }
  }

  // deterministic sign: the entry of largest magnitude points positive
  for (int j = 0; j < k; ++j) {
    long best = 0;
    for (long i = 1; i < f; ++i)
      if (std::abs(res.components(i, j)) > std::abs(res.components(best, j))) best = i;
    if (res.components(best, j) < 0.0) res.components.col(j) = -res.components.col(j);
  }

  const double total = res.eigenvalues.sum();
  if (total <= 0.0) throw ValidationError("PCA input has zero variance");
  res.explained_variance_ratio = res.eigenvalues / total;
  res.projections = centered * res.components;
  return res;
}

double nn_overlap_score(const Eigen::MatrixXd& real_features,
                        const Eigen::MatrixXd& synthetic_features) {
  if (real_features.rows() == 0 || synthetic_features.rows() == 0)
    throw ValidationError("nn_overlap_score needs non-empty point sets");
  if (real_features.cols() != synthetic_features.cols())
    throw ContractError("nn_overlap_score: feature dimensions differ");

  const long r = real_features.rows(), s = synthetic_features.rows(), m = r + s;
  Eigen::MatrixXd all(m, real_features.cols());
  all << real_features, synthetic_features;

  long correct = 0;
  for (long i = 0; i < m; ++i) {
    long best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (long j = 0; j < m; ++j) {
      if (j == i) continue;
      const double dist = (all.row(i) - all.row(j)).squaredNorm();
      if (dist < best_d) {
        best_d = dist;
        best = j;
      }
    }
    if ((best < r) == (i < r)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(m);
}

namespace {

std::vector<int> subsample_indices(int n, int cap, Rng& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  if (n <= cap) return idx;
  for (int i = 0; i < cap; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Eigen::RowVectorXd flatten(const GaitSequence& seq) {
  Eigen::RowVectorXd row(seq.length() * seq.dims());
  long k = 0;
  for (int t = 0; t < seq.length(); ++t)
    for (int j = 0; j < seq.dims(); ++j) row(k++) = seq.frames(t, j);
  return row;
}

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (long i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json envelope_json(const EnvelopeSummary& env) {
  return {{"class", env.class_name},
          {"count", env.count},
          {"mean", matrix_rows(env.mean)},
          {"std", matrix_rows(env.stddev)}};
}

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out.empty() ? std::string("class") : out;
}

}  // namespace

StructuralReport build_report(const std::vector<GaitSequence>& real,
                              const std::vector<GaitSequence>& synthetic,
                              const ReportConfig& config) {
  StructuralReport report;
  report.r2 = class_r2(real, synthetic);
  report.real_count = static_cast<int>(real.size());
  report.synthetic_count = static_cast<int>(synthetic.size());

  const VocabularyPtr vocab = real.front().label.vocabulary;
  report.class_names = vocab->names;
  for (int c = 0; c < vocab->size(); ++c) {
    const PathologyLabel cls{c, vocab};
    const auto has = [c](const std::vector<GaitSequence>& set) {
      return std::any_of(set.begin(), set.end(),
                         [c](const GaitSequence& s) { return s.label.index == c; });
    };
    if (has(real)) report.real_envelopes.push_back(mean_envelope(real, cls));
    if (has(synthetic)) report.synthetic_envelopes.push_back(mean_envelope(synthetic, cls));
  }

  // shared embedding features: flatten, z-score against the real subset, PCA
  Rng sub_rng = Rng::stream(config.seed, 0x737562ull);
  const auto real_idx = subsample_indices(report.real_count, config.max_points_per_side, sub_rng);
  const auto synth_idx =
      subsample_indices(report.synthetic_count, config.max_points_per_side, sub_rng);
  const long nr = static_cast<long>(real_idx.size()), ns = static_cast<long>(synth_idx.size());
  const long m = nr + ns;
  const long f = static_cast<long>(real.front().length()) * real.front().dims();

  Eigen::MatrixXd features(m, f);
  for (long i = 0; i < nr; ++i) features.row(i) = flatten(real[real_idx[i]]);
  for (long i = 0; i < ns; ++i) features.row(nr + i) = flatten(synthetic[synth_idx[i]]);

  const Eigen::RowVectorXd mu = features.topRows(nr).colwise().mean();
  Eigen::RowVectorXd sigma =
      ((features.topRows(nr).rowwise() - mu).cwiseAbs2().colwise().sum() / nr)
          .cwiseSqrt()
          .cwiseMax(kStdFloor);
  features = (features.rowwise() - mu).array().rowwise() / sigma.array();

  const int k = std::max(1, std::min<int>({config.pca_components, static_cast<int>(f),
                                           static_cast<int>(m) - 1}));
  PcaResult pca = pca_project(features, k);
  report.explained_variance_ratio = pca.explained_variance_ratio;
  report.pca_coords = Eigen::MatrixXd::Zero(m, 2);
  report.pca_coords.col(0) = pca.projections.col(0);
  if (k >= 2) report.pca_coords.col(1) = pca.projections.col(1);

  TsneOptions tsne_opts;
  tsne_opts.perplexity =
      std::max(2.0, std::min(config.perplexity, (static_cast<double>(m) - 1.0) / 3.0));
  tsne_opts.iters = config.tsne_iters;
  tsne_opts.seed = config.seed;
  report.tsne_coords = tsne_embed(pca.projections, tsne_opts).embedding;

  report.nn_overlap =
      nn_overlap_score(pca.projections.topRows(nr), pca.projections.bottomRows(ns));

  report.point_labels.reserve(static_cast<std::size_t>(m));
  report.point_synthetic.reserve(static_cast<std::size_t>(m));
  for (long i = 0; i < nr; ++i) {
    report.point_labels.push_back(real[real_idx[i]].label.index);
    report.point_synthetic.push_back(false);
  }
  for (long i = 0; i < ns; ++i) {
    report.point_labels.push_back(synthetic[synth_idx[i]].label.index);
    report.point_synthetic.push_back(true);
  }
  return report;
}

std::string StructuralReport::to_json_string() const {
  json doc;
  doc["kind"] = "pgcgan-structural-report";
  doc["counts"] = {{"real", real_count}, {"synthetic", synthetic_count}};
  doc["class_names"] = class_names;
  doc["r2"] = {{"per_class", r2.per_class}, {"mean", r2.mean}, {"warnings", r2.warnings}};
  doc["nn_overlap"] = nn_overlap;
  doc["explained_variance_ratio"] =
      std::vector<double>(explained_variance_ratio.begin(), explained_variance_ratio.end());
  doc["embedding"] = {{"pca", matrix_rows(pca_coords)},
                      {"tsne", matrix_rows(tsne_coords)},
                      {"labels", point_labels},
                      {"synthetic", point_synthetic}};
  json renv = json::array(), senv = json::array();
  for (const auto& env : real_envelopes) renv.push_back(envelope_json(env));
  for (const auto& env : synthetic_envelopes) senv.push_back(envelope_json(env));
  doc["envelopes"] = {{"real", renv}, {"synthetic", senv}};
  return doc.dump(2);
}

void write_report(const StructuralReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "report.json");
    if (!out) throw ValidationError("cannot write " + (dir / "report.json").string());
    out << report.to_json_string() << "\n";
  }

  auto scatter = [&](const Eigen::MatrixXd& coords, const std::string& title,
                     const fs::path& path) {
    plot::ScatterGroup real_pts{"real", {}, {}, plot::palette_color(0), 2.5};
    plot::ScatterGroup synth_pts{"synthetic", {}, {}, plot::palette_color(1), 2.5};
    for (long i = 0; i < coords.rows(); ++i) {
      auto& g = report.point_synthetic[static_cast<std::size_t>(i)] ? synth_pts : real_pts;
      g.x.push_back(coords(i, 0));
      g.y.push_back(coords(i, 1));
    }
    plot::write_scatter_svg(path, title, "component 1", "component 2", {real_pts, synth_pts});
  };
  scatter(report.pca_coords, "PCA embedding", dir / "pca.svg");
  scatter(report.tsne_coords, "t-SNE embedding", dir / "tsne.svg");

  for (const auto& env : report.real_envelopes) {
    const EnvelopeSummary* synth = nullptr;
    for (const auto& s : report.synthetic_envelopes)
      if (s.class_name == env.class_name) synth = &s;

    std::vector<plot::Panel> panels;
    for (long j = 0; j < env.mean.cols(); ++j) {
      plot::Panel panel;
      panel.title = "dimension " + std::to_string(j);
      auto band = [&](const EnvelopeSummary& e, const std::string& name, int color) {
        plot::Series s;
        s.name = name;
        s.color = plot::palette_color(color);
        s.band = true;
        for (long t = 0; t < e.mean.rows(); ++t) {
          s.x.push_back(static_cast<double>(t));
          s.y.push_back(e.mean(t, j));
          s.y_low.push_back(e.mean(t, j) - e.stddev(t, j));
          s.y_high.push_back(e.mean(t, j) + e.stddev(t, j));
        }
        panel.series.push_back(std::move(s));
      };
      band(env, "real", 0);
      if (synth) band(*synth, "synthetic", 1);
      panels.push_back(std::move(panel));
    }
    plot::write_panel_grid_svg(dir / ("envelope_" + safe_name(env.class_name) + ".svg"),
                               "envelope: " + env.class_name, panels);
  }
}

}  // namespace pgcgan
