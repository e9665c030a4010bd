#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pgcgan/data.hpp"
#include "pgcgan/tsne.hpp"

namespace pgcgan {

// 1 - SS_res / SS_tot with SS_tot taken about the reference mean. At most 1,
// unbounded below. A constant reference leaves it undefined.
double r_squared(const Eigen::VectorXd& reference, const Eigen::VectorXd& candidate);

struct EnvelopeSummary {
  std::string class_name;
  Eigen::MatrixXd mean;    // T x d
  Eigen::MatrixXd stddev;  // T x d, population convention
  int count = 0;
};

EnvelopeSummary mean_envelope(const std::vector<GaitSequence>& sequences,
                              const PathologyLabel& cls);

struct ClassR2 {
  std::map<std::string, double> per_class;
  double mean = 0.0;
  std::vector<std::string> warnings;  // skipped classes and dimensions
};

// Per class: R-squared of the synthetic mean curve against the real mean
// curve, per dimension, then averaged over dimensions and finally classes.
// Classes missing on either side and dimensions with a constant real mean
// curve are skipped with a warning.
ClassR2 class_r2(const std::vector<GaitSequence>& real,
                 const std::vector<GaitSequence>& synthetic);

struct PcaResult {
  Eigen::MatrixXd projections;                // M x k
  Eigen::VectorXd explained_variance_ratio;   // length F, non-increasing, sums to 1
  Eigen::VectorXd eigenvalues;                // length F, per-component variance
  Eigen::MatrixXd components;                 // F x k, orthonormal columns
  Eigen::RowVectorXd center;                  // the subtracted mean
};

// Principal axes of the mean-centered rows of `features` (M x F), k <= F < M.
PcaResult pca_project(const Eigen::MatrixXd& features, int k);

// Leave-one-out 1-nearest-neighbor accuracy of separating the two point sets
// (Euclidean; exact distance ties go to the lower index in the stacked
// [real; synthetic] order). 0.5 means the sets are indistinguishable, 1.0
// fully separable.
double nn_overlap_score(const Eigen::MatrixXd& real_features,
                        const Eigen::MatrixXd& synthetic_features);

struct ReportConfig {
  int pca_components = 50;
  double perplexity = 30.0;
  int tsne_iters = 1000;
  int max_points_per_side = 1000;  // larger sides are deterministically subsampled
  std::uint64_t seed = 0;
};

struct StructuralReport {
  ClassR2 r2;
  std::vector<EnvelopeSummary> real_envelopes, synthetic_envelopes;
  Eigen::VectorXd explained_variance_ratio;
  Eigen::MatrixXd pca_coords;   // M x 2
  Eigen::MatrixXd tsne_coords;  // M x 2
  std::vector<int> point_labels;       // class index per embedded point
  std::vector<bool> point_synthetic;   // provenance per embedded point
  double nn_overlap = 0.0;
  int real_count = 0, synthetic_count = 0;
  std::vector<std::string> class_names;

  std::string to_json_string() const;
};

// Full structural comparison: per-class envelopes and R-squared in data units,
// then flattening, z-scoring against real statistics, PCA reduction, t-SNE and
// the nearest-neighbor overlap on the shared embedding features.
StructuralReport build_report(const std::vector<GaitSequence>& real,
                              const std::vector<GaitSequence>& synthetic,
                              const ReportConfig& config = {});

// report.json plus envelope / PCA / t-SNE SVG plots, all deterministic.
void write_report(const StructuralReport& report, const std::filesystem::path& dir);

}  // namespace pgcgan
