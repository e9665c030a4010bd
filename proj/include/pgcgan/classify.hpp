#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "pgcgan/data.hpp"

namespace pgcgan {

enum class ClassifierKind { gru, lstm, cnn };

const char* to_string(ClassifierKind kind);
ClassifierKind classifier_kind_from_string(const std::string& s);

enum class Regime { real_only, synthetic_only, real_plus_synthetic };

const char* to_string(Regime regime);

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::gru;
  int hidden = 128;                          // recurrent state width
  int layers = 2;                            // recurrent layers
  std::vector<int> conv_channels{64, 128, 128};
  int kernel_size = 5;
  int conv_stride = 2;
  double dropout = 0.3;
  double learning_rate = 1e-3;
  int epochs = 50;
  int batch_size = 64;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RegimeResult {
  Regime regime = Regime::real_only;
  double accuracy = 0.0;               // trace(confusion) / total, exactly
  Eigen::VectorXd per_class_accuracy;  // zero where a class has no test items
  Eigen::MatrixXi confusion;           // C x C, rows = true class
  std::vector<std::string> warnings;
};

// Trains one classifier from scratch and scores it on the held-out test set.
// Deterministic given ClassifierSpec::seed. Classes absent from the train set
// only produce a warning; their test items simply score what they score.
RegimeResult train_classifier(const ClassifierSpec& spec,
                              const std::vector<GaitSequence>& train_set,
                              const std::vector<GaitSequence>& test_set);

struct BenchmarkGrid {
  std::vector<ClassifierKind> kinds;            // row order
  std::vector<std::vector<RegimeResult>> rows;  // one row per kind, columns
                                                // real / synthetic / real+synthetic
};

// The full grid. The test set must be purely real; the augmented regime
// concatenates the real train split with the synthetic set.
BenchmarkGrid run_benchmark(const std::vector<GaitSequence>& real_train,
                            const std::vector<GaitSequence>& real_test,
                            const std::vector<GaitSequence>& synthetic,
                            const std::vector<ClassifierSpec>& specs);

// rows = models, columns = regimes, percentages with two decimals
std::string grid_to_csv(const BenchmarkGrid& grid);

// accuracies, per-class accuracies, confusion matrices and warnings per cell
std::string grid_to_json_string(const BenchmarkGrid& grid);

struct BaselineComparison {
  double baseline = 0.0;        // percent
  double best_augmented = 0.0;  // percent, best real+synthetic cell
  std::string best_model;
  double delta = 0.0;           // best_augmented - baseline, percentage points
  std::map<std::string, bool> augmentation_beat_real;  // per model
};

BaselineComparison compare_baseline(const BenchmarkGrid& grid,
                                    double baseline_accuracy = 90.13);

}  // namespace pgcgan
