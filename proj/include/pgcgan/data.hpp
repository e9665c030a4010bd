#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pgcgan/common.hpp"
#include "pgcgan/tensor.hpp"

namespace pgcgan {

// Ordered class-name vocabulary shared by every label of a dataset.
struct Vocabulary {
  std::vector<std::string> names;

  int size() const { return static_cast<int>(names.size()); }
  int index_of(const std::string& name) const;  // -1 when absent
  const std::string& name_of(int index) const;
};

using VocabularyPtr = std::shared_ptr<const Vocabulary>;

struct PathologyLabel {
  int index = -1;
  VocabularyPtr vocabulary;

  int num_classes() const { return vocabulary ? vocabulary->size() : 0; }
  const std::string& name() const;
  std::vector<double> one_hot() const;
};

// One keypoint trajectory: frames is T x d (rows = time steps).
struct GaitSequence {
  Eigen::MatrixXd frames;
  PathologyLabel label;
  std::string subject_id;
  std::string id;
  int source_length = 0;
  bool synthetic = false;

  int length() const { return static_cast<int>(frames.rows()); }
  int dims() const { return static_cast<int>(frames.cols()); }
};

enum class WindowPolicy { center_crop, resample };

const char* to_string(WindowPolicy policy);
WindowPolicy window_policy_from_string(const std::string& s);

enum class DataFormat { csv, jsonl };

const char* to_string(DataFormat format);
DataFormat data_format_from_string(const std::string& s);

struct Dataset {
  VocabularyPtr vocabulary;
  std::vector<GaitSequence> sequences;

  int size() const { return static_cast<int>(sequences.size()); }
};

// Bookkeeping for one processed dataset: shapes, filter, split assignment and
// the train-split normalization statistics.
struct DatasetManifest {
  int d = 0;
  int T = 0;
  int min_length_filter = 1;
  WindowPolicy policy = WindowPolicy::center_crop;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  bool synthetic = false;
  bool stored_normalized = false;
  DataFormat data_format = DataFormat::jsonl;
  std::vector<std::string> vocabulary;
  std::map<std::string, int> counts;            // class name -> sequence count
  Eigen::VectorXd norm_mean, norm_std;          // per dimension, from train split
  std::map<std::string, std::string> split;     // sequence id -> "train"|"test"
  std::map<std::string, std::string> files;     // split -> relative data path

  int total_count() const;
  std::string to_json_string() const;
  static DatasetManifest from_json_string(const std::string& text);
};

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

// Reads every sequence under `path` (a file or a directory scanned in sorted
// order). CSV: one file per sequence plus a `<stem>.meta` sidecar. JSONL: one
// object per line. d is taken from the first record and enforced everywhere.
Dataset load_dataset(const std::filesystem::path& path, DataFormat format);

// Writes sequences in the layout load_dataset reads back. CSV: `path` is a
// directory, one <id>.csv plus <id>.meta per sequence (ids sanitized for the
// filesystem, 9 significant digits). JSONL: `path` is a single file, exact
// shortest-round-trip doubles.
void save_dataset(const std::vector<GaitSequence>& sequences,
                  const std::filesystem::path& path, DataFormat format);

// Keeps exactly the sequences with source_length >= min_len, order preserved.
std::vector<GaitSequence> filter_min_length(const std::vector<GaitSequence>& sequences,
                                            int min_len);

// Fixed-length windowing. center_crop takes the centered contiguous window;
// resample interpolates each dimension onto T uniformly spaced time points.
GaitSequence window_fixed(const GaitSequence& sequence, int T, WindowPolicy policy);

struct NormalizationStats {
  Eigen::VectorXd mean, stddev;  // stddev floored at kStdFloor
};

inline constexpr double kStdFloor = 1e-8;

// Per-dimension statistics over all frames of the given (train) sequences.
NormalizationStats compute_normalization(const std::vector<GaitSequence>& train);

std::vector<GaitSequence> normalize(const std::vector<GaitSequence>& sequences,
                                    const NormalizationStats& stats);
std::vector<GaitSequence> denormalize(const std::vector<GaitSequence>& sequences,
                                      const NormalizationStats& stats);

struct SplitResult {
  std::vector<GaitSequence> train, test;
};

// Stratified split, deterministic in `seed`. Per-class test count is
// round(count * test_fraction).
SplitResult split(const std::vector<GaitSequence>& sequences, double test_fraction,
                  std::uint64_t seed);

// Model-space conversion: batch x d-channels x T  <->  T x d frames.
Tensor3 sequences_to_tensor(const std::vector<GaitSequence>& sequences);
Tensor3 sequences_to_tensor(const std::vector<GaitSequence>& sequences,
                            const std::vector<int>& indices);
std::vector<Eigen::MatrixXd> tensor_to_frames(const Tensor3& batch);

// Ingest a manifest written by `ingest` or `export_dataset` together with its
// data files; sequences come back with the manifest's vocabulary order.
struct ManifestedDataset {
  DatasetManifest manifest;
  VocabularyPtr vocabulary;
  std::vector<GaitSequence> train, test;

  std::vector<GaitSequence> all() const;
};

ManifestedDataset load_manifested_dataset(const std::filesystem::path& manifest_path);

struct IngestOptions {
  DataFormat in_format = DataFormat::csv;
  int min_length = 60;
  int window = 60;  // T
  WindowPolicy policy = WindowPolicy::center_crop;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  DataFormat out_format = DataFormat::jsonl;
};

// Full preprocessing pipeline: load raw data, filter by source length, window
// to fixed T, split stratified, z-score with train-split statistics, and write
// out_dir/manifest.json plus the processed train/test files.
ManifestedDataset ingest(const std::filesystem::path& raw_path,
                         const std::filesystem::path& out_dir, const IngestOptions& options);

VocabularyPtr make_vocabulary(std::vector<std::string> names);

// Remaps `sequences` onto `vocab` (labels looked up by name).
std::vector<GaitSequence> with_vocabulary(const std::vector<GaitSequence>& sequences,
                                          const VocabularyPtr& vocab);

}  // namespace pgcgan
