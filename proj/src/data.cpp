#include "pgcgan/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "pgcgan/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pgcgan {

int Vocabulary::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

const std::string& Vocabulary::name_of(int index) const {
  if (index < 0 || index >= size())
    throw ContractError("vocabulary: class index " + std::to_string(index) + " out of range");
  return names[index];
}

const std::string& PathologyLabel::name() const {
  if (!vocabulary) throw ContractError("label has no vocabulary");
  return vocabulary->name_of(index);
}

std::vector<double> PathologyLabel::one_hot() const {
  const int C = num_classes();
  if (index < 0 || index >= C)
    throw ContractError("label index " + std::to_string(index) + " outside [0, " +
                        std::to_string(C) + ")");
  std::vector<double> out(C, 0.0);
  out[index] = 1.0;
  return out;
}

const char* to_string(WindowPolicy policy) {
  return policy == WindowPolicy::center_crop ? "center_crop" : "resample";
}

WindowPolicy window_policy_from_string(const std::string& s) {
  if (s == "center_crop") return WindowPolicy::center_crop;
  if (s == "resample") return WindowPolicy::resample;
  throw ValidationError("unknown window policy '" + s + "' (expected center_crop or resample)");
}

const char* to_string(DataFormat format) {
  return format == DataFormat::csv ? "csv" : "jsonl";
}

DataFormat data_format_from_string(const std::string& s) {
  if (s == "csv") return DataFormat::csv;
  if (s == "jsonl") return DataFormat::jsonl;
  throw ValidationError("unknown data format '" + s + "' (expected csv or jsonl)");
}

VocabularyPtr make_vocabulary(std::vector<std::string> names) {
  if (names.size() < 2)
    throw ValidationError("a class vocabulary needs at least two classes, got " +
                          std::to_string(names.size()));
  std::set<std::string> seen;
  for (const auto& name : names)
    if (!seen.insert(name).second)
      throw ValidationError("duplicate class name '" + name + "' in vocabulary");
  auto vocab = std::make_shared<Vocabulary>();
  vocab->names = std::move(names);
  return vocab;
}

namespace {

struct RawRecord {
  std::vector<std::vector<double>> frames;
  std::string label;
  std::string subject;
  std::string id;
  bool synthetic = false;
  std::string origin;  // file (and line) for error messages
};

void check_finite(const RawRecord& rec) {
  for (const auto& row : rec.frames)
    for (double x : row)
      if (!std::isfinite(x))
        throw ValidationError(rec.origin + ": non-finite value in sequence '" + rec.id + "'");
}

double parse_number(const std::string& token, const std::string& where) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &pos);
  } catch (const std::exception&) {
    throw ValidationError(where + ": non-numeric token '" + token + "'");
  }
  if (pos != token.size())
    throw ValidationError(where + ": non-numeric token '" + token + "'");
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

RawRecord read_csv_sequence(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open " + file.string());

  RawRecord rec;
  rec.id = file.stem().string();
  rec.origin = file.string();

  std::string line;
  int lineno = 0;
  int d = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = file.string() + ":" + std::to_string(lineno);
    auto cells = split_csv_line(line);
    if (lineno == 1) {
      // header: t,f0,...,f{d-1}
      if (cells.size() < 2 || cells[0] != "t")
        throw ValidationError(where + ": expected header 't,f0,...', got '" + line + "'");
      d = static_cast<int>(cells.size()) - 1;
      continue;
    }
    if (static_cast<int>(cells.size()) != d + 1)
      throw ValidationError(where + ": expected " + std::to_string(d + 1) + " columns, got " +
                            std::to_string(cells.size()));
    std::vector<double> row(d);
    parse_number(cells[0], where);  // frame index column, value unused
    for (int j = 0; j < d; ++j) row[j] = parse_number(cells[j + 1], where);
    rec.frames.push_back(std::move(row));
  }
  if (d < 0) throw ValidationError(file.string() + ": empty file");
  if (rec.frames.empty()) throw ValidationError(file.string() + ": no frame rows");

  // sidecar metadata
  fs::path meta = file;
  meta.replace_extension(".meta");
  std::ifstream min(meta);
  if (!min) throw ValidationError("missing metadata sidecar " + meta.string());
  while (std::getline(min, line)) {
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(meta.string() + ": expected key=value, got '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "label")
      rec.label = value;
    else if (key == "subject")
      rec.subject = value;
    else if (key == "synthetic")
      rec.synthetic = (value == "true" || value == "1");
    // unknown keys tolerated on read
  }
  if (rec.label.empty()) throw ValidationError(meta.string() + ": missing label=");
  return rec;
}

std::vector<RawRecord> read_jsonl_file(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open " + file.string());

  std::vector<RawRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = file.string() + ":" + std::to_string(lineno);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(where + ": invalid JSON (" + std::string(e.what()) + ")");
    }
    if (!obj.is_object() || !obj.contains("frames") || !obj.contains("label"))
      throw ValidationError(where + ": expected object with 'frames' and 'label'");

    RawRecord rec;
    rec.origin = where;
    rec.label = obj["label"].get<std::string>();
    rec.subject = obj.value("subject", std::string{});
    rec.synthetic = obj.value("synthetic", false);
    rec.id = obj.value("id", file.stem().string() + "#" + std::to_string(lineno));

    const auto& frames = obj["frames"];
    if (!frames.is_array() || frames.empty())
      throw ValidationError(where + ": 'frames' must be a non-empty array of arrays");
    int d = -1;
    for (const auto& row : frames) {
      if (!row.is_array())
        throw ValidationError(where + ": 'frames' must be a non-empty array of arrays");
      if (d < 0) d = static_cast<int>(row.size());
      if (static_cast<int>(row.size()) != d)
        throw ValidationError(where + ": ragged frame rows (" + std::to_string(row.size()) +
                              " vs " + std::to_string(d) + ")");
      std::vector<double> vals(d);
      for (int j = 0; j < d; ++j) {
        if (!row[j].is_number())
          throw ValidationError(where + ": non-numeric frame entry");
        vals[j] = row[j].get<double>();
      }
      rec.frames.push_back(std::move(vals));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& extension) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == extension)
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

GaitSequence to_sequence(RawRecord&& rec, const VocabularyPtr& vocab) {
  GaitSequence seq;
  const int T = static_cast<int>(rec.frames.size());
  const int d = static_cast<int>(rec.frames.front().size());
  seq.frames.resize(T, d);
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < d; ++j) seq.frames(t, j) = rec.frames[t][j];
  seq.label.index = vocab->index_of(rec.label);
  seq.label.vocabulary = vocab;
  seq.subject_id = std::move(rec.subject);
  seq.id = std::move(rec.id);
  seq.source_length = T;
  seq.synthetic = rec.synthetic;
  return seq;
}

}  // namespace

Dataset load_dataset(const fs::path& path, DataFormat format) {
  if (!fs::exists(path)) throw ValidationError("path does not exist: " + path.string());

  std::vector<RawRecord> records;
  if (format == DataFormat::csv) {
    if (fs::is_directory(path)) {
      for (const auto& file : sorted_files(path, ".csv"))
        records.push_back(read_csv_sequence(file));
    } else {
      records.push_back(read_csv_sequence(path));
    }
  } else {
    if (fs::is_directory(path)) {
      for (const auto& file : sorted_files(path, ".jsonl"))
        for (auto& rec : read_jsonl_file(file)) records.push_back(std::move(rec));
    } else {
      for (auto& rec : read_jsonl_file(path)) records.push_back(std::move(rec));
    }
  }
  if (records.empty()) throw ValidationError("no sequences found under " + path.string());

  const int d = static_cast<int>(records.front().frames.front().size());
  for (const auto& rec : records) {
    const int rd = static_cast<int>(rec.frames.front().size());
    if (rd != d)
      throw ValidationError("inconsistent feature dimension: " + rec.origin + " has d=" +
                            std::to_string(rd) + " but dataset has d=" + std::to_string(d));
    check_finite(rec);
  }

  std::vector<std::string> names;
  for (const auto& rec : records) names.push_back(rec.label);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  auto vocab = make_vocabulary(std::move(names));

  Dataset out;
  out.vocabulary = vocab;
  out.sequences.reserve(records.size());
  for (auto& rec : records) out.sequences.push_back(to_sequence(std::move(rec), vocab));
  return out;
}

std::vector<GaitSequence> filter_min_length(const std::vector<GaitSequence>& sequences,
                                            int min_len) {
  if (min_len < 1) throw ValidationError("min_len must be >= 1");
  std::vector<GaitSequence> out;
  for (const auto& seq : sequences)
    if (seq.source_length >= min_len) out.push_back(seq);
  return out;
}

GaitSequence window_fixed(const GaitSequence& sequence, int T, WindowPolicy policy) {
  if (T < 1) throw ValidationError("window length must be >= 1");
  const int L = sequence.length();
  GaitSequence out = sequence;

  if (policy == WindowPolicy::center_crop) {
    if (L < T)
      throw ValidationError("sequence '" + sequence.id + "' has " + std::to_string(L) +
                            " frames, too short for center_crop to T=" + std::to_string(T));
    const int start = (L - T) / 2;
    out.frames = sequence.frames.middleRows(start, T);
    return out;
  }

  // resample: per-dimension linear interpolation onto T uniform points
  if (L < 2)
    throw ValidationError("sequence '" + sequence.id +
                          "' needs at least 2 frames for resample");
  const int d = sequence.dims();
  out.frames.resize(T, d);
  for (int t = 0; t < T; ++t) {
    const double pos = (T == 1) ? (L - 1) / 2.0
                                : static_cast<double>(t) * (L - 1) / (T - 1);
    const int lo = std::min(static_cast<int>(pos), L - 2);
    const double frac = pos - lo;
    for (int j = 0; j < d; ++j)
      out.frames(t, j) = (1.0 - frac) * sequence.frames(lo, j) +
                         frac * sequence.frames(lo + 1, j);
  }
  return out;
}

NormalizationStats compute_normalization(const std::vector<GaitSequence>& train) {
  if (train.empty()) throw ValidationError("cannot compute normalization from empty train split");
  const int d = train.front().dims();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(d);
  long n = 0;
  for (const auto& seq : train) {
    if (seq.dims() != d) throw ContractError("normalization: mixed feature dimensions");
    sum += seq.frames.colwise().sum().transpose();
    sumsq += seq.frames.array().square().colwise().sum().matrix().transpose();
    n += seq.length();
  }
  NormalizationStats stats;
  stats.mean = sum / static_cast<double>(n);
  Eigen::VectorXd var =
      sumsq / static_cast<double>(n) - stats.mean.array().square().matrix();
  stats.stddev = var.array().max(0.0).sqrt().max(kStdFloor);
  return stats;
}

std::vector<GaitSequence> normalize(const std::vector<GaitSequence>& sequences,
                                    const NormalizationStats& stats) {
  std::vector<GaitSequence> out = sequences;
  for (auto& seq : out) {
    if (seq.dims() != stats.mean.size())
      throw ContractError("normalize: sequence d=" + std::to_string(seq.dims()) +
                          " does not match stats d=" + std::to_string(stats.mean.size()));
    seq.frames = (seq.frames.rowwise() - stats.mean.transpose()).array().rowwise() /
                 stats.stddev.transpose().array();
  }
  return out;
}

std::vector<GaitSequence> denormalize(const std::vector<GaitSequence>& sequences,
                                      const NormalizationStats& stats) {
  std::vector<GaitSequence> out = sequences;
  for (auto& seq : out) {
    if (seq.dims() != stats.mean.size())
      throw ContractError("denormalize: sequence d=" + std::to_string(seq.dims()) +
                          " does not match stats d=" + std::to_string(stats.mean.size()));
    seq.frames = (seq.frames.array().rowwise() * stats.stddev.transpose().array())
                     .matrix()
                     .rowwise() +
                 stats.mean.transpose();
  }
  return out;
}

SplitResult split(const std::vector<GaitSequence>& sequences, double test_fraction,
                  std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ValidationError("test_fraction must be in (0, 1)");
  if (sequences.empty()) throw ValidationError("cannot split an empty dataset");

  const int C = sequences.front().label.num_classes();
  std::vector<std::vector<int>> by_class(C);
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const int c = sequences[i].label.index;
    if (c < 0 || c >= C) throw ContractError("split: label index out of range");
    by_class[c].push_back(static_cast<int>(i));
  }

  std::vector<bool> in_test(sequences.size(), false);
  for (int c = 0; c < C; ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) continue;
    if (idx.size() < 2)
      throw ValidationError("stratification error: class '" +
                            sequences.front().label.vocabulary->name_of(c) +
                            "' has fewer than 2 sequences");
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(c));
    for (std::size_t i = idx.size() - 1; i > 0; --i)
      std::swap(idx[i], idx[rng.below(i + 1)]);
    const auto n_test =
        static_cast<std::size_t>(std::llround(static_cast<double>(idx.size()) * test_fraction));
    for (std::size_t i = 0; i < n_test && i < idx.size(); ++i) in_test[idx[i]] = true;
  }

  SplitResult out;
  for (std::size_t i = 0; i < sequences.size(); ++i)
    (in_test[i] ? out.test : out.train).push_back(sequences[i]);
  return out;
}

Tensor3 sequences_to_tensor(const std::vector<GaitSequence>& sequences) {
  std::vector<int> indices(sequences.size());
  for (std::size_t i = 0; i < sequences.size(); ++i) indices[i] = static_cast<int>(i);
  return sequences_to_tensor(sequences, indices);
}

Tensor3 sequences_to_tensor(const std::vector<GaitSequence>& sequences,
                            const std::vector<int>& indices) {
  if (indices.empty()) throw ContractError("sequences_to_tensor: empty selection");
  const int T = sequences[indices[0]].length();
  const int d = sequences[indices[0]].dims();
  Tensor3 out(static_cast<int>(indices.size()), d, T);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const auto& seq = sequences[indices[b]];
    if (seq.length() != T || seq.dims() != d)
      throw ContractError("sequences_to_tensor: inconsistent shapes in batch");
    for (int t = 0; t < T; ++t)
      for (int j = 0; j < d; ++j) out.at(static_cast<int>(b), j, t) = seq.frames(t, j);
  }
  return out;
}

std::vector<Eigen::MatrixXd> tensor_to_frames(const Tensor3& batch) {
  std::vector<Eigen::MatrixXd> out(batch.batch);
  for (int b = 0; b < batch.batch; ++b) {
    out[b].resize(batch.time, batch.channels);
    for (int t = 0; t < batch.time; ++t)
      for (int j = 0; j < batch.channels; ++j) out[b](t, j) = batch.at(b, j, t);
  }
  return out;
}

int DatasetManifest::total_count() const {
  int total = 0;
  for (const auto& [name, count] : counts) total += count;
  return total;
}

std::string DatasetManifest::to_json_string() const {
  json doc;
  doc["kind"] = "pgcgan-dataset-manifest";
  doc["format_version"] = 1;
  doc["d"] = d;
  doc["T"] = T;
  doc["min_length_filter"] = min_length_filter;
  doc["window_policy"] = to_string(policy);
  doc["test_fraction"] = test_fraction;
  doc["seed"] = seed;
  doc["synthetic"] = synthetic;
  doc["stored_normalized"] = stored_normalized;
  doc["data_format"] = to_string(data_format);
  doc["vocabulary"] = vocabulary;
  doc["counts"] = counts;
  doc["normalization"]["mean"] = std::vector<double>(norm_mean.begin(), norm_mean.end());
  doc["normalization"]["std"] = std::vector<double>(norm_std.begin(), norm_std.end());
  doc["split"] = split;
  doc["files"] = files;
  return doc.dump(2);
}

DatasetManifest DatasetManifest::from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("invalid manifest JSON: ") + e.what());
  }
  if (doc.value("kind", std::string{}) != "pgcgan-dataset-manifest")
    throw ValidationError("not a dataset manifest (missing kind tag)");

  DatasetManifest m;
  m.d = doc.at("d").get<int>();
  m.T = doc.at("T").get<int>();
  m.min_length_filter = doc.value("min_length_filter", 1);
  m.policy = window_policy_from_string(doc.value("window_policy", std::string("center_crop")));
  m.test_fraction = doc.value("test_fraction", 0.2);
  m.seed = doc.value("seed", std::uint64_t{0});
  m.synthetic = doc.value("synthetic", false);
  m.stored_normalized = doc.value("stored_normalized", false);
  m.data_format = data_format_from_string(doc.value("data_format", std::string("jsonl")));
  m.vocabulary = doc.at("vocabulary").get<std::vector<std::string>>();
  m.counts = doc.at("counts").get<std::map<std::string, int>>();
  auto mean = doc.at("normalization").at("mean").get<std::vector<double>>();
  auto stdv = doc.at("normalization").at("std").get<std::vector<double>>();
  m.norm_mean = Eigen::Map<Eigen::VectorXd>(mean.data(), static_cast<long>(mean.size()));
  m.norm_std = Eigen::Map<Eigen::VectorXd>(stdv.data(), static_cast<long>(stdv.size()));
  for (double s : stdv)
    if (!(s > 0.0)) throw ValidationError("manifest std entries must be strictly positive");
  m.split = doc.value("split", std::map<std::string, std::string>{});
  m.files = doc.value("files", std::map<std::string, std::string>{});
  return m;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write manifest to " + path.string());
  out << manifest.to_json_string() << "\n";
}

namespace {

std::string sanitize_for_filename(const std::string& id) {
  std::string out;
  for (char c : id)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')
               ? c
               : '_';
  return out.empty() ? std::string("seq") : out;
}

void write_csv_sequence(const fs::path& dir, const GaitSequence& seq,
                        const std::string& stem) {
  std::ofstream out(dir / (stem + ".csv"));
  if (!out) throw ValidationError("cannot write " + (dir / (stem + ".csv")).string());
  out << "t";
  for (int j = 0; j < seq.dims(); ++j) out << ",f" << j;
  out << "\n";
  char cell[64];
  for (int t = 0; t < seq.length(); ++t) {
    out << t;
    for (int j = 0; j < seq.dims(); ++j) {
      std::snprintf(cell, sizeof(cell), ",%.9g", seq.frames(t, j));
      out << cell;
    }
    out << "\n";
  }
  std::ofstream meta(dir / (stem + ".meta"));
  if (!meta) throw ValidationError("cannot write " + (dir / (stem + ".meta")).string());
  meta << "label=" << seq.label.name() << "\n";
  if (!seq.subject_id.empty()) meta << "subject=" << seq.subject_id << "\n";
  if (seq.synthetic) meta << "synthetic=true\n";
}

}  // namespace

void save_dataset(const std::vector<GaitSequence>& sequences, const fs::path& path,
                  DataFormat format) {
  if (sequences.empty()) throw ValidationError("refusing to save an empty dataset");

  if (format == DataFormat::csv) {
    fs::create_directories(path);
    std::map<std::string, int> used;
    for (const auto& seq : sequences) {
      std::string stem = sanitize_for_filename(seq.id);
      const int n = used[stem]++;
      if (n > 0) stem += "_" + std::to_string(n);
      write_csv_sequence(path, seq, stem);
    }
    return;
  }

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (const auto& seq : sequences) {
    json obj;
    json frames = json::array();
    for (int t = 0; t < seq.length(); ++t) {
      json row = json::array();
      for (int j = 0; j < seq.dims(); ++j) row.push_back(seq.frames(t, j));
      frames.push_back(std::move(row));
    }
    obj["frames"] = std::move(frames);
    obj["label"] = seq.label.name();
    if (!seq.subject_id.empty()) obj["subject"] = seq.subject_id;
    if (seq.synthetic) obj["synthetic"] = true;
    obj["id"] = seq.id;
    out << obj.dump() << "\n";
  }
  if (!out) throw ValidationError("short write to " + path.string());
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return DatasetManifest::from_json_string(buf.str());
}

std::vector<GaitSequence> with_vocabulary(const std::vector<GaitSequence>& sequences,
                                          const VocabularyPtr& vocab) {
  std::vector<GaitSequence> out = sequences;
  for (auto& seq : out) {
    const int idx = vocab->index_of(seq.label.name());
    if (idx < 0)
      throw ValidationError("sequence '" + seq.id + "' has label '" + seq.label.name() +
                            "' not present in target vocabulary");
    seq.label.index = idx;
    seq.label.vocabulary = vocab;
  }
  return out;
}

std::vector<GaitSequence> ManifestedDataset::all() const {
  std::vector<GaitSequence> out = train;
  out.insert(out.end(), test.begin(), test.end());
  return out;
}

ManifestedDataset ingest(const fs::path& raw_path, const fs::path& out_dir,
                         const IngestOptions& options) {
  if (options.min_length < 1) throw ValidationError("min_length must be >= 1");
  if (options.window < 1) throw ValidationError("window must be >= 1");
  if (!(options.test_fraction > 0.0 && options.test_fraction < 1.0))
    throw ValidationError("test_fraction must lie in (0, 1)");

  Dataset raw = load_dataset(raw_path, options.in_format);
  std::vector<GaitSequence> kept = filter_min_length(raw.sequences, options.min_length);
  if (kept.empty())
    throw ValidationError("no sequences of length >= " + std::to_string(options.min_length) +
                          " under " + raw_path.string());

  {
    std::set<std::string> ids;
    for (const auto& seq : kept)
      if (!ids.insert(seq.id).second)
        throw ValidationError("duplicate sequence id '" + seq.id + "'");
  }

  std::vector<GaitSequence> windowed;
  windowed.reserve(kept.size());
  for (const auto& seq : kept) windowed.push_back(window_fixed(seq, options.window, options.policy));

  SplitResult parts = split(windowed, options.test_fraction, options.seed);
  const NormalizationStats stats = compute_normalization(parts.train);

  ManifestedDataset out;
  out.vocabulary = raw.vocabulary;
  out.train = normalize(parts.train, stats);
  out.test = normalize(parts.test, stats);

  DatasetManifest& m = out.manifest;
  m.d = windowed.front().dims();
  m.T = options.window;
  m.min_length_filter = options.min_length;
  m.policy = options.policy;
  m.test_fraction = options.test_fraction;
  m.seed = options.seed;
  m.synthetic = false;
  m.stored_normalized = true;
  m.data_format = options.out_format;
  m.vocabulary = raw.vocabulary->names;
  for (const auto& seq : windowed) ++m.counts[seq.label.name()];
  m.norm_mean = stats.mean;
  m.norm_std = stats.stddev;
  for (const auto& seq : out.train) m.split[seq.id] = "train";
  for (const auto& seq : out.test) m.split[seq.id] = "test";

  const bool csv = options.out_format == DataFormat::csv;
  m.files["train"] = csv ? "train" : "train.jsonl";
  m.files["test"] = csv ? "test" : "test.jsonl";

  fs::create_directories(out_dir);
  save_dataset(out.train, out_dir / m.files["train"], options.out_format);
  save_dataset(out.test, out_dir / m.files["test"], options.out_format);
  save_manifest(m, out_dir / "manifest.json");
  return out;
}

ManifestedDataset load_manifested_dataset(const fs::path& manifest_path) {
  ManifestedDataset out;
  out.manifest = load_manifest(manifest_path);
  out.vocabulary = make_vocabulary(out.manifest.vocabulary);
  const fs::path base = manifest_path.parent_path();

  auto load_part = [&](const std::string& part) -> std::vector<GaitSequence> {
    auto it = out.manifest.files.find(part);
    if (it == out.manifest.files.end()) return {};
    Dataset raw = load_dataset(base / it->second, out.manifest.data_format);
    return with_vocabulary(raw.sequences, out.vocabulary);
  };

  out.train = load_part("train");
  out.test = load_part("test");
  if (out.train.empty() && out.test.empty())
    throw ValidationError("manifest " + manifest_path.string() + " references no data files");
  return out;
}

}  // namespace pgcgan
