#include <doctest.h>

#include <cmath>

#include "json.hpp"
#include "pgcgan/classify.hpp"
#include "support.hpp"

using namespace pgcgan;

namespace {

// Sequences whose per-dimension level encodes the class, trivially separable.
std::vector<GaitSequence> level_set(const VocabularyPtr& vocab, int per_class, int T, int d,
                                    std::uint64_t seed, const std::string& prefix) {
  Rng rng(seed);
  std::vector<GaitSequence> out;
  for (int c = 0; c < vocab->size(); ++c)
    for (int i = 0; i < per_class; ++i) {
      GaitSequence seq;
      seq.frames.resize(T, d);
      for (int t = 0; t < T; ++t)
        for (int j = 0; j < d; ++j)
          seq.frames(t, j) = 2.0 * c - 2.0 + 0.1 * rng.normal();
      seq.label = {c, vocab};
      seq.subject_id = "s" + std::to_string(c);
      seq.id = prefix + std::to_string(c) + "_" + std::to_string(i);
      seq.source_length = T;
      out.push_back(std::move(seq));
    }
  return out;
}

ClassifierSpec small_spec(ClassifierKind kind, std::uint64_t seed = 1) {
  ClassifierSpec spec;
  spec.kind = kind;
  spec.hidden = 8;
  spec.layers = 1;
  spec.conv_channels = {8, 8};
  spec.kernel_size = 3;
  spec.conv_stride = 2;
  spec.dropout = 0.1;
  spec.learning_rate = 0.01;
  spec.epochs = 30;
  spec.batch_size = 8;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_SUITE("classify") {

TEST_CASE("kind and regime names round trip") {
  CHECK(std::string(to_string(ClassifierKind::gru)) == "gru");
  CHECK(std::string(to_string(ClassifierKind::lstm)) == "lstm");
  CHECK(std::string(to_string(ClassifierKind::cnn)) == "cnn");
  CHECK(classifier_kind_from_string("lstm") == ClassifierKind::lstm);
  CHECK_THROWS_AS(classifier_kind_from_string("mlp"), ValidationError);
  CHECK(std::string(to_string(Regime::real_only)) == "real");
  CHECK(std::string(to_string(Regime::synthetic_only)) == "synthetic");
  CHECK(std::string(to_string(Regime::real_plus_synthetic)) == "real+synthetic");
}

TEST_CASE("spec validation") {
  ClassifierSpec spec = small_spec(ClassifierKind::gru);
  spec.hidden = 0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = small_spec(ClassifierKind::cnn);
  spec.kernel_size = 4;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = small_spec(ClassifierKind::cnn);
  spec.conv_channels = {};
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = small_spec(ClassifierKind::gru);
  spec.dropout = 1.0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = small_spec(ClassifierKind::gru);
  spec.learning_rate = 0.0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = small_spec(ClassifierKind::gru);
  spec.epochs = 0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
}

TEST_CASE("every architecture learns a trivially separable problem") {
  auto vocab = testsup::vocab_abc();
  auto train = level_set(vocab, 12, 10, 2, 50, "tr");
  auto test = level_set(vocab, 6, 10, 2, 51, "te");
  for (auto kind : {ClassifierKind::gru, ClassifierKind::lstm, ClassifierKind::cnn}) {
    auto result = train_classifier(small_spec(kind), train, test);
    CHECK(result.accuracy >= 0.99);
    CHECK(result.warnings.empty());
  }
}

TEST_CASE("confusion matrix accounting is exact") {
  auto vocab = testsup::vocab_abc();
  auto train = level_set(vocab, 10, 8, 2, 52, "tr");
  auto test = level_set(vocab, 5, 8, 2, 53, "te");
  auto result = train_classifier(small_spec(ClassifierKind::gru), train, test);

  REQUIRE(result.confusion.rows() == 3);
  REQUIRE(result.confusion.cols() == 3);
  int total = 0;
  for (int c = 0; c < 3; ++c) {
    CHECK(result.confusion.row(c).sum() == 5);
    total += result.confusion.row(c).sum();
  }
  CHECK(total == 15);
  CHECK(result.accuracy ==
        static_cast<double>(result.confusion.trace()) / static_cast<double>(total));
  REQUIRE(result.per_class_accuracy.size() == 3);
  for (int c = 0; c < 3; ++c)
    CHECK(result.per_class_accuracy(c) ==
          static_cast<double>(result.confusion(c, c)) / 5.0);
}

TEST_CASE("pure noise scores near chance on held-out data") {
  auto vocab = make_vocabulary({"x", "y"});
  auto train = testsup::random_set(vocab, 20, 8, 2, 54);
  auto test = testsup::random_set(vocab, 20, 8, 2, 55);
  for (auto& s : test) s.id = "te_" + s.id;
  auto spec = small_spec(ClassifierKind::gru);
  spec.epochs = 10;
  auto result = train_classifier(spec, train, test);
  CHECK(result.accuracy > 0.25);
  CHECK(result.accuracy < 0.75);
}

TEST_CASE("training is deterministic in the seed") {
  auto vocab = testsup::vocab_abc();
  auto train = level_set(vocab, 8, 8, 2, 56, "tr");
  auto test = level_set(vocab, 4, 8, 2, 57, "te");
  auto a = train_classifier(small_spec(ClassifierKind::lstm, 3), train, test);
  auto b = train_classifier(small_spec(ClassifierKind::lstm, 3), train, test);
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.confusion == b.confusion);
}

TEST_CASE("a class absent from the train set produces a warning") {
  auto vocab = testsup::vocab_abc();
  auto train = level_set(vocab, 8, 8, 2, 58, "tr");
  train.erase(std::remove_if(train.begin(), train.end(),
                             [](const GaitSequence& s) { return s.label.index == 2; }),
              train.end());
  auto test = level_set(vocab, 3, 8, 2, 59, "te");
  auto result = train_classifier(small_spec(ClassifierKind::cnn), train, test);
  REQUIRE(!result.warnings.empty());
  bool found = false;
  for (const auto& w : result.warnings)
    found = found || w.find("class 'gamma' absent from the train set") != std::string::npos;
  CHECK(found);
}

TEST_CASE("shape and label mismatches are rejected") {
  auto vocab = testsup::vocab_abc();
  auto train = level_set(vocab, 4, 8, 2, 60, "tr");
  auto short_test = level_set(vocab, 2, 6, 2, 61, "te");
  CHECK_THROWS_AS(train_classifier(small_spec(ClassifierKind::gru), train, short_test),
                  ContractError);
  auto other_vocab = make_vocabulary({"p", "q", "r"});
  auto other = level_set(other_vocab, 2, 8, 2, 62, "te");
  CHECK_THROWS_AS(train_classifier(small_spec(ClassifierKind::gru), train, other),
                  ContractError);
  CHECK_THROWS_AS(train_classifier(small_spec(ClassifierKind::gru), {}, train),
                  ValidationError);
}

TEST_CASE("benchmark grid covers the three regimes per model") {
  auto vocab = make_vocabulary({"a", "b"});
  auto real_train = level_set(vocab, 10, 8, 2, 63, "tr");
  auto real_test = level_set(vocab, 5, 8, 2, 64, "te");
  auto synthetic = level_set(vocab, 10, 8, 2, 65, "syn");
  for (auto& s : synthetic) s.synthetic = true;

  std::vector<ClassifierSpec> specs{small_spec(ClassifierKind::gru, 1),
                                    small_spec(ClassifierKind::cnn, 2)};
  auto grid = run_benchmark(real_train, real_test, synthetic, specs);

  REQUIRE(grid.kinds.size() == 2);
  CHECK(grid.kinds[0] == ClassifierKind::gru);
  CHECK(grid.kinds[1] == ClassifierKind::cnn);
  REQUIRE(grid.rows.size() == 2);
  for (const auto& row : grid.rows) {
    REQUIRE(row.size() == 3);
    CHECK(row[0].regime == Regime::real_only);
    CHECK(row[1].regime == Regime::synthetic_only);
    CHECK(row[2].regime == Regime::real_plus_synthetic);
    for (const auto& cell : row) CHECK(cell.accuracy >= 0.9);  // separable everywhere
  }
}

TEST_CASE("benchmark rejects contaminated test sets") {
  auto vocab = make_vocabulary({"a", "b"});
  auto real_train = level_set(vocab, 4, 8, 2, 66, "tr");
  auto real_test = level_set(vocab, 2, 8, 2, 67, "te");
  auto synthetic = level_set(vocab, 4, 8, 2, 68, "syn");
  for (auto& s : synthetic) s.synthetic = true;
  std::vector<ClassifierSpec> specs{small_spec(ClassifierKind::gru)};

  auto poisoned = real_test;
  poisoned[0].synthetic = true;
  CHECK_THROWS_AS(run_benchmark(real_train, poisoned, synthetic, specs), ContractError);

  auto leaked = real_test;
  leaked[0].id = real_train[0].id;
  CHECK_THROWS_AS(run_benchmark(real_train, leaked, synthetic, specs), ContractError);

  CHECK_THROWS_AS(run_benchmark(real_train, real_test, synthetic, {}), ValidationError);
}

TEST_CASE("grid csv prints percentages with two decimals") {
  BenchmarkGrid grid;
  grid.kinds = {ClassifierKind::gru, ClassifierKind::lstm};
  auto cell = [](Regime regime, double accuracy) {
    RegimeResult r;
    r.regime = regime;
    r.accuracy = accuracy;
    return r;
  };
  grid.rows.push_back({cell(Regime::real_only, 0.9187), cell(Regime::synthetic_only, 0.8765),
                       cell(Regime::real_plus_synthetic, 0.9261)});
  grid.rows.push_back({cell(Regime::real_only, 0.9048), cell(Regime::synthetic_only, 0.8526),
                       cell(Regime::real_plus_synthetic, 0.9008)});
  CHECK(grid_to_csv(grid) ==
        "model,real,synthetic,real+synthetic\n"
        "gru,91.87,87.65,92.61\n"
        "lstm,90.48,85.26,90.08\n");
}

TEST_CASE("grid json carries every cell") {
  BenchmarkGrid grid;
  grid.kinds = {ClassifierKind::cnn};
  RegimeResult r;
  r.regime = Regime::real_only;
  r.accuracy = 0.875;
  r.per_class_accuracy = Eigen::VectorXd::Constant(2, 0.875);
  r.confusion = Eigen::MatrixXi::Zero(2, 2);
  r.confusion(0, 0) = 7;
  r.confusion(1, 1) = 7;
  r.confusion(0, 1) = 1;
  r.confusion(1, 0) = 1;
  RegimeResult s = r;
  s.regime = Regime::synthetic_only;
  RegimeResult t = r;
  t.regime = Regime::real_plus_synthetic;
  t.warnings = {"something"};
  grid.rows.push_back({r, s, t});

  auto doc = nlohmann::json::parse(grid_to_json_string(grid));
  CHECK(doc.at("kind") == "pgcgan-benchmark");
  REQUIRE(doc.at("rows").size() == 1);
  CHECK(doc.at("rows")[0].at("model") == "cnn");
  const auto& cells = doc.at("rows")[0].at("cells");
  REQUIRE(cells.size() == 3);
  CHECK(cells[0].at("regime") == "real");
  CHECK(cells[0].at("accuracy") == 0.875);
  CHECK(cells[2].at("warnings")[0] == "something");
  CHECK(cells[1].at("confusion")[0][0] == 7);
}

TEST_CASE("baseline comparison picks the best augmented cell") {
  BenchmarkGrid grid;
  grid.kinds = {ClassifierKind::gru, ClassifierKind::lstm, ClassifierKind::cnn};
  auto row = [](double real, double synth, double aug) {
    std::vector<RegimeResult> cells(3);
    cells[0].regime = Regime::real_only;
    cells[0].accuracy = real;
    cells[1].regime = Regime::synthetic_only;
    cells[1].accuracy = synth;
    cells[2].regime = Regime::real_plus_synthetic;
    cells[2].accuracy = aug;
    return cells;
  };
  grid.rows.push_back(row(0.9187, 0.8765, 0.9261));
  grid.rows.push_back(row(0.9048, 0.8526, 0.9008));
  grid.rows.push_back(row(0.8790, 0.8371, 0.8956));

  auto cmp = compare_baseline(grid, 90.13);
  CHECK(cmp.baseline == 90.13);
  CHECK(cmp.best_model == "gru");
  CHECK(cmp.best_augmented == doctest::Approx(92.61).epsilon(1e-9));
  CHECK(cmp.delta == doctest::Approx(92.61 - 90.13).epsilon(1e-9));
  CHECK(cmp.augmentation_beat_real.at("gru"));
  CHECK(!cmp.augmentation_beat_real.at("lstm"));
  CHECK(cmp.augmentation_beat_real.at("cnn"));

  BenchmarkGrid empty;
  CHECK_THROWS_AS(compare_baseline(empty, 90.13), ValidationError);
}

}  // TEST_SUITE
