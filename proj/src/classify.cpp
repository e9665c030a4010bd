#include "pgcgan/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <set>

#include "pgcgan/nn.hpp"
#include "pgcgan/rng.hpp"
#include "pgcgan/tensor.hpp"
#include "json.hpp"

using nlohmann::json;

namespace pgcgan {

const char* to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::gru: return "gru";
    case ClassifierKind::lstm: return "lstm";
    case ClassifierKind::cnn: return "cnn";
  }
  return "unknown";
}

ClassifierKind classifier_kind_from_string(const std::string& s) {
  if (s == "gru") return ClassifierKind::gru;
  if (s == "lstm") return ClassifierKind::lstm;
  if (s == "cnn") return ClassifierKind::cnn;
  throw ValidationError("unknown classifier kind '" + s + "' (expected gru, lstm or cnn)");
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::real_only: return "real";
    case Regime::synthetic_only: return "synthetic";
    case Regime::real_plus_synthetic: return "real+synthetic";
  }
  return "unknown";
}

void ClassifierSpec::validate() const {
  if (hidden < 1 || layers < 1) throw ValidationError("classifier hidden and layers must be >= 1");
  if (kind == ClassifierKind::cnn) {
    if (conv_channels.empty()) throw ValidationError("cnn needs at least one conv block");
    for (int c : conv_channels)
      if (c < 1) throw ValidationError("cnn channel widths must be >= 1");
    if (kernel_size < 1 || kernel_size % 2 == 0)
      throw ValidationError("cnn kernel size must be odd and positive");
    if (conv_stride < 1) throw ValidationError("cnn stride must be >= 1");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("dropout must lie in [0, 1)");
  if (learning_rate <= 0.0) throw ValidationError("classifier learning rate must be positive");
  if (epochs < 1 || batch_size < 1)
    throw ValidationError("classifier epochs and batch size must be >= 1");
}

namespace {

using Mat = Eigen::MatrixXd;
using Arr = Eigen::ArrayXXd;

Mat sigmoid(const Mat& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

Mat rand_uniform(int rows, int cols, double scale, Rng& rng) {
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = (rng.uniform() * 2.0 - 1.0) * scale;
  return m;
}

std::vector<int> batch_targets(const std::vector<GaitSequence>& set,
                               const std::vector<int>& idx) {
  std::vector<int> t(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) t[i] = set[idx[i]].label.index;
  return t;
}

// Softmax cross-entropy, batch mean. Writes dL/dlogits.
double ce_loss(const Mat& logits, const std::vector<int>& targets, Mat* dlogits) {
  const long B = logits.rows(), C = logits.cols();
  double loss = 0.0;
  if (dlogits) dlogits->resize(B, C);
  for (long b = 0; b < B; ++b) {
    const double mx = logits.row(b).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(b).array() - mx).exp();
    const double z = e.sum();
    loss -= std::log(std::max(e(targets[b]) / z, 1e-300));
    if (dlogits) {
      dlogits->row(b) = e / z;
      (*dlogits)(b, targets[b]) -= 1.0;
    }
  }
  if (dlogits) *dlogits /= static_cast<double>(B);
  return loss / static_cast<double>(B);
}

struct Net {
  virtual ~Net() = default;
  virtual std::vector<nn::ParamRef> params() = 0;
  // Caches for backward when train is set.
  virtual Mat forward(const std::vector<GaitSequence>& set, const std::vector<int>& idx,
                      bool train, Rng& rng) = 0;
  virtual void backward(const Mat& dlogits, nn::GradMap& grads) = 0;
};

// ---- recurrent nets ---------------------------------------------------------

struct RnnLayer {
  Mat w, u;                 // stacked gate rows: gru [r,z,n], lstm [i,f,g,o]
  Eigen::VectorXd bx, bh;
};

struct RnnStep {
  Mat x, h_prev;
  Mat r, z, n, ghn;               // gru
  Mat i, f, g, o, c_prev, c, tc;  // lstm
};

struct RnnNet : Net {
  ClassifierSpec spec;
  bool lstm = false;
  int in = 0, C = 0;
  std::vector<RnnLayer> layers;
  nn::Linear head;

  std::vector<std::vector<RnnStep>> steps;  // [layer][t]
  std::vector<std::vector<Arr>> masks;      // dropout on layer l output, l < last
  Mat last_h;

  RnnNet(const ClassifierSpec& s, int in_dim, int num_classes, Rng& rng)
      : spec(s), lstm(s.kind == ClassifierKind::lstm), in(in_dim), C(num_classes) {
    const int gates = lstm ? 4 : 3;
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.hidden));
    for (int l = 0; l < spec.layers; ++l) {
      const int in_l = l == 0 ? in : spec.hidden;
      RnnLayer layer;
      layer.w = rand_uniform(gates * spec.hidden, in_l, scale, rng);
      layer.u = rand_uniform(gates * spec.hidden, spec.hidden, scale, rng);
      layer.bx = rand_uniform(gates * spec.hidden, 1, scale, rng).col(0);
      layer.bh = rand_uniform(gates * spec.hidden, 1, scale, rng).col(0);
      layers.push_back(std::move(layer));
    }
    head = nn::make_linear(spec.hidden, C, rng);
  }

  std::vector<nn::ParamRef> params() override {
    std::vector<nn::ParamRef> out;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const std::string p = "l" + std::to_string(l) + ".";
      out.push_back(nn::param_ref(p + "w", layers[l].w));
      out.push_back(nn::param_ref(p + "u", layers[l].u));
      out.push_back(nn::param_ref(p + "bx", layers[l].bx));
      out.push_back(nn::param_ref(p + "bh", layers[l].bh));
    }
    out.push_back(nn::param_ref("head.w", head.weight));
    out.push_back(nn::param_ref("head.b", head.bias));
    return out;
  }

  Mat forward(const std::vector<GaitSequence>& set, const std::vector<int>& idx, bool train,
              Rng& rng) override {
    const int B = static_cast<int>(idx.size());
    const int T = set[idx[0]].length();
    const int H = spec.hidden;
    const int L = static_cast<int>(layers.size());

    std::vector<Mat> cur(T, Mat(B, in));
    for (int b = 0; b < B; ++b) {
      const Eigen::MatrixXd& frames = set[idx[b]].frames;
      for (int t = 0; t < T; ++t) cur[t].row(b) = frames.row(t);
    }

    steps.assign(L, {});
    masks.assign(L > 0 ? L - 1 : 0, {});

    for (int l = 0; l < L; ++l) {
      const RnnLayer& ly = layers[l];
      Mat h = Mat::Zero(B, H), c = Mat::Zero(B, H);
      std::vector<Mat> outs(T);
      if (train) steps[l].resize(T);
      for (int t = 0; t < T; ++t) {
        Mat gx = cur[t] * ly.w.transpose();
        gx.rowwise() += ly.bx.transpose();
        Mat gh = h * ly.u.transpose();
        gh.rowwise() += ly.bh.transpose();
        RnnStep st;
        if (train) {
          st.x = cur[t];
          st.h_prev = h;
        }
        if (!lstm) {
          Mat r = sigmoid(gx.leftCols(H) + gh.leftCols(H));
          Mat z = sigmoid(gx.middleCols(H, H) + gh.middleCols(H, H));
          Mat ghn = gh.rightCols(H);
          Mat n = (gx.rightCols(H).array() + r.array() * ghn.array()).tanh().matrix();
          h = ((1.0 - z.array()) * n.array() + z.array() * h.array()).matrix();
          if (train) {
            st.r = std::move(r);
            st.z = std::move(z);
            st.n = std::move(n);
            st.ghn = std::move(ghn);
          }
        } else {
          Mat gates = gx + gh;
          Mat gi = sigmoid(gates.leftCols(H));
          Mat gf = sigmoid(gates.middleCols(H, H));
          Mat gg = gates.middleCols(2 * H, H).array().tanh().matrix();
          Mat go = sigmoid(gates.rightCols(H));
          if (train) st.c_prev = c;
          c = (gf.array() * c.array() + gi.array() * gg.array()).matrix();
          Mat tc = c.array().tanh().matrix();
          h = go.cwiseProduct(tc);
          if (train) {
            st.i = std::move(gi);
            st.f = std::move(gf);
            st.g = std::move(gg);
            st.o = std::move(go);
            st.c = c;
            st.tc = std::move(tc);
          }
        }
        if (train) steps[l][t] = std::move(st);
        outs[t] = h;
      }

      if (l < L - 1 && train && spec.dropout > 0.0) {
        masks[l].resize(T);
        const double keep = 1.0 - spec.dropout;
        for (int t = 0; t < T; ++t) {
          Arr mask(B, H);
          for (int b = 0; b < B; ++b)
            for (int j = 0; j < H; ++j) mask(b, j) = rng.uniform() < keep ? 1.0 / keep : 0.0;
          outs[t] = (outs[t].array() * mask).matrix();
          masks[l][t] = std::move(mask);
        }
      }
      cur = std::move(outs);
    }

    last_h = cur.back();
    Mat logits = last_h * head.weight.transpose();
    logits.rowwise() += head.bias.transpose();
    return logits;
  }

  void backward(const Mat& dlogits, nn::GradMap& grads) override {
    const int L = static_cast<int>(layers.size());
    const int T = static_cast<int>(steps[0].size());
    const long B = dlogits.rows();
    const int H = spec.hidden;
    const int gates = lstm ? 4 : 3;

    grads.add("head.w", Mat(dlogits.transpose() * last_h));
    grads.add("head.b", Eigen::VectorXd(dlogits.colwise().sum().transpose()));

    std::vector<Mat> dout(T, Mat::Zero(B, H));
    dout[T - 1] = dlogits * head.weight;

    for (int l = L - 1; l >= 0; --l) {
      const RnnLayer& ly = layers[l];
      Mat dw = Mat::Zero(ly.w.rows(), ly.w.cols());
      Mat du = Mat::Zero(ly.u.rows(), ly.u.cols());
      Eigen::VectorXd dbx = Eigen::VectorXd::Zero(gates * H);
      Eigen::VectorXd dbh = Eigen::VectorXd::Zero(gates * H);
      Mat dh_carry = Mat::Zero(B, H), dc_carry = Mat::Zero(B, H);
      std::vector<Mat> dx(T);

      for (int t = T - 1; t >= 0; --t) {
        const RnnStep& st = steps[l][t];
        const Arr dh = (dout[t] + dh_carry).array();
        Mat dgx(B, gates * H), dgh(B, gates * H);
        if (!lstm) {
          const Arr z = st.z.array(), r = st.r.array(), n = st.n.array();
          const Arr dn_pre = dh * (1.0 - z) * (1.0 - n.square());
          const Arr dz_pre = dh * (st.h_prev.array() - n) * z * (1.0 - z);
          const Arr dghn = dn_pre * r;
          const Arr dr_pre = dn_pre * st.ghn.array() * r * (1.0 - r);
          dgx.leftCols(H) = dr_pre.matrix();
          dgx.middleCols(H, H) = dz_pre.matrix();
          dgx.rightCols(H) = dn_pre.matrix();
          dgh.leftCols(H) = dr_pre.matrix();
          dgh.middleCols(H, H) = dz_pre.matrix();
          dgh.rightCols(H) = dghn.matrix();
          dh_carry = (dh * z).matrix() + dgh * ly.u;
        } else {
          const Arr i = st.i.array(), f = st.f.array(), g = st.g.array(), o = st.o.array();
          const Arr tc = st.tc.array();
          const Arr dc = dc_carry.array() + dh * o * (1.0 - tc.square());
          dgx.leftCols(H) = (dc * g * i * (1.0 - i)).matrix();
          dgx.middleCols(H, H) = (dc * st.c_prev.array() * f * (1.0 - f)).matrix();
          dgx.middleCols(2 * H, H) = (dc * i * (1.0 - g.square())).matrix();
          dgx.rightCols(H) = (dh * tc * o * (1.0 - o)).matrix();
          dgh = dgx;
          dc_carry = (dc * f).matrix();
          dh_carry = dgh * ly.u;
        }
        dw += dgx.transpose() * st.x;
        du += dgh.transpose() * st.h_prev;
        dbx += dgx.colwise().sum().transpose();
        dbh += dgh.colwise().sum().transpose();
        if (l > 0) dx[t] = dgx * ly.w;
      }

      const std::string p = "l" + std::to_string(l) + ".";
      grads.add(p + "w", dw);
      grads.add(p + "u", du);
      grads.add(p + "bx", dbx);
      grads.add(p + "bh", dbh);

      if (l > 0)
        for (int t = 0; t < T; ++t)
          dout[t] = masks[l - 1].empty() ? dx[t]
                                         : (dx[t].array() * masks[l - 1][t]).matrix();
    }
  }
};

// ---- temporal convolution net ----------------------------------------------

struct CnnNet : Net {
  ClassifierSpec spec;
  int in = 0, C = 0;
  std::vector<nn::Conv1d> convs;
  nn::Linear head;

  std::vector<Tensor3> xs, ys;
  Mat pooled;
  Arr mask;
  bool mask_active = false;

  CnnNet(const ClassifierSpec& s, int in_dim, int num_classes, Rng& rng)
      : spec(s), in(in_dim), C(num_classes) {
    int ch = in;
    for (int width : spec.conv_channels) {
      convs.push_back(nn::make_conv1d(ch, width, spec.kernel_size, spec.conv_stride, rng));
      ch = width;
    }
    head = nn::make_linear(ch, C, rng);
  }

  std::vector<nn::ParamRef> params() override {
    std::vector<nn::ParamRef> out;
    for (std::size_t i = 0; i < convs.size(); ++i) {
      const std::string p = "conv" + std::to_string(i) + ".";
      out.push_back(nn::param_ref(p + "w", convs[i].weight));
      out.push_back(nn::param_ref(p + "b", convs[i].bias));
    }
    out.push_back(nn::param_ref("head.w", head.weight));
    out.push_back(nn::param_ref("head.b", head.bias));
    return out;
  }

  Mat forward(const std::vector<GaitSequence>& set, const std::vector<int>& idx, bool train,
              Rng& rng) override {
    Tensor3 cur = sequences_to_tensor(set, idx);
    xs.clear();
    ys.clear();
    for (const auto& conv : convs) {
      Tensor3 y = conv1d_forward(conv, cur, true);
      if (train) {
        xs.push_back(std::move(cur));
        ys.push_back(y);
      }
      cur = std::move(y);
    }

    const int B = cur.batch, ch = cur.channels, Tn = cur.time;
    pooled.resize(B, ch);
    for (int b = 0; b < B; ++b)
      for (int c = 0; c < ch; ++c) {
        double sum = 0.0;
        for (int t = 0; t < Tn; ++t) sum += cur.at(b, c, t);
        pooled(b, c) = sum / Tn;
      }

    mask_active = train && spec.dropout > 0.0;
    if (mask_active) {
      const double keep = 1.0 - spec.dropout;
      mask.resize(B, ch);
      for (int b = 0; b < B; ++b)
        for (int c = 0; c < ch; ++c) mask(b, c) = rng.uniform() < keep ? 1.0 / keep : 0.0;
      pooled = (pooled.array() * mask).matrix();
    }

    Mat logits = pooled * head.weight.transpose();
    logits.rowwise() += head.bias.transpose();
    return logits;
  }

  void backward(const Mat& dlogits, nn::GradMap& grads) override {
    grads.add("head.w", Mat(dlogits.transpose() * pooled));
    grads.add("head.b", Eigen::VectorXd(dlogits.colwise().sum().transpose()));

    Mat dpooled = dlogits * head.weight;
    if (mask_active) dpooled = (dpooled.array() * mask).matrix();

    const Tensor3& last = ys.back();
    Tensor3 dy(last.batch, last.channels, last.time);
    for (int b = 0; b < last.batch; ++b)
      for (int c = 0; c < last.channels; ++c) {
        const double v = dpooled(b, c) / last.time;
        for (int t = 0; t < last.time; ++t) dy.at(b, c, t) = v;
      }

    for (int i = static_cast<int>(convs.size()) - 1; i >= 0; --i) {
      Mat dw = Mat::Zero(convs[i].weight.rows(), convs[i].weight.cols());
      Eigen::VectorXd db = Eigen::VectorXd::Zero(convs[i].bias.size());
      Tensor3 dx = conv1d_backward(convs[i], xs[i], ys[i], dy, true, &dw, &db, i > 0);
      const std::string p = "conv" + std::to_string(i) + ".";
      grads.add(p + "w", dw);
      grads.add(p + "b", db);
      dy = std::move(dx);
    }
  }
};

}  // namespace

RegimeResult train_classifier(const ClassifierSpec& spec,
                              const std::vector<GaitSequence>& train_set,
                              const std::vector<GaitSequence>& test_set) {
  spec.validate();
  if (train_set.empty()) throw ValidationError("classifier train set is empty");
  if (test_set.empty()) throw ValidationError("classifier test set is empty");

  const VocabularyPtr vocab = train_set.front().label.vocabulary;
  if (!vocab) throw ContractError("classifier sequences carry no vocabulary");
  const VocabularyPtr tvocab = test_set.front().label.vocabulary;
  if (tvocab && tvocab->names != vocab->names)
    throw ContractError("train and test sets use different vocabularies");
  const int C = vocab->size();
  if (C < 2) throw ValidationError("classification needs at least two classes");

  const int T = train_set.front().length(), d = train_set.front().dims();
  for (const auto* set : {&train_set, &test_set})
    for (const auto& seq : *set) {
      if (seq.length() != T || seq.dims() != d)
        throw ContractError("classifier input shapes are inconsistent (sequence '" + seq.id +
                            "')");
      if (seq.label.index < 0 || seq.label.index >= C)
        throw ContractError("sequence '" + seq.id + "' has an out-of-range label");
    }

  RegimeResult result;
  std::vector<int> train_counts(C, 0);
  for (const auto& seq : train_set) ++train_counts[seq.label.index];
  for (int c = 0; c < C; ++c)
    if (train_counts[c] == 0)
      result.warnings.push_back("class '" + vocab->names[c] + "' absent from the train set");

  Rng rng = Rng::stream(spec.seed, 0x636c6673ull);
  std::unique_ptr<Net> net;
  if (spec.kind == ClassifierKind::cnn)
    net = std::make_unique<CnnNet>(spec, d, C, rng);
  else
    net = std::make_unique<RnnNet>(spec, d, C, rng);

  nn::Adam adam(spec.learning_rate, 0.9, 0.999);
  const auto params = net->params();

  const int n = static_cast<int>(train_set.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    for (int i = 0; i < n - 1; ++i) {
      const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
      std::swap(order[i], order[j]);
    }
    for (int start = 0; start < n; start += spec.batch_size) {
      const int len = std::min(spec.batch_size, n - start);
      std::vector<int> idx(order.begin() + start, order.begin() + start + len);
      Mat logits = net->forward(train_set, idx, true, rng);
      Mat dlogits;
      ce_loss(logits, batch_targets(train_set, idx), &dlogits);
      nn::GradMap grads;
      net->backward(dlogits, grads);
      adam.tick();
      for (const auto& param : params) adam.update(param, grads.slot(param.name, param.size));
    }
  }

  result.confusion = Eigen::MatrixXi::Zero(C, C);
  const int m = static_cast<int>(test_set.size());
  for (int start = 0; start < m; start += spec.batch_size) {
    const int len = std::min(spec.batch_size, m - start);
    std::vector<int> idx(len);
    for (int i = 0; i < len; ++i) idx[i] = start + i;
    Mat logits = net->forward(test_set, idx, false, rng);
    for (int i = 0; i < len; ++i) {
      int pred = 0;
      for (int c = 1; c < C; ++c)
        if (logits(i, c) > logits(i, pred)) pred = c;
      result.confusion(test_set[idx[i]].label.index, pred) += 1;
    }
  }

  result.accuracy = static_cast<double>(result.confusion.trace()) / m;
  result.per_class_accuracy = Eigen::VectorXd::Zero(C);
  for (int c = 0; c < C; ++c) {
    const int row = result.confusion.row(c).sum();
    if (row > 0)
      result.per_class_accuracy(c) = static_cast<double>(result.confusion(c, c)) / row;
  }
  return result;
}

BenchmarkGrid run_benchmark(const std::vector<GaitSequence>& real_train,
                            const std::vector<GaitSequence>& real_test,
                            const std::vector<GaitSequence>& synthetic,
                            const std::vector<ClassifierSpec>& specs) {
  if (specs.empty()) throw ValidationError("benchmark needs at least one classifier spec");
  for (const auto& seq : real_test)
    if (seq.synthetic)
      throw ContractError("synthetic sequence '" + seq.id + "' found in the test set");
  {
    std::set<std::string> train_ids;
    for (const auto& seq : real_train) train_ids.insert(seq.id);
    for (const auto& seq : real_test)
      if (train_ids.count(seq.id))
        throw ContractError("sequence '" + seq.id + "' appears in both train and test sets");
  }

  std::vector<GaitSequence> augmented = real_train;
  augmented.insert(augmented.end(), synthetic.begin(), synthetic.end());

  BenchmarkGrid grid;
  for (const auto& spec : specs) {
    grid.kinds.push_back(spec.kind);
    std::vector<RegimeResult> row;
    RegimeResult real = train_classifier(spec, real_train, real_test);
    real.regime = Regime::real_only;
    row.push_back(std::move(real));
    RegimeResult synth = train_classifier(spec, synthetic, real_test);
    synth.regime = Regime::synthetic_only;
    row.push_back(std::move(synth));
    RegimeResult both = train_classifier(spec, augmented, real_test);
    both.regime = Regime::real_plus_synthetic;
    row.push_back(std::move(both));
    grid.rows.push_back(std::move(row));
  }
  return grid;
}

std::string grid_to_csv(const BenchmarkGrid& grid) {
  std::string out = "model,real,synthetic,real+synthetic\n";
  char cell[32];
  for (std::size_t i = 0; i < grid.rows.size(); ++i) {
    out += to_string(grid.kinds[i]);
    for (const auto& result : grid.rows[i]) {
      std::snprintf(cell, sizeof(cell), ",%.2f", 100.0 * result.accuracy);
      out += cell;
    }
    out += "\n";
  }
  return out;
}

std::string grid_to_json_string(const BenchmarkGrid& grid) {
  json doc;
  doc["kind"] = "pgcgan-benchmark";
  json rows = json::array();
  for (std::size_t i = 0; i < grid.rows.size(); ++i) {
    json row;
    row["model"] = to_string(grid.kinds[i]);
    json cells = json::array();
    for (const auto& result : grid.rows[i]) {
      json cell;
      cell["regime"] = to_string(result.regime);
      cell["accuracy"] = result.accuracy;
      cell["per_class_accuracy"] = std::vector<double>(result.per_class_accuracy.begin(),
                                                       result.per_class_accuracy.end());
      json confusion = json::array();
      for (long r = 0; r < result.confusion.rows(); ++r) {
        json line = json::array();
        for (long c = 0; c < result.confusion.cols(); ++c)
          line.push_back(result.confusion(r, c));
        confusion.push_back(std::move(line));
      }
      cell["confusion"] = std::move(confusion);
      cell["warnings"] = result.warnings;
      cells.push_back(std::move(cell));
    }
    row["cells"] = std::move(cells);
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2);
}

BaselineComparison compare_baseline(const BenchmarkGrid& grid, double baseline_accuracy) {
  if (grid.rows.empty()) throw ValidationError("benchmark grid is empty");
  BaselineComparison cmp;
  cmp.baseline = baseline_accuracy;
  cmp.best_augmented = -1.0;
  for (std::size_t i = 0; i < grid.rows.size(); ++i) {
    if (grid.rows[i].size() != 3)
      throw ValidationError("benchmark grid row for " + std::string(to_string(grid.kinds[i])) +
                            " is incomplete");
    const double real = 100.0 * grid.rows[i][0].accuracy;
    const double aug = 100.0 * grid.rows[i][2].accuracy;
    cmp.augmentation_beat_real[to_string(grid.kinds[i])] = aug > real;
    if (aug > cmp.best_augmented) {
      cmp.best_augmented = aug;
      cmp.best_model = to_string(grid.kinds[i]);
    }
  }
  cmp.delta = cmp.best_augmented - cmp.baseline;
  return cmp;
}

}  // namespace pgcgan
