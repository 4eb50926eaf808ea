#include "tempxai/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "tempxai/errors.hpp"

namespace tempxai {

GruParams GruParams::zeros(Index features, Index hidden) {
  GruParams p;
  p.F = features;
  p.H = hidden;
  p.W_z = Matrix(hidden, features + hidden);
  p.W_r = Matrix(hidden, features + hidden);
  p.W_h = Matrix(hidden, hidden + features);
  p.b_z.assign(hidden, 0.0);
  p.b_r.assign(hidden, 0.0);
  p.b_h.assign(hidden, 0.0);
  p.W_out = Matrix(1, hidden);
  return p;
}

AttentionParams AttentionParams::zeros(Index features) {
  return {Matrix(features, features), Vector(features, 0.0)};
}

namespace {

template <typename Fn>
void for_each_block(ModelParams& p, Fn&& fn) {
  fn(p.gru.W_z.data());
  fn(p.gru.W_r.data());
  fn(p.gru.W_h.data());
  fn(p.gru.b_z);
  fn(p.gru.b_r);
  fn(p.gru.b_h);
  fn(p.gru.W_out.data());
  std::span<double> bout(&p.gru.b_out, 1);
  fn(bout);
  if (p.attention) {
    fn(p.attention->W.data());
    fn(p.attention->b);
  }
}

template <typename Fn>
void for_each_block(const ModelParams& p, Fn&& fn) {
  for_each_block(const_cast<ModelParams&>(p), [&](auto& block) {
    std::span<const double> view(block.data(), block.size());
    fn(view);
  });
}

}  // namespace

Index ModelParams::parameter_count() const noexcept {
  Index n = 0;
  for_each_block(*this, [&](std::span<const double> b) { n += b.size(); });
  return n;
}

Vector ModelParams::flatten() const {
  Vector out;
  out.reserve(parameter_count());
  for_each_block(*this, [&](std::span<const double> b) { out.insert(out.end(), b.begin(), b.end()); });
  return out;
}

void ModelParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw ShapeError("ModelParams::assign: wrong parameter count");
  Index k = 0;
  for_each_block(*this, [&](auto& b) {
    for (auto& v : b) v = flat[k++];
  });
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  z.gru = GruParams::zeros(gru.F, gru.H);
  if (attention) z.attention = AttentionParams::zeros(gru.F);
  return z;
}

void ModelParams::axpy(double scale, const ModelParams& other) {
  Vector src = other.flatten();
  Index k = 0;
  for_each_block(*this, [&](auto& b) {
    for (auto& v : b) v += scale * src[k++];
  });
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
  if (hidden_size < 1) throw ConfigError("hidden_size must be positive");
  if (max_epochs < 1) throw ConfigError("max_epochs must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (cv_folds < 2) throw ConfigError("cv_folds must be >= 2");
}

namespace {

void check_gru(const GruParams& p) {
  const Index F = p.F, H = p.H;
  if (p.W_z.rows() != H || p.W_z.cols() != F + H || p.W_r.rows() != H || p.W_r.cols() != F + H ||
      p.W_h.rows() != H || p.W_h.cols() != H + F || p.b_z.size() != H || p.b_r.size() != H ||
      p.b_h.size() != H || p.W_out.rows() != 1 || p.W_out.cols() != H) {
    throw ShapeError("GRU parameters are inconsistent with F=" + std::to_string(F) + ", H=" + std::to_string(H));
  }
}

struct StepTrace {
  Vector h_prev, z, r, hh, h, c, c2;
  double yhat = 0.0;
  bool clamped = false;
};

struct Trace {
  Matrix Xm;  // masked input
  Matrix A;   // attention (empty without attention)
  Matrix U;   // GRU input
  std::vector<StepTrace> steps;
};

void cell_forward(std::span<const double> x, const GruParams& p, StepTrace& s) {
  const Index F = p.F, H = p.H;
  s.c.resize(F + H);
  std::copy(x.begin(), x.end(), s.c.begin());
  std::copy(s.h_prev.begin(), s.h_prev.end(), s.c.begin() + static_cast<std::ptrdiff_t>(F));
  s.z = matvec(p.W_z, s.c);
  s.r = matvec(p.W_r, s.c);
  for (Index k = 0; k < H; ++k) {
    s.z[k] = sigmoid(s.z[k] + p.b_z[k]);
    s.r[k] = sigmoid(s.r[k] + p.b_r[k]);
  }
  s.c2.resize(H + F);
  for (Index k = 0; k < H; ++k) s.c2[k] = s.r[k] * s.h_prev[k];
  std::copy(x.begin(), x.end(), s.c2.begin() + static_cast<std::ptrdiff_t>(H));
  s.hh = matvec(p.W_h, s.c2);
  s.h.resize(H);
  for (Index k = 0; k < H; ++k) {
    s.hh[k] = std::tanh(s.hh[k] + p.b_h[k]);
    s.h[k] = (1.0 - s.z[k]) * s.hh[k] + s.z[k] * s.h_prev[k];
  }
}

Trace trace_forward(const Matrix& X, const Matrix& M, const ModelParams& params, const DropoutMask* dropout) {
  const GruParams& p = params.gru;
  check_gru(p);
  if (X.rows() != p.F) throw ShapeError("forward: input has " + std::to_string(X.rows()) + " features, model " + std::to_string(p.F));
  if (!X.same_shape(M)) throw ShapeError("forward: mask shape differs from input");
  Trace tr;
  tr.Xm = hadamard(X, M);
  if (params.attention) {
    tr.A = attention_matrix(tr.Xm, *params.attention);
    tr.U = hadamard(tr.Xm, tr.A);
  } else {
    tr.U = tr.Xm;
  }
  const Index n = X.cols();
  if (dropout && (dropout->rows() != p.H || dropout->cols() < n)) throw ShapeError("dropout mask shape");
  tr.steps.resize(n);
  Vector h(p.H, 0.0);
  Vector x(p.F);
  for (Index t = 0; t < n; ++t) {
    StepTrace& s = tr.steps[t];
    s.h_prev = h;
    for (Index f = 0; f < p.F; ++f) x[f] = tr.U(f, t);
    cell_forward(x, p, s);
    h = s.h;
    double logit = p.b_out;
    for (Index k = 0; k < p.H; ++k) {
      const double d = dropout ? s.h[k] * (*dropout)(k, t) : s.h[k];
      logit += p.W_out(0, k) * d;
    }
    s.yhat = sigmoid(logit);
  }
  return tr;
}

}  // namespace

Vector gru_step(std::span<const double> x, std::span<const double> h_prev, const GruParams& p) {
  check_gru(p);
  if (x.size() != p.F || h_prev.size() != p.H) throw ShapeError("gru_step: input or state length mismatch");
  StepTrace s;
  s.h_prev.assign(h_prev.begin(), h_prev.end());
  cell_forward(x, p, s);
  return s.h;
}

Matrix attention_matrix(const Matrix& X, const AttentionParams& a) {
  const Index F = X.rows();
  if (a.W.rows() != F || a.W.cols() != F || a.b.size() != F) throw ShapeError("attention parameters do not match F");
  Matrix pre = matmul(a.W, X);
  for (Index f = 0; f < F; ++f)
    for (Index t = 0; t < X.cols(); ++t) pre(f, t) += a.b[f];
  return softmax_axis(pre, Axis::Cols);
}

Vector forward(const Matrix& X, const Matrix& M, const ModelParams& params) {
  Trace tr = trace_forward(X, M, params, nullptr);
  Vector out(tr.steps.size());
  for (Index t = 0; t < out.size(); ++t) out[t] = tr.steps[t].yhat;
  return out;
}

Vector forward(const Matrix& X, const Matrix& M, const TrainedModel& model) {
  if (!model.trained()) throw StateError("forward: model is not trained");
  return forward(X, M, model.params);
}

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp); }

double pair_loss(double yhat, int y, double beta) {
  const double p = clamp_prob(yhat);
  return -(beta * y * std::log(p) + (1.0 - beta) * (1 - y) * std::log(1.0 - p));
}

}  // namespace

double tbbce(std::span<const Vector> predictions, std::span<const std::vector<int>> labels,
             std::span<const std::vector<bool>> valid, const ClassWeights& beta) {
  if (predictions.size() != labels.size() || predictions.size() != valid.size()) {
    throw ArgumentError("tbbce: batch sizes differ");
  }
  double total = 0.0;
  Index n = 0;
  for (Index i = 0; i < predictions.size(); ++i) {
    const auto& yh = predictions[i];
    if (labels[i].size() < yh.size() || valid[i].size() < yh.size()) throw ArgumentError("tbbce: sequence lengths differ");
    for (Index t = 0; t < yh.size(); ++t) {
      if (!valid[i][t]) continue;
      if (t >= beta.beta.size()) throw ArgumentError("tbbce: no class weight for step " + std::to_string(t + 1));
      total += pair_loss(yh[t], labels[i][t], beta.beta[t]);
      ++n;
    }
  }
  if (n == 0) throw ArgumentError("tbbce: no valid (patient, step) pairs");
  return total / static_cast<double>(n);
}

LossGradient backward(std::span<const PatientRecord* const> batch, const ModelParams& params,
                      const ClassWeights& beta, std::span<const DropoutMask> dropout) {
  if (!dropout.empty() && dropout.size() != batch.size()) throw ArgumentError("backward: one dropout mask per patient");
  const GruParams& p = params.gru;
  const Index F = p.F, H = p.H;
  Index n_valid = 0;
  for (const PatientRecord* rec : batch) n_valid += rec->stay_length;
  if (n_valid == 0) throw ArgumentError("backward: no valid (patient, step) pairs");
  const double inv_n = 1.0 / static_cast<double>(n_valid);

  LossGradient out;
  out.gradient = params.zeros_like();
  GruParams& g = out.gradient.gru;

  Vector dh(H), dh_carry(H), dz(H), da_z(H), da_r(H), da_h(H), dc(F + H), dc2(H + F);
  for (Index i = 0; i < batch.size(); ++i) {
    const PatientRecord& rec = *batch[i];
    const DropoutMask* mask = dropout.empty() ? nullptr : &dropout[i];
    Trace tr = trace_forward(rec.X, rec.M, params, mask);
    const Index n = tr.steps.size();
    if (rec.y.size() < n) throw ShapeError("backward: label length");
    Matrix dU(F, n);
    std::fill(dh_carry.begin(), dh_carry.end(), 0.0);

    for (Index t = n; t-- > 0;) {
      const StepTrace& s = tr.steps[t];
      std::fill(dh.begin(), dh.end(), 0.0);
      if (rec.valid(t)) {
        if (t >= beta.beta.size()) throw ArgumentError("backward: no class weight for step " + std::to_string(t + 1));
        const double b = beta.beta[t];
        const int y = rec.y[t];
        out.loss += pair_loss(s.yhat, y, b) * inv_n;
        const bool clamped = s.yhat < kProbabilityClamp || s.yhat > 1.0 - kProbabilityClamp;
        const double dlogit = clamped ? 0.0 : inv_n * ((1.0 - b) * (1 - y) * s.yhat - b * y * (1.0 - s.yhat));
        g.b_out += dlogit;
        for (Index k = 0; k < H; ++k) {
          const double keep = mask ? (*mask)(k, t) : 1.0;
          g.W_out(0, k) += dlogit * s.h[k] * keep;
          dh[k] = dlogit * p.W_out(0, k) * keep;
        }
      }
      for (Index k = 0; k < H; ++k) dh[k] += dh_carry[k];

      // h = (1 - z) hh + z h_prev
      for (Index k = 0; k < H; ++k) {
        dz[k] = dh[k] * (s.h_prev[k] - s.hh[k]);
        da_h[k] = dh[k] * (1.0 - s.z[k]) * (1.0 - s.hh[k] * s.hh[k]);
        dh_carry[k] = dh[k] * s.z[k];
        da_z[k] = dz[k] * s.z[k] * (1.0 - s.z[k]);
      }
      // candidate: hh = tanh(W_h [r*h_prev, x] + b_h)
      std::fill(dc2.begin(), dc2.end(), 0.0);
      for (Index k = 0; k < H; ++k) {
        g.b_h[k] += da_h[k];
        auto grow = g.W_h.row(k);
        for (Index j = 0; j < H + F; ++j) grow[j] += da_h[k] * s.c2[j];
      }
      matvec_transpose_accumulate(p.W_h, da_h, dc2);
      for (Index k = 0; k < H; ++k) {
        const double d_rh = dc2[k];
        da_r[k] = d_rh * s.h_prev[k] * s.r[k] * (1.0 - s.r[k]);
        dh_carry[k] += d_rh * s.r[k];
      }
      // gates act on c = [x, h_prev]
      std::fill(dc.begin(), dc.end(), 0.0);
      for (Index k = 0; k < H; ++k) {
        g.b_z[k] += da_z[k];
        g.b_r[k] += da_r[k];
        auto zrow = g.W_z.row(k);
        auto rrow = g.W_r.row(k);
        for (Index j = 0; j < F + H; ++j) {
          zrow[j] += da_z[k] * s.c[j];
          rrow[j] += da_r[k] * s.c[j];
        }
      }
      matvec_transpose_accumulate(p.W_z, da_z, dc);
      matvec_transpose_accumulate(p.W_r, da_r, dc);
      for (Index k = 0; k < H; ++k) dh_carry[k] += dc[F + k];
      for (Index f = 0; f < F; ++f) dU(f, t) = dc[f] + dc2[H + f];
    }

    if (params.attention) {
      // U = Xm * A, A = column softmax of (W Xm + b)
      AttentionParams& ga = *out.gradient.attention;
      for (Index t = 0; t < n; ++t) {
        double dot = 0.0;
        for (Index f = 0; f < F; ++f) dot += tr.A(f, t) * dU(f, t) * tr.Xm(f, t);
        for (Index f = 0; f < F; ++f) {
          const double dA = dU(f, t) * tr.Xm(f, t);
          const double dS = tr.A(f, t) * (dA - dot);
          if (dS == 0.0) continue;
          ga.b[f] += dS;
          auto wrow = ga.W.row(f);
          for (Index k = 0; k < F; ++k) wrow[k] += dS * tr.Xm(k, t);
        }
      }
    }
  }
  return out;
}

double cohort_loss(const Cohort& cohort, const ModelParams& params, const ClassWeights& beta) {
  std::vector<Vector> preds;
  std::vector<std::vector<int>> labels;
  std::vector<std::vector<bool>> valid;
  preds.reserve(cohort.size());
  for (const auto& p : cohort.patients) {
    preds.push_back(forward(p.X, p.M, params));
    labels.push_back(p.y);
    std::vector<bool> v(cohort.T);
    for (Index t = 0; t < cohort.T; ++t) v[t] = p.valid(t);
    valid.push_back(std::move(v));
  }
  return tbbce(preds, labels, valid, beta);
}

ModelParams init_params(Index features, Index hidden, bool use_attention, RngStream& rng) {
  ModelParams p;
  p.gru = GruParams::zeros(features, hidden);
  const double bound = 1.0 / std::sqrt(static_cast<double>(features + hidden));
  for (Matrix* m : {&p.gru.W_z, &p.gru.W_r, &p.gru.W_h, &p.gru.W_out})
    for (double& v : m->data()) v = rng.uniform(-bound, bound);
  if (use_attention) {
    p.attention = AttentionParams::zeros(features);
    for (double& v : p.attention->W.data()) v = rng.uniform(-bound, bound);
  }
  return p;
}

FitResult fit(const Cohort& train_set, const Cohort& validation, const TrainConfig& cfg, bool use_attention) {
  cfg.validate();
  if (train_set.patients.empty() || validation.patients.empty()) throw ArgumentError("fit: empty partition");
  const ClassWeights beta = compute_class_weights(train_set);
  const RngStream root(cfg.seed);
  RngStream init_rng = root.derive(0);
  RngStream order_rng = root.derive(1);
  RngStream dropout_rng = root.derive(2);

  ModelParams params = init_params(train_set.features(), cfg.hidden_size, use_attention, init_rng);
  FitResult best{params, {}};
  double best_val = std::numeric_limits<double>::infinity();
  Index since_best = 0;
  const double keep = 1.0 - cfg.dropout_rate;

  std::vector<Index> order(train_set.size());
  std::vector<const PatientRecord*> batch;
  std::vector<DropoutMask> masks;
  for (Index epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    for (Index i = 0; i < order.size(); ++i) order[i] = i;
    order_rng.shuffle(order);
    for (Index start = 0; start < order.size(); start += cfg.batch_size) {
      const Index stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      masks.clear();
      for (Index j = start; j < stop; ++j) {
        batch.push_back(&train_set.patients[order[j]]);
        if (cfg.dropout_rate > 0.0) {
          DropoutMask m(cfg.hidden_size, train_set.T);
          for (double& v : m.data()) v = dropout_rng.bernoulli(keep) ? 1.0 / keep : 0.0;
          masks.push_back(std::move(m));
        }
      }
      LossGradient lg = backward(batch, params, beta, masks);
      params.axpy(-cfg.learning_rate, lg.gradient);
    }
    const double train_loss = cohort_loss(train_set, params, beta);
    const double val_loss = cohort_loss(validation, params, beta);
    best.history.train_loss.push_back(train_loss);
    best.history.validation_loss.push_back(val_loss);
    if (!std::isfinite(train_loss)) throw Error("training diverged: non-finite loss at epoch " + std::to_string(epoch + 1));
    if (val_loss < best_val) {
      best_val = val_loss;
      best.params = params;
      best.history.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best > cfg.patience) {
      break;
    }
  }
  return best;
}

TrainedModel train(const Cohort& train_set, const TrainConfig& cfg, bool use_attention) {
  cfg.validate();
  if (train_set.patients.empty()) throw ArgumentError("train: empty cohort");
  const HyperGrid& grid = cfg.grid;
  if (grid.learning_rates.empty() || grid.dropout_rates.empty() || grid.hidden_sizes.empty()) {
    throw ArgumentError("train: empty hyperparameter grid");
  }
  std::vector<TrainConfig> points;
  for (double lr : grid.learning_rates)
    for (double dr : grid.dropout_rates)
      for (Index h : grid.hidden_sizes) {
        TrainConfig c = cfg;
        c.learning_rate = lr;
        c.dropout_rate = dr;
        c.hidden_size = h;
        c.validate();
        points.push_back(c);
      }

  const RngStream root(cfg.seed);
  Index chosen = 0;
  if (points.size() > 1) {
    RngStream fold_rng = root.derive(10);
    const auto folds = kfold(train_set, cfg.cv_folds, fold_rng);
    double best_score = std::numeric_limits<double>::infinity();
    for (Index g = 0; g < points.size(); ++g) {
      double total = 0.0;
      for (const auto& fold : folds) {
        FitResult r = fit(fold.train, fold.validation, points[g], use_attention);
        total += r.history.validation_loss[r.history.best_epoch];
      }
      const double score = total / static_cast<double>(folds.size());
      if (score < best_score) {
        best_score = score;
        chosen = g;
      }
    }
  }

  RngStream split_rng = root.derive(11);
  auto [inner_train, inner_val] = split_train_test(train_set, 0.8, split_rng);
  FitResult r = fit(inner_train, inner_val, points[chosen], use_attention);
  TrainedModel model;
  model.params = std::move(r.params);
  model.history = std::move(r.history);
  model.config = points[chosen];
  model.schema_fingerprint = train_set.schema.fingerprint();
  return model;
}

namespace {

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

void write_values(std::ostream& out, std::span<const double> values) {
  for (double v : values) out << ' ' << hex(v);
  out << '\n';
}

class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw DataError("checkpoint truncated");
    return w;
  }
  void expect(const std::string& w) {
    const std::string got = word();
    if (got != w) throw DataError("checkpoint: expected '" + w + "', found '" + got + "'");
  }
  double real() {
    const std::string w = word();
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (*end != '\0') throw DataError("checkpoint: bad number '" + w + "'");
    return v;
  }
  std::uint64_t u64() {
    const std::string w = word();
    char* end = nullptr;
    const auto v = std::strtoull(w.c_str(), &end, 0);
    if (*end != '\0') throw DataError("checkpoint: bad integer '" + w + "'");
    return v;
  }
  void values(std::span<double> out) {
    for (double& v : out) v = real();
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path) {
  if (!model.trained()) throw StateError("save_checkpoint: model is not trained");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const auto& p = model.params;
  const auto& c = model.config;
  char fp[32];
  std::snprintf(fp, sizeof fp, "0x%016llx", static_cast<unsigned long long>(model.schema_fingerprint));
  out << "tempxai-checkpoint 1\n";
  out << "schema_fingerprint " << fp << '\n';
  out << "features " << p.gru.F << '\n';
  out << "hidden " << p.gru.H << '\n';
  out << "attention " << (p.attention ? 1 : 0) << '\n';
  out << "learning_rate " << hex(c.learning_rate) << '\n';
  out << "dropout_rate " << hex(c.dropout_rate) << '\n';
  out << "max_epochs " << c.max_epochs << '\n';
  out << "patience " << c.patience << '\n';
  out << "batch_size " << c.batch_size << '\n';
  out << "cv_folds " << c.cv_folds << '\n';
  out << "seed " << c.seed << '\n';
  out << "best_epoch " << model.history.best_epoch << '\n';
  out << "train_loss " << model.history.train_loss.size();
  write_values(out, model.history.train_loss);
  out << "validation_loss " << model.history.validation_loss.size();
  write_values(out, model.history.validation_loss);
  out << "W_z";
  write_values(out, p.gru.W_z.data());
  out << "W_r";
  write_values(out, p.gru.W_r.data());
  out << "W_h";
  write_values(out, p.gru.W_h.data());
  out << "b_z";
  write_values(out, p.gru.b_z);
  out << "b_r";
  write_values(out, p.gru.b_r);
  out << "b_h";
  write_values(out, p.gru.b_h);
  out << "W_out";
  write_values(out, p.gru.W_out.data());
  out << "b_out " << hex(p.gru.b_out) << '\n';
  if (p.attention) {
    out << "W_attention";
    write_values(out, p.attention->W.data());
    out << "b_attention";
    write_values(out, p.attention->b);
  }
  out << "end\n";
  if (!out) throw IoError("write failed for " + path.string());
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  TokenReader r(in);
  r.expect("tempxai-checkpoint");
  if (r.u64() != 1) throw DataError("unsupported checkpoint version");
  TrainedModel m;
  r.expect("schema_fingerprint");
  m.schema_fingerprint = r.u64();
  r.expect("features");
  const Index F = r.u64();
  r.expect("hidden");
  const Index H = r.u64();
  r.expect("attention");
  const bool att = r.u64() != 0;
  auto& c = m.config;
  r.expect("learning_rate");
  c.learning_rate = r.real();
  r.expect("dropout_rate");
  c.dropout_rate = r.real();
  c.hidden_size = H;
  r.expect("max_epochs");
  c.max_epochs = r.u64();
  r.expect("patience");
  c.patience = r.u64();
  r.expect("batch_size");
  c.batch_size = r.u64();
  r.expect("cv_folds");
  c.cv_folds = r.u64();
  r.expect("seed");
  c.seed = r.u64();
  r.expect("best_epoch");
  m.history.best_epoch = r.u64();
  r.expect("train_loss");
  m.history.train_loss.resize(r.u64());
  r.values(m.history.train_loss);
  r.expect("validation_loss");
  m.history.validation_loss.resize(r.u64());
  r.values(m.history.validation_loss);

  auto& p = m.params;
  p.gru = GruParams::zeros(F, H);
  r.expect("W_z");
  r.values(p.gru.W_z.data());
  r.expect("W_r");
  r.values(p.gru.W_r.data());
  r.expect("W_h");
  r.values(p.gru.W_h.data());
  r.expect("b_z");
  r.values(p.gru.b_z);
  r.expect("b_r");
  r.values(p.gru.b_r);
  r.expect("b_h");
  r.values(p.gru.b_h);
  r.expect("W_out");
  r.values(p.gru.W_out.data());
  r.expect("b_out");
  p.gru.b_out = r.real();
  if (att) {
    p.attention = AttentionParams::zeros(F);
    r.expect("W_attention");
    r.values(p.attention->W.data());
    r.expect("b_attention");
    r.values(p.attention->b);
  }
  r.expect("end");
  return m;
}

}  // namespace tempxai
