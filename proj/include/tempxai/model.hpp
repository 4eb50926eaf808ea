#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "tempxai/data.hpp"
#include "tempxai/numerics.hpp"

namespace tempxai {

inline constexpr double kProbabilityClamp = 1e-7;
inline constexpr double kDefaultThreshold = 0.5;

/// Gate weights act on [x_t, h_{t-1}] (F + H columns); the candidate weights act
/// on [r_t * h_{t-1}, x_t] (H + F columns), following the GRU update equations.
struct GruParams {
  Index F = 0;
  Index H = 0;
  Matrix W_z, W_r, W_h;
  Vector b_z, b_r, b_h;
  Matrix W_out;  // 1 x H
  double b_out = 0.0;

  static GruParams zeros(Index features, Index hidden);
};

/// Variable-level attention: A = softmax over features of (W X + b) per column.
struct AttentionParams {
  Matrix W;  // F x F
  Vector b;  // F

  static AttentionParams zeros(Index features);
};

struct ModelParams {
  GruParams gru;
  std::optional<AttentionParams> attention;

  Index parameter_count() const noexcept;
  Vector flatten() const;
  void assign(std::span<const double> flat);
  /// Same shapes, every entry zero.
  ModelParams zeros_like() const;
  /// this += scale * other
  void axpy(double scale, const ModelParams& other);
};

struct HyperGrid {
  std::vector<double> learning_rates{2.0};
  std::vector<double> dropout_rates{0.0};
  std::vector<Index> hidden_sizes{8};
};

struct TrainConfig {
  double learning_rate = 2.0;
  double dropout_rate = 0.0;
  Index hidden_size = 8;
  Index max_epochs = 200;
  Index patience = 25;
  Index batch_size = 32;
  Index cv_folds = 5;
  std::uint64_t seed = 1;
  HyperGrid grid;

  void validate() const;
};

struct TrainingHistory {
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  Index best_epoch = 0;
};

struct TrainedModel {
  ModelParams params;
  std::uint64_t schema_fingerprint = 0;
  TrainConfig config;  // hyperparameters of the selected grid point
  TrainingHistory history;

  bool has_attention() const noexcept { return params.attention.has_value(); }
  bool trained() const noexcept { return params.gru.H > 0 && params.gru.F > 0; }
};

Vector gru_step(std::span<const double> x, std::span<const double> h_prev, const GruParams& p);

Matrix attention_matrix(const Matrix& X, const AttentionParams& a);

/// Per-step probabilities for an F x n input (n <= T). The mask is applied
/// before attention so unobserved cells never influence the output.
Vector forward(const Matrix& X, const Matrix& M, const ModelParams& params);
Vector forward(const Matrix& X, const Matrix& M, const TrainedModel& model);

/// Class-weighted BCE averaged over valid (i, t) pairs.
double tbbce(std::span<const Vector> predictions, std::span<const std::vector<int>> labels,
             std::span<const std::vector<bool>> valid, const ClassWeights& beta);

/// Inverted-dropout keep masks for one patient, H x T (entries 0 or 1/(1-rate)).
using DropoutMask = Matrix;

struct LossGradient {
  double loss = 0.0;
  ModelParams gradient;
};

/// Exact TBBCE gradient of a batch by backpropagation through time. When
/// `dropout` is given it holds one mask per patient applied to h_t before the head.
LossGradient backward(std::span<const PatientRecord* const> batch, const ModelParams& params,
                      const ClassWeights& beta, std::span<const DropoutMask> dropout = {});

/// Mean TBBCE of a whole cohort (no dropout).
double cohort_loss(const Cohort& cohort, const ModelParams& params, const ClassWeights& beta);

ModelParams init_params(Index features, Index hidden, bool use_attention, RngStream& rng);

struct FitResult {
  ModelParams params;
  TrainingHistory history;
};

/// SGD with early stopping on `validation`; returns the best-epoch parameters.
FitResult fit(const Cohort& train, const Cohort& validation, const TrainConfig& cfg, bool use_attention);

/// Grid search by k-fold CV, then a refit on `train` with an internal 80/20
/// early-stopping split.
TrainedModel train(const Cohort& train, const TrainConfig& cfg, bool use_attention);

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace tempxai
