#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tempxai/data.hpp"
#include "tempxai/model.hpp"
#include "tempxai/numerics.hpp"

namespace tempxai {

enum class ExplainMode { Timestep, Cell };
enum class ClassScope { All, Positive, Negative };
enum class ExplainTarget { Probability, Logit };

const char* to_string(ExplainMode mode) noexcept;
const char* to_string(ClassScope scope) noexcept;
ExplainMode parse_explain_mode(const std::string& text);
ClassScope parse_class_scope(const std::string& text);

struct BackgroundMatrix {
  Matrix B;  // F x T
};

/// Per-cell mean over observed training values; unobserved cells fall back to
/// the feature's overall mean, then 0.
BackgroundMatrix background_matrix(const Cohort& train);

/// A player is a whole time column (timestep mode) or one observed cell.
struct Player {
  Index feature = 0;  // unused in timestep mode
  Index step = 0;     // 0-based column
};

/// Players for explaining output step `steps` (1-based count of columns used).
std::vector<Player> players_for(ExplainMode mode, const Matrix& M, Index steps);

using Coalition = std::vector<std::uint8_t>;

/// Model input for a coalition: active players keep the masked original value,
/// inactive players take the background. In cell mode, unobserved cells are not
/// players and keep their masked value (0). Returns F x steps.
Matrix perturb(const Matrix& X, const Matrix& M, const Coalition& z, Index steps, const BackgroundMatrix& B,
               ExplainMode mode);

/// Shapley kernel weight for a coalition of size s among m players, 0 < s < m.
/// The empty and full coalitions are handled as exact constraints instead.
double shap_kernel_weight(Index m, Index s);

struct ExplainerConfig {
  ExplainMode mode = ExplainMode::Cell;
  Index n_samples = 2048;
  double ridge = 1e-6;
  /// Full enumeration when the player count is at most this.
  Index exact_threshold = 12;
  std::uint64_t seed = 1;
  ExplainTarget target = ExplainTarget::Probability;
  /// Explain every valid output step (otherwise only the last valid step).
  bool all_steps = true;

  void validate() const;
};

/// Attribution of a coalition game v over m players.
struct GameExplanation {
  Vector weights;
  double base = 0.0;  // v(empty)
  double full = 0.0;  // v(all)
};

using CoalitionGame = std::function<double(const Coalition&)>;

/// Constrained Shapley-kernel regression: exact enumeration when
/// m <= cfg.exact_threshold, paired-complement sampling otherwise.
GameExplanation explain_game(Index m, const CoalitionGame& game, const ExplainerConfig& cfg, RngStream& rng);

struct StepExplanation {
  std::vector<Player> players;
  GameExplanation game;
};

/// Explains output step `steps` (1-based) of the model for one patient.
StepExplanation explain_step(const TrainedModel& model, const Matrix& X, const Matrix& M, Index steps,
                             const BackgroundMatrix& B, const ExplainerConfig& cfg);

struct ImportanceMatrix {
  /// Cell mode: F x T attributions of the last valid step's explanation.
  /// Timestep mode: 1 x T column attributions of the last valid step.
  /// Aggregates and attention maps: F x T.
  Matrix W;
  Vector base;                 // per output step; 0 where not explained
  Vector output;               // model output per explained step
  std::vector<bool> explained;  // per output step
  /// Timestep mode: T x T table, row t holds the column attributions for output step t.
  Matrix step_table;
  /// Cell mode with all_steps: one F x T attribution matrix per output step.
  std::vector<Matrix> step_cells;
  std::vector<Index> valid_counts;  // aggregates only, row-major like W
  std::string method = "itshap";
  ExplainMode mode = ExplainMode::Cell;
  ClassScope scope = ClassScope::All;
  std::string patient_id;
};

ImportanceMatrix explain_patient(const TrainedModel& model, const PatientRecord& patient, const BackgroundMatrix& B,
                                 const ExplainerConfig& cfg);

/// Cellwise mean over in-scope patients whose step is valid. `explanations[i]`
/// belongs to `cohort.patients[i]`.
ImportanceMatrix aggregate_by_class(const std::vector<ImportanceMatrix>& explanations, const Cohort& cohort,
                                    ClassScope scope);

bool in_scope(const PatientRecord& p, ClassScope scope) noexcept;

/// CSV `patient_id,feature,t,attribution,base_t,mode`, one row per valid cell.
void write_attributions(const std::filesystem::path& path, const FeatureSchema& schema,
                        const std::vector<ImportanceMatrix>& explanations, const Cohort& cohort);

/// CSV `feature,t,score,n_valid,scope` for an aggregate.
void write_aggregate(const std::filesystem::path& path, const FeatureSchema& schema, const ImportanceMatrix& agg);

}  // namespace tempxai
