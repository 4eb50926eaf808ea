#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tempxai/cmi.hpp"
#include "tempxai/data.hpp"
#include "tempxai/itshap.hpp"
#include "tempxai/model.hpp"

namespace tempxai {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitRuntime = 4;

enum class Variants { Plain, Attention, Both };
enum class ExplainMethod { Cmi, Attention, ItShap };

const char* to_string(ExplainMethod method) noexcept;
ExplainMethod parse_explain_method(const std::string& text);
Variants parse_variants(const std::string& text);

/// Name used for checkpoint and metric files of a model variant.
const char* variant_name(bool use_attention) noexcept;

struct RunConfig {
  std::filesystem::path output_dir = "out";
  /// Cohort inputs; default to the files `synth` writes under output_dir.
  std::optional<std::filesystem::path> cohort_path;
  std::optional<std::filesystem::path> schema_path;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  double train_fraction = 0.7;
  double threshold = kDefaultThreshold;
  Variants variants = Variants::Both;

  SynthConfig synth;
  TrainConfig train;
  CmiConfig cmi;

  ExplainerConfig explainer;
  ExplainMethod method = ExplainMethod::ItShap;
  ClassScope scope = ClassScope::All;
  /// Checkpoint variant explained by itshap.
  bool explain_attention_model = true;
  /// Explain at most this many test patients per seed (0 = all).
  Index max_patients = 0;
  bool heatmap = true;

  std::filesystem::path cohort_file() const;
  std::filesystem::path schema_file() const;
  std::filesystem::path checkpoint_file(bool use_attention, std::uint64_t seed) const;
  std::filesystem::path run_metrics_file(bool use_attention, std::uint64_t seed) const;
  std::filesystem::path metrics_file(bool use_attention) const;
  std::filesystem::path explain_file(ExplainMethod method, std::uint64_t seed, ClassScope scope,
                                     const std::string& extension) const;

  void validate() const;
};

/// Parses the JSON config; relative paths resolve against the file's directory.
/// Unknown keys and type mismatches raise ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir);

/// Train/test partition used by every command for a given seed.
std::pair<Cohort, Cohort> seed_split(const Cohort& cohort, double train_fraction, std::uint64_t seed);

void cmd_synth(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_explain(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

/// Mean attention map of one patient restricted to valid steps, as an importance matrix.
ImportanceMatrix attention_importance(const TrainedModel& model, const PatientRecord& patient);

/// Grayscale P2 image of an F x T matrix plus a sidecar `.scale.txt`.
void write_heatmap(const std::filesystem::path& pgm_path, const FeatureSchema& schema, const Matrix& W,
                   const std::vector<Index>& valid_counts);

/// Full command line front end; returns the process exit code.
int run_cli(const std::vector<std::string>& args);

}  // namespace tempxai
