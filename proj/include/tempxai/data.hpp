#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tempxai/numerics.hpp"

namespace tempxai {

inline constexpr Index kDefaultHorizon = 14;

enum class FeatureKind { Binary, Numeric };
enum class FeatureGroup { PreviousCulture, Antibiotic, Environment, Care };

const char* to_string(FeatureKind kind) noexcept;
const char* to_string(FeatureGroup group) noexcept;
FeatureKind parse_feature_kind(const std::string& text);
FeatureGroup parse_feature_group(const std::string& text);

struct FeatureDescriptor {
  std::string name;
  FeatureKind kind = FeatureKind::Binary;
  FeatureGroup group = FeatureGroup::Care;

  bool operator==(const FeatureDescriptor&) const = default;
};

class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<FeatureDescriptor> features);

  Index size() const noexcept { return features_.size(); }
  const FeatureDescriptor& operator[](Index f) const { return features_[f]; }
  const std::vector<FeatureDescriptor>& features() const noexcept { return features_; }
  std::optional<Index> index_of(const std::string& name) const;

  /// FNV-1a over names, kinds and groups; identifies the schema in checkpoints.
  std::uint64_t fingerprint() const noexcept;

  bool operator==(const FeatureSchema&) const = default;

 private:
  std::vector<FeatureDescriptor> features_;
};

struct PatientRecord {
  std::string id;
  Matrix X;             // F x T values
  Matrix M;             // F x T, 1 = observed
  std::vector<int> y;   // length T, 0 beyond the stay
  Index stay_length = 0;

  bool valid(Index t) const noexcept { return t < stay_length; }
  /// Any positive label during the stay.
  bool positive() const noexcept;
};

struct Cohort {
  FeatureSchema schema;
  std::vector<PatientRecord> patients;
  Index T = kDefaultHorizon;

  Index size() const noexcept { return patients.size(); }
  Index features() const noexcept { return schema.size(); }
  Cohort subset(const std::vector<Index>& indices) const;
  Index positive_count() const noexcept;
};

struct ClassWeights {
  std::vector<double> beta;
};

/// Labels from an optional 1-based culture day: zeros before it, ones from it to
/// the end of the stay, zeros (masked) past the stay.
std::vector<int> build_labels(std::optional<Index> culture_day, Index stay_length, Index T);

/// Checks record shapes and the mask/label invariants; throws DataError.
void validate_patient(const PatientRecord& p, Index features, Index T);

Cohort load_cohort(const std::filesystem::path& data_path, const std::filesystem::path& schema_path);
void save_cohort(const Cohort& cohort, const std::filesystem::path& data_path,
                 const std::filesystem::path& schema_path);

FeatureSchema load_schema(const std::filesystem::path& schema_path, Index* horizon = nullptr);
void save_schema(const FeatureSchema& schema, Index T, const std::filesystem::path& schema_path);

ClassWeights compute_class_weights(const Cohort& train);

/// Stratified (by patient class) patient-level partition.
std::pair<Cohort, Cohort> split_train_test(const Cohort& cohort, double train_fraction, RngStream& rng);

struct Fold {
  Cohort train;
  Cohort validation;
};

std::vector<Fold> kfold(const Cohort& cohort, Index k, RngStream& rng);

struct SynthConfig {
  Index n_patients = 1000;
  double mdr_fraction = 0.15;
  Index T = kDefaultHorizon;
  Index n_previous_culture = 4;
  Index n_antibiotic = 6;
  Index n_environment = 4;
  Index n_care = 4;
  /// Leading previous-culture flags that drive the MDR hazard.
  Index n_planted = 2;
  /// Probability that a patient acquires each planted flag during the stay.
  double planted_rate = 0.12;
  /// Last day (1-based) on which a planted flag may switch on.
  Index planted_onset_max = 7;
  /// Log-odds added to the daily hazard while a planted flag is on.
  double signal_strength = 8.0;
  /// Stay length ~ round(exp(N(log_mean, log_sd))) clipped to 1..T.
  double stay_log_mean = 2.05;
  double stay_log_sd = 0.5;
  /// In-stay missing-at-random rate.
  double missing_rate = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Indices of the planted (signal-bearing) features in the synthetic schema.
std::vector<Index> planted_features(const SynthConfig& cfg);
FeatureSchema synth_schema(const SynthConfig& cfg);
Cohort synth_cohort(const SynthConfig& cfg);

}  // namespace tempxai
