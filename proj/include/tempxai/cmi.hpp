#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "tempxai/data.hpp"
#include "tempxai/numerics.hpp"

namespace tempxai {

using Symbol = std::int64_t;

// Plug-in (empirical frequency) estimators, base-2 logarithms.

double entropy(std::span<const Symbol> samples);
double joint_entropy(std::span<const Symbol> a, std::span<const Symbol> b);
/// H(a | b) = H(a, b) - H(b)
double conditional_entropy(std::span<const Symbol> a, std::span<const Symbol> b);
/// I(a; b) = H(a) - H(a | b)
double mutual_information(std::span<const Symbol> a, std::span<const Symbol> b);
/// I(a; b | z) = H(a, z) + H(b, z) - H(a, b, z) - H(z)
double conditional_mutual_information(std::span<const Symbol> a, std::span<const Symbol> b,
                                      std::span<const Symbol> z);

/// Relabels the pairs (a_k, b_k) as dense symbols, giving the joint variable.
std::vector<Symbol> joint_symbols(std::span<const Symbol> a, std::span<const Symbol> b);

enum class Binning { EqualFrequency, EqualWidth };
enum class Conditioning { None, GreedySelected };

struct CmiConfig {
  Index n_bins = 8;
  Binning binning = Binning::EqualFrequency;
  Conditioning conditioning = Conditioning::None;
  std::optional<Index> top_k;
  std::optional<double> threshold;
  /// Cells with fewer valid samples are flagged absent.
  Index min_samples = 10;
  /// Cap on the number of selected features used as the conditioning set.
  Index max_conditioners = 2;

  void validate_scoring() const;
  void validate_selection() const;
};

/// Discretises continuous values into bins; ties always share a bin.
std::vector<Symbol> discretize(std::span<const double> values, Index n_bins, Binning binning);

struct CmiScores {
  Matrix S;                        // F x T, bits
  std::vector<Index> valid_counts;  // F x T row-major
  std::vector<bool> present;        // F x T row-major; false = absent cell

  Index T() const noexcept { return S.cols(); }
  Index n_valid(Index f, Index t) const { return valid_counts[f * S.cols() + t]; }
  bool is_present(Index f, Index t) const { return present[f * S.cols() + t]; }
};

CmiScores cmi_feature_scores(const Cohort& cohort, const CmiConfig& cfg);

/// Binary F x T selection; absent cells are never selected.
Matrix select_features(const CmiScores& scores, const CmiConfig& cfg);

/// CSV `feature,t,score_bits,n_valid,selected`; absent cells have an empty score.
void write_cmi_scores(const std::filesystem::path& path, const FeatureSchema& schema, const CmiScores& scores,
                      const Matrix& selection);

}  // namespace tempxai
