#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tempxai/data.hpp"
#include "tempxai/model.hpp"

namespace tempxai {

/// Mann-Whitney AUC with ties counted 1/2; nullopt when a class is missing.
std::optional<double> roc_auc_step(std::span<const double> scores, std::span<const int> labels);

struct SensSpec {
  std::optional<double> sensitivity;  // nullopt without positives
  std::optional<double> specificity;  // nullopt without negatives
};

/// score >= threshold counts as a positive prediction.
SensSpec sens_spec_step(std::span<const double> scores, std::span<const int> labels, double threshold);

inline const std::vector<std::string> kMetricNames{"roc_auc", "sensitivity", "specificity"};

/// Per-step metrics of one run; row order follows kMetricNames.
struct MetricTable {
  std::vector<std::vector<std::optional<double>>> values;  // metric x T
  std::vector<Index> n_valid;                              // patients valid per step

  Index T() const noexcept { return n_valid.size(); }
};

MetricTable evaluate(const TrainedModel& model, const Cohort& test, double threshold = kDefaultThreshold);

struct MetricSeries {
  std::string metric;
  Vector mean;                  // per step; 0 where undefined
  Vector stddev;                // per step, sample std; 0 where undefined
  std::vector<bool> defined;    // at least two runs define the step
  std::vector<Index> n_defined;  // runs defining the step
  Index n_repeats = 0;
};

using MetricSet = std::vector<MetricSeries>;

MetricSet aggregate_repeats(std::span<const MetricTable> runs);

struct DeltaSeries {
  std::string metric;
  Vector mean_delta;
  Vector std_delta;
  std::vector<bool> defined;
};

struct DeltaReport {
  std::vector<DeltaSeries> series;
};

/// Per-step (a - b) of means and of standard deviations.
DeltaReport delta_report(const MetricSet& a, const MetricSet& b);

/// Mean over defined steps of a series, nullopt when none is defined.
std::optional<double> mean_over_steps(const MetricSeries& s);

/// CSV `metric,t,value,n_valid` for one run.
void write_metric_table(const std::filesystem::path& path, const MetricTable& table);
/// CSV `metric,t,mean,std,n_defined`; undefined steps leave mean and std empty.
void write_metric_set(const std::filesystem::path& path, const MetricSet& set);
MetricSet read_metric_set(const std::filesystem::path& path);
/// CSV `metric,t,mean_delta,std_delta` preceded by `# ` comment lines.
void write_delta_report(const std::filesystem::path& path, const DeltaReport& report,
                        const std::vector<std::string>& header_comments);

}  // namespace tempxai
