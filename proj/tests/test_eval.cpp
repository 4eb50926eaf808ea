#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "tempxai/errors.hpp"
#include "tempxai/eval.hpp"

using namespace tempxai;

namespace {

double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (Index i = 0; i < s.size(); ++i)
    for (Index j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  return wins / pairs;
}

MetricTable table_with(double auc, Index T = 3) {
  MetricTable m;
  m.n_valid.assign(T, 10);
  m.values.assign(3, std::vector<std::optional<double>>(T, auc));
  return m;
}

TrainedModel small_model(const Cohort& c, bool attention) {
  RngStream rng(3);
  TrainedModel m;
  m.params = init_params(c.features(), 4, attention, rng);
  m.schema_fingerprint = c.schema.fingerprint();
  return m;
}

}  // namespace

TEST(RocAuc, HandCases) {
  EXPECT_EQ(roc_auc_step(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}), 1.0);
  EXPECT_EQ(roc_auc_step(std::vector<double>{0.3, 0.3, 0.3}, std::vector<int>{0, 1, 1}), 0.5);
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> y{0, 0, 1, 1};
  EXPECT_EQ(roc_auc_step(s, y), pairwise_auc(s, y));
  EXPECT_EQ(roc_auc_step(s, y), 0.75);
  EXPECT_FALSE(roc_auc_step(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}).has_value());
  EXPECT_FALSE(roc_auc_step(std::vector<double>{}, std::vector<int>{}).has_value());
}

TEST(RocAuc, MatchesPairwiseOracle) {
  RngStream rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 2 + rng.below(499);
    std::vector<double> s(n);
    std::vector<int> y(n);
    const bool coarse = rng.bernoulli(0.5);  // many ties
    for (Index k = 0; k < n; ++k) {
      s[k] = coarse ? static_cast<double>(rng.below(5)) / 4.0 : rng.uniform();
      y[k] = rng.bernoulli(0.3) ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_EQ(*roc_auc_step(s, y), pairwise_auc(s, y));
  }
}

TEST(RocAuc, MonotoneInvariance) {
  RngStream rng(2);
  for (int rep = 0; rep < 30; ++rep) {
    const Index n = 50;
    std::vector<double> s(n), cube(n), logit(n);
    std::vector<int> y(n);
    for (Index k = 0; k < n; ++k) {
      s[k] = rng.uniform(0.01, 0.99);
      y[k] = k % 3 == 0 ? 1 : 0;
      cube[k] = s[k] * s[k] * s[k];
      logit[k] = std::log(s[k] / (1.0 - s[k]));
    }
    const double a = *roc_auc_step(s, y);
    EXPECT_EQ(*roc_auc_step(cube, y), a);
    EXPECT_EQ(*roc_auc_step(logit, y), a);
  }
}

TEST(SensSpec, HandCases) {
  const std::vector<double> s{0.9, 0.2, 0.6};
  const std::vector<int> y{1, 0, 1};
  SensSpec r = sens_spec_step(s, y, 0.5);
  EXPECT_EQ(r.sensitivity, 1.0);
  EXPECT_EQ(r.specificity, 1.0);
  r = sens_spec_step(s, y, 0.0);
  EXPECT_EQ(r.sensitivity, 1.0);
  EXPECT_EQ(r.specificity, 0.0);
  r = sens_spec_step(s, y, 0.95);
  EXPECT_EQ(r.sensitivity, 0.0);
  EXPECT_EQ(r.specificity, 1.0);
  r = sens_spec_step(s, y, 0.6);  // ties at the threshold predict positive
  EXPECT_EQ(r.sensitivity, 1.0);
  r = sens_spec_step(std::vector<double>{0.7}, std::vector<int>{0}, 0.5);
  EXPECT_FALSE(r.sensitivity.has_value());
  EXPECT_EQ(r.specificity, 0.0);
}

TEST(SensSpec, MonotoneInThreshold) {
  RngStream rng(3);
  std::vector<double> s(200);
  std::vector<int> y(200);
  for (Index k = 0; k < 200; ++k) {
    s[k] = rng.uniform();
    y[k] = rng.bernoulli(0.4) ? 1 : 0;
  }
  double sens = 2.0, spec = -1.0;
  for (double th = 0.0; th <= 1.0; th += 0.01) {
    const SensSpec r = sens_spec_step(s, y, th);
    EXPECT_LE(*r.sensitivity, sens);
    EXPECT_GE(*r.specificity, spec);
    sens = *r.sensitivity;
    spec = *r.specificity;
  }
}

TEST(Evaluate, ValidityRestrictionAndDuplication) {
  SynthConfig sc;
  sc.n_patients = 80;
  Cohort c = synth_cohort(sc);
  const TrainedModel m = small_model(c, true);
  const MetricTable base = evaluate(m, c);
  ASSERT_EQ(base.T(), c.T);

  Cohort doubled = c;
  for (const auto& p : c.patients) doubled.patients.push_back(p);
  const MetricTable d = evaluate(m, doubled);
  for (Index r = 0; r < 3; ++r) EXPECT_EQ(d.values[r], base.values[r]);
  for (Index t = 0; t < c.T; ++t) EXPECT_EQ(d.n_valid[t], 2 * base.n_valid[t]);

  Cohort one_day = c;
  for (auto& p : one_day.patients) {
    p.stay_length = 1;
    for (Index t = 1; t < c.T; ++t)
      for (Index f = 0; f < c.features(); ++f) p.M(f, t) = 0.0;
    p.y = build_labels(p.y[0] ? std::optional<Index>(1) : std::nullopt, 1, c.T);
  }
  one_day.patients[0].y[0] = 1;
  one_day.patients[1].y[0] = 0;
  const MetricTable o = evaluate(m, one_day);
  EXPECT_TRUE(o.values[0][0].has_value());
  for (Index t = 1; t < c.T; ++t)
    for (Index r = 0; r < 3; ++r) EXPECT_FALSE(o.values[r][t].has_value());
}

TEST(Evaluate, Errors) {
  SynthConfig sc;
  sc.n_patients = 20;
  const Cohort c = synth_cohort(sc);
  TrainedModel m = small_model(c, false);
  Cohort empty = c;
  empty.patients.clear();
  EXPECT_THROW(evaluate(m, empty), ArgumentError);
  m.schema_fingerprint ^= 1;
  EXPECT_THROW(evaluate(m, c), SchemaError);
}

TEST(Aggregate, HandArithmetic) {
  MetricTable a = table_with(0.7), b = table_with(0.8), u = table_with(0.9);
  u.values[0][1].reset();
  a.values[0][2].reset();
  b.values[0][2].reset();
  const std::vector<MetricTable> runs{a, b, u};
  const MetricSet s = aggregate_repeats(runs);
  ASSERT_EQ(s.size(), 3U);
  EXPECT_EQ(s[0].metric, "roc_auc");
  EXPECT_NEAR(s[0].mean[0], 0.8, 1e-12);
  EXPECT_NEAR(s[0].stddev[0], 0.1, 1e-12);
  EXPECT_NEAR(s[0].mean[1], 0.75, 1e-12);
  EXPECT_NEAR(s[0].stddev[1], std::sqrt(0.005), 1e-12);
  EXPECT_NEAR(s[0].stddev[1], 0.0707, 1e-4);
  EXPECT_EQ(s[0].n_defined[1], 2U);
  EXPECT_FALSE(s[0].defined[2]);
  EXPECT_EQ(s[0].n_repeats, 3U);
}

TEST(Aggregate, IdenticalRunsAndErrors) {
  const std::vector<MetricTable> same{table_with(0.6), table_with(0.6)};
  for (const auto& series : aggregate_repeats(same))
    for (double v : series.stddev) EXPECT_EQ(v, 0.0);
  const std::vector<MetricTable> single{table_with(0.6)};
  EXPECT_THROW(aggregate_repeats(single), ArgumentError);
  const std::vector<MetricTable> misaligned{table_with(0.6, 3), table_with(0.6, 4)};
  EXPECT_THROW(aggregate_repeats(misaligned), ArgumentError);
  MetricTable none = table_with(0.6);
  for (auto& row : none.values)
    for (auto& v : row) v.reset();
  const std::vector<MetricTable> undefined{none, none};
  EXPECT_THROW(aggregate_repeats(undefined), ArgumentError);
}

TEST(Delta, AntisymmetricAndHandValue) {
  const std::vector<MetricTable> ra{table_with(0.7), table_with(0.8)}, rb{table_with(0.9), table_with(0.9)};
  const MetricSet a = aggregate_repeats(ra), b = aggregate_repeats(rb);
  const DeltaReport ab = delta_report(a, b), ba = delta_report(b, a), aa = delta_report(a, a);
  for (Index m = 0; m < 3; ++m)
    for (Index t = 0; t < 3; ++t) {
      EXPECT_EQ(ab.series[m].mean_delta[t], -ba.series[m].mean_delta[t]);
      EXPECT_EQ(ab.series[m].std_delta[t], -ba.series[m].std_delta[t]);
      EXPECT_EQ(aa.series[m].mean_delta[t], 0.0);
      EXPECT_EQ(aa.series[m].std_delta[t], 0.0);
      EXPECT_NEAR(ab.series[m].mean_delta[t], 0.75 - 0.9, 1e-12);
      EXPECT_NEAR(ab.series[m].std_delta[t], std::sqrt(0.005), 1e-12);
    }
  MetricSet shorter = b;
  shorter.pop_back();
  EXPECT_THROW(delta_report(a, shorter), ArgumentError);
}

TEST(MetricCsv, RoundTrip) {
  MetricTable a = table_with(0.71), b = table_with(0.83);
  a.values[1][2].reset();
  const std::vector<MetricTable> runs{a, b};
  const MetricSet s = aggregate_repeats(runs);
  const auto path = std::filesystem::temp_directory_path() / "tempxai_metrics_roundtrip.csv";
  write_metric_set(path, s);
  const MetricSet back = read_metric_set(path);
  ASSERT_EQ(back.size(), s.size());
  for (Index m = 0; m < s.size(); ++m) {
    EXPECT_EQ(back[m].metric, s[m].metric);
    EXPECT_EQ(back[m].mean, s[m].mean);
    EXPECT_EQ(back[m].stddev, s[m].stddev);
    EXPECT_EQ(back[m].defined, s[m].defined);
  }
  EXPECT_NEAR(*mean_over_steps(s[0]), (0.71 + 0.83) / 2.0, 1e-12);
}
