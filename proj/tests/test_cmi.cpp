#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "tempxai/cmi.hpp"
#include "tempxai/errors.hpp"

using namespace tempxai;

namespace {

std::vector<Symbol> random_symbols(Index n, Index k, RngStream& rng) {
  std::vector<Symbol> s(n);
  for (auto& v : s) v = static_cast<Symbol>(rng.below(k));
  return s;
}

// Cohort with fully observed stays of length T; features filled by the caller.
Cohort blank_cohort(Index n, Index T, std::vector<FeatureDescriptor> features) {
  Cohort c;
  c.schema = FeatureSchema(std::move(features));
  c.T = T;
  for (Index i = 0; i < n; ++i) {
    PatientRecord p;
    p.id = "p" + std::to_string(i);
    p.X = Matrix(c.features(), T);
    p.M = Matrix(c.features(), T, 1.0);
    p.stay_length = T;
    p.y.assign(T, 0);
    c.patients.push_back(std::move(p));
  }
  return c;
}

}  // namespace

TEST(Entropy, HandCases) {
  EXPECT_DOUBLE_EQ(entropy(std::vector<Symbol>{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(entropy(std::vector<Symbol>{5, 5, 5, 5}), 0.0);
  EXPECT_DOUBLE_EQ(entropy(std::vector<Symbol>{0, 1, 2, 3, 3, 2, 1, 0}), 2.0);
  EXPECT_THROW(entropy(std::vector<Symbol>{}), ArgumentError);
}

TEST(Entropy, JointCases) {
  const std::vector<Symbol> a{0, 1, 0, 1, 1, 0, 2, 2};
  EXPECT_DOUBLE_EQ(joint_entropy(a, a), entropy(a));
  const std::vector<Symbol> x{0, 0, 1, 1}, y{0, 1, 0, 1};
  EXPECT_DOUBLE_EQ(joint_entropy(x, y), 2.0);
  EXPECT_THROW(joint_entropy(x, std::vector<Symbol>{0, 1}), ArgumentError);
}

TEST(Entropy, JointDominatesMarginalsOnRandomTables) {
  RngStream rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 1 + rng.below(200);
    const auto a = random_symbols(n, 1 + rng.below(6), rng), b = random_symbols(n, 1 + rng.below(6), rng);
    const double hab = joint_entropy(a, b);
    EXPECT_GE(entropy(a), 0.0);
    EXPECT_GE(hab, std::max(entropy(a), entropy(b)) - 1e-12);
    EXPECT_EQ(conditional_entropy(a, b), hab - entropy(b));
    const double mi = mutual_information(a, b);
    EXPECT_GE(mi, -1e-12);
    EXPECT_LE(std::fabs(mi - mutual_information(b, a)), 1e-12);
  }
}

TEST(MutualInformation, CopyAndIndependence) {
  const std::vector<Symbol> a{0, 1, 0, 1, 1, 0};
  EXPECT_NEAR(mutual_information(a, a), 1.0, 1e-12);
  EXPECT_NEAR(conditional_entropy(a, a), 0.0, 1e-12);
  const std::vector<Symbol> x{0, 0, 1, 1}, y{0, 1, 0, 1};
  EXPECT_NEAR(conditional_entropy(x, y), entropy(x), 1e-12);

  RngStream rng(2);
  const auto u = random_symbols(50000, 2, rng), v = random_symbols(50000, 2, rng);
  EXPECT_LE(mutual_information(u, v), 0.02);
}

TEST(ConditionalMutualInformation, MarkovChainIsNearZero) {
  RngStream rng(3);
  const Index n = 50000;
  std::vector<Symbol> a(n), z(n), b(n);
  for (Index k = 0; k < n; ++k) {
    a[k] = static_cast<Symbol>(rng.below(4));
    z[k] = rng.bernoulli(0.8) ? a[k] / 2 : static_cast<Symbol>(rng.below(2));
    b[k] = rng.bernoulli(0.9) ? z[k] : 1 - z[k];
  }
  EXPECT_GT(mutual_information(a, b), 0.05);
  EXPECT_LE(conditional_mutual_information(a, b, z), 0.02);
}

TEST(ConditionalMutualInformation, XorTriple) {
  RngStream rng(4);
  const Index n = 50000;
  std::vector<Symbol> a(n), u(n), b(n);
  for (Index k = 0; k < n; ++k) {
    a[k] = static_cast<Symbol>(rng.below(2));
    u[k] = static_cast<Symbol>(rng.below(2));
    b[k] = a[k] ^ u[k];
  }
  EXPECT_LE(mutual_information(a, b), 0.02);
  EXPECT_NEAR(conditional_mutual_information(a, b, u), 1.0, 0.02);
}

TEST(ConditionalMutualInformation, ConstantConditionerReducesToMi) {
  RngStream rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 10 + rng.below(300);
    const auto a = random_symbols(n, 3, rng), b = random_symbols(n, 4, rng);
    const std::vector<Symbol> z(n, 7);
    EXPECT_NEAR(conditional_mutual_information(a, b, z), mutual_information(a, b), 1e-12);
  }
}

TEST(ConditionalMutualInformation, FourEntropyIdentity) {
  RngStream rng(6);
  for (int rep = 0; rep < 50; ++rep) {
    const Index n = 5 + rng.below(400);
    const auto a = random_symbols(n, 1 + rng.below(5), rng), b = random_symbols(n, 1 + rng.below(5), rng),
               z = random_symbols(n, 1 + rng.below(5), rng);
    const auto bz = joint_symbols(b, z);
    const double direct = conditional_entropy(a, z) - conditional_entropy(a, bz);
    const double cmi = conditional_mutual_information(a, b, z);
    EXPECT_NEAR(cmi, direct, 1e-10);
    EXPECT_GE(cmi, -1e-12);
  }
}

TEST(Discretize, TiesShareABin) {
  const std::vector<double> v{1, 1, 1, 1, 1, 1, 2, 3};
  const auto s = discretize(v, 4, Binning::EqualFrequency);
  for (Index k = 1; k < 6; ++k) EXPECT_EQ(s[k], s[0]);
  EXPECT_LT(s[0], s[6]);
  EXPECT_LE(s[6], s[7]);
}

TEST(Discretize, EqualFrequencyIsBalanced) {
  std::vector<double> v(80);
  for (Index k = 0; k < 80; ++k) v[k] = static_cast<double>((k * 37) % 80);
  const auto s = discretize(v, 8, Binning::EqualFrequency);
  std::vector<int> counts(8, 0);
  for (auto b : s) ++counts.at(b);
  for (int c : counts) EXPECT_EQ(c, 10);
}

TEST(Discretize, EqualWidthAndConstants) {
  const auto s = discretize(std::vector<double>{0.0, 0.49, 0.5, 1.0}, 2, Binning::EqualWidth);
  EXPECT_EQ(s, (std::vector<Symbol>{0, 0, 1, 1}));
  const auto c = discretize(std::vector<double>{3.0, 3.0, 3.0}, 4, Binning::EqualWidth);
  EXPECT_EQ(c, (std::vector<Symbol>{0, 0, 0}));
  EXPECT_THROW(discretize(std::vector<double>{1.0}, 1, Binning::EqualFrequency), ArgumentError);
}

TEST(Discretize, OrderPreserving) {
  RngStream rng(7);
  std::vector<double> v(300);
  for (double& x : v) x = rng.normal();
  for (Binning b : {Binning::EqualFrequency, Binning::EqualWidth}) {
    const auto s = discretize(v, 6, b);
    for (Index i = 0; i < v.size(); ++i)
      for (Index j = 0; j < v.size(); ++j)
        if (v[i] < v[j]) EXPECT_LE(s[i], s[j]);
  }
}

TEST(CmiScores, LabelCopyScoresLabelEntropy) {
  Cohort c = blank_cohort(200, 3, {{"copy", FeatureKind::Binary, FeatureGroup::Care},
                                   {"noise", FeatureKind::Numeric, FeatureGroup::Care}});
  RngStream rng(8);
  for (auto& p : c.patients)
    for (Index t = 0; t < 3; ++t) {
      p.y[t] = rng.bernoulli(0.3) ? 1 : 0;
      p.X(0, t) = p.y[t];
      p.X(1, t) = rng.normal();
    }
  const CmiScores s = cmi_feature_scores(c, CmiConfig{});
  for (Index t = 0; t < 3; ++t) {
    std::vector<Symbol> y;
    for (const auto& p : c.patients) y.push_back(p.y[t]);
    EXPECT_NEAR(s.S(0, t), entropy(y), 1e-12);
    EXPECT_EQ(s.n_valid(0, t), 200U);
    EXPECT_TRUE(s.is_present(1, t));
  }
}

TEST(CmiScores, NoiseFeatureIsNearZero) {
  Cohort c = blank_cohort(1000, 2, {{"bin", FeatureKind::Binary, FeatureGroup::Care},
                                    {"num", FeatureKind::Numeric, FeatureGroup::Care}});
  RngStream rng(9);
  for (auto& p : c.patients)
    for (Index t = 0; t < 2; ++t) {
      p.y[t] = rng.bernoulli(0.2) ? 1 : 0;
      p.X(0, t) = rng.bernoulli(0.5) ? 1.0 : 0.0;
      p.X(1, t) = rng.normal();
    }
  const CmiScores s = cmi_feature_scores(c, CmiConfig{});
  for (double v : s.S.data()) {
    EXPECT_GE(v, -1e-12);
    EXPECT_LE(v, 0.03);
  }
}

TEST(CmiScores, AbsentCellsFlagged) {
  Cohort c = blank_cohort(50, 3, {{"a", FeatureKind::Binary, FeatureGroup::Care}});
  for (auto& p : c.patients) {
    p.M(0, 1) = 0.0;
    p.stay_length = 2;
    p.M(0, 2) = 0.0;
  }
  CmiConfig cfg;
  const CmiScores s = cmi_feature_scores(c, cfg);
  EXPECT_TRUE(s.is_present(0, 0));
  EXPECT_FALSE(s.is_present(0, 1));
  EXPECT_EQ(s.n_valid(0, 1), 0U);
  EXPECT_FALSE(s.is_present(0, 2));
  cfg.threshold = 0.0;
  const Matrix sel = select_features(s, cfg);
  EXPECT_EQ(sel(0, 1), 0.0);
  EXPECT_EQ(sel(0, 0), 1.0);

  cfg.min_samples = 51;
  EXPECT_FALSE(cmi_feature_scores(c, cfg).is_present(0, 0));
}

TEST(CmiScores, MaskedValuesIgnoredAndOrderInvariant) {
  SynthConfig sc;
  sc.n_patients = 300;
  sc.missing_rate = 0.3;
  Cohort c = synth_cohort(sc);
  for (Conditioning cond : {Conditioning::None, Conditioning::GreedySelected}) {
    CmiConfig cfg;
    cfg.conditioning = cond;
    const CmiScores base = cmi_feature_scores(c, cfg);
    Cohort poked = c;
    RngStream rng(10);
    for (auto& p : poked.patients)
      for (Index k = 0; k < p.X.size(); ++k)
        if (p.M.data()[k] == 0.0) p.X.data()[k] = rng.uniform(-1e3, 1e3);
    EXPECT_EQ(cmi_feature_scores(poked, cfg).S, base.S);
    Cohort shuffled = c;
    rng.shuffle(shuffled.patients);
    const CmiScores s2 = cmi_feature_scores(shuffled, cfg);
    EXPECT_EQ(s2.S, base.S);
    EXPECT_EQ(s2.valid_counts, base.valid_counts);
  }
}

TEST(CmiScores, GreedyConditioningRemovesRedundantCopy) {
  Cohort c = blank_cohort(400, 2, {{"a", FeatureKind::Binary, FeatureGroup::Care},
                                   {"b", FeatureKind::Binary, FeatureGroup::Care},
                                   {"c", FeatureKind::Binary, FeatureGroup::Care}});
  RngStream rng(11);
  for (auto& p : c.patients)
    for (Index t = 0; t < 2; ++t) {
      p.y[t] = rng.bernoulli(0.4) ? 1 : 0;
      p.X(0, t) = rng.bernoulli(0.9) ? p.y[t] : 1 - p.y[t];
      p.X(1, t) = p.X(0, t);
      p.X(2, t) = rng.bernoulli(0.7) ? p.y[t] : 1 - p.y[t];
    }
  CmiConfig cfg;
  const CmiScores plain = cmi_feature_scores(c, cfg);
  cfg.conditioning = Conditioning::GreedySelected;
  const CmiScores greedy = cmi_feature_scores(c, cfg);
  for (Index t = 0; t < 2; ++t) {
    EXPECT_DOUBLE_EQ(plain.S(0, t), plain.S(1, t));
    // One copy keeps its marginal score, the other adds nothing once the first is known.
    EXPECT_DOUBLE_EQ(std::max(greedy.S(0, t), greedy.S(1, t)), plain.S(0, t));
    EXPECT_NEAR(std::min(greedy.S(0, t), greedy.S(1, t)), 0.0, 1e-12);
    EXPECT_GT(greedy.S(2, t), 0.0);
  }
}

TEST(Selection, ThresholdAndTopK) {
  SynthConfig sc;
  sc.n_patients = 300;
  const Cohort c = synth_cohort(sc);
  const CmiScores s = cmi_feature_scores(c, CmiConfig{});
  CmiConfig cfg;
  cfg.threshold = 0.0;
  const Matrix all = select_features(s, cfg);
  for (Index f = 0; f < s.S.rows(); ++f)
    for (Index t = 0; t < s.T(); ++t) EXPECT_EQ(all(f, t), s.is_present(f, t) ? 1.0 : 0.0);

  Matrix prev = all;
  for (double th : {0.001, 0.01, 0.05, 0.1, 0.5}) {
    cfg.threshold = th;
    const Matrix sel = select_features(s, cfg);
    for (Index k = 0; k < sel.size(); ++k) EXPECT_LE(sel.data()[k], prev.data()[k]);
    prev = sel;
  }

  cfg.threshold.reset();
  cfg.top_k = 1;
  const Matrix top = select_features(s, cfg);
  for (Index t = 0; t < s.T(); ++t) {
    bool any_present = false;
    double count = 0.0;
    for (Index f = 0; f < s.S.rows(); ++f) {
      any_present = any_present || s.is_present(f, t);
      count += top(f, t);
    }
    EXPECT_EQ(count, any_present ? 1.0 : 0.0);
  }
}

TEST(Selection, ExactlyOneCriterion) {
  const CmiScores s{Matrix(1, 1), {10}, {true}};
  CmiConfig cfg;
  EXPECT_THROW(select_features(s, cfg), ConfigError);
  cfg.top_k = 1;
  cfg.threshold = 0.1;
  EXPECT_THROW(select_features(s, cfg), ConfigError);
  CmiConfig bad;
  bad.n_bins = 1;
  EXPECT_THROW(bad.validate_scoring(), ConfigError);
}
