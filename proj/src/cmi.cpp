#include "tempxai/cmi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <tuple>

#include "tempxai/errors.hpp"

namespace tempxai {

namespace {

// Entropy from the multiset of keys: log2 N - (1/N) sum c log2 c over sorted runs.
template <typename Key>
double entropy_of_keys(std::vector<Key> keys) {
  const Index n = keys.size();
  if (n == 0) throw ArgumentError("entropy: empty sample");
  std::sort(keys.begin(), keys.end());
  double acc = 0.0;
  Index run = 1;
  for (Index k = 1; k <= n; ++k) {
    if (k < n && keys[k] == keys[k - 1]) {
      ++run;
      continue;
    }
    const double c = static_cast<double>(run);
    acc += c * std::log2(c);
    run = 1;
  }
  const double dn = static_cast<double>(n);
  const double h = std::log2(dn) - acc / dn;
  return h < 0.0 ? 0.0 : h;
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw ArgumentError("paired samples differ in length");
  if (a == 0) throw ArgumentError("empty sample");
}

}  // namespace

double entropy(std::span<const Symbol> samples) {
  return entropy_of_keys(std::vector<Symbol>(samples.begin(), samples.end()));
}

double joint_entropy(std::span<const Symbol> a, std::span<const Symbol> b) {
  check_lengths(a.size(), b.size());
  std::vector<std::pair<Symbol, Symbol>> keys(a.size());
  for (Index k = 0; k < a.size(); ++k) keys[k] = {a[k], b[k]};
  return entropy_of_keys(std::move(keys));
}

double conditional_entropy(std::span<const Symbol> a, std::span<const Symbol> b) {
  return joint_entropy(a, b) - entropy(b);
}

double mutual_information(std::span<const Symbol> a, std::span<const Symbol> b) {
  return entropy(a) - conditional_entropy(a, b);
}

double conditional_mutual_information(std::span<const Symbol> a, std::span<const Symbol> b,
                                      std::span<const Symbol> z) {
  check_lengths(a.size(), b.size());
  check_lengths(a.size(), z.size());
  std::vector<std::tuple<Symbol, Symbol, Symbol>> abz(a.size());
  for (Index k = 0; k < a.size(); ++k) abz[k] = {a[k], b[k], z[k]};
  return joint_entropy(a, z) + joint_entropy(b, z) - entropy_of_keys(std::move(abz)) - entropy(z);
}

std::vector<Symbol> joint_symbols(std::span<const Symbol> a, std::span<const Symbol> b) {
  check_lengths(a.size(), b.size());
  std::vector<std::pair<Symbol, Symbol>> uniq(a.size());
  for (Index k = 0; k < a.size(); ++k) uniq[k] = {a[k], b[k]};
  std::vector<std::pair<Symbol, Symbol>> keys = uniq;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::vector<Symbol> out(a.size());
  for (Index k = 0; k < a.size(); ++k) {
    out[k] = static_cast<Symbol>(std::lower_bound(uniq.begin(), uniq.end(), keys[k]) - uniq.begin());
  }
  return out;
}

void CmiConfig::validate_scoring() const {
  if (n_bins < 2) throw ConfigError("cmi: n_bins must be >= 2");
  if (min_samples < 1) throw ConfigError("cmi: min_samples must be >= 1");
}

void CmiConfig::validate_selection() const {
  if (top_k.has_value() == threshold.has_value()) {
    throw ConfigError("cmi: set exactly one of top_k and threshold");
  }
}

std::vector<Symbol> discretize(std::span<const double> values, Index n_bins, Binning binning) {
  if (n_bins < 2) throw ArgumentError("discretize: n_bins must be >= 2");
  std::vector<Symbol> out(values.size(), 0);
  if (values.empty()) return out;
  if (binning == Binning::EqualWidth) {
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi == lo) return out;
    for (Index k = 0; k < values.size(); ++k) {
      const double pos = (values[k] - lo) / (hi - lo) * static_cast<double>(n_bins);
      out[k] = std::min<Symbol>(static_cast<Symbol>(n_bins) - 1, static_cast<Symbol>(std::floor(pos)));
    }
    return out;
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const Index n = sorted.size();
  std::vector<double> edges;
  for (Index k = 1; k < n_bins; ++k) {
    const double e = sorted[k * n / n_bins];
    if (edges.empty() || e > edges.back()) edges.push_back(e);
  }
  for (Index k = 0; k < values.size(); ++k) {
    // Bin = number of edges <= value; a value equal to an edge starts the next bin.
    out[k] = static_cast<Symbol>(std::upper_bound(edges.begin(), edges.end(), values[k]) - edges.begin());
  }
  return out;
}

namespace {

struct CellSymbols {
  std::vector<Index> patients;  // indices of patients contributing a sample
  std::vector<Symbol> symbols;  // aligned with patients
};

CellSymbols cell_symbols(const Cohort& c, Index f, Index t, const CmiConfig& cfg) {
  CellSymbols cell;
  std::vector<double> values;
  for (Index i = 0; i < c.size(); ++i) {
    const auto& p = c.patients[i];
    if (!p.valid(t) || p.M(f, t) != 1.0) continue;
    cell.patients.push_back(i);
    values.push_back(p.X(f, t));
  }
  if (c.schema[f].kind == FeatureKind::Binary) {
    cell.symbols.reserve(values.size());
    for (double v : values) cell.symbols.push_back(static_cast<Symbol>(std::llround(v)));
  } else {
    cell.symbols = discretize(values, cfg.n_bins, cfg.binning);
  }
  return cell;
}

}  // namespace

CmiScores cmi_feature_scores(const Cohort& cohort, const CmiConfig& cfg) {
  cfg.validate_scoring();
  if (cohort.patients.empty()) throw ArgumentError("cmi_feature_scores: empty cohort");
  const Index F = cohort.features();
  const Index T = cohort.T;
  CmiScores out{Matrix(F, T), std::vector<Index>(F * T, 0), std::vector<bool>(F * T, false)};

  for (Index t = 0; t < T; ++t) {
    std::vector<CellSymbols> cells(F);
    for (Index f = 0; f < F; ++f) {
      cells[f] = cell_symbols(cohort, f, t, cfg);
      out.valid_counts[f * T + t] = cells[f].patients.size();
    }
    auto labels_for = [&](const std::vector<Index>& patients) {
      std::vector<Symbol> y(patients.size());
      for (Index k = 0; k < patients.size(); ++k) y[k] = cohort.patients[patients[k]].y[t];
      return y;
    };

    if (cfg.conditioning == Conditioning::None) {
      for (Index f = 0; f < F; ++f) {
        if (cells[f].patients.size() < cfg.min_samples) continue;
        out.present[f * T + t] = true;
        out.S(f, t) = mutual_information(cells[f].symbols, labels_for(cells[f].patients));
      }
      continue;
    }

    // Greedy forward selection at step t: each round scores the remaining
    // features conditioned on the joint of the first selected features.
    std::vector<Index> selected;
    std::vector<bool> done(F, false);
    std::vector<Symbol> lookup(cohort.size());
    std::vector<char> observed(cohort.size());
    while (true) {
      const std::vector<Index> conditioners(
          selected.begin(), selected.begin() + static_cast<std::ptrdiff_t>(std::min(selected.size(), cfg.max_conditioners)));
      Index best_f = F;
      double best_score = -INFINITY;
      for (Index f = 0; f < F; ++f) {
        if (done[f]) continue;
        // Samples where f and every conditioner are observed.
        std::vector<Index> patients;
        std::vector<Symbol> xs;
        for (Index k = 0; k < cells[f].patients.size(); ++k) {
          patients.push_back(cells[f].patients[k]);
          xs.push_back(cells[f].symbols[k]);
        }
        std::vector<Symbol> z(patients.size(), 0);
        for (Index g : conditioners) {
          std::fill(observed.begin(), observed.end(), 0);
          for (Index k = 0; k < cells[g].patients.size(); ++k) {
            observed[cells[g].patients[k]] = 1;
            lookup[cells[g].patients[k]] = cells[g].symbols[k];
          }
          std::vector<Index> keep_p;
          std::vector<Symbol> keep_x, keep_z, zg;
          for (Index k = 0; k < patients.size(); ++k) {
            if (!observed[patients[k]]) continue;
            keep_p.push_back(patients[k]);
            keep_x.push_back(xs[k]);
            keep_z.push_back(z[k]);
            zg.push_back(lookup[patients[k]]);
          }
          patients = std::move(keep_p);
          xs = std::move(keep_x);
          z = keep_z.empty() ? keep_z : joint_symbols(keep_z, zg);
        }
        const Index n = patients.size();
        out.valid_counts[f * T + t] = n;
        if (n < cfg.min_samples) {
          done[f] = true;
          out.present[f * T + t] = false;
          continue;
        }
        const auto y = labels_for(patients);
        const double score = conditioners.empty() ? mutual_information(xs, y) : conditional_mutual_information(xs, y, z);
        out.S(f, t) = score;
        out.present[f * T + t] = true;
        if (score > best_score) {
          best_score = score;
          best_f = f;
        }
      }
      if (best_f == F) break;
      done[best_f] = true;
      selected.push_back(best_f);
    }
  }
  return out;
}

Matrix select_features(const CmiScores& scores, const CmiConfig& cfg) {
  cfg.validate_selection();
  const Index F = scores.S.rows();
  const Index T = scores.S.cols();
  Matrix sel(F, T);
  for (Index t = 0; t < T; ++t) {
    if (cfg.threshold) {
      for (Index f = 0; f < F; ++f)
        if (scores.is_present(f, t) && scores.S(f, t) >= *cfg.threshold) sel(f, t) = 1.0;
      continue;
    }
    std::vector<Index> order;
    for (Index f = 0; f < F; ++f)
      if (scores.is_present(f, t)) order.push_back(f);
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return scores.S(a, t) > scores.S(b, t); });
    for (Index k = 0; k < std::min(*cfg.top_k, order.size()); ++k) sel(order[k], t) = 1.0;
  }
  return sel;
}

void write_cmi_scores(const std::filesystem::path& path, const FeatureSchema& schema, const CmiScores& scores,
                      const Matrix& selection) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "feature,t,score_bits,n_valid,selected\n";
  char buf[40];
  for (Index f = 0; f < schema.size(); ++f) {
    for (Index t = 0; t < scores.T(); ++t) {
      out << schema[f].name << ',' << (t + 1) << ',';
      if (scores.is_present(f, t)) {
        std::snprintf(buf, sizeof buf, "%.17g", scores.S(f, t));
        out << buf;
      }
      out << ',' << scores.n_valid(f, t) << ',' << (selection(f, t) != 0.0 ? 1 : 0) << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace tempxai
