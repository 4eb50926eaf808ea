#include "tempxai/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tempxai/errors.hpp"

namespace tempxai {

std::optional<double> roc_auc_step(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ArgumentError("roc_auc_step: scores and labels differ in length");
  const Index n = scores.size();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return scores[a] < scores[b]; });

  // Walk tie groups in ascending order; each positive beats every negative
  // below its group and ties half of the negatives inside it.
  double wins = 0.0;
  Index neg_below = 0, n_pos = 0, n_neg = 0;
  for (Index k = 0; k < n;) {
    Index end = k;
    Index pos_here = 0, neg_here = 0;
    while (end < n && scores[order[end]] == scores[order[k]]) {
      (labels[order[end]] == 1 ? pos_here : neg_here) += 1;
      ++end;
    }
    wins += static_cast<double>(pos_here) * (static_cast<double>(neg_below) + 0.5 * static_cast<double>(neg_here));
    neg_below += neg_here;
    n_pos += pos_here;
    n_neg += neg_here;
    k = end;
  }
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

SensSpec sens_spec_step(std::span<const double> scores, std::span<const int> labels, double threshold) {
  if (scores.size() != labels.size()) throw ArgumentError("sens_spec_step: scores and labels differ in length");
  Index tp = 0, fn = 0, tn = 0, fp = 0;
  for (Index k = 0; k < scores.size(); ++k) {
    const bool predicted = scores[k] >= threshold;
    if (labels[k] == 1) {
      (predicted ? tp : fn) += 1;
    } else {
      (predicted ? fp : tn) += 1;
    }
  }
  SensSpec out;
  if (tp + fn > 0) out.sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (tn + fp > 0) out.specificity = static_cast<double>(tn) / static_cast<double>(tn + fp);
  return out;
}

MetricTable evaluate(const TrainedModel& model, const Cohort& test, double threshold) {
  if (test.patients.empty()) throw ArgumentError("evaluate: empty test cohort");
  if (model.schema_fingerprint != 0 && model.schema_fingerprint != test.schema.fingerprint()) {
    throw SchemaError("evaluate: checkpoint schema does not match the cohort schema");
  }
  const Index T = test.T;
  std::vector<Vector> predictions;
  predictions.reserve(test.size());
  for (const auto& p : test.patients) predictions.push_back(forward(p.X, p.M, model));

  MetricTable table;
  table.values.assign(kMetricNames.size(), std::vector<std::optional<double>>(T));
  table.n_valid.assign(T, 0);
  for (Index t = 0; t < T; ++t) {
    Vector scores;
    std::vector<int> labels;
    for (Index i = 0; i < test.size(); ++i) {
      if (!test.patients[i].valid(t)) continue;
      scores.push_back(predictions[i][t]);
      labels.push_back(test.patients[i].y[t]);
    }
    table.n_valid[t] = scores.size();
    table.values[0][t] = roc_auc_step(scores, labels);
    const SensSpec ss = sens_spec_step(scores, labels, threshold);
    table.values[1][t] = ss.sensitivity;
    table.values[2][t] = ss.specificity;
  }
  return table;
}

MetricSet aggregate_repeats(std::span<const MetricTable> runs) {
  if (runs.size() < 2) throw ArgumentError("aggregate_repeats: need at least two runs");
  const Index T = runs.front().T();
  const Index n_metrics = runs.front().values.size();
  for (const auto& r : runs) {
    if (r.T() != T || r.values.size() != n_metrics) throw ArgumentError("aggregate_repeats: runs are not aligned");
  }
  MetricSet out;
  bool any_defined = false;
  for (Index m = 0; m < n_metrics; ++m) {
    MetricSeries s;
    s.metric = m < kMetricNames.size() ? kMetricNames[m] : "metric" + std::to_string(m);
    s.mean.assign(T, 0.0);
    s.stddev.assign(T, 0.0);
    s.defined.assign(T, false);
    s.n_defined.assign(T, 0);
    s.n_repeats = runs.size();
    for (Index t = 0; t < T; ++t) {
      Vector xs;
      for (const auto& r : runs)
        if (r.values[m][t]) xs.push_back(*r.values[m][t]);
      s.n_defined[t] = xs.size();
      if (xs.size() < 2) continue;
      const double n = static_cast<double>(xs.size());
      const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      s.mean[t] = mean;
      s.stddev[t] = std::sqrt(ss / (n - 1.0));
      s.defined[t] = true;
      any_defined = true;
    }
    out.push_back(std::move(s));
  }
  if (!any_defined) throw ArgumentError("aggregate_repeats: no step is defined in at least two runs");
  return out;
}

DeltaReport delta_report(const MetricSet& a, const MetricSet& b) {
  if (a.size() != b.size()) throw ArgumentError("delta_report: metric sets differ in size");
  DeltaReport report;
  for (Index m = 0; m < a.size(); ++m) {
    const auto& sa = a[m];
    const auto& sb = b[m];
    if (sa.metric != sb.metric || sa.mean.size() != sb.mean.size()) {
      throw ArgumentError("delta_report: series '" + sa.metric + "' and '" + sb.metric + "' are not aligned");
    }
    DeltaSeries d;
    d.metric = sa.metric;
    const Index T = sa.mean.size();
    d.mean_delta.assign(T, 0.0);
    d.std_delta.assign(T, 0.0);
    d.defined.assign(T, false);
    for (Index t = 0; t < T; ++t) {
      if (!sa.defined[t] || !sb.defined[t]) continue;
      d.mean_delta[t] = sa.mean[t] - sb.mean[t];
      d.std_delta[t] = sa.stddev[t] - sb.stddev[t];
      d.defined[t] = true;
    }
    report.series.push_back(std::move(d));
  }
  return report;
}

std::optional<double> mean_over_steps(const MetricSeries& s) {
  double sum = 0.0;
  Index n = 0;
  for (Index t = 0; t < s.mean.size(); ++t) {
    if (!s.defined[t]) continue;
    sum += s.mean[t];
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& text, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValueError(path.string() + ": '" + text + "' is not a number");
  }
}

}  // namespace

void write_metric_table(const std::filesystem::path& path, const MetricTable& table) {
  auto out = open_out(path);
  out << "metric,t,value,n_valid\n";
  for (Index m = 0; m < table.values.size(); ++m) {
    for (Index t = 0; t < table.T(); ++t) {
      out << kMetricNames[m] << ',' << (t + 1) << ',';
      if (table.values[m][t]) out << num(*table.values[m][t]);
      out << ',' << table.n_valid[t] << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_metric_set(const std::filesystem::path& path, const MetricSet& set) {
  auto out = open_out(path);
  out << "metric,t,mean,std,n_defined\n";
  for (const auto& s : set) {
    for (Index t = 0; t < s.mean.size(); ++t) {
      out << s.metric << ',' << (t + 1) << ',';
      if (s.defined[t]) out << num(s.mean[t]) << ',' << num(s.stddev[t]);
      else out << ',';
      out << ',' << s.n_defined[t] << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

MetricSet read_metric_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "metric,t,mean,std,n_defined") {
    throw SchemaError(path.string() + ": expected header metric,t,mean,std,n_defined");
  }
  MetricSet set;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 5) throw SchemaError(path.string() + ": malformed row '" + line + "'");
    if (set.empty() || set.back().metric != cells[0]) {
      set.push_back(MetricSeries{cells[0], {}, {}, {}, {}, 0});
    }
    auto& s = set.back();
    const double t = parse_double(cells[1], path);
    if (t != static_cast<double>(s.mean.size() + 1)) throw RangeError(path.string() + ": steps out of order in '" + line + "'");
    const bool defined = !cells[2].empty();
    s.mean.push_back(defined ? parse_double(cells[2], path) : 0.0);
    s.stddev.push_back(defined ? parse_double(cells[3], path) : 0.0);
    s.defined.push_back(defined);
    const auto n = static_cast<Index>(parse_double(cells[4], path));
    s.n_defined.push_back(n);
    s.n_repeats = std::max(s.n_repeats, n);
  }
  if (set.empty()) throw DataError(path.string() + ": no metric rows");
  return set;
}

void write_delta_report(const std::filesystem::path& path, const DeltaReport& report,
                        const std::vector<std::string>& header_comments) {
  auto out = open_out(path);
  for (const auto& c : header_comments) out << "# " << c << '\n';
  out << "metric,t,mean_delta,std_delta\n";
  for (const auto& d : report.series) {
    for (Index t = 0; t < d.mean_delta.size(); ++t) {
      out << d.metric << ',' << (t + 1) << ',';
      if (d.defined[t]) out << num(d.mean_delta[t]) << ',' << num(d.std_delta[t]);
      else out << ',';
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace tempxai
