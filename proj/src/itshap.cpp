#include "tempxai/itshap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "tempxai/errors.hpp"

namespace tempxai {

const char* to_string(ExplainMode mode) noexcept { return mode == ExplainMode::Cell ? "cell" : "timestep"; }

const char* to_string(ClassScope scope) noexcept {
  switch (scope) {
    case ClassScope::All: return "all";
    case ClassScope::Positive: return "positive";
    case ClassScope::Negative: return "negative";
  }
  return "all";
}

ExplainMode parse_explain_mode(const std::string& text) {
  if (text == "cell") return ExplainMode::Cell;
  if (text == "timestep") return ExplainMode::Timestep;
  throw ConfigError("unknown explanation mode '" + text + "' (expected cell or timestep)");
}

ClassScope parse_class_scope(const std::string& text) {
  if (text == "all") return ClassScope::All;
  if (text == "positive") return ClassScope::Positive;
  if (text == "negative") return ClassScope::Negative;
  throw ConfigError("unknown scope '" + text + "' (expected all, positive or negative)");
}

BackgroundMatrix background_matrix(const Cohort& train) {
  if (train.patients.empty()) throw ArgumentError("background_matrix: empty cohort");
  const Index F = train.features();
  const Index T = train.T;
  Matrix sum(F, T), count(F, T);
  for (const auto& p : train.patients) {
    for (Index f = 0; f < F; ++f)
      for (Index t = 0; t < T; ++t)
        if (p.M(f, t) == 1.0) {
          sum(f, t) += p.X(f, t);
          count(f, t) += 1.0;
        }
  }
  BackgroundMatrix bg{Matrix(F, T)};
  for (Index f = 0; f < F; ++f) {
    double fs = 0.0, fc = 0.0;
    for (Index t = 0; t < T; ++t) {
      fs += sum(f, t);
      fc += count(f, t);
    }
    const double fallback = fc > 0.0 ? fs / fc : 0.0;
    for (Index t = 0; t < T; ++t) bg.B(f, t) = count(f, t) > 0.0 ? sum(f, t) / count(f, t) : fallback;
  }
  return bg;
}

std::vector<Player> players_for(ExplainMode mode, const Matrix& M, Index steps) {
  if (steps > M.cols()) throw ArgumentError("players_for: step beyond the horizon");
  std::vector<Player> players;
  if (mode == ExplainMode::Timestep) {
    for (Index t = 0; t < steps; ++t) players.push_back({0, t});
    return players;
  }
  // Step-major so that the players of an earlier output step form a prefix.
  for (Index t = 0; t < steps; ++t)
    for (Index f = 0; f < M.rows(); ++f)
      if (M(f, t) == 1.0) players.push_back({f, t});
  return players;
}

Matrix perturb(const Matrix& X, const Matrix& M, const Coalition& z, Index steps, const BackgroundMatrix& B,
               ExplainMode mode) {
  const Index F = X.rows();
  if (!X.same_shape(M) || B.B.rows() != F || B.B.cols() < steps || steps > X.cols()) {
    throw ShapeError("perturb: input, mask and background shapes disagree");
  }
  Matrix out(F, steps);
  if (mode == ExplainMode::Timestep) {
    if (z.size() != steps) throw ArgumentError("perturb: coalition length " + std::to_string(z.size()) + " != " + std::to_string(steps));
    for (Index t = 0; t < steps; ++t)
      for (Index f = 0; f < F; ++f) out(f, t) = z[t] ? X(f, t) * M(f, t) : B.B(f, t);
    return out;
  }
  const auto players = players_for(mode, M, steps);
  if (z.size() != players.size()) {
    throw ArgumentError("perturb: coalition length " + std::to_string(z.size()) + " != " + std::to_string(players.size()));
  }
  for (Index t = 0; t < steps; ++t)
    for (Index f = 0; f < F; ++f) out(f, t) = X(f, t) * M(f, t);
  for (Index k = 0; k < players.size(); ++k) {
    if (!z[k]) out(players[k].feature, players[k].step) = B.B(players[k].feature, players[k].step);
  }
  return out;
}

double shap_kernel_weight(Index m, Index s) {
  if (s > m) throw ArgumentError("shap_kernel_weight: coalition larger than player set");
  if (s == 0 || s == m) return 0.0;
  // binomial(m, s) in floating point; exact for the sizes used here.
  double binom = 1.0;
  const Index k = std::min(s, m - s);
  for (Index j = 1; j <= k; ++j) binom = binom * static_cast<double>(m - k + j) / static_cast<double>(j);
  return static_cast<double>(m - 1) / (binom * static_cast<double>(s) * static_cast<double>(m - s));
}

void ExplainerConfig::validate() const {
  if (exact_threshold > 16) throw ConfigError("explainer: exact_threshold must be <= 16");
  if (n_samples < 2) throw ConfigError("explainer: n_samples must be >= 2");
  if (!(ridge >= 0.0)) throw ConfigError("explainer: ridge must be >= 0");
}

namespace {

double size_mass(Index m, Index s) {
  return static_cast<double>(m - 1) / (static_cast<double>(s) * static_cast<double>(m - s));
}

Coalition random_subset(Index m, Index s, RngStream& rng) {
  std::vector<Index> idx(m);
  for (Index j = 0; j < m; ++j) idx[j] = j;
  Coalition z(m, 0);
  for (Index j = 0; j < s; ++j) {
    const Index pick = j + static_cast<Index>(rng.below(m - j));
    std::swap(idx[j], idx[pick]);
    z[idx[j]] = 1;
  }
  return z;
}

}  // namespace

GameExplanation explain_game(Index m, const CoalitionGame& game, const ExplainerConfig& cfg, RngStream& rng) {
  cfg.validate();
  GameExplanation out;
  out.base = game(Coalition(m, 0));
  out.full = game(Coalition(m, 1));
  const double delta = out.full - out.base;
  if (m == 0) return out;
  if (m == 1) {
    out.weights = {delta};
    return out;
  }

  std::vector<Coalition> rows;
  std::vector<double> weights;
  double ridge = 0.0;
  if (m <= cfg.exact_threshold) {
    const std::uint64_t total = std::uint64_t{1} << m;
    rows.reserve(total - 2);
    for (std::uint64_t bits = 1; bits + 1 < total; ++bits) {
      Coalition z(m);
      Index s = 0;
      for (Index j = 0; j < m; ++j) {
        z[j] = static_cast<std::uint8_t>((bits >> j) & 1U);
        s += z[j];
      }
      rows.push_back(std::move(z));
      weights.push_back(shap_kernel_weight(m, s));
    }
  } else {
    if (cfg.n_samples < m + 2) {
      throw ArgumentError("explain: n_samples (" + std::to_string(cfg.n_samples) + ") must be >= players + 2 (" +
                          std::to_string(m + 2) + ")");
    }
    ridge = cfg.ridge;
    Index lo_size = 1;
    if (2 * m <= cfg.n_samples) {
      // Sizes 1 and m-1 are enumerated outright with their kernel weights.
      for (Index j = 0; j < m; ++j) {
        Coalition single(m, 0), all_but(m, 1);
        single[j] = 1;
        all_but[j] = 0;
        rows.push_back(std::move(single));
        weights.push_back(shap_kernel_weight(m, 1));
        if (m > 2) {
          rows.push_back(std::move(all_but));
          weights.push_back(shap_kernel_weight(m, m - 1));
        }
      }
      lo_size = 2;
    }
    const Index hi_size = m - lo_size;
    if (lo_size <= hi_size) {
      std::vector<double> cumulative;
      double mass = 0.0;
      for (Index s = lo_size; s <= hi_size; ++s) {
        mass += size_mass(m, s);
        cumulative.push_back(mass);
      }
      const Index budget = cfg.n_samples - rows.size();
      const double each = mass / static_cast<double>(budget);
      Index drawn = 0;
      while (drawn < budget) {
        const double u = rng.uniform() * mass;
        const Index s = lo_size + static_cast<Index>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                                     cumulative.begin());
        Coalition z = random_subset(m, std::min(s, hi_size), rng);
        Coalition comp(m);
        for (Index j = 0; j < m; ++j) comp[j] = static_cast<std::uint8_t>(1 - z[j]);
        rows.push_back(std::move(z));
        weights.push_back(each);
        ++drawn;
        if (drawn < budget) {
          rows.push_back(std::move(comp));
          weights.push_back(each);
          ++drawn;
        }
      }
    }
  }

  // Eliminate the constraints g(0) = v(0) and sum(w) = v(1) - v(0) by
  // substituting w_last = delta - sum_{j<last} w_j.
  const Index p = m - 1;
  Matrix design(rows.size(), p);
  Vector targets(rows.size());
  for (Index k = 0; k < rows.size(); ++k) {
    const Coalition& z = rows[k];
    const double z_last = z[p];
    for (Index j = 0; j < p; ++j) design(k, j) = static_cast<double>(z[j]) - z_last;
    targets[k] = game(z) - out.base - z_last * delta;
  }
  Vector coef = weighted_least_squares(design, targets, weights, ridge);
  out.weights.resize(m);
  double partial = 0.0;
  for (Index j = 0; j < p; ++j) {
    out.weights[j] = coef[j];
    partial += coef[j];
  }
  out.weights[p] = delta - partial;
  return out;
}

namespace {

double model_value(const TrainedModel& model, const Matrix& input, Index steps, ExplainTarget target) {
  const Vector y = forward(input, Matrix::ones(input.rows(), input.cols()), model.params);
  const double p = y[steps - 1];
  if (target == ExplainTarget::Probability) return p;
  return std::log(p) - std::log1p(-p);
}

}  // namespace

StepExplanation explain_step(const TrainedModel& model, const Matrix& X, const Matrix& M, Index steps,
                             const BackgroundMatrix& B, const ExplainerConfig& cfg) {
  if (!model.trained()) throw StateError("explain: model is not trained");
  if (steps < 1 || steps > X.cols()) throw ArgumentError("explain_step: step outside 1.." + std::to_string(X.cols()));
  StepExplanation out;
  out.players = players_for(cfg.mode, M, steps);
  auto game = [&](const Coalition& z) {
    return model_value(model, perturb(X, M, z, steps, B, cfg.mode), steps, cfg.target);
  };
  RngStream rng = RngStream(cfg.seed).derive(steps);
  out.game = explain_game(out.players.size(), game, cfg, rng);
  return out;
}

ImportanceMatrix explain_patient(const TrainedModel& model, const PatientRecord& patient, const BackgroundMatrix& B,
                                 const ExplainerConfig& cfg) {
  if (!model.trained()) throw StateError("explain: model is not trained");
  const Index F = patient.X.rows();
  const Index T = patient.X.cols();
  const Index stay = patient.stay_length;
  if (stay < 1 || stay > T) throw ArgumentError("explain_patient: invalid stay length");

  ImportanceMatrix out;
  out.patient_id = patient.id;
  out.mode = cfg.mode;
  out.method = "itshap";
  out.base.assign(T, 0.0);
  out.output.assign(T, 0.0);
  out.explained.assign(T, false);
  out.W = cfg.mode == ExplainMode::Cell ? Matrix(F, T) : Matrix(1, T);
  if (cfg.mode == ExplainMode::Timestep) out.step_table = Matrix(T, T);
  if (cfg.mode == ExplainMode::Cell && cfg.all_steps) out.step_cells.assign(T, Matrix());

  // Empty and full coalitions of the last step contain those of every earlier
  // step as column prefixes, so one causal pass yields every base and output.
  const auto last_players = players_for(cfg.mode, patient.M, stay);
  const Matrix empty_input = perturb(patient.X, patient.M, Coalition(last_players.size(), 0), stay, B, cfg.mode);
  const Matrix full_input = perturb(patient.X, patient.M, Coalition(last_players.size(), 1), stay, B, cfg.mode);
  for (Index t = 1; t <= stay; ++t) {
    out.base[t - 1] = model_value(model, empty_input, t, cfg.target);
    out.output[t - 1] = model_value(model, full_input, t, cfg.target);
  }

  const Index first = cfg.all_steps ? 1 : stay;
  for (Index t = first; t <= stay; ++t) {
    const StepExplanation step = explain_step(model, patient.X, patient.M, t, B, cfg);
    out.explained[t - 1] = true;
    if (cfg.mode == ExplainMode::Timestep) {
      for (Index k = 0; k < step.players.size(); ++k) out.step_table(t - 1, step.players[k].step) = step.game.weights[k];
      if (t == stay)
        for (Index k = 0; k < step.players.size(); ++k) out.W(0, step.players[k].step) = step.game.weights[k];
      continue;
    }
    Matrix cells(F, T);
    for (Index k = 0; k < step.players.size(); ++k) cells(step.players[k].feature, step.players[k].step) = step.game.weights[k];
    if (t == stay) out.W = cells;
    if (cfg.all_steps) out.step_cells[t - 1] = std::move(cells);
  }
  return out;
}

bool in_scope(const PatientRecord& p, ClassScope scope) noexcept {
  switch (scope) {
    case ClassScope::All: return true;
    case ClassScope::Positive: return p.positive();
    case ClassScope::Negative: return !p.positive();
  }
  return true;
}

ImportanceMatrix aggregate_by_class(const std::vector<ImportanceMatrix>& explanations, const Cohort& cohort,
                                    ClassScope scope) {
  if (explanations.size() != cohort.size()) throw ArgumentError("aggregate_by_class: explanations and cohort differ in size");
  std::vector<Index> members;
  for (Index i = 0; i < cohort.size(); ++i)
    if (in_scope(cohort.patients[i], scope)) members.push_back(i);
  if (members.empty()) throw ArgumentError(std::string("aggregate_by_class: no patients in scope '") + to_string(scope) + "'");

  const Matrix& first = explanations[members.front()].W;
  const Index R = first.rows(), C = first.cols();
  ImportanceMatrix agg;
  agg.W = Matrix(R, C);
  agg.valid_counts.assign(R * C, 0);
  agg.base.assign(C, 0.0);
  agg.output.assign(C, 0.0);
  agg.explained.assign(C, false);
  std::vector<Index> step_counts(C, 0);
  for (Index i : members) {
    const auto& e = explanations[i];
    const auto& p = cohort.patients[i];
    if (e.W.rows() != R || e.W.cols() != C) throw ShapeError("aggregate_by_class: importance matrices differ in shape");
    for (Index t = 0; t < C; ++t) {
      if (!p.valid(t)) continue;
      for (Index r = 0; r < R; ++r) {
        agg.W(r, t) += e.W(r, t);
        agg.valid_counts[r * C + t] += 1;
      }
      if (t < e.base.size()) {
        agg.base[t] += e.base[t];
        agg.output[t] += t < e.output.size() ? e.output[t] : 0.0;
        step_counts[t] += 1;
      }
    }
  }
  for (Index r = 0; r < R; ++r)
    for (Index t = 0; t < C; ++t)
      if (agg.valid_counts[r * C + t] > 0) agg.W(r, t) /= static_cast<double>(agg.valid_counts[r * C + t]);
  for (Index t = 0; t < C; ++t) {
    if (step_counts[t] == 0) continue;
    agg.base[t] /= static_cast<double>(step_counts[t]);
    agg.output[t] /= static_cast<double>(step_counts[t]);
    agg.explained[t] = true;
  }
  agg.method = explanations[members.front()].method;
  agg.mode = explanations[members.front()].mode;
  agg.scope = scope;
  agg.patient_id = "*";
  return agg;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_attributions(const std::filesystem::path& path, const FeatureSchema& schema,
                        const std::vector<ImportanceMatrix>& explanations, const Cohort& cohort) {
  if (explanations.size() != cohort.size()) throw ArgumentError("write_attributions: size mismatch");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "patient_id,feature,t,attribution,base_t,mode\n";
  for (Index i = 0; i < explanations.size(); ++i) {
    const auto& e = explanations[i];
    const auto& p = cohort.patients[i];
    for (Index r = 0; r < e.W.rows(); ++r) {
      const std::string name = e.W.rows() == 1 && e.mode == ExplainMode::Timestep ? "*" : schema[r].name;
      for (Index t = 0; t < p.stay_length; ++t) {
        out << e.patient_id << ',' << name << ',' << (t + 1) << ',' << num(e.W(r, t)) << ',' << num(e.base[t]) << ','
            << to_string(e.mode) << '\n';
      }
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_aggregate(const std::filesystem::path& path, const FeatureSchema& schema, const ImportanceMatrix& agg) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "feature,t,score,n_valid,scope\n";
  const Index C = agg.W.cols();
  for (Index r = 0; r < agg.W.rows(); ++r) {
    const std::string name = agg.W.rows() == schema.size() ? schema[r].name : "*";
    for (Index t = 0; t < C; ++t) {
      const Index n = agg.valid_counts.empty() ? 1 : agg.valid_counts[r * C + t];
      out << name << ',' << (t + 1) << ',';
      if (n > 0) out << num(agg.W(r, t));
      out << ',' << n << ',' << to_string(agg.scope) << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace tempxai
