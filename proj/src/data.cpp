#include "tempxai/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tempxai/errors.hpp"

namespace tempxai {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(trim(cell));
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  out.push_back(trim(cell));
  return out;
}

double parse_real(const std::string& text, const std::string& context) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw ValueError("not a finite number '" + text + "' (" + context + ")");
  }
  return v;
}

long parse_int(const std::string& text, const std::string& context) {
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0') throw ValueError("not an integer '" + text + "' (" + context + ")");
  return v;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const char* to_string(FeatureKind kind) noexcept {
  return kind == FeatureKind::Binary ? "binary" : "numeric";
}

const char* to_string(FeatureGroup group) noexcept {
  switch (group) {
    case FeatureGroup::PreviousCulture: return "previous_culture";
    case FeatureGroup::Antibiotic: return "antibiotic";
    case FeatureGroup::Environment: return "environment";
    case FeatureGroup::Care: return "care";
  }
  return "care";
}

FeatureKind parse_feature_kind(const std::string& text) {
  if (text == "binary") return FeatureKind::Binary;
  if (text == "numeric") return FeatureKind::Numeric;
  throw SchemaError("unknown feature kind '" + text + "'");
}

FeatureGroup parse_feature_group(const std::string& text) {
  if (text == "previous_culture") return FeatureGroup::PreviousCulture;
  if (text == "antibiotic") return FeatureGroup::Antibiotic;
  if (text == "environment") return FeatureGroup::Environment;
  if (text == "care") return FeatureGroup::Care;
  throw SchemaError("unknown feature group '" + text + "'");
}

FeatureSchema::FeatureSchema(std::vector<FeatureDescriptor> features) : features_(std::move(features)) {
  std::set<std::string> seen;
  for (const auto& f : features_) {
    if (f.name.empty()) throw SchemaError("empty feature name");
    if (f.name.find_first_of(",\n\r") != std::string::npos) {
      throw SchemaError("feature name '" + f.name + "' contains a delimiter");
    }
    if (!seen.insert(f.name).second) throw SchemaError("duplicate feature name '" + f.name + "'");
  }
}

std::optional<Index> FeatureSchema::index_of(const std::string& name) const {
  for (Index f = 0; f < features_.size(); ++f)
    if (features_[f].name == name) return f;
  return std::nullopt;
}

std::uint64_t FeatureSchema::fingerprint() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  for (const auto& f : features_) {
    mix(f.name);
    mix(to_string(f.kind));
    mix(to_string(f.group));
  }
  return h;
}

bool PatientRecord::positive() const noexcept {
  return std::any_of(y.begin(), y.end(), [](int v) { return v == 1; });
}

Cohort Cohort::subset(const std::vector<Index>& indices) const {
  Cohort out;
  out.schema = schema;
  out.T = T;
  out.patients.reserve(indices.size());
  for (Index i : indices) out.patients.push_back(patients.at(i));
  return out;
}

Index Cohort::positive_count() const noexcept {
  return static_cast<Index>(
      std::count_if(patients.begin(), patients.end(), [](const PatientRecord& p) { return p.positive(); }));
}

std::vector<int> build_labels(std::optional<Index> culture_day, Index stay_length, Index T) {
  if (stay_length < 1 || stay_length > T) {
    throw ArgumentError("stay_length " + std::to_string(stay_length) + " outside 1.." + std::to_string(T));
  }
  std::vector<int> y(T, 0);
  if (!culture_day) return y;
  if (*culture_day < 1 || *culture_day > stay_length) {
    throw ArgumentError("culture day " + std::to_string(*culture_day) + " outside 1.." +
                        std::to_string(stay_length));
  }
  for (Index t = *culture_day - 1; t < stay_length; ++t) y[t] = 1;
  return y;
}

void validate_patient(const PatientRecord& p, Index features, Index T) {
  const std::string who = "patient '" + p.id + "'";
  if (p.X.rows() != features || p.X.cols() != T || !p.M.same_shape(p.X)) throw ShapeError(who + ": X/M shape");
  if (p.y.size() != T) throw ShapeError(who + ": label length");
  if (p.stay_length < 1 || p.stay_length > T) throw RangeError(who + ": stay length out of range");
  for (double m : p.M.data())
    if (m != 0.0 && m != 1.0) throw ValueError(who + ": mask is not binary");
  for (Index t = p.stay_length; t < T; ++t) {
    for (Index f = 0; f < features; ++f)
      if (p.M(f, t) != 0.0) throw ValueError(who + ": observed cell beyond the stay");
    if (p.y[t] != 0) throw ValueError(who + ": label set beyond the stay");
  }
  for (Index t = 0; t < p.stay_length; ++t) {
    if (p.y[t] != 0 && p.y[t] != 1) throw ValueError(who + ": label is not binary");
    if (t > 0 && p.y[t] < p.y[t - 1]) throw ValueError(who + ": non-monotone label at t=" + std::to_string(t + 1));
  }
}

void save_schema(const FeatureSchema& schema, Index T, const std::filesystem::path& schema_path) {
  std::ofstream out(schema_path);
  if (!out) throw IoError("cannot write " + schema_path.string());
  out << "# tempxai feature schema\n";
  out << "T = " << T << "\n";
  for (const auto& f : schema.features()) {
    out << "\n[feature]\n";
    out << "name = " << f.name << "\n";
    out << "kind = " << to_string(f.kind) << "\n";
    out << "group = " << to_string(f.group) << "\n";
  }
  if (!out) throw IoError("write failed for " + schema_path.string());
}

FeatureSchema load_schema(const std::filesystem::path& schema_path, Index* horizon) {
  std::ifstream in(schema_path);
  if (!in) throw IoError("cannot read " + schema_path.string());
  std::vector<FeatureDescriptor> features;
  std::optional<std::map<std::string, std::string>> current;
  Index T = kDefaultHorizon;
  auto flush = [&]() {
    if (!current) return;
    auto& kv = *current;
    for (const char* key : {"name", "kind", "group"}) {
      if (!kv.count(key)) throw SchemaError(std::string("feature block missing '") + key + "'");
    }
    features.push_back({kv["name"], parse_feature_kind(kv["kind"]), parse_feature_group(kv["group"])});
    current.reset();
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line == "[feature]") {
      flush();
      current.emplace();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw SchemaError("schema line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (current) {
      if (key != "name" && key != "kind" && key != "group") throw SchemaError("unknown feature key '" + key + "'");
      (*current)[key] = value;
    } else if (key == "T") {
      const long v = parse_int(value, "schema T");
      if (v < 1) throw SchemaError("schema T must be positive");
      T = static_cast<Index>(v);
    } else {
      throw SchemaError("unknown schema key '" + key + "'");
    }
  }
  flush();
  if (features.empty()) throw SchemaError("schema declares no features");
  if (horizon) *horizon = T;
  return FeatureSchema(std::move(features));
}

Cohort load_cohort(const std::filesystem::path& data_path, const std::filesystem::path& schema_path) {
  Cohort cohort;
  cohort.schema = load_schema(schema_path, &cohort.T);
  const Index F = cohort.schema.size();
  const Index T = cohort.T;

  std::ifstream in(data_path);
  if (!in) throw IoError("cannot read " + data_path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("cohort file is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "patient_id" || header[1] != "t" || header[2] != "label") {
    throw SchemaError("cohort header must start with patient_id,t,label");
  }
  std::vector<Index> column_feature;
  std::vector<bool> present(F, false);
  for (Index c = 3; c < header.size(); ++c) {
    auto f = cohort.schema.index_of(header[c]);
    if (!f) throw SchemaError("unknown feature column '" + header[c] + "'");
    if (present[*f]) throw SchemaError("duplicate feature column '" + header[c] + "'");
    present[*f] = true;
    column_feature.push_back(*f);
  }
  for (Index f = 0; f < F; ++f)
    if (!present[f]) throw SchemaError("feature '" + cohort.schema[f].name + "' missing from cohort file");

  struct Pending {
    PatientRecord rec;
    std::vector<int> day_seen;   // 0 unseen, 1 in stay, 2 beyond stay
  };
  std::map<std::string, Pending> by_id;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    const std::string where = "line " + std::to_string(lineno);
    if (cells.size() != header.size()) throw SchemaError(where + ": expected " + std::to_string(header.size()) + " cells");
    const std::string& id = cells[0];
    if (id.empty()) throw ValueError(where + ": empty patient_id");
    const long t1 = parse_int(cells[1], where);
    if (t1 < 1 || t1 > static_cast<long>(T)) throw RangeError(where + ": t=" + cells[1] + " outside 1.." + std::to_string(T));
    const Index t = static_cast<Index>(t1 - 1);

    auto [it, inserted] = by_id.try_emplace(id);
    Pending& pend = it->second;
    if (inserted) {
      pend.rec.id = id;
      pend.rec.X = Matrix(F, T);
      pend.rec.M = Matrix(F, T);
      pend.rec.y.assign(T, 0);
      pend.day_seen.assign(T, 0);
    }
    if (pend.day_seen[t] != 0) throw ValueError(where + ": duplicate day for patient '" + id + "'");

    if (cells[2].empty()) {
      pend.day_seen[t] = 2;
      for (Index c = 3; c < cells.size(); ++c)
        if (!cells[c].empty()) throw ValueError(where + ": feature value on a day beyond the stay");
      continue;
    }
    pend.day_seen[t] = 1;
    if (cells[2] == "0") pend.rec.y[t] = 0;
    else if (cells[2] == "1") pend.rec.y[t] = 1;
    else throw ValueError(where + ": label must be 0 or 1");

    for (Index c = 3; c < cells.size(); ++c) {
      const Index f = column_feature[c - 3];
      if (cells[c].empty()) continue;
      const double v = parse_real(cells[c], where + ", " + header[c]);
      if (cohort.schema[f].kind == FeatureKind::Binary && v != 0.0 && v != 1.0) {
        throw ValueError(where + ": non-binary value " + cells[c] + " in binary feature '" + header[c] + "'");
      }
      pend.rec.X(f, t) = v;
      pend.rec.M(f, t) = 1.0;
    }
  }

  cohort.patients.reserve(by_id.size());
  for (auto& [id, pend] : by_id) {
    Index stay = 0;
    while (stay < T && pend.day_seen[stay] == 1) ++stay;
    for (Index t = stay; t < T; ++t) {
      if (pend.day_seen[t] == 1) throw ValueError("patient '" + id + "': stay days are not contiguous from t=1");
    }
    if (stay == 0) throw ValueError("patient '" + id + "': no in-stay rows");
    pend.rec.stay_length = stay;
    validate_patient(pend.rec, F, T);
    cohort.patients.push_back(std::move(pend.rec));
  }
  return cohort;
}

void save_cohort(const Cohort& cohort, const std::filesystem::path& data_path,
                 const std::filesystem::path& schema_path) {
  save_schema(cohort.schema, cohort.T, schema_path);
  std::ofstream out(data_path);
  if (!out) throw IoError("cannot write " + data_path.string());
  out << "patient_id,t,label";
  for (const auto& f : cohort.schema.features()) out << ',' << f.name;
  out << '\n';
  const Index F = cohort.features();
  for (const auto& p : cohort.patients) {
    if (p.id.find_first_of(",\n\r") != std::string::npos) throw ValueError("patient id contains a delimiter");
    for (Index t = 0; t < p.stay_length; ++t) {
      out << p.id << ',' << (t + 1) << ',' << p.y[t];
      for (Index f = 0; f < F; ++f) {
        out << ',';
        if (p.M(f, t) != 0.0) out << format_real(p.X(f, t));
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + data_path.string());
}

ClassWeights compute_class_weights(const Cohort& train) {
  if (train.patients.empty()) throw ArgumentError("compute_class_weights: empty cohort");
  ClassWeights w;
  w.beta.assign(train.T, 0.5);
  for (Index t = 0; t < train.T; ++t) {
    Index ones = 0, valid = 0;
    for (const auto& p : train.patients) {
      if (!p.valid(t)) continue;
      ++valid;
      ones += p.y[t] == 1 ? 1 : 0;
    }
    const Index zeros = valid - ones;
    if (valid == 0 || ones == 0 || zeros == 0) continue;
    w.beta[t] = static_cast<double>(std::max(ones, zeros)) / static_cast<double>(valid);
  }
  return w;
}

namespace {

void stratified_order(const Cohort& c, RngStream& rng, std::vector<Index>& pos, std::vector<Index>& neg) {
  for (Index i = 0; i < c.size(); ++i) (c.patients[i].positive() ? pos : neg).push_back(i);
  rng.shuffle(pos);
  rng.shuffle(neg);
}

}  // namespace

std::pair<Cohort, Cohort> split_train_test(const Cohort& cohort, double train_fraction, RngStream& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ArgumentError("train_fraction must lie in (0, 1)");
  const Index n = cohort.size();
  if (n < 2) throw ArgumentError("split_train_test: need at least 2 patients");
  std::vector<Index> pos, neg;
  stratified_order(cohort, rng, pos, neg);

  auto clamp_stratum = [](long v, Index size) -> Index {
    // Keep at least one member on each side when the stratum allows it.
    const long lo = size >= 2 ? 1 : 0;
    const long hi = size >= 2 ? static_cast<long>(size) - 1 : static_cast<long>(size);
    return static_cast<Index>(std::clamp(v, lo, hi));
  };
  const long n_train = std::clamp(std::lround(train_fraction * static_cast<double>(n)), 1L, static_cast<long>(n) - 1);
  Index train_pos = clamp_stratum(std::lround(train_fraction * static_cast<double>(pos.size())), pos.size());
  Index train_neg = static_cast<Index>(std::clamp(n_train - static_cast<long>(train_pos), 0L, static_cast<long>(neg.size())));
  if (train_pos + train_neg == 0) train_pos = 1;  // only reachable with a single-class cohort of size >= 2
  if (train_pos + train_neg == n) {
    if (train_neg > 0) --train_neg;
    else --train_pos;
  }

  std::vector<Index> train(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(train_pos));
  train.insert(train.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(train_neg));
  std::vector<Index> test(pos.begin() + static_cast<std::ptrdiff_t>(train_pos), pos.end());
  test.insert(test.end(), neg.begin() + static_cast<std::ptrdiff_t>(train_neg), neg.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {cohort.subset(train), cohort.subset(test)};
}

std::vector<Fold> kfold(const Cohort& cohort, Index k, RngStream& rng) {
  if (k < 2) throw ArgumentError("kfold: k must be >= 2");
  if (k > cohort.size()) throw ArgumentError("kfold: k exceeds patient count");
  std::vector<Index> pos, neg;
  stratified_order(cohort, rng, pos, neg);
  std::vector<Index> order = pos;
  order.insert(order.end(), neg.begin(), neg.end());
  std::vector<std::vector<Index>> members(k);
  for (Index j = 0; j < order.size(); ++j) members[j % k].push_back(order[j]);

  std::vector<Fold> folds;
  folds.reserve(k);
  for (Index f = 0; f < k; ++f) {
    std::vector<Index> val = members[f];
    std::vector<Index> tr;
    for (Index g = 0; g < k; ++g)
      if (g != f) tr.insert(tr.end(), members[g].begin(), members[g].end());
    std::sort(val.begin(), val.end());
    std::sort(tr.begin(), tr.end());
    folds.push_back({cohort.subset(tr), cohort.subset(val)});
  }
  return folds;
}

void SynthConfig::validate() const {
  if (n_patients < 1) throw ConfigError("synth: n_patients must be positive");
  if (!(mdr_fraction >= 0.0 && mdr_fraction < 1.0)) throw ConfigError("synth: mdr_fraction must lie in [0, 1)");
  if (T < 1) throw ConfigError("synth: T must be positive");
  if (n_previous_culture + n_antibiotic + n_environment + n_care == 0) throw ConfigError("synth: no features");
  if (n_planted > n_previous_culture) throw ConfigError("synth: n_planted exceeds previous-culture count");
  if (!(planted_rate >= 0.0 && planted_rate <= 1.0)) throw ConfigError("synth: planted_rate must lie in [0, 1]");
  if (planted_onset_max < 1) throw ConfigError("synth: planted_onset_max must be >= 1");
  if (!(signal_strength >= 0.0) || !std::isfinite(signal_strength)) throw ConfigError("synth: signal_strength must be >= 0");
  if (!(stay_log_sd >= 0.0)) throw ConfigError("synth: stay_log_sd must be >= 0");
  if (!(missing_rate >= 0.0 && missing_rate < 1.0)) throw ConfigError("synth: missing_rate must lie in [0, 1)");
}

std::vector<Index> planted_features(const SynthConfig& cfg) {
  std::vector<Index> out(cfg.n_planted);
  for (Index j = 0; j < cfg.n_planted; ++j) out[j] = j;
  return out;
}

FeatureSchema synth_schema(const SynthConfig& cfg) {
  std::vector<FeatureDescriptor> fs;
  for (Index j = 0; j < cfg.n_previous_culture; ++j)
    fs.push_back({"prev_culture_" + std::to_string(j + 1), FeatureKind::Binary, FeatureGroup::PreviousCulture});
  for (Index j = 0; j < cfg.n_antibiotic; ++j)
    fs.push_back({"atb_" + std::to_string(j + 1), FeatureKind::Binary, FeatureGroup::Antibiotic});
  for (Index j = 0; j < cfg.n_environment; ++j)
    fs.push_back({"env_" + std::to_string(j + 1), FeatureKind::Numeric, FeatureGroup::Environment});
  for (Index j = 0; j < cfg.n_care; ++j) {
    const bool binary = j % 2 == 0;
    fs.push_back({"care_" + std::to_string(j + 1), binary ? FeatureKind::Binary : FeatureKind::Numeric,
                  FeatureGroup::Care});
  }
  return FeatureSchema(std::move(fs));
}

Cohort synth_cohort(const SynthConfig& cfg) {
  cfg.validate();
  Cohort cohort;
  cohort.schema = synth_schema(cfg);
  cohort.T = cfg.T;
  const Index F = cohort.schema.size();
  const Index T = cfg.T;
  const RngStream root(cfg.seed);
  const RngStream feature_root = root.derive(1);
  const RngStream label_root = root.derive(2);

  // Number of planted flags switched on per (patient, day); drives the hazard.
  std::vector<std::vector<int>> planted_on(cfg.n_patients, std::vector<int>(T, 0));
  char idbuf[32];
  for (Index i = 0; i < cfg.n_patients; ++i) {
    RngStream rng = feature_root.derive(i);
    PatientRecord p;
    std::snprintf(idbuf, sizeof idbuf, "P%06zu", i + 1);
    p.id = idbuf;
    p.X = Matrix(F, T);
    p.M = Matrix(F, T);
    const double stay_real = std::exp(cfg.stay_log_mean + cfg.stay_log_sd * rng.normal());
    p.stay_length = static_cast<Index>(std::clamp<double>(std::round(stay_real), 1.0, static_cast<double>(T)));
    const Index stay = p.stay_length;

    Index f = 0;
    for (Index j = 0; j < cfg.n_previous_culture; ++j, ++f) {
      if (!rng.bernoulli(cfg.planted_rate)) continue;
      const Index last = std::min(stay, cfg.planted_onset_max);
      const Index onset = static_cast<Index>(rng.below(last));
      for (Index t = onset; t < stay; ++t) {
        p.X(f, t) = 1.0;
        if (j < cfg.n_planted) planted_on[i][t] += 1;
      }
    }
    for (Index j = 0; j < cfg.n_antibiotic; ++j, ++f) {
      if (!rng.bernoulli(0.3)) continue;
      const Index start = static_cast<Index>(rng.below(stay));
      const Index len = 2 + static_cast<Index>(rng.below(5));
      for (Index t = start; t < std::min(stay, start + len); ++t) p.X(f, t) = 1.0;
    }
    for (Index j = 0; j < cfg.n_environment; ++j, ++f) {
      const double level = 2.0 + 2.0 * static_cast<double>(j);
      // Counts per ten beds, so numeric inputs share the unit scale of the flags.
      for (Index t = 0; t < stay; ++t) p.X(f, t) = std::max(0.0, std::round(level + 1.5 * rng.normal())) / 10.0;
    }
    for (Index j = 0; j < cfg.n_care; ++j, ++f) {
      const bool binary = j % 2 == 0;
      for (Index t = 0; t < stay; ++t) {
        if (binary) {
          p.X(f, t) = rng.bernoulli(0.3) ? 1.0 : 0.0;
        } else {
          // Hours of the day spent on the device, as a fraction of 24.
          p.X(f, t) = rng.bernoulli(0.5) ? 0.0 : std::round(rng.uniform(1.0, 24.0)) / 24.0;
        }
      }
    }
    for (Index t = 0; t < stay; ++t) {
      for (Index g = 0; g < F; ++g) {
        if (rng.bernoulli(cfg.missing_rate)) {
          p.X(g, t) = 0.0;
        } else {
          p.M(g, t) = 1.0;
        }
      }
    }
    for (Index t = stay; t < T; ++t)
      for (Index g = 0; g < F; ++g) p.X(g, t) = 0.0;
    cohort.patients.push_back(std::move(p));
  }

  // Daily hazard sigmoid(alpha + s * [any planted flag on]); alpha is set so that
  // the expected share of patients with a culture during the stay is mdr_fraction.
  auto hazard_logit = [&](Index i, Index t, double alpha) {
    return alpha + (planted_on[i][t] > 0 ? cfg.signal_strength : 0.0);
  };
  auto expected_share = [&](double alpha) {
    double total = 0.0;
    for (Index i = 0; i < cfg.n_patients; ++i) {
      double survive = 1.0;
      for (Index t = 0; t < cohort.patients[i].stay_length; ++t) survive *= 1.0 - sigmoid(hazard_logit(i, t, alpha));
      total += 1.0 - survive;
    }
    return total / static_cast<double>(cfg.n_patients);
  };

  for (Index i = 0; i < cfg.n_patients; ++i) {
    auto& p = cohort.patients[i];
    p.y = build_labels(std::nullopt, p.stay_length, T);
  }
  if (cfg.mdr_fraction <= 0.0) return cohort;

  double lo = -40.0, hi = 40.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (expected_share(mid) < cfg.mdr_fraction ? lo : hi) = mid;
  }
  const double alpha = 0.5 * (lo + hi);

  for (Index i = 0; i < cfg.n_patients; ++i) {
    RngStream rng = label_root.derive(i);
    auto& p = cohort.patients[i];
    std::optional<Index> culture_day;
    for (Index t = 0; t < p.stay_length; ++t) {
      if (rng.bernoulli(sigmoid(hazard_logit(i, t, alpha)))) {
        culture_day = t + 1;
        break;
      }
    }
    p.y = build_labels(culture_day, p.stay_length, T);
  }
  return cohort;
}

}  // namespace tempxai
