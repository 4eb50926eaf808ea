#include "tempxai/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "tempxai/errors.hpp"
#include "tempxai/eval.hpp"

namespace tempxai {

using nlohmann::json;
namespace fs = std::filesystem;

const char* to_string(ExplainMethod method) noexcept {
  switch (method) {
    case ExplainMethod::Cmi: return "cmi";
    case ExplainMethod::Attention: return "attention";
    case ExplainMethod::ItShap: return "itshap";
  }
  return "itshap";
}

ExplainMethod parse_explain_method(const std::string& text) {
  if (text == "cmi") return ExplainMethod::Cmi;
  if (text == "attention") return ExplainMethod::Attention;
  if (text == "itshap") return ExplainMethod::ItShap;
  throw ConfigError("unknown method '" + text + "' (expected cmi, attention or itshap)");
}

Variants parse_variants(const std::string& text) {
  if (text == "on") return Variants::Attention;
  if (text == "off") return Variants::Plain;
  if (text == "both") return Variants::Both;
  throw ConfigError("unknown attention setting '" + text + "' (expected on, off or both)");
}

const char* variant_name(bool use_attention) noexcept { return use_attention ? "gru_attention" : "gru"; }

fs::path RunConfig::cohort_file() const { return cohort_path ? *cohort_path : output_dir / "cohort.csv"; }
fs::path RunConfig::schema_file() const { return schema_path ? *schema_path : output_dir / "schema.txt"; }

fs::path RunConfig::checkpoint_file(bool use_attention, std::uint64_t seed) const {
  return output_dir / "checkpoints" / (std::string(variant_name(use_attention)) + "_seed" + std::to_string(seed) + ".ckpt");
}

fs::path RunConfig::run_metrics_file(bool use_attention, std::uint64_t seed) const {
  return output_dir / "runs" / (std::string(variant_name(use_attention)) + "_seed" + std::to_string(seed) + ".csv");
}

fs::path RunConfig::metrics_file(bool use_attention) const {
  return output_dir / (std::string("metrics_") + variant_name(use_attention) + ".csv");
}

fs::path RunConfig::explain_file(ExplainMethod m, std::uint64_t seed, ClassScope s, const std::string& extension) const {
  return output_dir / "explain" /
         (std::string(to_string(m)) + "_seed" + std::to_string(seed) + "_" + tempxai::to_string(s) + extension);
}

void RunConfig::validate() const {
  if (seeds.empty()) throw ConfigError("seed list is empty");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
  synth.validate();
  train.validate();
  cmi.validate_scoring();
  cmi.validate_selection();
  explainer.validate();
}

namespace {

// Strict reader over one JSON object: typed getters, unknown keys rejected.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(label() + " must be an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json* find(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void count(const char* key, Index& out) {
    if (const json* v = find(key)) out = as_count(*v, key);
  }
  void u64(const char* key, std::uint64_t& out) {
    if (const json* v = find(key)) out = as_count(*v, key);
  }
  void real(const char* key, double& out) {
    if (const json* v = find(key)) out = as_real(*v, key);
  }
  void flag(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(label(key) + " must be true or false");
      out = v->get<bool>();
    }
  }
  void text(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(label(key) + " must be a string");
      out = v->get<std::string>();
    }
  }
  template <typename T, typename Convert>
  void list(const char* key, std::vector<T>& out, Convert convert) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->empty()) throw ConfigError(label(key) + " must be a nonempty array");
      out.clear();
      for (const auto& e : *v) out.push_back(convert(e, key));
    }
  }

  Section child(const char* key) {
    seen_.insert(key);
    return Section(j_.contains(key) ? j_.at(key) : empty(), where_.empty() ? key : where_ + "." + key);
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError("unknown config key " + label(item.key().c_str()));
    }
  }

  Index as_count(const json& v, const char* key) const {
    if (!v.is_number_unsigned()) throw ConfigError(label(key) + " must be a nonnegative integer");
    return v.get<Index>();
  }
  double as_real(const json& v, const char* key) const {
    if (!v.is_number()) throw ConfigError(label(key) + " must be a number");
    return v.get<double>();
  }

 private:
  static const json& empty() {
    static const json e = json::object();
    return e;
  }
  std::string label(const char* key = nullptr) const {
    std::string s = where_.empty() ? "config" : "'" + where_ + "'";
    if (key) s = where_.empty() ? std::string("'") + key + "'" : "'" + where_ + "." + key + "'";
    return s;
  }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

Binning parse_binning(const std::string& s) {
  if (s == "equal_frequency") return Binning::EqualFrequency;
  if (s == "equal_width") return Binning::EqualWidth;
  throw ConfigError("unknown binning '" + s + "' (expected equal_frequency or equal_width)");
}

Conditioning parse_conditioning(const std::string& s) {
  if (s == "none") return Conditioning::None;
  if (s == "greedy") return Conditioning::GreedySelected;
  throw ConfigError("unknown conditioning '" + s + "' (expected none or greedy)");
}

ExplainTarget parse_target(const std::string& s) {
  if (s == "probability") return ExplainTarget::Probability;
  if (s == "logit") return ExplainTarget::Logit;
  throw ConfigError("unknown target '" + s + "' (expected probability or logit)");
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  cfg.cmi.top_k = 5;
  Section top(root, "");
  std::string text;
  if (top.has("output_dir")) {
    top.text("output_dir", text);
    cfg.output_dir = resolve(base_dir, text);
  } else {
    cfg.output_dir = base_dir / "out";
  }
  if (top.has("cohort")) {
    top.text("cohort", text);
    cfg.cohort_path = resolve(base_dir, text);
  }
  if (top.has("schema")) {
    top.text("schema", text);
    cfg.schema_path = resolve(base_dir, text);
  }
  top.list("seeds", cfg.seeds, [&](const json& v, const char* k) { return std::uint64_t{top.as_count(v, k)}; });
  top.real("train_fraction", cfg.train_fraction);
  top.real("threshold", cfg.threshold);
  if (top.has("attention")) {
    top.text("attention", text);
    cfg.variants = parse_variants(text);
  }

  Section synth = top.child("synth");
  auto& s = cfg.synth;
  synth.count("n_patients", s.n_patients);
  synth.real("mdr_fraction", s.mdr_fraction);
  synth.count("T", s.T);
  synth.count("n_previous_culture", s.n_previous_culture);
  synth.count("n_antibiotic", s.n_antibiotic);
  synth.count("n_environment", s.n_environment);
  synth.count("n_care", s.n_care);
  synth.count("n_planted", s.n_planted);
  synth.real("planted_rate", s.planted_rate);
  synth.count("planted_onset_max", s.planted_onset_max);
  synth.real("signal_strength", s.signal_strength);
  synth.real("stay_log_mean", s.stay_log_mean);
  synth.real("stay_log_sd", s.stay_log_sd);
  synth.real("missing_rate", s.missing_rate);
  synth.u64("seed", s.seed);
  synth.finish();

  Section train = top.child("train");
  auto& t = cfg.train;
  train.count("max_epochs", t.max_epochs);
  train.count("patience", t.patience);
  train.count("batch_size", t.batch_size);
  train.count("cv_folds", t.cv_folds);
  train.list("learning_rates", t.grid.learning_rates, [&](const json& v, const char* k) { return train.as_real(v, k); });
  train.list("dropout_rates", t.grid.dropout_rates, [&](const json& v, const char* k) { return train.as_real(v, k); });
  train.list("hidden_sizes", t.grid.hidden_sizes, [&](const json& v, const char* k) { return train.as_count(v, k); });
  train.finish();
  t.learning_rate = t.grid.learning_rates.front();
  t.dropout_rate = t.grid.dropout_rates.front();
  t.hidden_size = t.grid.hidden_sizes.front();

  Section cmi = top.child("cmi");
  auto& c = cfg.cmi;
  cmi.count("n_bins", c.n_bins);
  if (cmi.has("binning")) {
    cmi.text("binning", text);
    c.binning = parse_binning(text);
  }
  if (cmi.has("conditioning")) {
    cmi.text("conditioning", text);
    c.conditioning = parse_conditioning(text);
  }
  if (cmi.has("threshold") && !cmi.has("top_k")) c.top_k.reset();
  if (const json* v = cmi.find("top_k")) c.top_k = cmi.as_count(*v, "top_k");
  if (const json* v = cmi.find("threshold")) c.threshold = cmi.as_real(*v, "threshold");
  cmi.count("min_samples", c.min_samples);
  cmi.count("max_conditioners", c.max_conditioners);
  cmi.finish();

  Section ex = top.child("explain");
  auto& e = cfg.explainer;
  if (ex.has("method")) {
    ex.text("method", text);
    cfg.method = parse_explain_method(text);
  }
  if (ex.has("scope")) {
    ex.text("scope", text);
    cfg.scope = parse_class_scope(text);
  }
  if (ex.has("mode")) {
    ex.text("mode", text);
    e.mode = parse_explain_mode(text);
  }
  ex.count("n_samples", e.n_samples);
  ex.real("ridge", e.ridge);
  ex.count("exact_threshold", e.exact_threshold);
  if (ex.has("target")) {
    ex.text("target", text);
    e.target = parse_target(text);
  }
  ex.flag("all_steps", e.all_steps);
  if (ex.has("model")) {
    ex.text("model", text);
    if (text != "gru" && text != "gru_attention") throw ConfigError("explain.model must be gru or gru_attention");
    cfg.explain_attention_model = text == "gru_attention";
  }
  ex.count("max_patients", cfg.max_patients);
  ex.flag("heatmap", cfg.heatmap);
  ex.finish();

  top.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

std::pair<Cohort, Cohort> seed_split(const Cohort& cohort, double train_fraction, std::uint64_t seed) {
  RngStream rng = RngStream(seed).derive(100);
  return split_train_test(cohort, train_fraction, rng);
}

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

Cohort load_inputs(const RunConfig& cfg) {
  for (const auto& p : {cfg.cohort_file(), cfg.schema_file()}) {
    if (!fs::exists(p)) throw DataError("input file not found: " + p.string() + " (run synth first or set cohort/schema)");
  }
  return load_cohort(cfg.cohort_file(), cfg.schema_file());
}

TrainedModel load_model(const RunConfig& cfg, bool use_attention, std::uint64_t seed, const Cohort& cohort) {
  const fs::path path = cfg.checkpoint_file(use_attention, seed);
  if (!fs::exists(path)) throw DataError("checkpoint not found: " + path.string() + " (run train first)");
  TrainedModel model = load_checkpoint(path);
  if (model.schema_fingerprint != cohort.schema.fingerprint()) {
    throw SchemaError("checkpoint " + path.string() + " was trained on a different feature schema");
  }
  return model;
}

std::vector<bool> selected_variants(Variants v) {
  switch (v) {
    case Variants::Plain: return {false};
    case Variants::Attention: return {true};
    case Variants::Both: return {false, true};
  }
  return {false, true};
}

std::string fmt(double v, const char* spec = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

void cmd_synth(const RunConfig& cfg) {
  cfg.synth.validate();
  ensure_dir(cfg.output_dir);
  const Cohort cohort = synth_cohort(cfg.synth);
  const fs::path data = cfg.output_dir / "cohort.csv";
  const fs::path schema = cfg.output_dir / "schema.txt";
  save_cohort(cohort, data, schema);
  Index rows = 0;
  for (const auto& p : cohort.patients) rows += p.stay_length;
  const Index pos = cohort.positive_count();
  std::cout << "wrote " << data.string() << " (" << rows << " rows) and " << schema.string() << '\n'
            << "patients " << cohort.size() << ", positive " << pos << " (" << fmt(100.0 * pos / cohort.size(), "%.1f")
            << "%), negative " << cohort.size() - pos << '\n';
}

void cmd_train(const RunConfig& cfg) {
  cfg.validate();
  const Cohort cohort = load_inputs(cfg);
  const Index pos = cohort.positive_count();
  if (pos == 0 || pos == cohort.size()) {
    throw DataError(std::string("train: cohort has a single class (") + (pos == 0 ? "no positive" : "no negative") +
                    " patients); cannot stratify the train/test split");
  }
  ensure_dir(cfg.output_dir / "checkpoints");
  ensure_dir(cfg.output_dir / "runs");
  const auto variants = selected_variants(cfg.variants);
  std::vector<std::vector<MetricTable>> tables(2);
  for (std::uint64_t seed : cfg.seeds) {
    auto [train_set, test_set] = seed_split(cohort, cfg.train_fraction, seed);
    for (bool att : variants) {
      TrainConfig tc = cfg.train;
      tc.seed = seed;
      const TrainedModel model = train(train_set, tc, att);
      save_checkpoint(model, cfg.checkpoint_file(att, seed));
      MetricTable table = evaluate(model, test_set, cfg.threshold);
      write_metric_table(cfg.run_metrics_file(att, seed), table);
      double auc = 0.0;
      Index n = 0;
      for (const auto& v : table.values[0])
        if (v) {
          auc += *v;
          ++n;
        }
      std::cout << "seed " << seed << ' ' << variant_name(att) << ": lr " << fmt(model.config.learning_rate, "%g")
                << ", dropout " << fmt(model.config.dropout_rate, "%g") << ", hidden " << model.config.hidden_size
                << ", best epoch " << model.history.best_epoch + 1 << ", mean AUC "
                << (n ? fmt(auc / static_cast<double>(n)) : std::string("undefined")) << '\n';
      tables[att ? 1 : 0].push_back(std::move(table));
    }
  }
  for (bool att : variants) {
    if (tables[att ? 1 : 0].size() < 2) {
      std::cout << "single seed: no aggregate written for " << variant_name(att) << '\n';
      continue;
    }
    const MetricSet set = aggregate_repeats(tables[att ? 1 : 0]);
    write_metric_set(cfg.metrics_file(att), set);
    std::cout << "wrote " << cfg.metrics_file(att).string() << '\n';
  }
}

ImportanceMatrix attention_importance(const TrainedModel& model, const PatientRecord& patient) {
  if (!model.has_attention()) throw ConfigError("attention explanation requested on a checkpoint without attention");
  ImportanceMatrix im;
  im.W = attention_matrix(hadamard(patient.X, patient.M), *model.params.attention);
  for (Index t = patient.stay_length; t < im.W.cols(); ++t)
    for (Index f = 0; f < im.W.rows(); ++f) im.W(f, t) = 0.0;
  im.method = "attention";
  im.patient_id = patient.id;
  return im;
}

void write_heatmap(const fs::path& pgm_path, const FeatureSchema& schema, const Matrix& W,
                   const std::vector<Index>& valid_counts) {
  const Index R = W.rows(), C = W.cols();
  auto live = [&](Index r, Index c) { return valid_counts.empty() || valid_counts[r * C + c] > 0; };
  double lo = INFINITY, hi = -INFINITY;
  for (Index r = 0; r < R; ++r)
    for (Index c = 0; c < C; ++c)
      if (live(r, c)) {
        lo = std::min(lo, W(r, c));
        hi = std::max(hi, W(r, c));
      }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  std::ofstream out(pgm_path);
  if (!out) throw IoError("cannot write " + pgm_path.string());
  out << "P2\n" << C << ' ' << R << "\n255\n";
  for (Index r = 0; r < R; ++r) {
    for (Index c = 0; c < C; ++c) {
      int level = 0;
      if (live(r, c) && hi > lo) level = static_cast<int>(std::lround(255.0 * (W(r, c) - lo) / (hi - lo)));
      out << level << (c + 1 == C ? '\n' : ' ');
    }
  }
  fs::path scale = pgm_path;
  scale.replace_extension(".scale.txt");
  std::ofstream s(scale);
  if (!s) throw IoError("cannot write " + scale.string());
  s << "min " << fmt(lo, "%.17g") << "\nmax " << fmt(hi, "%.17g") << "\nblack = min, white = max; cells without data are black\n";
  s << "columns: t = 1.." << C << '\n';
  for (Index r = 0; r < R; ++r) s << "row " << r + 1 << ' ' << (R == schema.size() ? schema[r].name : "*") << '\n';
}

void cmd_explain(const RunConfig& cfg) {
  cfg.validate();
  const Cohort cohort = load_inputs(cfg);
  ensure_dir(cfg.output_dir / "explain");
  for (std::uint64_t seed : cfg.seeds) {
    auto [train_set, test_set] = seed_split(cohort, cfg.train_fraction, seed);
    if (cfg.method == ExplainMethod::Cmi) {
      if (cfg.scope != ClassScope::All) {
        throw ConfigError("cmi scores need both classes; only --scope all is supported for --method cmi");
      }
      const CmiScores scores = cmi_feature_scores(train_set, cfg.cmi);
      const Matrix selection = select_features(scores, cfg.cmi);
      const fs::path csv = cfg.explain_file(cfg.method, seed, cfg.scope, ".csv");
      write_cmi_scores(csv, cohort.schema, scores, selection);
      if (cfg.heatmap) {
        std::vector<Index> live(scores.present.size());
        for (Index k = 0; k < live.size(); ++k) live[k] = scores.present[k] ? 1 : 0;
        write_heatmap(cfg.explain_file(cfg.method, seed, cfg.scope, ".pgm"), cohort.schema, scores.S, live);
      }
      std::cout << "seed " << seed << ": wrote " << csv.string() << '\n';
      continue;
    }

    const bool att = cfg.method == ExplainMethod::Attention ? true : cfg.explain_attention_model;
    const TrainedModel model = load_model(cfg, att, seed, cohort);
    if (cfg.method == ExplainMethod::Attention && !model.has_attention()) {
      throw ConfigError("checkpoint " + cfg.checkpoint_file(att, seed).string() + " has no attention layer");
    }
    // Explain the first max_patients in-scope test patients.
    std::vector<Index> members;
    for (Index i = 0; i < test_set.size(); ++i)
      if (in_scope(test_set.patients[i], cfg.scope) && (cfg.max_patients == 0 || members.size() < cfg.max_patients))
        members.push_back(i);
    if (members.empty()) {
      throw DataError(std::string("seed ") + std::to_string(seed) + ": no test patients in scope '" + to_string(cfg.scope) + "'");
    }
    const Cohort explained = test_set.subset(members);

    std::vector<ImportanceMatrix> per_patient;
    per_patient.reserve(explained.size());
    if (cfg.method == ExplainMethod::Attention) {
      for (const auto& p : explained.patients) per_patient.push_back(attention_importance(model, p));
    } else {
      const BackgroundMatrix bg = background_matrix(train_set);
      ExplainerConfig ec = cfg.explainer;
      ec.seed = seed;
      for (const auto& p : explained.patients) per_patient.push_back(explain_patient(model, p, bg, ec));
      write_attributions(cfg.explain_file(cfg.method, seed, cfg.scope, "_attributions.csv"), cohort.schema, per_patient,
                         explained);
    }
    ImportanceMatrix agg = aggregate_by_class(per_patient, explained, cfg.scope);
    agg.method = to_string(cfg.method);
    const fs::path csv = cfg.explain_file(cfg.method, seed, cfg.scope, ".csv");
    write_aggregate(csv, cohort.schema, agg);
    if (cfg.heatmap) write_heatmap(cfg.explain_file(cfg.method, seed, cfg.scope, ".pgm"), cohort.schema, agg.W, agg.valid_counts);
    std::cout << "seed " << seed << ": wrote " << csv.string() << '\n';
  }
}

void cmd_report(const RunConfig& cfg) {
  for (bool att : {false, true}) {
    if (!fs::exists(cfg.metrics_file(att))) {
      throw DataError("report: missing aggregate " + cfg.metrics_file(att).string() + " (train both variants with 2+ seeds)");
    }
  }
  const MetricSet plain = read_metric_set(cfg.metrics_file(false));
  const MetricSet attn = read_metric_set(cfg.metrics_file(true));
  const DeltaReport report = delta_report(plain, attn);
  ensure_dir(cfg.output_dir);
  write_delta_report(cfg.output_dir / "delta.csv", report,
                     {"delta = gru - gru_attention (per step, mean and standard deviation over repeats)",
                      "negative mean_delta means the GRU model with attention outperforms the plain GRU"});

  std::ofstream out(cfg.output_dir / "summary.txt");
  if (!out) throw IoError("cannot write " + (cfg.output_dir / "summary.txt").string());
  out << "average over defined steps of the per-step means; delta = gru - gru_attention\n";
  out << "metric gru gru_attention delta steps\n";
  for (Index m = 0; m < report.series.size(); ++m) {
    const auto a = mean_over_steps(plain[m]);
    const auto b = mean_over_steps(attn[m]);
    double dsum = 0.0;
    Index n = 0;
    for (Index t = 0; t < report.series[m].defined.size(); ++t)
      if (report.series[m].defined[t]) {
        dsum += report.series[m].mean_delta[t];
        ++n;
      }
    out << report.series[m].metric << ' ' << (a ? fmt(*a, "%.6f") : "undefined") << ' '
        << (b ? fmt(*b, "%.6f") : "undefined") << ' ' << (n ? fmt(dsum / static_cast<double>(n), "%.6f") : "undefined")
        << ' ' << n << '\n';
  }
  if (!out) throw IoError("write failed for summary.txt");
  std::cout << "wrote " << (cfg.output_dir / "delta.csv").string() << " and " << (cfg.output_dir / "summary.txt").string()
            << '\n';
}

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("--seed expects comma-separated nonnegative integers, got '" + text + "'");
    }
    seeds.push_back(std::stoull(item));
  }
  if (seeds.empty()) throw ConfigError("--seed list is empty");
  return seeds;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Temporal MDR prediction with explainable GRU models"};
  app.require_subcommand(1);
  std::string config_path, seeds, method, scope, out_dir, attention;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--seed", seeds, "Comma-separated seeds");
    sub->add_option("--out", out_dir, "Output directory");
  };
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic cohort");
  CLI::App* train_cmd = app.add_subcommand("train", "Train, evaluate and aggregate over seeds");
  CLI::App* explain = app.add_subcommand("explain", "Importance maps with cmi, attention or itshap");
  CLI::App* report = app.add_subcommand("report", "Compare the two model variants");
  for (CLI::App* sub : {synth, train_cmd, explain, report}) add_common(sub);
  train_cmd->add_option("--attention", attention, "on, off or both");
  explain->add_option("--method", method, "cmi, attention or itshap");
  explain->add_option("--scope", scope, "all, positive or negative");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig cfg = config_path.empty() ? parse_run_config("{}", fs::current_path()) : load_run_config(config_path);
    if (!seeds.empty()) {
      cfg.seeds = parse_seed_list(seeds);
      cfg.synth.seed = cfg.seeds.front();
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!attention.empty()) cfg.variants = parse_variants(attention);
    if (!method.empty()) cfg.method = parse_explain_method(method);
    if (!scope.empty()) cfg.scope = parse_class_scope(scope);
    cfg.validate();

    if (synth->parsed()) cmd_synth(cfg);
    else if (train_cmd->parsed()) cmd_train(cfg);
    else if (explain->parsed()) cmd_explain(cfg);
    else cmd_report(cfg);
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace tempxai
