#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tempxai/cli.hpp"
#include "tempxai/cmi.hpp"
#include "tempxai/data.hpp"
#include "tempxai/errors.hpp"
#include "tempxai/eval.hpp"
#include "tempxai/itshap.hpp"
#include "tempxai/model.hpp"

namespace py = pybind11;
using namespace tempxai;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

Array to_numpy(const Vector& v) {
  Array out(v.size());
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Matrix from_numpy(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-D array");
  const auto r = static_cast<Index>(a.shape(0)), c = static_cast<Index>(a.shape(1));
  return Matrix(r, c, std::vector<double>(a.data(), a.data() + r * c));
}

py::dict metric_dict(const MetricTable& t) {
  py::dict d;
  for (Index m = 0; m < kMetricNames.size(); ++m) d[py::str(kMetricNames[m])] = py::cast(t.values[m]);
  d["n_valid"] = py::cast(t.n_valid);
  return d;
}

py::dict importance_dict(const ImportanceMatrix& e) {
  py::dict d;
  d["W"] = to_numpy(e.W);
  d["base"] = to_numpy(e.base);
  d["output"] = to_numpy(e.output);
  d["explained"] = py::cast(e.explained);
  d["mode"] = to_string(e.mode);
  if (!e.valid_counts.empty()) d["valid_counts"] = py::cast(e.valid_counts);
  if (e.step_table.size() > 0) d["step_table"] = to_numpy(e.step_table);
  return d;
}

}  // namespace

PYBIND11_MODULE(_tempxai, m) {
  m.doc() = "Temporal MDR prediction with masked GRU models and explanation methods";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<StateError>(m, "StateError", base.ptr());

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("n_patients", &SynthConfig::n_patients)
      .def_readwrite("mdr_fraction", &SynthConfig::mdr_fraction)
      .def_readwrite("T", &SynthConfig::T)
      .def_readwrite("n_previous_culture", &SynthConfig::n_previous_culture)
      .def_readwrite("n_antibiotic", &SynthConfig::n_antibiotic)
      .def_readwrite("n_environment", &SynthConfig::n_environment)
      .def_readwrite("n_care", &SynthConfig::n_care)
      .def_readwrite("n_planted", &SynthConfig::n_planted)
      .def_readwrite("planted_rate", &SynthConfig::planted_rate)
      .def_readwrite("signal_strength", &SynthConfig::signal_strength)
      .def_readwrite("missing_rate", &SynthConfig::missing_rate)
      .def_readwrite("seed", &SynthConfig::seed);

  py::class_<PatientRecord>(m, "Patient")
      .def_readonly("id", &PatientRecord::id)
      .def_readonly("stay_length", &PatientRecord::stay_length)
      .def_readonly("y", &PatientRecord::y)
      .def_property_readonly("X", [](const PatientRecord& p) { return to_numpy(p.X); })
      .def_property_readonly("M", [](const PatientRecord& p) { return to_numpy(p.M); })
      .def_property_readonly("positive", &PatientRecord::positive);

  py::class_<Cohort>(m, "Cohort")
      .def_readonly("T", &Cohort::T)
      .def("__len__", &Cohort::size)
      .def("__getitem__",
           [](const Cohort& c, Index i) -> const PatientRecord& {
             if (i >= c.size()) throw py::index_error();
             return c.patients[i];
           },
           py::return_value_policy::reference_internal)
      .def_property_readonly("feature_names",
                             [](const Cohort& c) {
                               std::vector<std::string> names;
                               for (const auto& f : c.schema.features()) names.push_back(f.name);
                               return names;
                             })
      .def_property_readonly("positive_count", &Cohort::positive_count)
      .def("subset", &Cohort::subset);

  m.def("synth_cohort", &synth_cohort, py::arg("config") = SynthConfig{});
  m.def("planted_features", &planted_features);
  m.def("load_cohort", &load_cohort, py::arg("data_path"), py::arg("schema_path"));
  m.def("save_cohort", &save_cohort, py::arg("cohort"), py::arg("data_path"), py::arg("schema_path"));
  m.def(
      "split_train_test",
      [](const Cohort& c, double fraction, std::uint64_t seed) {
        RngStream rng(seed);
        return split_train_test(c, fraction, rng);
      },
      py::arg("cohort"), py::arg("train_fraction") = 0.7, py::arg("seed") = 1);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("max_epochs", &TrainConfig::max_epochs)
      .def_readwrite("patience", &TrainConfig::patience)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("cv_folds", &TrainConfig::cv_folds)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_property(
          "learning_rates", [](const TrainConfig& c) { return c.grid.learning_rates; },
          [](TrainConfig& c, std::vector<double> v) { c.grid.learning_rates = std::move(v); })
      .def_property(
          "dropout_rates", [](const TrainConfig& c) { return c.grid.dropout_rates; },
          [](TrainConfig& c, std::vector<double> v) { c.grid.dropout_rates = std::move(v); })
      .def_property(
          "hidden_sizes", [](const TrainConfig& c) { return c.grid.hidden_sizes; },
          [](TrainConfig& c, std::vector<Index> v) { c.grid.hidden_sizes = std::move(v); });

  py::class_<TrainedModel>(m, "TrainedModel")
      .def_property_readonly("has_attention", &TrainedModel::has_attention)
      .def_property_readonly("learning_rate", [](const TrainedModel& t) { return t.config.learning_rate; })
      .def_property_readonly("hidden_size", [](const TrainedModel& t) { return t.config.hidden_size; })
      .def_property_readonly("train_loss", [](const TrainedModel& t) { return t.history.train_loss; })
      .def_property_readonly("validation_loss", [](const TrainedModel& t) { return t.history.validation_loss; })
      .def_property_readonly("best_epoch", [](const TrainedModel& t) { return t.history.best_epoch; })
      .def_property_readonly("parameters", [](const TrainedModel& t) { return to_numpy(t.params.flatten()); });

  m.def("train", &train, py::arg("cohort"), py::arg("config") = TrainConfig{}, py::arg("attention") = true,
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "forward",
      [](const TrainedModel& model, const Array& X, const Array& M) {
        return to_numpy(forward(from_numpy(X), from_numpy(M), model));
      },
      py::arg("model"), py::arg("X"), py::arg("M"));
  m.def(
      "attention_matrix",
      [](const TrainedModel& model, const Array& X, const Array& M) {
        if (!model.has_attention()) throw StateError("model has no attention layer");
        return to_numpy(attention_matrix(hadamard(from_numpy(X), from_numpy(M)), *model.params.attention));
      },
      py::arg("model"), py::arg("X"), py::arg("M"));
  m.def("save_checkpoint", &save_checkpoint, py::arg("model"), py::arg("path"));
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  m.def(
      "evaluate",
      [](const TrainedModel& model, const Cohort& test, double threshold) {
        return metric_dict(evaluate(model, test, threshold));
      },
      py::arg("model"), py::arg("test"), py::arg("threshold") = kDefaultThreshold);
  m.def(
      "roc_auc",
      [](const std::vector<double>& s, const std::vector<int>& y) { return roc_auc_step(s, y); },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "sens_spec",
      [](const std::vector<double>& s, const std::vector<int>& y, double th) {
        const SensSpec r = sens_spec_step(s, y, th);
        return std::make_pair(r.sensitivity, r.specificity);
      },
      py::arg("scores"), py::arg("labels"), py::arg("threshold") = kDefaultThreshold);

  m.def("entropy", [](const std::vector<Symbol>& a) { return entropy(a); });
  m.def("mutual_information",
        [](const std::vector<Symbol>& a, const std::vector<Symbol>& b) { return mutual_information(a, b); });
  m.def("conditional_mutual_information",
        [](const std::vector<Symbol>& a, const std::vector<Symbol>& b, const std::vector<Symbol>& z) {
          return conditional_mutual_information(a, b, z);
        });
  m.def(
      "cmi_scores",
      [](const Cohort& c, Index n_bins, bool greedy) {
        CmiConfig cfg;
        cfg.n_bins = n_bins;
        cfg.conditioning = greedy ? Conditioning::GreedySelected : Conditioning::None;
        const CmiScores s = cmi_feature_scores(c, cfg);
        py::dict d;
        d["S"] = to_numpy(s.S);
        d["valid_counts"] = py::cast(s.valid_counts);
        d["present"] = py::cast(s.present);
        return d;
      },
      py::arg("cohort"), py::arg("n_bins") = 8, py::arg("greedy") = false);

  m.def(
      "background_matrix", [](const Cohort& c) { return to_numpy(background_matrix(c).B); }, py::arg("train"));
  m.def(
      "explain_patient",
      [](const TrainedModel& model, const PatientRecord& p, const Array& background, const std::string& mode,
         Index n_samples, std::uint64_t seed, bool all_steps) {
        ExplainerConfig cfg;
        cfg.mode = parse_explain_mode(mode);
        cfg.n_samples = n_samples;
        cfg.seed = seed;
        cfg.all_steps = all_steps;
        return importance_dict(explain_patient(model, p, BackgroundMatrix{from_numpy(background)}, cfg));
      },
      py::arg("model"), py::arg("patient"), py::arg("background"), py::arg("mode") = "cell",
      py::arg("n_samples") = 2048, py::arg("seed") = 1, py::arg("all_steps") = true);

  m.def("run_cli", &run_cli, py::arg("args"), py::call_guard<py::gil_scoped_release>());
}
