// Python bindings for the core operations: data synthesis, the fusion
// layer, ratio-based feature mixing, two-stage training, evaluation, and
// the analysis oracles.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pih2t/analysis.hpp"
#include "pih2t/checkpoint.hpp"
#include "pih2t/commands.hpp"
#include "pih2t/h2tf.hpp"
#include "pih2t/pif.hpp"
#include "pih2t/trainer.hpp"

namespace py = pybind11;
using namespace pih2t;

namespace {

FeatureMap map_from_array(const py::array_t<double, py::array::c_style |
                                                        py::array::forcecast>& arr) {
  if (arr.ndim() != 3)
    throw std::invalid_argument("feature map must have shape (h, w, c)");
  FeatureMap m(static_cast<std::size_t>(arr.shape(0)),
               static_cast<std::size_t>(arr.shape(1)),
               static_cast<std::size_t>(arr.shape(2)));
  std::copy(arr.data(), arr.data() + arr.size(), m.data.begin());
  return m;
}

py::array_t<double> map_to_array(const FeatureMap& m) {
  py::array_t<double> arr({m.height, m.width, m.channels});
  std::copy(m.data.begin(), m.data.end(), arr.mutable_data());
  return arr;
}

ClassProfile profile_from_counts(const std::vector<std::size_t>& counts) {
  ClassProfile p;
  p.counts = counts;
  return p;
}

Matrix matrix_from_array(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  Matrix m(static_cast<std::size_t>(arr.shape(0)),
           static_cast<std::size_t>(arr.shape(1)));
  std::copy(arr.data(), arr.data() + arr.size(), m.data.begin());
  return m;
}

py::dict metrics_dict(const MetricsReport& m) {
  py::dict d;
  d["overall"] = m.overall;
  d["head"] = m.head ? py::object(py::float_(*m.head)) : py::none();
  d["medium"] = m.medium ? py::object(py::float_(*m.medium)) : py::none();
  d["tail"] = m.tail ? py::object(py::float_(*m.tail)) : py::none();
  return d;
}

py::dict row_dict(const EpochRow& r) {
  py::dict d;
  d["stage"] = r.stage;
  d["epoch"] = r.epoch;
  d["loss"] = r.loss;
  d["train_acc"] = r.train_acc;
  d["test"] = metrics_dict(r.test);
  d["mean_r"] = r.mean_r ? py::object(py::float_(*r.mean_r)) : py::none();
  d["head_fusing_frac"] = r.head_fusing_frac
                              ? py::object(py::float_(*r.head_fusing_frac))
                              : py::none();
  return d;
}

TrainConfig config_from_kwargs(
    const std::string& mode, std::uint64_t seed, std::size_t stage1_epochs,
    std::size_t stage2_epochs, std::size_t batch_size, double lr,
    double momentum, const std::vector<std::size_t>& decay_epochs,
    double decay_factor, double stage2_lr, bool stage2_reset_classifier,
    bool stage2_freeze_ratio_weights, bool stage2_force_unit_ratio,
    std::size_t head_min, std::size_t tail_max) {
  TrainConfig c;
  c.mode = parse_mode(mode);
  c.seed = seed;
  c.stage1_epochs = stage1_epochs;
  c.stage2_epochs = stage2_epochs;
  c.batch_size = batch_size;
  c.lr = lr;
  c.momentum = momentum;
  c.decay_epochs = decay_epochs;
  c.decay_factor = decay_factor;
  c.stage2_lr = stage2_lr;
  c.stage2_reset_classifier = stage2_reset_classifier;
  c.stage2_freeze_ratio_weights = stage2_freeze_ratio_weights;
  c.stage2_force_unit_ratio = stage2_force_unit_ratio;
  c.partition.head_min = head_min;
  c.partition.tail_max = tail_max;
  return c;
}

}  // namespace

PYBIND11_MODULE(_pih2t, m) {
  m.doc() = "long-tailed classification with permutation-invariant feature "
            "fusion and head-to-tail classifier calibration";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  // ---- profiles and partitions ----
  m.def("exponential_profile",
        [](std::size_t base, std::size_t classes, double imbalance) {
          return exponential_profile(base, classes, imbalance).counts;
        },
        py::arg("base_count"), py::arg("class_count"), py::arg("imbalance"));
  m.def("pareto_profile",
        [](std::size_t base, std::size_t tail, std::size_t classes,
           double alpha) {
          return pareto_profile(base, tail, classes, alpha).counts;
        },
        py::arg("max_count"), py::arg("min_count"), py::arg("class_count"),
        py::arg("alpha"));
  m.def("partition_classes",
        [](const std::vector<std::size_t>& counts, std::size_t head_min,
           std::size_t tail_max) {
          PartitionSpec spec{head_min, tail_max};
          Partition p = partition_classes(profile_from_counts(counts), spec);
          py::dict d;
          d["head"] = p.head;
          d["medium"] = p.medium;
          d["tail"] = p.tail;
          return d;
        },
        py::arg("counts"), py::arg("head_min") = 100,
        py::arg("tail_max") = 20);

  // ---- datasets ----
  py::class_<LabeledDataset>(m, "Dataset")
      .def_property_readonly("dim",
                             [](const LabeledDataset& d) { return d.dim; })
      .def_property_readonly(
          "class_count", [](const LabeledDataset& d) { return d.class_count; })
      .def("__len__", [](const LabeledDataset& d) { return d.size(); })
      .def_property_readonly("inputs",
                             [](const LabeledDataset& d) {
                               py::array_t<float> arr(
                                   {d.size(), d.dim});
                               std::copy(d.inputs.begin(), d.inputs.end(),
                                         arr.mutable_data());
                               return arr;
                             })
      .def_property_readonly("labels",
                             [](const LabeledDataset& d) {
                               py::array_t<std::int32_t> arr(
                                   static_cast<py::ssize_t>(d.size()));
                               std::copy(d.labels.begin(), d.labels.end(),
                                         arr.mutable_data());
                               return arr;
                             })
      .def_property_readonly("counts", [](const LabeledDataset& d) {
        return d.profile().counts;
      });

  m.def("synth_gaussian_longtail",
        [](const std::vector<std::size_t>& counts, std::size_t dim,
           double mean_separation, double noise_scale, std::uint64_t seed,
           std::uint64_t noise_stream) {
          SynthParams p{dim, mean_separation, noise_scale};
          return synth_gaussian_longtail(profile_from_counts(counts), p, seed,
                                         noise_stream);
        },
        py::arg("counts"), py::arg("dim"), py::arg("mean_separation"),
        py::arg("noise_scale"), py::arg("seed"), py::arg("noise_stream") = 0);
  m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("dir"));
  m.def("load_dataset", &load_dataset, py::arg("dir"));

  // ---- fusion layer ----
  m.def("pi_mean",
        [](const py::array_t<double, py::array::c_style |
                                         py::array::forcecast>& arr) {
          FeatureMap pi = pi_mean(map_from_array(arr));
          py::array_t<double> out({pi.height, pi.width});
          std::copy(pi.data.begin(), pi.data.end(), out.mutable_data());
          return out;
        },
        py::arg("feature_map"));
  m.def("pif_fuse",
        [](const py::array_t<double, py::array::c_style |
                                         py::array::forcecast>& arr,
           const std::vector<double>& a, const std::vector<double>& b) {
          PifParams p{a, b};
          return map_to_array(pif_fuse(map_from_array(arr), p));
        },
        py::arg("feature_map"), py::arg("a"), py::arg("b"));
  m.def("init_pif_params",
        [](std::size_t d) {
          PifParams p = init_pif_params(d);
          return py::make_tuple(p.a, p.b);
        },
        py::arg("channel_dim"));
  m.def("pooled_representation",
        [](const py::array_t<double, py::array::c_style |
                                         py::array::forcecast>& arr) {
          return pooled_representation(map_from_array(arr));
        },
        py::arg("feature_map"));

  // ---- ratio fusion ----
  m.def("cosine_distance", &cosine_distance, py::arg("f"), py::arg("w"));
  m.def("fusion_ratios",
        [](const std::vector<std::vector<double>>& feats,
           const std::vector<std::int32_t>& labels,
           const py::array_t<double, py::array::c_style |
                                         py::array::forcecast>& classifier) {
          return fusion_ratios(feats, labels, matrix_from_array(classifier));
        },
        py::arg("features"), py::arg("labels"), py::arg("classifier"));
  m.def("h2tf_fuse", &h2tf_fuse, py::arg("f_target"), py::arg("f_fusing"),
        py::arg("r"));
  m.def("couple_branches",
        [](const std::vector<std::vector<double>>& fb,
           const std::vector<std::int32_t>& lb,
           const std::vector<std::vector<double>>& fi,
           const py::array_t<double, py::array::c_style |
                                         py::array::forcecast>& classifier) {
          FusedBatch out =
              couple_branches(fb, lb, fi, matrix_from_array(classifier));
          py::dict d;
          d["ratios"] = out.ratios;
          d["fused"] = out.fused;
          d["labels"] = out.labels;
          return d;
        },
        py::arg("balanced_features"), py::arg("balanced_labels"),
        py::arg("instance_features"), py::arg("classifier"));

  // ---- models, training, evaluation ----
  py::class_<Model>(m, "Model")
      .def_property_readonly("class_count", &Model::class_count)
      .def_property_readonly("feature_dim", &Model::feature_dim)
      .def_property_readonly("uses_fusion_layer",
                             [](const Model& m_) { return m_.use_pif; })
      .def("predict",
           [](const Model& model, const LabeledDataset& data) {
             std::vector<std::int32_t> p = model.predict(data);
             py::array_t<std::int32_t> arr(
                 static_cast<py::ssize_t>(p.size()));
             std::copy(p.begin(), p.end(), arr.mutable_data());
             return arr;
           },
           py::arg("dataset"))
      .def("pooled_features", [](const Model& model,
                                 const LabeledDataset& data) {
        py::array_t<double> arr({data.size(), model.feature_dim()});
        for (std::size_t i = 0; i < data.size(); ++i) {
          std::vector<double> f = model.pooled_feature(data.input(i));
          std::copy(f.begin(), f.end(),
                    arr.mutable_data() + i * model.feature_dim());
        }
        return arr;
      });

  py::class_<TrainOutput>(m, "TrainOutput")
      .def_property_readonly("stage1",
                             [](const TrainOutput& t) { return t.after_stage1; })
      .def_property_readonly("final",
                             [](const TrainOutput& t) { return t.final_model; })
      .def_property_readonly("rows", [](const TrainOutput& t) {
        py::list out;
        for (const EpochRow& r : t.rows) out.append(row_dict(r));
        return out;
      });

  m.def(
      "run_training",
      [](const LabeledDataset& train, const LabeledDataset& test,
         const std::vector<std::size_t>& counts, const std::string& mode,
         std::uint64_t seed, std::size_t stage1_epochs,
         std::size_t stage2_epochs, std::size_t batch_size, double lr,
         double momentum, const std::vector<std::size_t>& decay_epochs,
         double decay_factor, double stage2_lr, bool stage2_reset_classifier,
         bool stage2_freeze_ratio_weights, bool stage2_force_unit_ratio,
         std::size_t head_min, std::size_t tail_max,
         const std::vector<std::size_t>& hidden, std::size_t feature_dim) {
        TrainConfig cfg = config_from_kwargs(
            mode, seed, stage1_epochs, stage2_epochs, batch_size, lr,
            momentum, decay_epochs, decay_factor, stage2_lr,
            stage2_reset_classifier, stage2_freeze_ratio_weights,
            stage2_force_unit_ratio, head_min, tail_max);
        BackboneSpec spec;
        spec.kind = BackboneSpec::Kind::mlp;
        spec.input_dim = train.dim;
        spec.hidden = hidden;
        spec.feature_dim = feature_dim;
        return run_training(train, test, profile_from_counts(counts), spec,
                            cfg);
      },
      py::arg("train"), py::arg("test"), py::arg("counts"),
      py::arg("mode") = "pi_h2t", py::arg("seed") = 0,
      py::arg("stage1_epochs") = 30, py::arg("stage2_epochs") = 10,
      py::arg("batch_size") = 128, py::arg("lr") = 0.1,
      py::arg("momentum") = 0.9,
      py::arg("decay_epochs") = std::vector<std::size_t>{},
      py::arg("decay_factor") = 0.1, py::arg("stage2_lr") = -1.0,
      py::arg("stage2_reset_classifier") = false,
      py::arg("stage2_freeze_ratio_weights") = false,
      py::arg("stage2_force_unit_ratio") = false, py::arg("head_min") = 100,
      py::arg("tail_max") = 20,
      py::arg("hidden") = std::vector<std::size_t>{64},
      py::arg("feature_dim") = 32);

  m.def("evaluate",
        [](const Model& model, const LabeledDataset& data,
           const std::vector<std::size_t>& counts, std::size_t head_min,
           std::size_t tail_max) {
          PartitionSpec spec{head_min, tail_max};
          Partition part =
              partition_classes(profile_from_counts(counts), spec);
          EvalResult r = evaluate(model, data, part);
          py::dict d = metrics_dict(r.metrics);
          d["confusion"] = r.confusion;
          return d;
        },
        py::arg("model"), py::arg("dataset"), py::arg("counts"),
        py::arg("head_min") = 100, py::arg("tail_max") = 20);

  m.def("save_checkpoint",
        [](const Model& model, const std::filesystem::path& path,
           std::uint64_t config_hash, std::uint64_t seed, std::uint32_t stage,
           std::uint32_t epoch, const std::string& mode) {
          CheckpointMeta meta;
          meta.config_hash = config_hash;
          meta.seed = seed;
          meta.stage = stage;
          meta.epoch = epoch;
          meta.mode = parse_mode(mode);
          meta.rng_state = Rng(seed).state_string();
          save_checkpoint(model, meta, path);
        },
        py::arg("model"), py::arg("path"), py::arg("config_hash") = 0,
        py::arg("seed") = 0, py::arg("stage") = 1, py::arg("epoch") = 0,
        py::arg("mode") = "pi_h2t");
  m.def("load_checkpoint",
        [](const std::filesystem::path& path) {
          LoadedCheckpoint ck = load_checkpoint(path);
          py::dict meta;
          meta["config_hash"] = ck.meta.config_hash;
          meta["seed"] = ck.meta.seed;
          meta["stage"] = ck.meta.stage;
          meta["epoch"] = ck.meta.epoch;
          meta["mode"] = mode_name(ck.meta.mode);
          return py::make_tuple(ck.model, meta);
        },
        py::arg("path"));

  // ---- analysis ----
  m.def("margin_audit",
        [](const Model& model, const LabeledDataset& data) {
          MarginAudit a = margin_audit(model, data);
          py::dict d;
          d["fraction_positive"] = a.fraction_positive;
          d["class_pi_mean"] = a.class_pi_mean;
          py::list rows;
          for (const MarginAuditRow& r : a.rows)
            rows.append(py::make_tuple(r.target, r.rival, r.margin));
          d["rows"] = rows;
          return d;
        },
        py::arg("model"), py::arg("dataset"));
  m.def("force_oracle_correct",
        [](std::size_t trials, std::size_t dim, std::uint64_t seed,
           std::size_t threads) {
          OracleReport r = force_oracle_correct(trials, dim, seed, threads);
          py::dict d;
          d["attempts"] = r.attempts;
          d["kept"] = r.kept;
          d["violations"] = r.violations;
          d["max_slack"] = r.max_slack;
          d["angle_mismatches"] = r.angle_mismatches;
          return d;
        },
        py::arg("trials") = 10000, py::arg("dim") = 8, py::arg("seed") = 0,
        py::arg("threads") = 1);
  m.def("force_oracle_wrong",
        [](std::size_t trials, std::size_t dim, std::uint64_t seed,
           std::size_t threads) {
          OracleReport r = force_oracle_wrong(trials, dim, seed, threads);
          py::dict d;
          d["attempts"] = r.attempts;
          d["kept"] = r.kept;
          d["violations"] = r.violations;
          d["max_slack"] = r.max_slack;
          d["angle_mismatches"] = r.angle_mismatches;
          return d;
        },
        py::arg("trials") = 10000, py::arg("dim") = 8, py::arg("seed") = 0,
        py::arg("threads") = 1);
  m.def("tail_to_head_count",
        [](const Model& model, const LabeledDataset& data,
           const std::vector<std::size_t>& counts, std::size_t head_min,
           std::size_t tail_max) {
          PartitionSpec spec{head_min, tail_max};
          Partition part =
              partition_classes(profile_from_counts(counts), spec);
          return tail_to_head_errors(model.predict(data), data.labels, part);
        },
        py::arg("model"), py::arg("dataset"), py::arg("counts"),
        py::arg("head_min") = 100, py::arg("tail_max") = 20);
  m.def("fit_pca2d",
        [](const std::vector<std::vector<double>>& rows) {
          Pca2d p = fit_pca2d(rows);
          py::dict d;
          d["mean"] = p.mean;
          d["axis1"] = p.axis1;
          d["axis2"] = p.axis2;
          d["eig1"] = p.eig1;
          d["eig2"] = p.eig2;
          return d;
        },
        py::arg("rows"));
}
