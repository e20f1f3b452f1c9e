#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <cstring>
#include <sstream>

#include "a2x/assignment.hpp"
#include "a2x/cli.hpp"
#include "a2x/dataio.hpp"
#include "a2x/error.hpp"
#include "a2x/features.hpp"
#include "a2x/grouping.hpp"
#include "a2x/mapping.hpp"
#include "a2x/poison.hpp"
#include "a2x/synth.hpp"
#include "a2x/triggers.hpp"

namespace py = pybind11;
using namespace a2x;

namespace {

using U8 = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using U32 = py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>;
using F32 = py::array_t<float, py::array::c_style | py::array::forcecast>;
using F64 = py::array_t<double, py::array::c_style | py::array::forcecast>;

Norm norm_arg(const std::string& name) {
  auto n = parse_norm(name);
  if (!n) throw py::value_error("norm must be one of l1, l2, linf");
  return *n;
}

template <typename T>
std::vector<T> flat(const py::array_t<T, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

py::array_t<double> matrix(std::size_t rows, std::size_t cols, const std::vector<double>& v) {
  py::array_t<double> out({rows, cols});
  std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
  return out;
}

TensorDataset to_dataset(const U32& labels, const U8& pixels, std::uint32_t num_classes) {
  if (pixels.ndim() != 4) throw py::value_error("pixels must have shape (n, C, H, W)");
  TensorDataset ds;
  ds.n = static_cast<std::uint64_t>(pixels.shape(0));
  ds.channels = static_cast<std::uint16_t>(pixels.shape(1));
  ds.height = static_cast<std::uint16_t>(pixels.shape(2));
  ds.width = static_cast<std::uint16_t>(pixels.shape(3));
  ds.num_classes = num_classes;
  ds.labels = flat(labels);
  ds.pixels = flat(pixels);
  ds.validate();
  return ds;
}

py::tuple from_dataset(const TensorDataset& ds) {
  U32 labels(std::vector<py::ssize_t>{static_cast<py::ssize_t>(ds.n)});
  std::memcpy(labels.mutable_data(), ds.labels.data(), ds.labels.size() * sizeof(ClassId));
  U8 pixels({static_cast<py::ssize_t>(ds.n), py::ssize_t{ds.channels},
             py::ssize_t{ds.height}, py::ssize_t{ds.width}});
  std::memcpy(pixels.mutable_data(), ds.pixels.data(), ds.pixels.size());
  return py::make_tuple(labels, pixels, ds.num_classes);
}

EmbeddingSet to_embeddings(const U32& labels, const F32& values, std::uint32_t num_classes) {
  if (values.ndim() != 2) throw py::value_error("values must have shape (n, dim)");
  EmbeddingSet es;
  es.n = static_cast<std::uint64_t>(values.shape(0));
  es.dim = static_cast<std::uint32_t>(values.shape(1));
  es.num_classes = num_classes;
  es.labels = flat(labels);
  es.values = flat(values);
  es.validate();
  return es;
}

py::tuple from_embeddings(const EmbeddingSet& es) {
  U32 labels(std::vector<py::ssize_t>{static_cast<py::ssize_t>(es.n)});
  std::memcpy(labels.mutable_data(), es.labels.data(), es.labels.size() * sizeof(ClassId));
  F32 values({static_cast<py::ssize_t>(es.n), static_cast<py::ssize_t>(es.dim)});
  std::memcpy(values.mutable_data(), es.values.data(), es.values.size() * sizeof(float));
  return py::make_tuple(labels, values, es.num_classes);
}

PositionMatrix to_positions(const F64& p) {
  if (p.ndim() != 2) throw py::value_error("positions must have shape (K, dim)");
  return {static_cast<std::uint32_t>(p.shape(0)), static_cast<std::uint32_t>(p.shape(1)),
          flat(p)};
}

DistanceMatrix to_distances(const F64& d) {
  if (d.ndim() != 2 || d.shape(0) != d.shape(1)) {
    throw py::value_error("distances must be a square matrix");
  }
  return DistanceMatrix::from_values(static_cast<std::uint32_t>(d.shape(0)), flat(d));
}

GroupDistanceMatrix to_weights(const F64& w) {
  if (w.ndim() != 2) throw py::value_error("weights must have shape (x, K)");
  return GroupDistanceMatrix::from_values(static_cast<std::uint32_t>(w.shape(0)),
                                          static_cast<std::uint32_t>(w.shape(1)), flat(w));
}

py::dict score_dict(const MappingScore& s) {
  py::dict d;
  d["objective"] = s.objective;
  d["silhouette_mean"] = s.silhouette_mean ? py::cast(*s.silhouette_mean) : py::none();
  d["self_target_count"] = s.self_target_count;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the a2x class-mapping toolkit";

  py::register_exception<Error>(m, "A2XError", PyExc_ValueError);

  py::class_<Mapping>(m, "Mapping")
      .def_static("from_groups", &Mapping::from_groups, py::arg("num_classes"),
                  py::arg("groups"), py::arg("targets"))
      .def_static("from_table", &Mapping::from_table, py::arg("table"))
      .def_static("from_json", &mapping_from_json, py::arg("text"))
      .def_readonly("num_classes", &Mapping::num_classes)
      .def_readonly("x", &Mapping::x)
      .def_readonly("groups", &Mapping::groups)
      .def_readonly("targets", &Mapping::targets)
      .def_readonly("table", &Mapping::table)
      .def("to_json", &mapping_to_json)
      .def("__eq__", [](const Mapping& a, const Mapping& b) { return a == b; })
      .def("__repr__", [](const Mapping& mp) { return "Mapping(" + mapping_to_compact_json(mp) + ")"; });

  // Files
  m.def("load_dataset", [](const std::string& p) { return from_dataset(load_dataset(p)); },
        "Returns (labels, pixels[n, C, H, W], num_classes).");
  m.def("save_dataset",
        [](const std::string& p, const U32& labels, const U8& pixels, std::uint32_t k) {
          save_dataset(to_dataset(labels, pixels, k), p);
        },
        py::arg("path"), py::arg("labels"), py::arg("pixels"), py::arg("num_classes"));
  m.def("load_embeddings", [](const std::string& p) { return from_embeddings(load_embeddings(p)); },
        "Returns (labels, values[n, dim], num_classes).");
  m.def("save_embeddings",
        [](const std::string& p, const U32& labels, const F32& values, std::uint32_t k) {
          save_embeddings(to_embeddings(labels, values, k), p);
        },
        py::arg("path"), py::arg("labels"), py::arg("values"), py::arg("num_classes"));
  m.def("load_mapping", [](const std::string& p) { return load_mapping(p); });
  m.def("save_mapping", [](const Mapping& mp, const std::string& p) { save_mapping(mp, p); });

  // Features and grouping
  m.def("position_vectors",
        [](const U32& labels, const F32& values, std::uint32_t k) {
          const auto p = position_vectors(to_embeddings(labels, values, k));
          return matrix(p.num_classes, p.dim, p.values);
        },
        py::arg("labels"), py::arg("values"), py::arg("num_classes"));
  m.def("distance_matrix",
        [](const F64& p, const std::string& norm) {
          const auto d = distance_matrix(to_positions(p), norm_arg(norm));
          return matrix(d.num_classes, d.num_classes, d.values);
        },
        py::arg("positions"), py::arg("norm") = "l2");
  m.def("kmeans",
        [](const F64& p, std::uint32_t x, std::uint64_t seed) {
          return kmeans(to_positions(p), {.x = x, .seed = seed}).assign;
        },
        py::arg("positions"), py::arg("x"), py::arg("seed") = 0,
        "Canonical class -> group labels.");
  m.def("silhouette",
        [](const std::vector<std::uint32_t>& assign, const F64& d) {
          std::uint32_t x = 0;
          for (auto a : assign) x = std::max(x, a + 1);
          const auto r = silhouette(Grouping::from_assign(x, assign), to_distances(d));
          return py::make_tuple(r.per_class, r.mean);
        },
        py::arg("assign"), py::arg("distances"));

  // Assignment
  m.def("hungarian_max",
        [](const F64& w) { return hungarian_max(to_weights(w)).targets; }, py::arg("weights"));
  m.def("brute_force_assign",
        [](const F64& w) { return brute_force_assign(to_weights(w)).targets; },
        py::arg("weights"));

  // Mappings
  m.def("plan_mapping",
        [](const F64& p, std::uint32_t x, const std::string& norm, std::uint64_t seed,
           bool forbid_self_target) {
          PlanConfig cfg;
          cfg.x = x;
          cfg.norm = norm_arg(norm);
          cfg.seed = seed;
          cfg.forbid_self_target = forbid_self_target;
          const auto plan = plan_mapping(to_positions(p), cfg);
          return py::make_tuple(plan.mapping, score_dict(plan.score));
        },
        py::arg("positions"), py::arg("x"), py::arg("norm") = "l2", py::arg("seed") = 0,
        py::arg("forbid_self_target") = false);
  m.def("cyclic_mapping", &cyclic_mapping, py::arg("num_classes"));
  m.def("random_mapping", &random_mapping, py::arg("num_classes"), py::arg("x"),
        py::arg("seed") = 0);
  m.def("score_mapping",
        [](const Mapping& mp, const F64& d) { return score_dict(score_mapping(mp, to_distances(d))); },
        py::arg("mapping"), py::arg("distances"));
  m.def("validate_mapping",
        [](const Mapping& mp) {
          std::vector<std::pair<std::string, std::string>> out;
          for (const auto& f : validate_mapping(mp)) {
            out.emplace_back(f.severity == Finding::Severity::kError ? "error" : "warning",
                             f.message);
          }
          return out;
        },
        py::arg("mapping"));
  m.def("pearson",
        [](const F64& xs, const F64& ys) { return pearson(flat(xs), flat(ys)); });

  // Triggers and poisoning
  m.def("apply_trigger",
        [](const U8& images, const std::string& trigger_json) {
          if (images.ndim() != 4) throw py::value_error("images must have shape (n, C, H, W)");
          const ImageShape shape{static_cast<std::uint32_t>(images.shape(1)),
                                 static_cast<std::uint32_t>(images.shape(2)),
                                 static_cast<std::uint32_t>(images.shape(3))};
          const auto rt = render(trigger_from_json(trigger_json), shape);
          U8 out({images.shape(0), images.shape(1), images.shape(2), images.shape(3)});
          std::memcpy(out.mutable_data(), images.data(), images.size());
          for (py::ssize_t i = 0; i < images.shape(0); ++i) {
            apply_inplace({out.mutable_data() + i * shape.size(), shape.size()}, rt);
          }
          return out;
        },
        py::arg("images"), py::arg("trigger_json"));
  m.def("trigger_preset",
        [](const std::string& name, std::uint64_t seed) {
          return trigger_to_json(trigger_preset(name, seed));
        },
        py::arg("name"), py::arg("seed") = 0, "Preset trigger as a JSON document.");
  m.def("poison",
        [](const U32& labels, const U8& pixels, std::uint32_t k, const Mapping& mp,
           const std::string& trigger_json, double rate, std::uint64_t seed) {
          const auto r = poison_dataset(to_dataset(labels, pixels, k),
                                        {rate, seed, mp, trigger_from_json(trigger_json)});
          auto ds = from_dataset(r.dataset);
          return py::make_tuple(ds[0], ds[1], manifest_to_json(r.manifest));
        },
        py::arg("labels"), py::arg("pixels"), py::arg("num_classes"), py::arg("mapping"),
        py::arg("trigger_json"), py::arg("rate"), py::arg("seed") = 0,
        "Returns (labels, pixels, manifest_json).");

  m.def("synthesize",
        [](std::uint32_t k, std::uint32_t x_planted, std::uint32_t dim, std::uint32_t per_class,
           double spread, double separation, std::uint64_t seed) {
          const auto fx = synthesize({k, x_planted, dim, per_class, spread, separation, seed});
          auto es = from_embeddings(fx.embeddings);
          return py::make_tuple(es[0], es[1], fx.planted.assign);
        },
        py::arg("k") = 10, py::arg("x_planted") = 3, py::arg("dim") = 16,
        py::arg("per_class") = 50, py::arg("spread") = 1.0, py::arg("separation") = 20.0,
        py::arg("seed") = 0, "Returns (labels, values, planted class -> group labels).");

  m.def("run_cli",
        [](std::vector<std::string> args) {
          args.insert(args.begin(), "a2x");
          std::ostringstream out, err;
          const int code = run_cli(args, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line in-process; returns (code, stdout, stderr).");
}
