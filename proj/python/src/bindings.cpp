//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

// Python bindings. Structured results cross the boundary as JSON text and are
// decoded by the pure-Python wrapper in grappa/__init__.py.

#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"

#include "grappa/antoine.h"
#include "grappa/dataio.h"
#include "grappa/metrics.h"
#include "grappa/model.h"
#include "grappa/molgraph.h"
#include "grappa/train.h"

namespace py = pybind11;

namespace {

using grappa::AntoineParams;
using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array &a) {
  if (a.ndim() != 1)
    throw py::value_error("expected a one-dimensional array");
  return { a.data(), a.data() + a.size() };
}

Array to_array(const grappa::Matrix &m) {
  Array out({ m.rows(), m.cols() });
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

py::tuple params_tuple(const AntoineParams &p) {
  return py::make_tuple(p.A, p.B, p.C);
}

AntoineParams params_from(double a, double b, double c) { return { a, b, c }; }

grappa::TrainingSet training_set(const std::string &data_path,
                                 const std::string &split) {
  grappa::VpDataset ds = grappa::load_dataset(data_path).dataset;
  if (split != "all") {
    const auto s = grappa::parse_split(split);
    if (!s)
      throw py::value_error("split must be train, valid, test or all");
    ds = ds.filter(*s);
  }
  return grappa::TrainingSet::from_dataset(ds);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "grappa native core";

  py::register_exception<grappa::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<grappa::ParseError>(m, "SmilesError", PyExc_ValueError);
  py::register_exception<grappa::CheckpointError>(m, "CheckpointError",
                                                  PyExc_RuntimeError);

  m.def("ln_vapor_pressure",
        [](double a, double b, double c, double t) {
          return grappa::ln_vapor_pressure(params_from(a, b, c), t);
        },
        py::arg("A"), py::arg("B"), py::arg("C"), py::arg("temperature_k"),
        "ln of the vapor pressure in kPa");
  m.def("vapor_pressure_pa",
        [](double a, double b, double c, double t) {
          return grappa::vapor_pressure_pa(params_from(a, b, c), t);
        },
        py::arg("A"), py::arg("B"), py::arg("C"), py::arg("temperature_k"));
  m.def("boiling_temperature",
        [](double a, double b, double c, double p) {
          return grappa::boiling_temperature(params_from(a, b, c), p);
        },
        py::arg("A"), py::arg("B"), py::arg("C"), py::arg("pressure_pa"));

  m.def("robust_antoine_fit",
        [](const Array &t, const Array &p) {
          const std::vector<double> tv = to_vector(t), pv = to_vector(p);
          grappa::RobustFit f;
          {
            py::gil_scoped_release release;
            f = grappa::robust_antoine_fit(tv, pv);
          }
          py::dict out;
          out["params"] = params_tuple(f.params);
          out["cost"] = f.cost;
          out["scale"] = f.scale;
          out["converged"] = f.converged;
          out["residuals"] = f.residuals;
          return out;
        },
        py::arg("temperature_k"), py::arg("pressure_pa"));

  m.def("featurize",
        [](const std::string &smiles) {
          const grappa::MolGraph g = grappa::featurize_smiles(smiles);
          py::dict out;
          out["node_features"] = to_array(g.node_features);
          out["edge_features"] = to_array(g.edge_features);
          out["edges"] = g.edges;
          out["h_donors"] = g.h_donors;
          out["h_acceptors"] = g.h_acceptors;
          out["mol_weight"] = g.mol_weight;
          return out;
        },
        py::arg("smiles"));

  m.def("ape_i", &grappa::ape_i, py::arg("pred_pa"), py::arg("exp_pa"));

  py::class_<grappa::GrappaModel>(m, "Model")
      .def(py::init([](const std::string &arch_json, std::uint64_t seed) {
             const auto arch = grappa::Architecture::from_json(
                 nlohmann::json::parse(arch_json));
             return grappa::GrappaModel(arch, seed);
           }),
           py::arg("arch_json") = "{}", py::arg("seed") = 0)
      .def_static("load", &grappa::GrappaModel::load, py::arg("path"))
      .def("save", &grappa::GrappaModel::save, py::arg("path"))
      .def_property_readonly("num_parameters",
                             &grappa::GrappaModel::num_parameters)
      .def("arch_json",
           [](const grappa::GrappaModel &model) {
             return model.arch().to_json().dump();
           })
      .def("accounting_markdown",
           [](const grappa::GrappaModel &model) {
             return grappa::accounting_markdown(model);
           })
      .def("predict",
           [](const grappa::GrappaModel &model, const std::string &smiles) {
             return params_tuple(grappa::predict(model, smiles).params);
           },
           py::arg("smiles"))
      .def("attention_scores",
           [](const grappa::GrappaModel &model, const std::string &smiles) {
             return model.attention_scores(grappa::featurize_smiles(smiles));
           },
           py::arg("smiles"));

  m.def("train",
        [](grappa::GrappaModel &model, const std::string &data_path,
           const std::string &config_json) {
          const auto cfg = grappa::TrainConfig::from_json(
              nlohmann::json::parse(config_json));
          const auto tset = training_set(data_path, "train");
          const auto vset = training_set(data_path, "valid");
          grappa::FitResult r;
          {
            py::gil_scoped_release release;
            r = grappa::fit(model, tset, vset, cfg);
          }
          return grappa::history_csv(r.history);
        },
        py::arg("model"), py::arg("data_path"), py::arg("config_json") = "{}",
        "Fits the model in place and returns the history as CSV text");

  m.def("evaluate",
        [](const grappa::GrappaModel &model, const std::string &data_path,
           const std::string &split) {
          const auto set = training_set(data_path, split);
          const auto points = grappa::evaluate_points(model, set);
          return grappa::to_json(grappa::summarize(points)).dump();
        },
        py::arg("model"), py::arg("data_path"), py::arg("split") = "test");
}
