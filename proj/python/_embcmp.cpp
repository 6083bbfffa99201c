#include "embcmp/embedding.hpp"
#include "embcmp/error.hpp"
#include "embcmp/generators.hpp"
#include "embcmp/graph.hpp"
#include "embcmp/metrics.hpp"
#include "embcmp/ranking.hpp"
#include "embcmp/tsne.hpp"
#include "embcmp/workbench/params.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

namespace py = pybind11;
using namespace embcmp;
using workbench::json;

namespace {

// Parameters cross the boundary as JSON text so Python and the service share one schema.
json parse_params(const std::string& text) {
    if (text.empty()) return json::object();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidArgument(std::string("params: ") + e.what());
    }
}

template <typename T>
py::array_t<T> to_numpy(const DenseMatrix<T>& m) {
    py::array_t<T> out({m.rows(), m.cols()});
    if (!m.empty()) std::memcpy(out.mutable_data(), m.data().data(), m.data().size() * sizeof(T));
    return out;
}

Matrix from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw InvalidArgument("expected a 2-d array");
    const auto rows = static_cast<std::size_t>(a.shape(0));
    const auto cols = static_cast<std::size_t>(a.shape(1));
    return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

} // namespace

PYBIND11_MODULE(_embcmp, m) {
    m.doc() = "Network embedding comparison core";

    static py::exception<DataError> data_error(m, "DataError", PyExc_RuntimeError);
    static py::exception<ComputeError> compute_error(m, "ComputeError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const InvalidArgument& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const DataError& e) {
            data_error(e.what());
        } catch (const ComputeError& e) {
            compute_error(e.what());
        }
    });

    py::class_<Graph>(m, "Graph")
        .def(py::init([](std::vector<std::string> labels, const std::vector<std::pair<NodeId, NodeId>>& edges) {
                 std::vector<Edge> e(edges.begin(), edges.end());
                 for (const auto& [u, v] : e) {
                     if (u >= labels.size() || v >= labels.size()) throw InvalidArgument("edge endpoint out of range");
                 }
                 return Graph::from_edges(std::move(labels), e);
             }),
             py::arg("labels"), py::arg("edges"))
        .def_property_readonly("node_count", &Graph::node_count)
        .def_property_readonly("edge_count", &Graph::edge_count)
        .def_property_readonly("labels", &Graph::labels)
        .def("edges", [](const Graph& g) {
            std::vector<std::pair<NodeId, NodeId>> out;
            for (const auto& [u, v] : g.edges()) out.emplace_back(u, v);
            return out;
        })
        .def("degree", &Graph::degree)
        .def("index_of", &Graph::index_of)
        .def("is_connected", &Graph::is_connected)
        .def("fingerprint", &Graph::fingerprint)
        .def("__repr__", [](const Graph& g) {
            return "<Graph nodes=" + std::to_string(g.node_count()) + " edges=" + std::to_string(g.edge_count()) + ">";
        });

    m.def("load_edge_list", [](const std::string& path) { return load_edge_list(path); }, py::arg("path"));
    m.def("largest_component", [](const Graph& g) { return largest_component(g).graph; });
    m.def(
        "generate", [](const std::string& spec) { return generate(workbench::synthetic_from_json(parse_params(spec))); },
        py::arg("spec_json"));

    m.def("metric_keys", [] {
        std::vector<std::string> out;
        for (Metric k : kAllMetrics) out.emplace_back(metric_key(k));
        return out;
    });
    m.def(
        "communities", [](const Graph& g, std::uint64_t seed) { return detect_communities(g, seed).community_of; },
        py::arg("graph"), py::arg("seed") = 1);
    m.def(
        "node_metrics",
        [](const Graph& g, std::uint64_t seed, bool normalized) {
            const MetricsTable t = compute_metrics(g, detect_communities(g, seed));
            if (normalized) return to_numpy(normalize_metrics(t));
            Matrix raw(g.node_count(), kMetricCount);
            for (Metric k : kAllMetrics) {
                for (NodeId u = 0; u < g.node_count(); ++u) raw(u, index(k)) = t(u, k);
            }
            return to_numpy(raw);
        },
        py::arg("graph"), py::arg("seed") = 1, py::arg("normalized") = false);

    m.def(
        "space_id",
        [](const std::string& model, const std::string& params) {
            return space_id(workbench::embed_request_from_json(model, parse_params(params)));
        },
        py::arg("model"), py::arg("params_json") = "");
    m.def(
        "embed",
        [](const Graph& g, const std::string& model, const std::string& params) {
            const auto request = workbench::embed_request_from_json(model, parse_params(params));
            EmbeddingMatrix e;
            {
                py::gil_scoped_release release;
                e = embed(g, request);
            }
            return to_numpy(e.vectors);
        },
        py::arg("graph"), py::arg("model"), py::arg("params_json") = "");

    m.def(
        "tsne",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x, const std::string& params) {
            const TsneConfig cfg = workbench::project_params_from_json(parse_params(params)).tsne;
            const Matrix input = from_numpy(x);
            Projection2D out;
            {
                py::gil_scoped_release release;
                out = tsne(input, cfg);
            }
            py::dict d;
            d["coords"] = to_numpy(out.coords);
            d["iteration"] = out.iteration;
            d["kl"] = out.kl;
            return d;
        },
        py::arg("x"), py::arg("params_json") = "");
    m.def(
        "trustworthiness",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& y,
           std::size_t k) { return trustworthiness(from_numpy(x), from_numpy(y), k); },
        py::arg("x"), py::arg("y"), py::arg("k"));
    m.def(
        "ndcg",
        [](const std::vector<NodeId>& presented, const std::vector<NodeId>& ideal, std::size_t k) {
            return ndcg(std::span<const NodeId>(presented), std::span<const NodeId>(ideal), k);
        },
        py::arg("presented"), py::arg("ideal"), py::arg("k"));
}
