#include "crlm/clustering.hpp"
#include "crlm/datagen.hpp"
#include "crlm/estimation.hpp"
#include "crlm/eval.hpp"
#include "crlm/experiments.hpp"
#include "crlm/theory.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace crlm;

namespace {

DataMatrix to_data(const Matrix& x, const std::optional<Labels>& labels) {
  return labels ? DataMatrix(x, *labels) : DataMatrix(x);
}

py::dict bound_dict(const ProbabilityBound& b) {
  py::dict d;
  d["value"] = b.value;
  d["raw"] = b.raw;
  d["clamped"] = b.clamped;
  d["condition_violated"] = b.condition_violated;
  d["log_terms"] = b.log_terms;
  return d;
}

}  // namespace

PYBIND11_MODULE(_crlm, m) {
  m.doc() = "Clustering by robust loss minimisation";

  py::class_<LossConfig>(m, "LossConfig")
      .def(py::init([](double g, double sigma_max) {
             LossConfig c{g, sigma_max};
             c.validate();
             return c;
           }),
           py::arg("g") = 4.0, py::arg("sigma_max") = 1.0)
      .def_readwrite("g", &LossConfig::g)
      .def_readwrite("sigma_max", &LossConfig::sigma_max)
      .def("radius", &LossConfig::radius, py::arg("d"));

  py::class_<GmmubSpec>(m, "GmmubSpec")
      .def(py::init<>())
      .def_readwrite("k", &GmmubSpec::k)
      .def_readwrite("d", &GmmubSpec::d)
      .def_readwrite("ball_scale", &GmmubSpec::ball_scale)
      .def_readwrite("weights", &GmmubSpec::weights)
      .def_readwrite("means", &GmmubSpec::means)
      .def_readwrite("sigmas", &GmmubSpec::sigmas)
      .def("validate", &GmmubSpec::validate);

  py::class_<ClusterEstimate>(m, "ClusterEstimate")
      .def_readonly("center", &ClusterEstimate::center)
      .def_readonly("sigma_hat", &ClusterEstimate::sigma_hat)
      .def_readonly("members", &ClusterEstimate::members);

  py::class_<ClusteringResult>(m, "ClusteringResult")
      .def_readonly("clusters", &ClusteringResult::clusters)
      .def_readonly("assignment", &ClusteringResult::assignment)
      .def_readonly("stopped_early", &ClusteringResult::stopped_early);

  py::class_<SigmaEstimate>(m, "SigmaEstimate")
      .def_readonly("peaks", &SigmaEstimate::peaks)
      .def_property_readonly("bin_centers", [](const SigmaEstimate& e) { return e.histogram.bin_centers; })
      .def_property_readonly("counts", [](const SigmaEstimate& e) { return e.histogram.counts; })
      .def_readonly("pairs_used", &SigmaEstimate::pairs_used)
      .def_readonly("subsampled", &SigmaEstimate::subsampled);

  m.def("robust_loss",
        [](const Vector& x, const LossConfig& cfg) {
          return robust_loss({x.data(), static_cast<std::size_t>(x.size())}, cfg);
        },
        py::arg("x"), py::arg("cfg"));

  m.def("default_experiment_spec", &default_experiment_spec, py::arg("k"), py::arg("d"), py::arg("sigmas"),
        py::arg("cluster_weight"), py::arg("cfg"), py::arg("ball_scale") = std::nullopt);

  m.def("sample_gmmub",
        [](const GmmubSpec& spec, std::size_t n, std::uint64_t seed) {
          const DataMatrix data = sample_gmmub(spec, n, seed);
          return py::make_tuple(data.values(), data.labels());
        },
        py::arg("spec"), py::arg("n"), py::arg("seed"),
        "Returns (points, labels); label 0 marks background points.");

  m.def("ocrlm", [](const Matrix& x, const LossConfig& cfg) { return ocrlm(DataMatrix(x), cfg); },
        py::arg("x"), py::arg("cfg"), py::call_guard<py::gil_scoped_release>());

  m.def("crlm",
        [](const Matrix& x, std::size_t k_max, const LossConfig& cfg, std::size_t min_cluster_size,
           unsigned threads) {
          ScanOptions opts;
          opts.threads = threads;
          return crlm::crlm(DataMatrix(x), k_max, cfg, min_cluster_size, opts);
        },
        py::arg("x"), py::arg("k_max"), py::arg("cfg"), py::arg("min_cluster_size") = 1,
        py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());

  m.def("kmeans_pp",
        [](const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
          return kmeans_pp(DataMatrix(x), k, seed, max_iter);
        },
        py::arg("x"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iter") = 300,
        py::call_guard<py::gil_scoped_release>());

  m.def("rand_index", [](const Labels& t, const Labels& p) { return rand_index(t, p); });
  m.def("purity", [](const Labels& t, const Labels& p) { return purity(t, p); });
  m.def("f_measure_avg",
        [](const Labels& t, const Labels& p, int k, bool match_zero) { return f_measure_avg(t, p, k, match_zero); },
        py::arg("truth"), py::arg("pred"), py::arg("k"), py::arg("match_zero") = false);
  m.def("mean_center_error",
        [](const Matrix& truth, const Matrix& est) { return mean_center_error(truth, est).value; },
        py::arg("true_means"), py::arg("estimates"));

  m.def("estimate_sigmas",
        [](const Matrix& x, double quantile, std::size_t bins, std::uint64_t seed) {
          SigmaEstimateOptions o;
          o.quantile = quantile;
          o.bins = bins;
          o.seed = seed;
          return estimate_sigmas(DataMatrix(x), o);
        },
        py::arg("x"), py::arg("quantile") = 0.05, py::arg("bins") = 0, py::arg("seed") = 0,
        py::call_guard<py::gil_scoped_release>());
  m.def("estimate_k",
        [](const Matrix& x, const LossConfig& cfg, std::size_t k_cap, std::size_t min_cluster_size) {
          return estimate_k(DataMatrix(x), cfg, k_cap, min_cluster_size);
        },
        py::arg("x"), py::arg("cfg"), py::arg("k_cap") = 10, py::arg("min_cluster_size") = 1,
        py::call_guard<py::gil_scoped_release>());
  m.def("suggest_sigma_max", &suggest_sigma_max, py::arg("estimates"),
        py::arg("factor") = kDefaultSigmaMaxFactor);

  m.def("conditions_prob", [](const GmmubSpec& s, const LossConfig& c, double n) {
    return bound_dict(conditions_prob(s, c, n));
  });
  m.def("success_prob_thm1", [](const GmmubSpec& s, const LossConfig& c, double n) {
    return bound_dict(success_prob_thm1(s, c, n));
  });
  m.def("success_prob_thm2", [](const GmmubSpec& s, const LossConfig& c, double n) {
    return bound_dict(success_prob_thm2(s, c, n));
  });
  m.def("success_prob_cor1", [](const GmmubSpec& s, const LossConfig& c, double n) {
    const auto b = success_prob_cor1(s, c, n);
    py::dict d = bound_dict(b.prob);
    d["radius_sq"] = b.radius_sq;
    return d;
  });
  m.def("margin_w", &margin_w, py::arg("spec"), py::arg("cfg"), py::arg("j"));

  m.def("feasible_sigma_region",
        [](const GmmubSpec& spec, const std::string& axis, const std::vector<double>& values, double n,
           double g, double prob_floor) {
          RegionRequest r;
          r.spec = spec;
          r.n = n;
          r.g = g;
          r.prob_floor = prob_floor;
          r.axis_values = values;
          if (axis == "d") r.axis = SweepAxis::kDimension;
          else if (axis == "n") r.axis = SweepAxis::kSampleSize;
          else if (axis == "G") r.axis = SweepAxis::kG;
          else throw std::invalid_argument("axis must be d, n or G");
          py::list out;
          for (const auto& row : feasible_sigma_region(r)) {
            py::dict d;
            d["axis_value"] = row.axis_value;
            d["empty"] = row.empty;
            d["sigma_lo"] = row.sigma_lo;
            d["sigma_hi"] = row.sigma_hi;
            d["limiting"] = row.limiting;
            out.append(d);
          }
          return out;
        },
        py::arg("spec"), py::arg("axis"), py::arg("values"), py::arg("n") = 1e4, py::arg("g") = 4.0,
        py::arg("prob_floor") = 0.99);
}
