#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gainml/config.hpp"
#include "gainml/kernel.hpp"
#include "gainml/pipeline.hpp"
#include "gainml/report.hpp"

namespace py = pybind11;
using namespace gainml;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

std::vector<Covariate> to_covariates(const std::vector<std::string>& names) { return covariates_from_names(names); }

std::optional<PairChoice> to_pair(const std::optional<std::pair<std::string, std::string>>& p) {
    if (!p) return std::nullopt;
    return PairChoice{p->first, p->second};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Kernel-regression upgrade gain quantification";

    static py::handle error_type = py::exception<Error>(m, "GainmlError").release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = error_type(e.what());
            exc.attr("code") = std::string(error_code_name(e.code()));
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        }
    });

    m.def("candidate_covariates", &candidate_covariates);
    m.def("exit_code_for", [](const std::string& name) {
        for (int c = 0; c <= static_cast<int>(ErrorCode::ManifestMissing); ++c) {
            if (error_code_name(static_cast<ErrorCode>(c)) == name) return exit_code_for(static_cast<ErrorCode>(c));
        }
        throw py::value_error("unknown error code " + name);
    });

    py::class_<KernelModel>(m, "KernelModel")
        .def_property_readonly("k", &KernelModel::k)
        .def_property_readonly("gcv_trace",
                               [](const KernelModel& km) {
                                   std::vector<std::pair<std::size_t, double>> out;
                                   for (const auto& e : km.gcv_trace()) out.emplace_back(e.k, e.value);
                                   return out;
                               })
        .def("predict", [](const KernelModel& km, const std::vector<std::vector<double>>& rows) {
            std::vector<double> flat;
            for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
            return km.predict_raw(flat);
        });

    m.def(
        "fit",
        [](const std::vector<std::vector<double>>& x, std::vector<double> y,
           std::optional<std::vector<std::size_t>> k_grid) {
            if (x.empty()) throw Error(ErrorCode::InvalidArgument, "no training rows");
            std::vector<double> flat;
            for (const auto& r : x) {
                if (r.size() != x[0].size()) throw Error(ErrorCode::DimensionMismatch, "ragged training rows");
                flat.insert(flat.end(), r.begin(), r.end());
            }
            const auto design = DesignMatrix::standardize(std::move(flat), x[0].size());
            const auto grid = k_grid.value_or(KGrid{}.for_size(x.size()));
            return fit(design, std::move(y), grid);
        },
        py::arg("x"), py::arg("y"), py::arg("k_grid") = py::none(),
        "Fit an adaptive Nadaraya-Watson model on raw covariate rows, choosing k by GCV.");

    m.def("percentile_interval", &percentile_interval, py::arg("values"), py::arg("level") = kDefaultCiLevel);

    m.def(
        "synth",
        [](const std::filesystem::path& scenario_path, std::optional<std::uint64_t> seed) {
            const auto out = run_synth(load_synth_config(scenario_path), seed);
            py::dict d;
            d["truth"] = out.farm.truth;
            d["aep_kwh"] = out.farm.aep_kwh;
            d["analysis_config"] = out.analysis_config_path;
            return d;
        },
        py::arg("scenario"), py::arg("seed") = py::none());

    m.def(
        "period1",
        [](const std::filesystem::path& config_path,
           std::optional<std::pair<std::string, std::string>> override_pair, std::optional<std::uint64_t> seed) {
            const auto out = run_period1(load_config(config_path), {to_pair(override_pair), seed});
            py::dict d;
            d["selection"] = to_python(selection_to_json(out.selection));
            d["ranking"] = to_python(ranking_to_json(out.ranking));
            d["variables"] = covariate_names(out.manifest.variables);
            d["pair"] = std::make_pair(out.manifest.ctrb, out.manifest.ctrn);
            d["manifest"] = out.manifest_path;
            return d;
        },
        py::arg("config"), py::arg("override_pair") = py::none(), py::arg("seed") = py::none());

    m.def(
        "period2",
        [](const std::filesystem::path& config_path, std::optional<std::filesystem::path> manifest_path,
           std::optional<std::uint64_t> seed) {
            const auto config = load_config(config_path);
            const auto path = manifest_path.value_or(config.resolve(config.output_dir) / "manifest.json");
            const auto out = run_period2(config, load_manifest(path), seed);
            auto report = to_python(gain_report_to_json(out.report));
            report["empirical_frequency"] = out.empirical_frequency;
            report["report_path"] = out.report_path;
            return report;
        },
        py::arg("config"), py::arg("manifest") = py::none(), py::arg("seed") = py::none());

    m.def(
        "variables_from_names", [](const std::vector<std::string>& names) { return covariate_names(to_covariates(names)); },
        "Validate and normalise covariate names.");
}
