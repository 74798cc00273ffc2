#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fanbeam/calibration.hpp"
#include "fanbeam/error.hpp"
#include "fanbeam/fbp.hpp"
#include "fanbeam/json_io.hpp"
#include "fanbeam/phantom.hpp"
#include "fanbeam/projector.hpp"
#include "fanbeam/reconstruction.hpp"

namespace py = pybind11;
using namespace fanbeam;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <class Tag>
Grid2D<Tag> to_grid(const Array& a, const char* what) {
    if (a.ndim() != 2)
        throw Error(ErrorKind::ShapeMismatch, std::string(what) + " must be 2-D, got " + std::to_string(a.ndim()) + "-D");
    const auto rows = static_cast<std::size_t>(a.shape(0));
    const auto cols = static_cast<std::size_t>(a.shape(1));
    return Grid2D<Tag>(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

Image to_image(const Array& a) {
    Image img = to_grid<ImageTag>(a, "image");
    require(img.rows() == img.cols(), ErrorKind::ShapeMismatch, "image must be square");
    return img;
}

Sinogram to_sinogram(const Array& a) { return to_grid<SinogramTag>(a, "sinogram"); }

template <class Tag>
Array to_array(Grid2D<Tag>&& g) {
    Array out({g.rows(), g.cols()});
    std::copy(g.values().begin(), g.values().end(), out.mutable_data());
    return out;
}

template <class T>
T from_json_text(const std::string& text, const char* what) {
    return parse_as<T>(Json::parse(text), what);
}

CalibrationSet make_set(const std::vector<Array>& images, const std::vector<Array>& sinograms) {
    require(images.size() == sinograms.size(), ErrorKind::ShapeMismatch,
            "got " + std::to_string(images.size()) + " images and " + std::to_string(sinograms.size()) +
                " sinograms");
    CalibrationSet set;
    for (std::size_t i = 0; i < images.size(); ++i) set.pairs.push_back({to_sinogram(sinograms[i]), to_image(images[i])});
    return set;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fanbeam CT forward model, FBP, calibration and reconstruction";

    // Messages start with the error category, as on the command line.
    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
    error_type.call_once_and_store_result(
        [&]() { return py::exception<Error>(m, "FanbeamError", PyExc_ValueError); });
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const std::string msg = std::string(to_string(e.kind())) + ": " + e.what();
            PyErr_SetString(error_type.get_stored().ptr(), msg.c_str());
        } catch (const nlohmann::json::exception& e) {
            const std::string msg = std::string("format: ") + e.what();
            PyErr_SetString(error_type.get_stored().ptr(), msg.c_str());
        }
    });

    py::class_<FanbeamGeometry>(m, "Geometry")
        .def_readonly("d_source", &FanbeamGeometry::d_source)
        .def_readonly("d_detector", &FanbeamGeometry::d_detector)
        .def_readonly("n_detector", &FanbeamGeometry::n_detector)
        .def_readonly("s_detector", &FanbeamGeometry::s_detector)
        .def_readonly("n_angle", &FanbeamGeometry::n_angle)
        .def_readonly("angles", &FanbeamGeometry::angles)
        .def_readonly("image_size", &FanbeamGeometry::image_size)
        .def("to_json", [](const FanbeamGeometry& g) { return Json(g).dump(); })
        .def_static("from_json", [](const std::string& text) {
            auto g = from_json_text<FanbeamGeometry>(text, "geometry");
            g.validate();
            return g;
        })
        .def("__repr__", [](const FanbeamGeometry& g) {
            return "Geometry(d_source=" + std::to_string(g.d_source) + ", n_detector=" + std::to_string(g.n_detector) +
                   ", n_angle=" + std::to_string(g.n_angle) + ", image_size=" + std::to_string(g.image_size) + ")";
        });

    m.def(
        "make_geometry",
        [](double d_source, std::vector<double> angles, int n_detector, int image_size) {
            CalibParams p{1.0, d_source, std::move(angles)};
            return geometry_from_reduced(p, n_detector, static_cast<int>(p.angles.size()), image_size);
        },
        py::arg("d_source"), py::arg("angles"), py::arg("n_detector"), py::arg("image_size"),
        "Geometry with the detector distance implied by the field of view.");

    m.def(
        "forward_project",
        [](const Array& image, const FanbeamGeometry& geom, double s_fwd, double step, int threads) {
            Image img = to_image(image);
            Sinogram out;
            {
                py::gil_scoped_release release;
                out = forward_project(img, geom, s_fwd, ProjectorOptions{step, ExecPolicy{threads}});
            }
            return to_array(std::move(out));
        },
        py::arg("image"), py::arg("geometry"), py::arg("s_fwd") = 1.0, py::arg("step") = 0.5, py::arg("threads") = 0);

    m.def(
        "fbp",
        [](const Array& sinogram, const FanbeamGeometry& geom, double s_fbp, const std::string& filter, int padding,
           int threads) {
            Sinogram y = to_sinogram(sinogram);
            FbpConfig cfg{s_fbp, filter_from_string(filter), padding, ExecPolicy{threads}};
            Image out;
            {
                py::gil_scoped_release release;
                out = fbp_reconstruct(y, geom, cfg);
            }
            return to_array(std::move(out));
        },
        py::arg("sinogram"), py::arg("geometry"), py::arg("s_fbp") = 1.0, py::arg("filter") = "hamming_ramp",
        py::arg("padding") = 0, py::arg("threads") = 0);

    m.def(
        "rasterize",
        [](const std::string& phantom_json, int n_pix) {
            return to_array(rasterize(from_json_text<EllipsePhantom>(phantom_json, "phantom"), n_pix));
        },
        py::arg("phantom_json"), py::arg("n_pix"));

    m.def(
        "analytic_sinogram",
        [](const std::string& phantom_json, const FanbeamGeometry& geom, double s_fwd) {
            return to_array(analytic_sinogram(from_json_text<EllipsePhantom>(phantom_json, "phantom"), geom, s_fwd));
        },
        py::arg("phantom_json"), py::arg("geometry"), py::arg("s_fwd") = 1.0);

    m.def(
        "random_phantom_suite",
        [](int count, int n_pix, std::uint64_t seed, bool common_body) {
            PhantomSuiteOptions opts;
            opts.count = count;
            opts.n_pix = n_pix;
            opts.common_body = common_body;
            return Json(random_phantom_suite(opts, seed)).dump();
        },
        py::arg("count"), py::arg("n_pix"), py::arg("seed"), py::arg("common_body") = false);

    m.def(
        "calibrate",
        [](const std::vector<Array>& images, const std::vector<Array>& sinograms, const std::string& init_json,
           const std::string& config_json, const std::string& filter, int threads) {
            CalibrationSet set = make_set(images, sinograms);
            const auto init = from_json_text<CalibParams>(init_json, "initial parameters");
            auto cfg = from_json_text<CoordinateDescentConfig>(config_json, "descent config");
            cfg.projector.exec.threads = threads;
            FbpConfig fbp;
            fbp.filter = filter_from_string(filter);
            fbp.exec.threads = threads;
            CalibReport report;
            {
                py::gil_scoped_release release;
                report = calibrate(set, init, cfg, fbp);
            }
            Json history = Json::array();
            for (const auto& r : report.loss_history) history.push_back({r.iteration, r.loss});
            const Json j{{"params", report.params}, {"s_fbp", report.s_fbp},     {"converged", report.converged},
                         {"status", report.status}, {"iterations", report.iterations}, {"loss_history", history}};
            return py::make_tuple(j.dump(), to_array(std::move(report.bias.offset)));
        },
        py::arg("images"), py::arg("sinograms"), py::arg("init_json"), py::arg("config_json") = "{}",
        py::arg("filter") = "hamming_ramp", py::arg("threads") = 0);

    m.def(
        "reconstruct",
        [](const Array& sinogram, const FanbeamGeometry& geom, double s_fwd, double s_fbp,
           const std::string& config_json, std::optional<Array> bias, int threads) {
            const auto cfg = from_json_text<ReconConfig>(config_json, "reconstruction config");
            FbpConfig fbp;
            fbp.s_fbp = s_fbp;
            fbp.exec.threads = threads;
            std::shared_ptr<const BiasCorrection> b;
            if (bias) b = std::make_shared<const BiasCorrection>(BiasCorrection{to_sinogram(*bias)});
            const ReconOperators ops(geom, s_fwd, fbp, ProjectorOptions{0.5, ExecPolicy{threads}}, b);
            const Sinogram y = to_sinogram(sinogram);
            ReconTrace trace;
            Image x;
            {
                py::gil_scoped_release release;
                x = iterative_reconstruct(y, cfg, ops, &trace);
            }
            Sinogram residual = sinogram_residual(y, x, cfg.use_bias_correction ? ops : ops.uncorrected());
            return py::make_tuple(to_array(std::move(x)), to_array(std::move(residual)), trace.residual_norms);
        },
        py::arg("sinogram"), py::arg("geometry"), py::arg("s_fwd"), py::arg("s_fbp"), py::arg("config_json") = "{}",
        py::arg("bias") = py::none(), py::arg("threads") = 0,
        "Returns (image, y - F image, residual norm after each iteration).");

    m.def(
        "rmse", [](const Array& a, const Array& b) { return rmse(to_image(a), to_image(b)); }, py::arg("a"),
        py::arg("b"));
    m.def(
        "max_abs_diff", [](const Array& a, const Array& b) { return max_abs_diff(to_image(a), to_image(b)); },
        py::arg("a"), py::arg("b"));
}
