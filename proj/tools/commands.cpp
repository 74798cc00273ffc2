#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <regex>
#include <vector>

#include "fanbeam/calibration.hpp"
#include "fanbeam/error.hpp"
#include "fanbeam/fbp.hpp"
#include "fanbeam/json_io.hpp"
#include "fanbeam/npy.hpp"
#include "fanbeam/phantom.hpp"
#include "fanbeam/projector.hpp"
#include "fanbeam/reconstruction.hpp"

namespace fanbeam::cli {

namespace {

/// FNV-1a, enough to tell configurations apart in a manifest.
std::string digest(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

class RunRecorder {
public:
    explicit RunRecorder(std::string command)
        : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

    void input(const fs::path& p) { inputs_.push_back(p.string()); }
    void output(const fs::path& p) { outputs_.push_back(p.string()); }
    void config(const Json& j) { config_text_ += j.dump(); }
    void seed(std::uint64_t s) { seed_ = s; }

    void finish(const std::optional<fs::path>& path) const {
        if (!path) return;
        for (const auto& o : outputs_)
            require(fs::exists(o), ErrorKind::Io, "declared output was not written: " + o);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        Json j{{"command", command_},
               {"inputs", inputs_},
               {"outputs", outputs_},
               {"config_digest", digest(config_text_)},
               {"wall_seconds", seconds}};
        j["seed"] = seed_ ? Json(*seed_) : Json(nullptr);
        write_json(*path, j);
    }

private:
    std::string command_;
    std::vector<std::string> inputs_;
    std::vector<std::string> outputs_;
    std::string config_text_;
    std::optional<std::uint64_t> seed_;
    std::chrono::steady_clock::time_point start_;
};

void ensure_parent(const fs::path& p) {
    const auto parent = p.parent_path();
    if (parent.empty()) return;
    std::error_code ec;
    fs::create_directories(parent, ec);
    require(!ec, ErrorKind::Io, "cannot create directory " + parent.string() + ": " + ec.message());
}

void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    require(!ec && fs::is_directory(p), ErrorKind::Io, "cannot create directory " + p.string());
}

template <class Tag>
void save(const fs::path& p, const Grid2D<Tag>& grid, RunRecorder& rec) {
    ensure_parent(p);
    npy::write_grid(p, grid);
    rec.output(p);
}

FanbeamGeometry load_geometry(const fs::path& p) {
    auto g = parse_as<FanbeamGeometry>(read_json(p), "geometry");
    g.validate();
    return g;
}

std::string pair_name(std::size_t i, const char* kind) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "pair_%04zu_%s.npy", i, kind);
    return buf;
}

/// Lists pairs from manifest.json when present, else by file name.
std::vector<std::pair<fs::path, fs::path>> list_pairs(const fs::path& dir) {
    require(fs::is_directory(dir), ErrorKind::Io, "not a directory: " + dir.string());
    std::vector<std::pair<fs::path, fs::path>> out;
    const auto manifest = dir / "manifest.json";
    if (fs::exists(manifest)) {
        const Json j = read_json(manifest);
        require(j.contains("pairs") && j["pairs"].is_array(), ErrorKind::Format,
                manifest.string() + ": missing 'pairs' list");
        for (const auto& e : j["pairs"]) {
            require(e.contains("image") && e.contains("sinogram"), ErrorKind::Format,
                    manifest.string() + ": pair entries need 'image' and 'sinogram'");
            out.emplace_back(dir / e["image"].get<std::string>(), dir / e["sinogram"].get<std::string>());
        }
        return out;
    }
    const std::regex pattern(R"(pair_(\d+)_image\.npy)");
    std::vector<std::string> images;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (std::regex_match(name, pattern)) images.push_back(name);
    }
    std::sort(images.begin(), images.end());
    for (const auto& name : images) {
        const auto sino = dir / (name.substr(0, name.size() - std::string("image.npy").size()) + "sino.npy");
        require(fs::exists(sino), ErrorKind::Io, "no sinogram for " + name);
        out.emplace_back(dir / name, sino);
    }
    return out;
}

/// Calibration report as written by `calibrate` and read by `reconstruct`.
struct ReportFile {
    CalibParams params;
    GeometryDims dims;
    FbpConfig fbp;
    double step = 0.5;
    fs::path bias;
};

ReportFile load_report(const fs::path& path) {
    const Json j = read_json(path);
    ReportFile r;
    try {
        r.params = j.at("params").get<CalibParams>();
        const auto& d = j.at("dims");
        r.dims = {d.at("n_detector").get<int>(), d.at("n_angle").get<int>(), d.at("image_size").get<int>()};
        r.fbp = j.at("fbp").get<FbpConfig>();
        r.step = j.value("step", 0.5);
        r.bias = path.parent_path() / j.at("bias").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Format, path.string() + ": " + e.what());
    }
    return r;
}

} // namespace

void run_phantom(const PhantomArgs& args, const CommonArgs& common) {
    RunRecorder rec("phantom");
    rec.seed(args.seed);
    require(args.sino_mode == "analytic" || args.sino_mode == "discrete", ErrorKind::InvalidArgument,
            "--sino-mode must be 'analytic' or 'discrete'");

    std::optional<FanbeamGeometry> geom;
    if (args.geometry) {
        geom = load_geometry(*args.geometry);
        rec.input(*args.geometry);
    }
    int n_pix = args.n_pix.value_or(geom ? geom->image_size : 512);
    require(n_pix >= 1, ErrorKind::InvalidArgument, "--n-pix must be positive");
    if (geom)
        require(geom->image_size == n_pix, ErrorKind::ShapeMismatch,
                "--n-pix " + std::to_string(n_pix) + " does not match the geometry image_size " +
                    std::to_string(geom->image_size));

    std::vector<EllipsePhantom> phantoms;
    if (args.spec) {
        rec.input(*args.spec);
        auto p = parse_as<EllipsePhantom>(read_json(*args.spec), "phantom spec");
        p.validate();
        rec.config(Json(p));
        phantoms.push_back(std::move(p));
    } else {
        PhantomSuiteOptions opts;
        opts.count = args.count;
        opts.n_pix = n_pix;
        opts.common_body = args.common_body;
        phantoms = random_phantom_suite(opts, args.seed);
    }

    ProjectorOptions proj;
    proj.step = args.step;
    proj.exec.threads = common.threads;
    auto sinogram_of = [&](const EllipsePhantom& p, const Image& img) {
        return args.sino_mode == "analytic" ? analytic_sinogram(p, *geom, args.s_fwd)
                                            : forward_project(img, *geom, args.s_fwd, proj);
    };

    if (args.out_dir) {
        ensure_dir(*args.out_dir);
        Json list = Json::array();
        for (std::size_t i = 0; i < phantoms.size(); ++i) {
            const Image img = rasterize(phantoms[i], n_pix);
            save(*args.out_dir / pair_name(i, "image"), img, rec);
            Json entry{{"image", pair_name(i, "image")}, {"phantom", phantoms[i]}};
            if (geom) {
                save(*args.out_dir / pair_name(i, "sino"), sinogram_of(phantoms[i], img), rec);
                entry["sinogram"] = pair_name(i, "sino");
            }
            list.push_back(std::move(entry));
        }
        Json manifest{{"n_pix", n_pix}, {"seed", args.seed}, {"pairs", list}};
        if (geom) {
            manifest["geometry"] = *geom;
            manifest["s_fwd"] = args.s_fwd;
            manifest["sino_mode"] = args.sino_mode;
        }
        write_json(*args.out_dir / "manifest.json", manifest);
        rec.output(*args.out_dir / "manifest.json");
        rec.finish(common.run_manifest ? common.run_manifest : *args.out_dir / "run_manifest.json");
        return;
    }

    require(phantoms.size() == 1, ErrorKind::InvalidArgument, "a phantom suite needs --out-dir");
    require(args.out_image || args.out_sino, ErrorKind::InvalidArgument,
            "nothing to write: give --out-image, --out-sino or --out-dir");
    const Image img = rasterize(phantoms[0], n_pix);
    if (args.out_image) save(*args.out_image, img, rec);
    if (args.out_sino) {
        require(geom.has_value(), ErrorKind::InvalidArgument, "--out-sino needs --geometry");
        save(*args.out_sino, sinogram_of(phantoms[0], img), rec);
    }
    rec.finish(common.run_manifest);
}

void run_project(const ProjectArgs& args, const CommonArgs& common) {
    RunRecorder rec("project");
    rec.input(args.image);
    rec.input(args.geometry);
    const auto geom = load_geometry(args.geometry);
    const Image img = npy::read_image(args.image);
    ProjectorOptions opts;
    opts.step = args.step;
    opts.exec.threads = common.threads;
    rec.config(Json{{"s_fwd", args.s_fwd}, {"step", args.step}});
    Sinogram out;
    if (args.bias) {
        rec.input(*args.bias);
        const BiasCorrection bias{npy::read_sinogram(*args.bias)};
        out = apply_corrected_forward(img, geom, args.s_fwd, bias, opts);
    } else {
        out = forward_project(img, geom, args.s_fwd, opts);
    }
    save(args.out, out, rec);
    rec.finish(common.run_manifest);
}

void run_fbp(const FbpArgs& args, const CommonArgs& common) {
    RunRecorder rec("fbp");
    rec.input(args.sinogram);
    rec.input(args.geometry);
    const auto geom = load_geometry(args.geometry);
    FbpConfig cfg;
    cfg.s_fbp = args.s_fbp;
    cfg.filter = filter_from_string(args.filter);
    cfg.padding = args.padding;
    cfg.exec.threads = common.threads;
    rec.config(Json(cfg));
    save(args.out, fbp_reconstruct(npy::read_sinogram(args.sinogram), geom, cfg), rec);
    rec.finish(common.run_manifest);
}

void run_calibrate(const CalibrateArgs& args, const CommonArgs& common) {
    RunRecorder rec("calibrate");
    rec.input(args.pairs_dir);
    rec.input(args.init);
    rec.input(args.config);

    CalibrationSet set;
    for (const auto& [image, sino] : list_pairs(args.pairs_dir))
        set.pairs.push_back({npy::read_sinogram(sino), npy::read_image(image)});
    require(!set.pairs.empty(), ErrorKind::InvalidArgument, "no pairs found in " + args.pairs_dir.string());
    const auto dims = set.dims();

    const auto init = parse_as<CalibParams>(read_json(args.init), "initial parameters");
    const Json cfg_json = read_json(args.config);
    auto cfg = parse_as<CoordinateDescentConfig>(cfg_json, "descent config");
    // Pairs arrive as float32, so an exact model still leaves up to 2^-24
    // relative error per entry.
    if (!cfg_json.contains("loss_floor")) cfg.loss_floor = 0x1p-48;
    cfg.projector.exec.threads = common.threads;
    FbpConfig fbp;
    fbp.filter = filter_from_string(args.filter);
    fbp.padding = args.padding;
    fbp.exec.threads = common.threads;
    rec.config(Json(init));
    rec.config(Json(cfg));
    rec.seed(cfg.seed);

    const auto report = calibrate(set, init, cfg, fbp);

    ensure_dir(args.out_dir);
    save(args.out_dir / "bias.npy", report.bias.offset, rec);

    const auto history = args.out_dir / "history.csv";
    {
        std::ofstream csv(history, std::ios::trunc);
        require(static_cast<bool>(csv), ErrorKind::Io, "cannot open " + history.string() + " for writing");
        csv << "iteration,loss\n";
        char line[64];
        for (const auto& r : report.loss_history) {
            std::snprintf(line, sizeof line, "%d,%.17g\n", r.iteration, r.loss);
            csv << line;
        }
        require(static_cast<bool>(csv), ErrorKind::Io, "write failed for " + history.string());
    }
    rec.output(history);

    FbpConfig fitted = fbp;
    fitted.s_fbp = report.s_fbp;
    Json j{{"params", report.params},
           {"dims", {{"n_detector", dims.n_detector}, {"n_angle", dims.n_angle}, {"image_size", dims.image_size}}},
           {"geometry", geometry_from_reduced(report.params, dims)},
           {"fbp", fitted},
           {"step", cfg.projector.step},
           {"bias", "bias.npy"},
           {"history", "history.csv"},
           {"num_pairs", set.size()},
           {"converged", report.converged},
           {"status", report.status},
           {"iterations", report.iterations},
           {"initial_loss", report.loss_history.front().loss},
           {"final_loss", report.loss_history.back().loss}};
    write_json(args.out_dir / "report.json", j);
    rec.output(args.out_dir / "report.json");
    rec.finish(common.run_manifest ? common.run_manifest : args.out_dir / "run_manifest.json");
}

void run_reconstruct(const ReconstructArgs& args, const CommonArgs& common) {
    RunRecorder rec("reconstruct");
    rec.input(args.sinogram);
    rec.input(args.report);
    rec.input(args.config);

    const auto report = load_report(args.report);
    const auto cfg = parse_as<ReconConfig>(read_json(args.config), "reconstruction config");
    cfg.validate();
    rec.config(Json(cfg));

    FbpConfig fbp = report.fbp;
    fbp.exec.threads = common.threads;
    ProjectorOptions proj;
    proj.step = report.step;
    proj.exec.threads = common.threads;
    std::shared_ptr<const BiasCorrection> bias;
    if (cfg.use_bias_correction) {
        rec.input(report.bias);
        bias = std::make_shared<const BiasCorrection>(BiasCorrection{npy::read_sinogram(report.bias)});
    }
    const ReconOperators ops(geometry_from_reduced(report.params, report.dims), report.params.s_fwd, fbp, proj,
                             bias);

    const Sinogram y = npy::read_sinogram(args.sinogram);
    const Image x = iterative_reconstruct(y, cfg, ops);
    save(args.out, x, rec);
    if (args.residual) save(*args.residual, sinogram_residual(y, x, cfg.use_bias_correction ? ops : ops.uncorrected()), rec);
    rec.finish(common.run_manifest);
}

void run_metrics(const MetricsArgs& args, const CommonArgs& common) {
    RunRecorder rec("metrics");
    rec.input(args.a);
    rec.input(args.b);
    const Image a = npy::read_image(args.a);
    const Image b = npy::read_image(args.b);
    Json j{{"rmse", rmse(a, b)}, {"max_abs", max_abs_diff(a, b)}};

    require(args.sinogram.has_value() == args.report.has_value(), ErrorKind::InvalidArgument,
            "--sinogram and --report go together");
    if (args.sinogram) {
        // Data-consistency of the first image under the calibrated forward model.
        rec.input(*args.sinogram);
        rec.input(*args.report);
        const auto report = load_report(*args.report);
        ProjectorOptions proj;
        proj.step = report.step;
        proj.exec.threads = common.threads;
        const auto geom = geometry_from_reduced(report.params, report.dims);
        Sinogram r = npy::read_sinogram(*args.sinogram);
        r -= forward_project(a, geom, report.params.s_fwd, proj);
        j["residual_norm"] = std::sqrt(squared_norm(r.values()));
    }
    std::cout << j.dump(2) << "\n";
    rec.finish(common.run_manifest);
}

} // namespace fanbeam::cli
