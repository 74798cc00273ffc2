#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace fanbeam::cli {

namespace fs = std::filesystem;

struct PhantomArgs {
    std::optional<fs::path> spec;
    int count = 1;
    std::optional<int> n_pix;
    std::uint64_t seed = 0;
    bool common_body = false;
    std::optional<fs::path> geometry;
    std::optional<fs::path> out_image;
    std::optional<fs::path> out_sino;
    std::optional<fs::path> out_dir;
    double s_fwd = 1.0;
    /// "analytic" integrates the ellipses exactly, "discrete" runs the ray-driven projector.
    std::string sino_mode = "analytic";
    double step = 0.5;
};

struct ProjectArgs {
    fs::path image;
    fs::path geometry;
    fs::path out;
    double s_fwd = 1.0;
    std::optional<fs::path> bias;
    double step = 0.5;
};

struct FbpArgs {
    fs::path sinogram;
    fs::path geometry;
    fs::path out;
    double s_fbp = 1.0;
    std::string filter = "hamming_ramp";
    int padding = 0;
};

struct CalibrateArgs {
    fs::path pairs_dir;
    fs::path init;
    fs::path config;
    fs::path out_dir;
    std::string filter = "hamming_ramp";
    int padding = 0;
};

struct ReconstructArgs {
    fs::path sinogram;
    fs::path report;
    fs::path config;
    fs::path out;
    std::optional<fs::path> residual;
};

struct MetricsArgs {
    fs::path a;
    fs::path b;
    std::optional<fs::path> sinogram;
    std::optional<fs::path> report;
};

/// Shared by every subcommand.
struct CommonArgs {
    int threads = 0;
    std::optional<fs::path> run_manifest;
};

void run_phantom(const PhantomArgs& args, const CommonArgs& common);
void run_project(const ProjectArgs& args, const CommonArgs& common);
void run_fbp(const FbpArgs& args, const CommonArgs& common);
void run_calibrate(const CalibrateArgs& args, const CommonArgs& common);
void run_reconstruct(const ReconstructArgs& args, const CommonArgs& common);
void run_metrics(const MetricsArgs& args, const CommonArgs& common);

} // namespace fanbeam::cli
