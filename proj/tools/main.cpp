#include <iostream>

#include "CLI11.hpp"

#include "commands.hpp"
#include "fanbeam/error.hpp"

using namespace fanbeam::cli;

int main(int argc, char** argv) {
    CLI::App app{"Fanbeam CT forward model calibration and reconstruction"};
    app.require_subcommand(1);
    // Lets --threads and --run-manifest follow the subcommand's own arguments.
    app.fallthrough();

    CommonArgs common;
    app.add_option("--threads", common.threads, "Worker threads, 0 = all cores")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--run-manifest", common.run_manifest, "Write a run manifest JSON here");

    PhantomArgs ph;
    auto* phantom = app.add_subcommand("phantom", "Rasterize phantoms and their analytic sinograms");
    phantom->add_option("spec", ph.spec, "Ellipse phantom JSON; omit for a seeded random suite");
    phantom->add_option("--count", ph.count, "Phantoms in the random suite")->check(CLI::PositiveNumber);
    phantom->add_option("--n-pix", ph.n_pix, "Image size (default: geometry image_size, else 512)");
    phantom->add_option("--seed", ph.seed, "Seed for the random suite");
    phantom->add_flag("--common-body", ph.common_body, "Random inserts inside one shared body ellipse");
    phantom->add_option("--geometry", ph.geometry, "Geometry JSON; needed for sinograms");
    phantom->add_option("--out-image", ph.out_image, "Image NPY for a single phantom");
    phantom->add_option("--out-sino", ph.out_sino, "Sinogram NPY for a single phantom");
    phantom->add_option("--out-dir", ph.out_dir, "Directory for pair_NNNN_{image,sino}.npy and manifest.json");
    phantom->add_option("--s-fwd", ph.s_fwd, "Scale applied to the sinograms");
    phantom->add_option("--sino-mode", ph.sino_mode, "analytic or discrete")
        ->check(CLI::IsMember({"analytic", "discrete"}));
    phantom->add_option("--step", ph.step, "Quadrature step for --sino-mode discrete");

    ProjectArgs pr;
    auto* project = app.add_subcommand("project", "Forward-project an image");
    project->add_option("image", pr.image)->required();
    project->add_option("geometry", pr.geometry)->required();
    project->add_option("--out", pr.out)->required();
    project->add_option("--s-fwd", pr.s_fwd);
    project->add_option("--bias", pr.bias, "Sinogram NPY subtracted from the projection");
    project->add_option("--step", pr.step, "Quadrature step in pixels");

    FbpArgs fb;
    auto* fbp = app.add_subcommand("fbp", "Filtered backprojection");
    fbp->add_option("sinogram", fb.sinogram)->required();
    fbp->add_option("geometry", fb.geometry)->required();
    fbp->add_option("--out", fb.out)->required();
    fbp->add_option("--s-fbp", fb.s_fbp);
    fbp->add_option("--filter", fb.filter)->check(CLI::IsMember({"hamming_ramp", "pure_ramp", "ram_lak"}));
    fbp->add_option("--padding", fb.padding, "Padded row length before filtering, 0 = auto");

    CalibrateArgs ca;
    auto* calib = app.add_subcommand("calibrate", "Fit the forward model to sinogram/image pairs");
    calib->add_option("pairs", ca.pairs_dir, "Directory of pairs")->required();
    calib->add_option("init", ca.init, "Initial parameters JSON")->required();
    calib->add_option("config", ca.config, "Coordinate descent config JSON")->required();
    calib->add_option("--out-dir", ca.out_dir)->required();
    calib->add_option("--filter", ca.filter)->check(CLI::IsMember({"hamming_ramp", "pure_ramp", "ram_lak"}));
    calib->add_option("--padding", ca.padding);

    ReconstructArgs re;
    auto* recon = app.add_subcommand("reconstruct", "Iterative reconstruction with a calibrated model");
    recon->add_option("sinogram", re.sinogram)->required();
    recon->add_option("report", re.report, "report.json from calibrate")->required();
    recon->add_option("config", re.config, "Reconstruction config JSON")->required();
    recon->add_option("--out", re.out)->required();
    recon->add_option("--residual", re.residual, "Also write y - F x");

    MetricsArgs me;
    auto* metrics = app.add_subcommand("metrics", "RMSE and max abs difference of two images");
    metrics->add_option("a", me.a)->required();
    metrics->add_option("b", me.b)->required();
    metrics->add_option("--sinogram", me.sinogram, "Also report ||y - F a|| for this sinogram");
    metrics->add_option("--report", me.report, "Calibration report defining F");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*phantom) run_phantom(ph, common);
        else if (*project) run_project(pr, common);
        else if (*fbp) run_fbp(fb, common);
        else if (*calib) run_calibrate(ca, common);
        else if (*recon) run_reconstruct(re, common);
        else if (*metrics) run_metrics(me, common);
    } catch (const fanbeam::Error& e) {
        std::cerr << "error: " << fanbeam::to_string(e.kind()) << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
