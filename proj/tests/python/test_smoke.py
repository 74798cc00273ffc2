import numpy as np
import pytest

import fanbeam


@pytest.fixture(scope="module")
def geom():
    angles = np.linspace(0, 2 * np.pi, 24, endpoint=False)
    return fanbeam.make_geometry(d_source=70.0, angles=angles, n_detector=96, image_size=40)


def test_geometry_round_trip(geom):
    assert geom.n_angle == 24 and geom.image_size == 40
    again = fanbeam.Geometry.from_json(geom.to_json())
    assert again.d_detector == geom.d_detector
    assert list(again.angles) == list(geom.angles)


def test_projection_matches_analytic_chords(geom):
    disk = [{"center": [0, 0], "semi_axes": [12, 12]}]
    img = fanbeam.rasterize(disk, 40)
    assert img.shape == (40, 40) and img.dtype == np.float64
    sino = fanbeam.forward_project(img, geom, threads=2)
    exact = fanbeam.analytic_sinogram(disk, geom)
    assert sino.shape == exact.shape == (24, 96)
    assert np.abs(sino - exact).max() < 0.1 * exact.max()
    assert np.array_equal(sino, fanbeam.forward_project(img, geom, threads=1))


def test_fbp_and_metrics(geom):
    disk = [{"center": [0, 0], "semi_axes": [12, 12]}]
    img = fanbeam.rasterize(disk, 40)
    recon = fanbeam.fbp(fanbeam.analytic_sinogram(disk, geom), geom)
    assert recon.shape == (40, 40)
    assert fanbeam.rmse(recon, img) < 0.2
    assert fanbeam.rmse(img, img) == 0.0
    assert fanbeam.max_abs_diff(img, img + 1.0) == 1.0


def test_calibration_and_reconstruction(geom):
    suite = fanbeam.random_phantom_suite(3, 40, seed=1)
    assert suite == fanbeam.random_phantom_suite(3, 40, seed=1)
    images = [fanbeam.rasterize(p, 40) for p in suite]
    sinos = [fanbeam.forward_project(x, geom, s_fwd=1.5) for x in images]
    init = {"s_fwd": 1.0, "d_source": geom.d_source, "angles": list(geom.angles)}
    report = fanbeam.calibrate(images, sinos, init, {"max_outer_iters": 3})
    assert report["params"]["s_fwd"] == pytest.approx(1.5, rel=1e-10)
    assert report["bias"].shape == (24, 96)
    losses = [loss for _, loss in report["loss_history"]]
    assert all(b <= a for a, b in zip(losses, losses[1:]))

    x, residual, norms = fanbeam.reconstruct(sinos[0], geom, 1.5, report["s_fbp"], {"lambdas": [0.5, 0.5]})
    assert x.shape == (40, 40) and residual.shape == (24, 96)
    assert len(norms) == 3 and norms[-1] < norms[0]


def test_errors_carry_the_category(geom):
    with pytest.raises(fanbeam.FanbeamError, match="^shape_mismatch:"):
        fanbeam.forward_project(np.zeros((4, 5)), geom)
    with pytest.raises(fanbeam.FanbeamError, match="^invalid_geometry:"):
        fanbeam.make_geometry(d_source=10.0, angles=[0.0], n_detector=96, image_size=40)
    with pytest.raises(ValueError):
        fanbeam.fbp(np.zeros((24, 96)), geom, filter="shepp_logan")
