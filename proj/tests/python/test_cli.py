"""End-to-end checks of the fanbeam command-line tool."""

import json
import os
import subprocess

import numpy as np
import pytest

CLI = os.environ.get("FANBEAM_CLI", "fanbeam")


def run(*args, check=True):
    proc = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"{args} failed: {proc.stderr}")
    return proc


def write_geometry(path, n_pix, n_angle, n_det, d_source):
    # Same relation the library uses to place the detector.
    radius = n_pix / 2
    d_det = np.sqrt(d_source**2 - radius**2) * n_det / (2 * radius) - d_source
    angles = (2 * np.pi * np.arange(n_angle) / n_angle).tolist()
    geom = {
        "d_source": d_source,
        "d_detector": d_det,
        "n_detector": n_det,
        "s_detector": 1.0,
        "n_angle": n_angle,
        "angles": angles,
        "image_size": n_pix,
    }
    path.write_text(json.dumps(geom))
    return geom


@pytest.fixture
def small(tmp_path):
    geom = write_geometry(tmp_path / "geometry.json", 48, 16, 96, 80.0)
    return tmp_path, geom


def test_disk_spec_gives_full_size_image(tmp_path):
    spec = tmp_path / "disk.json"
    spec.write_text(json.dumps([{"center": [0, 0], "semi_axes": [100, 100]}]))
    run("phantom", spec, "--out-image", tmp_path / "disk.npy")
    img = np.load(tmp_path / "disk.npy")
    assert img.shape == (512, 512)
    assert img.dtype == np.float32
    assert img[256, 256] == 1.0 and img[0, 0] == 0.0


def test_seeded_suite_is_reproducible_and_complete(small):
    tmp, _ = small
    for tag in ("a", "b"):
        run("phantom", "--count", 8, "--seed", 7, "--geometry", tmp / "geometry.json", "--out-dir", tmp / tag)
    names = sorted(p.name for p in (tmp / "a").iterdir())
    assert len([n for n in names if n.endswith("_image.npy")]) == 8
    assert len([n for n in names if n.endswith("_sino.npy")]) == 8
    manifest = json.loads((tmp / "a" / "manifest.json").read_text())
    assert len(manifest["pairs"]) == 8
    for n in names:
        if n != "run_manifest.json":
            assert (tmp / "a" / n).read_bytes() == (tmp / "b" / n).read_bytes()
    run_manifest = json.loads((tmp / "a" / "run_manifest.json").read_text())
    assert run_manifest["command"] == "phantom" and run_manifest["seed"] == 7
    assert all(os.path.exists(o) for o in run_manifest["outputs"])


def test_project_shapes_and_zero_image(tmp_path):
    write_geometry(tmp_path / "ref.json", 512, 128, 1024, 1000.0)
    np.save(tmp_path / "zero.npy", np.zeros((512, 512), np.float32))
    run("project", tmp_path / "zero.npy", tmp_path / "ref.json", "--out", tmp_path / "sino.npy")
    sino = np.load(tmp_path / "sino.npy")
    assert sino.shape == (128, 1024)
    assert not sino.any()


def test_fbp_of_zero_and_of_a_disk(tmp_path):
    write_geometry(tmp_path / "g.json", 64, 256, 128, 128.0)
    np.save(tmp_path / "zero.npy", np.zeros((256, 128)))
    run("fbp", tmp_path / "zero.npy", tmp_path / "g.json", "--out", tmp_path / "zero_img.npy")
    assert not np.load(tmp_path / "zero_img.npy").any()

    spec = tmp_path / "disk.json"
    spec.write_text(json.dumps({"ellipses": [{"center": [0, 0], "semi_axes": [20, 20]}]}))
    run("phantom", spec, "--geometry", tmp_path / "g.json", "--out-image", tmp_path / "x.npy",
        "--out-sino", tmp_path / "y.npy")
    run("fbp", tmp_path / "y.npy", tmp_path / "g.json", "--out", tmp_path / "r.npy")
    x, r = np.load(tmp_path / "x.npy"), np.load(tmp_path / "r.npy")
    yy, xx = np.mgrid[:64, :64] - 31.5
    mask = np.hypot(xx, yy) <= 32
    assert np.linalg.norm((r - x)[mask]) / np.linalg.norm(x[mask]) < 0.12


def test_calibrate_and_reconstruct(small):
    tmp, geom = small
    run("phantom", "--count", 3, "--seed", 3, "--geometry", tmp / "geometry.json", "--out-dir", tmp / "pairs",
        "--sino-mode", "discrete")
    truth = {"s_fwd": 1.0, "d_source": geom["d_source"], "angles": geom["angles"]}
    (tmp / "truth.json").write_text(json.dumps(truth))
    (tmp / "cd.json").write_text(json.dumps({"max_outer_iters": 5}))
    run("calibrate", tmp / "pairs", tmp / "truth.json", tmp / "cd.json", "--out-dir", tmp / "calib")

    report = json.loads((tmp / "calib" / "report.json").read_text())
    assert report["converged"]
    assert report["dims"] == {"n_detector": 96, "n_angle": 16, "image_size": 48}
    history = (tmp / "calib" / "history.csv").read_text().splitlines()
    assert history[0] == "iteration,loss"
    assert np.load(tmp / "calib" / "bias.npy").shape == (16, 96)

    sino = tmp / "pairs" / "pair_0001_sino.npy"
    (tmp / "fbp_only.json").write_text(json.dumps({"lambdas": [0.0]}))
    run("reconstruct", sino, tmp / "calib" / "report.json", tmp / "fbp_only.json", "--out", tmp / "r0.npy",
        "--residual", tmp / "res0.npy")
    run("fbp", sino, tmp / "geometry.json", "--s-fbp", repr(report["fbp"]["s_fbp"]), "--out", tmp / "f.npy")
    assert np.array_equal(np.load(tmp / "r0.npy"), np.load(tmp / "f.npy"))
    assert np.load(tmp / "res0.npy").shape == np.load(sino).shape

    (tmp / "dc.json").write_text(json.dumps({"lambdas": [0.5], "enhancer": "identity"}))
    run("reconstruct", sino, tmp / "calib" / "report.json", tmp / "dc.json", "--out", tmp / "r1.npy",
        "--residual", tmp / "res1.npy")
    norm0 = np.linalg.norm(np.load(tmp / "res0.npy").astype(np.float64))
    norm1 = np.linalg.norm(np.load(tmp / "res1.npy").astype(np.float64))
    assert norm1 < norm0

    out = json.loads(run("metrics", tmp / "r1.npy", tmp / "pairs" / "pair_0001_image.npy", "--sinogram", sino,
                         "--report", tmp / "calib" / "report.json").stdout)
    assert out["residual_norm"] == pytest.approx(norm1, rel=1e-5)


def test_metrics(tmp_path):
    rng = np.random.default_rng(0)
    a = rng.normal(size=(20, 20)).astype(np.float32)
    np.save(tmp_path / "a.npy", a)
    np.save(tmp_path / "b.npy", a + np.float32(1.0))
    same = json.loads(run("metrics", tmp_path / "a.npy", tmp_path / "a.npy").stdout)
    assert same == {"rmse": 0.0, "max_abs": 0.0}
    shifted = json.loads(run("metrics", tmp_path / "a.npy", tmp_path / "b.npy").stdout)
    b = np.load(tmp_path / "b.npy").astype(np.float64)
    naive = np.sqrt(np.mean((a.astype(np.float64) - b) ** 2))
    assert shifted["rmse"] == pytest.approx(naive, rel=1e-12)
    assert shifted["rmse"] == pytest.approx(1.0, abs=1e-6)


def test_errors_are_categorised(tmp_path, small):
    tmp, _ = small
    proc = run("metrics", tmp_path / "missing.npy", tmp_path / "missing.npy", check=False)
    assert proc.returncode != 0
    assert proc.stderr.startswith("error: io:")

    np.save(tmp_path / "rect.npy", np.zeros((4, 5)))
    proc = run("project", tmp_path / "rect.npy", tmp / "geometry.json", "--out", tmp_path / "o.npy", check=False)
    assert proc.returncode != 0
    assert proc.stderr.startswith("error: shape_mismatch:")

    (tmp_path / "bad.json").write_text(json.dumps({"d_source": 10.0}))
    proc = run("fbp", tmp_path / "rect.npy", tmp_path / "bad.json", "--out", tmp_path / "o.npy", check=False)
    assert proc.returncode != 0
    assert proc.stderr.startswith("error: format:")

    proc = run("phantom", "--count", 2, "--n-pix", 32, "--out-image", tmp_path / "x.npy", check=False)
    assert proc.returncode != 0
    assert proc.stderr.startswith("error: invalid_argument:")


def test_thread_count_does_not_change_output(small):
    tmp, _ = small
    run("phantom", "--count", 1, "--seed", 5, "--geometry", tmp / "geometry.json", "--out-dir", tmp / "p")
    img = tmp / "p" / "pair_0000_image.npy"
    for t in (1, 3, 8):
        run("project", img, tmp / "geometry.json", "--out", tmp / f"s{t}.npy", "--threads", t)
        run("fbp", tmp / f"s{t}.npy", tmp / "geometry.json", "--out", tmp / f"f{t}.npy", "--threads", t)
    for t in (3, 8):
        assert (tmp / f"s{t}.npy").read_bytes() == (tmp / "s1.npy").read_bytes()
        assert (tmp / f"f{t}.npy").read_bytes() == (tmp / "f1.npy").read_bytes()
