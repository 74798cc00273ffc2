"""Fanbeam CT: calibrated forward model, FBP and data-consistent reconstruction.

Arrays are float64 NumPy arrays; images are square (n, n), sinograms are
(n_angle, n_detector). Phantoms are lists of ellipse dicts with keys
``center``, ``semi_axes``, ``rotation`` and ``density``.
"""

import json

import numpy as np

from . import _core
from ._core import FanbeamError, Geometry, fbp, forward_project, make_geometry, max_abs_diff, rmse

__all__ = [
    "FanbeamError",
    "Geometry",
    "analytic_sinogram",
    "calibrate",
    "fbp",
    "forward_project",
    "make_geometry",
    "max_abs_diff",
    "random_phantom_suite",
    "rasterize",
    "reconstruct",
    "rmse",
]


def _phantom_json(phantom):
    if isinstance(phantom, dict):
        return json.dumps(phantom)
    return json.dumps({"ellipses": list(phantom)})


def rasterize(phantom, n_pix):
    return _core.rasterize(_phantom_json(phantom), n_pix)


def analytic_sinogram(phantom, geometry, s_fwd=1.0):
    return _core.analytic_sinogram(_phantom_json(phantom), geometry, s_fwd)


def random_phantom_suite(count, n_pix, seed, common_body=False):
    """Seeded list of phantoms, each a list of ellipse dicts."""
    suite = json.loads(_core.random_phantom_suite(count, n_pix, seed, common_body))
    return [p["ellipses"] for p in suite]


def calibrate(images, sinograms, init, config=None, filter="hamming_ramp", threads=0):
    """Fit s_fwd, d_source and the view angles to sinogram/image pairs.

    ``init`` is a dict with ``s_fwd``, ``d_source`` and ``angles``. Returns the
    report as a dict with the bias array under ``"bias"``.
    """
    text, bias = _core.calibrate(
        [np.asarray(x, dtype=np.float64) for x in images],
        [np.asarray(y, dtype=np.float64) for y in sinograms],
        json.dumps(_plain(init)),
        json.dumps(config or {}),
        filter,
        threads,
    )
    report = json.loads(text)
    report["bias"] = bias
    return report


def reconstruct(sinogram, geometry, s_fwd, s_fbp, config=None, bias=None, threads=0):
    """Iterative reconstruction; returns (image, residual y - F image, residual norms)."""
    return _core.reconstruct(sinogram, geometry, s_fwd, s_fbp, json.dumps(config or {}), bias, threads)


def _plain(params):
    out = dict(params)
    out["angles"] = [float(a) for a in out["angles"]]
    return out
