"""Named presets that regenerate the reference sweeps as CSV files.

Each preset bakes in a fixed physical configuration (documented in the CSV
header comments) and emits one delimited file plus a JSON sidecar and a
quick-look PNG.  All presets are deterministic, so the CSV bytes are
reproducible for any worker count.

Shared conventions: probes are Gaussian with wavelength 2.5 pm (200 keV
beam) unless noted; electron-count columns use SNR = 3, shot columns an
87% confidence level; transverse orientation / Bloch components are unity
unless a column says otherwise.
"""

from __future__ import annotations

import time
from functools import partial
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__ as _version
from .model import (
    CONSTANTS,
    GaussianDensity,
    Hydrogen1sDensity,
    Probe,
    UniformBallDensity,
)
from .estimate import (
    cfi_momentum_pixelated,
    cfi_momentum_restricted,
    cfi_oam,
    coupling_g2,
    electrons_for_snr,
)
from .discriminate import (
    defocus_trace_distance,
    momentum_reduction_factor,
    oam_trace_distance,
    quantum_trace_distance_ba,
    quantum_trace_distance_nb,
    shots_for_confidence,
)
from .sweep import parallel_map, write_csv, write_sidecar

__all__ = ["FIGURES", "run_figure"]

_LAMBDA0 = 2.5e-12
_SNR = 3.0
_CL = 0.87


def _chi_grid(points: int = 49) -> np.ndarray:
    # log grid over two decades with the benchmark point 1.2 pinned
    grid = np.geomspace(0.1, 10.0, points)
    return np.unique(np.concatenate([grid, [1.2]]))


# --- fig2: electrons to estimate at SNR=3 vs focus ratio -------------------

_FIG2_THETA = CONSTANTS.r_e / 50e-12  # one Bohr magneton over 50 pm


def _fig2_row(chi: float) -> tuple:
    density = GaussianDensity(50e-12)
    probe = Probe(delta_e=chi * density.width, lambda0=_LAMBDA0)
    g2 = coupling_g2(density, probe)
    th = _FIG2_THETA
    n_qfi_nb = electrons_for_snr(_SNR, th, g2)
    n_qfi_ba = electrons_for_snr(_SNR, th, 2 * g2)
    n_cfi_p = electrons_for_snr(_SNR, th, g2)  # momentum saturates the NB bound
    oam_ba = cfi_oam("ba", th, 1.0, density, probe)
    n_cfi_oam = electrons_for_snr(_SNR, th, oam_ba)
    return (chi, n_qfi_nb, n_qfi_ba, n_cfi_p, n_cfi_oam)


def _fig2(workers: int):
    rows = parallel_map(_fig2_row, _chi_grid(61), workers)
    return {
        "columns": ["chi", "n_qfi_nb", "n_qfi_ba", "n_cfi_p", "n_cfi_oam"],
        "rows": rows,
        "comments": [
            "electrons to estimate a magnetic moment at SNR=3 vs chi=delta_e/width",
            f"gaussian spin width 50 pm, moment 1 mu_B, theta={_FIG2_THETA!r}",
            "n_cfi_p: diffraction-mode CFI (saturates the no-backaction bound);",
            "n_cfi_oam: binary zero-OAM test with backaction at finite theta",
        ],
        "plot": {"x": "chi", "xscale": "log", "yscale": "log",
                 "ylabel": "required electrons N"},
    }


# --- fig3: defocus-plane trace distance ------------------------------------

_FIG3_WIDTH = 1e-9
_FIG3_THETA = CONSTANTS.r_e * 100 / _FIG3_WIDTH
_FIG3_F = 2e-3
_FIG3_FOCI = (0.2, 1.0, 5.0)  # delta_e / width for panels a, b, c


def _fig3_row(z_over_f: float) -> tuple:
    density = GaussianDensity(_FIG3_WIDTH)
    out = [z_over_f]
    for mult in _FIG3_FOCI:
        probe = Probe(delta_e=mult * _FIG3_WIDTH, lambda0=_LAMBDA0)
        d = defocus_trace_distance(
            z_over_f * _FIG3_F, _FIG3_F, _FIG3_THETA, 1.0, probe, density
        )
        out.append(d.value)
    return tuple(out)


def _fig3(workers: int):
    density = GaussianDensity(_FIG3_WIDTH)
    rows = parallel_map(_fig3_row, np.geomspace(1e-4, 1.0, 49), workers)
    consts = []
    for mult in _FIG3_FOCI:
        probe = Probe(delta_e=mult * _FIG3_WIDTH, lambda0=_LAMBDA0)
        dq = quantum_trace_distance_nb(_FIG3_THETA, 1.0, density, probe).value
        dp = _FIG3_THETA * momentum_reduction_factor(density, probe)
        consts += [dq, dp]
    rows = [tuple(list(r) + consts) for r in rows]
    return {
        "columns": [
            "z_over_f", "d_a", "d_b", "d_c",
            "dq_a", "dp_a", "dq_b", "dp_b", "dq_c", "dp_c",
        ],
        "rows": rows,
        "comments": [
            "trace distance for imaging at lens distance z, image mode to diffraction mode",
            f"gaussian spin width 1 nm, moment 100 mu_B, theta={_FIG3_THETA!r}, f=2 mm, lambda0=2.5 pm",
            "panels: (a) delta_e=width/5, (b) delta_e=width, (c) delta_e=5*width",
            "dq_*: quantum trace distance; dp_*: diffraction-mode value theta*D",
            "z grid is log-spaced (preset choice; z=0 vanishes identically)",
        ],
        "plot": {"x": "z_over_f", "y": ["d_a", "d_b", "d_c"],
                 "xscale": "log", "yscale": "log", "ylabel": "trace distance"},
    }


# --- fig4: shots to discriminate at 87% confidence vs focus ratio ----------

_FIG4_THETA = 1e-3


def _fig4_row(chi: float) -> tuple:
    density = GaussianDensity(1e-9)
    probe = Probe(delta_e=chi * density.width, lambda0=_LAMBDA0)
    th = _FIG4_THETA
    d_oam_nb = oam_trace_distance("nb", th, 1.0, density, probe)
    d_oam_ba = oam_trace_distance("ba", th, 1.0, density, probe)
    dq_long = quantum_trace_distance_ba(th, (0.0, 0.0, 1.0), density, probe).value
    d_p = th * momentum_reduction_factor(density, probe)
    dq_nb = quantum_trace_distance_nb(th, 1.0, density, probe).value
    dq_trans = quantum_trace_distance_ba(th, (1.0, 0.0, 0.0), density, probe).value
    s = partial(shots_for_confidence, _CL)
    return (
        chi,
        s(d_oam_nb), s(d_oam_ba), s(dq_long),
        s(d_p), s(d_p), s(dq_nb), s(dq_trans),
    )


def _fig4(workers: int):
    rows = parallel_map(_fig4_row, _chi_grid(49), workers)
    return {
        "columns": [
            "chi",
            "n_oam_nb", "n_oam_ba", "n_q_ba_longitudinal",
            "n_p_nb", "n_p_ba", "n_q_nb", "n_q_ba_transverse",
        ],
        "rows": rows,
        "comments": [
            "shots to detect a magnetic moment at 87% confidence vs chi",
            f"gaussian model, theta={_FIG4_THETA!r}; upper-panel columns scale as"
            " theta^-4 (zero-OAM test and the longitudinal quantum bound),",
            "lower-panel columns as theta^-2 (diffraction mode and the transverse"
            " quantum bounds); transverse components are unity",
        ],
        "plot": {"x": "chi", "xscale": "log", "yscale": "log",
                 "ylabel": "required shots N"},
    }


# --- fig5: realistic spin densities ----------------------------------------


def _fig5a_row(delta_e: float) -> tuple:
    radius = 1e-9
    theta = CONSTANTS.r_e * 100 / radius
    probe = Probe(delta_e=delta_e, lambda0=_LAMBDA0)
    g2_ball = coupling_g2(UniformBallDensity(radius), probe)
    g2_gauss = coupling_g2(GaussianDensity(radius), probe)
    return (
        delta_e,
        electrons_for_snr(_SNR, theta, g2_ball),
        electrons_for_snr(_SNR, theta, g2_gauss),
    )


def _fig5a(workers: int):
    rows = parallel_map(_fig5a_row, np.geomspace(0.1e-9, 10e-9, 41), workers)
    return {
        "columns": ["delta_e", "n_ball", "n_gaussian_model"],
        "rows": rows,
        "comments": [
            "electrons to estimate a nanoparticle moment at SNR=3 vs probe size",
            "uniform ball radius 1 nm with 100 mu_B, no backaction, transverse moment",
            "n_gaussian_model: same with a gaussian density of width 1 nm",
        ],
        "plot": {"x": "delta_e", "xscale": "log", "yscale": "log",
                 "ylabel": "required electrons N"},
    }


def _fig5b_row(delta_e: float) -> tuple:
    a0 = 52e-12
    theta = CONSTANTS.r_e / a0
    probe = Probe(delta_e=delta_e, lambda0=_LAMBDA0)
    g2_h = coupling_g2(Hydrogen1sDensity(a0), probe)
    g2_gauss = coupling_g2(GaussianDensity(a0), probe)
    return (
        delta_e,
        electrons_for_snr(_SNR, theta, 2 * g2_h),
        electrons_for_snr(_SNR, theta, 2 * g2_gauss),
    )


def _fig5b(workers: int):
    rows = parallel_map(_fig5b_row, np.geomspace(5.2e-12, 520e-12, 41), workers)
    return {
        "columns": ["delta_e", "n_hydrogen", "n_gaussian_model"],
        "rows": rows,
        "comments": [
            "electrons to estimate a single orbital electron spin at SNR=3 vs probe size",
            "hydrogen 1s density, bohr radius 52 pm, 1 mu_B, with backaction (QFI 2*g2)",
            "n_gaussian_model: same with a gaussian density of width 52 pm",
        ],
        "plot": {"x": "delta_e", "xscale": "log", "yscale": "log",
                 "ylabel": "required electrons N"},
    }


# --- figC1: detector extent and pixelation ---------------------------------

_C1_WIDTH = 1e-9
_C1_DELTA_E = 10e-9


def _figc1a_row(p_max_units: float) -> tuple:
    density = GaussianDensity(_C1_WIDTH)
    probe = Probe(delta_e=_C1_DELTA_E, lambda0=_LAMBDA0)
    p_max = p_max_units * CONSTANTS.hbar / _C1_WIDTH
    return (
        p_max_units,
        cfi_momentum_restricted(p_max, 1.0, probe, density),
        coupling_g2(density, probe),
    )


def _figc1a(workers: int):
    rows = parallel_map(_figc1a_row, np.linspace(0.1, 5.0, 50), workers)
    return {
        "columns": ["p_max_hbar_over_width", "cfi", "qfi"],
        "rows": rows,
        "comments": [
            "momentum CFI restricted to p <= p_max, delta_e=10 nm, width=1 nm",
            "transverse orientation unity; qfi column is the unrestricted limit",
        ],
        "plot": {"x": "p_max_hbar_over_width", "ylabel": "Fisher information"},
    }


def _figc1b_row(pixel_units: float) -> tuple:
    density = GaussianDensity(_C1_WIDTH)
    probe = Probe(delta_e=_C1_DELTA_E, lambda0=_LAMBDA0)
    scale = CONSTANTS.hbar / _C1_WIDTH
    p_max = 5.0 * scale
    return (
        pixel_units,
        cfi_momentum_pixelated(pixel_units * scale, p_max, 1.0, probe, density),
        cfi_momentum_restricted(p_max, 1.0, probe, density),
    )


def _figc1b(workers: int):
    rows = parallel_map(_figc1b_row, np.geomspace(0.002, 0.5, 25), workers)
    return {
        "columns": ["pixel_hbar_over_width", "cfi_pixelated", "cfi_restricted"],
        "rows": rows,
        "comments": [
            "momentum CFI vs pixel size at p_max=5 hbar/width, delta_e=10 nm, width=1 nm",
            "cfi_restricted is the small-pixel limit",
        ],
        "plot": {"x": "pixel_hbar_over_width", "xscale": "log",
                 "ylabel": "Fisher information"},
    }


# --- figE1: backaction quantum distance, eigenvalues vs perturbative -------

_E1_THETA = 1e-2
_E1_CPERP = (0.0, 0.25, 0.5, 1.0)


def _fige1_row(chi: float) -> tuple:
    density = GaussianDensity(1e-9)
    probe = Probe(delta_e=chi * density.width, lambda0=_LAMBDA0)
    out = [chi]
    for c_perp in _E1_CPERP:
        c_z = 0.1 if c_perp < 1.0 else 0.0  # stay on the Bloch ball
        d = quantum_trace_distance_ba(
            _E1_THETA, (c_perp, 0.0, c_z), density, probe
        )
        out += [d.value, d.perturbative]
    return tuple(out)


def _fige1(workers: int):
    cols = ["chi"]
    for c_perp in _E1_CPERP:
        tag = str(c_perp).replace(".", "p")
        cols += [f"dq_eig_c{tag}", f"dq_pert_c{tag}"]
    rows = parallel_map(_fige1_row, np.geomspace(0.1, 10.0, 31), workers)
    return {
        "columns": cols,
        "rows": rows,
        "comments": [
            "backaction quantum trace distance vs chi at theta=1e-2, c_z=0.1",
            "eigenvalue route vs weak-sample case formula, for several |c_perp|",
            "|c_perp|=1 uses c_z=0 to stay on the Bloch sphere",
        ],
        "plot": {"x": "chi", "xscale": "log", "yscale": "log",
                 "ylabel": "quantum trace distance"},
    }


# --- figG1: nuclear spin -----------------------------------------------------

_G1_WIDTH = 1e-12
_G1_THETA = CONSTANTS.r_e / 1836.15267343 / _G1_WIDTH


def _figg1_row(delta_e: float) -> tuple:
    density = GaussianDensity(_G1_WIDTH)
    probe = Probe(delta_e=delta_e, lambda0=_LAMBDA0)
    th = _G1_THETA
    g2 = coupling_g2(density, probe)
    d_p = th * momentum_reduction_factor(density, probe)
    d_oam = oam_trace_distance("ba", th, 1.0, density, probe)
    dq = quantum_trace_distance_ba(th, (1.0, 0.0, 0.0), density, probe).value
    return (
        delta_e,
        electrons_for_snr(_SNR, th, 2 * g2),
        electrons_for_snr(_SNR, th, g2),
        electrons_for_snr(_SNR, th, cfi_oam("ba", th, 1.0, density, probe)),
        shots_for_confidence(_CL, dq),
        shots_for_confidence(_CL, d_p),
        shots_for_confidence(_CL, d_oam),
    )


def _figg1(workers: int):
    rows = parallel_map(_figg1_row, np.geomspace(10e-12, 1000e-12, 41), workers)
    return {
        "columns": [
            "delta_e", "n_qfi_ba", "n_cfi_p", "n_cfi_oam",
            "shots_q", "shots_p", "shots_oam",
        ],
        "rows": rows,
        "comments": [
            "nuclear spin (gaussian width 1 pm, moment mu_B/1836) vs probe size",
            f"theta={_G1_THETA!r}; backaction case with unit transverse Bloch component",
            "n_*: electrons for SNR=3; shots_*: shots for 87% confidence",
            "probe sizes start at 10 pm to stay in the paraxial regime",
        ],
        "plot": {"x": "delta_e", "xscale": "log", "yscale": "log",
                 "ylabel": "required electrons / shots"},
    }


FIGURES: dict[str, Callable[[int], dict]] = {
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5a": _fig5a,
    "fig5b": _fig5b,
    "figC1a": _figc1a,
    "figC1b": _figc1b,
    "figE1": _fige1,
    "figG1": _figg1,
}


def run_figure(
    name: str,
    out_dir: Path,
    workers: int = 1,
    seed: int = 0,
    plot: bool = True,
) -> dict:
    """Regenerate one preset; writes CSV, JSON sidecar, and optional PNG."""
    if name not in FIGURES:
        raise KeyError(
            f"unknown figure {name!r}; available: {', '.join(sorted(FIGURES))}"
        )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.monotonic()
    result = FIGURES[name](workers)
    elapsed = time.monotonic() - t0
    csv_path = out_dir / f"{name}.csv"
    comments = [f"spinsense {_version} figure preset {name}"] + result["comments"]
    write_csv(csv_path, comments, result["columns"], result["rows"])
    meta_path = out_dir / f"{name}.meta.json"
    write_sidecar(
        meta_path,
        {
            "schema_version": 1,
            "tool": "spinsense",
            "version": _version,
            "kind": "figure",
            "name": name,
            "seed": seed,
            "workers": workers,
            "rows": len(result["rows"]),
            "elapsed_seconds": elapsed,
        },
    )
    png_path: Optional[Path] = None
    if plot:
        from .plotting import render_figure

        png_path = out_dir / f"{name}.png"
        render_figure(result["columns"], result["rows"], result.get("plot", {}),
                      title=name, out_path=png_path)
    return {
        "csv": csv_path,
        "meta": meta_path,
        "png": png_path,
        "elapsed": elapsed,
        "columns": result["columns"],
        "rows": result["rows"],
    }
