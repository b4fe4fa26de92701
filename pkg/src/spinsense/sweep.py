"""Sweep engine: deterministic grids, worker pools, CSV and sidecar output.

Grid points are evaluated independently (optionally across a process pool)
and reassembled by grid index, so the emitted rows never depend on worker
count or completion order.  Monte Carlo seeds are derived per grid point
from the master seed for the same reason.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__ as _version
from .config import RunConfig
from .estimate import (
    DefocusMeasurement,
    EstimationConfig,
    MomentumMeasurement,
    OamMeasurement,
    ball_g2_mc,
    cfi,
    coupling_g2,
    electrons_for_snr,
    qfi,
)
from .discriminate import (
    defocus_trace_distance,
    momentum_reduction_factor,
    oam_trace_distance,
    quantum_trace_distance_ba,
    quantum_trace_distance_nb,
    shots_for_confidence,
)
from .model import CONSTANTS, UniformBallDensity, Probe, phase_parameter
from .specfun import McSpec

__all__ = ["run_sweep", "parallel_map", "write_csv", "write_sidecar", "grid_values"]


def parallel_map(fn: Callable, items: Sequence, workers: int) -> list:
    """Order-preserving map, inline or across a process pool."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def _format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))  # shortest round-trip decimal


def write_csv(path: Path, comments: Sequence[str], header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(v) for v in row) + "\n")


def write_sidecar(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def grid_values(lo: float, hi: float, points: int, log: bool) -> np.ndarray:
    if log:
        return np.geomspace(lo, hi, points)
    return np.linspace(lo, hi, points)


def _point_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence((master, index)).generate_state(1)[0])


def _apply_sweep_value(run: RunConfig, value: float) -> RunConfig:
    var = run.sweep_variable
    if var == "chi":
        probe = Probe(
            delta_e=value * run.density.width,
            lambda0=run.probe.lambda0,
            energy_keV=run.probe.energy_keV,
        )
        return replace(run, probe=probe)
    if var == "delta_e":
        probe = Probe(
            delta_e=value, lambda0=run.probe.lambda0, energy_keV=run.probe.energy_keV
        )
        return replace(run, probe=probe)
    if var == "z":
        m = run.measurement
        return replace(run, measurement=DefocusMeasurement(z=value * m.f, f=m.f))
    if var == "p_max":
        m = run.measurement
        scale = CONSTANTS.hbar / run.density.width
        return replace(
            run, measurement=MomentumMeasurement(p_max=value * scale, pixel=m.pixel)
        )
    if var == "pixel":
        m = run.measurement
        scale = CONSTANTS.hbar / run.density.width
        return replace(
            run, measurement=MomentumMeasurement(p_max=m.p_max, pixel=value * scale)
        )
    raise ValueError(f"unknown sweep variable {var!r}")


def sweep_columns(run: RunConfig) -> list[str]:
    var = run.sweep_variable or "chi"
    if run.scenario == "estimate":
        cols = [var, "chi", "theta", "coupling_g2", "qfi", "cfi", "n_qfi", "n_cfi"]
        if isinstance(run.density, UniformBallDensity) and run.ball_g2_method == "mc":
            cols += ["coupling_g2_mc", "coupling_g2_mc_stderr"]
        return cols
    return [var, "chi", "theta", "dq", "dq_perturbative", "d_classical", "shots_q", "shots_classical"]


def _eval_sweep_point(args) -> tuple:
    run, index, value = args
    point = _apply_sweep_value(run, value)
    theta = phase_parameter(point.sample, point.density)
    chi = point.probe.chi(point.density)
    if point.scenario == "estimate":
        est = EstimationConfig(
            sample=point.sample, probe=point.probe, density=point.density,
            measurement=point.measurement,
        )
        g2 = coupling_g2(point.density, point.probe)
        qfi_v = qfi(est)
        cfi_v = cfi(est)
        row = [
            value, chi, theta, g2, qfi_v, cfi_v,
            electrons_for_snr(point.snr, theta, qfi_v),
            electrons_for_snr(point.snr, theta, cfi_v) if cfi_v > 0 else None,
        ]
        if isinstance(point.density, UniformBallDensity) and point.ball_g2_method == "mc":
            spec = McSpec(
                samples=point.mc_samples,
                seed=_point_seed(point.mc_seed, index),
                batch_count=point.mc_batches,
            )
            mc_v, mc_err = ball_g2_mc(point.density.width, point.probe, spec)
            row += [mc_v, mc_err]
        return tuple(row)

    t = point.sample.transverse
    if point.sample.mode == "nb":
        dq = quantum_trace_distance_nb(theta, t, point.density, point.probe)
    else:
        dq = quantum_trace_distance_ba(theta, point.sample.bloch, point.density, point.probe)
    m = point.measurement
    if isinstance(m, OamMeasurement):
        d_cl = oam_trace_distance(point.sample.mode, theta, t, point.density, point.probe)
    elif isinstance(m, MomentumMeasurement):
        d_cl = theta * t * momentum_reduction_factor(point.density, point.probe)
    elif isinstance(m, DefocusMeasurement):
        d_cl = defocus_trace_distance(
            m.z, m.f, theta, t, point.probe, point.density
        ).value
    else:
        d_cl = 0.0
    shots_q = shots_for_confidence(point.confidence, dq.value) if dq.value > 0 else None
    shots_cl = shots_for_confidence(point.confidence, d_cl) if d_cl > 0 else None
    return (value, chi, theta, dq.value, dq.perturbative, d_cl, shots_q, shots_cl)


def run_sweep(
    run: RunConfig,
    out_dir: Path,
    name: str = "sweep",
    seed: Optional[int] = None,
    workers: int = 1,
) -> dict:
    """Evaluate the configured sweep and write CSV plus JSON sidecar.

    Returns a dict with the output paths and timing.
    """
    if not run.has_sweep:
        raise ValueError("configuration has no sweep block")
    if seed is not None:
        run = replace(run, mc_seed=seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    values = grid_values(run.sweep_lo, run.sweep_hi, run.sweep_points, run.sweep_log)

    t0 = time.monotonic()
    tasks = [(run, i, float(v)) for i, v in enumerate(values)]
    rows = parallel_map(_eval_sweep_point, tasks, workers)
    elapsed = time.monotonic() - t0

    header = sweep_columns(run)
    comments = [
        f"spinsense {_version} sweep scenario={run.scenario}",
        f"sweep {run.sweep_variable} in [{run.sweep_lo!r}, {run.sweep_hi!r}] "
        f"points={run.sweep_points} log={run.sweep_log}",
        f"density={type(run.density).__name__} width={run.density.width!r} "
        f"mode={run.sample.mode} moment={run.sample.moment_in_bohr_magnetons!r}",
        f"measurement={run.measurement.kind} seed={run.mc_seed}",
        "columns documented in README; lengths in metres, momenta sweep values "
        "in units of hbar/width, z in units of f",
    ]
    csv_path = out_dir / f"{name}.csv"
    write_csv(csv_path, comments, header, rows)
    sidecar = {
        "schema_version": 1,
        "tool": "spinsense",
        "version": _version,
        "kind": "sweep",
        "name": name,
        "config": run.raw,
        "seed": run.mc_seed,
        "workers": workers,
        "rows": len(rows),
        "elapsed_seconds": elapsed,
    }
    meta_path = out_dir / f"{name}.meta.json"
    write_sidecar(meta_path, sidecar)
    return {"csv": csv_path, "meta": meta_path, "elapsed": elapsed, "header": header, "rows": rows}
