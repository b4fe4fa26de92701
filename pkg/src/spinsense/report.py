"""Single-point sensitivity report over all configured quantities."""

from __future__ import annotations

from typing import Optional

from . import __version__ as _version
from .config import RunConfig
from .estimate import (
    DefocusMeasurement,
    EstimationConfig,
    MomentumMeasurement,
    OamMeasurement,
    PositionMeasurement,
    cfi,
    coupling_g2,
    coupling_g4,
    electrons_for_snr,
    mixing_parameter,
    qfi,
)
from .discriminate import (
    defocus_trace_distance,
    momentum_reduction_factor,
    oam_trace_distance,
    quantum_trace_distance_ba,
    quantum_trace_distance_nb,
    shots_for_confidence,
    success_probability,
)
from .model import phase_parameter

__all__ = ["sensitivity_report"]


def _classical_distance(run: RunConfig, theta: float) -> Optional[float]:
    m = run.measurement
    t = run.sample.transverse
    if isinstance(m, PositionMeasurement):
        return 0.0
    if isinstance(m, MomentumMeasurement):
        return theta * t * momentum_reduction_factor(run.density, run.probe)
    if isinstance(m, OamMeasurement):
        return oam_trace_distance(run.sample.mode, theta, t, run.density, run.probe)
    if isinstance(m, DefocusMeasurement):
        if run.sample.mode == "ba":
            return None  # defocus imaging with backaction is out of model
        return defocus_trace_distance(
            m.z, m.f, theta, t, run.probe, run.density
        ).value
    return None


def sensitivity_report(run: RunConfig) -> dict:
    """Assemble the full JSON-ready report for a single configuration."""
    theta = phase_parameter(run.sample, run.density)
    g2 = coupling_g2(run.density, run.probe)
    g4 = coupling_g4(run.density, run.probe)
    est = EstimationConfig(
        sample=run.sample, probe=run.probe, density=run.density,
        measurement=run.measurement,
    )
    try:
        cfi_value: Optional[float] = cfi(est)
    except ValueError:
        cfi_value = None
    qfi_value = qfi(est)

    if run.sample.mode == "nb":
        dq = quantum_trace_distance_nb(theta, run.sample.transverse, run.density, run.probe)
        dq_case = ""
    else:
        dq = quantum_trace_distance_ba(theta, run.sample.bloch, run.density, run.probe)
        dq_case = dq.case
    d_meas = _classical_distance(run, theta)

    electrons = None
    if cfi_value is not None and cfi_value > 0:
        electrons = electrons_for_snr(run.snr, theta, cfi_value)
    electrons_quantum = electrons_for_snr(run.snr, theta, qfi_value) if qfi_value > 0 else None

    shots = None
    if d_meas is not None and d_meas > 0:
        shots = shots_for_confidence(run.confidence, d_meas)
    shots_quantum = shots_for_confidence(run.confidence, dq.value) if dq.value > 0 else None

    return {
        "schema_version": 1,
        "tool": "spinsense",
        "version": _version,
        "mode": run.sample.mode,
        "measurement": run.measurement.kind,
        "paraxial_valid": run.probe.paraxial_valid,
        "theta": theta,
        "chi": run.probe.chi(run.density),
        "coupling_g2": g2,
        "coupling_g4": g4,
        "mixing": mixing_parameter(run.density, run.probe),
        "qfi": qfi_value,
        "cfi": cfi_value,
        "quantum_trace_distance": dq.value,
        "quantum_trace_distance_perturbative": dq.perturbative,
        "quantum_trace_distance_case": dq_case,
        "trace_distance": d_meas,
        "success_probability": success_probability(d_meas) if d_meas is not None else None,
        "snr": run.snr,
        "confidence": run.confidence,
        "electrons_for_snr": electrons,
        "electrons_for_snr_quantum": electrons_quantum,
        "shots_for_confidence": shots,
        "shots_for_confidence_quantum": shots_quantum,
    }
