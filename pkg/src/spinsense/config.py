"""Run configuration: YAML schema, validation, and domain-object builders.

A run is described by one human-editable YAML file; command-line
``--set key.path=value`` overrides are applied on top of the file before
validation.  See README for the schema and worked examples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import yaml

from .model import (
    CONSTANTS,
    GaussianDensity,
    Hydrogen1sDensity,
    Probe,
    Sample,
    SpinDensity,
    UniformBallDensity,
)
from .estimate import (
    DefocusMeasurement,
    Measurement,
    MomentumMeasurement,
    OamMeasurement,
    PositionMeasurement,
)

__all__ = ["ConfigError", "RunConfig", "load_config", "apply_overrides"]

DENSITY_KINDS = ("gaussian", "ball", "hydrogen")
MEASUREMENT_KINDS = ("position", "momentum", "oam", "defocus")
SWEEP_VARIABLES = ("chi", "delta_e", "z", "p_max", "pixel")


class ConfigError(ValueError):
    """Invalid run configuration; carries one message per offending field."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass
class RunConfig:
    scenario: str
    sample: Sample
    density: SpinDensity
    probe: Probe
    measurement: Measurement
    sweep_variable: Optional[str] = None
    sweep_lo: float = 0.0
    sweep_hi: float = 0.0
    sweep_points: int = 0
    sweep_log: bool = False
    snr: float = 3.0
    confidence: float = 0.87
    mc_samples: int = 1_000_000
    mc_seed: int = 0
    mc_batches: int = 20
    ball_g2_method: str = "quadrature"
    raw: dict = field(default_factory=dict)

    @property
    def has_sweep(self) -> bool:
        return self.sweep_variable is not None


def _get(d, path, default=None):
    cur = d
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            return default
        cur = cur[part]
    return cur


def _expect_number(value, path, problems, positive=False):
    if isinstance(value, str):
        # YAML leaves dot-less exponent forms like 2e-9 as strings
        try:
            value = float(value)
        except ValueError:
            pass
    if value is None or isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f"{path}: expected a number, got {value!r}")
        return None
    v = float(value)
    if positive and not v > 0:
        problems.append(f"{path}: must be positive, got {v!r}")
        return None
    return v


def _build_density(d: dict, problems) -> Optional[SpinDensity]:
    kind = _get(d, "density.kind", "gaussian")
    if kind not in DENSITY_KINDS:
        problems.append(f"density.kind: must be one of {DENSITY_KINDS}, got {kind!r}")
        return None
    width = _expect_number(_get(d, "density.width"), "density.width", problems, positive=True)
    if width is None:
        return None
    cls = {
        "gaussian": GaussianDensity,
        "ball": UniformBallDensity,
        "hydrogen": Hydrogen1sDensity,
    }[kind]
    return cls(width)


def _build_sample(d: dict, problems) -> Optional[Sample]:
    mode = _get(d, "sample.mode", "nb")
    if mode not in ("nb", "ba"):
        problems.append(f"sample.mode: must be 'nb' or 'ba', got {mode!r}")
        return None
    moment = _expect_number(_get(d, "sample.moment", 1.0), "sample.moment", problems, positive=True)
    if moment is None:
        return None
    vec_key = "sample.orientation" if mode == "nb" else "sample.bloch"
    default = [1.0, 0.0, 0.0]
    vec = _get(d, vec_key, default)
    if not (isinstance(vec, (list, tuple)) and len(vec) == 3):
        problems.append(f"{vec_key}: expected a 3-vector, got {vec!r}")
        return None
    try:
        if mode == "nb":
            return Sample(moment_in_bohr_magnetons=moment, mode="nb", orientation=tuple(map(float, vec)))
        return Sample(moment_in_bohr_magnetons=moment, mode="ba", bloch=tuple(map(float, vec)))
    except ValueError as exc:
        problems.append(f"{vec_key}: {exc}")
        return None


def _build_probe(d: dict, problems) -> Optional[Probe]:
    delta_e = _expect_number(_get(d, "probe.delta_e"), "probe.delta_e", problems, positive=True)
    lambda0 = _expect_number(_get(d, "probe.lambda0", 2.5e-12), "probe.lambda0", problems, positive=True)
    energy = _get(d, "probe.energy_keV")
    if delta_e is None or lambda0 is None:
        return None
    return Probe(delta_e=delta_e, lambda0=lambda0, energy_keV=energy)


def _build_measurement(d: dict, density: Optional[SpinDensity], problems) -> Optional[Measurement]:
    kind = _get(d, "measurement.kind", "momentum")
    if kind not in MEASUREMENT_KINDS:
        problems.append(
            f"measurement.kind: must be one of {MEASUREMENT_KINDS}, got {kind!r}"
        )
        return None
    if kind == "position":
        return PositionMeasurement()
    if kind == "oam":
        return OamMeasurement()
    if kind == "momentum":
        # p_max and pixel are configured in units of hbar/width
        scale = CONSTANTS.hbar / density.width if density else None
        p_max = _get(d, "measurement.p_max")
        pixel = _get(d, "measurement.pixel")
        kwargs = {}
        if p_max is not None:
            v = _expect_number(p_max, "measurement.p_max", problems, positive=True)
            if v is not None and scale:
                kwargs["p_max"] = v * scale
        if pixel is not None:
            v = _expect_number(pixel, "measurement.pixel", problems, positive=True)
            if v is not None and scale:
                kwargs["pixel"] = v * scale
        return MomentumMeasurement(**kwargs)
    f = _expect_number(_get(d, "measurement.f", 2e-3), "measurement.f", problems, positive=True)
    z_rel = _expect_number(_get(d, "measurement.z", 1.0), "measurement.z", problems)
    if f is None or z_rel is None:
        return None
    if not 0.0 <= z_rel <= 1.0:
        problems.append(f"measurement.z: must lie in [0, 1] (units of f), got {z_rel!r}")
        return None
    return DefocusMeasurement(z=z_rel * f, f=f)


def parse_config(data: dict) -> RunConfig:
    """Validate a configuration mapping and build the domain objects."""
    problems: list[str] = []
    if not isinstance(data, dict):
        raise ConfigError(["configuration root must be a mapping"])

    scenario = data.get("scenario", "estimate")
    if scenario not in ("estimate", "discriminate"):
        problems.append(
            f"scenario: must be 'estimate' or 'discriminate', got {scenario!r}"
        )

    density = _build_density(data, problems)
    sample = _build_sample(data, problems)
    probe = _build_probe(data, problems)
    measurement = _build_measurement(data, density, problems)

    cfg = dict(
        sweep_variable=None, sweep_lo=0.0, sweep_hi=0.0,
        sweep_points=0, sweep_log=False,
    )
    sweep = data.get("sweep")
    if sweep is not None:
        var = _get(data, "sweep.variable")
        if var not in SWEEP_VARIABLES:
            problems.append(f"sweep.variable: must be one of {SWEEP_VARIABLES}, got {var!r}")
        lo = _expect_number(_get(data, "sweep.lo"), "sweep.lo", problems)
        hi = _expect_number(_get(data, "sweep.hi"), "sweep.hi", problems)
        points = _get(data, "sweep.points")
        if not isinstance(points, int) or points < 2:
            problems.append(f"sweep.points: must be an integer >= 2, got {points!r}")
        if lo is not None and hi is not None and not lo < hi:
            problems.append(f"sweep: lo must be < hi, got {lo!r} >= {hi!r}")
        log = bool(_get(data, "sweep.log", False))
        if log and lo is not None and lo <= 0:
            problems.append("sweep.lo: must be positive for a log sweep")
        cfg.update(
            sweep_variable=var if var in SWEEP_VARIABLES else None,
            sweep_lo=lo or 0.0, sweep_hi=hi or 0.0,
            sweep_points=points if isinstance(points, int) else 0,
            sweep_log=log,
        )
        if var in ("z",) and measurement is not None and measurement.kind != "defocus":
            problems.append("sweep.variable 'z' requires a defocus measurement")
        if var in ("p_max", "pixel") and measurement is not None and measurement.kind != "momentum":
            problems.append(f"sweep.variable {var!r} requires a momentum measurement")

    snr = _expect_number(data.get("snr", 3.0), "snr", problems, positive=True)
    confidence = _expect_number(data.get("confidence", 0.87), "confidence", problems)
    if confidence is not None and not 0.5 < confidence < 1.0:
        problems.append(f"confidence: must lie in (0.5, 1), got {confidence!r}")

    mc_samples = _get(data, "mc.samples", 1_000_000)
    mc_seed = _get(data, "mc.seed", 0)
    mc_batches = _get(data, "mc.batches", 20)
    for name, val in (("mc.samples", mc_samples), ("mc.seed", mc_seed), ("mc.batches", mc_batches)):
        if not isinstance(val, int):
            problems.append(f"{name}: must be an integer, got {val!r}")
    ball_method = data.get("ball_g2_method", "quadrature")
    if ball_method not in ("quadrature", "mc"):
        problems.append(
            f"ball_g2_method: must be 'quadrature' or 'mc', got {ball_method!r}"
        )

    # scenario/measurement compatibility for sweeps and reports
    if measurement is not None and scenario == "estimate" and measurement.kind in ("position", "defocus") and sweep is not None:
        problems.append(
            f"scenario 'estimate' cannot sweep a {measurement.kind} measurement "
            "(its Fisher information is zero or not modeled)"
        )
    if measurement is not None and scenario == "discriminate" and measurement.kind == "position" and sweep is not None:
        problems.append(
            "scenario 'discriminate' cannot sweep a position measurement "
            "(its trace distance is identically zero)"
        )
    if (
        measurement is not None
        and sample is not None
        and measurement.kind == "defocus"
        and sample.mode == "ba"
        and scenario == "discriminate"
    ):
        problems.append(
            "defocus-plane discrimination with backaction is not modeled; "
            "use mode 'nb' or a momentum/oam measurement"
        )

    if problems:
        raise ConfigError(problems)

    return RunConfig(
        scenario=scenario,
        sample=sample,
        density=density,
        probe=probe,
        measurement=measurement,
        snr=snr,
        confidence=confidence,
        mc_samples=int(mc_samples) if isinstance(mc_samples, int) else 1_000_000,
        mc_seed=int(mc_seed) if isinstance(mc_seed, int) else 0,
        mc_batches=int(mc_batches) if isinstance(mc_batches, int) else 20,
        ball_g2_method=ball_method,
        raw=data,
        **cfg,
    )


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    """Apply ``key.path=value`` overrides; values are parsed as YAML scalars."""
    problems = []
    for item in overrides:
        if "=" not in item:
            problems.append(f"--set {item!r}: expected key.path=value")
            continue
        path, _, raw = item.partition("=")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError:
            problems.append(f"--set {item!r}: unparseable value")
            continue
        if isinstance(value, str):
            try:
                value = float(value)  # accept dot-less exponents like 2e-9
            except ValueError:
                pass
        cur = data
        parts = path.split(".")
        for part in parts[:-1]:
            cur = cur.setdefault(part, {})
            if not isinstance(cur, dict):
                problems.append(f"--set {item!r}: {part} is not a mapping")
                break
        else:
            cur[parts[-1]] = value
    if problems:
        raise ConfigError(problems)
    return data


def load_config(path: str, overrides: Optional[list[str]] = None) -> RunConfig:
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError([f"invalid YAML: {exc}"]) from exc
    if data is None:
        data = {}
    if overrides:
        data = apply_overrides(data, overrides)
    return parse_config(data)
