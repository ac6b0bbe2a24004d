"""Scenario configuration, figure presets, execution and file output.

A scenario config is a nested mapping (YAML or JSON on disk); every
quantity is in atomic units.  ``probe.chirp_depth`` may be the string
``"matched"`` (``g sin^2 theta`` for the scenario's medium and control) and
``probe.chirp_freq`` may be ``"control"`` (the control's chirp frequency).
"""

from __future__ import annotations

import copy
import csv
import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import adiabatic as ad
from .diagnostics import fwhm, ladder_peaks
from .errors import ChirpEITError, ValidationError
from .floquet import FloquetEngine, PropagationInfo, convergence_report, reconstruct_time, susceptibility
from .model import (
    ControlFieldSpec,
    FloquetSpectrum,
    FrequencyGrid,
    GeneralPeriodic,
    MediumParams,
    ProbePulseSpec,
    SinusoidalChirp,
    derive_kappa2,
    incoming_spectrum,
    mixing_angle,
)
from .specfun import bessel_j

__all__ = [
    "OutputFlags",
    "ScenarioConfig",
    "RunArtifacts",
    "PRESETS",
    "preset",
    "config_from_dict",
    "load_config",
    "validate_config",
    "run_scenario",
    "emit",
    "PEAK_ORDERS",
]

log = logging.getLogger(__name__)

PEAK_ORDERS = tuple(range(-6, 7))
DEFAULT_N_OMEGA = 512
DEFAULT_LADDER = 20
DEFAULT_TIME_POINTS = 4096
DEFAULT_SNAPSHOT_Z = 201

_FIG2_MEDIUM = {
    "atom_density": 2e-13,
    "dipole_ab": 1.0,
    "omega1": 1e-1,
    "gamma_ab": 1e-9,
    "gamma_cb": 1e-14,
    "delta1": 0.0,
    "delta2": 0.0,
}
_FIG2_CAPTION = (
    "Omega_2=10^{-8}, Omega_10=10^{-10}, g=5, Delta=2x10^{-9}, gamma_ab=10^{-9}, gamma_cb=10^{-14}, "
    "delta_1=delta_2=0, omega_1=10^{-1}, N=2x10^{-13}, d_ab=1, z=2x10^{10}; ... Gaussian of time width tau=8x10^9"
)


def _fig2() -> dict:
    return {
        "name": "fig2",
        "medium": dict(_FIG2_MEDIUM),
        "control": {"omega2": 1e-8, "phase": {"kind": "sinusoidal", "g": 5.0, "delta": 2e-9}},
        "probe": {"omega10": 1e-10, "tau": 8e9, "chirp_depth": 0.0, "chirp_freq": 0.0},
        "z_end": 2e10,
        "z_samples": [0.0, 2e10],
        "t_samples": [],
        "grid": {"n_omega": DEFAULT_N_OMEGA, "ladder": DEFAULT_LADDER},
        "outputs": {"spectrum": True, "susceptibility": True, "projection": True},
        "provenance": {"all": _FIG2_CAPTION},
    }


def _fig3() -> dict:
    cfg = _fig2()
    cfg["name"] = "fig3"
    cfg["t_samples"] = [0.0, 2e10, 4e10, 6e10, 1e11]
    cfg["outputs"] = {"spectrum": True, "snapshot": True, "trace": True}
    cfg["provenance"]["t_samples"] = (
        "taken at t=0, solid red line; t=2x10^{10}, dashed green line, t=4x10^{10}, short-dashed blue line, "
        "t=6x10^{10}, dotted violet line; t=10^{11}, dash-dotted light blue line"
    )
    return cfg


def _fig4() -> dict:
    cfg = _fig2()
    cfg["name"] = "fig4"
    cfg["z_samples"] = [0.0, 2e10]
    cfg["probe"].update(chirp_depth="matched", chirp_freq="control")
    cfg["provenance"]["probe"] = "for an incoming probe pulse (z=0) with the chirp depth g sin^2 theta"
    return cfg


def _fig5() -> dict:
    cfg = _fig2()
    cfg["name"] = "fig5"
    cfg["z_end"] = 6e10
    cfg["z_samples"] = [0.0, 1.2e10, 6e10]
    cfg["t_samples"] = [0.0, 1e11, 2e11, 3e11, 4e11, 5e11]
    cfg["probe"].update(chirp_depth="matched", chirp_freq=1.2e-9)
    cfg["outputs"]["snapshot"] = True
    cfg["provenance"].update(
        probe="chirp depth g'=g sin^2 theta but the chirp frequency Delta'=1.2x10^{-9}",
        control="different from that of the control field delta=2x10{-9}",
        reading="caption's delta=2x10{-9} is the control chirp frequency Delta=2x10^{-9}",
        z_samples="the spectrum at z=1.2x10^{10} ...; the spectrum at z=6x10^{10}",
        t_samples="taken at from left to right t=0,10^{11},2x10^{11},3x10^{11},4x10^{11},5x10^{11}",
    )
    return cfg


def _fig6() -> dict:
    cfg = _fig2()
    cfg["name"] = "fig6"
    cfg["z_end"] = 1e11
    cfg["z_samples"] = [0.0, 1e11]
    cfg["probe"]["tau"] = 1e9
    cfg["provenance"].update(probe="incoming Gaussian pulse of width tau=10^9", z_samples="the pulse for z=10^{11}")
    return cfg


def _fig7() -> dict:
    cfg = _fig2()
    cfg["name"] = "fig7"
    cfg["z_end"] = 4e10
    cfg["z_samples"] = [0.0, 8e9, 4e10]
    cfg["probe"].update(tau=1e9, chirp_depth="matched", chirp_freq=2e-9)
    cfg["provenance"].update(
        probe="incoming chirped pulse of width tau=10^9, chirp depth g sin^2 theta (g=5) and chirp frequency 2x10^{-9}",
        z_samples="the pulse for z=8x10^9, dashed green line; z=4x10^{10}",
    )
    return cfg


def _fig8() -> dict:
    cfg = _fig7()
    cfg["name"] = "fig8"
    # caption prints "Omega_2=3x10^8"; the quoted z0=3.06x10^9 requires 3x10^{-8}
    cfg["control"]["omega2"] = 3e-8
    cfg["z_samples"] = [m * 1.53e9 for m in range(7)]
    cfg["z_end"] = cfg["z_samples"][-1]
    cfg["provenance"].update(
        control="for a stronger control field Omega_2=3x10^8",
        reading="Omega_2 taken as 3x10^{-8}; the quoted z0=3.06x10^9 is only reached with the negative exponent",
        z_samples="z=4x1.53x10^9 ... z=5x1.53x10^9 (multiples of z0/2, sampled 0..6)",
        probe="an incoming chirped pulse as in Fig. 6 [the chirped pulse: width tau=10^9, chirp depth g sin^2 theta "
              "(g=5), chirp frequency 2x10^{-9}; sin^2 theta of this control field]",
    )
    return cfg


PRESETS = {
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
    "fig8": _fig8,
}


def preset(name: str) -> dict:
    """Raw config mapping of a named figure preset."""
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValidationError(f"unknown scenario {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass(frozen=True)
class OutputFlags:
    spectrum: bool = True
    snapshot: bool = False
    susceptibility: bool = False
    projection: bool = False
    convergence: bool = False
    trace: bool = False


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    medium: MediumParams
    control: ControlFieldSpec
    probe: ProbePulseSpec
    z_end: float
    z_samples: tuple
    t_samples: tuple
    grid: FrequencyGrid
    outputs: OutputFlags = OutputFlags()
    snapshot_z_points: int = DEFAULT_SNAPSHOT_Z
    time_points: int = DEFAULT_TIME_POINTS
    convergence_ladders: tuple = ()
    provenance: dict = field(default_factory=dict, compare=False)
    raw: dict = field(default_factory=dict, compare=False, repr=False)


def _num(x: Any, what: str) -> float:
    try:
        return float(x)
    except (TypeError, ValueError):
        raise ValidationError(f"{what}: expected a number, got {x!r}") from None


def _cplx(x: Any, what: str) -> complex:
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(_num(x[0], what), _num(x[1], what))
    if isinstance(x, str):
        try:
            return complex(x.replace(" ", ""))
        except ValueError:
            raise ValidationError(f"{what}: expected a complex number, got {x!r}") from None
    return complex(_num(x, what))


def _medium(d: dict) -> MediumParams:
    keys = ("atom_density", "dipole_ab", "omega1", "gamma_ab", "gamma_cb", "delta1", "delta2")
    unknown = set(d) - set(keys)
    if unknown:
        raise ValidationError(f"medium: unknown keys {sorted(unknown)}")
    return MediumParams(**{k: _num(v, f"medium.{k}") for k, v in d.items()})


def _control(d: dict) -> ControlFieldSpec:
    ph = d.get("phase", {})
    kind = ph.get("kind", "sinusoidal")
    if kind == "sinusoidal":
        phase = SinusoidalChirp(_num(ph.get("g", 0.0), "control.phase.g"), _num(ph.get("delta"), "control.phase.delta"))
    elif kind == "general":
        coeffs = [_cplx(c, "control.phase.coefficients") for c in ph.get("coefficients", [])]
        phase = GeneralPeriodic(_num(ph.get("delta"), "control.phase.delta"), tuple(coeffs))
    else:
        raise ValidationError(f"control.phase.kind must be 'sinusoidal' or 'general', got {kind!r}")
    return ControlFieldSpec(_cplx(d.get("omega2", 0.0), "control.omega2"), phase)


def _probe(d: dict, medium: MediumParams, control: ControlFieldSpec) -> ProbePulseSpec:
    depth = d.get("chirp_depth", 0.0)
    freq = d.get("chirp_freq", 0.0)
    if depth == "matched":
        if not isinstance(control.phase, SinusoidalChirp):
            raise ValidationError("probe.chirp_depth 'matched' needs a sinusoidal control chirp")
        theta = mixing_angle(derive_kappa2(medium), control.omega2)
        depth = control.phase.g * theta.sin2
    if freq == "control":
        freq = control.delta
    return ProbePulseSpec(
        _cplx(d.get("omega10", 0.0), "probe.omega10"),
        _num(d.get("tau"), "probe.tau"),
        _num(depth, "probe.chirp_depth"),
        _num(freq, "probe.chirp_freq"),
        _num(d.get("center_time", 0.0), "probe.center_time"),
    )


def config_from_dict(d: dict) -> ScenarioConfig:
    """Build a :class:`ScenarioConfig`; raises :class:`ValidationError` on the first bad field."""
    d = copy.deepcopy(d)
    medium = _medium(d.get("medium", {}))
    control = _control(d.get("control", {}))
    probe = _probe(d.get("probe", {}), medium, control)
    g = d.get("grid", {}) or {}
    grid = FrequencyGrid(control.delta, int(g.get("n_omega", DEFAULT_N_OMEGA)), int(g.get("ladder", DEFAULT_LADDER)))
    outs = d.get("outputs", {}) or {}
    unknown = set(outs) - set(OutputFlags.__dataclass_fields__)
    if unknown:
        raise ValidationError(f"outputs: unknown flags {sorted(unknown)}")
    flags = OutputFlags(**{k: bool(v) for k, v in outs.items()})
    z_end = _num(d.get("z_end", 0.0), "z_end")
    return ScenarioConfig(
        name=str(d.get("name", "custom")),
        medium=medium,
        control=control,
        probe=probe,
        z_end=z_end,
        z_samples=tuple(_num(z, "z_samples") for z in d.get("z_samples", [0.0, z_end])),
        t_samples=tuple(_num(t, "t_samples") for t in d.get("t_samples", [])),
        grid=grid,
        outputs=flags,
        snapshot_z_points=int(d.get("snapshot_z_points", DEFAULT_SNAPSHOT_Z)),
        time_points=int(d.get("time_points", DEFAULT_TIME_POINTS)),
        convergence_ladders=tuple(int(s) for s in d.get("convergence_ladders", ())),
        provenance=dict(d.get("provenance", {})),
        raw=d,
    )


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(path: str | Path, base: dict | None = None) -> dict:
    """Read a YAML/JSON config mapping, optionally layered over ``base``."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ValidationError(f"config {path} must contain a mapping")
    return _merge(base, data) if base else data


def validate_config(config: ScenarioConfig | dict) -> list[str]:
    """Every violated precondition, as messages; an empty list means ok."""
    if isinstance(config, dict):
        try:
            config = config_from_dict(config)
        except (ChirpEITError, ValueError, TypeError) as exc:
            return [str(exc)]
    errors: list[str] = []
    cfg = config
    try:
        theta = mixing_angle(derive_kappa2(cfg.medium), cfg.control.omega2)
    except ValidationError as exc:
        errors.append(str(exc))
        theta = None
    if theta is not None and abs(cfg.probe.omega10) > 0.1 * abs(cfg.control.omega2):
        warnings.warn(f"{cfg.name}: weak-probe ratio |omega10|/|omega2| = "
                      f"{abs(cfg.probe.omega10) / abs(cfg.control.omega2):.3g} exceeds 0.1", stacklevel=2)
    if cfg.z_end < 0:
        errors.append(f"z_end must be >= 0, got {cfg.z_end}")
    bad_z = [z for z in cfg.z_samples if not 0 <= z <= cfg.z_end]
    if bad_z:
        errors.append(f"z_samples outside [0, z_end={cfg.z_end:g}]: {bad_z}")
    grid = cfg.grid
    width = 1.0 / cfg.probe.tau
    if grid.d_omega * 8 > width:
        errors.append(f"under-resolved spectrum: fewer than 8 base-band samples across 1/tau={width:.3e}")
    reach = 8.0 * width
    if cfg.probe.chirp_depth:
        reach += (math.ceil(abs(cfg.probe.chirp_depth)) + 8) * cfg.probe.chirp_freq
    if width > grid.delta * grid.n_omega / 2 or reach > (grid.ladder + 0.5) * grid.delta:
        errors.append(f"under-resolved spectrum: pulse extends to {reach:.3e}, ladder edge at "
                      f"{(grid.ladder + 0.5) * grid.delta:.3e}")
    extent = cfg.control.phase.extent
    if cfg.probe.chirp_depth:
        extent = max(extent, abs(cfg.probe.chirp_depth) * cfg.probe.chirp_freq / grid.delta)
    if grid.ladder < math.ceil(extent) + 8:
        errors.append(f"insufficient ladder truncation: S={grid.ladder} < ceil({extent:.3g}) + 8")
    if cfg.outputs.snapshot and cfg.snapshot_z_points < 2:
        errors.append("snapshot output needs snapshot_z_points >= 2")
    if cfg.outputs.convergence and cfg.convergence_ladders and len(cfg.convergence_ladders) < 2:
        errors.append("convergence needs at least two ladder settings")
    return errors


@dataclass
class RunArtifacts:
    config: ScenarioConfig
    spectra: dict = field(default_factory=dict)  # z -> FloquetSpectrum
    predicted: dict = field(default_factory=dict)  # z -> FloquetSpectrum (adiabatic projection)
    snapshots: dict = field(default_factory=dict)  # t -> (z grid, complex field)
    traces: dict = field(default_factory=dict)  # z -> (t grid, complex field)
    eigenvalues: np.ndarray | None = None  # (n_omega, 2S+1) of w + N^d
    susceptibility: tuple | None = None  # (freqs, chi)
    convergence: list = field(default_factory=list)
    peak_tables: dict = field(default_factory=dict)  # z -> list of rows
    scalars: dict = field(default_factory=dict)  # name -> {"value", "formula"}


def _scalar(out: dict, name: str, value, formula: str) -> None:
    if isinstance(value, complex):
        value = {"re": value.real, "im": value.imag, "abs": abs(value)}
    out[name] = {"value": value, "formula": formula}


def time_grid(cfg: ScenarioConfig, v_g: float) -> np.ndarray:
    """Default reconstruction window covering the pulse from entry to the last z."""
    p = cfg.probe
    z_max = max(cfg.z_samples) if cfg.z_samples else 0.0
    return np.linspace(p.center_time - 6 * p.tau, p.center_time + z_max / v_g + 6 * p.tau, cfg.time_points)


def run_scenario(config: ScenarioConfig) -> RunArtifacts:
    """Incoming spectrum -> propagation to every z sample -> reconstructions and cross-checks."""
    errors = validate_config(config)
    if errors:
        raise ValidationError("; ".join(errors))
    cfg = config
    art = RunArtifacts(cfg)
    kappa2 = derive_kappa2(cfg.medium)
    theta = mixing_angle(kappa2, cfg.control.omega2)
    sc = art.scalars
    _scalar(sc, "kappa2", kappa2, "kappa2 = N |d_ab|^2 omega1 / (2 eps0 hbar), eps0 = 1/(4 pi)")
    _scalar(sc, "tan2theta", theta.tan2, "tan2theta = kappa2 / |omega2|^2")
    _scalar(sc, "sin2theta", theta.sin2, "sin2theta = tan2theta / (1 + tan2theta)")
    _scalar(sc, "cos2theta", theta.cos2, "cos2theta = 1 / (1 + tan2theta)")
    _scalar(sc, "v_g", theta.v_g, "v_g = c cos2theta")
    sinusoidal = isinstance(cfg.control.phase, SinusoidalChirp)
    if sinusoidal:
        _scalar(sc, "z0", ad.oscillation_period(cfg.medium, cfg.control),
                "z0 = 2 pi c cos2theta / Delta")

    engine = FloquetEngine(cfg.medium, cfg.control, cfg.grid)
    inc = incoming_spectrum(cfg.probe, cfg.grid)
    _scalar(sc, "expm_columns", int(engine.use_expm.sum()), "columns with cond(U) > 1e8 or reconstruction residual > 1e-8")
    _scalar(sc, "max_condition_U", float(np.max(engine.cond_u)), "max over columns of cond(U)")
    _scalar(sc, "min_imag_eigenvalue", float(np.min(engine.eigenvalues.imag)), "min Im N^d over the base band")
    art.eigenvalues = engine.grid.base_freqs[:, None] + engine.eigenvalues

    projection = None
    if cfg.outputs.projection and sinusoidal:
        projection = ad.project_onto_optimal(cfg.probe, cfg.control, cfg.medium)
        _scalar(sc, "overlap_V", projection.coefficient,
                "V = <optimal|probe>, normalised chirped-Gaussian Bessel double sum")
        _scalar(sc, "overlap_V_quadrature", ad.overlap_quadrature(projection.optimal, cfg.probe),
                "V by trapezoid quadrature of conj(optimal(t)) probe(t)")
        _scalar(sc, "residual_norm", projection.residual_norm, "sqrt(1 - |V|^2)")
        _scalar(sc, "optimal_chirp_depth", projection.optimal.chirp_depth, "g sin2theta")

    powers = {}
    for z in cfg.z_samples:
        info = PropagationInfo(z)
        out = engine.propagate(inc, z, info=info)
        art.spectra[z] = out
        powers[z] = out.power()
        if info.clamped_modes:
            log.warning("z=%g: %d mode(s) clamped as fully absorbed", z, info.clamped_modes)
        if projection is not None:
            art.predicted[z] = ad.matched_spectrum(projection.optimal, cfg.control, cfg.medium, z, cfg.grid) \
                * projection.coefficient
            pred = projection.peak_heights(PEAK_ORDERS, cfg.control)
        else:
            pred = [None] * len(PEAK_ORDERS)
        rows = []
        for pk, pr in zip(ladder_peaks(out, PEAK_ORDERS), pred):
            rows.append({"order": pk.order, "target_freq": pk.target, "peak_freq": pk.freq,
                         "height": pk.height, "local_max": pk.is_local_max, "predicted": pr})
        art.peak_tables[z] = rows
    _scalar(sc, "spectral_power", {f"{z:.6e}": p for z, p in powers.items()}, "sum |Omega(z)|^2 d_omega")
    if cfg.z_samples:
        freqs, vals = art.spectra[max(cfg.z_samples)].flat()
        _scalar(sc, "fwhm_main_peak_end", fwhm(freqs, np.abs(vals)), "FWHM of the highest peak at the last z sample")

    if cfg.outputs.snapshot and cfg.t_samples:
        at = engine.propagator(inc)
        zs = np.linspace(0.0, cfg.z_end, cfg.snapshot_z_points)
        table = np.array([reconstruct_time(at(z), cfg.t_samples) for z in zs])
        for j, t in enumerate(cfg.t_samples):
            art.snapshots[t] = (zs, table[:, j])
    if cfg.outputs.trace:
        tg = time_grid(cfg, theta.v_g)
        for z, spec in art.spectra.items():
            art.traces[z] = (tg, reconstruct_time(spec, tg))
    if cfg.outputs.susceptibility:
        f = cfg.grid.flat_freqs
        art.susceptibility = (f, susceptibility(f, cfg.medium, cfg.control.omega2))
    if cfg.outputs.convergence:
        ladders = cfg.convergence_ladders or (max(cfg.grid.ladder - 5, 0), cfg.grid.ladder)
        z = max(cfg.z_samples) if cfg.z_samples else cfg.z_end
        art.convergence = convergence_report(cfg.medium, cfg.control, lambda g: incoming_spectrum(cfg.probe, g),
                                             z, ladders, base_grid=cfg.grid)
    return art


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header: list[str], rows) -> None:
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _spectrum_rows(spec: FloquetSpectrum):
    freqs, vals = spec.flat()
    for f, v in zip(freqs, vals):
        yield (f, v.real, v.imag, abs(v))


def emit(artifacts: RunArtifacts, out_dir: str | Path) -> list[Path]:
    """Write tables and ``summary.json``; identical inputs give identical bytes."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    cfg = artifacts.config
    flags = cfg.outputs
    written: list[Path] = []
    index: dict[str, Any] = {}
    if flags.spectrum:
        for z, spec in sorted(artifacts.spectra.items()):
            p = out / f"spectrum_z{z:.4e}.csv"
            _write_csv(p, ["frequency_au", "re", "im", "abs"], _spectrum_rows(spec))
            written.append(p)
            index.setdefault("spectrum", {})[p.name] = z
        if artifacts.eigenvalues is not None:
            p = out / "eigenvalues.csv"
            ev = artifacts.eigenvalues
            base = cfg.grid.base_freqs
            rows = ((base[i], k, ev[i, k].real, ev[i, k].imag) for i in range(ev.shape[0]) for k in range(ev.shape[1]))
            _write_csv(p, ["omega_au", "mode", "re", "im"], rows)
            written.append(p)
    if flags.projection:
        for z, spec in sorted(artifacts.predicted.items()):
            p = out / f"predicted_z{z:.4e}.csv"
            _write_csv(p, ["frequency_au", "re", "im", "abs"], _spectrum_rows(spec))
            written.append(p)
            index.setdefault("predicted", {})[p.name] = z
    if flags.snapshot:
        for t, (zs, vals) in sorted(artifacts.snapshots.items()):
            p = out / f"snapshot_t{t:.4e}.csv"
            _write_csv(p, ["z_au", "re", "im", "abs"], ((z, v.real, v.imag, abs(v)) for z, v in zip(zs, vals)))
            written.append(p)
            index.setdefault("snapshot", {})[p.name] = t
    if flags.trace:
        for z, (ts, vals) in sorted(artifacts.traces.items()):
            p = out / f"trace_z{z:.4e}.csv"
            _write_csv(p, ["time_au", "re", "im", "abs"], ((t, v.real, v.imag, abs(v)) for t, v in zip(ts, vals)))
            written.append(p)
            index.setdefault("trace", {})[p.name] = z
    if flags.susceptibility and artifacts.susceptibility is not None:
        p = out / "susceptibility.csv"
        f, chi = artifacts.susceptibility
        _write_csv(p, ["frequency_au", "re", "im"], ((a, b.real, b.imag) for a, b in zip(f, chi)))
        written.append(p)
    if flags.convergence and artifacts.convergence:
        p = out / "convergence.csv"
        _write_csv(p, ["kind", "coarse", "fine", "max_rel_diff", "tolerance", "passed"],
                   ((r.kind, r.coarse, r.fine, r.max_rel_diff, r.tolerance, r.passed) for r in artifacts.convergence))
        written.append(p)
    summary = {
        "scenario": cfg.name,
        "config": cfg.raw,
        "provenance": cfg.provenance,
        "scalars": artifacts.scalars,
        "peak_tables": {f"{z:.6e}": rows for z, rows in sorted(artifacts.peak_tables.items())},
        "files": index,
    }
    p = out / "summary.json"
    try:
        p.write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {p}: {exc}") from exc
    written.append(p)
    return written
