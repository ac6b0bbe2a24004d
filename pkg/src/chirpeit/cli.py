"""Command-line entry point: ``chirpeit run|validate|converge|report``.

Exit codes: 0 success, 1 validation failure, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import adiabatic as ad
from .diagnostics import ladder_peaks, relative_l2
from .errors import NumericalError, ValidationError
from .floquet import FloquetEngine
from .model import ProbePulseSpec, derive_kappa2, incoming_spectrum, mixing_angle
from .scenario import (
    PRESETS,
    _jsonable,
    config_from_dict,
    load_config,
    preset,
    run_scenario,
    emit,
    validate_config,
)
from .specfun import bessel_j

log = logging.getLogger("chirpeit")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


def _resolve(scenario: str | None, config: str | None) -> dict:
    if scenario in (None, "custom"):
        if config is None:
            raise ValidationError("a custom scenario needs --config")
        return load_config(config)
    base = preset(scenario)
    return load_config(config, base) if config else base


def _cmd_run(args) -> int:
    raw = _resolve(args.scenario, args.config)
    errors = validate_config(raw)
    if errors:
        for e in errors:
            print(f"invalid: {e}", file=sys.stderr)
        return EXIT_INVALID
    art = run_scenario(config_from_dict(raw))
    files = emit(art, args.out)
    for f in files:
        print(f)
    return EXIT_OK


def _cmd_validate(args) -> int:
    raw = _resolve(args.scenario, args.config)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        errors = validate_config(raw)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    for e in errors:
        print(f"invalid: {e}", file=sys.stderr)
    if errors:
        return EXIT_INVALID
    print("ok")
    return EXIT_OK


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}") from None


def _cmd_converge(args) -> int:
    from .floquet import convergence_report
    from .scenario import time_grid

    raw = _resolve(args.scenario, args.config)
    errors = validate_config(raw)
    if errors:
        for e in errors:
            print(f"invalid: {e}", file=sys.stderr)
        return EXIT_INVALID
    cfg = config_from_dict(raw)
    z = max(cfg.z_samples) if cfg.z_samples else cfg.z_end
    t = None
    if args.n_omega:
        theta = mixing_angle(derive_kappa2(cfg.medium), cfg.control.omega2)
        t = time_grid(cfg, theta.v_g)
    rows = convergence_report(cfg.medium, cfg.control, lambda g: incoming_spectrum(cfg.probe, g), z,
                              args.truncations, n_omegas=args.n_omega or (), base_grid=cfg.grid, t=t,
                              tolerance=args.tolerance)
    print(f"{'kind':8s} {'coarse':>7s} {'fine':>7s} {'max_rel_diff':>14s}  status")
    for r in rows:
        print(f"{r.kind:8s} {r.coarse:7d} {r.fine:7d} {r.max_rel_diff:14.3e}  {'converged' if r.passed else 'not converged'}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        data = [dict(kind=r.kind, coarse=r.coarse, fine=r.fine, max_rel_diff=r.max_rel_diff,
                     tolerance=r.tolerance, passed=r.passed) for r in rows]
        (out / "convergence.json").write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def build_report() -> dict:
    """Scalar cross-checks on the fig2/fig4/fig5/fig8 presets."""
    rep: dict = {}
    c2 = config_from_dict(preset("fig2"))
    theta = mixing_angle(derive_kappa2(c2.medium), c2.control.omega2)
    rep["sin2theta_fig2"] = theta.sin2
    c8 = config_from_dict(preset("fig8"))
    rep["z0_fig8"] = ad.oscillation_period(c8.medium, c8.control)

    proj2 = ad.project_onto_optimal(c2.probe, c2.control, c2.medium)
    c5 = config_from_dict(preset("fig5"))
    proj5 = ad.project_onto_optimal(c5.probe, c5.control, c5.medium)
    chirped5 = ProbePulseSpec(c2.probe.omega10, c2.probe.tau, c2.control.phase.g, c2.control.delta)
    rep["overlap"] = {
        "g5_vs_gaussian": {"closed_form": abs(ad.overlap(chirped5, c2.probe)),
                           "quadrature": abs(ad.overlap_quadrature(chirped5, c2.probe))},
        "fig2": {"closed_form": abs(proj2.coefficient),
                 "quadrature": abs(ad.overlap_quadrature(proj2.optimal, c2.probe))},
        "fig5": {"closed_form": abs(proj5.coefficient),
                 "quadrature": abs(ad.overlap_quadrature(proj5.optimal, c5.probe))},
    }

    engine = FloquetEngine(c2.medium, c2.control, c2.grid)
    z = c2.z_end
    out2 = engine.propagate(incoming_spectrum(c2.probe, c2.grid), z)
    scale = abs(proj2.coefficient) * abs(c2.probe.omega10) * c2.probe.tau * np.sqrt(np.pi)
    rows = []
    for pk in ladder_peaks(out2, range(-4, 5)):
        pred = scale * abs(bessel_j(pk.order, c2.control.phase.g))
        rows.append({"order": pk.order, "height": pk.height, "bessel_prediction": pred,
                     "ratio": pk.height / pred, "local_max": pk.is_local_max})
    rep["fig2_peaks"] = rows

    c4 = config_from_dict(preset("fig4"))
    inc4 = incoming_spectrum(c4.probe, c4.grid)
    out4 = engine.propagate(inc4, c4.z_end)
    rep["fig4_relative_l2"] = relative_l2(np.abs(out4.flat()[1]), np.abs(inc4.flat()[1]))
    return rep


def _cmd_report(args) -> int:
    rep = build_report()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "report.json"
    path.write_text(json.dumps(_jsonable(rep), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"sin^2 theta (fig2)      {rep['sin2theta_fig2']:.6f}")
    print(f"z0 (fig8)               {rep['z0_fig8']:.4e}")
    for k, v in rep["overlap"].items():
        print(f"|V| {k:15s}  closed form {v['closed_form']:.6f}  quadrature {v['quadrature']:.6f}")
    print("fig2 peaks: order  height      prediction  ratio")
    for r in rep["fig2_peaks"]:
        print(f"           {r['order']:5d}  {r['height']:.4e}  {r['bessel_prediction']:.4e}  {r['ratio']:.4f}")
    print(f"fig4 relative L2        {rep['fig4_relative_l2']:.4f}")
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chirpeit", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    names = sorted(PRESETS) + ["custom"]

    r = sub.add_parser("run", help="run a scenario and write tables")
    r.add_argument("--scenario", choices=names, default="custom")
    r.add_argument("--config", help="YAML/JSON config (overrides preset keys)")
    r.add_argument("--out", required=True, help="output directory")
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("--config")
    v.add_argument("--scenario", choices=names, default="custom")
    v.set_defaults(func=_cmd_validate)

    c = sub.add_parser("converge", help="compare outputs across ladder truncations")
    c.add_argument("--scenario", choices=names, required=True)
    c.add_argument("--config")
    c.add_argument("--truncations", type=_ints, required=True, help="ladder sizes S, e.g. 15,20")
    c.add_argument("--n-omega", type=_ints, default=None, help="base-band sample counts, e.g. 256,512")
    c.add_argument("--tolerance", type=float, default=1e-4)
    c.add_argument("--out")
    c.set_defaults(func=_cmd_converge)

    rp = sub.add_parser("report", help="scalar cross-checks on the figure presets")
    rp.add_argument("--out", required=True)
    rp.set_defaults(func=_cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, FloatingPointError, OverflowError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
