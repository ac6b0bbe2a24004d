"""Floquet-ladder propagation engine.

For every reduced frequency ``w`` of the base band the probe amplitudes on
the ladder ``w + s*Delta`` obey ``c dOmega/dz = i (w + N) Omega`` with

    A[s, s'] = (w + s D + d1 + i g_ab) delta_ss'
               - |O2|^2 sum_n c_n conj(c_{n-(s'-s)}) / (w + (s+n) D + d1 - d2 + i g_cb)
    N        = diag(s D) - kappa^2 A^{-1}

so ``Omega(z) = U exp(i z/c (w + N^d)) U^{-1} Omega(0)``.  The inner sum is
assembled as ``-|O2|^2 V diag(1/D_cb) V^H`` with ``V[s, m] = c_{m-s}``, which
keeps the dissipative part of ``A`` positive semidefinite under truncation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .linalg import expm
from .model import (
    AU,
    AtomicUnits,
    ControlFieldSpec,
    FloquetSpectrum,
    FrequencyGrid,
    MediumParams,
    SinusoidalChirp,
    chirp_coefficients,
    derive_kappa2,
)

__all__ = [
    "CouplingMatrix",
    "PropagationMatrix",
    "FloquetEngine",
    "PropagationInfo",
    "build_coupling_matrix",
    "solve_coherence",
    "build_propagation_matrix",
    "propagate",
    "reconstruct_time",
    "susceptibility",
    "convergence_report",
    "ConvergenceRow",
]

log = logging.getLogger(__name__)

N_PAD = 8
POLE_GUARD = 1e-3
COND_A_MAX = 1e12
COND_U_MAX = 1e8
RECON_TOL = 1e-8
EXP_OVERFLOW = 700.0


def _inner_cutoff(control: ControlFieldSpec, ladder: int, n_pad: int) -> int:
    n_c = ladder + n_pad
    if isinstance(control.phase, SinusoidalChirp):
        n_c = max(n_c, math.ceil(abs(control.phase.g)) + 8)
    return n_c


def _raman_basis(coeffs: np.ndarray, ladder: int) -> tuple[np.ndarray, np.ndarray]:
    """``V[s, m] = c_{m-s}`` and the intermediate ladder ``m``."""
    n_c = len(coeffs) // 2
    s = np.arange(-ladder, ladder + 1)
    m = np.arange(-ladder - n_c, ladder + n_c + 1)
    lag = m[None, :] - s[:, None]
    v = np.zeros(lag.shape, dtype=complex)
    ok = np.abs(lag) <= n_c
    v[ok] = coeffs[lag[ok] + n_c]
    return v, m


def _coupling_batch(omegas, medium: MediumParams, control: ControlFieldSpec, ladder: int,
                    n_pad: int = N_PAD) -> np.ndarray:
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    delta = control.delta
    coeffs = chirp_coefficients(control, _inner_cutoff(control, ladder, n_pad))
    v, m = _raman_basis(coeffs, ladder)
    d_cb = omegas[:, None] + m[None, :] * delta + medium.delta1 - medium.delta2 + 1j * medium.gamma_cb
    if control.rabi2 > 0 and medium.gamma_cb == 0:
        worst = np.min(np.abs(d_cb))
        if worst < POLE_GUARD * delta:
            raise NumericalError(f"two-photon pole on grid: |denominator|={worst:.3e} with gamma_cb=0")
    s = np.arange(-ladder, ladder + 1)
    diag = omegas[:, None] + s[None, :] * delta + medium.delta1 + 1j * medium.gamma_ab
    raman = np.einsum("sm,wm,tm->wst", v, 1.0 / d_cb, v.conj(), optimize=True)
    a = -control.rabi2 * raman
    idx = np.arange(len(s))
    a[:, idx, idx] += diag
    return a


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Eliminated Bloch system ``A sigma_ab = -Omega_1`` on one ladder."""

    omega: float
    entries: np.ndarray = field(repr=False)
    delta: float
    medium: MediumParams
    control: ControlFieldSpec

    @property
    def ladder(self) -> int:
        return self.entries.shape[0] // 2


def build_coupling_matrix(omega: float, medium: MediumParams, control: ControlFieldSpec, ladder: int,
                          n_pad: int = N_PAD) -> CouplingMatrix:
    a = _coupling_batch([omega], medium, control, ladder, n_pad)[0]
    return CouplingMatrix(float(omega), a, control.delta, medium, control)


def solve_coherence(omega_column: np.ndarray, a: CouplingMatrix) -> np.ndarray:
    """``sigma_ab = -A^{-1} Omega`` on the ladder of one reduced frequency."""
    cond = np.linalg.cond(a.entries)
    if not np.isfinite(cond) or cond > COND_A_MAX:
        raise NumericalError(f"singular coupling matrix at omega={a.omega:.6e} (cond={cond:.3e})")
    return -np.linalg.solve(a.entries, np.asarray(omega_column, dtype=complex))


@dataclass(frozen=True, eq=False)
class PropagationMatrix:
    omega: float
    n: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    u_inv: np.ndarray = field(repr=False)
    condition_number: float
    residual: float
    use_expm: bool

    def generator(self) -> np.ndarray:
        """``w I + N``; the field obeys ``c dOmega/dz = i (w I + N) Omega``."""
        return self.n + self.omega * np.eye(self.n.shape[0])


def _propagation_batch(a: np.ndarray, kappa2: float, delta: float):
    size = a.shape[-1]
    s = np.arange(size) - size // 2
    cond_a = np.linalg.cond(a)
    bad = ~np.isfinite(cond_a) | (cond_a > COND_A_MAX)
    if np.any(bad):
        raise NumericalError(f"singular coupling matrix in {int(bad.sum())} column(s), cond={np.max(cond_a):.3e}")
    n = -kappa2 * np.linalg.inv(a)
    n[:, np.arange(size), np.arange(size)] += s * delta
    eigvals = np.empty(a.shape[:2], dtype=complex)
    u = np.empty_like(n)
    u_inv = np.empty_like(n)
    cond_u = np.full(a.shape[0], np.inf)
    resid = np.full(a.shape[0], np.inf)
    for i in range(a.shape[0]):
        try:
            w, vec = np.linalg.eig(n[i])
            vec = vec / np.linalg.norm(vec, axis=0)
            vi = np.linalg.inv(vec)
        except np.linalg.LinAlgError:
            eigvals[i] = np.nan
            u[i] = u_inv[i] = np.nan
            continue
        eigvals[i], u[i], u_inv[i] = w, vec, vi
        cond_u[i] = np.linalg.cond(vec)
        scale = np.max(np.abs(n[i]))
        resid[i] = np.max(np.abs((vec * w) @ vi - n[i])) / scale if scale > 0 else 0.0
    use_expm = ~np.isfinite(cond_u) | (cond_u > COND_U_MAX) | ~(resid <= RECON_TOL)
    return n, eigvals, u, u_inv, cond_u, resid, use_expm


def build_propagation_matrix(a: CouplingMatrix, kappa2: float) -> PropagationMatrix:
    """``N = diag(s Delta) - kappa^2 A^{-1}`` and its eigendecomposition."""
    n, w, u, ui, cond, res, flag = _propagation_batch(a.entries[None], kappa2, a.delta)
    return PropagationMatrix(a.omega, n[0], w[0], u[0], ui[0], float(cond[0]), float(res[0]), bool(flag[0]))


@dataclass
class PropagationInfo:
    """Diagnostics of one :meth:`FloquetEngine.propagate` call."""

    z: float
    expm_columns: int = 0
    clamped_modes: int = 0
    fully_absorbed_modes: int = 0


class FloquetEngine:
    """Eigendecompositions of ``N(w)`` for every base-band column of a grid.

    Built once per (medium, control, grid); afterwards read-only, so
    :meth:`propagate` may be called from several threads.
    """

    def __init__(self, medium: MediumParams, control: ControlFieldSpec, grid: FrequencyGrid,
                 n_pad: int = N_PAD, units: AtomicUnits = AU):
        if not math.isclose(grid.delta, control.delta, rel_tol=1e-12):
            raise ValidationError(f"grid spacing {grid.delta:g} differs from chirp frequency {control.delta:g}")
        self.medium = medium
        self.control = control
        self.grid = grid
        self.units = units
        self.kappa2 = derive_kappa2(medium, units)
        self.coupling = _coupling_batch(grid.base_freqs, medium, control, grid.ladder, n_pad)
        (self.n, self.eigenvalues, self.u, self.u_inv,
         self.cond_u, self.residual, self.use_expm) = _propagation_batch(self.coupling, self.kappa2, grid.delta)
        for arr in (self.coupling, self.n, self.eigenvalues, self.u, self.u_inv):
            arr.flags.writeable = False
        n_fallback = int(self.use_expm.sum())
        if n_fallback:
            log.info("%d of %d columns use the matrix-exponential path", n_fallback, grid.n_omega)

    def propagation_matrix(self, i: int) -> PropagationMatrix:
        return PropagationMatrix(
            float(self.grid.base_freqs[i]), self.n[i], self.eigenvalues[i], self.u[i], self.u_inv[i],
            float(self.cond_u[i]), float(self.residual[i]), bool(self.use_expm[i]),
        )

    def coupling_matrix(self, i: int) -> CouplingMatrix:
        return CouplingMatrix(float(self.grid.base_freqs[i]), self.coupling[i], self.grid.delta,
                              self.medium, self.control)

    def mode_wavenumbers(self) -> np.ndarray:
        """``(w + N^d_kk)/c`` for every column and mode."""
        return (self.grid.base_freqs[:, None] + self.eigenvalues) / self.units.c

    def _check(self, spectrum: FloquetSpectrum) -> None:
        if spectrum.grid != self.grid:
            raise ValidationError(f"spectrum grid {spectrum.grid} does not match engine grid {self.grid}")

    def propagate(self, spectrum: FloquetSpectrum, z: float, method: str = "auto",
                  info: PropagationInfo | None = None) -> FloquetSpectrum:
        """Field at position ``z`` for the incoming spectrum at ``z = 0``.

        ``method`` is ``"auto"`` (eigenmodes, matrix exponential for flagged
        columns), ``"eig"`` or ``"expm"``.
        """
        self._check(spectrum)
        if method not in ("auto", "eig", "expm"):
            raise ValueError(f"unknown method {method!r}")
        info = info if info is not None else PropagationInfo(z)
        info.z = z
        if z == 0:
            return FloquetSpectrum(self.grid, spectrum.amplitudes.copy())
        if method == "expm":
            fallback = np.ones(self.grid.n_omega, dtype=bool)
        elif method == "eig":
            fallback = ~np.isfinite(self.eigenvalues).all(axis=1)
        else:
            fallback = self.use_expm
        amps = spectrum.amplitudes
        out = np.zeros_like(amps)
        ok = ~fallback
        if ok.any():
            b = np.einsum("wkl,wl->wk", self.u_inv[ok], amps[ok])
            out[ok] = np.einsum("wjk,wk->wj", self.u[ok], self._mode_factors(z, ok, info) * b)
        for i in np.flatnonzero(fallback):
            gen = self.n[i] + self.grid.base_freqs[i] * np.eye(self.grid.size)
            arg = 1j * (z / self.units.c) * gen
            if np.max(-arg.real.diagonal()) < -EXP_OVERFLOW:
                info.clamped_modes += self.grid.size
                continue
            out[i] = expm(arg) @ amps[i]
        info.expm_columns = int(fallback.sum())
        if not np.all(np.isfinite(out)):
            raise NumericalError(f"non-finite amplitudes after propagation to z={z:g}")
        return FloquetSpectrum(self.grid, out)

    def _mode_factors(self, z: float, cols: np.ndarray, info: PropagationInfo) -> np.ndarray:
        lam = self.grid.base_freqs[cols, None] + self.eigenvalues[cols]
        expo = 1j * (z / self.units.c) * lam
        overflow = expo.real > EXP_OVERFLOW
        if overflow.any():
            info.clamped_modes += int(overflow.sum())
            log.warning("clamping %d exponentially growing mode(s) to zero at z=%g", int(overflow.sum()), z)
            expo = np.where(overflow, -np.inf, expo)
        info.fully_absorbed_modes += int((expo.real < -745).sum())
        with np.errstate(under="ignore"):
            return np.exp(expo)

    def propagator(self, spectrum: FloquetSpectrum):
        """Return ``z -> FloquetSpectrum`` with the modal projection done once.

        Only valid when no column needs the matrix-exponential path; falls
        back to :meth:`propagate` otherwise.
        """
        self._check(spectrum)
        if self.use_expm.any():
            return lambda z: self.propagate(spectrum, z)
        b = np.einsum("wkl,wl->wk", self.u_inv, spectrum.amplitudes)
        cols = np.ones(self.grid.n_omega, dtype=bool)

        def at(z: float) -> FloquetSpectrum:
            if z == 0:
                return FloquetSpectrum(self.grid, spectrum.amplitudes.copy())
            f = self._mode_factors(z, cols, PropagationInfo(z))
            return FloquetSpectrum(self.grid, np.einsum("wjk,wk->wj", self.u, f * b))

        return at


def propagate(spectrum: FloquetSpectrum, z: float, medium: MediumParams, control: ControlFieldSpec,
              method: str = "auto") -> FloquetSpectrum:
    """One-shot convenience wrapper around :class:`FloquetEngine`."""
    return FloquetEngine(medium, control, spectrum.grid).propagate(spectrum, z, method=method)


def reconstruct_time(spectrum: FloquetSpectrum, t, chunk: int = 256, prune: float = 1e-15) -> np.ndarray:
    """Inverse transform ``(1/2pi) sum Omega(w) exp(-i w t) dw`` on arbitrary times.

    Trapezoid weights over the ascending physical-frequency set; cells below
    ``prune * max|Omega|`` are skipped.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    freqs, vals = spectrum.flat()
    w = np.full(len(freqs), spectrum.grid.d_omega)
    w[0] *= 0.5
    w[-1] *= 0.5
    peak = np.max(np.abs(vals)) if vals.size else 0.0
    if peak == 0:
        return np.zeros(t.shape, dtype=complex)
    keep = np.abs(vals) > prune * peak
    freqs, vals = freqs[keep], vals[keep] * w[keep]
    out = np.empty(t.shape, dtype=complex)
    for lo in range(0, len(t), chunk):
        tt = t[lo : lo + chunk]
        out[lo : lo + chunk] = np.exp(-1j * np.multiply.outer(tt, freqs)) @ vals
    return out / (2 * np.pi)


def susceptibility(omega, medium: MediumParams, omega2: complex, units: AtomicUnits = AU):
    """Linear susceptibility of the unchirped medium (transparency window).

    A vanishing two-photon denominator means perfect transparency (``chi = 0``);
    a vanishing overall denominator raises :class:`NumericalError`.
    """
    omega = np.asarray(omega, dtype=float)
    pref = medium.atom_density * abs(medium.dipole_ab) ** 2 / (units.eps0 * units.hbar)
    d_ab = omega + medium.delta1 + 1j * medium.gamma_ab
    d_cb = omega + medium.delta1 - medium.delta2 + 1j * medium.gamma_cb
    r2 = abs(omega2) ** 2
    transparent = (d_cb == 0) & (r2 > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        dressing = np.where(transparent, 0.0, r2 / np.where(d_cb == 0, 1.0, d_cb))
        denom = d_ab - dressing
        pole = (~transparent) & (np.abs(denom) <= 1e-14 * (np.abs(d_ab) + np.abs(dressing)))
        if np.any(pole):
            bad = np.atleast_1d(omega)[np.atleast_1d(pole)][0]
            raise NumericalError(f"susceptibility pole at omega={bad:.6e}")
        chi = np.where(transparent, 0.0, -pref / np.where(transparent, 1.0, denom))
    return chi[()] if chi.ndim == 0 else chi


@dataclass(frozen=True)
class ConvergenceRow:
    kind: str  # "ladder" or "n_omega"
    coarse: int
    fine: int
    max_rel_diff: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_diff < self.tolerance


def _common_ladder_diff(a: FloquetSpectrum, b: FloquetSpectrum) -> float:
    s_a, s_b = a.grid.ladder, b.grid.ladder
    lo = min(s_a, s_b)
    xa = a.amplitudes[:, s_a - lo : s_a + lo + 1]
    xb = b.amplitudes[:, s_b - lo : s_b + lo + 1]
    scale = max(np.max(np.abs(a.amplitudes)), np.max(np.abs(b.amplitudes)))
    return float(np.max(np.abs(xa - xb)) / scale) if scale > 0 else 0.0


def convergence_report(medium: MediumParams, control: ControlFieldSpec, incoming, z: float,
                       ladders, n_omegas=(), base_grid: FrequencyGrid | None = None,
                       t=None, tolerance: float = 1e-4) -> list[ConvergenceRow]:
    """Max-norm output differences between successive truncations.

    ``incoming`` maps a :class:`FrequencyGrid` to the z=0 spectrum.  Ladder
    settings are compared cell by cell on the common ladder; base-band
    settings (which leave every column unchanged) are compared through the
    reconstructed time envelope on ``t``.
    """
    if len(ladders) + len(n_omegas) < 2:
        raise ValueError("need at least two truncation settings")
    base_grid = base_grid or FrequencyGrid(control.delta, 512, max(ladders) if ladders else 20)
    rows: list[ConvergenceRow] = []
    outs = []
    for s in ladders:
        g = base_grid.with_ladder(int(s))
        outs.append((int(s), FloquetEngine(medium, control, g).propagate(incoming(g), z)))
    for (s0, o0), (s1, o1) in zip(outs, outs[1:]):
        rows.append(ConvergenceRow("ladder", s0, s1, _common_ladder_diff(o0, o1), tolerance))
    if n_omegas:
        if t is None:
            raise ValueError("time grid required for base-band convergence")
        traces = []
        for n_w in n_omegas:
            g = FrequencyGrid(base_grid.delta, int(n_w), base_grid.ladder)
            out = FloquetEngine(medium, control, g).propagate(incoming(g), z)
            traces.append((int(n_w), reconstruct_time(out, t)))
        for (n0, f0), (n1, f1) in zip(traces, traces[1:]):
            scale = max(np.max(np.abs(f0)), np.max(np.abs(f1)))
            diff = float(np.max(np.abs(f0 - f1)) / scale) if scale > 0 else 0.0
            rows.append(ConvergenceRow("n_omega", n0, n1, diff, tolerance))
    return rows
