"""Closed-form adiabatic, absorptionless solutions.

With ``alpha(t) = g sin^2(theta) sin(Delta t)`` and ``v_g = c cos^2(theta)``
the probe obeys

    Omega(z, t) = Omega(0, t - z/v_g) exp(-i alpha(t - z/v_g)) exp(i alpha(t)),

i.e. its modulus travels rigidly while the spectrum is reshuffled among
the ladder ``w + n Delta``.  These formulas serve as a fast predictor and as
an oracle for :mod:`chirpeit.floquet`; they ignore absorption, so they only
apply to envelopes whose spectrum fits the unchirped transparency window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .model import (
    AU,
    AtomicUnits,
    ControlFieldSpec,
    FloquetSpectrum,
    FrequencyGrid,
    MediumParams,
    MixingAngle,
    ProbePulseSpec,
    SinusoidalChirp,
    derive_kappa2,
    gaussian_transform,
    mixing_angle,
)
from .specfun import bessel_j, bessel_signed_row

__all__ = [
    "AdiabaticSolution",
    "NPrimeSystem",
    "Projection",
    "adiabatic_solution",
    "adiabatic_time_solution",
    "adiabatic_spectrum",
    "matched_spectrum",
    "gaussian_input_spectrum",
    "ladder_propagate",
    "nprime_eigensystem",
    "overlap",
    "overlap_quadrature",
    "optimal_pulse",
    "project_onto_optimal",
    "oscillation_period",
]

SUM_PAD = 25
OVERLAP_PAD = 15


def _sinusoidal(control: ControlFieldSpec) -> SinusoidalChirp:
    if not isinstance(control.phase, SinusoidalChirp):
        raise TypeError("closed-form adiabatic solutions need a sinusoidal chirp")
    return control.phase


@dataclass(frozen=True)
class AdiabaticSolution:
    pulse: ProbePulseSpec
    control: ControlFieldSpec
    theta: MixingAngle

    @property
    def v_g(self) -> float:
        return self.theta.v_g

    @property
    def effective_depth(self) -> float:
        return _sinusoidal(self.control).g * self.theta.sin2

    def alpha(self, t):
        chirp = _sinusoidal(self.control)
        return self.effective_depth * np.sin(chirp.delta * np.asarray(t, dtype=float))

    def delay(self, z: float) -> float:
        return z / self.v_g

    def __call__(self, z: float, t):
        t = np.asarray(t, dtype=float)
        tr = t - self.delay(z)
        return self.pulse.field(tr) * np.exp(1j * (self.alpha(t) - self.alpha(tr)))


def adiabatic_solution(pulse: ProbePulseSpec, control: ControlFieldSpec, medium: MediumParams,
                       units: AtomicUnits = AU) -> AdiabaticSolution:
    theta = mixing_angle(derive_kappa2(medium, units), control.omega2, units)
    return AdiabaticSolution(pulse, control, theta)


def adiabatic_time_solution(pulse: ProbePulseSpec, control: ControlFieldSpec, medium: MediumParams,
                            z: float, t, units: AtomicUnits = AU):
    """Probe field at ``(z, t)`` in the resonant, relaxationless adiabatic limit."""
    return adiabatic_solution(pulse, control, medium, units)(z, t)


def _freqs(where) -> np.ndarray:
    return where.physical_freqs if isinstance(where, FrequencyGrid) else np.asarray(where, dtype=float)


def _wrap(where, values):
    return FloquetSpectrum(where, values) if isinstance(where, FrequencyGrid) else values


def adiabatic_spectrum(pulse: ProbePulseSpec, control: ControlFieldSpec, medium: MediumParams, z: float,
                       where, units: AtomicUnits = AU):
    """Transform of the adiabatic solution for any chirped-Gaussian input.

    ``where`` is a :class:`FrequencyGrid` (returns a :class:`FloquetSpectrum`)
    or an array of physical frequencies (returns an array).  With the probe
    chirp ``(g_p, D_p)`` and ``g' = g sin^2 theta``::

        Omega(z, w) = e^{i w T} sum_{m,p} J_m(g_p) C_p G(w + m D_p + p D)
        C_p = sum_l J_l(g') J_{l+p}(g') e^{i (l+p) D T}

    which reduces to :func:`matched_spectrum` for a matched input and to
    :func:`gaussian_input_spectrum` for an unchirped one.
    """
    sol = adiabatic_solution(pulse, control, medium, units)
    delta = _sinusoidal(control).delta
    freqs = _freqs(where)
    big_t = sol.delay(z)
    gd = sol.effective_depth
    lmax = math.ceil(abs(gd)) + SUM_PAD
    jl = bessel_signed_row(lmax, gd)
    l_idx = np.arange(-lmax, lmax + 1)
    p_idx = np.arange(-2 * lmax, 2 * lmax + 1)
    cp = np.zeros(len(p_idx), dtype=complex)
    for i, p in enumerate(p_idx):
        lo, hi = max(-lmax, -lmax - p), min(lmax, lmax - p)
        if lo > hi:
            continue
        ls = np.arange(lo, hi + 1)
        cp[i] = np.sum(jl[ls + lmax] * jl[ls + p + lmax] * np.exp(1j * (ls + p) * delta * big_t))
    if pulse.chirp_depth:
        mmax = math.ceil(abs(pulse.chirp_depth)) + SUM_PAD
        jm = bessel_signed_row(mmax, pulse.chirp_depth)
        m_idx = np.arange(-mmax, mmax + 1)
    else:
        jm, m_idx = np.ones(1), np.zeros(1, dtype=int)
    weight = np.multiply.outer(jm, cp)
    cut = 1e-17 * np.max(np.abs(weight))
    out = np.zeros(freqs.shape, dtype=complex)
    for (a, b) in zip(*np.nonzero(np.abs(weight) > cut)):
        shift = m_idx[a] * pulse.chirp_freq + p_idx[b] * delta
        out += weight[a, b] * gaussian_transform(freqs + shift, pulse.omega10, pulse.tau, pulse.center_time)
    out *= np.exp(1j * freqs * big_t)
    return _wrap(where, out)


def matched_spectrum(pulse: ProbePulseSpec, control: ControlFieldSpec, medium: MediumParams, z: float,
                     where, units: AtomicUnits = AU):
    """Single-sum spectrum of a matched chirped input.

    ``sum_n J_n(g') exp(i (w + n D) T) sqrt(pi) tau exp(-(w + n D)^2 tau^2/4)``
    using the probe's own chirp depth and frequency.
    """
    sol = adiabatic_solution(pulse, control, medium, units)
    freqs = _freqs(where)
    big_t = sol.delay(z)
    nmax = math.ceil(abs(pulse.chirp_depth)) + SUM_PAD
    jn = bessel_signed_row(nmax, pulse.chirp_depth)
    out = np.zeros(freqs.shape, dtype=complex)
    for n, c in zip(range(-nmax, nmax + 1), jn):
        f = freqs + n * pulse.chirp_freq
        out += c * np.exp(1j * f * big_t) * gaussian_transform(f, pulse.omega10, pulse.tau, pulse.center_time)
    return _wrap(where, out)


def gaussian_input_spectrum(pulse: ProbePulseSpec, control: ControlFieldSpec, medium: MediumParams,
                            z: float, where, units: AtomicUnits = AU):
    """Double-sum spectrum for an unchirped Gaussian input.

    ``sum_{n,j} J_n(g') J_{n-j}(g') exp(i (w + n D) T) G(w + j D)``.
    """
    sol = adiabatic_solution(pulse, control, medium, units)
    delta = _sinusoidal(control).delta
    freqs = _freqs(where)
    big_t = sol.delay(z)
    gd = sol.effective_depth
    nmax = math.ceil(abs(gd)) + SUM_PAD
    jn = bessel_signed_row(2 * nmax, gd)
    out = np.zeros(freqs.shape, dtype=complex)
    for j in range(-nmax, nmax + 1):
        gj = gaussian_transform(freqs + j * delta, pulse.omega10, pulse.tau, pulse.center_time)
        coef = np.zeros(freqs.shape, dtype=complex)
        for n in range(-nmax, nmax + 1):
            w = jn[n + 2 * nmax] * jn[n - j + 2 * nmax]
            if w:
                coef += w * np.exp(1j * (freqs + n * delta) * big_t)
        out += coef * gj
    return _wrap(where, out)


@dataclass(frozen=True, eq=False)
class NPrimeSystem:
    """Tridiagonal adiabatic coupling matrix and its Bessel eigensystem."""

    g_eff: float
    delta: float
    ladder: int
    matrix: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    inverse: np.ndarray = field(repr=False)
    numeric_eigenvalues: np.ndarray = field(repr=False)
    max_eigenvalue_deviation: float
    interior: int

    def eigen_residual(self) -> float:
        """Max residual of ``N' u_k - k Delta u_k`` over interior rows and columns."""
        s = self.ladder
        r = self.matrix @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        sl = slice(s - self.interior, s + self.interior + 1)
        return float(np.max(np.abs(r[sl, sl])))


def nprime_eigensystem(g_eff: float, delta: float, ladder: int) -> NPrimeSystem:
    """Analytic eigenpairs ``k Delta``, ``J_{s-k}(-g_eff)`` plus a numeric cross-check.

    Interior modes are ``|k| <= ladder - ceil(g_eff) - 8``, far enough from the
    truncation edge for the Bessel tails to vanish.
    """
    g_eff = float(g_eff)
    if ladder < g_eff + 12:
        raise ValidationError(f"ladder {ladder} too short for g_eff={g_eff}; need >= g_eff + 12")
    s = np.arange(-ladder, ladder + 1)
    size = len(s)
    mat = np.diag(s * delta).astype(float)
    off = delta * g_eff / 2
    mat[np.arange(size - 1), np.arange(1, size)] = off
    mat[np.arange(1, size), np.arange(size - 1)] = off
    jrow = bessel_signed_row(2 * ladder, -g_eff)
    diff = s[:, None] - s[None, :]
    u = jrow[diff + 2 * ladder]
    u_inv = jrow[-diff + 2 * ladder]
    num = np.linalg.eigvalsh(mat)
    interior = max(0, ladder - math.ceil(abs(g_eff)) - 8)
    ks = np.arange(-interior, interior + 1) * delta
    dev = float(np.max(np.min(np.abs(num[None, :] - ks[:, None]), axis=1)))
    return NPrimeSystem(g_eff, delta, ladder, mat, s * delta, u, u_inv, num, dev, interior)


def ladder_propagate(spectrum: FloquetSpectrum, control: ControlFieldSpec, medium: MediumParams, z: float,
                     units: AtomicUnits = AU) -> FloquetSpectrum:
    """Apply ``U' exp(i z/(c cos^2) (w + k D)) U'^{-1}`` column by column.

    Operator form of the adiabatic solution on the Floquet grid; it agrees
    with :func:`adiabatic_spectrum` wherever the ladder is long enough.
    """
    sol = adiabatic_solution(ProbePulseSpec(1.0, 1.0), control, medium, units)
    grid = spectrum.grid
    sys = nprime_eigensystem(sol.effective_depth, grid.delta, grid.ladder + math.ceil(abs(sol.effective_depth)) + SUM_PAD)
    pad = sys.ladder - grid.ladder
    big_t = sol.delay(z)
    op = (sys.eigenvectors * np.exp(1j * sys.eigenvalues * big_t)) @ sys.inverse
    op = op[pad : pad + grid.size, pad : pad + grid.size]
    out = (spectrum.amplitudes @ op.T) * np.exp(1j * grid.base_freqs * big_t)[:, None]
    return FloquetSpectrum(grid, out)


def _norm(p: ProbePulseSpec) -> float:
    return math.sqrt(p.energy())


def overlap(pulse1: ProbePulseSpec, pulse2: ProbePulseSpec) -> complex:
    """Normalised overlap ``<p1|p2> = int conj(p1) p2 dt / (|p1| |p2|)``.

    Bessel double sum over both chirp ladders; for equal widths and zero
    center times this is ``sum_{n,s} J_n(g1) J_s(g2) exp(-(n D1 - s D2)^2 /
    (4 (1/tau1^2 + 1/tau2^2)))``.
    """
    t1, t2 = pulse1.tau, pulse2.tau
    a1, a2 = pulse1.center_time, pulse2.center_time
    big_p = 1 / t1**2 + 1 / t2**2
    big_r = a1**2 / t1**2 + a2**2 / t2**2
    n1 = math.ceil(abs(pulse1.chirp_depth)) + OVERLAP_PAD if pulse1.chirp_depth else 0
    n2 = math.ceil(abs(pulse2.chirp_depth)) + OVERLAP_PAD if pulse2.chirp_depth else 0
    j1 = bessel_signed_row(n1, pulse1.chirp_depth) if n1 else np.ones(1)
    j2 = bessel_signed_row(n2, pulse2.chirp_depth) if n2 else np.ones(1)
    k = (np.arange(-n2, n2 + 1)[None, :] * pulse2.chirp_freq
         - np.arange(-n1, n1 + 1)[:, None] * pulse1.chirp_freq)
    q = 2 * a1 / t1**2 + 2 * a2 / t2**2 + 1j * k
    terms = np.outer(j1, j2) * np.exp(q**2 / (4 * big_p) - big_r)
    terms[np.abs(np.outer(j1, j2)) < 1e-18] = 0.0
    total = complex(np.sum(terms)) * math.sqrt(math.pi / big_p)
    phase = np.conj(pulse1.omega10) * pulse2.omega10
    return complex(total * phase / (_norm(pulse1) * _norm(pulse2)))


def overlap_quadrature(pulse1: ProbePulseSpec, pulse2: ProbePulseSpec, points: int = 400_001) -> complex:
    """Same overlap by trapezoid quadrature of the time-domain fields."""
    lo = min(pulse1.center_time - 9 * pulse1.tau, pulse2.center_time - 9 * pulse2.tau)
    hi = max(pulse1.center_time + 9 * pulse1.tau, pulse2.center_time + 9 * pulse2.tau)
    t = np.linspace(lo, hi, points)
    f = np.conj(pulse1.field(t)) * pulse2.field(t)
    return complex(np.trapezoid(f, t) / (_norm(pulse1) * _norm(pulse2)))


def optimal_pulse(pulse: ProbePulseSpec, control: ControlFieldSpec, medium: MediumParams,
                  units: AtomicUnits = AU) -> ProbePulseSpec:
    """Same envelope, chirp depth ``g sin^2 theta`` at the control's chirp frequency."""
    sol = adiabatic_solution(pulse, control, medium, units)
    return ProbePulseSpec(pulse.omega10, pulse.tau, sol.effective_depth, _sinusoidal(control).delta,
                          pulse.center_time)


@dataclass(frozen=True, eq=False)
class Projection:
    coefficient: complex
    optimal: ProbePulseSpec
    residual_norm: float
    predicted: FloquetSpectrum | None = None

    def peak_heights(self, orders, control: ControlFieldSpec) -> np.ndarray:
        """``|V| |omega10| tau sqrt(pi) |J_n(g')|`` for the given orders."""
        opt = self.optimal
        scale = abs(self.coefficient) * abs(opt.omega10) * opt.tau * math.sqrt(math.pi)
        return np.array([scale * abs(bessel_j(n, opt.chirp_depth)) for n in orders])


def project_onto_optimal(pulse: ProbePulseSpec, control: ControlFieldSpec, medium: MediumParams,
                         grid: FrequencyGrid | None = None, z: float = 0.0,
                         units: AtomicUnits = AU) -> Projection:
    """Split ``pulse`` into its matched-chirp component and an absorbed rest.

    ``predicted`` (when ``grid`` is given) is the transmitted spectrum at
    ``z``: the overlap times the adiabatic spectrum of the optimal pulse.
    """
    opt = optimal_pulse(pulse, control, medium, units)
    v = overlap(opt, pulse)
    resid = math.sqrt(max(0.0, 1.0 - abs(v) ** 2))
    pred = None
    if grid is not None:
        pred = matched_spectrum(opt, control, medium, z, grid, units) * v
    return Projection(v, opt, resid, pred)


def oscillation_period(medium: MediumParams, control: ControlFieldSpec, units: AtomicUnits = AU) -> float:
    """Period in ``z`` of the spectrum, ``2 pi c cos^2(theta) / Delta``."""
    theta = mixing_angle(derive_kappa2(medium, units), control.omega2, units)
    return 2 * math.pi * units.c * theta.cos2 / control.delta
