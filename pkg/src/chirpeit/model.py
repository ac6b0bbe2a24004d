"""Domain types, atomic-unit constants and incoming probe spectra.

Fourier convention used everywhere in the package::

    F(w) = int dt exp(+i w t) f(t)
    f(t) = 1/(2 pi) int dw exp(-i w t) F(w)

A physical frequency is always written as ``w + s*Delta`` with the reduced
frequency ``w`` in the base band ``[-Delta/2, Delta/2)`` and ``s`` the ladder
index; the spectrum of the probe lives on this two-index grid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import ValidationError
from .specfun import bessel_signed_row

__all__ = [
    "AU",
    "AtomicUnits",
    "MediumParams",
    "SinusoidalChirp",
    "GeneralPeriodic",
    "ControlFieldSpec",
    "ProbePulseSpec",
    "MixingAngle",
    "FrequencyGrid",
    "FloquetSpectrum",
    "derive_kappa2",
    "mixing_angle",
    "chirp_coefficients",
    "default_ladder",
    "incoming_spectrum",
    "gaussian_transform",
    "UNITARITY_TOL",
]

UNITARITY_TOL = 1e-8
SAMPLES_PER_WIDTH = 8


@dataclass(frozen=True)
class AtomicUnits:
    time_si: float = 2.42e-17  # s
    length_si: float = 0.529e-10  # m
    frequency_mhz: float = 6.58e9
    c: float = 137.036
    eps0: float = 1.0 / (4.0 * math.pi)
    hbar: float = 1.0


AU = AtomicUnits()


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValidationError(msg)


@dataclass(frozen=True)
class MediumParams:
    """Atomic medium; every quantity in atomic units."""

    atom_density: float
    dipole_ab: float
    omega1: float
    gamma_ab: float
    gamma_cb: float
    delta1: float = 0.0
    delta2: float = 0.0

    def __post_init__(self) -> None:
        _require(self.gamma_ab >= 0, f"gamma_ab must be >= 0, got {self.gamma_ab}")
        _require(self.gamma_cb >= 0, f"gamma_cb must be >= 0, got {self.gamma_cb}")
        _require(self.atom_density >= 0, f"atom_density must be >= 0, got {self.atom_density}")
        _require(self.omega1 > 0, f"omega1 must be > 0, got {self.omega1}")


@dataclass(frozen=True)
class SinusoidalChirp:
    """Phase ``phi(t) = g sin(delta t)``."""

    g: float
    delta: float

    def __post_init__(self) -> None:
        _require(self.delta > 0, f"chirp frequency must be > 0, got {self.delta}")
        _require(math.isfinite(self.g), "chirp depth must be finite")

    @property
    def extent(self) -> float:
        return abs(self.g)

    def phase(self, t):
        return self.g * np.sin(self.delta * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class GeneralPeriodic:
    """Periodic phase given by its Fourier coefficients.

    ``coefficients[n + n_max]`` holds ``c_n`` of
    ``exp(i phi(t)) = sum_n c_n exp(i n delta t)``.
    """

    delta: float
    coefficients: tuple

    def __post_init__(self) -> None:
        _require(self.delta > 0, f"chirp frequency must be > 0, got {self.delta}")
        c = np.asarray(self.coefficients, dtype=complex)
        _require(c.ndim == 1 and len(c) % 2 == 1, "coefficients must be an odd-length list c_{-n}..c_{n}")
        object.__setattr__(self, "coefficients", tuple(complex(v) for v in c))
        dev = unitarity_defect(c)
        if dev > UNITARITY_TOL:
            raise ValidationError(f"non-real phase: coefficient unitarity violated by {dev:.3e}")

    @property
    def n_max(self) -> int:
        return len(self.coefficients) // 2

    @property
    def extent(self) -> float:
        return float(self.n_max)

    @classmethod
    def from_phase(cls, phase: Callable[[np.ndarray], np.ndarray], delta: float, n_max: int,
                   samples: int = 4096) -> "GeneralPeriodic":
        """Sample ``exp(i phase(t))`` over one period and keep ``|n| <= n_max``."""
        t = 2 * np.pi / delta * np.arange(samples) / samples
        spec = np.fft.fft(np.exp(1j * np.asarray(phase(t)))) / samples
        n = np.arange(-n_max, n_max + 1)
        return cls(delta, tuple(spec[n % samples]))

    def phase(self, t):
        t = np.asarray(t, dtype=float)
        n = np.arange(-self.n_max, self.n_max + 1)
        val = np.tensordot(np.exp(1j * np.multiply.outer(t, n * self.delta)), np.asarray(self.coefficients), axes=1)
        return np.angle(val)


def unitarity_defect(c: np.ndarray) -> float:
    """``max_k |sum_n conj(c_n) c_{n+k} - delta_k0|`` over all lags."""
    c = np.asarray(c, dtype=complex)
    corr = np.correlate(c, c, mode="full")  # corr[k + L - 1] = sum_n c_{n+k} conj(c_n)
    corr[len(c) - 1] -= 1.0
    return float(np.max(np.abs(corr)))


Phase = Union[SinusoidalChirp, GeneralPeriodic]


@dataclass(frozen=True)
class ControlFieldSpec:
    omega2: complex
    phase: Phase

    def __post_init__(self) -> None:
        object.__setattr__(self, "omega2", complex(self.omega2))

    @property
    def delta(self) -> float:
        return self.phase.delta

    @property
    def rabi2(self) -> float:
        return abs(self.omega2) ** 2


@dataclass(frozen=True)
class ProbePulseSpec:
    """Gaussian probe ``omega10 exp(-(t-t0)^2/tau^2) exp(i g' sin(delta' t))``."""

    omega10: complex
    tau: float
    chirp_depth: float = 0.0
    chirp_freq: float = 0.0
    center_time: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "omega10", complex(self.omega10))
        _require(self.tau > 0, f"tau must be > 0, got {self.tau}")
        if self.chirp_depth != 0:
            _require(self.chirp_freq > 0, "a chirped probe needs chirp_freq > 0")

    def field(self, t):
        """Time-domain envelope at ``z = 0``."""
        t = np.asarray(t, dtype=float)
        env = np.exp(-((t - self.center_time) / self.tau) ** 2)
        return self.omega10 * env * np.exp(1j * self.chirp_depth * np.sin(self.chirp_freq * t))

    def energy(self) -> float:
        """``int |field|^2 dt``."""
        return abs(self.omega10) ** 2 * self.tau * math.sqrt(math.pi / 2)

    def check_weak(self, omega2: complex) -> bool:
        weak = abs(self.omega10) <= 0.1 * abs(omega2)
        if not weak:
            warnings.warn(
                f"weak-probe assumption questionable: |omega10|={abs(self.omega10):.3g} > 0.1*|omega2|",
                stacklevel=2,
            )
        return weak


def derive_kappa2(medium: MediumParams, units: AtomicUnits = AU) -> float:
    """Coupling constant ``N |d_ab|^2 omega1 / (2 eps0 hbar)``."""
    return medium.atom_density * abs(medium.dipole_ab) ** 2 * medium.omega1 / (2 * units.eps0 * units.hbar)


@dataclass(frozen=True)
class MixingAngle:
    tan2: float
    sin2: float
    cos2: float
    v_g: float


def mixing_angle(kappa2: float, omega2: complex, units: AtomicUnits = AU) -> MixingAngle:
    """Mixing angle ``tan(theta) = kappa/|omega2|`` and group velocity ``c cos^2``."""
    r2 = abs(omega2) ** 2
    if r2 == 0:
        raise ValidationError("undefined mixing angle: control amplitude is zero")
    tan2 = kappa2 / r2
    # stable for both tiny and huge tan2
    sin2 = kappa2 / (r2 + kappa2)
    cos2 = r2 / (r2 + kappa2)
    return MixingAngle(tan2=tan2, sin2=sin2, cos2=cos2, v_g=units.c * cos2)


def chirp_coefficients(spec: Phase | ControlFieldSpec, n_max: int) -> np.ndarray:
    """``c_n`` for ``n = -n_max .. n_max`` (array index ``n + n_max``).

    Sinusoidal chirps give ``J_n(g)``; general periodic phases are passed
    through (zero-padded or cut to ``n_max``) after a unitarity check.
    """
    if isinstance(spec, ControlFieldSpec):
        spec = spec.phase
    n_max = int(n_max)
    if isinstance(spec, SinusoidalChirp):
        if n_max < math.ceil(abs(spec.g)) + 8:
            raise ValidationError(f"n_max={n_max} too small for chirp depth {spec.g}; need >= ceil(g) + 8")
        return bessel_signed_row(n_max, spec.g)
    c = np.asarray(spec.coefficients, dtype=complex)
    dev = unitarity_defect(c)
    if dev > UNITARITY_TOL:
        raise ValidationError(f"non-real phase: coefficient unitarity violated by {dev:.3e}")
    m = spec.n_max
    out = np.zeros(2 * n_max + 1, dtype=complex)
    lo = max(-m, -n_max)
    hi = min(m, n_max)
    out[lo + n_max : hi + n_max + 1] = c[lo + m : hi + m + 1]
    return out


def default_ladder(control: ControlFieldSpec, pulse: ProbePulseSpec | None = None) -> int:
    """Truncation default ``ceil(max(g, g')) + 10``."""
    g = control.phase.extent
    if pulse is not None:
        g = max(g, abs(pulse.chirp_depth))
    return math.ceil(g) + 10


@dataclass(frozen=True)
class FrequencyGrid:
    """Base band of ``n_omega`` samples times ladder ``s = -ladder .. ladder``."""

    delta: float
    n_omega: int
    ladder: int

    def __post_init__(self) -> None:
        _require(self.delta > 0, "ladder spacing must be > 0")
        _require(self.n_omega >= 2, "need at least two base-band samples")
        _require(self.ladder >= 0, "ladder range must be >= 0")

    @property
    def d_omega(self) -> float:
        return self.delta / self.n_omega

    @property
    def base_freqs(self) -> np.ndarray:
        return -0.5 * self.delta + self.delta * np.arange(self.n_omega) / self.n_omega

    @property
    def ladder_indices(self) -> np.ndarray:
        return np.arange(-self.ladder, self.ladder + 1)

    @property
    def size(self) -> int:
        return 2 * self.ladder + 1

    @property
    def physical_freqs(self) -> np.ndarray:
        """``(n_omega, 2S+1)`` array of ``w_i + s*delta``."""
        return self.base_freqs[:, None] + self.delta * self.ladder_indices[None, :]

    @property
    def flat_freqs(self) -> np.ndarray:
        """All physical frequencies in ascending order."""
        return self.physical_freqs.T.ravel()

    def cell(self, freq: float) -> tuple[int, int]:
        """``(i, s_index)`` of the cell holding the physical frequency ``freq``."""
        k = int(round((freq + (self.ladder + 0.5) * self.delta) / self.d_omega))
        if not 0 <= k < self.n_omega * self.size:
            raise IndexError(f"frequency {freq:g} outside the grid")
        return k % self.n_omega, k // self.n_omega

    def with_ladder(self, ladder: int) -> "FrequencyGrid":
        return FrequencyGrid(self.delta, self.n_omega, ladder)


@dataclass(frozen=True, eq=False)
class FloquetSpectrum:
    """Complex probe amplitudes ``Omega_1(w_i + s delta)`` on a :class:`FrequencyGrid`."""

    grid: FrequencyGrid
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        a = np.array(self.amplitudes, dtype=complex)
        if a.shape != (self.grid.n_omega, self.grid.size):
            raise ValidationError(f"amplitudes shape {a.shape} does not match grid {(self.grid.n_omega, self.grid.size)}")
        if not np.all(np.isfinite(a)):
            raise ValidationError("spectrum contains non-finite amplitudes")
        a.flags.writeable = False
        object.__setattr__(self, "amplitudes", a)

    @property
    def delta(self) -> float:
        return self.grid.delta

    @property
    def base_freqs(self) -> np.ndarray:
        return self.grid.base_freqs

    @property
    def ladder_range(self) -> np.ndarray:
        return self.grid.ladder_indices

    def flat(self) -> tuple[np.ndarray, np.ndarray]:
        """Physical frequencies (ascending) and amplitudes."""
        return self.grid.flat_freqs, self.amplitudes.T.ravel()

    def power(self) -> float:
        """``sum |Omega_1|^2 d_omega`` over all cells."""
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.d_omega)

    def value_at(self, freq: float) -> complex:
        i, s = self.grid.cell(freq)
        return complex(self.amplitudes[i, s])

    def __add__(self, other: "FloquetSpectrum") -> "FloquetSpectrum":
        if other.grid != self.grid:
            raise ValidationError("cannot add spectra on different grids")
        return FloquetSpectrum(self.grid, self.amplitudes + other.amplitudes)

    def __mul__(self, k: complex) -> "FloquetSpectrum":
        return FloquetSpectrum(self.grid, self.amplitudes * k)

    __rmul__ = __mul__


def gaussian_transform(freq, omega10: complex, tau: float, t0: float = 0.0):
    """Transform of ``omega10 exp(-(t-t0)^2/tau^2)``."""
    freq = np.asarray(freq)
    return omega10 * math.sqrt(math.pi) * tau * np.exp(-0.25 * (freq * tau) ** 2 + 1j * freq * t0)


def _check_resolution(pulse: ProbePulseSpec, grid: FrequencyGrid) -> None:
    width = 1.0 / pulse.tau
    if grid.d_omega * SAMPLES_PER_WIDTH > width:
        raise ValidationError(
            f"under-resolved spectrum: d_omega={grid.d_omega:.3e} gives fewer than "
            f"{SAMPLES_PER_WIDTH} samples across 1/tau={width:.3e}"
        )
    reach = 8.0 * width
    if pulse.chirp_depth:
        reach += (math.ceil(abs(pulse.chirp_depth)) + 8) * pulse.chirp_freq
    if reach > (grid.ladder + 0.5) * grid.delta:
        raise ValidationError(
            f"under-resolved spectrum: pulse reaches {reach:.3e} beyond the ladder edge "
            f"{(grid.ladder + 0.5) * grid.delta:.3e}"
        )


def incoming_spectrum(pulse: ProbePulseSpec, grid: FrequencyGrid, check: bool = True) -> FloquetSpectrum:
    """Spectrum of the probe at ``z = 0`` sampled on ``grid``.

    ``sum_n J_n(g') sqrt(pi) tau exp(-(w + n delta')^2 tau^2/4)`` (times the
    center-time phase); chirp peaks sit at multiples of ``delta'`` and are
    sampled directly, without snapping to the ladder.
    """
    if check:
        _check_resolution(pulse, grid)
    freqs = grid.physical_freqs
    g = pulse.chirp_depth
    if g == 0:
        amp = gaussian_transform(freqs, pulse.omega10, pulse.tau, pulse.center_time)
    else:
        n_max = math.ceil(abs(g)) + 25
        coeffs = bessel_signed_row(n_max, g)
        amp = np.zeros(freqs.shape, dtype=complex)
        for n, c in zip(range(-n_max, n_max + 1), coeffs):
            shifted = freqs + n * pulse.chirp_freq
            amp += c * gaussian_transform(shifted, pulse.omega10, pulse.tau, pulse.center_time)
    return FloquetSpectrum(grid, amp)
