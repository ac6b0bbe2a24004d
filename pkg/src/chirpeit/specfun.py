r"""Integer-order Bessel functions of the first kind.

Values are produced by Miller's backward recurrence

.. math::
    J_{n-1}(x) = \frac{2n}{x} J_n(x) - J_{n+1}(x)

started well above the highest requested order and normalised with
:math:`J_0(x) + 2\sum_{k\ge1} J_{2k}(x) = 1`.  Negative orders and arguments
are obtained from :math:`J_{-n}(x) = (-1)^n J_n(x)` and
:math:`J_n(-x) = (-1)^n J_n(x)`, so both symmetries hold exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BesselRow",
    "bessel_j",
    "bessel_row",
    "bessel_signed_row",
    "MAX_ARGUMENT",
]

MAX_ARGUMENT = 1.0e4
_RESCALE_ABOVE = 1.0e250
_RESCALE_BY = 1.0e-250
# below this the two-term series is exact in double precision and the
# recurrence ratio 2n/x would overflow
_SERIES_BELOW = 1.0e-8


@dataclass(frozen=True)
class BesselRow:
    """``J_0(x) .. J_{n_max}(x)`` for a single real argument."""

    x: float
    values: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    @property
    def order_range(self) -> range:
        return range(self.n_max + 1)

    def __getitem__(self, n: int) -> float:
        m = abs(n)
        if m > self.n_max:
            raise IndexError(f"order {n} outside row 0..{self.n_max}")
        v = float(self.values[m])
        return -v if (n < 0 and m % 2) else v

    def signed(self) -> np.ndarray:
        """Values for orders ``-n_max .. n_max``."""
        neg = self.values[:0:-1].copy()
        neg[(np.arange(self.n_max, 0, -1) % 2) == 1] *= -1.0
        return np.concatenate([neg, self.values])

    def normalization_sum(self) -> float:
        """``sum_{n=-n_max}^{n_max} J_n(x)^2``; tends to 1 as ``n_max`` grows."""
        return float(self.values[0] ** 2 + 2.0 * np.sum(self.values[1:] ** 2))


def _miller(n_max: int, ax: float) -> np.ndarray:
    n_start = n_max + math.ceil(10 + 1.5 * ax)
    if n_start % 2:
        n_start += 1
    out = np.zeros(n_max + 1)
    f_next = 0.0
    f_cur = 1.0e-300
    norm = 0.0
    for k in range(n_start, 0, -1):
        if k <= n_max:
            out[k] = f_cur
        if k % 2 == 0:
            norm += 2.0 * f_cur
        f_prev = (2.0 * k / ax) * f_cur - f_next
        f_next, f_cur = f_cur, f_prev
        if abs(f_cur) > _RESCALE_ABOVE:
            f_cur *= _RESCALE_BY
            f_next *= _RESCALE_BY
            norm *= _RESCALE_BY
            out[k - 1 :] *= _RESCALE_BY
    out[0] = f_cur
    norm += f_cur
    return out / norm


def bessel_row(n_max: int, x: float) -> BesselRow:
    """Evaluate ``J_0(x) .. J_{n_max}(x)`` by backward recurrence.

    Raises
    ------
    ValueError
        If ``n_max < |x| + 8`` ("recurrence unstable") or ``|x|`` exceeds
        the design range.
    """
    n_max = int(n_max)
    x = float(x)
    ax = abs(x)
    if not math.isfinite(x) or ax > MAX_ARGUMENT:
        raise ValueError(f"argument {x!r} outside design range |x| <= {MAX_ARGUMENT:g}")
    if n_max < 0 or n_max < ax + 8:
        raise ValueError(f"recurrence unstable: n_max={n_max} must be >= |x| + 8 = {ax + 8:g}")
    if ax == 0.0:
        values = np.zeros(n_max + 1)
        values[0] = 1.0
        return BesselRow(x, values)
    if ax < _SERIES_BELOW:
        n = np.arange(n_max + 1)
        with np.errstate(under="ignore"):
            log_term = n * (math.log(ax) - math.log(2.0)) - np.array([math.lgamma(k + 1) for k in n])
            values = np.exp(log_term) * (1.0 - (ax / 2) ** 2 / (n + 1))
    else:
        values = _miller(n_max, ax)
    if x < 0:
        values[1::2] *= -1.0
    return BesselRow(x, values)


def bessel_j(n: int, x: float) -> float:
    """``J_n(x)`` for integer ``n`` and real ``|x| <= 1e4``."""
    n = int(n)
    m = abs(n)
    row = bessel_row(max(m, math.ceil(abs(float(x))) + 8), x)
    return row[n]


def bessel_signed_row(n_max: int, x: float) -> np.ndarray:
    """``J_n(x)`` for ``n = -n_max .. n_max`` as one array (index ``n + n_max``).

    Unlike :func:`bessel_row`, ``n_max`` may be smaller than ``|x| + 8``; the
    recurrence then runs on a longer row which is cut down afterwards.
    """
    n_max = int(n_max)
    full = bessel_row(max(n_max, math.ceil(abs(float(x))) + 8), x)
    return full.signed()[full.n_max - n_max : full.n_max + n_max + 1]
