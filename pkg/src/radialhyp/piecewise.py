"""Piecewise polynomial profiles on the half line.

Radial data profiles are represented exactly as compactly supported
piecewise polynomials of low degree.  Every 1D weighted norm and every
spherical-mean integral used elsewhere then reduces to closed-form
polynomial arithmetic: no quadrature error enters on the data side.

Pieces are stored in a local (shifted) power basis, ``p(x) = sum c_j
(x - x_i)^j`` on ``[x_i, x_{i+1})``, which stays well conditioned for
arbitrary breakpoint locations.  Functions are zero below the first
breakpoint and equal to ``tail`` (default zero) above the last one; a
nonzero tail arises from antiderivatives of compactly supported data.
"""

from __future__ import annotations

import numpy as np

# Data enters at degree <= 3; monomial weights and antiderivatives can
# push intermediate pieces a few degrees higher.
MAX_DEGREE = 9

_EPS = 1e-12


def _shift_poly(c: np.ndarray, delta: float) -> np.ndarray:
    """Re-express sum c_j u^j as a polynomial in v where u = v + delta."""
    out = np.zeros_like(np.asarray(c, dtype=float))
    for j, cj in enumerate(c):
        if cj == 0.0:
            continue
        # coefficients of (v + delta)^j, built by repeated multiplication
        row = np.zeros(j + 1)
        row[0] = 1.0
        for _ in range(j):
            row[1:] = row[:-1] + delta * row[1:]
            row[0] *= delta
        out[: j + 1] += cj * row
    return out


def _polyval_local(c: np.ndarray, u) -> np.ndarray:
    """Horner evaluation of a local-basis piece at offsets u."""
    u = np.asarray(u, dtype=float)
    acc = np.zeros_like(u)
    for cj in c[::-1]:
        acc = acc * u + cj
    return acc


def _poly_roots_in(c: np.ndarray, lo: float, hi: float) -> list[float]:
    """Real roots of the local-basis piece within [lo, hi] (offsets)."""
    cc = np.array(c, dtype=float)
    scale = np.max(np.abs(cc)) if np.max(np.abs(cc)) > 0 else 1.0
    # trim negligible leading coefficients so np.roots sees the true degree
    nz = np.nonzero(np.abs(cc) > 1e-14 * scale)[0]
    if len(nz) == 0:
        return []
    cc = cc[: nz[-1] + 1]
    if len(cc) == 1:
        return []
    r = np.roots(cc[::-1])
    out = []
    for z in r:
        if abs(z.imag) < 1e-9 * max(1.0, abs(z.real)):
            x = float(z.real)
            if lo - 1e-12 <= x <= hi + 1e-12:
                out.append(min(max(x, lo), hi))
    return sorted(out)


class PiecewisePoly:
    """A piecewise polynomial on [0, inf), zero below its first breakpoint."""

    def __init__(self, breaks, coeffs, tail: float = 0.0):
        breaks = np.asarray(breaks, dtype=float)
        coeffs = np.asarray(coeffs, dtype=float)
        if breaks.ndim != 1 or len(breaks) < 2:
            raise ValueError("need at least two breakpoints")
        if np.any(np.diff(breaks) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if breaks[0] < -_EPS:
            raise ValueError("profiles live on the half line r >= 0")
        if coeffs.ndim != 2 or coeffs.shape[0] != len(breaks) - 1:
            raise ValueError("coeffs must have one row per interval")
        if coeffs.shape[1] > MAX_DEGREE + 1:
            raise ValueError(f"degree above {MAX_DEGREE} not supported")
        if not np.all(np.isfinite(breaks)) or not np.all(np.isfinite(coeffs)):
            raise ValueError("non-finite breakpoint or coefficient")
        self.breaks = breaks
        self.coeffs = coeffs
        self.tail = float(tail)

    # ---------------------------------------------------------------- basics

    @classmethod
    def zero(cls) -> "PiecewisePoly":
        return cls([0.0, 1.0], [[0.0]])

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    def support(self) -> tuple[float, float]:
        return float(self.breaks[0]), float(self.breaks[-1])

    def is_zero(self) -> bool:
        return self.tail == 0.0 and not np.any(self.coeffs)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        shape = x.shape
        xf = np.atleast_1d(x).ravel()
        idx = np.searchsorted(self.breaks, xf, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.coeffs))
        ic = np.clip(idx, 0, len(self.coeffs) - 1)
        u = xf - self.breaks[ic]
        C = self.coeffs[ic]
        acc = C[:, -1].copy()
        for j in range(self.coeffs.shape[1] - 2, -1, -1):
            acc = acc * u + C[:, j]
        out = np.where(inside, acc, 0.0)
        out[xf >= self.breaks[-1]] = self.tail
        if scalar:
            return float(out[0])
        return out.reshape(shape)

    # ------------------------------------------------------------- calculus

    def derivative(self) -> "PiecewisePoly":
        """Pointwise derivative of the polynomial pieces.

        Jump discontinuities of the function itself are *not* turned into
        Dirac atoms here; use :meth:`jump_points` where a distributional
        derivative is needed.
        """
        if self.degree == 0:
            dc = np.zeros((len(self.coeffs), 1))
        else:
            j = np.arange(1, self.degree + 1)
            dc = self.coeffs[:, 1:] * j
        return PiecewisePoly(self.breaks, dc, tail=0.0)

    def antiderivative(self) -> "PiecewisePoly":
        """F(x) = integral of p from 0 to x; continuous, constant tail."""
        k = np.arange(1, self.degree + 2)
        ac = np.zeros((len(self.coeffs), self.degree + 2))
        ac[:, 1:] = self.coeffs / k
        acc = 0.0
        for i in range(len(self.coeffs)):
            ac[i, 0] = acc
            width = self.breaks[i + 1] - self.breaks[i]
            acc = _polyval_local(ac[i], np.array([width]))[0]
        if self.tail != 0.0:
            raise ValueError("cannot integrate a profile with nonzero tail")
        return PiecewisePoly(self.breaks, ac, tail=acc)

    def integral(self, a: float, b: float) -> float:
        """Definite integral over [a, b] with 0 <= a <= b."""
        F = self.antiderivative()
        return F(b) - F(a)

    def abs_moment(self, k: int) -> float:
        """Exact integral of x^k |p(x)| over the support.

        Each piece is split at its real roots so the sign of p is constant
        on every sub-segment.
        """
        if self.tail != 0.0:
            raise ValueError("abs_moment needs a compactly supported profile")
        total = 0.0
        for i in range(len(self.coeffs)):
            x0, x1 = self.breaks[i], self.breaks[i + 1]
            c = self.coeffs[i]
            if not np.any(c):
                continue
            cuts = [0.0] + _poly_roots_in(c, 0.0, x1 - x0) + [x1 - x0]
            cuts = sorted(set(cuts))
            # x^k = (u + x0)^k in the local variable, then multiply in
            if k:
                w = _shift_poly(np.array([0.0] * k + [1.0]), x0)
            else:
                w = np.array([1.0])
            prod = np.convolve(w, c)
            ac = np.zeros(len(prod) + 1)
            ac[1:] = prod / np.arange(1, len(prod) + 1)
            for a, b in zip(cuts[:-1], cuts[1:]):
                if b - a < 1e-15 * max(1.0, x1 - x0):
                    continue
                mid = 0.5 * (a + b)
                sgn = 1.0 if _polyval_local(c, np.array([mid]))[0] >= 0 else -1.0
                seg = _polyval_local(ac, np.array([b]))[0] - _polyval_local(ac, np.array([a]))[0]
                total += sgn * seg
        return float(total)

    # ------------------------------------------------------------- algebra

    def jump_points(self) -> list[tuple[float, float]]:
        """Discontinuities as (location, jump) pairs, entry and exit included."""
        out = []
        xs = self.breaks
        left = 0.0
        for i in range(len(self.coeffs)):
            right_val = _polyval_local(self.coeffs[i], np.array([0.0]))[0]
            if abs(right_val - left) > _EPS * max(1.0, abs(right_val), abs(left)):
                out.append((float(xs[i]), float(right_val - left)))
            width = xs[i + 1] - xs[i]
            left = _polyval_local(self.coeffs[i], np.array([width]))[0]
        if abs(self.tail - left) > _EPS * max(1.0, abs(self.tail), abs(left)):
            out.append((float(xs[-1]), float(self.tail - left)))
        return out

    def is_continuous(self) -> bool:
        return not self.jump_points()

    def monomial_multiply(self, k: int) -> "PiecewisePoly":
        """Return x^k * p(x)."""
        if k == 0:
            return self
        if self.tail != 0.0:
            raise ValueError("monomial multiply needs zero tail")
        out = np.zeros((len(self.coeffs), self.coeffs.shape[1] + k))
        mono = np.zeros(k + 1)
        mono[k] = 1.0
        for i in range(len(self.coeffs)):
            # x^k = (u + x_i)^k in the local variable u
            loc = _shift_poly(mono, self.breaks[i])
            out[i] = np.convolve(loc, self.coeffs[i])
        return PiecewisePoly(self.breaks, out)

    def scaled(self, amplitude: float = 1.0, rate: float = 1.0) -> "PiecewisePoly":
        """Return amplitude * p(rate * x); exact change of variables."""
        if rate <= 0:
            raise ValueError("rate must be positive")
        powers = rate ** np.arange(self.coeffs.shape[1])
        return PiecewisePoly(self.breaks / rate, amplitude * self.coeffs * powers,
                             tail=amplitude * self.tail)

    def _refined_to(self, breaks: np.ndarray) -> np.ndarray:
        """Coefficients of self on the refined breakpoint set."""
        out = np.zeros((len(breaks) - 1, self.coeffs.shape[1]))
        for j in range(len(breaks) - 1):
            x = breaks[j]
            i = np.searchsorted(self.breaks, x + 1e-14, side="right") - 1
            if 0 <= i < len(self.coeffs):
                out[j] = _shift_poly(self.coeffs[i], x - self.breaks[i])
            elif x >= self.breaks[-1] - 1e-14:
                out[j, 0] = self.tail
        return out

    def __add__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        breaks = np.union1d(self.breaks, other.breaks)
        # collapse near-duplicate breakpoints from floating arithmetic
        keep = [0]
        for i in range(1, len(breaks)):
            if breaks[i] - breaks[keep[-1]] > 1e-12 * max(1.0, abs(breaks[i])):
                keep.append(i)
        breaks = breaks[keep]
        d = max(self.coeffs.shape[1], other.coeffs.shape[1])
        a = np.zeros((len(breaks) - 1, d))
        a[:, : self.coeffs.shape[1]] = self._refined_to(breaks)
        b = np.zeros((len(breaks) - 1, d))
        b[:, : other.coeffs.shape[1]] = other._refined_to(breaks)
        return PiecewisePoly(breaks, a + b, tail=self.tail + other.tail)

    def __mul__(self, s: float) -> "PiecewisePoly":
        return PiecewisePoly(self.breaks, self.coeffs * s, tail=self.tail * s)

    __rmul__ = __mul__

    def __neg__(self) -> "PiecewisePoly":
        return self * (-1.0)

    def __sub__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        return self + (-other)


# ----------------------------------------------------------- standard shapes


def indicator_profile(a: float, b: float, amplitude: float = 1.0) -> PiecewisePoly:
    """Discontinuous box on [a, b]."""
    return PiecewisePoly([a, b], [[amplitude]])


def tent_profile(a: float, b: float, peak: float = 1.0) -> PiecewisePoly:
    """Continuous tent on [a, b] with apex at the midpoint."""
    m = 0.5 * (a + b)
    s = peak / (m - a)
    return PiecewisePoly([a, m, b], [[0.0, s], [peak, -s]])


def bump_profile(a: float, b: float, peak: float = 1.0) -> PiecewisePoly:
    """C^2 cubic B-spline bump supported on [a, b] with maximum ``peak``."""
    h = (b - a) / 4.0
    # uniform cubic B-spline pieces in the local variable u in [0, h],
    # normalized so the midpoint value is 1
    c = np.array(
        [
            [0.0, 0.0, 0.0, 1.0 / (6 * h**3)],
            [1.0 / 6, 1.0 / (2 * h), 1.0 / (2 * h**2), -1.0 / (2 * h**3)],
            [2.0 / 3, 0.0, -1.0 / h**2, 1.0 / (2 * h**3)],
            [1.0 / 6, -1.0 / (2 * h), 1.0 / (2 * h**2), -1.0 / (6 * h**3)],
        ]
    )
    breaks = a + h * np.arange(5)
    return PiecewisePoly(breaks, c * (peak / (2.0 / 3.0)))
