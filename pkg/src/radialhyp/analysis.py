"""Norms, exact radial wave solutions, and the bilinear estimate harness.

Three exact field evaluators back the estimate checks, all built on the
piecewise engine so the only numerical error is quadrature of the
space-time integral on the left-hand side:

* :class:`DuhamelWave` — wave pair launched from zero fields with radial
  velocity data (phi, psi); this is the reduced form in which the
  distinct-speed estimate is stated.
* :class:`InitialValueWave` — the coupled characteristic pair evolved
  from initial fields (rho~_0, w~_0); it solves the first-order radial
  pair system exactly and handles the opposite-speed case, where the
  sign of the speed matters.
* :class:`FrozenWave` — a zero-speed channel, whose homogeneous fields
  are constant in time.

Evaluation at negative wave-cone arguments uses the parity natural to
radial fields: scalar-like data extend evenly, vector-like data oddly.
The lower spherical-mean boundary term inherits that parity, which for
r < c t flips the sign relative to a naive reading of the fundamental
formula; the flipped form is the one that actually solves the equations
and keeps r (rho~ + w~) -> 0 at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .piecewise import PiecewisePoly

FOUR_PI = 4.0 * np.pi


# ------------------------------------------------------------------- norms


def radial_w21(u: PiecewisePoly) -> float:
    """Homogeneous second-order L1 norm of a radial function of R^3.

    The Hessian of a radial scalar has eigenvalues u'' and u'/r (twice),
    so the norm is 4 pi * int (r^2 |u''| + 2 r |u'|) dr, computed exactly.
    Kinks of u contribute Dirac atoms r_k^2 |jump of u'| to the second
    derivative; u itself must be continuous.
    """
    if not u.is_continuous():
        raise ValueError("profile must be continuous for the second-order norm")
    du = u.derivative()
    atoms = sum(x * x * abs(j) for x, j in du.jump_points())
    return FOUR_PI * (du.derivative().abs_moment(2) + atoms + 2.0 * du.abs_moment(1))


def w21_surrogate(profiles) -> float:
    """Scaling-invariant data norm: channel sum of :func:`radial_w21`."""
    return float(sum(radial_w21(p) for p in profiles))


@dataclass
class NormReport:
    """Weighted-BV sample; ``alpha0``/``alpha1`` are the plain and
    scaling-operator-weighted halves of the norm."""

    t: float
    alpha0: float
    alpha1: float
    w21_surrogate: float | None = None

    @property
    def total(self) -> float:
        return self.alpha0 + self.alpha1


def weighted_bv(prev, mid, nxt) -> NormReport:
    """Weighted-BV norm of a state from three consecutive time levels.

    Per channel u, with f = r u: alpha0 sums the L1 norms of f_t and f_r,
    alpha1 the L1 norms of L0 f_t and L0 f_r where L0 = t d_t + r d_r.
    Time derivatives are central over the window; spatial ones central on
    the grid; L1 is the trapezoid rule over cell centers.
    """
    dt1 = mid.t - prev.t
    dt2 = nxt.t - mid.t
    if abs(dt1 - dt2) > 1e-9 * max(dt1, dt2) or dt1 <= 0:
        raise ValueError("window must have uniform positive spacing")
    if prev.grid is not mid.grid and prev.grid.N != mid.grid.N:
        raise ValueError("window states live on different grids")
    dt = dt1
    r = mid.grid.r
    h = mid.grid.h
    t = mid.t
    a0 = 0.0
    a1 = 0.0
    for attr in ("rho_tilde", "w_tilde"):
        f_prev = r * getattr(prev, attr)
        f_mid = r * getattr(mid, attr)
        f_next = r * getattr(nxt, attr)
        for e in range(f_mid.shape[0]):
            ft = (f_next[e] - f_prev[e]) / (2 * dt)
            fr = np.gradient(f_mid[e], h)
            ftt = (f_next[e] - 2 * f_mid[e] + f_prev[e]) / dt**2
            ftr = (np.gradient(f_next[e], h) - np.gradient(f_prev[e], h)) / (2 * dt)
            frr = np.gradient(fr, h)
            a0 += np.trapezoid(np.abs(ft), dx=h) + np.trapezoid(np.abs(fr), dx=h)
            l0_ft = t * ftt + r * ftr
            l0_fr = t * ftr + r * frr
            a1 += np.trapezoid(np.abs(l0_ft), dx=h) + np.trapezoid(np.abs(l0_fr), dx=h)
    return NormReport(t=t, alpha0=float(a0), alpha1=float(a1))


# ------------------------------------------------- exact wave field oracles


def _even(p: PiecewisePoly, x: np.ndarray) -> np.ndarray:
    return p(np.abs(x))


def _odd(p: PiecewisePoly, x: np.ndarray) -> np.ndarray:
    return x * p(np.abs(x))


def _support_union(*profiles) -> tuple[float, float]:
    los, his = [], []
    for p in profiles:
        if p is not None and not p.is_zero():
            lo, hi = p.support()
            los.append(lo)
            his.append(hi)
    if not los:
        return 0.0, 0.0
    return min(los), max(his)


class DuhamelWave:
    """Radial wave pair with zero initial fields and velocity data (phi, psi).

    The fields depend on the wave speed only through |lambda|; ``speed``
    must be positive.
    """

    def __init__(self, phi: PiecewisePoly, psi: PiecewisePoly, speed: float):
        if speed <= 0:
            raise ValueError("speed must be positive")
        self.c = float(speed)
        self.phi = phi
        self.psi = psi
        self.Phi = phi.monomial_multiply(1).antiderivative()
        self.Psi = psi.monomial_multiply(1).antiderivative()
        self.dpsi = psi.derivative()
        self.s_lo, self.s_hi = _support_union(phi, psi)

    def support(self, t: float) -> tuple[float, float]:
        ct = self.c * t
        return max(0.0, ct - self.s_hi, self.s_lo - ct), ct + self.s_hi

    def crit_lines(self) -> list[tuple[float, float]]:
        lines = [(0.0, self.c)]
        for p in (self.phi, self.psi):
            if p.is_zero():
                continue
            for s in p.breaks:
                lines += [(s, -self.c), (s, self.c), (-s, self.c)]
        return lines

    def components(self, t: float, r):
        """Return (rho~, w~, h_term, m_term) at time t and radii r > 0."""
        r = np.asarray(r, dtype=float)
        c = self.c
        eta = c * t + r
        xs = c * t - r                      # signed lower-cone coordinate
        ax = np.abs(xs)
        inv2cr = 1.0 / (2.0 * c * r)
        rho = (self.Phi(eta) - self.Phi(ax)) * inv2cr
        S = (self.Psi(eta) - self.Psi(ax)) * inv2cr      # = w~~(t, r)
        g_e = eta * self.psi(eta)
        g_x = xs * self.psi(ax)
        w = -S / r + (g_e + g_x) * inv2cr
        h_term = rho + (g_e + g_x) * inv2cr
        m_term = -S / r
        return rho, w, h_term, m_term

    def z_and_zr(self, t: float, r):
        """Sum field z = rho~ + w~ and its radial derivative, vectorized."""
        r = np.asarray(r, dtype=float)
        c = self.c
        eta = c * t + r
        xs = c * t - r
        ax = np.abs(xs)
        inv2cr = 1.0 / (2.0 * c * r)
        rho = (self.Phi(eta) - self.Phi(ax)) * inv2cr
        S = (self.Psi(eta) - self.Psi(ax)) * inv2cr
        psi_e = self.psi(eta)
        psi_x = self.psi(ax)
        g_e = eta * psi_e
        g_x = xs * psi_x
        w = -S / r + (g_e + g_x) * inv2cr
        z = rho + w
        g_phi = eta * self.phi(eta) + xs * self.phi(ax)
        rho_r = -rho / r + g_phi * inv2cr
        G1_e = psi_e + eta * self.dpsi(eta)
        G1_x = psi_x + ax * self.dpsi(ax)
        S_rr = (G1_e - G1_x) * inv2cr - (g_e + g_x) * inv2cr / r - w / r + S / r**2
        return z, rho_r + S_rr


class InitialValueWave:
    """Characteristic pair evolved from initial fields (rho~_0, w~_0).

    ``lam`` is the signed characteristic speed; the fields solve

        rho~_t + lam w~_r + (2/r) lam w~ = 0,   w~_t + lam rho~_r = 0

    exactly, with rho~ extending evenly and w~ oddly through the origin.
    """

    def __init__(self, rho0: PiecewisePoly, w0: PiecewisePoly, lam: float):
        if lam == 0:
            raise ValueError("use FrozenWave for a zero-speed channel")
        self.lam = float(lam)
        self.c = abs(lam)
        self.sgn = 1.0 if lam > 0 else -1.0
        self.rho0 = rho0
        self.w0 = w0
        self.W = w0.antiderivative()
        self.FI = rho0.monomial_multiply(1).antiderivative()
        self.drho0 = rho0.derivative()
        self.dw0 = w0.derivative()
        self.s_lo, self.s_hi = _support_union(rho0, w0)

    def support(self, t: float) -> tuple[float, float]:
        ct = self.c * t
        return max(0.0, ct - self.s_hi, self.s_lo - ct), ct + self.s_hi

    def crit_lines(self) -> list[tuple[float, float]]:
        lines = [(0.0, self.c)]
        for p in (self.rho0, self.w0):
            if p.is_zero():
                continue
            for s in p.breaks:
                lines += [(s, -self.c), (s, self.c), (-s, self.c)]
        return lines

    def _parts(self, t: float, r):
        r = np.asarray(r, dtype=float)
        eta = r + self.c * t
        xb = r - self.c * t
        axb = np.abs(xb)
        sgn_xb = np.sign(xb)
        F_e, F_x = _odd(self.rho0, eta), xb * self.rho0(axb)
        K_e = self.W(eta) + eta * self.w0(eta)
        K_x = self.W(axb) + axb * self.w0(axb)
        H_e, H_x = eta * self.W(eta), xb * self.W(axb)
        FI_e, FI_x = self.FI(eta), self.FI(axb)
        s = self.sgn
        u = 0.5 * (F_e + F_x) - 0.5 * s * (K_e - K_x)
        zi = 0.5 * (H_e + H_x) - 0.5 * s * (FI_e - FI_x)
        zir = 0.5 * (K_e + K_x) - 0.5 * s * (F_e - F_x)
        Fp_e = self.rho0(eta) + eta * self.drho0(eta)
        Fp_x = self.rho0(axb) + axb * self.drho0(axb)
        Kp_e = 2.0 * self.w0(eta) + eta * self.dw0(eta)
        Kp_x = sgn_xb * (2.0 * self.w0(axb) + axb * self.dw0(axb))
        ur = 0.5 * (Fp_e + Fp_x) - 0.5 * s * (Kp_e - Kp_x)
        zirr = 0.5 * (Kp_e + Kp_x) - 0.5 * s * (Fp_e - Fp_x)
        return u, ur, zi, zir, zirr

    def fields(self, t: float, r):
        """Return (rho~, w~) at time t and radii r > 0."""
        r = np.asarray(r, dtype=float)
        u, _, zi, zir, _ = self._parts(t, r)
        return u / r, zir / r - zi / r**2

    def z_and_zr(self, t: float, r):
        r = np.asarray(r, dtype=float)
        u, ur, zi, zir, zirr = self._parts(t, r)
        z = (u + zir) / r - zi / r**2
        zr = (ur + zirr) / r - (u + 2.0 * zir) / r**2 + 2.0 * zi / r**3
        return z, zr


class FrozenWave:
    """Zero-speed channel: homogeneous fields are frozen at their data."""

    def __init__(self, rho0: PiecewisePoly, w0: PiecewisePoly):
        self.rho0 = rho0
        self.w0 = w0
        self.zsum = rho0 + w0
        self.dz = self.zsum.derivative()
        self.s_lo, self.s_hi = _support_union(rho0, w0)

    def support(self, t: float) -> tuple[float, float]:
        return self.s_lo, self.s_hi

    def crit_lines(self) -> list[tuple[float, float]]:
        return [(s, 0.0) for s in self.zsum.breaks]

    def fields(self, t: float, r):
        r = np.asarray(r, dtype=float)
        return self.rho0(r), self.w0(r)

    def z_and_zr(self, t: float, r):
        r = np.asarray(r, dtype=float)
        return self.zsum(r), self.dz(r)


@dataclass
class DalembertValues:
    """Field components of a velocity-data wave pair at fixed (t, r)."""

    rho_tilde: np.ndarray
    w_tilde: np.ndarray
    total: np.ndarray
    h_term: np.ndarray
    m_term: np.ndarray


def dalembert_pair(phi: PiecewisePoly, psi: PiecewisePoly, lam: float,
                   t: float, r) -> DalembertValues:
    """Exact spherical-mean evaluation of the velocity-data wave pair.

    rho~ is the spherical mean of phi, w~ the radial derivative of the
    spherical mean of psi; ``total`` is their sum split into the h-term
    (first-moment part) and m-term (second-moment part).  The fields
    depend on the speed through |lambda| only; lambda must be nonzero,
    r positive, t nonnegative.
    """
    if lam == 0:
        raise ValueError("zero-speed channels satisfy ODEs; no wave form")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("radii must be positive")
    if t < 0:
        raise ValueError("t must be nonnegative")
    wave = DuhamelWave(phi, psi, abs(lam))
    rho, w, h_term, m_term = wave.components(t, r)
    return DalembertValues(rho_tilde=rho, w_tilde=w, total=rho + w,
                           h_term=h_term, m_term=m_term)


def pair_solution(rho0: PiecewisePoly, w0: PiecewisePoly, lam: float,
                  t: float, r) -> tuple[np.ndarray, np.ndarray]:
    """Exact (rho~, w~) of the radial characteristic pair at time t."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("radii must be positive")
    if lam == 0:
        return rho0(r), w0(r)
    return InitialValueWave(rho0, w0, lam).fields(t, r)


# ----------------------------------------------------- bilinear estimates


@dataclass
class QuadConfig:
    """Adaptive panel quadrature controls for the space-time integral."""

    rel_tol: float = 1e-6
    max_depth: int = 10
    panel_budget: int = 40000

    def scaled(self, **kw) -> "QuadConfig":
        d = dict(rel_tol=self.rel_tol, max_depth=self.max_depth,
                 panel_budget=self.panel_budget)
        d.update(kw)
        return QuadConfig(**d)


_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GAUSS_CACHE:
        _GAUSS_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GAUSS_CACHE[n]


class _Budget:
    def __init__(self, limit: int):
        self.left = limit

    def take(self) -> bool:
        self.left -= 1
        return self.left >= 0


def _tau_cuts(wave_a, wave_b, t0: float, t1: float) -> list[float]:
    """Times where critical lines of either wave intersect or hit r = 0."""
    lines = wave_a.crit_lines() + wave_b.crit_lines()
    taus = set()
    for i, (u1, v1) in enumerate(lines):
        if v1 != 0.0:
            tz = -u1 / v1
            if t0 + 1e-12 < tz < t1 - 1e-12:
                taus.add(tz)
        for u2, v2 in lines[i + 1:]:
            if v1 != v2:
                tc = (u2 - u1) / (v1 - v2)
                if t0 + 1e-12 < tc < t1 - 1e-12:
                    taus.add(tc)
    return sorted({t0, t1} | taus)


def _segment_strips(wave_a, wave_b, t0: float, t1: float) -> np.ndarray:
    """All integration strips over [t0, t1] as rows (a, b, u1, v1, u2, v2).

    Between consecutive critical times no lines cross, so each tau panel
    decomposes into strips bounded by adjacent lines r = u + v tau; the
    common support edges belong to the same line family.
    """
    cuts = _tau_cuts(wave_a, wave_b, t0, t1)
    lines = wave_a.crit_lines() + wave_b.crit_lines() + [(0.0, 0.0)]
    rows = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a < 1e-13:
            continue
        tm = 0.5 * (a + b)
        lo = max(wave_a.support(tm)[0], wave_b.support(tm)[0])
        hi = min(wave_a.support(tm)[1], wave_b.support(tm)[1])
        if hi - lo < 1e-13:
            continue
        kept = sorted((u + v * tm, u, v) for u, v in lines
                      if lo - 1e-11 <= u + v * tm <= hi + 1e-11)
        for (x1, u1, v1), (x2, u2, v2) in zip(kept[:-1], kept[1:]):
            if x2 - x1 > 1e-11 * max(1.0, hi):
                rows.append((a, b, u1, v1, u2, v2))
    return np.array(rows).reshape(-1, 6)


def _eval_strips(g, rows: np.ndarray, nt: int, ns: int) -> np.ndarray:
    """Product-Gauss integrals of g over every strip row, in one batch."""
    if not len(rows):
        return np.zeros(0)
    xt, wt = _leggauss(nt)
    xs, ws = _leggauss(ns)
    a, b, u1, v1, u2, v2 = rows.T
    tm, th = 0.5 * (a + b), 0.5 * (b - a)
    taus = tm[:, None] + th[:, None] * xt[None, :]          # (S, nt)
    sig = 0.5 + 0.5 * xs
    r1 = u1[:, None] + v1[:, None] * taus
    width = (u2[:, None] + v2[:, None] * taus) - r1
    R = r1[:, :, None] + width[:, :, None] * sig[None, None, :]   # (S, nt, ns)
    T = np.broadcast_to(taus[:, :, None], R.shape)
    G = g(T, R)
    return th * np.einsum("t,stn,n,st->s", wt, G, ws, 0.5 * width)


def _split_rows(rows: np.ndarray, transverse: bool) -> np.ndarray:
    """Bisect strips; the midline of two bounding lines is again a line."""
    a, b, u1, v1, u2, v2 = rows.T
    if transverse:
        um, vm = 0.5 * (u1 + u2), 0.5 * (v1 + v2)
        k1 = np.stack([a, b, u1, v1, um, vm], axis=1)
        k2 = np.stack([a, b, um, vm, u2, v2], axis=1)
    else:
        m = 0.5 * (a + b)
        k1 = np.stack([a, m, u1, v1, u2, v2], axis=1)
        k2 = np.stack([m, b, u1, v1, u2, v2], axis=1)
    return np.concatenate([k1, k2])


@dataclass
class _LhsAccumulator:
    value: float = 0.0
    err: float = 0.0
    budget: _Budget = field(default_factory=lambda: _Budget(0))


def _lhs_segment(wave_a, wave_b, t0: float, t1: float, quad: QuadConfig,
                 acc: _LhsAccumulator) -> None:
    """Accumulate the space-time integral over [t0, t1] into ``acc``.

    All strips are evaluated in vectorized batches; refinement is
    breadth-first, bisecting only the strips whose embedded error
    estimate exceeds their fair share, alternating split directions,
    until the segment error meets the global relative tolerance or the
    panel budget runs out.
    """

    def g(T, R):
        za, zra = wave_a.z_and_zr(T, R)
        zb, zrb = wave_b.z_and_zr(T, R)
        out = np.abs(R * (zra * zb + za * zrb))
        return np.where(R > 1e-12, out, 0.0)

    rows = _segment_strips(wave_a, wave_b, t0, t1)
    if not len(rows):
        return
    acc.budget.left -= len(rows)
    vals = _eval_strips(g, rows, 9, 9)
    errs = np.abs(vals - _eval_strips(g, rows, 5, 5))
    scale = max(float(np.sum(np.abs(vals))), acc.value, 1e-300)
    tol_total = quad.rel_tol * scale
    for it in range(2 * quad.max_depth):
        if float(np.sum(errs)) <= tol_total or acc.budget.left <= 0:
            break
        sel = errs > tol_total / len(rows)
        if not np.any(sel):
            break
        kids = _split_rows(rows[sel], transverse=(it % 2 == 1))
        acc.budget.left -= len(kids)
        kvals = _eval_strips(g, kids, 9, 9)
        kerrs = np.abs(kvals - _eval_strips(g, kids, 5, 5))
        rows = np.concatenate([rows[~sel], kids])
        vals = np.concatenate([vals[~sel], kvals])
        errs = np.concatenate([errs[~sel], kerrs])
    acc.value += float(np.sum(vals))
    acc.err += float(np.sum(errs))


def classify_speeds(lambda_a: float, lambda_b: float, tol: float = 1e-12) -> str:
    """Admissible estimate case for a speed pair, or raise."""
    za, zb = abs(lambda_a) <= tol, abs(lambda_b) <= tol
    if za and zb:
        raise ValueError("both speeds zero: excluded (the null condition "
                         "never pairs two zero-speed channels)")
    if za or zb:
        return "zero"
    if abs(lambda_a - lambda_b) <= tol:
        raise ValueError("equal speeds: same-family products are excluded "
                         "by the null condition")
    if abs(lambda_a + lambda_b) <= tol:
        return "opposite"
    return "distinct"


def make_waves(data_a, data_b, lambda_a: float, lambda_b: float):
    """Build the field evaluators for an admissible speed pair.

    ``data_a``/``data_b`` are pairs of profiles whose meaning depends on
    the case: velocity data (phi, psi) for a moving factor in the
    distinct- and zero-speed cases, initial fields (rho~_0, w~_0) for
    both factors in the opposite-speed case and for the frozen factor.
    Returns (wave_a, wave_b, case) with the zero-speed factor first.
    """
    case = classify_speeds(lambda_a, lambda_b)
    if case == "distinct":
        return (DuhamelWave(data_a[0], data_a[1], abs(lambda_a)),
                DuhamelWave(data_b[0], data_b[1], abs(lambda_b)), case)
    if case == "opposite":
        return (InitialValueWave(data_a[0], data_a[1], lambda_a),
                InitialValueWave(data_b[0], data_b[1], lambda_b), case)
    if abs(lambda_a) > abs(lambda_b):   # normalize: zero-speed factor first
        data_a, data_b = data_b, data_a
        lambda_a, lambda_b = lambda_b, lambda_a
    return (FrozenWave(data_a[0], data_a[1]),
            DuhamelWave(data_b[0], data_b[1], abs(lambda_b)), case)


def bilinear_lhs(data_a, data_b, lambda_a: float, lambda_b: float, T: float,
                 quad: QuadConfig | None = None) -> float:
    """L1([0,T] x R+) norm of r d_r[(rho~_a + w~_a)(rho~_b + w~_b)].

    The factor fields are exact; the space-time integral uses adaptive
    panels split along the characteristic lines through the data
    breakpoints.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    for d in (data_a, data_b):
        for p in d:
            if p.tail != 0.0:
                raise ValueError("data profiles must be compactly supported")
    quad = quad or QuadConfig()
    wave_a, wave_b, _ = make_waves(data_a, data_b, lambda_a, lambda_b)
    acc = _LhsAccumulator(budget=_Budget(quad.panel_budget))
    _lhs_segment(wave_a, wave_b, 0.0, T, quad, acc)
    return acc.value


def _weighted_deriv_l1(f: PiecewisePoly, k: int) -> float:
    """L1 norm of x^k f'(x) with Dirac atoms at jumps of f included."""
    atoms = sum(abs(x) ** k * abs(j) for x, j in f.jump_points())
    return f.derivative().abs_moment(k) + atoms


def bilinear_rhs(data_a, data_b, case: str) -> float:
    """Data-norm product on the right of the bilinear estimate.

    distinct:  (|s phi_a| + |(s psi_a)'|) (|s^2 phi_b'| + |s (s psi_b)''|)
    zero:      (|r rho~_a0'| + |r w~_a0'|) (same second factor)
    opposite:  (|r rho~_a0'| + |r w~_a0'|) (second-order norms of the b data)
    with all norms L1 on the half line, computed exactly.
    """
    if case == "distinct":
        phi_a, psi_a = data_a
        fac_a = phi_a.abs_moment(1) + _weighted_deriv_l1(psi_a.monomial_multiply(1), 0)
        fac_b = _strong_factor(data_b)
    elif case == "zero":
        rho_a, w_a = data_a
        fac_a = _weighted_deriv_l1(rho_a, 1) + _weighted_deriv_l1(w_a, 1)
        fac_b = _strong_factor(data_b)
    elif case == "opposite":
        rho_a, w_a = data_a
        fac_a = _weighted_deriv_l1(rho_a, 1) + _weighted_deriv_l1(w_a, 1)
        rho_b, w_b = data_b
        fac_b = radial_w21(rho_b) + radial_w21(w_b)
    else:
        raise ValueError(f"unknown case {case!r}")
    return float(fac_a * fac_b)


def _strong_factor(data) -> float:
    phi, psi = data
    if not psi.is_continuous():
        raise ValueError("psi must be continuous for the second-order factor")
    spsi_d = psi.monomial_multiply(1).derivative()       # (s psi)' as a function
    return _weighted_deriv_l1(phi, 2) + _weighted_deriv_l1(spsi_d, 1)


@dataclass
class BilinearScan:
    """Ratio series of the bilinear estimate over an evaluation-horizon grid."""

    case: str
    lambda_a: float
    lambda_b: float
    T: np.ndarray
    lhs: np.ndarray
    rhs: float
    achieved_rel_err: float

    @property
    def ratio(self) -> np.ndarray:
        return self.lhs / self.rhs

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratio))

    @property
    def tail_slope(self) -> float:
        if len(self.T) < 2:
            return 0.0
        return float((self.ratio[-1] - self.ratio[-2]) / (self.T[-1] - self.T[-2]))


def bilinear_scan(data_a, data_b, lambda_a: float, lambda_b: float,
                  T_grid, quad: QuadConfig | None = None) -> BilinearScan:
    """Scan LHS/RHS over horizons, computing the LHS incrementally."""
    quad = quad or QuadConfig()
    T_grid = np.sort(np.asarray(T_grid, dtype=float))
    if np.any(T_grid <= 0):
        raise ValueError("horizons must be positive")
    wave_a, wave_b, case = make_waves(data_a, data_b, lambda_a, lambda_b)
    if case == "zero" and abs(lambda_a) > abs(lambda_b):
        data_a, data_b = data_b, data_a      # match the normalized wave order
    rhs = bilinear_rhs(data_a, data_b, case)
    if rhs <= 0:
        raise ValueError("right-hand side vanishes; ratio undefined")
    acc = _LhsAccumulator(budget=_Budget(quad.panel_budget))
    lhs = np.zeros(len(T_grid))
    t_prev = 0.0
    for i, T in enumerate(T_grid):
        _lhs_segment(wave_a, wave_b, t_prev, float(T), quad, acc)
        lhs[i] = acc.value
        t_prev = float(T)
    rel_err = acc.err / max(acc.value, 1e-300)
    return BilinearScan(case=case, lambda_a=lambda_a, lambda_b=lambda_b,
                        T=T_grid, lhs=lhs, rhs=rhs, achieved_rel_err=rel_err)
