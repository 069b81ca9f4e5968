"""Upwind time marching of the diagonal radial system.

The unknowns are the characteristic pairs (rho~_e, w~_e) on a cell-centered
grid r_j = (j + 1/2) h that excludes the origin.  Each step advects the
Riemann combinations rho~_e +- w~_e at speeds +-lambda_e by first-order
upwinding, then applies the geometric source -(2/r) lambda_e w~_e and the
quadratic couplings by explicit Euler.  Zero-speed channels skip advection
and evolve as ODEs in every cell.

Origin regularity is encoded by ghost-cell parity (rho~ even, w~ odd);
the outer boundary extrapolates at zero order (outflow).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import NormReport, weighted_bv
from .reduction import DiagonalRadialSystem, to_characteristic
from .system_model import SystemSpec

BLOWUP_LIMIT = 1e8


class CflError(ValueError):
    """Time step violates the advective stability bound."""


@dataclass
class BlowupSignal:
    t: float
    r: float
    channel: int

    def __str__(self):
        return (f"field blew up at t={self.t:.6g}, r={self.r:.6g}, "
                f"channel {self.channel}")


@dataclass
class RadialGrid:
    """Cell-centered grid on (0, R_max]; no node sits at the origin."""

    R_max: float
    N: int

    def __post_init__(self):
        if self.R_max <= 0:
            raise ValueError("R_max must be positive")
        if self.N < 8:
            raise ValueError("need at least 8 cells")

    @property
    def h(self) -> float:
        return self.R_max / self.N

    @property
    def r(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) * self.h


@dataclass
class RadialState:
    """Characteristic fields at one time level: arrays of shape (l+m, N)."""

    t: float
    rho_tilde: np.ndarray
    w_tilde: np.ndarray
    grid: RadialGrid

    def copy(self) -> "RadialState":
        return RadialState(self.t, self.rho_tilde.copy(), self.w_tilde.copy(),
                           self.grid)

    def check_finite(self) -> BlowupSignal | None:
        for name, arr in (("rho", self.rho_tilde), ("w", self.w_tilde)):
            bad = ~np.isfinite(arr) | (np.abs(arr) > BLOWUP_LIMIT)
            if np.any(bad):
                e, j = np.argwhere(bad)[0]
                return BlowupSignal(self.t, float(self.grid.r[j]), int(e))
        return None


@dataclass
class Trajectory:
    snapshots: list[RadialState] = field(default_factory=list)
    norms: list[NormReport] = field(default_factory=list)
    blowup: BlowupSignal | None = None
    dt: float = 0.0

    @property
    def completed(self) -> bool:
        return self.blowup is None

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])


def initial_from_profiles(rho_profiles, w_profiles, grid: RadialGrid,
                          system: DiagonalRadialSystem,
                          w_origin_tol: float = 1e-10) -> RadialState:
    """Sample physical profiles at cell centers and go characteristic.

    ``rho_profiles`` / ``w_profiles`` are sequences of callables of r.
    Vector-channel profiles must vanish at the origin, as any regular
    radial vector field does.
    """
    l, m = system.spec.l, system.spec.m
    if len(rho_profiles) != l or len(w_profiles) != m:
        raise ValueError(f"expected {l} scalar and {m} vector profiles")
    for p, prof in enumerate(w_profiles):
        if abs(float(prof(0.0))) > w_origin_tol:
            raise ValueError(
                f"w profile {p} does not vanish at r=0 "
                f"(got {float(prof(0.0)):.3e}); radial vector fields must")
    r = grid.r
    rho = np.array([np.asarray(p(r), dtype=float) for p in rho_profiles]) \
        if l else np.zeros((0, grid.N))
    w = np.array([np.asarray(p(r), dtype=float) for p in w_profiles]) \
        if m else np.zeros((0, grid.N))
    rho_t, w_t = to_characteristic(rho, w, system.L)
    return RadialState(0.0, rho_t, w_t, grid)


def _upwind(f: np.ndarray, nu: float, left_ghost: np.ndarray) -> np.ndarray:
    """One first-order upwind update of a (N,) field with courant number nu.

    For nu > 0 information comes from the left (origin side) and
    ``left_ghost`` supplies the ghost value; for nu < 0 the outer boundary
    ghost is a zero-order copy of the last cell.
    """
    if nu > 0:
        shifted = np.concatenate(([left_ghost], f[:-1]))
        return f - nu * (f - shifted)
    if nu < 0:
        shifted = np.concatenate((f[1:], [f[-1]]))
        return f - nu * (shifted - f)
    return f


def step(state: RadialState, system: DiagonalRadialSystem, dt: float,
         nu_max: float = 0.9) -> RadialState:
    """Advance one time step; raises CflError / returns on blow-up via simulate.

    Advection acts on p_e = rho~_e + w~_e (speed lambda_e) and
    q_e = rho~_e - w~_e (speed -lambda_e).  Ghost parity at the origin
    couples them: the mirror of p is q and vice versa.
    """
    h = state.grid.h
    lam = system.lam
    max_nu = float(np.max(np.abs(lam))) * dt / h
    if max_nu > nu_max + 1e-12:
        raise CflError(
            f"dt·max|lambda|/h = {max_nu:.4f} exceeds nu_max = {nu_max}")
    r = state.grid.r
    rho, w = state.rho_tilde.copy(), state.w_tilde.copy()
    for e in range(system.n_channels):
        if lam[e] == 0.0:
            continue
        nu = lam[e] * dt / h
        p = rho[e] + w[e]
        q = rho[e] - w[e]
        # origin mirror cell: rho~ even, w~ odd  =>  p(-r) = q(r)
        p_new = _upwind(p, nu, left_ghost=q[0])
        q_new = _upwind(q, -nu, left_ghost=p[0])
        rho[e] = 0.5 * (p_new + q_new)
        w[e] = 0.5 * (p_new - q_new)
    # geometric + quadratic sources, explicit Euler on cell centers
    z = rho + w
    f1, f2 = system.quadratic_rhs(z)
    rho += dt * (-(2.0 / r) * lam[:, None] * w + f1)
    w += dt * f2
    return RadialState(state.t + dt, rho, w, state.grid)


def suggest_rmax(support_radius: float, max_speed: float, T: float,
                 h_hint: float) -> float:
    """Domain radius so outflow extrapolation stays causally disconnected."""
    return support_radius + max_speed * T + 2.0 * h_hint


def simulate(spec: SystemSpec, rho_profiles, w_profiles, T: float,
             grid: RadialGrid, cfl: float = 0.9, snapshot_stride: int = 1,
             norm_stride: int = 1, dt_max: float | None = None,
             system: DiagonalRadialSystem | None = None) -> Trajectory:
    """March the diagonal system to time T, recording norms and snapshots.

    The time step comes from the CFL number (``dt = cfl h / max|lambda|``,
    capped by ``dt_max``); for systems whose speeds are all zero the cap
    or ``dt = cfl h`` is used.  Weighted-BV samples need three consecutive
    levels, so a rolling window of states is kept and the series starts
    one step in.  On blow-up the partial trajectory is returned flagged.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if not 0 < cfl <= 1.0:
        raise ValueError(f"cfl must lie in (0, 1], got {cfl}")
    if system is None:
        system = DiagonalRadialSystem.from_spec(spec)
    max_speed = float(np.max(np.abs(system.lam)))
    if max_speed > 0:
        dt = cfl * grid.h / max_speed
    else:
        dt = cfl * grid.h
    if dt_max is not None:
        dt = min(dt, dt_max)
    n_steps = max(1, int(np.ceil(T / dt - 1e-12)))
    dt = T / n_steps

    state = initial_from_profiles(rho_profiles, w_profiles, grid, system)
    traj = Trajectory(dt=dt)
    traj.snapshots.append(state.copy())
    window: list[RadialState] = [state]
    for k in range(n_steps):
        try:
            state = step(state, system, dt, nu_max=max(cfl, 0.9))
        except CflError:
            raise
        sig = state.check_finite()
        if sig is not None:
            traj.blowup = sig
            traj.snapshots.append(state)
            return traj
        window.append(state)
        if len(window) > 3:
            window.pop(0)
        if len(window) == 3 and (k % norm_stride == 0 or k == n_steps - 1):
            rep = weighted_bv(window[0], window[1], window[2])
            traj.norms.append(rep)
        if (k + 1) % snapshot_stride == 0 or k == n_steps - 1:
            traj.snapshots.append(state.copy())
    return traj
