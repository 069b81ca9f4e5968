"""Low-resolution 3D reference solver for cross-validation.

A deliberately simple Lax-Friedrichs march of the full system on a cube.
The three flux matrices need not be simultaneously diagonalizable, so a
scheme that only needs a spectral-radius budget is the robust choice;
diffusion is acceptable because this module is an oracle, not a
production solver.  Runs are kept short enough that the zero-order
extrapolation boundary stays causally disconnected from the region of
interest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .system_model import LEVI, FullMatrices, SystemSpec


@dataclass
class CartesianGrid:
    """Node-centered cube [-X, X]^3 with an odd node count per axis."""

    X: float
    n: int

    def __post_init__(self):
        if self.X <= 0:
            raise ValueError("X must be positive")
        if self.n % 2 == 0 or self.n < 17:
            raise ValueError("n must be odd and >= 17 (node at the origin)")

    @property
    def hx(self) -> float:
        return 2.0 * self.X / (self.n - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.X, self.X, self.n)


@dataclass
class CartesianState:
    t: float
    fields: np.ndarray          # (l + 3m, n, n, n)
    grid: CartesianGrid
    l: int
    m: int

    def copy(self) -> "CartesianState":
        return CartesianState(self.t, self.fields.copy(), self.grid, self.l, self.m)

    def vectors(self) -> np.ndarray:
        """View of the vector channels as (m, 3, n, n, n)."""
        n = self.grid.n
        return self.fields[self.l:].reshape(self.m, 3, n, n, n)


def quadratic_source(spec: SystemSpec, fields: np.ndarray) -> np.ndarray:
    """Pointwise quadratic source on the grid, shape matching ``fields``."""
    l, m = spec.l, spec.m
    rho = fields[:l]
    out = np.zeros_like(fields)
    out[:l] = np.einsum("kij,i...,j...->k...", spec.Gamma, rho, rho)
    if m:
        shape = fields.shape[1:]
        v = fields[l:].reshape(m, 3, *shape)
        out[:l] += np.einsum("ksq,sa...,qa...->k...", spec.Omega, v, v)
        qv = np.einsum("pjq,j...,qa...->pa...", spec.Upsilon, rho, v)
        cross = np.einsum("abg,sb...,qg...->sqa...", LEVI, v, v)
        qv += np.einsum("psq,sqa...->pa...", spec.OmegaBar, cross)
        out[l:] = qv.reshape(3 * m, *shape)
    return out


def stability_budget(full: FullMatrices) -> float:
    """Sum of the infinity norms of the flux matrices."""
    return float(sum(np.max(np.sum(np.abs(A), axis=1)) for A in full.as_tuple()))


def step3d(state: CartesianState, full: FullMatrices, spec: SystemSpec,
           dt: float) -> CartesianState:
    """One Lax-Friedrichs step with explicit quadratic source.

    Requires dt * (sum_i |A_i|_inf) / hx <= 1; boundaries extrapolate at
    zero order via edge padding.
    """
    hx = state.grid.hx
    if dt * stability_budget(full) / hx > 1.0 + 1e-12:
        raise ValueError("dt exceeds the Lax-Friedrichs stability budget")
    u = state.fields
    pad = np.pad(u, ((0, 0), (1, 1), (1, 1), (1, 1)), mode="edge")
    xp, xm = pad[:, 2:, 1:-1, 1:-1], pad[:, :-2, 1:-1, 1:-1]
    yp, ym = pad[:, 1:-1, 2:, 1:-1], pad[:, 1:-1, :-2, 1:-1]
    zp, zm = pad[:, 1:-1, 1:-1, 2:], pad[:, 1:-1, 1:-1, :-2]
    avg = (xp + xm + yp + ym + zp + zm) / 6.0
    lam = dt / (2.0 * hx)
    flux = np.einsum("ab,b...->a...", full.A1, xp - xm)
    flux += np.einsum("ab,b...->a...", full.A2, yp - ym)
    flux += np.einsum("ab,b...->a...", full.A3, zp - zm)
    new = avg - lam * flux + dt * quadratic_source(spec, u)
    if not np.all(np.isfinite(new)):
        raise FloatingPointError(f"non-finite field after step at t={state.t + dt:.6g}")
    return CartesianState(state.t + dt, new, state.grid, state.l, state.m)


def radialize(rho_profiles, w_profiles, grid: CartesianGrid, l: int, m: int,
              w_origin_tol: float = 1e-10) -> CartesianState:
    """Build a radial 3D state: rho_k(|x|) and v_p = (x/|x|) w_p(|x|)."""
    if len(rho_profiles) != l or len(w_profiles) != m:
        raise ValueError(f"expected {l} scalar and {m} vector profiles")
    for p, prof in enumerate(w_profiles):
        if abs(float(prof(0.0))) > w_origin_tol:
            raise ValueError(f"w profile {p} must vanish at r=0")
    ax = grid.axis
    X, Y, Z = np.meshgrid(ax, ax, ax, indexing="ij")
    R = np.sqrt(X**2 + Y**2 + Z**2)
    n = grid.n
    fields = np.zeros((l + 3 * m, n, n, n))
    for k, prof in enumerate(rho_profiles):
        fields[k] = prof(R)
    safe = np.where(R > 0, R, 1.0)
    for p, prof in enumerate(w_profiles):
        wr = np.where(R > 0, prof(R) / safe, 0.0)
        fields[l + 3 * p] = X * wr
        fields[l + 3 * p + 1] = Y * wr
        fields[l + 3 * p + 2] = Z * wr
    return CartesianState(0.0, fields, grid, l, m)


_AXIS_DIRS = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
_DIAG_DIRS = [(sx, sy, sz) for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)]


@dataclass
class RadialSampling:
    """Per-ray radial profiles and their mutual disagreement."""

    rays: list[tuple[int, int, int]]
    r: list[np.ndarray]                 # per-ray radii
    rho: list[np.ndarray]               # per-ray (l, n_pts)
    w: list[np.ndarray]                 # per-ray (m, n_pts)
    spread: float


def sample_radial(state: CartesianState, rays=None) -> RadialSampling:
    """Extract radial profiles along axis and diagonal rays.

    Scalar channels are read off directly; vector channels are projected
    onto the ray direction.  The spread statistic is the worst pairwise
    max-abs difference between rays after interpolation to a common
    radius grid; it vanishes (to interpolation error) iff the state is
    radial.
    """
    if rays is None:
        rays = _AXIS_DIRS + _DIAG_DIRS
    grid = state.grid
    c = (grid.n - 1) // 2
    l, m = state.l, state.m
    v = state.vectors()
    r_list, rho_list, w_list = [], [], []
    for d in rays:
        d = tuple(int(x) for x in d)
        if any(abs(x) > 1 for x in d) or not any(d):
            raise ValueError(f"ray {d} must be an axis or diagonal direction")
        steps = c
        ii = c + np.arange(steps + 1)[:, None] * np.array(d)[None, :]
        norm = np.sqrt(sum(x * x for x in d))
        rr = np.arange(steps + 1) * grid.hx * norm
        rho_ray = state.fields[:l, ii[:, 0], ii[:, 1], ii[:, 2]] \
            if l else np.zeros((0, steps + 1))
        unit = np.array(d, dtype=float) / norm
        w_ray = np.einsum("pci,c->pi",
                          v[:, :, ii[:, 0], ii[:, 1], ii[:, 2]], unit) \
            if m else np.zeros((0, steps + 1))
        r_list.append(rr)
        rho_list.append(rho_ray)
        w_list.append(w_ray)
    # pairwise comparison at the coarser ray's own radii, with the finer
    # ray interpolated, so interpolation error enters only at the finer
    # spacing
    rmax = min(rr[-1] for rr in r_list)
    spread = 0.0
    profs = [np.vstack([rho_ray, w_ray]) for rho_ray, w_ray in zip(rho_list, w_list)]
    for i in range(len(r_list)):
        for j in range(i + 1, len(r_list)):
            dense, sparse = (i, j) if len(r_list[i]) >= len(r_list[j]) else (j, i)
            rs = r_list[sparse]
            rs = rs[rs <= rmax + 1e-12]
            for ch in range(l + m):
                fine = np.interp(rs, r_list[dense], profs[dense][ch])
                spread = max(spread, float(np.max(np.abs(
                    fine - profs[sparse][ch][: len(rs)]))))
    return RadialSampling(rays=list(rays), r=r_list, rho=rho_list, w=w_list,
                          spread=spread)


def cube_rotations() -> list[np.ndarray]:
    """The 24 proper rotations preserving the grid (signed permutations)."""
    out = []
    for perm in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
        for sx in (1, -1):
            for sy in (1, -1):
                for sz in (1, -1):
                    O = np.zeros((3, 3))
                    for row, (col, s) in enumerate(zip(perm, (sx, sy, sz))):
                        O[row, col] = s
                    if np.linalg.det(O) > 0.5:
                        out.append(O)
    return out


def _is_signed_permutation(O: np.ndarray) -> bool:
    O = np.asarray(O)
    if O.shape != (3, 3) or not np.all(np.isin(O, (-1.0, 0.0, 1.0))):
        return False
    return (np.all(np.sum(np.abs(O), axis=0) == 1)
            and np.all(np.sum(np.abs(O), axis=1) == 1)
            and abs(np.linalg.det(O) - 1.0) < 1e-12)


def rotate_state3d(state: CartesianState, O: np.ndarray) -> CartesianState:
    """Apply the rotation action on the grid: u'(x) = T u(Ox), v in O^T v.

    Only the 24 grid-preserving cube rotations are exact on the lattice.
    """
    O = np.asarray(O, dtype=float)
    if not _is_signed_permutation(O):
        raise ValueError("O must be a grid-preserving (signed permutation) rotation")
    n = state.grid.n
    c = (n - 1) // 2
    idx = np.indices((n, n, n)) - c                    # (3, n, n, n)
    tgt = np.einsum("ab,b...->a...", O, idx).astype(int) + c
    mixed = state.fields.copy()
    if state.m:
        v = state.vectors()
        mixed[state.l:] = np.einsum("ba,pb...->pa...", O, v).reshape(3 * state.m, n, n, n)
    new = mixed[:, tgt[0], tgt[1], tgt[2]]
    return CartesianState(state.t, new, state.grid, state.l, state.m)


def rotation_equivariance_check(state0: CartesianState, full: FullMatrices,
                                spec: SystemSpec, O: np.ndarray, dt: float,
                                n_steps: int) -> float:
    """Max discrepancy between evolve-then-rotate and rotate-then-evolve."""
    a = rotate_state3d(state0, O)
    b = state0.copy()
    for _ in range(n_steps):
        a = step3d(a, full, spec, dt)
        b = step3d(b, full, spec, dt)
    b_rot = rotate_state3d(b, O)
    return float(np.max(np.abs(a.fields - b_rot.fields)))


def simulate3d(spec: SystemSpec, full: FullMatrices, state: CartesianState,
               T: float, safety: float = 0.9) -> CartesianState:
    """March to time T with the stability-budget time step."""
    budget = stability_budget(full)
    dt = safety * state.grid.hx / max(budget, 1e-300)
    n_steps = max(1, int(np.ceil(T / dt - 1e-12)))
    dt = T / n_steps
    for _ in range(n_steps):
        state = step3d(state, full, spec, dt)
    return state
