"""Principal-part diagonalization and null-condition verification.

Reordering a full state as (rho, V1, V2, V3), where V_alpha collects the
alpha components of all vector channels, block-diagonalizes the 1D flux
matrix into

    M1 = [[0, B], [C, 0]]   acting on (rho, V1),
    M2 = [[D, 0], [0, -D]]  acting on (V2, V3).

Only M1 drives radial dynamics.  Its eigenstructure defines the
characteristic variables, and the null condition is the algebraic
statement that every characteristic family's self-interaction
coefficients vanish: small plane waves of the linearized 1D system then
solve the nonlinear one exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .system_model import SystemSpec, evaluate_quadratic, join_state, validate_spec


class NotHyperbolicError(ValueError):
    """The matrix has a complex eigenvalue pair."""


class NotDiagonalizableError(ValueError):
    """The eigenvector matrix is numerically singular (defective matrix)."""


def build_m1(spec: SystemSpec) -> np.ndarray:
    """Reduced 1D flux matrix [[0, B], [C, 0]] on the (rho, V1) block."""
    rep = validate_spec(spec)
    if not rep.ok:
        raise ValueError("invalid spec: " + "; ".join(rep.violations))
    l, m = spec.l, spec.m
    M = np.zeros((l + m, l + m))
    M[:l, l:] = spec.B
    M[l:, :l] = spec.C
    return M


def build_m2(spec: SystemSpec) -> np.ndarray:
    """Block-diagonal [[D, 0], [0, -D]] on the transverse (V2, V3) block."""
    if spec.m == 0:
        raise ValueError("no vector channels: M2 is empty")
    m = spec.m
    M = np.zeros((2 * m, 2 * m))
    M[:m, :m] = spec.D
    M[m:, m:] = -spec.D
    return M


def diagonalize(M: np.ndarray, cond_limit: float = 1e12
                ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigen-decompose a real matrix with a canonical, deterministic layout.

    Returns (lam, L, R) with L M R = diag(lam) and L R = I.  Eigenvalues
    are sorted ascending; ties are broken by lexicographic order of the
    canonicalized left-eigenvector rows.  Each row of L is scaled to unit
    infinity norm with its leading (first significantly nonzero) entry
    positive, and the columns of R carry the inverse scaling, so the
    output is reproducible bit for bit across calls.

    Raises :class:`NotHyperbolicError` on complex eigenvalues and
    :class:`NotDiagonalizableError` when the eigenvector matrix condition
    number exceeds ``cond_limit``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("M must be a real square matrix")
    lam, V = np.linalg.eig(M)
    scale = max(1.0, float(np.max(np.abs(lam))))
    if np.max(np.abs(lam.imag)) > 1e-9 * scale:
        raise NotHyperbolicError(
            f"complex eigenvalue pair (max imaginary part "
            f"{np.max(np.abs(lam.imag)):.3e}): system is not hyperbolic")
    lam = lam.real
    V = V.real
    if np.linalg.cond(V) > cond_limit:
        raise NotDiagonalizableError(
            "eigenvector matrix numerically singular: not diagonalizable")
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    V = V[:, order]
    L = np.linalg.inv(V)
    R = V
    # canonical row scaling: unit infinity norm, leading entry positive
    n = len(lam)
    for e in range(n):
        row = L[e]
        s = np.max(np.abs(row))
        lead = row[np.argmax(np.abs(row) > 1e-9 * s)]
        fac = np.sign(lead) / s
        L[e] = row * fac
        R[:, e] = R[:, e] / fac
    # break eigenvalue ties by lexicographic order of the canonical rows
    i = 0
    while i < n:
        j = i
        while j + 1 < n and lam[j + 1] - lam[i] <= 1e-12 * scale:
            j += 1
        if j > i:
            sub = sorted(range(i, j + 1), key=lambda e: tuple(L[e]))
            L[i:j + 1] = L[sub]
            R[:, i:j + 1] = R[:, sub]
            lam[i:j + 1] = lam[sub]
        i = j + 1
    return lam, L, R


def characteristic_couplings(spec: SystemSpec, L: np.ndarray, R: np.ndarray
                             ) -> tuple[np.ndarray, np.ndarray]:
    """Quadratic coupling tensors of the diagonalized radial system.

    g1[e, a, b] feeds the rho-like equation of characteristic e and
    g2[e, a, b] the w-like equation; both multiply the symmetric product
    (rho~_a + w~_a)(rho~_b + w~_b), so they are returned symmetrized over
    (a, b).
    """
    l, m = spec.l, spec.m
    E = l + m
    if L.shape != (E, E) or R.shape != (E, E):
        raise ValueError(f"L, R must be {(E, E)}")
    Rr = R[:l, :]      # scalar rows of R
    Rw = R[l:, :]      # vector rows of R
    inner1 = np.einsum("kij,ia,jb->kab", spec.Gamma, Rr, Rr)
    if m:
        inner1 = inner1 + np.einsum("ksq,sa,qb->kab", spec.Omega, Rw, Rw)
    g1 = np.einsum("ek,kab->eab", L[:, :l], inner1)
    if m and l:
        inner2 = np.einsum("pjq,ja,qb->pab", spec.Upsilon, Rr, Rw)
        g2 = np.einsum("ep,pab->eab", L[:, l:], inner2)
    else:
        g2 = np.zeros((E, E, E))
    g1 = 0.5 * (g1 + np.swapaxes(g1, 1, 2))
    g2 = 0.5 * (g2 + np.swapaxes(g2, 1, 2))
    return g1, g2


@dataclass
class NullReport:
    """Residuals of the null-condition identities.

    ``scalar_residual``: worst self-interaction residual feeding a scalar
    channel (Gamma/Omega contraction over each eigenvector).
    ``vector_residual``: same for the vector channels (Upsilon).
    ``repeated_residual``: worst cross residual between distinct
    eigenvectors of a repeated eigenvalue (Gamma only).
    """

    scalar_residual: float
    vector_residual: float
    repeated_residual: float
    tol: float
    multiplicity_groups: list[list[int]]
    scalar_table: np.ndarray   # (l, l+m) residual per (k, e)
    vector_table: np.ndarray   # (m, l+m) residual per (p, e)

    @property
    def passes(self) -> bool:
        return max(self.scalar_residual, self.vector_residual,
                   self.repeated_residual) <= self.tol


def _multiplicity_groups(lam: np.ndarray, mult_tol: float) -> list[list[int]]:
    thresh = mult_tol * max(float(np.max(np.abs(lam))), 0.0) if len(lam) else 0.0
    groups: list[list[int]] = []
    i = 0
    while i < len(lam):
        j = i
        while j + 1 < len(lam) and lam[j + 1] - lam[i] <= thresh:
            j += 1
        groups.append(list(range(i, j + 1)))
        i = j + 1
    return groups


def check_null_condition(spec: SystemSpec, L: np.ndarray, R: np.ndarray,
                         tol: float = 1e-10, mult_tol: float = 1e-8,
                         lam: np.ndarray | None = None) -> NullReport:
    """Evaluate the self-interaction identities for every characteristic.

    For each eigenvector column e: the Gamma/Omega contraction must vanish
    for every scalar channel k, and the Upsilon contraction for every
    vector channel p.  Within each eigenvalue multiplicity group the Gamma
    cross contractions of distinct members must vanish as well, in both
    orderings.
    """
    l, m = spec.l, spec.m
    E = l + m
    if lam is None:
        M1 = build_m1(spec)
        lam = np.sort(np.diag(L @ M1 @ R).copy())
    Rr, Rw = R[:l, :], R[l:, :]
    scalar_table = np.abs(
        np.einsum("kij,ie,je->ke", spec.Gamma, Rr, Rr)
        + (np.einsum("ksq,se,qe->ke", spec.Omega, Rw, Rw) if m else 0.0))
    if m and l:
        vector_table = np.abs(np.einsum("pjq,je,qe->pe", spec.Upsilon, Rr, Rw))
    else:
        vector_table = np.zeros((m, E))
    groups = _multiplicity_groups(np.asarray(lam, dtype=float), mult_tol)
    rep = 0.0
    for g in groups:
        for ii, e1 in enumerate(g):
            for e2 in g[ii + 1:]:
                c12 = np.einsum("kij,i,j->k", spec.Gamma, Rr[:, e1], Rr[:, e2])
                c21 = np.einsum("kij,i,j->k", spec.Gamma, Rr[:, e2], Rr[:, e1])
                if l:
                    rep = max(rep, float(np.max(np.abs(c12))),
                              float(np.max(np.abs(c21))))
    return NullReport(
        scalar_residual=float(np.max(scalar_table)) if scalar_table.size else 0.0,
        vector_residual=float(np.max(vector_table)) if vector_table.size else 0.0,
        repeated_residual=rep,
        tol=tol,
        multiplicity_groups=groups,
        scalar_table=scalar_table,
        vector_table=vector_table,
    )


def plane_wave_residual(spec: SystemSpec, e: int, xi: float, profile,
                        samples: int = 32,
                        lam: np.ndarray | None = None,
                        L: np.ndarray | None = None,
                        R: np.ndarray | None = None) -> float:
    """Substitute a small plane wave of family e into the nonlinear system.

    The wave rides eigenvector column e of M1 with a scalar profile Y
    sampled at ``samples`` phases in [-|xi|, |xi|]; transverse vector
    components are zero.  The transport terms cancel through the
    eigenvalue relation, so the residual is the sampled maximum of
    |Q(u, u)| plus the (floating-point level) eigen-defect contribution.
    """
    if lam is None or L is None or R is None:
        lam, L, R = diagonalize(build_m1(spec))
    E = spec.l + spec.m
    if not 0 <= e < E:
        raise ValueError(f"characteristic index {e} out of range 0..{E - 1}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    M1 = build_m1(spec)
    defect = float(np.max(np.abs((M1 - lam[e] * np.eye(E)) @ R[:, e])))
    phases = np.linspace(-abs(xi), abs(xi), samples) if samples > 1 else np.array([0.0])
    worst = 0.0
    max_y = 0.0
    for s in phases:
        y = float(profile(s))
        max_y = max(max_y, abs(y))
        rho = R[:spec.l, e] * y
        v = np.zeros((spec.m, 3))
        v[:, 0] = R[spec.l:, e] * y
        q = evaluate_quadratic(spec, join_state(rho, v))
        worst = max(worst, float(np.max(np.abs(q))))
    return worst + defect * max_y


@dataclass
class CharacteristicSystem:
    """Eigenstructure of M1 plus the characteristic coupling tensors."""

    lam: np.ndarray
    L: np.ndarray
    R: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    lam_tilde: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @classmethod
    def from_spec(cls, spec: SystemSpec) -> "CharacteristicSystem":
        lam, L, R = diagonalize(build_m1(spec))
        g1, g2 = characteristic_couplings(spec, L, R)
        if spec.m:
            lam_tilde = np.sort(np.linalg.eigvals(build_m2(spec)).real)
        else:
            lam_tilde = np.zeros(0)
        return cls(lam=lam, L=L, R=R, g1=g1, g2=g2, lam_tilde=lam_tilde)


# ------------------------------------------------------- test-data helpers


def solve_null_quadratics(l: int, m: int, B: np.ndarray, C: np.ndarray,
                          rng: np.random.Generator,
                          gamma_scale: float = 1.0
                          ) -> SystemSpec | None:
    """Construct quadratic tensors satisfying the null condition.

    Draws a random symmetric Gamma, solves the scalar-channel identities
    for Omega by least squares (adding a random component of the
    constraint null space for variety), and projects a random Upsilon
    onto the null space of the vector-channel identities.  Returns None
    when the least-squares solve cannot satisfy the identities, so the
    caller can resample.
    """
    spec = SystemSpec.zeros(l, m)
    spec.B = np.asarray(B, dtype=float).reshape(l, m)
    spec.C = np.asarray(C, dtype=float).reshape(m, l)
    try:
        lam, L, R = diagonalize(build_m1(spec))
    except (NotHyperbolicError, NotDiagonalizableError):
        return None
    E = l + m
    G = rng.standard_normal((l, l, l)) * gamma_scale
    G = 0.5 * (G + np.swapaxes(G, 1, 2))
    spec.Gamma = G
    Rr, Rw = R[:l, :], R[l:, :]
    # per scalar channel k: Omega[k] must cancel the Gamma contraction on
    # every eigenvector: design matrix rows are outer products of the
    # vector parts of the eigenvectors
    A = np.einsum("se,qe->esq", Rw, Rw).reshape(E, m * m)
    target = -np.einsum("kij,ie,je->ke", G, Rr, Rr)
    omega = np.zeros((l, m, m))
    for k in range(l):
        sol, *_ = np.linalg.lstsq(A, target[k], rcond=None)
        if np.max(np.abs(A @ sol - target[k])) > 1e-9:
            return None
        omega[k] = sol.reshape(m, m)
    # null-space component for variety
    _, sv, vt = np.linalg.svd(A)
    null_rows = vt[np.sum(sv > 1e-10 * max(sv[0], 1e-300)):]
    if len(null_rows):
        coef = rng.standard_normal(len(null_rows)) * gamma_scale
        omega += (coef @ null_rows).reshape(1, m, m)
    spec.Omega = 0.5 * (omega + np.swapaxes(omega, 1, 2))
    # Upsilon: project a random draw onto the constraint null space
    Au = np.einsum("je,qe->ejq", Rr, Rw).reshape(E, l * m)
    _, sv, vt = np.linalg.svd(Au)
    rank = int(np.sum(sv > 1e-10 * max(sv[0] if len(sv) else 1.0, 1e-300)))
    null_rows = vt[rank:]
    ups = np.zeros((m, l, m))
    if len(null_rows):
        for p in range(m):
            coef = rng.standard_normal(len(null_rows)) * gamma_scale
            ups[p] = (coef @ null_rows).reshape(l, m)
    spec.Upsilon = ups
    spec.OmegaBar = rng.standard_normal((m, m, m)) * gamma_scale
    return spec
