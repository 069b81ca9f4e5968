"""System specification and 3D coefficient assembly.

A system couples ``l`` scalar channels rho_1..rho_l with ``m`` vector
channels v_1..v_m (each valued in R^3).  Rotational invariance forces the
three flux matrices and the quadratic source into a rigid sparsity
pattern governed by four reduced tensors:

* ``B`` (l x m), ``C`` (m x l): scalar/vector first-order coupling,
* ``D`` (m x m): vector/vector antisymmetric coupling,
* ``Gamma[k,i,j]``: rho_i rho_j -> rho_k source,
* ``Omega[k,s,q]``: (v_s . v_q) -> rho_k source,
* ``Upsilon[p,j,q]``: rho_j v_q -> v_p source,
* ``OmegaBar[p,s,q]``: (v_s x v_q) -> v_p source.

The canonical component ordering of a full state vector is all scalars
first, then each vector channel as a contiguous (x, y, z) triple.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Levi-Civita symbol; LEVI[i] is the antisymmetric matrix of the basis
# direction e_i, which is exactly the vector-vector block pattern of A_i.
LEVI = np.zeros((3, 3, 3))
LEVI[0, 1, 2] = LEVI[1, 2, 0] = LEVI[2, 0, 1] = 1.0
LEVI[0, 2, 1] = LEVI[1, 0, 2] = LEVI[2, 1, 0] = -1.0


@dataclass
class SystemSpec:
    """Reduced coefficient blocks and quadratic tensors of a system."""

    l: int
    m: int
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    Gamma: np.ndarray
    Omega: np.ndarray
    Upsilon: np.ndarray
    OmegaBar: np.ndarray

    def __post_init__(self):
        self.B = np.atleast_2d(np.asarray(self.B, dtype=float)).reshape(self.l, self.m)
        self.C = np.atleast_2d(np.asarray(self.C, dtype=float)).reshape(self.m, self.l)
        self.D = np.atleast_2d(np.asarray(self.D, dtype=float)).reshape(self.m, self.m)
        self.Gamma = np.asarray(self.Gamma, dtype=float).reshape(self.l, self.l, self.l)
        self.Omega = np.asarray(self.Omega, dtype=float).reshape(self.l, self.m, self.m)
        self.Upsilon = np.asarray(self.Upsilon, dtype=float).reshape(self.m, self.l, self.m)
        self.OmegaBar = np.asarray(self.OmegaBar, dtype=float).reshape(self.m, self.m, self.m)

    @property
    def size(self) -> int:
        """Length of a full state vector, l + 3m."""
        return self.l + 3 * self.m

    @classmethod
    def zeros(cls, l: int, m: int) -> "SystemSpec":
        return cls(
            l=l, m=m,
            B=np.zeros((l, m)), C=np.zeros((m, l)), D=np.zeros((m, m)),
            Gamma=np.zeros((l, l, l)), Omega=np.zeros((l, m, m)),
            Upsilon=np.zeros((m, l, m)), OmegaBar=np.zeros((m, m, m)),
        )


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_spec(spec: SystemSpec) -> ValidationReport:
    """Report dimension and finiteness violations; empty report iff well formed."""
    v: list[str] = []
    l, m = spec.l, spec.m
    if l < 0 or m < 0 or l + m < 1:
        v.append(f"need l >= 0, m >= 0, l + m >= 1; got l={l}, m={m}")
    expected = {
        "B": (l, m), "C": (m, l), "D": (m, m),
        "Gamma": (l, l, l), "Omega": (l, m, m),
        "Upsilon": (m, l, m), "OmegaBar": (m, m, m),
    }
    for name, shape in expected.items():
        arr = getattr(spec, name)
        if arr.shape != shape:
            v.append(f"{name} has shape {arr.shape}, expected {shape}")
        elif arr.size and not np.all(np.isfinite(arr)):
            v.append(f"{name} contains non-finite entries")
    return ValidationReport(v)


@dataclass
class FullMatrices:
    """Constant flux matrices of the full 3D system, one per coordinate."""

    A1: np.ndarray
    A2: np.ndarray
    A3: np.ndarray

    def as_tuple(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.A1, self.A2, self.A3


def assemble_full_matrices(spec: SystemSpec) -> FullMatrices:
    """Build A1, A2, A3 with the rotationally invariant sparsity pattern.

    For coordinate direction i: the scalar-scalar block is zero, b entries
    sit on (scalar row, i-th component of each vector column), c entries on
    (i-th component of each vector row, scalar column), and the vector-vector
    3x3 sub-blocks are d_pq times the antisymmetric matrix of e_i.
    """
    rep = validate_spec(spec)
    if not rep.ok:
        raise ValueError("invalid spec: " + "; ".join(rep.violations))
    l, m, n = spec.l, spec.m, spec.size
    mats = []
    for i in range(3):
        A = np.zeros((n, n))
        for q in range(m):
            A[:l, l + 3 * q + i] = spec.B[:, q]
        for p in range(m):
            A[l + 3 * p + i, :l] = spec.C[p, :]
        for p in range(m):
            for q in range(m):
                A[l + 3 * p: l + 3 * p + 3, l + 3 * q: l + 3 * q + 3] = (
                    spec.D[p, q] * LEVI[i]
                )
        mats.append(A)
    return FullMatrices(*mats)


def split_state(u: np.ndarray, l: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Split a full state vector into (rho (l,), v (m, 3))."""
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != l + 3 * m:
        raise ValueError(f"state length {u.shape[-1]} != l + 3m = {l + 3 * m}")
    return u[..., :l], u[..., l:].reshape(*u.shape[:-1], m, 3)


def join_state(rho: np.ndarray, v: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.concatenate([rho, v.reshape(*v.shape[:-2], -1)], axis=-1)


def evaluate_quadratic(spec: SystemSpec, u: np.ndarray) -> np.ndarray:
    """Quadratic source Q(u, u) for a full state vector.

    Scalar rows: Gamma[k,i,j] rho_i rho_j + Omega[k,s,q] (v_s . v_q).
    Vector rows: Upsilon[p,j,q] rho_j v_q + OmegaBar[p,s,q] (v_s x v_q).
    """
    rho, v = split_state(u, spec.l, spec.m)
    q_rho = np.einsum("kij,i,j->k", spec.Gamma, rho, rho)
    if spec.m:
        q_rho = q_rho + np.einsum("ksq,sa,qa->k", spec.Omega, v, v)
        q_v = np.einsum("pjq,j,qa->pa", spec.Upsilon, rho, v)
        cross = np.cross(v[:, None, :], v[None, :, :])
        q_v = q_v + np.einsum("psq,sqa->pa", spec.OmegaBar, cross)
    else:
        q_v = np.zeros((0, 3))
    return join_state(q_rho, q_v)


def rotate_state(u: np.ndarray, O: np.ndarray, l: int, m: int,
                 tol: float = 1e-12) -> np.ndarray:
    """Apply the rotation action: scalars unchanged, each v_p -> O^T v_p."""
    O = np.asarray(O, dtype=float)
    if O.shape != (3, 3) or np.max(np.abs(O.T @ O - np.eye(3))) > tol \
            or abs(np.linalg.det(O) - 1.0) > tol:
        raise ValueError("O must be a proper rotation matrix")
    rho, v = split_state(u, l, m)
    return join_state(rho, v @ O)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random rotation: QR of a Gaussian matrix, det fixed to +1."""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


@dataclass
class QuadraticCoefficients:
    """Full-layout quadratic coefficients of a general (l, m) system.

    Index order mirrors the component split: superscripts first, Greek
    component indices last.  A reduced :class:`SystemSpec` expands into
    this layout with the component structure (identity / Levi-Civita)
    made explicit, which lets the invariance checker also refute
    arbitrary, non-invariant coefficient sets.
    """

    l: int
    m: int
    Gamma: np.ndarray        # (l, l, l)           rho_i rho_j -> rho_k
    Upsilon: np.ndarray      # (l, l, m, 3)        rho_j v_q^beta -> rho_k
    Omega: np.ndarray        # (l, m, m, 3, 3)     v_s^beta v_q^gamma -> rho_k
    GammaBar: np.ndarray     # (m, 3, l, l)        rho_i rho_j -> v_p^alpha
    UpsilonBar: np.ndarray   # (m, 3, l, m, 3)     rho_j v_q^beta -> v_p^alpha
    OmegaBar: np.ndarray     # (m, 3, m, m, 3, 3)  v_s^beta v_q^gamma -> v_p^alpha

    @classmethod
    def from_spec(cls, spec: SystemSpec) -> "QuadraticCoefficients":
        l, m = spec.l, spec.m
        eye = np.eye(3)
        return cls(
            l=l, m=m,
            Gamma=spec.Gamma.copy(),
            Upsilon=np.zeros((l, l, m, 3)),
            Omega=np.einsum("ksq,bg->ksqbg", spec.Omega, eye),
            GammaBar=np.zeros((m, 3, l, l)),
            UpsilonBar=np.einsum("pjq,ab->pajqb", spec.Upsilon, eye),
            OmegaBar=np.einsum("psq,abg->pasqbg", spec.OmegaBar, LEVI),
        )


@dataclass
class InvarianceReport:
    max_residual: float
    worst_rotation: np.ndarray
    worst_identity: str
    samples: int
    seed: int
    residuals: dict[str, float]

    @property
    def passes(self) -> bool:  # at the default tolerance; callers may re-judge
        return self.max_residual <= 1e-10


def _block_views(A: np.ndarray, l: int, m: int):
    """Split one full matrix into its (a, b, c, d) block families."""
    a = A[:l, :l]
    b = A[:l, l:].reshape(l, m, 3)               # b[j, q, beta]
    c = A[l:, :l].reshape(m, 3, l)               # c[p, alpha, k]
    d = A[l:, l:].reshape(m, 3, m, 3)            # d[p, beta, q, gamma]
    return a, b, c, d


def check_rotational_invariance(
    A1: np.ndarray,
    A2: np.ndarray,
    A3: np.ndarray,
    quad: QuadraticCoefficients,
    l: int,
    m: int,
    samples: int = 100,
    seed: int = 0,
) -> InvarianceReport:
    """Evaluate the rotation-transformation identities on sampled rotations.

    The identities are checked blockwise on the supplied matrices (which
    need not follow the invariant pattern): scalar-scalar entries must be
    fixed vectors of the rotation, the b/c component matrices must commute
    with conjugation, the vector-vector blocks must transform through the
    rotation's rows, and the quadratic component tensors must satisfy the
    matching conjugation identities.  Returns the worst absolute residual
    and the rotation that produced it.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    n = l + 3 * m
    mats = [np.asarray(A, dtype=float) for A in (A1, A2, A3)]
    for A in mats:
        if A.shape != (n, n):
            raise ValueError(f"matrix shape {A.shape} != ({n}, {n})")
    blocks = [_block_views(A, l, m) for A in mats]
    a_stack = np.stack([blk[0] for blk in blocks])          # (3, l, l)
    b_stack = np.stack([blk[1] for blk in blocks])          # (3, l, m, 3)
    c_stack = np.stack([blk[2] for blk in blocks])          # (3, m, 3, l)
    d_stack = np.stack([blk[3] for blk in blocks])          # (3, m, 3, m, 3)

    rng = np.random.default_rng(seed)
    worst = -1.0
    worst_rot = np.eye(3)
    worst_name = ""
    agg: dict[str, float] = {}
    for _ in range(samples):
        O = random_rotation(rng)
        res: dict[str, float] = {}
        # scalar-scalar entries form 3-vectors over the coordinate index
        # that every rotation must leave fixed
        rot_a = np.einsum("it,tjk->ijk", O, a_stack)
        res["a"] = float(np.max(np.abs(a_stack - rot_a))) if l else 0.0
        if m and l:
            # b component matrices Mb[i, beta] conjugate: Mb = O Mb O^T
            Mb = np.einsum("ijqb->jqib", b_stack)
            res["b"] = float(np.max(np.abs(Mb - np.einsum("it,jqtu,su->jqis", O, Mb, O))))
            Mc = np.einsum("ipak->pkai", c_stack)
            res["c"] = float(np.max(np.abs(Mc - np.einsum("at,pkti,ui->pkau", O, Mc, O))))
        if m:
            # d blocks: d^i = O d(o_i) O^T with d(xi) = sum_beta d^beta xi_beta
            mixed = np.einsum("it,tpbqg->ipbqg", O, d_stack)
            rot_d = np.einsum("bu,ipuqv,gv->ipbqg", O, mixed, O)
            res["d"] = float(np.max(np.abs(d_stack - rot_d)))
        # quadratic component identities
        if l and m:
            res["q_upsilon"] = float(np.max(np.abs(
                quad.Upsilon - np.einsum("kjqb,ab->kjqa", quad.Upsilon, O))))
            res["q_gammabar"] = float(np.max(np.abs(
                quad.GammaBar - np.einsum("at,ptij->paij", O, quad.GammaBar))))
            res["q_upsilonbar"] = float(np.max(np.abs(
                quad.UpsilonBar
                - np.einsum("at,ptjqu,bu->pajqb", O, quad.UpsilonBar, O))))
        if m:
            res["q_omega"] = float(np.max(np.abs(
                quad.Omega - np.einsum("bt,ksqtu,gu->ksqbg", O, quad.Omega, O)))) if l else 0.0
            mixedQ = np.einsum("at,ptsqbg->pasqbg", O, quad.OmegaBar)
            rot_ob = np.einsum("bu,pasquv,gv->pasqbg", O, mixedQ, O)
            res["q_omegabar"] = float(np.max(np.abs(quad.OmegaBar - rot_ob)))
        for name, val in res.items():
            agg[name] = max(agg.get(name, 0.0), val)
            if val > worst:
                worst, worst_rot, worst_name = val, O, name
    return InvarianceReport(
        max_residual=worst, worst_rotation=worst_rot, worst_identity=worst_name,
        samples=samples, seed=seed, residuals=agg,
    )
