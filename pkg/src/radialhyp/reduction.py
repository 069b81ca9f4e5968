"""Radial symmetry reduction and characteristic variable transforms.

A radial solution has the form rho_k = rho_k(t, r) and v_p = (x/r) w_p(t, r).
Substituting it into the invariant 3D system collapses the three space
dimensions to one radial equation pair

    rho_t + B w_r + (2/r) B w = Gamma rho rho + Omega w w
    w_t   + C rho_r           = Upsilon rho w

with the cross-product tensor dropping out identically (radial vector
fields are parallel pointwise).  Diagonalizing [[0, B], [C, 0]] turns this
into l+m characteristic pairs (rho~_e, w~_e), each advected at speed
lambda_e with a 2 lambda_e w~_e / r geometric source and quadratic
couplings g1, g2 in the combinations rho~_a + w~_a.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import CharacteristicSystem, characteristic_couplings, diagonalize, build_m1
from .system_model import SystemSpec, validate_spec


@dataclass
class RadialSystem:
    """The 1D radial system; coefficients are carried over bit-exactly."""

    spec: SystemSpec
    B: np.ndarray
    C: np.ndarray
    Gamma: np.ndarray
    Omega: np.ndarray
    Upsilon: np.ndarray

    @property
    def l(self) -> int:
        return self.spec.l

    @property
    def m(self) -> int:
        return self.spec.m

    def rhs(self, rho: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Quadratic right-hand side in physical radial variables."""
        g = np.einsum("kij,i...,j...->k...", self.Gamma, rho, rho)
        if self.m:
            g = g + np.einsum("ksq,s...,q...->k...", self.Omega, w, w)
            h = np.einsum("pjq,j...,q...->p...", self.Upsilon, rho, w)
        else:
            h = np.zeros_like(w)
        return g, h


def reduce_radial(spec: SystemSpec) -> RadialSystem:
    """Reduce a validated spec to its radial 1D form.

    No new coefficients appear; the reduction only drops the cross-product
    tensor, whose contribution vanishes identically on radial data.
    """
    rep = validate_spec(spec)
    if not rep.ok:
        raise ValueError("invalid spec: " + "; ".join(rep.violations))
    return RadialSystem(spec=spec, B=spec.B, C=spec.C, Gamma=spec.Gamma,
                        Omega=spec.Omega, Upsilon=spec.Upsilon)


@dataclass
class DiagonalRadialSystem:
    """Characteristic form of the radial system."""

    spec: SystemSpec
    lam: np.ndarray
    L: np.ndarray
    R: np.ndarray
    g1: np.ndarray
    g2: np.ndarray

    @classmethod
    def from_spec(cls, spec: SystemSpec) -> "DiagonalRadialSystem":
        cs = CharacteristicSystem.from_spec(spec)
        return cls(spec=spec, lam=cs.lam, L=cs.L, R=cs.R, g1=cs.g1, g2=cs.g2)

    @property
    def n_channels(self) -> int:
        return len(self.lam)

    def quadratic_rhs(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Couplings applied to the fields z_a = rho~_a + w~_a (shape (E, ...))."""
        f1 = np.einsum("eab,a...,b...->e...", self.g1, z, z)
        f2 = np.einsum("eab,a...,b...->e...", self.g2, z, z)
        return f1, f2


def to_characteristic(rho: np.ndarray, w: np.ndarray, L: np.ndarray
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise map to characteristic fields: rho~ = L_rho rho, w~ = L_w w.

    Both outputs have one row per characteristic (l+m rows) regardless of
    l and m: the stacked transform is the square invertible L, applied to
    the scalar and vector parts separately.
    """
    E = L.shape[0]
    rho = np.asarray(rho, dtype=float)
    w = np.asarray(w, dtype=float)
    l = rho.shape[0]
    if l + w.shape[0] != E:
        raise ValueError("channel counts do not match L")
    return L[:, :l] @ rho, L[:, l:] @ w


def from_characteristic(rho_tilde: np.ndarray, w_tilde: np.ndarray,
                        R: np.ndarray, l: int
                        ) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`to_characteristic` via the stacked sum.

    The physical state is recovered from z = rho~ + w~ as (rho; w) = R z,
    which inverts the forward map exactly because R = L^{-1}.
    """
    rho_tilde = np.asarray(rho_tilde, dtype=float)
    w_tilde = np.asarray(w_tilde, dtype=float)
    if rho_tilde.shape != w_tilde.shape or rho_tilde.shape[0] != R.shape[0]:
        raise ValueError("characteristic field shapes do not match R")
    u = R @ (rho_tilde + w_tilde)
    return u[:l], u[l:]
