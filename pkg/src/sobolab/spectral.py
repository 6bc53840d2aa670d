"""Dense spectral decomposition of H = -Laplacian + Psi and operator calculus f(H).

The generalized symmetric problem (S + M_Psi) phi = lambda M phi is reduced
via the diagonal mass square root and solved with a dense symmetric
eigensolver; every operator function (heat semigroup, fractional powers,
resolvents) is evaluated on the resulting eigenpairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as la

from .manifold import DiscreteManifold

__all__ = [
    "DENSE_NODE_GUARD",
    "SingularOperatorError",
    "PotentialField",
    "SpectralDecomposition",
    "constant_potential",
    "quarter_curvature",
    "shifted_quarter_curvature",
    "decompose",
    "apply_function",
    "lambda0",
    "op_norm_2_to_inf",
    "heat_multiplier",
    "power_multiplier",
    "spectrum_rows",
]

DENSE_NODE_GUARD = 4000
EIG_CLIP_REL = 1e-10


class SingularOperatorError(ValueError):
    """Raised when f is undefined on the computed spectrum (e.g. 0^(-1/2))."""


@dataclass(frozen=True)
class PotentialField:
    """Per-node potential Psi (1/length^2 units) with a provenance label."""

    values: np.ndarray
    label: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("potential must be finite")
        object.__setattr__(self, "values", v)

    @property
    def is_nonnegative(self) -> bool:
        return bool(np.all(self.values >= 0))

    @property
    def inf_minus(self) -> float:
        """min(0, min Psi); always <= 0."""
        return float(min(0.0, np.min(self.values)))


def constant_potential(m: DiscreteManifold, c: float) -> PotentialField:
    return PotentialField(np.full(m.num_nodes, float(c)), f"const:{c:g}")


def quarter_curvature(m: DiscreteManifold) -> PotentialField:
    return PotentialField(m.scalar_curvature / 4.0, "R/4")


def shifted_quarter_curvature(m: DiscreteManifold) -> PotentialField:
    """R/4 - (min R^-)/4 + 1, a nonnegative shift of the curvature potential."""
    lo = min(0.0, float(np.min(m.scalar_curvature)))
    return PotentialField(m.scalar_curvature / 4.0 - lo / 4.0 + 1.0,
                          "R/4-minR-/4+1")


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of H = -Laplacian + Psi, orthonormal in the mass inner product."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, mass-orthonormal
    potential: PotentialField
    manifold: DiscreteManifold

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    def coefficients(self, u: np.ndarray) -> np.ndarray:
        return self.eigenvectors.T @ (self.manifold.mass * u)

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        return self.eigenvectors @ coeffs


def decompose(m: DiscreteManifold, psi: PotentialField) -> SpectralDecomposition:
    """Dense generalized symmetric eigendecomposition of S + M_Psi vs M.

    Eigenvalues with |lambda| <= 1e-10 * max|lambda| are clipped to exactly 0
    so the Neumann kernel is detected reliably by the operator calculus.
    """
    n = m.num_nodes
    if n > DENSE_NODE_GUARD:
        raise ValueError(
            f"{n} nodes exceeds the dense decomposition guard ({DENSE_NODE_GUARD})")
    if psi.values.shape != (n,):
        raise ValueError("potential has wrong shape")
    sqrt_m = np.sqrt(m.mass)
    a = m.stiffness.toarray()
    a[np.diag_indices(n)] += m.mass * psi.values
    a /= sqrt_m[:, None]
    a /= sqrt_m[None, :]
    a = 0.5 * (a + a.T)
    w, v = la.eigh(a)
    clip = EIG_CLIP_REL * np.max(np.abs(w)) if n > 0 else 0.0
    w[np.abs(w) <= clip] = 0.0
    phi = v / sqrt_m[:, None]
    return SpectralDecomposition(eigenvalues=w, eigenvectors=phi,
                                 potential=psi, manifold=m)


def apply_function(dec: SpectralDecomposition, f: Callable[[np.ndarray], np.ndarray],
                   u: np.ndarray) -> np.ndarray:
    """Evaluate f(H) u = sum_k f(lambda_k) <u, phi_k>_mass phi_k."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        fw = np.asarray(f(dec.eigenvalues), dtype=float)
    if fw.shape != dec.eigenvalues.shape:
        raise ValueError("multiplier must map the spectrum elementwise")
    if not np.all(np.isfinite(fw)):
        bad = dec.eigenvalues[~np.isfinite(fw)]
        raise SingularOperatorError(
            f"multiplier undefined at eigenvalue(s) {bad[:3]} "
            f"(operator is singular for this function)")
    return dec.synthesize(fw * dec.coefficients(u))


def heat_multiplier(t: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda lam: np.exp(-t * lam)


def power_multiplier(alpha: float) -> Callable[[np.ndarray], np.ndarray]:
    """lambda -> lambda^alpha; yields a singular-operator error on 0 for alpha < 0."""
    def f(lam: np.ndarray) -> np.ndarray:
        return np.power(lam, alpha)
    return f


def lambda0(m: DiscreteManifold) -> float:
    """Smallest eigenvalue of -Laplacian + R/4."""
    return decompose(m, quarter_curvature(m)).lambda_min


def op_norm_2_to_inf(dec: SpectralDecomposition,
                     f: Callable[[np.ndarray], np.ndarray]) -> float:
    """Exact L2 -> Linf operator norm of f(H): max_x sqrt(sum_k f(l_k)^2 phi_k(x)^2)."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        fw = np.asarray(f(dec.eigenvalues), dtype=float)
    if not np.all(np.isfinite(fw)):
        raise SingularOperatorError("multiplier undefined on the spectrum")
    sq = (dec.eigenvectors ** 2) @ (fw ** 2)
    return float(np.sqrt(np.max(sq)))


def spectrum_rows(dec: SpectralDecomposition) -> list[tuple[int, float]]:
    """(k, lambda_k) rows for CSV regression baselines."""
    return [(k, float(lam)) for k, lam in enumerate(dec.eigenvalues)]
