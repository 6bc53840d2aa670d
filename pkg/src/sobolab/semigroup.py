"""Heat-semigroup, fractional-power and Riesz-transform experiments.

Operator norms between L^p spaces are estimated as ensemble suprema,
sharpened by a few adjoint power iterations from the worst member; exact
norms are out of reach in general.  Heat bounds derived from entropy
profiles are verified member-wise at fixed times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .manifold import DiscreteManifold, scale_metric, gamma_integral
from .norms import bessel_norm, grad_lp_norm, lp_norm
from .spectral import (SpectralDecomposition, apply_function, decompose,
                       heat_multiplier, op_norm_2_to_inf, power_multiplier)

__all__ = [
    "MappingNormScan",
    "ContractionReport",
    "UltracontractivityFit",
    "heat_contraction_check",
    "ultracontractivity_fit",
    "check_heat_kernel_bounds",
    "mapping_norm",
    "riesz_ratio",
    "gradient_bessel_constant",
    "bessel_equivalence_constants",
    "scaling_transfer_check",
    "integral_ricci_check",
    "OPERATOR_POWERS",
]

CONTRACTION_TOL = 1e-8
VERIFY_SLACK = 1e-9
REFINE_ITERATIONS = 5

OPERATOR_POWERS = {"H^0": 0.0, "H^-1/2": -0.5, "H^-1": -1.0, "H^1/2": 0.5}


@dataclass(frozen=True)
class MappingNormScan:
    """Ensemble supremum of ||Op u||_{p_out} / ||u||_{p_in}."""

    operator_label: str
    p_in: float
    p_out: float
    estimate: float
    mesh_level: str
    ensemble_meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ContractionReport:
    label: str
    cases: int
    violations: int
    worst_ratio: float
    worst_case: tuple

    @property
    def passed(self) -> bool:
        return self.violations == 0


@dataclass(frozen=True)
class UltracontractivityFit:
    c_hat: float
    mu_hat: float
    slope: float
    t_values: np.ndarray
    norms: np.ndarray
    truncation_flagged: bool


# ---------------------------------------------------------------------------
# heat semigroup

def heat_contraction_check(m: DiscreteManifold, dec: SpectralDecomposition,
                           t_list, p_list, members: np.ndarray,
                           tol: float = CONTRACTION_TOL) -> ContractionReport:
    """||e^{-tH} u||_p <= ||u||_p for nonnegative potentials.

    Exact positivity is not guaranteed by the discretization; the bound is
    asserted with relative tolerance tol.
    """
    if not dec.potential.is_nonnegative:
        raise ValueError("contraction check requires a nonnegative potential; "
                         "shift the potential first")
    worst = -math.inf
    worst_case = ()
    violations = 0
    cases = 0
    coeffs = dec.eigenvectors.T @ (m.mass[:, None] * members.T)
    for t in t_list:
        heat = np.exp(-t * dec.eigenvalues)
        evolved = (dec.eigenvectors @ (heat[:, None] * coeffs)).T
        for p in p_list:
            for i, u in enumerate(members):
                denom = lp_norm(m, u, p)
                if denom == 0:
                    continue
                ratio = lp_norm(m, evolved[i], p) / denom
                cases += 1
                if ratio > worst:
                    worst, worst_case = ratio, (float(t), float(p), i)
                if ratio > 1.0 + tol:
                    violations += 1
    return ContractionReport(label="heat-lp-contraction", cases=cases,
                             violations=violations, worst_ratio=worst,
                             worst_case=worst_case)


def ultracontractivity_fit(dec: SpectralDecomposition, t_low: float,
                           t_high: float, samples: int = 9
                           ) -> UltracontractivityFit:
    """Least-squares fit of log ||e^{-tH}||_{2->inf} against log t.

    Returns mu_hat = -4 * slope and the prefactor c_hat.  The window must
    stay below the ground-state-dominated regime; windows lying entirely
    under the spectral-truncation floor 4/lambda_max are rejected, and a
    lower endpoint under the floor is flagged.
    """
    if not 0 < t_low < t_high:
        raise ValueError("need 0 < t_low < t_high")
    lam = dec.eigenvalues
    lam_max = float(lam[-1])
    floor = 4.0 / lam_max if lam_max > 0 else 0.0
    if t_high < floor:
        raise ValueError(
            f"window [{t_low}, {t_high}] below the mesh resolution floor "
            f"{floor:.3g}; spectrum truncation invalidates the fit")
    gap_idx = np.argmax(lam > lam[0] + 1e-12)
    if gap_idx > 0:
        gap = float(lam[gap_idx] - lam[0])
        if t_high > 4.0 / gap:
            raise ValueError(
                f"window reaches the ground-state-dominated regime "
                f"(t_high > {4.0 / gap:.3g}); shrink the window")
    ts = np.exp(np.linspace(math.log(t_low), math.log(t_high), samples))
    norms = np.array([op_norm_2_to_inf(dec, heat_multiplier(t)) for t in ts])
    coeff = np.polyfit(np.log(ts), np.log(norms), 1)
    slope = float(coeff[0])
    return UltracontractivityFit(
        c_hat=float(np.exp(coeff[1])), mu_hat=-4.0 * slope, slope=slope,
        t_values=ts, norms=norms, truncation_flagged=bool(t_low < floor))


def check_heat_kernel_bounds(m: DiscreteManifold, dec: SpectralDecomposition,
                             tau: Callable[[float], float], t_list,
                             members: np.ndarray,
                             sigma_star: float = math.inf,
                             slack: float = VERIFY_SLACK) -> ContractionReport:
    """Verify the L2->inf and L1->inf heat bounds driven by tau(t).

    ||e^{-tH}u||_inf <= exp(tau(t) - (3t/4) inf Psi^-) ||u||_2 and
    ||e^{-tH}u||_inf <= exp(2 tau(t/2) - (3t/4) inf Psi^-) ||u||_1, with
    inf Psi^- = min(0, min Psi) so the correction factor is >= 1.
    """
    inf_minus = dec.potential.inf_minus
    worst = -math.inf
    worst_case = ()
    violations = 0
    cases = 0
    coeffs = dec.eigenvectors.T @ (m.mass[:, None] * members.T)
    for t in t_list:
        if not 0 < t < sigma_star / 4.0:
            raise ValueError(f"t={t} outside (0, sigma_star/4)")
        correction = -0.75 * t * inf_minus
        bound2 = math.exp(tau(t) + correction)
        bound1 = math.exp(2.0 * tau(t / 2.0) + correction)
        heat = np.exp(-t * dec.eigenvalues)
        evolved = (dec.eigenvectors @ (heat[:, None] * coeffs)).T
        for i, u in enumerate(members):
            sup = float(np.max(np.abs(evolved[i])))
            for tag, bound, base in (("L2", bound2, lp_norm(m, u, 2.0)),
                                     ("L1", bound1, lp_norm(m, u, 1.0))):
                if base == 0:
                    continue
                ratio = sup / (bound * base)
                cases += 1
                if ratio > worst:
                    worst, worst_case = ratio, (float(t), tag, i)
                if ratio > 1.0 + slack:
                    violations += 1
    return ContractionReport(label="heat-kernel-bounds", cases=cases,
                             violations=violations, worst_ratio=worst,
                             worst_case=worst_case)


# ---------------------------------------------------------------------------
# mapping norms

def _dual_exponent(p: float) -> float:
    return p / (p - 1.0)


def _node_dual(m: DiscreteManifold, v: np.ndarray, q: float) -> np.ndarray:
    """J_q(v): mass-duality element with <J_q(v), v>_mass = ||v||_q, ||J||_q' = 1."""
    nrm = lp_norm(m, v, q)
    if nrm == 0:
        return np.zeros_like(v)
    return np.sign(v) * np.abs(v) ** (q - 1.0) / nrm ** (q - 1.0)


def _scan_ratios(op: Callable[[np.ndarray], np.ndarray],
                 out_norm: Callable[[np.ndarray], float],
                 m: DiscreteManifold, p_in: float,
                 members: np.ndarray) -> tuple[float, int]:
    best, best_idx = -math.inf, -1
    for i, u in enumerate(members):
        denom = lp_norm(m, u, p_in)
        if denom == 0:
            continue
        ratio = out_norm(op(u)) / denom
        if ratio > best:
            best, best_idx = ratio, i
    return best, best_idx


def _refine_node_op(op: Callable[[np.ndarray], np.ndarray],
                    m: DiscreteManifold, p_in: float, p_out: float,
                    u0: np.ndarray, iters: int = REFINE_ITERATIONS) -> float:
    """Adjoint power iteration for a mass-self-adjoint node operator."""
    pd = _dual_exponent(p_in)
    u = u0 / lp_norm(m, u0, p_in)
    best = -math.inf
    for _ in range(iters):
        v = op(u)
        nv = lp_norm(m, v, p_out)
        if nv == 0:
            break
        best = max(best, nv)
        w = op(_node_dual(m, v, p_out))
        mag = np.abs(w)
        if not mag.any():
            break
        u = np.sign(w) * mag ** (pd - 1.0)
        u /= lp_norm(m, u, p_in)
    return best


def _grad_out_norm(m: DiscreteManifold, vecs: np.ndarray, q: float) -> float:
    mags = np.linalg.norm(vecs, axis=1)
    return float(np.sum(m.grad.weights * mags ** q) ** (1.0 / q))


def _refine_grad_op(dec: SpectralDecomposition, power: float,
                    p_in: float, p_out: float, u0: np.ndarray,
                    iters: int = REFINE_ITERATIONS) -> float:
    """Adjoint power iteration for u -> grad(H^power u) with element outputs."""
    m = dec.manifold
    pd = _dual_exponent(p_in)
    fwd = power_multiplier(power)
    u = u0 / lp_norm(m, u0, p_in)
    best = -math.inf
    for _ in range(iters):
        vecs = m.grad.vectors(apply_function(dec, fwd, u))
        nv = _grad_out_norm(m, vecs, p_out)
        if nv == 0:
            break
        best = max(best, nv)
        mags = np.linalg.norm(vecs, axis=1)
        dual = vecs * np.where(mags > 0, mags ** (p_out - 2.0), 0.0)[:, None]
        dual /= nv ** (p_out - 1.0)
        pulled = m.grad.matrix.T @ (np.repeat(m.grad.weights, m.grad.ncomp)
                                    * dual.ravel())
        w = apply_function(dec, fwd, pulled / m.mass)
        mag = np.abs(w)
        if not mag.any():
            break
        u = np.sign(w) * mag ** (pd - 1.0)
        u /= lp_norm(m, u, p_in)
    return best


def mapping_norm(dec: SpectralDecomposition, operator_label: str,
                 p_in: float, p_out: float, members: np.ndarray,
                 mesh_level: str = "", meta: dict | None = None,
                 refine: bool = True) -> MappingNormScan:
    """Estimate ||Op||_{p_in -> p_out} for Op in H powers or grad H^-1/2.

    Negative powers require a strictly positive spectrum; the exponent pair
    is the caller's contract (e.g. p_out = mu p/(mu-p) for H^-1/2 and
    mu p/(mu-2p) for H^-1 under a mu-dimensional Sobolev hypothesis).
    """
    if p_out <= 0 or not math.isfinite(p_out):
        raise ValueError(f"output exponent {p_out} out of range")
    m = dec.manifold
    grad_op = operator_label.startswith("grad ")
    power_label = operator_label.removeprefix("grad ")
    if power_label not in OPERATOR_POWERS:
        raise ValueError(f"unknown operator {operator_label!r}")
    power = OPERATOR_POWERS[power_label]
    if power < 0 and dec.lambda_min <= 0:
        raise ValueError("negative power of a singular operator; "
                         "use a potential with a positive spectral floor")
    fwd = power_multiplier(power)
    if grad_op:
        op = lambda u: m.grad.vectors(apply_function(dec, fwd, u))
        out_norm = lambda vecs: _grad_out_norm(m, vecs, p_out)
    else:
        op = lambda u: apply_function(dec, fwd, u)
        out_norm = lambda v: lp_norm(m, v, p_out)
    best, best_idx = _scan_ratios(op, out_norm, m, p_in, members)
    if refine and best_idx >= 0 and p_in > 1:
        if grad_op:
            refined = _refine_grad_op(dec, power, p_in, p_out, members[best_idx])
        else:
            refined = _refine_node_op(lambda u: apply_function(dec, fwd, u),
                                      m, p_in, p_out, members[best_idx])
        best = max(best, refined)
    return MappingNormScan(operator_label=operator_label, p_in=p_in,
                           p_out=p_out, estimate=best, mesh_level=mesh_level,
                           ensemble_meta=dict(meta or {}))


def riesz_ratio(dec: SpectralDecomposition, p: float, members: np.ndarray,
                mesh_level: str = "", meta: dict | None = None,
                refine: bool = True) -> MappingNormScan:
    """sup ||grad H^{-1/2} u||_p / ||u||_p over the ensemble."""
    return mapping_norm(dec, "grad H^-1/2", p, p, members,
                        mesh_level=mesh_level, meta=meta, refine=refine)


def gradient_bessel_constant(dec_unit: SpectralDecomposition, p: float,
                             a: float, members: np.ndarray) -> float:
    """Smallest feasible C in ||grad v||_p <= C(||(-Lap+1)^{1/2}v||_p + a||v||_p)."""
    m = dec_unit.manifold
    worst = 0.0
    for v in members:
        denom = bessel_norm(m, dec_unit, v, p) + a * lp_norm(m, v, p)
        if denom == 0:
            continue
        worst = max(worst, grad_lp_norm(m, v, p) / denom)
    return worst


def bessel_equivalence_constants(dec_zero: SpectralDecomposition, a: float,
                                 p: float, members: np.ndarray) -> dict:
    """Measured two-sided constants between (-Lap+a^2)^{1/2} and a||.|| + (-Lap)^{1/2}.

    (-Lap)^{1/2} annihilates constants, so at a = 0 constant members carry no
    information and are excluded from the ratio set.
    """
    if not (1 < p < math.inf):
        raise ValueError("need 1 < p < inf")
    if a < 0:
        raise ValueError("a must be nonnegative")
    if np.max(np.abs(dec_zero.potential.values)) > 1e-12:
        raise ValueError("equivalence constants require the bare Laplacian spectrum")
    m = dec_zero.manifold
    lam = dec_zero.eigenvalues
    ratios = []
    for u in members:
        coeffs = dec_zero.coefficients(u)
        mid = lp_norm(m, dec_zero.synthesize(np.sqrt(lam + a * a) * coeffs), p)
        outer = (a * lp_norm(m, u, p)
                 + lp_norm(m, dec_zero.synthesize(np.sqrt(lam) * coeffs), p))
        # constants carry no information at a = 0: both sides are roundoff
        if outer <= 1e-10 * (1.0 + a) * lp_norm(m, u, p):
            continue
        ratios.append(mid / outer)
    if not ratios:
        raise ValueError("degenerate ensemble: every member is constant")
    return {"c1_hat": float(min(ratios)), "c2_hat": float(max(ratios)),
            "members_used": len(ratios)}


# ---------------------------------------------------------------------------
# scaling transfer and integral-curvature forms

def scaling_transfer_check(m: DiscreteManifold, lam: float, mu: float,
                           p: float, members: np.ndarray,
                           dec_unit: SpectralDecomposition,
                           scaling_tol: float = 1e-10,
                           slack: float = VERIFY_SLACK) -> dict:
    """Transfer ||u||_{mu p/(mu-p)} <= C ||(-Lap+1)^{1/2}u||_p across g -> lam^2 g.

    First verifies the exact norm-scaling laws ||u||_{q, scaled} =
    lam^{n/q} ||u||_q, then measures C on the scaled metric and asserts the
    original-metric inequality with constant lam * C on the same ensemble.
    """
    if lam < 1:
        raise ValueError("transfer direction requires lam >= 1")
    q_out = mu * p / (mu - p)
    scaled = scale_metric(m, lam)
    n = m.dim
    worst_scaling = 0.0
    for u in members:
        for q in (p, q_out, 2.0):
            a = lp_norm(scaled, u, q)
            b = lam ** (n / q) * lp_norm(m, u, q)
            worst_scaling = max(worst_scaling, abs(a - b) / max(b, 1e-300))
        a = grad_lp_norm(scaled, u, p)
        b = lam ** (n / p - 1.0) * grad_lp_norm(m, u, p)
        worst_scaling = max(worst_scaling, abs(a - b) / max(b, 1e-300))
    if worst_scaling > scaling_tol:
        raise AssertionError(
            f"norm scaling law violated: relative error {worst_scaling:.3g}")

    dec_scaled = decompose(scaled, dec_unit.potential)
    c_scaled = 0.0
    for u in members:
        denom = bessel_norm(scaled, dec_scaled, u, p)
        if denom == 0:
            continue
        c_scaled = max(c_scaled, lp_norm(scaled, u, q_out) / denom)

    transferred = lam * c_scaled
    violations = 0
    worst = -math.inf
    for u in members:
        rhs = transferred * bessel_norm(m, dec_unit, u, p)
        lhs = lp_norm(m, u, q_out)
        if rhs == 0:
            continue
        ratio = lhs / rhs
        worst = max(worst, ratio)
        if lhs > rhs * (1.0 + slack):
            violations += 1
    return {"lam": lam, "mu": mu, "p": p, "q_out": q_out,
            "scaling_error": worst_scaling, "C_scaled": c_scaled,
            "C_transferred": transferred, "violations": violations,
            "worst_ratio": worst}


def integral_ricci_check(m: DiscreteManifold, c: float, eps: float, p: float,
                         members: np.ndarray) -> dict:
    """Smallest feasible C in ||u||_{np/(n-p)} <= C(||grad u||_p + (1+gamma)||u||_p).

    gamma is the integral-curvature quantity of the adjusted negative Ricci
    part; it vanishes when ric_min + c >= 0 everywhere.
    """
    if not 1 < p < 2:
        raise ValueError("the integral-curvature route requires 1 < p < 2")
    n = m.dim
    if p >= n:
        raise ValueError("need p < dim")
    gamma = gamma_integral(m, c, eps)
    q = n * p / (n - p)
    worst = 0.0
    for u in members:
        denom = grad_lp_norm(m, u, p) + (1.0 + gamma) * lp_norm(m, u, p)
        if denom == 0:
            continue
        worst = max(worst, lp_norm(m, u, q) / denom)
    return {"gamma": gamma, "C": worst, "c": c, "eps": eps, "p": p, "q_out": q}
