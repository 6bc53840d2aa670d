"""Exact toy Ricci flows and constant tracking along them.

Only closed-form flows are used (a shrinking round 2-sphere and a static
flat torus), so every geometric quantity along the flow is auditable in
closed form.  Base constants are estimated once at t = 0; per-time
inequality constants are produced from them plus time-t geometry only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bootstrap import chain_constants, curvature_volume_rhs, BootstrapChain
from .constants import (DEFAULT_B_GRID, EnsembleSpec, estimate_sobolev_AB,
                        generate_ensemble, InequalityCheck, two_term_check,
                        verify_inequality)
from .manifold import (DiscreteManifold, ModelSpec, build, gamma_integral,
                       geometric_summary, scale_metric)
from .norms import bessel_norm, grad_lp_norm, lp_norm
from .spectral import constant_potential, decompose, lambda0

__all__ = [
    "HypothesisError",
    "ExactFlow",
    "FlowTrajectory",
    "shrinking_sphere_flow",
    "static_torus_flow",
    "parse_flow_spec",
    "scale_factor",
    "metric_at",
    "lambda0_series",
    "flow_rhs_factor",
    "track",
    "SELECTORS",
]

SELECTORS = ("a2", "a3", "b2", "b3", "d2", "d3", "e2", "e3")
RATIO_SLACK = 1e-9


class HypothesisError(ValueError):
    """A tracked inequality's hypothesis fails on this flow (e.g. lambda0 <= 0)."""


@dataclass(frozen=True)
class ExactFlow:
    """Closed-form metric evolution g(t) = lam(t)^2 g(0) on a fixed mesh."""

    variant: str  # "shrinking-sphere" | "static-torus"
    base: DiscreteManifold
    t_max: float
    r0: float = 1.0

    def __post_init__(self):
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.variant == "shrinking-sphere":
            if self.t_max >= self.r0 ** 2 / 2.0:
                raise ValueError("horizon must stay inside the smooth interval "
                                 f"t < {self.r0 ** 2 / 2.0}")
        elif self.variant != "static-torus":
            raise ValueError(f"unknown flow variant {self.variant!r}")


def shrinking_sphere_flow(r0: float = 1.0, subdiv: int = 3,
                          t_max: float | None = None) -> ExactFlow:
    """Round 2-sphere under g(t) = (1 - 2t/r0^2) r0^2 g_unit; singular at r0^2/2."""
    base = build(ModelSpec(variant="sphere", radius=r0, resolution=subdiv))
    if t_max is None:
        t_max = 0.45 * r0 ** 2
    return ExactFlow(variant="shrinking-sphere", base=base, t_max=t_max, r0=r0)


def static_torus_flow(dim: int = 3, resolution: int = 10,
                      sides: tuple[float, ...] = (), t_max: float = 1.0) -> ExactFlow:
    """Ricci-flat fixed point: the metric is constant in t."""
    base = build(ModelSpec(variant="torus", dim=dim, resolution=resolution,
                           sides=sides))
    return ExactFlow(variant="static-torus", base=base, t_max=t_max)


def parse_flow_spec(text: str, t_max: float | None = None,
                    resolution: int | None = None) -> ExactFlow:
    """Parse "sphere:r0=1" or "torus:n=3,res=10,L=6.283"."""
    head, _, rest = text.partition(":")
    kw = dict(item.split("=", 1) for item in rest.split(",") if item)
    if head == "sphere":
        return shrinking_sphere_flow(
            r0=float(kw.get("r0", kw.get("r", 1.0))),
            subdiv=resolution or int(kw.get("subdiv", 3)),
            t_max=t_max)
    if head == "torus":
        sides: tuple[float, ...] = ()
        if "L" in kw:
            sides = tuple(float(s) for s in kw["L"].split("x"))
            if len(sides) == 1:
                sides = sides * int(kw.get("n", 3))
        return static_torus_flow(dim=int(kw.get("n", 3)),
                                 resolution=resolution or int(kw.get("res", 10)),
                                 sides=sides, t_max=t_max or 1.0)
    raise ValueError(f"unknown flow spec {text!r}")


def scale_factor(flow: ExactFlow, t: float) -> float:
    """lam(t) with g(t) = lam(t)^2 g(0)."""
    if not 0 <= t <= flow.t_max:
        raise ValueError(f"t={t} beyond the flow horizon {flow.t_max}")
    if flow.variant == "shrinking-sphere":
        return math.sqrt(1.0 - 2.0 * t / flow.r0 ** 2)
    return 1.0


def metric_at(flow: ExactFlow, t: float) -> DiscreteManifold:
    return scale_metric(flow.base, scale_factor(flow, t))


def lambda0_series(flow: ExactFlow, times) -> list[float]:
    """lambda0(t) samples for inspection; no monotonicity is asserted."""
    return [lambda0(metric_at(flow, t)) for t in times]


def flow_rhs_factor(m: DiscreteManifold, p: float, chain: BootstrapChain) -> float:
    """base_A * [(max R^+ + 1) vol^(2/n)]^(m_p p / 2) from time-t geometry."""
    summ = geometric_summary(m)
    return curvature_volume_rhs(summ["r_max_plus"], summ["vol"], m.dim, p,
                                chain.m_p, chain.base_A)


@dataclass(frozen=True)
class FlowTrajectory:
    """Time-sampled geometry and inequality ratios along an exact flow."""

    variant: str
    selector: str
    p: float
    p0: float
    times: tuple[float, ...]
    records: tuple[dict, ...]
    base_constants: dict

    @property
    def worst_ratio(self) -> float:
        return max(r["worst_ratio"] for r in self.records)

    @property
    def total_violations(self) -> int:
        return sum(r["violations"] for r in self.records)


def track(flow: ExactFlow, times, selector: str, p: float,
          ensemble: EnsembleSpec, p0: float | None = None,
          eps: float = 1.0, b_grid=None) -> FlowTrajectory:
    """Verify the selected inequality family at each sampled time.

    Base constants are estimated once at t = 0 on the ensemble; what varies
    with t is only the closed-form geometry (volume, curvature bracket,
    scale factor).  Selectors ending in "2" require lambda0(g(0)) > 0 and
    route static tori to the finite-horizon "3" variants.
    """
    if selector not in SELECTORS:
        raise ValueError(f"unknown selector {selector!r}; use one of {SELECTORS}")
    times = tuple(float(t) for t in times)
    if not times:
        raise ValueError("need at least one sample time")
    if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
        raise ValueError("times must be strictly increasing")
    base = flow.base
    n = base.dim
    if p0 is None:
        p0 = 1.2 if n == 2 else 2.0
    if not p0 < p < n:
        raise ValueError(f"need p0 < p < n, got p0={p0}, p={p}, n={n}")
    lam0_base = lambda0(base)
    if selector.endswith("2") and lam0_base <= 1e-12:
        raise HypothesisError(
            f"selector {selector!r} requires lambda0(g(0)) > 0, got "
            f"{lam0_base:.3g}; use the finite-horizon selector "
            f"{selector[0]}3 instead")

    dec_base = decompose(base, constant_potential(base, 1.0))
    members = generate_ensemble(base, ensemble, dec=dec_base)
    family = selector[0]
    base_constants: dict = {"lambda0_g0": lam0_base}

    if family == "a":
        est = estimate_sobolev_AB(base, p0, members,
                                  b_grid=tuple(b_grid) if b_grid else DEFAULT_B_GRID,
                                  meta=ensemble.meta())
        base_constants.update(A=est.A_est, B=est.B_est)
    else:
        q = n * p / (n - p)
        c0 = 0.0
        kappa0 = geometric_summary(base)["kappa"]
        for u in members:
            if family == "b":
                denom = bessel_norm(base, dec_base, u, p)
            elif family == "d":
                denom = (grad_lp_norm(base, u, p)
                         + (1.0 + kappa0) * lp_norm(base, u, p))
            else:  # family e: adjusted integral-curvature form
                c_adj = -min(0.0, float(np.min(base.scalar_curvature))) / n
                gamma0 = gamma_integral(base, c_adj, eps)
                denom = (grad_lp_norm(base, u, p)
                         + (1.0 + gamma0) * lp_norm(base, u, p))
            if denom > 0:
                c0 = max(c0, lp_norm(base, u, q) / denom)
        # the spectral/gradient norms are not scale-covariant under the +1
        # shift; the transfer factor compensates over the sampled horizon
        transfer = 1.0
        for t in times:
            lam_t = scale_factor(flow, t)
            r_plus = geometric_summary(metric_at(flow, t))["r_max_plus"]
            transfer = max(transfer, lam_t ** (-1.0) / math.sqrt(1.0 + r_plus))
        base_constants.update(C0=c0, transfer=transfer, C=c0 * transfer)

    records = []
    for t in times:
        mt = metric_at(flow, t)
        summ = geometric_summary(mt)
        bracket = (summ["r_max_plus"] + 1.0) * summ["vol"] ** (2.0 / n)
        rec = {"t": t, "vol": summ["vol"], "r_max_plus": summ["r_max_plus"],
               "kappa": summ["kappa"], "lambda0": lambda0(mt),
               "bracket": bracket}
        if family == "a":
            alpha = bracket if selector == "a2" else 1.0 + bracket
            alpha = max(1.0, alpha)
            chain = chain_constants(n, p0, alpha * base_constants["A"],
                                    alpha * base_constants["B"], p)
            report = verify_inequality(two_term_check(mt, p, chain.C1, chain.C2),
                                       members, slack=RATIO_SLACK)
            rec.update(alpha=alpha, C1=chain.C1, C2=chain.C2, m_p=chain.m_p)
        else:
            q = n * p / (n - p)
            factor = base_constants["C"] * math.sqrt(1.0 + summ["r_max_plus"])
            if family == "b":
                dec_t = decompose(mt, constant_potential(mt, 1.0))
                rhs = lambda u: factor * bessel_norm(mt, dec_t, u, p)
            elif family == "d":
                kap = summ["kappa"]
                rhs = lambda u, k=kap: factor * (
                    grad_lp_norm(mt, u, p) + (1.0 + k) * lp_norm(mt, u, p))
            else:
                c_adj = -min(0.0, float(np.min(base.scalar_curvature))) / n
                gam = gamma_integral(mt, c_adj, eps)
                rec.update(gamma=gam)
                rhs = lambda u, g=gam: factor * (
                    grad_lp_norm(mt, u, p) + (1.0 + g) * lp_norm(mt, u, p))
            check = InequalityCheck(label=f"flow-{selector}",
                                    lhs=lambda u: lp_norm(mt, u, q), rhs=rhs)
            report = verify_inequality(check, members, slack=RATIO_SLACK)
            rec.update(C=factor)
        rec.update(worst_ratio=report.worst_ratio, violations=report.violations)
        records.append(rec)
    return FlowTrajectory(variant=flow.variant, selector=selector, p=p, p0=p0,
                          times=times, records=tuple(records),
                          base_constants=base_constants)
