"""Batch orchestration: build models, run estimates/verifications/scans/flows.

Every report embeds the resolved configuration, its hash and the seed, and
is written to a content-addressed file.  Exit status 2 flags inequality
violations (findings are data, not crashes); status 1 is reserved for
errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import bootstrap as bs
from . import constants as ct
from . import flow as fl
from . import semigroup as sg
from .manifold import build
from .reporting import (config_hash, to_plain, write_artifact, write_csv,
                        write_svg_loglog)
from .spectral import constant_potential, decompose, spectrum_rows

__all__ = ["main"]


def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get("SOBOLAB_OUT", "sobolab-out"))


def _payload(command: str, config: dict, results: dict) -> dict:
    config = to_plain(config)
    return {"command": command, "config": config,
            "config_sha256": config_hash(config), "results": to_plain(results)}


def _ensemble_spec(args) -> ct.EnsembleSpec:
    if args.seed is None:
        raise SystemExit("a seed is mandatory; pass --seed")
    return ct.EnsembleSpec(seed=args.seed, size=args.size,
                           generator=args.generator,
                           normalization=args.normalization)


def _prepare(args):
    m = build(args.model)
    dec1 = decompose(m, constant_potential(m, 1.0))
    spec = _ensemble_spec(args)
    members = ct.generate_ensemble(m, spec, dec=dec1)
    return m, dec1, spec, members


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _parse_times(text: str) -> list[float]:
    """Either "a:b:step" (inclusive endpoints) or a comma list."""
    if ":" in text:
        a, b, step = (float(x) for x in text.split(":"))
        n = int(round((b - a) / step))
        return [a + i * step for i in range(n + 1)]
    return _parse_floats(text)


# ---------------------------------------------------------------------------
# subcommand bodies; each returns (results dict, exit status)

def _cmd_ladder(args):
    ladder = bs.build_ladder(args.n, args.p0, args.target)
    k = ladder.k_for(args.target)
    rows = [{"k": i, "p_k": v} for i, v in enumerate(ladder.values)]
    return {"ladder": rows, "k": k, "m": ladder.m_for(args.target),
            "target": args.target}, 0


def _cmd_bootstrap(args):
    chain = bs.chain_constants(args.n, args.p0, args.A, args.B, args.target,
                               precision=args.precision)
    rows = [{"k": i, "from_p": s.from_p, "to_p": s.to_p, "r": s.r,
             "C1": s.C1, "C2": s.C2} for i, s in enumerate(chain.steps)]
    return {"steps": rows, "cumulative": {"C1": chain.C1, "C2": chain.C2},
            "m": chain.m_p}, 0


def _cmd_estimate(args):
    m, dec1, spec, members = _prepare(args)
    est = ct.estimate_sobolev_AB(m, args.p, members,
                                 b_grid=tuple(_parse_floats(args.b_grid)),
                                 meta=spec.meta())
    return {"estimate": to_plain(est), "model": m.label}, 0


def _cmd_verify(args):
    m, dec1, spec, members = _prepare(args)
    rep = ct.verify_inequality(ct.two_term_check(m, args.p, args.A, args.B),
                               members)
    return {"report": to_plain(rep), "model": m.label}, (0 if rep.passed else 2)


def _cmd_heat(args):
    m, dec1, spec, members = _prepare(args)
    rep = sg.heat_contraction_check(m, dec1, _parse_floats(args.t_list),
                                    [1.0, 2.0, math.inf], members)
    results = {"contraction": to_plain(rep), "model": m.label}
    status = 0 if rep.passed else 2
    if args.fit_window:
        lo, hi = _parse_floats(args.fit_window)
        fit = sg.ultracontractivity_fit(dec1, lo, hi)
        results["ultracontractivity"] = {
            "c_hat": fit.c_hat, "mu_hat": fit.mu_hat, "slope": fit.slope,
            "t": list(fit.t_values), "norms": list(fit.norms),
            "truncation_flagged": fit.truncation_flagged}
        if args.svg:
            path = write_svg_loglog(_out_dir(args), "heat_fit", fit.t_values,
                                    fit.norms, "||exp(-tH)||_{2->inf} vs t",
                                    fit_slope=fit.slope)
            results["svg"] = str(path)
    if args.spectrum_csv:
        path = write_csv(_out_dir(args), "spectrum", ["k", "lambda"],
                         spectrum_rows(dec1))
        results["spectrum_csv"] = str(path)
    if args.beta_csv:
        unit_spec = ct.EnsembleSpec(seed=spec.seed, size=spec.size,
                                    generator=spec.generator,
                                    normalization="unit-l2")
        unit_members = ct.generate_ensemble(m, unit_spec, dec=dec1)
        grid = np.geomspace(1e-3, 2.0, 25)
        profile = ct.measure_log_sobolev_beta(
            m, constant_potential(m, 1.0), grid, unit_members)
        path = write_csv(_out_dir(args), "log_sobolev_profile",
                         ["sigma", "beta"],
                         list(zip(profile.sigma_grid, profile.beta_values)))
        results["beta_csv"] = str(path)
    return results, status


def _cmd_riesz(args):
    m, dec1, spec, members = _prepare(args)
    scan = sg.riesz_ratio(dec1, args.p, members, meta=spec.meta())
    dec0 = decompose(m, constant_potential(m, 0.0))
    eq = sg.bessel_equivalence_constants(dec0, args.a, args.p, members)
    ck = sg.gradient_bessel_constant(dec1, args.p, args.a, members)
    return {"riesz": to_plain(scan), "equivalence": eq,
            "gradient_bessel_C": ck, "model": m.label}, 0


def _cmd_w2p(args):
    m, dec1, spec, members = _prepare(args)
    mu = args.mu
    if not args.p < mu / 2:
        raise SystemExit("w2p requires p < mu/2")
    p_out = mu * args.p / (mu - 2 * args.p)
    scan = sg.mapping_norm(dec1, "H^-1", args.p, p_out, members,
                           meta=spec.meta())
    half = sg.mapping_norm(dec1, "H^-1/2", args.p, mu * args.p / (mu - args.p),
                           members, meta=spec.meta())
    return {"second_order": to_plain(scan), "first_order": to_plain(half),
            "model": m.label}, 0


def _cmd_scaling(args):
    m, dec1, spec, members = _prepare(args)
    rep = sg.scaling_transfer_check(m, args.lam, args.mu, args.p, members, dec1)
    return {"transfer": rep, "model": m.label}, (0 if rep["violations"] == 0 else 2)


def _cmd_flow(args):
    if args.seed is None:
        raise SystemExit("a seed is mandatory; pass --seed")
    times = _parse_times(args.times)
    flow = fl.parse_flow_spec(args.flow, t_max=max(times) + 1e-9 if times else None)
    spec = ct.EnsembleSpec(seed=args.seed, size=args.size,
                           generator=args.generator)
    traj = fl.track(flow, times, args.theorem, args.p, spec, p0=args.p0)
    header = ["t", "vol", "r_max_plus", "kappa", "lambda0", "bracket",
              "worst_ratio", "violations"]
    rows = [[r[k] for k in header] for r in traj.records]
    csv_path = write_csv(_out_dir(args), "flow_trajectory", header, rows)
    results = {"trajectory": to_plain(traj), "csv": str(csv_path)}
    return results, (0 if traj.total_violations == 0 else 2)


def _cmd_report(args):
    entries = []
    for path in sorted(Path(args.dir).glob("*.json")):
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError:
            continue
        entries.append({"file": path.name, "command": doc.get("command"),
                        "config_sha256": doc.get("config_sha256")})
    return {"artifacts": entries, "count": len(entries)}, 0


# ---------------------------------------------------------------------------

def _add_common(p, *, model=True, seed=True):
    p.add_argument("--out", default=None, help="output directory "
                   "(default $SOBOLAB_OUT or ./sobolab-out)")
    p.add_argument("--config", default=None,
                   help="JSON file with default values for the flags")
    if model:
        p.add_argument("--model", default="torus:n=2,res=32",
                       help='model spec, e.g. "torus:n=3,res=10,L=6.2832"')
    if seed:
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--size", type=int, default=200)
        p.add_argument("--generator", default="mixed",
                       choices=list(ct.GENERATORS))
        p.add_argument("--normalization", default="none",
                       choices=["none", "unit-l2"])


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    ap = argparse.ArgumentParser(
        prog="sobolab",
        description="Numerical laboratory for Sobolev constants on "
                    "discretized manifolds.")
    sub = ap.add_subparsers(dest="command", required=True)
    command_parsers = {}

    def add_parser(name, **kw):
        command_parsers[name] = sub.add_parser(name, **kw)
        return command_parsers[name]

    p = add_parser("ladder", help="exponent ladder table")
    _add_common(p, model=False, seed=False)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--p0", type=float, default=2.0)
    p.add_argument("--target", type=float, required=True)

    p = add_parser("bootstrap", help="chained constants to a target exponent")
    _add_common(p, model=False, seed=False)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--p0", type=float, default=2.0)
    p.add_argument("--A", type=float, required=True)
    p.add_argument("--B", type=float, required=True)
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--precision", type=int, default=None,
                   help="decimal digits for a high-precision regression baseline")

    p = add_parser("estimate", help="ensemble Sobolev (A,B) estimate")
    _add_common(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--b-grid", default=",".join(str(b) for b in ct.DEFAULT_B_GRID))

    p = add_parser("verify", help="check a two-term inequality with given constants")
    _add_common(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--A", type=float, required=True)
    p.add_argument("--B", type=float, required=True)

    p = add_parser("heat", help="semigroup contraction and decay fit")
    _add_common(p)
    p.add_argument("--t-list", default="0.01,0.1,1.0")
    p.add_argument("--fit-window", default=None,
                   help='log-log fit window "t_low,t_high"')
    p.add_argument("--svg", action="store_true")
    p.add_argument("--spectrum-csv", action="store_true")
    p.add_argument("--beta-csv", action="store_true",
                   help="measure the entropy profile and write (sigma, beta) rows")

    p = add_parser("riesz", help="Riesz ratio and square-root equivalence scans")
    _add_common(p)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--a", type=float, default=1.0)

    p = add_parser("w2p", help="second-order mapping-norm scan")
    _add_common(p)
    p.add_argument("--p", type=float, default=1.2)
    p.add_argument("--mu", type=float, default=3.0)

    p = add_parser("scaling", help="norm-scaling laws and constant transfer")
    _add_common(p)
    p.add_argument("--lam", type=float, default=2.0)
    p.add_argument("--mu", type=float, default=3.0)
    p.add_argument("--p", type=float, default=1.5)

    p = add_parser("flow", help="track inequality constants along an exact flow")
    _add_common(p, model=False)
    p.add_argument("--flow", default="sphere:r0=1")
    p.add_argument("--times", default="0:0.4:0.05")
    p.add_argument("--theorem", default="a2", choices=list(fl.SELECTORS),
                   help="inequality family selector (see README)")
    p.add_argument("--p", type=float, default=1.5)
    p.add_argument("--p0", type=float, default=None)

    p = add_parser("report", help="index previously written artifacts")
    _add_common(p, model=False, seed=False)
    p.add_argument("--dir", default=None)
    return ap, command_parsers


_BODIES = {
    "ladder": _cmd_ladder, "bootstrap": _cmd_bootstrap,
    "estimate": _cmd_estimate, "verify": _cmd_verify, "heat": _cmd_heat,
    "riesz": _cmd_riesz, "w2p": _cmd_w2p, "scaling": _cmd_scaling,
    "flow": _cmd_flow, "report": _cmd_report,
}


def _apply_config_file(parser, args) -> None:
    """Config values fill any flag still at its parser default; flags win."""
    if not getattr(args, "config", None):
        return
    defaults = json.loads(Path(args.config).read_text())
    for key, value in defaults.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) == parser.get_default(attr):
            setattr(args, attr, value)


def main(argv=None) -> int:
    parser, command_parsers = build_parser()
    args = parser.parse_args(argv)
    _apply_config_file(command_parsers[args.command], args)
    if args.command == "report" and args.dir is None:
        args.dir = str(_out_dir(args))
    config = {k: v for k, v in sorted(vars(args).items())
              if k not in ("command", "out", "config")}
    try:
        results, status = _BODIES[args.command](args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    payload = _payload(args.command, config, results)
    path = write_artifact(_out_dir(args), args.command, payload)
    print(path)
    print(json.dumps(to_plain(results), indent=2, sort_keys=True)[:2000])
    return status


if __name__ == "__main__":
    sys.exit(main())
