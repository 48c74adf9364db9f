"""``tfmult`` command line.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical guard
(Nyquist/coverage) failure, 3 failed ``--check``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Any, Callable

from tfmult.errors import GuardError
from tfmult.gabor import SpaceParams, WindowSpec, parse_exponent
from tfmult.grid import make_grid
from tfmult.indices import (
    LARGE,
    SMALL,
    IndexPoint,
    classify_index_point,
    dilation_exponent,
    inverse_exponent,
    loss_threshold,
)
from tfmult.symbols import PhaseSpec, apply_multiplier, unimodular_symbol
from tfmult.xlab import experiments as ex
from tfmult.xlab.ensemble import EnsembleSpec, build_ensemble, default_ensemble_spec
from tfmult.xlab.report import ExperimentReport, ReportRow, render

EXIT_OK, EXIT_USAGE, EXIT_GUARD, EXIT_CHECK = 0, 1, 2, 3

DEFAULTS: dict[str, Any] = {
    "d": 1, "n": 1024, "extent": 64.0, "p": "1", "q": "1", "delta": 0.0, "alpha": 3.0,
    "jmax": None, "seed": 0, "out": None, "refine": 0, "check": False, "tol": None,
    "window": "gaussian", "phase": "schrodinger_t", "t": 1.0, "regime": "large",
    "deltas": None, "t_list": "0.25,0.5,1,2,4", "J": "4,6,8", "K": 6,
    "s_list": "0,1,2,4,8,16,32", "member": None,
}

TOLERANCES = {
    "norm": 1e-6, "multiplier": 1e-10, "dilation-scan": 0.1, "threshold-scan": 0.05,
    "schrodinger-scan": 0.25, "dyadic-sum": 0.01, "exp-bound": 0.05, "indices": 0.0,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2, which is reserved here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("common")
    g.add_argument("--d", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--extent", type=float)
    g.add_argument("--p", help="exponent in [1, inf]")
    g.add_argument("--q", help="exponent in [1, inf]")
    g.add_argument("--delta", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--jmax", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--config", help="JSON file with flag values; explicit flags win")
    g.add_argument("--out", help="CSV output path (default: stdout)")
    g.add_argument("--refine", type=int, help="also run at k grid refinements and report drift")
    g.add_argument("--check", action="store_true", default=None, help="exit 3 if the check fails")
    g.add_argument("--tol", type=float, help="tolerance for --check")
    g.add_argument("--window", choices=["gaussian", "band_limited"])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tfmult", description="Time-frequency experiments for unimodular multipliers.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sp = sub.add_parser("norm", help="modulation norms of the ensemble")
    sp.add_argument("--member")
    sp = sub.add_parser("multiplier", help="ensemble ratios of one multiplier")
    sp.add_argument("--phase", choices=["schrodinger_t", "power_abs", "bracket_power", "fresnel_osc"])
    sp.add_argument("--t", type=float, help="time for schrodinger_t, coefficient c otherwise")
    sp = sub.add_parser("dilation-scan", help="dilation exponents")
    sp.add_argument("--regime", choices=["large", "small"])
    sp = sub.add_parser("threshold-scan", help="derivative-loss threshold")
    sp.add_argument("--deltas", help="comma separated delta values")
    sp = sub.add_parser("schrodinger-scan", help="uniformity of e^{it|xi|^2} in t")
    sp.add_argument("--t-list", dest="t_list")
    sp = sub.add_parser("dyadic-sum", help="dyadic sum and shell-sum checks")
    sp.add_argument("--J", dest="J", help="comma separated top scales")
    sp.add_argument("--K", dest="K", type=int, help="number of wave-packet shells")
    sp = sub.add_parser("exp-bound", help="exponential bound scan")
    sp.add_argument("--phase", choices=["schrodinger_t", "power_abs", "fresnel_osc"])
    sp.add_argument("--s-list", dest="s_list")
    sub.add_parser("indices", help="regions, dilation exponents and loss threshold")
    for name, p in sub.choices.items():
        _common(p)
    return parser


def _floats(v) -> list[float]:
    if isinstance(v, (list, tuple)):
        return [float(x) for x in v]
    return [float(x) for x in str(v).split(",") if x.strip()]


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Built-in defaults, then the config file, then explicit flags."""
    cfg: dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise UsageError("config must be a JSON object")
        for k, v in raw.items():
            key = k.replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"unknown config key {k!r}")
            cfg[key] = v
    out = dict(DEFAULTS)
    out.update(cfg)
    for k, v in vars(args).items():
        if k in DEFAULTS and v is not None:
            out[k] = v
    out["command"] = args.command
    try:
        out["p"] = parse_exponent(out["p"])
        out["q"] = parse_exponent(out["q"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if out["tol"] is None:
        out["tol"] = TOLERANCES[args.command]
    return out


def _ensemble(o: dict, level: int) -> EnsembleSpec:
    base = default_ensemble_spec(o["d"], o["n"], o["extent"], o["seed"])
    if level == 0:
        return base
    return EnsembleSpec(base.members, base.grid.refine(level), base.seed)


def _window(o: dict) -> WindowSpec:
    return WindowSpec(o["window"])


def _space(o: dict, delta: float | None = None) -> SpaceParams:
    return SpaceParams(o["p"], o["q"], o["delta"] if delta is None else delta)


def _phase(o: dict) -> PhaseSpec:
    name = o["phase"]
    if name == "schrodinger_t":
        return PhaseSpec(name, t=o["t"])
    if name == "fresnel_osc":
        return PhaseSpec(name, c=o["t"])
    return PhaseSpec(name, alpha=o["alpha"], c=o["t"])


# --- subcommands: each returns (reports, check_passed) ------------------------------------

def cmd_norm(o: dict, level: int):
    ens = _ensemble(o, level)
    w = _window(o)
    sigs = build_ensemble(ens)
    labels = ens.labels
    if o["member"]:
        if o["member"] not in labels:
            raise UsageError(f"unknown member {o['member']!r}; choose from {labels}")
        keep = [i for i, lab in enumerate(labels) if lab == o["member"]]
        sigs, labels = [sigs[i] for i in keep], [labels[i] for i in keep]
    space = _space(o)
    rep = ExperimentReport("norm", {"p": str(space.p), "q": str(space.q), "delta": space.delta,
                                    "window": w.kind, "refine": level},
                           grid=(ens.grid.dim, ens.grid.n, ens.grid.extent), seed=ens.seed)
    worst = 0.0
    for lab, f in zip(labels, sigs):
        val, moyal = ex.norms_of(f, [space, SpaceParams(2, 2)], w)
        l2 = f.l2_norm()
        worst = max(worst, abs(moyal**2 - l2**2) / l2**2)
        rep.add(ReportRow(lab, 0.0, l2, val))
    rep.stats = {"moyal_max_rel_error": worst}
    return [rep], worst <= o["tol"]


def cmd_multiplier(o: dict, level: int):
    ens = _ensemble(o, level)
    ph = _phase(o)
    space = SpaceParams(o["p"], o["q"], 0.0)
    rep = ex.run_multiplier_scan([(o["t"], ph)], ens, space, _window(o), "multiplier", o["delta"])
    rep.params["refine"] = level
    ok = True
    if o["delta"] == 0:
        sig = unimodular_symbol(ph, 0.0, ens.grid)
        err = max(abs(apply_multiplier(sig, f).l2_norm() / f.l2_norm() - 1) for f in build_ensemble(ens))
        rep.stats["l2_max_rel_change"] = err
        ok = err <= o["tol"]
    return [rep], ok


def cmd_dilation(o: dict, level: int):
    regime = LARGE if o["regime"] == "large" else SMALL
    jmax = o["jmax"] or 4
    ens = _ensemble(o, 0)
    pt = IndexPoint.from_exponents(o["p"], o["q"])
    rep = ex.run_dilation_scans([pt], regime, jmax, ens.members, ens.grid.dim, _window(o),
                                o["tol"], ens.seed, refine=level)[pt]
    rep.grid = (ens.grid.dim, ens.grid.n, ens.grid.extent)
    rep.params["refine"] = level
    return [rep], bool(rep.stats.get("upper_pass", False))


def cmd_threshold(o: dict, level: int):
    ip = inverse_exponent(o["p"])
    thr = float(loss_threshold(ip, Fraction(o["alpha"]).limit_denominator(10**6), 1))
    deltas = _floats(o["deltas"]) if o["deltas"] is not None else sorted({0.0, thr})
    rep = ex.run_threshold_scan(o["alpha"], ip, deltas, o["jmax"] or 6, o["q"], _window(o), refine=level)
    rep.params["refine"] = level
    at = min(deltas, key=lambda d: abs(d - thr))
    slope = rep.stats["slopes"][f"{at:g}"]
    return [rep], abs(at - thr) < 1e-12 and slope <= o["tol"]


def cmd_schrodinger(o: dict, level: int):
    ens = _ensemble(o, level)
    rep = ex.run_schrodinger_scan(_floats(o["t_list"]), ens, SpaceParams(o["p"], o["q"]), _window(o))
    rep.params["refine"] = level
    return [rep], rep.stats["variation"] <= o["tol"]


def cmd_dyadic(o: dict, level: int):
    K = int(o["K"])
    members = ex.dyadic_members(o["d"], K, o["seed"])
    n = max(o["n"], 16384) * 2**level
    reps = ex.run_dyadic_sum_check(o["p"], members, [int(x) for x in _floats(o["J"])], o["d"],
                                   n, o["extent"] * 2**level, K, seed=o["seed"])
    for r in reps:
        r.params["refine"] = level
    return reps, reps[1].stats["max_ratio"] <= 4 * (1 + o["tol"])


def cmd_exp_bound(o: dict, level: int):
    ph = PhaseSpec("schrodinger_t") if o["phase"] == "schrodinger_t" else _phase(o)
    grid = make_grid(o["d"], 1024, 16.0).refine(level)
    rep = ex.run_exp_bound_scan(ph, _floats(o["s_list"]), grid, _window(o))
    rep.params["refine"] = level
    return [rep], rep.stats.get("relative_residual", math.inf) <= o["tol"]


def cmd_indices(o: dict, level: int):
    pt = IndexPoint.from_exponents(o["p"], o["q"])
    m1 = dilation_exponent(pt, LARGE)
    m2 = dilation_exponent(pt, SMALL)
    thr = loss_threshold(pt.inv_p, Fraction(o["alpha"]).limit_denominator(10**6), o["d"])
    rep = ExperimentReport("indices", {
        "inv_p": str(pt.inv_p), "inv_q": str(pt.inv_q), "alpha": o["alpha"], "d": o["d"],
        "regions": sorted(classify_index_point(pt))})
    for name, v in (("mu1", m1), ("mu2", m2), ("loss_threshold", thr)):
        rep.add(ReportRow(name, 0.0, 1.0, float(v)))
    return [rep], m1 <= m2 + 1 + Fraction(o["tol"]).limit_denominator(10**9)


COMMANDS: dict[str, Callable] = {
    "norm": cmd_norm, "multiplier": cmd_multiplier, "dilation-scan": cmd_dilation,
    "threshold-scan": cmd_threshold, "schrodinger-scan": cmd_schrodinger,
    "dyadic-sum": cmd_dyadic, "exp-bound": cmd_exp_bound, "indices": cmd_indices,
}


def drift_report(command: str, levels: list[list[ExperimentReport]]) -> ExperimentReport:
    """Ratio of every (member, scale) row at each refinement level to level 0."""
    rep = ExperimentReport(f"{command}-drift", {"levels": len(levels) - 1})
    base = {(r.experiment_id, row.member, row.scale): row.ratio for r in levels[0] for row in r.rows}
    worst = 0.0
    for lvl, reps in enumerate(levels[1:], start=1):
        for r in reps:
            for row in r.rows:
                ref = base.get((r.experiment_id, row.member, row.scale))
                if ref is None or ref <= 0:
                    continue
                rep.add(ReportRow(f"{r.experiment_id}:{row.member}@{row.scale:g}", float(lvl), ref, row.ratio))
                worst = max(worst, abs(row.ratio / ref - 1))
    rep.stats = {"max_relative_drift": worst}
    return rep


def run(o: dict) -> tuple[list[ExperimentReport], bool]:
    fn = COMMANDS[o["command"]]
    levels = []
    ok = True
    for level in range(int(o["refine"]) + 1):
        reps, passed = fn(o, level)
        levels.append(reps)
        ok = ok and passed
    reports = [r for reps in levels for r in reps]
    if len(levels) > 1:
        reports.append(drift_report(o["command"], levels))
    for r in reports:
        if r.seed is None:
            r.seed = o["seed"]
        if r.grid is None:
            r.grid = (o["d"], o["n"], o["extent"])
    return reports, ok


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        o = resolve(args)
        reports, ok = run(o)
    except UsageError as exc:
        print(f"tfmult: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GuardError as exc:
        print(f"tfmult: numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as exc:
        print(f"tfmult: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(reports)
    if o["out"]:
        try:
            with open(o["out"], "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"tfmult: cannot write {o['out']}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    if o["check"] and not ok:
        print(f"tfmult: check failed for {o['command']} (tol={o['tol']:g})", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
