"""Scan experiments: dilation exponents, derivative-loss threshold, multiplier
uniformity, dyadic sums and the exponential bound.

Every experiment returns an :class:`ExperimentReport`.  Ratios are empirical
lower bounds on operator norms, never the norms themselves.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import optimize

from tfmult.dyadic import chi_j, lambda_scale, psi0
from tfmult.errors import GuardError
from tfmult.gabor import (
    GAUSSIAN,
    INF,
    Lattice,
    SpaceParams,
    WindowSpec,
    auto_lattice,
    make_lattice,
    modulation_norms,
)
from tfmult.grid import (
    GeneratorSpec,
    GridSpec,
    SampledSignal,
    dilate,
    make_grid,
    sample_function,
    synthesize,
)
from tfmult.indices import IndexPoint, LARGE, SMALL, dilation_exponent, loss_threshold
from tfmult.symbols import (
    PhaseSpec,
    SymbolTable,
    apply_multiplier,
    phase_at,
    product_signal,
    symbol_from_values,
    unimodular_symbol,
)
from tfmult.xlab.ensemble import EnsembleSpec, build_ensemble
from tfmult.xlab.report import ExperimentReport, ReportRow

# Lattices above this many samples per axis switch to the coarse default step.
FULL_LATTICE_MAX_N = 4096
COARSE_STEP = 0.125
_WINDOW_SPECTRAL_RADIUS = 3.2


def workers() -> int:
    env = os.environ.get("TFMULT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def ordered_map(fn: Callable, items: Sequence) -> list:
    """Map in parallel, results in input order."""
    items = list(items)
    nw = min(workers(), len(items))
    if nw <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=nw) as ex:
        return list(ex.map(fn, items))


def _pow2_at_least(x: float, floor: int) -> int:
    return max(floor, 1 << max(0, math.ceil(math.log2(max(x, 1.0)))))


def fit_grid(spec: GeneratorSpec, lam: float, d: int = 1, window: WindowSpec = GAUSSIAN,
             reach_extra: float = 0.0, refine: int = 0) -> GridSpec:
    """Smallest power-of-two grid resolving ``U_lam f`` together with the window's STFT footprint.

    ``refine`` doubles both n and L that many times.
    """
    top = abs(lam) * (float(np.max(np.abs(spec.carrier(d)))) + spec.bandwidth())
    nyq = top + _WINDOW_SPECTRAL_RADIUS / window.width
    reach = (float(np.max(np.abs(spec.center(d)))) + spec.spatial_radius()) / abs(lam)
    reach += window.radius + reach_extra
    L = _pow2_at_least(2 * reach, 8)
    n = _pow2_at_least(2 * nyq * L, 16)
    return make_grid(d, n, L).refine(refine)


def lattice_for(grid: GridSpec, window: WindowSpec, step: float | None = None) -> Lattice:
    """Full lattice on small grids, ``step``-spaced (default 1/8) on large ones."""
    if step is None and grid.n <= FULL_LATTICE_MAX_N:
        return make_lattice(grid, window)
    return auto_lattice(grid, window, COARSE_STEP if step is None else step)


def norms_of(f: SampledSignal, params: Sequence[SpaceParams], window: WindowSpec = GAUSSIAN,
             step: float | None = None) -> list[float]:
    return modulation_norms(f, window, params, lattice_for(f.grid, window, step))


# --- regression and operator ratios -----------------------------------------------------------

def exponent_regression(series: Iterable[tuple[float, float]]) -> tuple[float, float, float]:
    """OLS of ``log2 value`` on ``scale_log2``: ``(slope, intercept, max |residual|)``."""
    pts = list(series)
    if len(pts) < 3:
        raise ValueError("exponent regression needs at least 3 points")
    x = np.array([p[0] for p in pts], dtype=float)
    v = np.array([p[1] for p in pts], dtype=float)
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ValueError("values must be positive and finite")
    y = np.log2(v)
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    return float(slope), float(icpt), float(np.max(np.abs(resid)))


def operator_ratios(sigma: SymbolTable, signals: Sequence[SampledSignal], in_space: SpaceParams,
                    out_space: SpaceParams, w: WindowSpec = GAUSSIAN,
                    step: float | None = None) -> list[tuple[float, float]]:
    """``(input norm, output norm)`` per signal."""
    def one(f: SampledSignal) -> tuple[float, float]:
        nin = norms_of(f, [in_space], w, step)[0]
        if not nin > 0:
            raise ValueError("zero input norm")
        nout = norms_of(apply_multiplier(sigma, f), [out_space], w, step)[0]
        return nin, nout
    return ordered_map(one, signals)


def estimate_operator_ratio(sigma: SymbolTable, ensemble: Sequence[SampledSignal],
                            in_space: SpaceParams, out_space: SpaceParams,
                            w: WindowSpec = GAUSSIAN, labels: Sequence[str] | None = None
                            ) -> tuple[float, str]:
    """Ensemble maximum of ``||sigma(D) f||_out / ||f||_in`` and the member attaining it."""
    labels = list(labels) if labels is not None else [str(i) for i in range(len(ensemble))]
    pairs = operator_ratios(sigma, ensemble, in_space, out_space, w)
    ratios = [o / i for i, o in pairs]
    k = int(np.argmax(ratios))
    return ratios[k], labels[k]


def _grid_meta(g: GridSpec) -> tuple[int, int, float]:
    return (g.dim, g.n, g.extent)


# --- dilation exponents ------------------------------------------------------------------------

def run_dilation_scans(points: Sequence[IndexPoint], regime: str, j_max: int,
                       members: Sequence[GeneratorSpec], d: int = 1,
                       window: WindowSpec = GAUSSIAN, tol: float = 0.1,
                       seed: int | None = None, refine: int = 0) -> dict[IndexPoint, ExperimentReport]:
    """``||U_lam f|| / ||f||`` in ``M^{p,q}`` for ``lam = 2^(+-j)``, ``j = 1..j_max``.

    One STFT pass per (member, scale) serves every index point.  Members that do
    not fit a grid are skipped and listed under ``skipped``.
    """
    if j_max < 3:
        raise ValueError("j_max must be >= 3")
    if regime not in (LARGE, SMALL):
        raise ValueError(f"unknown regime {regime!r}")
    sign = 1 if regime == LARGE else -1
    params = [SpaceParams(*pt.exponents()) for pt in points]
    params = [SpaceParams(INF if p.p is INF else float(p.p), INF if p.q is INF else float(p.q)) for p in params]

    def cell(args):
        spec, j = args
        lam = 2.0 ** (sign * j)
        try:
            grid = fit_grid(spec, lam, d, window, refine=refine)
            return norms_of(dilate(spec, lam, grid), params, window)
        except GuardError as exc:
            return exc

    cells = [(m, j) for m in members for j in range(0, j_max + 1)]
    results = dict(zip(cells, ordered_map(cell, cells)))
    reports = {}
    for k, pt in enumerate(points):
        mu = dilation_exponent(pt, regime)
        pred = d * float(mu)
        rep = ExperimentReport("dilation-scan", {
            "p": str(pt.exponents()[0]), "q": str(pt.exponents()[1]), "regime": regime,
            "j_max": j_max, "d": d, "window": window.kind, "mu": str(mu)}, seed=seed)
        slopes, skipped = {}, []
        for m in members:
            vals = [results[(m, j)] for j in range(0, j_max + 1)]
            if any(isinstance(v, Exception) for v in vals):
                skipped.append(m.label)
                continue
            base = vals[0][k]
            series = [(sign * j, vals[j][k] / base) for j in range(1, j_max + 1)]
            slope, _, resid = exponent_regression(series)
            slopes[m.label] = slope
            for j in range(1, j_max + 1):
                rep.add(ReportRow(m.label, float(sign * j), base, vals[j][k], slope=slope, residual=resid))
        if slopes:
            mx, mn = max(slopes.values()), min(slopes.values())
            rep.stats = {
                "predicted": pred, "max_slope": mx, "min_slope": mn,
                "argmax": max(slopes, key=slopes.get), "tol": tol,
                # the bound as literally stated: slope <= d*mu + tol
                "upper_pass": mx <= pred + tol,
                # the bound implied by ||U_lam|| <~ lam^(d mu) when log2(lam) runs over negative values
                "lower_pass": mn >= pred - tol,
                "skipped": skipped,
            }
            rep.stats["regime_pass"] = rep.stats["upper_pass"] if regime == LARGE else rep.stats["lower_pass"]
        reports[pt] = rep
    return reports


def run_dilation_scan(pt: IndexPoint, regime: str, j_max: int, ensemble: EnsembleSpec,
                      window: WindowSpec = GAUSSIAN, tol: float = 0.1) -> ExperimentReport:
    rep = run_dilation_scans([pt], regime, j_max, ensemble.members, ensemble.grid.dim, window,
                             tol, ensemble.seed)[pt]
    rep.grid = _grid_meta(ensemble.grid)
    return rep


# --- derivative-loss threshold ---------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdPacket:
    """Gaussian packet of width ``lambda_j`` at frequency ``2^j`` and the grids it needs."""

    j: int
    spec: GeneratorSpec
    in_grid: GridSpec
    out_grid: GridSpec
    carrier: float
    slope_at_carrier: float


def _derivative(phase: PhaseSpec, x: float, h: float = 1e-3) -> float:
    def cd(s):
        return float((phase_at(phase, (np.array([x + s]),)) - phase_at(phase, (np.array([x - s]),)))[0] / (2 * s))
    return (4 * cd(h) - cd(2 * h)) / 3


def threshold_packet(j: int, alpha: float, phase: PhaseSpec, window: WindowSpec = GAUSSIAN,
                     refine: int = 0) -> ThresholdPacket:
    lam = lambda_scale(alpha, j)
    xc = 2.0**j
    spec = GeneratorSpec("gaussian", (0.0,), (xc,), width=lam, name=f"packet_j{j}")
    in_grid = fit_grid(spec, 1.0, 1, window, refine=refine)
    band = _WINDOW_SPECTRAL_RADIUS / lam
    mu1 = _derivative(phase, xc)
    xs = np.linspace(xc - band, xc + band, 513)
    dmu = np.array([_derivative(phase, x) for x in xs[::8]])
    spread = float(np.max(np.abs(dmu - mu1))) / (2 * np.pi)
    out_grid = fit_grid(spec, 1.0, 1, window, reach_extra=spread, refine=refine)
    out_grid = make_grid(1, max(out_grid.n, in_grid.n * out_grid.extent // in_grid.extent), out_grid.extent)
    return ThresholdPacket(j, spec, in_grid, out_grid, xc, mu1)


def recentred_phase(phase: PhaseSpec, xc: float, slope: float) -> PhaseSpec:
    """``mu - mu(xc) - mu'(xc)(xi - xc)``: the same operator up to a translation and a constant phase."""
    m0 = float(phase_at(phase, (np.array([xc]),))[0])
    return PhaseSpec("custom_table", table=lambda xi: phase_at(phase, (xi,)) - m0 - slope * (xi - xc),
                     label=f"recentred@{xc:g}")


def run_threshold_scan(alpha: float, inv_p, delta_list: Sequence[float], j_max: int, q=1,
                       window: WindowSpec = GAUSSIAN, step: float | None = COARSE_STEP,
                       phase: PhaseSpec | None = None, tol: float = 0.05,
                       refine: int = 0) -> ExperimentReport:
    """``R(delta, j) = ||e^{i mu(D)} f_j||_{M^{p,q}} / ||f_j||_{M^{p,q}_delta}`` over ``j = 1..j_max``."""
    if alpha <= 2:
        raise ValueError("alpha must be > 2")
    ip = Fraction(inv_p).limit_denominator(10**6) if not isinstance(inv_p, Fraction) else inv_p
    p = INF if ip == 0 else float(1 / ip)
    phase = phase or PhaseSpec("power_abs", alpha=alpha)
    deltas = [float(x) for x in delta_list]
    in_params = [SpaceParams(p, q, dl) for dl in deltas]
    out_param = SpaceParams(p, q, 0.0)

    def cell(j: int):
        pk = threshold_packet(j, alpha, phase, window, refine)
        nin = norms_of(synthesize(pk.spec, pk.in_grid), in_params, window, step)
        sig = unimodular_symbol(recentred_phase(phase, pk.carrier, pk.slope_at_carrier), 0.0, pk.out_grid)
        out = apply_multiplier(sig, synthesize(pk.spec, pk.out_grid))
        nout = norms_of(out, [out_param], window, step)[0]
        return nin, nout, pk

    cells = [cell(j) for j in range(1, j_max + 1)]
    thr = float(loss_threshold(ip, Fraction(alpha).limit_denominator(10**6), 1))
    rep = ExperimentReport("threshold-scan", {
        "alpha": alpha, "inv_p": str(ip), "q": str(q), "deltas": deltas, "j_max": j_max,
        "threshold": thr, "step": step, "window": window.kind})
    slopes = {}
    for k, dl in enumerate(deltas):
        series = [(j, out / nin[k]) for j, (nin, out, _) in enumerate(cells, start=1)]
        slope, _, resid = exponent_regression(series)
        slopes[dl] = slope
        for j, (nin, out, _) in enumerate(cells, start=1):
            rep.add(ReportRow(f"delta={dl:g}", float(j), nin[k], out, slope=slope, residual=resid))
    ordered = [slopes[dl] for dl in sorted(slopes)]
    rep.stats = {
        "slopes": {f"{dl:g}": s for dl, s in slopes.items()},
        "monotone": all(b <= a + tol for a, b in zip(ordered, ordered[1:])),
        "grids": [[c[2].out_grid.n, c[2].out_grid.extent] for c in cells],
    }
    last = cells[-1][2].out_grid
    rep.grid = _grid_meta(last)
    return rep


# --- multiplier uniformity ------------------------------------------------------------------

def run_multiplier_scan(phases: Sequence[tuple[float, PhaseSpec]], ensemble: EnsembleSpec,
                        space: SpaceParams = SpaceParams(1, 1), window: WindowSpec = GAUSSIAN,
                        experiment: str = "multiplier", delta: float = 0.0) -> ExperimentReport:
    """Ensemble ratios of ``e^{i mu(D)}`` on one space for a family of phases keyed by a scale."""
    signals = build_ensemble(ensemble)
    labels = ensemble.labels
    nin = ordered_map(lambda f: norms_of(f, [space], window)[0], signals)
    rep = ExperimentReport(experiment, {
        "p": str(space.p), "q": str(space.q), "delta": delta,
        "phases": [ph.describe() for _, ph in phases], "window": window.kind},
        grid=_grid_meta(ensemble.grid), seed=ensemble.seed)
    maxima = {}
    for scale, ph in phases:
        sig = unimodular_symbol(ph, delta, ensemble.grid)
        nout = ordered_map(lambda f: norms_of(apply_multiplier(sig, f), [space], window)[0], signals)
        ratios = [o / i for o, i in zip(nout, nin)]
        k = int(np.argmax(ratios))
        maxima[f"{scale:g}"] = {"max_ratio": ratios[k], "argmax": labels[k]}
        for lab, i, o in zip(labels, nin, nout):
            rep.add(ReportRow(lab, float(scale), i, o))
    vals = [v["max_ratio"] for v in maxima.values()]
    rep.stats = {"maxima": maxima, "variation": max(vals) / min(vals) - 1.0}
    return rep


def run_schrodinger_scan(t_list: Sequence[float], ensemble: EnsembleSpec,
                         space: SpaceParams = SpaceParams(1, 1),
                         window: WindowSpec = GAUSSIAN) -> ExperimentReport:
    phases = [(t, PhaseSpec("schrodinger_t", t=t)) for t in t_list]
    return run_multiplier_scan(phases, ensemble, space, window, "schrodinger-scan")


# --- dyadic sums ------------------------------------------------------------------------------

def chi_multiplier(j: int, grid: GridSpec) -> SymbolTable:
    g = grid.dual() if grid.side == "physical" else grid
    return symbol_from_values(g, chi_j(j, g.radius()), kind="chi", j=j)


def chi_shell_sum(f: SampledSignal, p, J: int, window: WindowSpec = GAUSSIAN,
                step: float | None = None) -> tuple[float, float, int]:
    """``(||f||_{M^{p,1}}, sum_{j=1..J} ||chi_j(D) f||_{M^{p,1}}, nonzero terms)``."""
    sp = SpaceParams(p, 1)
    base = norms_of(f, [sp], window, step)[0]
    terms = [norms_of(apply_multiplier(chi_multiplier(j, f.grid), f), [sp], window, step)[0]
             for j in range(1, J + 1)]
    nonzero = sum(t > 1e-10 * base for t in terms)
    return base, float(sum(terms)), nonzero


def dyadic_members(d: int = 1, K: int = 6, seed: int = 0) -> tuple[GeneratorSpec, ...]:
    from tfmult.xlab.ensemble import default_members
    return default_members(d, seed, range(1, K + 1))


def run_dyadic_sum_check(p, members: Sequence[GeneratorSpec], J_list: Sequence[int] = (4, 6, 8),
                         d: int = 1, n: int = 16384, extent: float = 64.0, K: int = 6,
                         step: float | None = COARSE_STEP, seed: int = 0) -> list[ExperimentReport]:
    """Dyadic chi_j sums over the ensemble and the wave-packet shell-sum ratio.

    Returns two reports: ``dyadic-sum`` (part a) and ``shell-sum`` (part b).
    """
    grid = make_grid(d, n, extent)
    signals = [synthesize(m, grid) for m in members]
    labels = [m.label for m in members]
    rep_a = ExperimentReport("dyadic-sum", {"p": str(p), "J": list(J_list), "K": K, "step": step},
                             grid=_grid_meta(grid), seed=seed)
    worst = {}
    for J in J_list:
        res = ordered_map(lambda f: chi_shell_sum(f, p, J, GAUSSIAN, step), signals)
        ratios = []
        for lab, (base, total, nz) in zip(labels, res):
            rep_a.add(ReportRow(lab, float(J), base, total, residual=float(nz)))
            ratios.append(total / base)
        worst[str(J)] = max(ratios)
    vals = list(worst.values())
    rep_a.stats = {"max_ratio": worst, "constant": max(vals), "spread": max(vals) / min(vals) - 1.0}

    bl = WindowSpec("band_limited")
    packets = [synthesize(GeneratorSpec("wave_packet", (0.0,) * d, (0.0,) * d, shell=k), grid)
               for k in range(1, K + 1)]
    sp = SpaceParams(p, INF)
    pn = ordered_map(lambda f: norms_of(f, [sp], bl, step)[0], packets)
    packets = [f.scale(1.0 / v) for f, v in zip(packets, pn)]
    rep_b = ExperimentReport("shell-sum", {"p": str(p), "K": K, "window": "band_limited", "step": step},
                             grid=_grid_meta(grid), seed=seed)
    acc = None
    ratios = []
    for k, f in enumerate(packets, start=1):
        acc = f if acc is None else acc + f
        tot = norms_of(acc, [sp], bl, step)[0]
        rep_b.add(ReportRow("packets", float(k), 1.0, tot))
        ratios.append(tot)
    rep_b.stats = {"max_ratio": max(ratios), "bound": 4.0}
    return [rep_a, rep_b]


# --- exponential bound ------------------------------------------------------------------------

def bump(grid: GridSpec) -> SampledSignal:
    """Compactly supported C^4 bump ``psi0(|x|)`` (support ``|x| <= 2``)."""
    return sample_function(lambda *c: psi0(np.sqrt(sum(ci**2 for ci in c))), grid)


def affine_envelope(s: Sequence[float], y: Sequence[float]) -> dict[str, float]:
    """Least-squares affine envelope: minimize ``sum (E - y)^2`` over lines ``E >= y``.

    ``relative_residual`` is ``||E - y||_2 / ||y||_2``.
    """
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.stack([np.ones_like(s), s], axis=1)
    (a0, b0), *_ = np.linalg.lstsq(A, y, rcond=None)
    a0 += float(np.max(y - (a0 + b0 * s)))
    res = optimize.minimize(
        lambda v: float(np.sum((A @ v - y) ** 2)), np.array([a0, b0]), method="SLSQP",
        constraints=[{"type": "ineq", "fun": lambda v: A @ v - y}],
        options={"ftol": 1e-15, "maxiter": 200},
    )
    a, b = (res.x if res.success else (a0, b0))
    env = a + b * s
    # SLSQP may leave the envelope a hair below a touching point
    a += max(0.0, float(np.max(y - env)))
    env = a + b * s
    return {"slope": float(b), "intercept": float(a),
            "relative_residual": float(np.linalg.norm(env - y) / np.linalg.norm(y)),
            "max_gap": float(np.max(env - y))}


def run_exp_bound_scan(phase: PhaseSpec, s_list: Sequence[float], grid: GridSpec | None = None,
                       window: WindowSpec = GAUSSIAN, label: str | None = None) -> ExperimentReport:
    """``log ||chi e^{i s mu}||_{M^{1,1}}`` against ``s`` for a compact bump ``chi``."""
    grid = grid or make_grid(1, 1024, 16.0)
    chi = bump(grid)
    sp = SpaceParams(1, 1)
    base = norms_of(chi, [sp], window)[0]
    name = label or phase.family
    rep = ExperimentReport("exp-bound", {"phase": phase.describe(), "s": [float(x) for x in s_list]},
                           grid=_grid_meta(grid))
    top = max(abs(x) for x in s_list)
    mu = phase_at(phase, grid.coords())
    inside = np.abs(grid.axis) <= 2.0
    dmu = np.gradient(np.broadcast_to(mu, grid.shape).real, grid.spacing)
    if grid.dim == 1 and top * float(np.max(np.abs(dmu[inside]))) / (2 * np.pi) + 3.2 > grid.nyquist:
        raise GuardError(f"s up to {top:g} needs frequencies beyond the grid Nyquist {grid.nyquist:g}")
    logs = []
    for s in s_list:
        v = norms_of(product_signal(chi, phase, s), [sp], window)[0]
        rep.add(ReportRow(name, float(s), base, v))
        logs.append(math.log(v))
    pos = [(s, y) for s, y in zip(s_list, logs) if s > 0]
    rep.stats = affine_envelope([s for s, _ in pos], [y for _, y in pos]) if len(pos) >= 2 else {}
    return rep
