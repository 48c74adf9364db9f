"""Empirical constants for inequalities that only hold up to an unspecified factor.

Each ``measure_*`` function takes a ``refine`` level (n and L doubled that many
times) so the same code serves the frozen-constant tests and the dense-grid
oracle script.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from tfmult.gabor import (
    GAUSSIAN,
    INF,
    SpaceParams,
    WindowSpec,
    amalgam_norm,
    block_modulation_norm,
    modulation_norms,
)
from tfmult.grid import GeneratorSpec, SampledSignal, forward_ft, make_grid, synthesize
from tfmult.symbols import averaged_dilate, bessel_potential
from tfmult.xlab.ensemble import default_ensemble_spec
from tfmult.xlab.experiments import (
    bump,
    dyadic_members,
    lattice_for,
    norms_of,
    run_dyadic_sum_check,
    run_threshold_scan,
)

BLOCK_PAIRS = ((1, 1), (2, 2), (INF, 1))
PRODUCT_PAIRS = ((1, 1), (2, 2), (1, INF))
X0_LIST = (-8.0, 0.0, 8.0)


def _two_sided(ratios: Sequence[float]) -> float:
    """Smallest C with every ratio in ``[1/C, C]``."""
    r = np.asarray(ratios, dtype=float)
    return float(max(r.max(), 1.0 / r.min()))


def _ensemble(refine: int, n: int = 1024, extent: float = 64.0):
    spec = default_ensemble_spec(1, n, extent)
    grid = spec.grid.refine(refine)
    return spec.labels, [synthesize(m, grid) for m in spec.members]


def measure_block_constant(p, q, refine: int = 0) -> dict:
    """Block-partition norm against the STFT norm across the default ensemble."""
    labels, sigs = _ensemble(refine)
    sp = SpaceParams(p, q)
    ratios = [block_modulation_norm(f, p, q) / norms_of(f, [sp])[0] for f in sigs]
    return {"C": _two_sided(ratios), "ratios": dict(zip(labels, ratios))}


def measure_window_constant(p, q, refine: int = 0) -> dict:
    """Band-limited window norm against the gaussian window norm."""
    labels, sigs = _ensemble(refine)
    sp = SpaceParams(p, q)
    bl = WindowSpec("band_limited")
    ratios = [norms_of(f, [sp], bl)[0] / norms_of(f, [sp])[0] for f in sigs]
    return {"C": _two_sided(ratios), "ratios": dict(zip(labels, ratios))}


def random_pair(rng: np.random.Generator) -> tuple[GeneratorSpec, list[GeneratorSpec]]:
    """A modulated gaussian ``f`` and a two-term gaussian sum ``u``."""
    def g(name: str) -> GeneratorSpec:
        x0 = float(rng.integers(-8, 9)) / 2
        xi0 = float(rng.integers(-8, 9)) / 4
        return GeneratorSpec("gaussian", (x0,), (xi0,), width=float(rng.uniform(0.7, 2.0)), name=name)
    return g("f"), [g("u1"), g("u2")]


def measure_product_constant(p, q, pairs: int = 20, seed: int = 0, refine: int = 0) -> dict:
    """``max ||f u||_{W(FL^p,L^q)} / (||f||_{W(FL^1,L^inf)} ||u||_{W(FL^p,L^q)})`` over random pairs."""
    grid = make_grid(1, 512, 32.0).refine(refine)
    lat = lattice_for(grid, GAUSSIAN)
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(pairs):
        fs, us = random_pair(rng)
        f = synthesize(fs, grid)
        u = synthesize(us[0], grid) + synthesize(us[1], grid).scale(complex(rng.normal(), rng.normal()))
        fu = f.with_samples(f.samples * u.samples)
        num = amalgam_norm(fu, GAUSSIAN, p, q, lat)
        den = amalgam_norm(f, GAUSSIAN, 1, INF, lat) * amalgam_norm(u, GAUSSIAN, p, q, lat)
        ratios.append(num / den)
    return {"C": float(max(ratios)), "min": float(min(ratios))}


def measure_amalgam_fourier(refine: int = 0) -> dict[str, float]:
    """``amalgam_norm(F f) / modulation_norm(f)`` for a gaussian, per (p, q)."""
    grid = make_grid(1, 1024, 64.0).refine(refine)
    f = synthesize(GeneratorSpec("gaussian", (1.5,), (0.75,), width=1.2), grid)
    F = forward_ft(f)
    out = {}
    for p, q in PRODUCT_PAIRS:
        a = amalgam_norm(F, GAUSSIAN, p, q, lattice_for(F.grid, GAUSSIAN))
        m = modulation_norms(f, GAUSSIAN, [SpaceParams(p, q)], lattice_for(grid, GAUSSIAN))[0]
        out[f"{p},{q}"] = a / m
    return out


def measure_averaged_dilate(refine: int = 0) -> dict:
    """Amalgam ``W(FL^1, L^inf)`` of ``g_{x0}`` over that of ``f``, for x0 in {-8, 0, 8}."""
    grid = make_grid(1, 1024, 64.0).refine(refine)
    lat = lattice_for(grid, GAUSSIAN)
    chi = bump(grid)
    # a bounded, non-decaying f that is periodic on every grid used
    f = lambda x: 1.0 + 0.5 * np.cos(3 * np.pi * x / 16) + 0.3j * np.sin(5 * np.pi * x / 32)
    base = amalgam_norm(SampledSignal(grid, f(grid.axis).astype(complex)), GAUSSIAN, 1, INF, lat)
    ratios = {}
    for x0 in X0_LIST:
        g = averaged_dilate(f, chi, (x0,))
        ratios[f"{x0:g}"] = amalgam_norm(g, GAUSSIAN, 1, INF, lat) / base
    vals = list(ratios.values())
    return {"ratios": ratios, "C": float(max(vals)), "spread": float(max(vals) / min(vals))}


def measure_bessel(delta: float = 1.5, refine: int = 0) -> dict:
    """``||<D>^-delta f||_{M^{p,q}_delta} / ||f||_{M^{p,q}}`` over the ensemble, per (p, q)."""
    labels, sigs = _ensemble(refine)
    out = {}
    for p, q in PRODUCT_PAIRS:
        r = []
        for f in sigs:
            num = norms_of(bessel_potential(f, -delta), [SpaceParams(p, q, delta)])[0]
            r.append(num / norms_of(f, [SpaceParams(p, q)])[0])
        out[f"{p},{q}"] = {"min": float(min(r)), "max": float(max(r))}
    return out


def measure_threshold_slope(refine: int = 0, j_max: int = 6) -> dict[str, float]:
    rep = run_threshold_scan(3.0, 1, [0.0, 0.5], j_max, refine=refine)
    return dict(rep.stats["slopes"])


def measure_dyadic_constant(p, refine: int = 0, J_list=(4, 6, 8)) -> dict:
    members = dyadic_members(1, 6, 0)
    reps = run_dyadic_sum_check(p, members, J_list, n=16384 * 2**refine, extent=64.0 * 2**refine)
    return {"constant": reps[0].stats["constant"], "spread": reps[0].stats["spread"],
            "shell_max": reps[1].stats["max_ratio"]}


def relative_drift(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), math.ulp(1.0))
