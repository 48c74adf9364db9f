"""Phases, multiplier symbols and the constructions built from them.

A multiplier ``sigma(D)`` acts as ``F^{-1} (sigma * F f)``.  Phases are declared
with :class:`PhaseSpec` and evaluated in closed form at arbitrary points, so the
same description serves grid tabulation, dilated symbols and Taylor remainders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy import special

from tfmult.grid import (
    FREQUENCY,
    PHYSICAL,
    GeneratorSpec,
    GridSpec,
    SampledSignal,
    _as_vector,
    _on_grid_shift,
    evaluate,
    forward_ft,
    inverse_ft,
)

PHASE_FAMILIES = ("power_abs", "schrodinger_t", "bracket_power", "fresnel_osc", "custom_table")
_NEEDS_ALPHA = ("power_abs", "bracket_power")
_SQRT_HALF_PI = math.sqrt(math.pi / 2)


@dataclass(frozen=True)
class PhaseSpec:
    """Real phase ``mu`` on R^d.

    ``power_abs``      ``c |xi|^alpha``
    ``schrodinger_t``  ``t |xi|^2``
    ``bracket_power``  ``c <xi>^alpha``
    ``fresnel_osc``    ``c * mu0`` with ``mu0'' = cos(xi^2)``, ``mu0(0) = mu0'(0) = 0`` (d = 1)
    ``custom_table``   ``table(*coords)``, any vectorized callable
    """

    family: str
    alpha: float = 2.0
    c: float = 1.0
    t: float = 1.0
    table: Callable[..., np.ndarray] | None = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self) -> None:
        if self.family not in PHASE_FAMILIES:
            raise ValueError(f"unknown phase family {self.family!r}")
        if self.family in _NEEDS_ALPHA and not self.alpha >= 2:
            raise ValueError(f"{self.family} requires alpha >= 2, got {self.alpha}")
        if self.family == "custom_table" and not callable(self.table):
            raise ValueError("custom_table phases need a callable 'table'")

    @property
    def growth(self) -> float:
        """Exponent alpha with ``<xi>^(2-alpha) d^2 mu`` bounded."""
        if self.family in _NEEDS_ALPHA:
            return self.alpha
        return 2.0

    def scaled(self, s: float) -> PhaseSpec:
        """The phase ``s * mu``."""
        if self.family == "schrodinger_t":
            return PhaseSpec(self.family, self.alpha, self.c, self.t * s, label=self.label)
        if self.family == "custom_table":
            fn = self.table
            return PhaseSpec(self.family, table=lambda *c: s * np.asarray(fn(*c)), label=self.label)
        return PhaseSpec(self.family, self.alpha, self.c * s, self.t, label=self.label)

    def describe(self) -> dict[str, Any]:
        out: dict[str, Any] = {"family": self.family}
        if self.family in _NEEDS_ALPHA:
            out.update(alpha=self.alpha, c=self.c)
        elif self.family == "schrodinger_t":
            out["t"] = self.t
        elif self.family == "fresnel_osc":
            out["c"] = self.c
        if self.label:
            out["label"] = self.label
        return out


def fresnel_phase(xi: np.ndarray) -> np.ndarray:
    """``mu0(xi) = xi F(xi) - sin(xi^2)/2`` with ``F(xi) = int_0^xi cos(s^2) ds``.

    Differentiating twice gives ``cos(xi^2)``; both ``mu0(0)`` and ``mu0'(0)`` vanish.
    """
    xi = np.asarray(xi, dtype=float)
    _, C = special.fresnel(xi / _SQRT_HALF_PI)
    return xi * _SQRT_HALF_PI * C - 0.5 * np.sin(xi * xi)


def phase_at(spec: PhaseSpec, coords: Sequence[np.ndarray]) -> np.ndarray:
    """Evaluate ``mu`` at arbitrary points given one broadcastable array per axis."""
    coords = [np.asarray(c, dtype=float) for c in coords]
    r2 = sum(c * c for c in coords)
    fam = spec.family
    if fam == "power_abs":
        return spec.c * r2 ** (spec.alpha / 2)
    if fam == "schrodinger_t":
        return spec.t * r2
    if fam == "bracket_power":
        return spec.c * (1.0 + r2) ** (spec.alpha / 2)
    if fam == "fresnel_osc":
        if len(coords) != 1:
            raise ValueError("fresnel_osc is a one-dimensional phase")
        return spec.c * fresnel_phase(coords[0])
    out = np.asarray(spec.table(*coords), dtype=float)
    return np.broadcast_to(out, np.broadcast_shapes(*[c.shape for c in coords])).copy()


def _freq_grid(grid: GridSpec) -> GridSpec:
    return grid if grid.side == FREQUENCY else grid.dual()


def phase_eval(spec: PhaseSpec, grid: GridSpec) -> np.ndarray:
    """Tabulate ``mu`` on the frequency grid (a physical grid is replaced by its dual)."""
    g = _freq_grid(grid)
    return np.broadcast_to(phase_at(spec, g.coords()), g.shape).copy()


def second_difference_sup(spec: PhaseSpec, grid: GridSpec) -> float:
    """``sup <xi>^(2 - alpha) |d^2 mu|`` over the grid, by central differences at grid spacing.

    In d = 2 all pure and mixed second differences are included.
    """
    g = _freq_grid(grid)
    h = g.spacing
    c = g.coords()
    w = (1.0 + sum(ci**2 for ci in c)) ** ((2.0 - spec.growth) / 2)
    best = 0.0
    for H in _hessian(spec, c, h):
        best = max(best, float(np.max(np.abs(H) * w)))
    return best


def _shift(coords, k: int, s: float):
    return [ci + s if i == k else ci for i, ci in enumerate(coords)]


def _hessian(spec: PhaseSpec, coords, h: float) -> list[np.ndarray]:
    """Second partial derivatives by Richardson-extrapolated central differences."""
    d = len(coords)

    def d2(k: int, l: int, step: float) -> np.ndarray:
        if k == l:
            return (phase_at(spec, _shift(coords, k, step)) - 2 * phase_at(spec, coords)
                    + phase_at(spec, _shift(coords, k, -step))) / step**2
        pp = phase_at(spec, _shift(_shift(coords, k, step), l, step))
        pm = phase_at(spec, _shift(_shift(coords, k, step), l, -step))
        mp = phase_at(spec, _shift(_shift(coords, k, -step), l, step))
        mm = phase_at(spec, _shift(_shift(coords, k, -step), l, -step))
        return (pp - pm - mp + mm) / (4 * step**2)

    out = []
    for k in range(d):
        for l in range(k, d):
            out.append((4 * d2(k, l, h) - d2(k, l, 2 * h)) / 3)
    return out


@dataclass(frozen=True, eq=False)
class SymbolTable:
    """Values of a symbol ``sigma`` on a frequency grid, with provenance."""

    grid: GridSpec
    values: np.ndarray
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.grid.side != FREQUENCY:
            raise ValueError("symbols live on frequency grids")
        v = np.array(self.values, dtype=np.complex128).reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("symbol values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        d = dict(self.descriptor)
        d.setdefault("sup", float(np.max(np.abs(v))))
        object.__setattr__(self, "descriptor", d)

    @property
    def sup(self) -> float:
        return self.descriptor["sup"]

    def __mul__(self, other: SymbolTable) -> SymbolTable:
        if not self.grid.matches(other.grid):
            raise ValueError("symbol grids differ")
        return SymbolTable(self.grid, self.values * other.values,
                           {"product": [self.descriptor, other.descriptor]})


def symbol_from_values(grid: GridSpec, values: np.ndarray, **descriptor) -> SymbolTable:
    return SymbolTable(_freq_grid(grid), values, descriptor)


def constant_symbol(grid: GridSpec, c: complex) -> SymbolTable:
    g = _freq_grid(grid)
    return SymbolTable(g, np.full(g.shape, c, dtype=np.complex128), {"kind": "constant", "c": str(c)})


def unimodular_symbol(phase: PhaseSpec, delta: float, grid: GridSpec) -> SymbolTable:
    """``exp(i mu(xi)) <xi>^(-delta)`` on the frequency grid."""
    g = _freq_grid(grid)
    mu = phase_eval(phase, g)
    wt = (1.0 + g.radius() ** 2) ** (-delta / 2)
    desc = {"phase": phase.describe(), "delta": delta, "sup": float(np.max(wt))}
    return SymbolTable(g, np.exp(1j * mu) * wt, desc)


def bessel_symbol(grid: GridSpec, t: float) -> SymbolTable:
    g = _freq_grid(grid)
    return SymbolTable(g, (1.0 + g.radius() ** 2) ** (t / 2), {"kind": "bessel", "t": t})


def translation_symbol(grid: GridSpec, x0) -> SymbolTable:
    """``exp(2 pi i x0 . xi)``, the symbol of ``f -> f(. + x0)``."""
    g = _freq_grid(grid)
    x0 = _as_vector(x0, g.dim)
    ph = sum(x0[i] * c for i, c in enumerate(g.coords()))
    return SymbolTable(g, np.exp(2j * np.pi * ph), {"kind": "translation", "x0": x0.tolist()})


def random_bounded_symbol(grid: GridSpec, seed: int) -> SymbolTable:
    """I.i.d. uniform phases and moduli in [0, 1] from a seeded generator."""
    g = _freq_grid(grid)
    rng = np.random.default_rng(seed)
    mod = rng.uniform(0.0, 1.0, g.shape)
    ph = rng.uniform(0.0, 2 * np.pi, g.shape)
    return SymbolTable(g, mod * np.exp(1j * ph), {"kind": "random_bounded", "seed": seed})


def apply_multiplier(sigma: SymbolTable, f: SampledSignal) -> SampledSignal:
    """``sigma(D) f = F^{-1}(sigma F f)``."""
    F = forward_ft(f)
    if not sigma.grid.matches(F.grid):
        raise ValueError(
            f"symbol grid (n={sigma.grid.n}, extent={sigma.grid.extent}) does not match "
            f"the dual grid of the signal (n={F.grid.n}, extent={F.grid.extent})"
        )
    return inverse_ft(F.with_samples(F.samples * sigma.values))


def bessel_potential(f: SampledSignal, t: float) -> SampledSignal:
    """``<D>^t f``."""
    return apply_multiplier(bessel_symbol(f.grid.dual(), t), f)


# --- Taylor split ------------------------------------------------------------------

_GL_NODES = 64


def _gauss_legendre01(m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


def taylor_remainder_integral(phase: PhaseSpec, points: Sequence[np.ndarray], h: float,
                              nodes: int = _GL_NODES) -> np.ndarray:
    """``sum_{|g|=2} (2/g!) int_0^1 (1-t) d^g mu(t x) dt x^g`` at the given points.

    Second derivatives come from finite differences with step ``h``.
    """
    pts = [np.asarray(p, dtype=float) for p in points]
    d = len(pts)
    tn, wn = _gauss_legendre01(nodes)
    out = np.zeros(np.broadcast_shapes(*[p.shape for p in pts]))
    for t, w in zip(tn, wn):
        H = _hessian(phase, [t * p for p in pts], h)
        if d == 1:
            quad = H[0] * pts[0] ** 2
        else:
            quad = H[0] * pts[0] ** 2 + 2 * H[1] * pts[0] * pts[1] + H[2] * pts[1] ** 2
        out = out + w * (1.0 - t) * quad
    return out


def taylor_split(phase: PhaseSpec, ball_radius: float, grid: GridSpec,
                 tol: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """Split ``mu = psi1 + psi2`` on the frequency grid, ``psi1`` the first-order Taylor polynomial at 0.

    ``mu(0)`` and ``grad mu(0)`` are central differences at the grid spacing
    (one Richardson step).  The remainder is cross-checked on ``|xi| <= ball_radius``
    against the integral form of the Taylor remainder; a mismatch above ``tol``
    raises ``RuntimeError``.
    """
    g = _freq_grid(grid)
    h = g.spacing
    d = g.dim
    zero = [np.zeros(1) for _ in range(d)]
    mu0 = float(phase_at(phase, zero)[0])
    grad = []
    for k in range(d):
        def diff(s: float) -> float:
            return float((phase_at(phase, _shift(zero, k, s)) - phase_at(phase, _shift(zero, k, -s)))[0] / (2 * s))
        grad.append((4 * diff(h) - diff(2 * h)) / 3)
    coords = g.coords()
    affine = np.broadcast_to(mu0 + sum(grad[k] * coords[k] for k in range(d)), g.shape).copy()
    remainder = phase_eval(phase, g) - affine

    mask = g.radius() <= ball_radius
    full = [np.broadcast_to(c, g.shape)[mask] for c in coords]
    ref = taylor_remainder_integral(phase, full, h)
    fine = taylor_remainder_integral(phase, full, h, nodes=2 * _GL_NODES)
    if np.max(np.abs(ref - fine), initial=0.0) > tol:
        raise RuntimeError("Gauss-Legendre quadrature of the Taylor remainder did not converge")
    err = float(np.max(np.abs(remainder[mask] - ref), initial=0.0))
    if err > tol:
        raise RuntimeError(f"Taylor remainder mismatch {err:.3e} exceeds {tol:g} on the ball")
    return affine, remainder


# --- averaged dilation ---------------------------------------------------------------

def averaged_dilate(f: GeneratorSpec | Callable[..., np.ndarray], chi: SampledSignal, x0,
                    nodes: int = _GL_NODES, tol: float = 1e-8) -> SampledSignal:
    """``g(x) = chi(x - x0) int_0^1 (1 - t) f(t (x - x0) + x0) dt`` on ``chi``'s grid.

    ``f`` is a generator or a vectorized callable of the coordinates; ``chi`` must
    be numerically compactly supported and ``x0`` on the grid.
    """
    grid = chi.grid
    d = grid.dim
    x0v = _as_vector(x0, d)
    shift = _on_grid_shift(x0v, grid)
    a = np.abs(chi.samples)
    edge = max(float(np.max(np.abs(np.take(a, [0, -1], axis=k)))) for k in range(d))
    if a.max() > 0 and edge > 1e-10 * a.max():
        raise ValueError("chi is not numerically compactly supported on the grid")
    fn = (lambda *c: evaluate(f, c)) if isinstance(f, GeneratorSpec) else f
    coords = grid.coords()

    def integral(m: int) -> np.ndarray:
        tn, wn = _gauss_legendre01(m)
        acc = np.zeros(grid.shape, dtype=np.complex128)
        for t, w in zip(tn, wn):
            pts = [t * (coords[k] - x0v[k]) + x0v[k] for k in range(d)]
            acc += w * (1.0 - t) * np.broadcast_to(np.asarray(fn(*pts), dtype=np.complex128), grid.shape)
        return acc

    base = integral(nodes)
    check = integral(nodes + nodes // 2)
    chi_shift = np.roll(chi.samples, shift, axis=tuple(range(d)))
    if np.max(np.abs((base - check) * chi_shift), initial=0.0) > tol:
        raise RuntimeError("averaged dilation quadrature did not converge")
    return SampledSignal(grid, chi_shift * base)


def product_signal(chi: SampledSignal, phase: PhaseSpec, s: float = 1.0) -> SampledSignal:
    """Pointwise ``chi * exp(i s mu)`` with ``mu`` evaluated at ``chi``'s sample points."""
    mu = np.broadcast_to(phase_at(phase, chi.grid.coords()), chi.grid.shape)
    return chi.with_samples(chi.samples * np.exp(1j * s * mu))


def windowed_fl1_profile(values: np.ndarray, grid: GridSpec, window_width: float = 1.0,
                         stride: int = 1) -> np.ndarray:
    """``x0 -> ||g(. - x0) u||_{FL^1}`` for a function tabulated on ``grid``.

    This is the inner quantity of the ``W(FL^1, L^inf)`` norm; its sup is the norm.
    Only centers whose window stays inside the grid are kept, so the periodic
    wrap of the table does not enter.
    """
    from tfmult.gabor import WindowSpec, _blocks, make_lattice

    w = WindowSpec("gaussian", window_width)
    u = SampledSignal(GridSpec(grid.dim, grid.n, grid.extent, PHYSICAL), values)
    lat = make_lattice(u.grid, w, a=stride * u.grid.spacing)
    cell = lat.b**grid.dim
    prof, keep = [], []
    half = grid.extent / 2 - w.radius
    for pos, V in _blocks(u, w, lat, with_phase=False):
        centers = (pos - grid.n // 2) * grid.spacing
        keep.append(np.all(np.abs(centers) <= half, axis=1))
        prof.append(np.abs(V).sum(axis=1) * cell)
    return np.concatenate(prof)[np.concatenate(keep)]


def regularity_surrogate(phase: PhaseSpec, grid: GridSpec, stride: int = 4) -> dict[str, float]:
    """Windowed ``FL^1`` sups of ``<xi>^(-alpha) mu`` and ``<xi>^(1-alpha) grad mu`` (d = 1).

    A bounded, grid-stable value is the computable stand-in for membership of
    these functions in ``W(FL^1, L^inf)``.
    """
    g = _freq_grid(grid)
    if g.dim != 1:
        raise ValueError("regularity_surrogate supports d = 1")
    xi = g.axis
    h = g.spacing
    a = phase.growth
    mu = phase_at(phase, (xi,))
    dmu = (phase_at(phase, (xi + h,)) - phase_at(phase, (xi - h,))) / (2 * h)
    br = 1.0 + xi**2
    return {
        "mu": float(np.max(windowed_fl1_profile(mu * br ** (-a / 2), g, stride=stride))),
        "grad": float(np.max(windowed_fl1_profile(dmu * br ** ((1 - a) / 2), g, stride=stride))),
    }
