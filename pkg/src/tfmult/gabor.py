"""Short-time Fourier transform and the norms built on it.

``V_g f(x, xi) = int f(y) conj(g(y - x)) exp(-2 pi i xi y) dy`` is evaluated on a
separable lattice ``(a Z)^d x (b Z)^d`` with ``a``, ``b`` integer multiples of
the grid spacings.  For each lattice point ``x`` the product ``f conj(T_x g)`` is
cut to a window segment, zero padded and transformed, so a coarse frequency
step ``b`` costs proportionally less.  Norms are reduced on the fly, which keeps
memory bounded on large grids; :func:`stft` materializes the full matrix for
small problems and tests.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from tfmult.grid import (
    BAND_LIMITED_WIDTH,
    GridSpec,
    SampledSignal,
    centered_fft,
    forward_ft,
    inverse_ft,
)

# exp(-pi r^2) < 1e-14 beyond r = 3.2 window widths.
_WINDOW_RADIUS = 3.2
_CHUNK_ELEMS = 1 << 21


class Inf(enum.Enum):
    INF = "inf"

    def __repr__(self) -> str:
        return "INF"

    def __str__(self) -> str:
        return "inf"


INF = Inf.INF


def parse_exponent(v) -> float | Inf:
    """Parse a Lebesgue exponent in [1, inf]; ``"inf"`` maps to :data:`INF`."""
    if v is INF:
        return INF
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "infinity", "oo"):
            return INF
        v = float(s)
    v = float(v)
    if math.isinf(v):
        raise ValueError("use INF (or 'inf') for infinite exponents, not a float")
    if not v >= 1.0:
        raise ValueError(f"exponent must lie in [1, inf], got {v}")
    return v


def inv_exponent(p: float | Inf) -> float:
    return 0.0 if p is INF else 1.0 / p


@dataclass(frozen=True)
class SpaceParams:
    """Exponents ``(p, q)`` and frequency weight ``delta`` of ``M^{p,q}_delta``."""

    p: float | Inf
    q: float | Inf
    delta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", parse_exponent(self.p))
        object.__setattr__(self, "q", parse_exponent(self.q))
        if not math.isfinite(self.delta):
            raise ValueError("delta must be finite")

    def label(self) -> str:
        return f"M^({self.p},{self.q})_{self.delta:g}"


@dataclass(frozen=True)
class WindowSpec:
    """Unit-L^2 gaussian window ``2^(d/4) w^(-d/2) exp(-pi |t|^2 / w^2)``.

    ``band_limited`` windows use a wide envelope (default width 4) whose spectrum
    has energy <= 1e-10 outside the ball ``|xi| < 1/2``.
    """

    kind: str = "gaussian"
    width: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("gaussian", "band_limited"):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if self.width is None:
            object.__setattr__(self, "width", 1.0 if self.kind == "gaussian" else BAND_LIMITED_WIDTH)
        if not self.width > 0:
            raise ValueError("window width must be positive")
        if self.kind == "band_limited":
            tail = self.spectral_tail(2)
            if tail > 1e-10:
                raise ValueError(f"band-limited window too narrow: spectral tail {tail:.2e} > 1e-10")

    def spectral_tail(self, d: int) -> float:
        """Fraction of spectral energy outside ``|xi| < 1/2``."""
        w = self.width
        if d == 1:
            return math.erfc(math.sqrt(2 * math.pi) * w * 0.5)
        return math.exp(-2 * math.pi * w * w * 0.25)

    @property
    def radius(self) -> float:
        return _WINDOW_RADIUS * self.width

    def values(self, coords: Sequence[np.ndarray]) -> np.ndarray:
        d = len(coords)
        r2 = sum(np.asarray(c, dtype=float) ** 2 for c in coords)
        w = self.width
        return 2.0 ** (d / 4) * w ** (-d / 2) * np.exp(-np.pi * r2 / w**2)

    def sample(self, grid: GridSpec) -> SampledSignal:
        return SampledSignal(grid, self.values(grid.coords()))


GAUSSIAN = WindowSpec()


def weight_eval(xi, s: float) -> float:
    """``<xi>^s = (1 + |xi|^2)^(s/2)`` at one point of R^d."""
    v = np.atleast_1d(np.asarray(xi, dtype=float))
    return float((1.0 + np.dot(v, v)) ** (s / 2))


def bracket(r2: np.ndarray, s: float) -> np.ndarray:
    """Vectorized ``<xi>^s`` from squared radii."""
    return (1.0 + r2) ** (s / 2)


@dataclass(frozen=True)
class Lattice:
    """Time-frequency lattice geometry for STFTs on a given grid."""

    grid: GridSpec
    ka: int
    kb: int
    seg: int

    @property
    def a(self) -> float:
        return self.ka * self.grid.spacing

    @property
    def b(self) -> float:
        return 1.0 / (self.nfft * self.grid.spacing)

    @property
    def nfft(self) -> int:
        return self.grid.n // self.kb

    @property
    def m_x(self) -> int:
        return self.grid.n // self.ka

    def x_axis(self) -> np.ndarray:
        return (np.arange(0, self.grid.n, self.ka) - self.grid.n // 2) * self.grid.spacing

    def xi_axis(self) -> np.ndarray:
        return (np.arange(self.nfft) - self.nfft // 2) * self.b

    def xi_radius2(self) -> np.ndarray:
        ax = self.xi_axis() ** 2
        if self.grid.dim == 1:
            return ax
        return (ax[:, None] + ax[None, :]).ravel()


def make_lattice(grid: GridSpec, window: WindowSpec, a: float | None = None, b: float | None = None) -> Lattice:
    """Resolve physical lattice steps into grid multiples.

    ``None`` means full resolution (``a = dx``, ``b = dxi``).
    """
    h = grid.spacing
    dxi = 1.0 / grid.extent
    if a is not None and a > grid.extent:
        raise ValueError(f"lattice step a={a} is coarser than the grid extent {grid.extent}")
    if b is not None and b > grid.n / grid.extent:
        raise ValueError(f"lattice step b={b} is coarser than the frequency extent {grid.n / grid.extent}")
    ka = 1 if a is None else int(round(a / h))
    kb = 1 if b is None else int(round(b / dxi))
    if a is not None and (ka < 1 or abs(ka * h - a) > 1e-9 * a):
        raise ValueError(f"a={a} is not a positive multiple of dx={h}")
    if b is not None and (kb < 1 or abs(kb * dxi - b) > 1e-9 * b):
        raise ValueError(f"b={b} is not a positive multiple of dxi={dxi}")
    if grid.n % ka:
        raise ValueError(f"a/dx = {ka} must divide n = {grid.n}")
    if grid.n % kb:
        raise ValueError(f"b/dxi = {kb} must divide n = {grid.n}")
    seg = 2 * int(math.ceil(window.radius / h)) + 2
    seg = min(seg, grid.n)
    if grid.n // kb < seg:
        raise ValueError(
            f"frequency step b={kb * dxi:g} too coarse for the window segment ({seg} samples > {grid.n // kb})"
        )
    return Lattice(grid, ka, kb, seg)


def auto_lattice(grid: GridSpec, window: WindowSpec, step: float = 0.125) -> Lattice:
    """Coarse lattice with both steps close to (and not above) ``step``.

    Falls back to the grid spacings when those are already coarser.
    """
    h = grid.spacing
    ka = max(1, 2 ** int(math.floor(math.log2(step / h)))) if step >= h else 1
    ka = min(ka, grid.n)
    dxi = 1.0 / grid.extent
    seg = min(2 * int(math.ceil(window.radius / h)) + 2, grid.n)
    kb = max(1, 2 ** int(math.floor(math.log2(step / dxi)))) if step >= dxi else 1
    while kb > 1 and grid.n // kb < seg:
        kb //= 2
    return Lattice(grid, ka, kb, seg)


def _positions(lat: Lattice) -> np.ndarray:
    d = lat.grid.dim
    idx = np.arange(0, lat.grid.n, lat.ka)
    if d == 1:
        return idx[:, None]
    i0, i1 = np.meshgrid(idx, idx, indexing="ij")
    return np.stack([i0.ravel(), i1.ravel()], axis=1)


def _blocks(f: SampledSignal, window: WindowSpec, lat: Lattice, with_phase: bool) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(position indices, V values)`` chunks, values shaped ``(C, nfft**d)``."""
    grid = f.grid
    d, n = grid.dim, grid.n
    P, N = lat.seg, lat.nfft
    s = np.arange(P) - P // 2
    sh = s * grid.spacing
    gvals = window.values((sh,) if d == 1 else (sh[:, None], sh[None, :]))
    gconj = np.conj(gvals) * grid.cell
    pos = _positions(lat)
    per = max(1, _CHUNK_ELEMS // (N**d))
    off = N // 2 - P // 2
    axes = tuple(range(1, d + 1))
    xi = lat.xi_axis()
    for start in range(0, len(pos), per):
        pc = pos[start:start + per]
        C = len(pc)
        if d == 1:
            ind = (pc[:, 0:1] + s[None, :]) % n
            seg = f.samples[ind] * gconj[None, :]
            buf = np.zeros((C, N), dtype=np.complex128)
            buf[:, off:off + P] = seg
        else:
            i0 = (pc[:, 0:1] + s[None, :]) % n
            i1 = (pc[:, 1:2] + s[None, :]) % n
            seg = f.samples[i0[:, :, None], i1[:, None, :]] * gconj[None, :, :]
            buf = np.zeros((C, N, N), dtype=np.complex128)
            buf[:, off:off + P, off:off + P] = seg
        V = centered_fft(buf, axes)
        if with_phase:
            xpos = (pc - n // 2) * grid.spacing
            if d == 1:
                V *= np.exp(-2j * np.pi * xpos[:, 0:1] * xi[None, :])
            else:
                V *= np.exp(-2j * np.pi * (xpos[:, 0, None, None] * xi[None, :, None]
                                           + xpos[:, 1, None, None] * xi[None, None, :]))
        yield pc, V.reshape(C, -1)


@dataclass(frozen=True, eq=False)
class StftMatrix:
    """Sampled ``V_g f`` with rows indexed by lattice positions and columns by frequencies.

    Both index sets are flattened row-major over the d axes.
    """

    values: np.ndarray
    x_axis: np.ndarray
    xi_axis: np.ndarray
    a: float
    b: float
    dim: int
    window: WindowSpec = field(default=GAUSSIAN)

    def __post_init__(self) -> None:
        mx, mxi = len(self.x_axis) ** self.dim, len(self.xi_axis) ** self.dim
        if self.values.shape != (mx, mxi):
            raise ValueError(f"values shape {self.values.shape} does not match lattice ({mx}, {mxi})")
        if not (self.a > 0 and self.b > 0):
            raise ValueError("lattice steps must be positive")

    def xi_radius2(self) -> np.ndarray:
        ax = self.xi_axis**2
        if self.dim == 1:
            return ax
        return (ax[:, None] + ax[None, :]).ravel()

    def at(self, x, xi) -> complex:
        """Value at the lattice point nearest to ``(x, xi)`` (d = 1)."""
        i = int(np.argmin(np.abs(self.x_axis - x)))
        k = int(np.argmin(np.abs(self.xi_axis - xi)))
        return complex(self.values[i, k])


def stft(f: SampledSignal, w: WindowSpec = GAUSSIAN, a: float | None = None, b: float | None = None) -> StftMatrix:
    """Materialize ``V_g f`` on the lattice with steps ``a``, ``b`` (default: full grid)."""
    lat = make_lattice(f.grid, w, a, b)
    rows = [V for _, V in _blocks(f, w, lat, with_phase=True)]
    values = np.concatenate(rows, axis=0)
    return StftMatrix(values, lat.x_axis(), lat.xi_axis(), lat.a, lat.b, f.grid.dim, w)


class _ModulationAccumulator:
    """Running inner (over x) reductions for several ``SpaceParams`` at once."""

    def __init__(self, params: Sequence[SpaceParams], xi_r2: np.ndarray, cell_x: float, cell_xi: float):
        self.params = list(params)
        self.cell_x, self.cell_xi = cell_x, cell_xi
        self.r2 = xi_r2
        self.powers = sorted({p.p for p in self.params if p.p is not INF})
        self.sums = {p: np.zeros_like(xi_r2) for p in self.powers}
        self.sup = np.zeros_like(xi_r2) if any(p.p is INF for p in self.params) else None

    def add(self, absV: np.ndarray) -> None:
        for p in self.powers:
            if p == 1.0:
                self.sums[p] += absV.sum(axis=0)
            elif p == 2.0:
                self.sums[p] += (absV * absV).sum(axis=0)
            else:
                self.sums[p] += (absV**p).sum(axis=0)
        if self.sup is not None:
            np.maximum(self.sup, absV.max(axis=0), out=self.sup)

    def result(self) -> list[float]:
        out = []
        for sp in self.params:
            wt = bracket(self.r2, sp.delta)
            if sp.p is INF:
                inner = self.sup * wt
            else:
                inner = (self.sums[sp.p] * self.cell_x) ** (1.0 / sp.p) * wt
            out.append(_outer(inner, sp.q, self.cell_xi))
        return out


def _outer(inner: np.ndarray, q: float | Inf, cell: float) -> float:
    if q is INF:
        return float(inner.max())
    if q == 1.0:
        return float(inner.sum() * cell)
    m = inner.max()
    if m == 0:
        return 0.0
    return float(m * (np.sum((inner / m) ** q) * cell) ** (1.0 / q))


def mixed_norm(V: StftMatrix, params: SpaceParams) -> float:
    """Weighted mixed norm with the x-integral inside and the weight ``<xi>^(delta p)`` on it."""
    if V.values.size == 0:
        raise ValueError("empty STFT matrix")
    acc = _ModulationAccumulator([params], V.xi_radius2(), V.a**V.dim, V.b**V.dim)
    acc.add(np.abs(V.values))
    return acc.result()[0]


def modulation_norms(
    f: SampledSignal,
    w: WindowSpec,
    params: Sequence[SpaceParams],
    lattice: Lattice | None = None,
) -> list[float]:
    """``||f||`` in several ``M^{p,q}_delta`` spaces from one streamed STFT pass."""
    lat = lattice or make_lattice(f.grid, w)
    if not lat.grid.matches(f.grid):
        raise ValueError("lattice belongs to a different grid")
    d = f.grid.dim
    acc = _ModulationAccumulator(params, lat.xi_radius2(), lat.a**d, lat.b**d)
    for _, V in _blocks(f, w, lat, with_phase=False):
        acc.add(np.abs(V))
    return acc.result()


def modulation_norm(
    f: SampledSignal,
    w: WindowSpec = GAUSSIAN,
    params: SpaceParams = SpaceParams(2, 2),
    lattice: Lattice | None = None,
) -> float:
    """``||V_g f||`` in ``L^{p,q}`` with weight ``<xi>^delta``; full-resolution lattice by default."""
    return modulation_norms(f, w, [params], lattice)[0]


def amalgam_norm(
    f: SampledSignal,
    w: WindowSpec = GAUSSIAN,
    p: float | Inf | str = 1,
    q: float | Inf | str = INF,
    lattice: Lattice | None = None,
) -> float:
    """Wiener amalgam norm ``|| x -> ||(f T_x g)^||_{L^p} ||_{L^q}``.

    ``f`` may live on either side; only its sample spacing matters.
    """
    p, q = parse_exponent(p), parse_exponent(q)
    # FT of f * T_x g is V_{conj g} f; the windows here are real.
    lat = lattice or make_lattice(f.grid, w)
    d = f.grid.dim
    cell_x, cell_xi = lat.a**d, lat.b**d
    inner = []
    for _, V in _blocks(f, w, lat, with_phase=False):
        A = np.abs(V)
        if p is INF:
            inner.append(A.max(axis=1))
        elif p == 1.0:
            inner.append(A.sum(axis=1) * cell_xi)
        else:
            inner.append((np.sum(A**p, axis=1) * cell_xi) ** (1.0 / p))
    return _outer(np.concatenate(inner), q, cell_x)


# --- uniform frequency partition -------------------------------------------------

def _bump(t: np.ndarray) -> np.ndarray:
    """C^2 bump ``(1 - t^2)^3`` on ``|t| < 1``."""
    u = np.clip(1.0 - t * t, 0.0, None)
    return u * u * u


def partition_profile(t: np.ndarray) -> np.ndarray:
    """1-D partition function with ``sum_m phi(t - m) = 1`` identically."""
    t = np.asarray(t, dtype=float)
    frac = t - np.floor(t)
    return _bump(t) / (_bump(frac) + _bump(frac - 1.0))


def partition_piece(grid: GridSpec, m: Sequence[int]) -> np.ndarray:
    """``phi(xi - m)`` tabulated on a frequency grid."""
    coords = grid.coords()
    out = np.ones(grid.shape)
    for k, c in enumerate(coords):
        out = out * partition_profile(c - m[k])
    return out


def partition_centers(grid: GridSpec) -> list[tuple[int, ...]]:
    ax = grid.axis
    lo, hi = int(math.floor(ax[0])) - 1, int(math.ceil(ax[-1])) + 1
    rng = range(lo, hi + 1)
    if grid.dim == 1:
        return [(m,) for m in rng]
    return [(m0, m1) for m0 in rng for m1 in rng]


def block_modulation_norm(f: SampledSignal, p, q) -> float:
    """``( sum_m ||phi(D - m) f||_{L^p}^q )^(1/q)`` over the uniform partition."""
    p, q = parse_exponent(p), parse_exponent(q)
    F = forward_ft(f)
    pp = math.inf if p is INF else p
    norms = []
    for m in partition_centers(F.grid):
        piece = partition_piece(F.grid, m)
        if not np.any(piece):
            continue
        norms.append(inverse_ft(F.with_samples(F.samples * piece)).lp_norm(pp))
    return _outer(np.asarray(norms), q, 1.0)
