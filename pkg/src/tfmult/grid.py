"""Uniform grids, the centered Fourier transform, and test-signal generators.

The Fourier transform is normalized as ``f^(xi) = int f(t) exp(-2 pi i t xi) dt``
and discretized by a Riemann sum on a grid centered at the origin on both
sides: physical samples sit at ``(k - n/2) dx`` and frequency samples at
``(m - n/2) dxi`` with ``dxi = 1 / L``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.fft
from scipy import integrate, special

from tfmult.errors import CoverageError, NyquistError

PHYSICAL = "physical"
FREQUENCY = "frequency"

GENERATOR_KINDS = ("gaussian", "chirp", "smoothed_box", "wave_packet", "band_limited_window")

# Relative amplitude 1e-12 for exp(-pi s^2): s ~ 2.97.  Used for support estimates.
_TAIL_FACTOR = 3.0
# Envelope width of the band-limited window: energy of its spectrum outside
# |xi| >= 1/2 is ~1e-12 in d = 1 and ~1e-11 in d = 2.
BAND_LIMITED_WIDTH = 4.0
# sqrt(2 pi) * width * margin >= 4.5 keeps the energy outside a dyadic shell below 1e-10.
_SHELL_Z = 4.5


def fft_workers() -> int:
    """Worker count for scipy.fft, capped by ``TFMULT_THREADS``."""
    env = os.environ.get("TFMULT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def centered_fft(a: np.ndarray, axes: Sequence[int], inverse: bool = False) -> np.ndarray:
    """Unnormalized DFT with index 0 of each axis at its midpoint."""
    a = scipy.fft.ifftshift(a, axes=axes)
    if inverse:
        a = scipy.fft.ifftn(a, axes=axes, norm="forward", workers=fft_workers())
    else:
        a = scipy.fft.fftn(a, axes=axes, workers=fft_workers())
    return scipy.fft.fftshift(a, axes=axes)


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor grid covering ``[-L/2, L/2)`` per axis.

    Parameters
    ----------
    dim
        Dimension d, 1 or 2.
    n
        Samples per axis, a power of two >= 16.
    extent
        Side length L of the covered box.
    side
        ``"physical"`` or ``"frequency"``.  The dual of a grid with
        ``(n, L)`` has extent ``n / L`` and the opposite side.
    """

    dim: int
    n: int
    extent: float
    side: str = PHYSICAL

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.n < 16 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 16, got {self.n}")
        if not (self.extent > 0 and math.isfinite(self.extent)):
            raise ValueError(f"extent must be positive and finite, got {self.extent}")
        if self.side not in (PHYSICAL, FREQUENCY):
            raise ValueError(f"side must be 'physical' or 'frequency', got {self.side!r}")

    @property
    def spacing(self) -> float:
        return self.extent / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def nyquist(self) -> float:
        """Largest |frequency| representable by samples on this grid."""
        return 0.5 / self.spacing

    @property
    def cell(self) -> float:
        """Riemann weight ``spacing ** dim``."""
        return self.spacing**self.dim

    @property
    def axis(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.spacing

    def coords(self) -> tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays, one per axis."""
        ax = self.axis
        if self.dim == 1:
            return (ax,)
        return (ax[:, None], ax[None, :])

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c**2 for c in self.coords()))

    def dual(self) -> GridSpec:
        other = FREQUENCY if self.side == PHYSICAL else PHYSICAL
        return GridSpec(self.dim, self.n, self.n / self.extent, other)

    def refine(self, times: int = 1) -> GridSpec:
        """Double both n and L ``times`` times (keeps dx, halves dxi)."""
        f = 2**times
        return GridSpec(self.dim, self.n * f, self.extent * f, self.side)

    def matches(self, other: GridSpec) -> bool:
        return (
            self.dim == other.dim
            and self.n == other.n
            and self.side == other.side
            and math.isclose(self.extent, other.extent, rel_tol=1e-12)
        )


def make_grid(d: int, n: int, extent: float, side: str = PHYSICAL) -> GridSpec:
    return GridSpec(d, n, float(extent), side)


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Complex samples of a function on a :class:`GridSpec` (shape ``(n,)*d``)."""

    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self) -> None:
        s = np.array(self.samples, dtype=np.complex128)
        if s.shape != self.grid.shape:
            if s.size == self.grid.size:
                s = s.reshape(self.grid.shape)
            else:
                raise ValueError(f"expected {self.grid.size} samples, got {s.size}")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def l2_norm(self) -> float:
        return math.sqrt(self.grid.cell * float(np.sum(np.abs(self.samples) ** 2)))

    def lp_norm(self, p: float) -> float:
        a = np.abs(self.samples)
        if math.isinf(p):
            return float(a.max())
        return float((self.grid.cell * np.sum(a**p)) ** (1.0 / p))

    def with_samples(self, samples: np.ndarray) -> SampledSignal:
        return SampledSignal(self.grid, samples)

    def __add__(self, other: SampledSignal) -> SampledSignal:
        if not self.grid.matches(other.grid):
            raise ValueError("grid mismatch")
        return SampledSignal(self.grid, self.samples + other.samples)

    def scale(self, c: complex) -> SampledSignal:
        return SampledSignal(self.grid, c * self.samples)


def forward_ft(f: SampledSignal) -> SampledSignal:
    """Riemann-sum Fourier transform onto the dual (frequency) grid."""
    if f.grid.side != PHYSICAL:
        raise ValueError("forward_ft expects a physical-side signal")
    axes = tuple(range(f.grid.dim))
    F = centered_fft(f.samples, axes) * f.grid.cell
    return SampledSignal(f.grid.dual(), F)


def inverse_ft(F: SampledSignal) -> SampledSignal:
    """Riemann-sum inverse Fourier transform back to the physical grid."""
    if F.grid.side != FREQUENCY:
        raise ValueError("inverse_ft expects a frequency-side signal")
    axes = tuple(range(F.grid.dim))
    f = centered_fft(F.samples, axes, inverse=True) * F.grid.cell
    return SampledSignal(F.grid.dual(), f)


def _as_vector(v: float | Sequence[float], d: int) -> np.ndarray:
    a = np.atleast_1d(np.asarray(v, dtype=float))
    if a.size == 1:
        a = np.repeat(a, d)
    if a.size != d:
        raise ValueError(f"expected a {d}-vector, got {v!r}")
    return a


def _on_grid_shift(x0: np.ndarray, grid: GridSpec) -> tuple[int, ...]:
    k = x0 / grid.spacing
    kr = np.rint(k)
    if np.any(np.abs(k - kr) > 1e-9 * np.maximum(1.0, np.abs(k))):
        raise ValueError(f"shift {x0.tolist()} is not a multiple of the grid spacing {grid.spacing}")
    return tuple(int(v) for v in kr)


def translate_modulate(f: SampledSignal, x0, xi0) -> SampledSignal:
    """Return ``M_xi0 T_x0 f``: samples ``exp(2 pi i xi0.t) f(t - x0)``, circular in t."""
    d = f.grid.dim
    x0 = _as_vector(x0, d)
    xi0 = _as_vector(xi0, d)
    shift = _on_grid_shift(x0, f.grid)
    out = np.roll(f.samples, shift, axis=tuple(range(d)))
    phase = sum(xi0[i] * c for i, c in enumerate(f.grid.coords()))
    return SampledSignal(f.grid, out * np.exp(2j * np.pi * phase))


@dataclass(frozen=True)
class GeneratorSpec:
    """Closed-form test function.

    ``width`` is the gaussian envelope width (``exp(-pi |t|^2 / width^2)``) or the
    half-width of a smoothed box.  ``chirp`` is the rate c of ``exp(pi i c |t|^2)``.
    For ``wave_packet`` the envelope width and carrier follow from ``shell`` so
    that the spectrum sits inside ``2^(k-1) <= |xi| <= 2^(k+1)``.
    """

    kind: str
    x0: tuple[float, ...] = (0.0,)
    xi0: tuple[float, ...] = (0.0,)
    width: float = 1.0
    chirp: float = 0.0
    shell: int = 0
    smoothing: float = 0.5
    name: str = ""

    def __post_init__(self) -> None:
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if not self.width > 0:
            raise ValueError("width must be positive")
        if self.kind == "wave_packet" and self.shell < 0:
            raise ValueError("shell index must be >= 0")
        object.__setattr__(self, "x0", tuple(float(v) for v in np.atleast_1d(self.x0)))
        object.__setattr__(self, "xi0", tuple(float(v) for v in np.atleast_1d(self.xi0)))

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind == "wave_packet":
            return f"wave_packet_k{self.shell}"
        return self.kind

    def envelope_width(self) -> float:
        if self.kind == "wave_packet":
            return _SHELL_Z / (math.sqrt(2 * math.pi) * 2.0 ** (self.shell - 1))
        if self.kind == "band_limited_window":
            return BAND_LIMITED_WIDTH
        return self.width

    def carrier(self, d: int) -> np.ndarray:
        if self.kind == "wave_packet":
            c = np.zeros(d)
            c[0] = 2.0**self.shell
            return c
        return _as_vector(self.xi0, d)

    def center(self, d: int) -> np.ndarray:
        return _as_vector(self.x0, d)

    def bandwidth(self) -> float:
        """Half-width of the spectrum around the carrier (amplitude ~1e-12)."""
        w = self.envelope_width()
        if self.kind == "chirp":
            return _TAIL_FACTOR * math.sqrt(1.0 / w**2 + self.chirp**2 * w**2)
        if self.kind == "smoothed_box":
            return _TAIL_FACTOR / self.smoothing
        return _TAIL_FACTOR / w

    def spatial_radius(self) -> float:
        """Half-width of the physical support around the center (amplitude ~1e-12)."""
        if self.kind == "smoothed_box":
            return self.width + _TAIL_FACTOR * self.smoothing
        return _TAIL_FACTOR * self.envelope_width()


_BOX_NORM_CACHE: dict[tuple[float, float], float] = {}


def _box_profile(u: np.ndarray, h: float, s: float) -> np.ndarray:
    r = math.sqrt(math.pi) / s
    return 0.5 * (special.erf(r * (u + h)) - special.erf(r * (u - h)))


def _box_norm_1d(h: float, s: float) -> float:
    key = (h, s)
    if key not in _BOX_NORM_CACHE:
        lim = h + 8 * s
        val, _ = integrate.quad(lambda u: _box_profile(np.asarray(u), h, s) ** 2, -lim, lim,
                                epsabs=1e-14, epsrel=1e-13, limit=200)
        _BOX_NORM_CACHE[key] = math.sqrt(val)
    return _BOX_NORM_CACHE[key]


def evaluate(spec: GeneratorSpec, coords: Sequence[np.ndarray]) -> np.ndarray:
    """Evaluate the closed-form generator at arbitrary points.

    ``coords`` holds one broadcastable array per axis.  Every generator has
    unit L^2 norm.
    """
    d = len(coords)
    x0 = spec.center(d)
    xi0 = spec.carrier(d)
    u = [np.asarray(c, dtype=float) - x0[i] for i, c in enumerate(coords)]
    r2 = sum(ui**2 for ui in u)
    if spec.kind == "smoothed_box":
        h, s = spec.width, spec.smoothing
        env = np.ones(np.broadcast_shapes(*[ui.shape for ui in u]))
        for ui in u:
            env = env * _box_profile(ui, h, s)
        env = env / _box_norm_1d(h, s) ** d
    else:
        w = spec.envelope_width()
        env = 2.0 ** (d / 4) * w ** (-d / 2) * np.exp(-np.pi * r2 / w**2)
        if spec.kind == "chirp":
            env = env * np.exp(1j * np.pi * spec.chirp * r2)
    carrier = sum(xi0[i] * np.asarray(c, dtype=float) for i, c in enumerate(coords))
    return env * np.exp(2j * np.pi * carrier)


def check_fits(spec: GeneratorSpec, grid: GridSpec, scale: float = 1.0) -> None:
    """Raise if ``U_scale`` of ``spec`` is not representable on ``grid``."""
    d = grid.dim
    lam = abs(scale)
    top = (np.max(np.abs(spec.carrier(d))) + spec.bandwidth()) * lam
    if top > grid.nyquist * (1 + 1e-12):
        raise NyquistError(
            f"{spec.label}: frequency {top:.6g} exceeds grid Nyquist {grid.nyquist:.6g}"
        )
    reach = (np.max(np.abs(spec.center(d))) + spec.spatial_radius()) / lam
    if reach > grid.extent / 2 * (1 + 1e-12):
        raise CoverageError(
            f"{spec.label}: support radius {reach:.6g} exceeds grid half-extent {grid.extent / 2:.6g}"
        )


def synthesize(spec: GeneratorSpec, grid: GridSpec) -> SampledSignal:
    """Sample a generator on a physical grid after checking Nyquist and coverage."""
    return dilate(spec, 1.0, grid)


def dilate(spec: GeneratorSpec, lam: float, grid: GridSpec) -> SampledSignal:
    """Sample ``U_lam f(t) = f(lam t)`` exactly from the closed form."""
    if lam == 0:
        raise ValueError("dilation factor must be nonzero")
    if grid.side != PHYSICAL:
        raise ValueError("generators are sampled on physical grids")
    check_fits(spec, grid, lam)
    coords = tuple(lam * c for c in grid.coords())
    return SampledSignal(grid, evaluate(spec, coords))


def sample_function(fn: Callable[..., np.ndarray], grid: GridSpec) -> SampledSignal:
    """Sample an arbitrary callable ``fn(*coords)`` on ``grid``."""
    vals = np.broadcast_to(np.asarray(fn(*grid.coords()), dtype=np.complex128), grid.shape)
    return SampledSignal(grid, np.array(vals))


def interpolate_at(f: SampledSignal, points: Sequence[np.ndarray], chunk: int = 512) -> np.ndarray:
    """Trigonometric interpolation of a band-limited sampled signal at arbitrary points.

    Evaluates ``sum_m F(xi_m) exp(2 pi i xi_m y) dxi`` directly, which is exact for
    signals whose spectrum is resolved on the grid.  d = 1 only.
    """
    if f.grid.dim != 1:
        raise ValueError("interpolate_at supports d = 1")
    F = forward_ft(f)
    xi = F.grid.axis
    y = np.asarray(points[0], dtype=float).ravel()
    out = np.empty(y.size, dtype=np.complex128)
    for s in range(0, y.size, chunk):
        ys = y[s:s + chunk]
        out[s:s + chunk] = np.exp(2j * np.pi * np.outer(ys, xi)) @ F.samples * F.grid.spacing
    return out.reshape(np.shape(points[0]))


def resample_dilate(f: SampledSignal, lam: float) -> SampledSignal:
    """Array-level ``U_lam`` via band-limited interpolation, with a Nyquist guard.

    Only for signals without a closed form.  The dilated spectrum
    ``|lam| * (max resolved frequency)`` must stay inside the grid.
    """
    if lam == 0:
        raise ValueError("dilation factor must be nonzero")
    F = np.abs(forward_ft(f).samples)
    xi = np.abs(f.grid.dual().axis)
    significant = xi[F > 1e-12 * F.max()] if F.max() > 0 else np.array([0.0])
    top = float(significant.max()) * abs(lam)
    if top > f.grid.nyquist:
        raise NyquistError(f"dilated frequency {top:.6g} exceeds grid Nyquist {f.grid.nyquist:.6g}")
    pts = tuple(lam * c for c in f.grid.coords())
    return SampledSignal(f.grid, interpolate_at(f, pts))
