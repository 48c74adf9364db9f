"""Littlewood-Paley family and the rescaled dyadic factors.

``psi0`` is a radial C^4 cutoff equal to 1 on ``|xi| <= 1`` and 0 on ``|xi| >= 2``.
With ``psi = psi0 - psi0(2 .)`` and ``psi_j = psi(2^-j .)`` the sum of
``psi_0 .. psi_J`` telescopes to ``psi0(2^-J .)``.  Each shell piece factors after
the dilation ``lambda_j = 2^(-(alpha-2) j / 2)`` into a unimodular part ``A_j``
and a weighted cutoff ``B_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from tfmult.errors import CoverageError
from tfmult.grid import FREQUENCY, GridSpec
from tfmult.symbols import PhaseSpec, SymbolTable, phase_at

SMOOTHSTEP_ORDER = 4
_SMOOTH_COEF = tuple(
    comb(SMOOTHSTEP_ORDER + k, k) * comb(2 * SMOOTHSTEP_ORDER + 1, SMOOTHSTEP_ORDER - k) * (-1) ** k
    for k in range(SMOOTHSTEP_ORDER + 1)
)


def smoothstep(x: np.ndarray) -> np.ndarray:
    """C^4 smoothstep: 0 for ``x <= 0``, 1 for ``x >= 1``, degree-9 polynomial between."""
    x = np.asarray(x, dtype=float)
    u = np.clip(x, 0.0, 1.0)
    poly = sum(c * u**k for k, c in enumerate(_SMOOTH_COEF)) * u ** (SMOOTHSTEP_ORDER + 1)
    return np.where(x <= 0.0, 0.0, np.where(x >= 1.0, 1.0, poly))


def psi0(r: np.ndarray) -> np.ndarray:
    """Radial cutoff as a function of ``r = |xi|``."""
    return 1.0 - smoothstep(np.asarray(r, dtype=float) - 1.0)


def psi(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return psi0(r) - psi0(2.0 * r)


def psi_j(j: int, r: np.ndarray) -> np.ndarray:
    """``psi_0 = psi0`` and ``psi_j(xi) = psi0(2^-j xi) - psi0(2^(1-j) xi)`` for j >= 1."""
    r = np.asarray(r, dtype=float)
    if j == 0:
        return psi0(r)
    return psi0(r * 2.0**-j) - psi0(r * 2.0 ** (1 - j))


def chi(r: np.ndarray) -> np.ndarray:
    """Equal to 1 on ``1/2 <= r <= 2`` and supported in ``1/4 <= r <= 4``."""
    r = np.asarray(r, dtype=float)
    rise = smoothstep((r - 0.25) / 0.25)
    fall = 1.0 - smoothstep((r - 2.0) / 2.0)
    return np.where(r <= 2.0, rise, fall)


def chi_j(j: int, r: np.ndarray) -> np.ndarray:
    """Companion cutoff, equal to 1 on the support of ``psi_j``.

    For j = 0 this is ``psi0(r / 2)`` since ``psi_0`` reaches down to the origin.
    """
    r = np.asarray(r, dtype=float)
    if j == 0:
        return psi0(r / 2.0)
    return chi(r * 2.0**-j)


def lambda_scale(alpha: float, j: int) -> float:
    """``lambda_j = 2^(-(alpha - 2) j / 2)``."""
    if alpha < 2:
        raise ValueError("alpha must be >= 2")
    if j < 1:
        raise ValueError("j must be >= 1")
    return 2.0 ** (-(alpha - 2) * j / 2)


def _freq(grid: GridSpec) -> GridSpec:
    return grid if grid.side == FREQUENCY else grid.dual()


@dataclass(frozen=True, eq=False)
class DyadicDecomposition:
    """``psi_j`` and ``chi_j`` for ``j = 0..J`` tabulated on one frequency grid."""

    J: int
    grid: GridSpec
    psi: tuple[np.ndarray, ...]
    chi: tuple[np.ndarray, ...]

    def partial_sum(self) -> np.ndarray:
        return np.sum(self.psi, axis=0)

    def top_cutoff(self) -> np.ndarray:
        """``psi0(2^-J xi)``, what the family telescopes to."""
        return psi0(self.grid.radius() * 2.0**-self.J)


def lp_family(J: int, grid: GridSpec) -> DyadicDecomposition:
    g = _freq(grid)
    if J < 0:
        raise ValueError("J must be >= 0")
    half = g.extent / 2
    if 2.0 ** (J + 1) > half:
        raise CoverageError(f"J={J} needs |xi| up to {2.0 ** (J + 1):g}; grid reaches {half:g}")
    r = g.radius()
    ps = tuple(psi_j(j, r) for j in range(J + 1))
    cs = tuple(chi_j(j, r) for j in range(J + 1))
    for a in ps + cs:
        a.setflags(write=False)
    return DyadicDecomposition(J, g, ps, cs)


def _bracket(r: np.ndarray, s: float) -> np.ndarray:
    return (1.0 + r * r) ** (s / 2)


def dyadic_piece_symbol(j: int, phase: PhaseSpec, delta: float, dec: DyadicDecomposition) -> SymbolTable:
    """``sigma_j = exp(i mu) psi_j <xi>^(-delta)``."""
    if not 0 <= j <= dec.J:
        raise ValueError(f"j={j} outside 0..{dec.J}")
    g = dec.grid
    mu = np.broadcast_to(phase_at(phase, g.coords()), g.shape)
    vals = np.exp(1j * mu) * dec.psi[j] * _bracket(g.radius(), -delta)
    return SymbolTable(g, vals, {"phase": phase.describe(), "delta": delta, "j": j})


def required_half_extent(j: int, alpha: float) -> float:
    """Frequency half-extent needed for ``psi_j(lambda_j .)``: ``2^(j+1) / lambda_j``."""
    return 2.0 ** (j + 1) / lambda_scale(alpha, j)


def rescaled_factors(j: int, alpha: float, phase: PhaseSpec, delta: float,
                     grid: GridSpec) -> tuple[SymbolTable, SymbolTable]:
    """``A(xi) = exp(i chi_j(l xi) mu(l xi))`` and ``B(xi) = psi_j(l xi) <l xi>^(-delta)``, ``l = lambda_j``."""
    g = _freq(grid)
    lam = lambda_scale(alpha, j)
    need = required_half_extent(j, alpha)
    if g.extent / 2 < need:
        raise CoverageError(
            f"rescaled factors for j={j}, alpha={alpha} need frequency extent >= {2 * need:g}, "
            f"grid has {g.extent:g}"
        )
    coords = [lam * c for c in g.coords()]
    r = lam * g.radius()
    mu = np.broadcast_to(phase_at(phase, coords), g.shape)
    desc = {"phase": phase.describe(), "delta": delta, "j": j, "alpha": alpha, "lambda": lam}
    A = SymbolTable(g, np.exp(1j * chi_j(j, r) * mu), dict(desc, factor="A"))
    B = SymbolTable(g, psi_j(j, r) * _bracket(r, -delta), dict(desc, factor="B"))
    return A, B


def dilated_piece(j: int, alpha: float, phase: PhaseSpec, delta: float, grid: GridSpec) -> SymbolTable:
    """``sigma_j(lambda_j xi)`` evaluated directly from the closed forms."""
    g = _freq(grid)
    lam = lambda_scale(alpha, j)
    coords = [lam * c for c in g.coords()]
    r = lam * g.radius()
    mu = np.broadcast_to(phase_at(phase, coords), g.shape)
    return SymbolTable(g, np.exp(1j * mu) * psi_j(j, r) * _bracket(r, -delta), {"j": j, "lambda": lam})


def _radial_line(j: int, alpha: float, step: float) -> np.ndarray:
    top = 2.0 ** (j + 2) / lambda_scale(alpha, j)
    return np.arange(0.0, top + step, step)


def a_phase_curvature(j: int, alpha: float, phase: PhaseSpec, step: float = 1 / 16) -> float:
    """``sup |Phi''|`` for ``Phi(xi) = chi_j(l xi) mu(l xi)``, by second differences on a line.

    The line covers the support of ``chi_j(l .)`` with spacing ``step``; in d = 2
    the phases here are radial, so a ray suffices.
    """
    lam = lambda_scale(alpha, j)
    xi = _radial_line(j, alpha, step)
    ext = np.concatenate(([xi[0] - step], xi, [xi[-1] + step]))
    phi = chi_j(j, lam * np.abs(ext)) * phase_at(phase, (lam * ext,))
    d2 = (phi[2:] - 2 * phi[1:-1] + phi[:-2]) / step**2
    return float(np.max(np.abs(d2)))


def leibniz_surrogates(j: int, alpha: float, phase: PhaseSpec, step: float | None = None) -> dict[str, float]:
    """``lambda_j^2 sup`` of ``chi_j'' mu``, ``chi_j' mu'`` and ``chi_j mu''`` (d = 1 ray).

    Derivatives by central differences; each product should stay O(1) in j.
    """
    lam = lambda_scale(alpha, j)
    h = step if step is not None else 2.0**j / 256
    xi = np.arange(2.0 ** (j - 2), 2.0 ** (j + 2) + h, h)

    def d1(fn):
        return (fn(xi + h) - fn(xi - h)) / (2 * h)

    def d2(fn):
        return (fn(xi + h) - 2 * fn(xi) + fn(xi - h)) / h**2

    c = lambda x: chi_j(j, np.abs(x))
    m = lambda x: phase_at(phase, (x,))
    return {
        "chi2_mu": lam**2 * float(np.max(np.abs(d2(c) * m(xi)))),
        "chi1_mu1": lam**2 * float(np.max(np.abs(d1(c) * d1(m)))),
        "chi_mu2": lam**2 * float(np.max(np.abs(c(xi) * d2(m)))),
    }
