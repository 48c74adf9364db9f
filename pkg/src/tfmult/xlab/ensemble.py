"""Test-function ensembles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tfmult.errors import GuardError
from tfmult.grid import GeneratorSpec, GridSpec, SampledSignal, check_fits, make_grid, synthesize


@dataclass(frozen=True)
class EnsembleSpec:
    members: tuple[GeneratorSpec, ...]
    grid: GridSpec
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))
        if len(self.members) < 5:
            raise ValueError("an ensemble needs at least 5 members")
        labels = [m.label for m in self.members]
        if len(set(labels)) != len(labels):
            raise ValueError(f"member labels must be unique: {labels}")

    @property
    def labels(self) -> list[str]:
        return [m.label for m in self.members]


def max_shell(grid: GridSpec) -> int:
    """Largest wave-packet shell index that fits the grid."""
    k = 0
    while True:
        try:
            check_fits(GeneratorSpec("wave_packet", shell=k + 1), grid)
        except GuardError:
            return k
        k += 1


def default_members(d: int, seed: int, shells: range) -> tuple[GeneratorSpec, ...]:
    """Gaussian, chirp, smoothed box, two seeded modulated gaussians,
    the band-limited window and wave packets for the given shells."""
    rng = np.random.default_rng(seed)
    zeros = (0.0,) * d
    out = [
        GeneratorSpec("gaussian", zeros, zeros),
        GeneratorSpec("chirp", zeros, zeros, chirp=1.0),
        GeneratorSpec("smoothed_box", zeros, zeros, width=1.0, smoothing=0.5),
    ]
    for i in range(2):
        # centers on the 1/2 lattice (on-grid for every power-of-two spacing <= 1/2)
        x0 = tuple(float(v) for v in rng.integers(-6, 7, d) / 2)
        xi0 = tuple(float(v) for v in rng.integers(-10, 11, d) / 4)
        out.append(GeneratorSpec("gaussian", x0, xi0, width=float(rng.uniform(0.7, 1.5)),
                                 name=f"modulated_gaussian_{i + 1}"))
    out.append(GeneratorSpec("band_limited_window", zeros, zeros))
    out.extend(GeneratorSpec("wave_packet", zeros, zeros, shell=k) for k in shells)
    return tuple(out)


def default_ensemble_spec(d: int = 1, n: int = 1024, extent: float = 64.0, seed: int = 0,
                          max_k: int | None = None) -> EnsembleSpec:
    grid = make_grid(d, n, extent)
    top = max_shell(grid) if max_k is None else max_k
    return EnsembleSpec(default_members(d, seed, range(1, top + 1)), grid, seed)


def build_ensemble(spec: EnsembleSpec) -> list[SampledSignal]:
    out = []
    for m in spec.members:
        try:
            out.append(synthesize(m, spec.grid))
        except GuardError as exc:
            raise type(exc)(f"ensemble member {m.label!r}: {exc}") from exc
    return out
