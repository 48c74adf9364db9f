import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from tfmult.gabor import (
    GAUSSIAN,
    INF,
    SpaceParams,
    WindowSpec,
    amalgam_norm,
    auto_lattice,
    block_modulation_norm,
    make_lattice,
    mixed_norm,
    modulation_norm,
    modulation_norms,
    parse_exponent,
    partition_centers,
    partition_piece,
    partition_profile,
    stft,
    weight_eval,
)
from tfmult.grid import GeneratorSpec, SampledSignal, forward_ft, make_grid, synthesize, translate_modulate
from tfmult.xlab.ensemble import build_ensemble, default_ensemble_spec

from calibration import BLOCK_C, WINDOW_C, PRODUCT_C

SMALL = make_grid(1, 256, 32)


@pytest.fixture(scope="module")
def gauss(grid1):
    return synthesize(GeneratorSpec("gaussian"), grid1)


def closed_form(p, q):
    def part(r):
        return 1.0 if r is INF else (2 / r) ** (1 / (2 * r))
    return part(parse_exponent(p)) * part(parse_exponent(q))


def test_parse_exponent():
    assert parse_exponent("inf") is INF
    assert parse_exponent(INF) is INF
    assert parse_exponent("2") == 2.0
    for bad in (0.5, float("inf"), "x"):
        with pytest.raises(ValueError):
            parse_exponent(bad)


def test_space_params_validation():
    with pytest.raises(ValueError):
        SpaceParams(1, 1, float("nan"))
    assert SpaceParams("inf", 1).p is INF


def test_weight_eval():
    assert weight_eval(0.0, 3.7) == 1
    assert weight_eval(5.0, 0.0) == 1
    assert weight_eval(math.sqrt(3), 2) == pytest.approx(4)
    assert weight_eval((1.0, 1.0), 2) == pytest.approx(3)


def test_window_specs():
    bl = WindowSpec("band_limited")
    assert bl.spectral_tail(1) <= 1e-10 and bl.spectral_tail(2) <= 1e-10
    g = make_grid(1, 1024, 64)
    F = forward_ft(bl.sample(g))
    mass = np.abs(F.samples) ** 2
    assert mass[np.abs(F.grid.axis) >= 0.5].sum() <= 1e-10 * mass.sum()
    with pytest.raises(ValueError):
        WindowSpec("band_limited", width=1.0)
    with pytest.raises(ValueError):
        WindowSpec("hann")


def test_stft_origin_is_inner_product(gauss):
    f = synthesize(GeneratorSpec("gaussian", (0.5,), (0.25,), width=1.3), gauss.grid)
    V = stft(f, GAUSSIAN, a=0.25, b=1 / 16)
    ip = gauss.grid.cell * np.sum(f.samples * np.conj(gauss.samples))
    assert abs(V.at(0, 0) - ip) < 1e-12


def test_stft_gaussian_pair(gauss):
    V = stft(gauss, GAUSSIAN, a=0.125, b=0.125)
    X, XI = np.meshgrid(V.x_axis, V.xi_axis, indexing="ij")
    assert np.max(np.abs(np.abs(V.values) - np.exp(-np.pi * (X**2 + XI**2) / 2))) <= 1e-6


def test_stft_quadrature_oracle(gauss):
    V = stft(gauss, GAUSSIAN, a=0.5, b=0.125)
    g = lambda t: 2**0.25 * math.exp(-math.pi * t * t)
    for x, xi in [(0.5, 0.0), (1.0, -0.5), (-1.5, 1.0)]:
        re = integrate.quad(lambda t: g(t) * g(t - x) * math.cos(2 * math.pi * xi * t), -12, 12)[0]
        im = integrate.quad(lambda t: -g(t) * g(t - x) * math.sin(2 * math.pi * xi * t), -12, 12)[0]
        assert abs(V.at(x, xi) - complex(re, im)) < 1e-10


def test_stft_covariance(gauss):
    f = synthesize(GeneratorSpec("gaussian", width=1.4, xi0=(0.5,)), gauss.grid)
    x0, xi0 = 1.0, 0.5
    V = stft(f, GAUSSIAN, a=0.25, b=0.125)
    W = stft(translate_modulate(f, x0, xi0), GAUSSIAN, a=0.25, b=0.125)
    for x, xi in [(0.0, 0.0), (1.5, 0.75), (-2.0, 1.0)]:
        assert abs(abs(W.at(x, xi)) - abs(V.at(x - x0, xi - xi0))) < 1e-8


def test_stft_lattice_errors(gauss):
    with pytest.raises(ValueError):
        stft(gauss, GAUSSIAN, a=128.0)
    with pytest.raises(ValueError):
        stft(gauss, GAUSSIAN, a=0.1)
    with pytest.raises(ValueError):
        stft(gauss, GAUSSIAN, b=1000.0)


def test_mixed_norm_gaussian_pair(gauss):
    V = stft(gauss, GAUSSIAN, a=0.0625, b=1 / 16)
    assert abs(mixed_norm(V, SpaceParams(2, 2)) - 1) < 1e-6
    assert abs(mixed_norm(V, SpaceParams(INF, INF)) - 1) < 1e-12
    assert abs(mixed_norm(V, SpaceParams(1, 1)) - 2) < 1e-4


@pytest.mark.parametrize("p,q", [(1, 1), (2, 2), (INF, INF), (1, INF), (INF, 1)])
def test_gaussian_closed_forms(gauss, p, q):
    assert abs(modulation_norm(gauss, GAUSSIAN, SpaceParams(p, q)) - closed_form(p, q)) < 1e-3


def test_moyal_whole_ensemble():
    spec = default_ensemble_spec()
    for f in build_ensemble(spec):
        m = modulation_norm(f)
        assert abs(m**2 / f.l2_norm() ** 2 - 1) < 1e-6


def test_weight_monotone(gauss):
    f = synthesize(GeneratorSpec("gaussian", xi0=(2.0,)), gauss.grid)
    vals = modulation_norms(f, GAUSSIAN, [SpaceParams(1, 2, d) for d in (-1.0, 0.0, 0.5, 2.0)])
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_large_p_limit(gauss):
    f = synthesize(GeneratorSpec("chirp", chirp=0.5), gauss.grid)
    V = stft(f, GAUSSIAN, a=0.125, b=0.125)
    top = mixed_norm(V, SpaceParams(INF, INF))
    gaps = [abs(mixed_norm(V, SpaceParams(p, p)) - top) for p in (8, 16, 32, 64)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_full_and_coarse_lattice_agree():
    f = synthesize(GeneratorSpec("gaussian", (1.0,), (0.75,), width=1.2), make_grid(1, 1024, 64))
    for sp in (SpaceParams(1, 1), SpaceParams(2, 2), SpaceParams(INF, 1)):
        full = modulation_norm(f, GAUSSIAN, sp)
        coarse = modulation_norm(f, GAUSSIAN, sp, auto_lattice(f.grid, GAUSSIAN, 0.125))
        assert abs(coarse / full - 1) < 1e-6


def test_lattice_grid_mismatch(gauss):
    lat = make_lattice(SMALL, GAUSSIAN)
    with pytest.raises(ValueError):
        modulation_norms(gauss, GAUSSIAN, [SpaceParams(2, 2)], lat)


def test_partition_of_unity():
    g = make_grid(1, 1024, 64).dual()
    total = sum(partition_piece(g, m) for m in partition_centers(g))
    assert np.max(np.abs(total - 1)) < 1e-12


@given(st.floats(-50, 50, allow_nan=False))
def test_partition_profile_sums_to_one(t):
    ms = np.arange(math.floor(t) - 2, math.floor(t) + 3)
    assert abs(partition_profile(t - ms).sum() - 1) < 1e-12


def test_block_norm_gaussian_oracle(gauss):
    ghat2 = lambda x: math.sqrt(2) * math.exp(-2 * math.pi * x * x)
    total = 0.0
    for m in range(-6, 7):
        total += integrate.quad(lambda x: partition_profile(np.array(x - m)) ** 2 * ghat2(x), m - 1, m + 1,
                                epsabs=1e-14, epsrel=1e-13)[0]
    assert abs(block_modulation_norm(gauss, 2, 2) - math.sqrt(total)) < 1e-6


@pytest.mark.parametrize("pq", [(1, 1), (2, 2), (INF, 1)], ids=str)
def test_block_equivalence_frozen(pq):
    from tfmult.xlab.calibration import measure_block_constant
    key = f"{pq[0]},{pq[1]}"
    assert measure_block_constant(*pq)["C"] <= BLOCK_C[key]


@pytest.mark.parametrize("pq", [(1, 1), (2, 2), (INF, 1)], ids=str)
def test_window_robustness_frozen(pq):
    from tfmult.xlab.calibration import measure_window_constant
    key = f"{pq[0]},{pq[1]}"
    assert measure_window_constant(*pq)["C"] <= WINDOW_C[key]


def test_amalgam_examples(gauss):
    zero = SampledSignal(gauss.grid, np.zeros(gauss.grid.n))
    assert amalgam_norm(zero) == 0
    # |(g T_x g)^(xi)| = exp(-pi (x^2 + xi^2) / 2), so the W(FL^1, L^inf) norm is sqrt(2)
    assert abs(amalgam_norm(gauss, GAUSSIAN, 1, INF) - math.sqrt(2)) < 1e-9


def test_amalgam_fourier_isomorphism():
    from tfmult.xlab.calibration import measure_amalgam_fourier
    a, b = measure_amalgam_fourier(0), measure_amalgam_fourier(1)
    for k in a:
        assert abs(a[k] / b[k] - 1) <= 0.02


@pytest.mark.parametrize("pq", [(1, 1), (2, 2), (1, INF)], ids=str)
def test_product_estimate_frozen(pq):
    from tfmult.xlab.calibration import measure_product_constant
    res = measure_product_constant(*pq, pairs=20, seed=0)
    assert res["C"] <= PRODUCT_C[f"{pq[0]},{pq[1]}"]


def test_2d_moyal_and_closed_form():
    g = make_grid(2, 128, 16)
    f = GAUSSIAN.sample(g)
    lat = auto_lattice(g, GAUSSIAN, 0.25)
    n22, n11 = modulation_norms(f, GAUSSIAN, [SpaceParams(2, 2), SpaceParams(1, 1)], lat)
    assert abs(n22 - 1) < 1e-6
    assert abs(n11 - 4) < 1e-3
