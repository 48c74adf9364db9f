import numpy as np
import pytest
from hypothesis import given, strategies as st

from tfmult.dyadic import (
    a_phase_curvature,
    chi,
    chi_j,
    dilated_piece,
    dyadic_piece_symbol,
    lambda_scale,
    leibniz_surrogates,
    lp_family,
    psi,
    psi0,
    psi_j,
    required_half_extent,
    rescaled_factors,
    smoothstep,
)
from tfmult.errors import CoverageError
from tfmult.grid import GeneratorSpec, dilate, forward_ft, interpolate_at, make_grid, synthesize
from tfmult.symbols import PhaseSpec, apply_multiplier, unimodular_symbol
from tfmult.xlab.experiments import exponent_regression

GRID = make_grid(1, 2048, 32)  # frequency half-extent 32
MU3 = PhaseSpec("power_abs", alpha=3)


@pytest.fixture(scope="module")
def dec():
    return lp_family(4, GRID)


def test_smoothstep_endpoints():
    x = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    assert np.array_equal(smoothstep(x)[[0, 1, 3, 4]], [0, 0, 1, 1])
    assert smoothstep(np.array([0.5]))[0] == pytest.approx(0.5)


@given(st.floats(0, 10, allow_nan=False))
def test_cutoff_supports(r):
    if r <= 1:
        assert psi0(r) == 1
    if r >= 2:
        assert psi0(r) == 0
    if r <= 0.5:
        assert psi(r) == 0
    if 0.5 <= r <= 2:
        assert chi(r) == 1
    if r <= 0.25 or r >= 4:
        assert chi(r) == 0


def test_telescoping(dec):
    assert np.max(np.abs(dec.partial_sum() - dec.top_cutoff())) <= 1e-12


def test_chi_covers_psi(dec):
    for p, c in zip(dec.psi, dec.chi):
        assert np.max(np.abs(c * p - p)) <= 1e-12


def test_psi3_mass():
    r = np.linspace(0, 40, 400001)
    v = psi_j(3, r) ** 2
    assert v[(r < 4) | (r > 16)].sum() <= 1e-12 * v.sum()


def test_lp_family_coverage():
    with pytest.raises(CoverageError):
        lp_family(5, GRID)


def test_lambda_scale():
    assert lambda_scale(2, 7) == 1
    assert lambda_scale(4, 3) == 1 / 8
    assert lambda_scale(3, 2) == 1 / 2
    with pytest.raises(ValueError):
        lambda_scale(1.5, 1)
    with pytest.raises(ValueError):
        lambda_scale(3, 0)


def test_piece_symbols(dec):
    delta = 0.7
    total = sum(dyadic_piece_symbol(j, MU3, delta, dec).values for j in range(dec.J + 1))
    ref = unimodular_symbol(MU3, delta, dec.grid).values * dec.top_cutoff()
    assert np.max(np.abs(total - ref)) <= 1e-10
    s0 = dyadic_piece_symbol(0, MU3, delta, dec)
    assert s0.sup <= 1
    with pytest.raises(ValueError):
        dyadic_piece_symbol(dec.J + 1, MU3, delta, dec)


@pytest.mark.parametrize("delta", [0.5, 1.0, 2.0])
def test_piece_sup_near_shell_edge(dec, delta):
    for j in range(1, dec.J + 1):
        sup = dyadic_piece_symbol(j, MU3, delta, dec).sup
        edge = (1 + 4.0 ** (j - 1)) ** (-delta / 2)
        assert edge / 4**delta <= sup <= edge * 4**delta


def test_operator_decomposition_and_localization(dec):
    f = synthesize(GeneratorSpec("wave_packet", shell=3), GRID)
    whole = unimodular_symbol(MU3, 0.3, dec.grid).values * dec.top_cutoff()
    from tfmult.symbols import symbol_from_values
    lhs = apply_multiplier(symbol_from_values(dec.grid, whole), f)
    parts = [apply_multiplier(dyadic_piece_symbol(j, MU3, 0.3, dec), f) for j in range(dec.J + 1)]
    assert np.max(np.abs(lhs.samples - sum(p.samples for p in parts))) <= 1e-10
    for j, p in enumerate(parts):
        F = np.abs(forward_ft(p).samples) ** 2
        if F.sum() == 0:
            continue
        r = np.abs(dec.grid.axis)
        lo = 0 if j == 0 else 2.0 ** (j - 1)
        assert F[(r < lo) | (r > 2.0 ** (j + 1))].sum() <= 1e-10 * F.sum()


def test_rescaled_alpha2_is_identity():
    g = make_grid(1, 2048, 32)
    A, B = rescaled_factors(3, 2.0, MU3, 0.0, g)
    assert np.array_equal(B.values.real, psi_j(3, np.abs(g.dual().axis)))
    direct = dilated_piece(3, 2.0, MU3, 0.0, g)
    assert np.max(np.abs((A * B).values - direct.values)) <= 1e-10


@pytest.mark.parametrize("j,alpha", [(1, 3), (2, 3), (3, 3), (2, 4), (3, 4)])
def test_product_identity(j, alpha):
    n = 1024
    while n / 16 / 2 < required_half_extent(j, alpha):
        n *= 2
    g = make_grid(1, n, 16)
    A, B = rescaled_factors(j, alpha, PhaseSpec("power_abs", alpha=alpha), 0.4, g)
    direct = dilated_piece(j, alpha, PhaseSpec("power_abs", alpha=alpha), 0.4, g)
    assert np.max(np.abs((A * B).values - direct.values)) <= 1e-10


def test_rescaled_coverage_error():
    with pytest.raises(CoverageError, match="extent"):
        rescaled_factors(4, 4, MU3, 0.0, make_grid(1, 256, 16))


@pytest.mark.parametrize("alpha", [3.0, 4.0])
def test_b_sup_decay(alpha):
    delta = (alpha - 2) / 2
    pts = []
    for j in range(1, 6):
        n = 256
        while n / 16 / 2 < required_half_extent(j, alpha):
            n *= 2
        _, B = rescaled_factors(j, alpha, MU3, delta, make_grid(1, n, 16))
        assert B.sup <= 8 * 2.0 ** (-delta * j)
        pts.append((j, B.sup))
    slope, _, _ = exponent_regression(pts)
    assert slope <= -delta + 0.1


@pytest.mark.parametrize("j,alpha,L", [(2, 3, 64), (3, 3, 256), (2, 4, 1024)])
def test_conjugation_identity(j, alpha, L):
    spec = GeneratorSpec("wave_packet", shell=j)
    phase = PhaseSpec("power_abs", alpha=alpha)
    lam = lambda_scale(alpha, j)
    n = 1024
    while n / L / 2 < required_half_extent(j, alpha):
        n *= 2
    g = make_grid(1, n, L)
    lhs = apply_multiplier(dyadic_piece_symbol(j, phase, 0.0, lp_family(j, g)), synthesize(spec, g))
    A, B = rescaled_factors(j, alpha, phase, 0.0, g)
    inner = apply_multiplier(A * B, dilate(spec, 1 / lam, g))
    # compare where the output lives (group delay moves it); interpolation costs O(points * n)
    live = np.flatnonzero(np.abs(lhs.samples) > 1e-6 * np.max(np.abs(lhs.samples)))
    idx = live[:: max(1, live.size // 600)]
    rhs = interpolate_at(inner, (lam * g.axis[idx],))
    assert np.max(np.abs(lhs.samples[idx] - rhs)) <= 1e-8


@pytest.mark.parametrize("alpha", [3.0, 4.0])
def test_a_phase_curvature_uniform(alpha):
    vals = [a_phase_curvature(j, alpha, PhaseSpec("power_abs", alpha=alpha)) for j in range(1, 7)]
    assert max(vals) <= 2 * vals[0]


@pytest.mark.parametrize("alpha", [3.0, 4.0])
def test_leibniz_surrogates_uniform(alpha):
    rows = [leibniz_surrogates(j, alpha, PhaseSpec("power_abs", alpha=alpha)) for j in range(1, 7)]
    for key in rows[0]:
        vals = [r[key] for r in rows]
        assert max(vals) <= 2 * vals[0]


def test_chi_j_zero_is_wide():
    r = np.linspace(0, 5, 501)
    assert np.array_equal(chi_j(0, r), psi0(r / 2))
