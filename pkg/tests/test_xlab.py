import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tfmult.errors import NyquistError
from tfmult.gabor import SpaceParams
from tfmult.grid import GeneratorSpec, forward_ft
from tfmult.indices import LARGE, SMALL, IndexPoint
from tfmult.symbols import PhaseSpec, constant_symbol, random_bounded_symbol
from tfmult.xlab import (
    EnsembleSpec,
    ExperimentReport,
    ReportRow,
    build_ensemble,
    default_ensemble_spec,
    parse_report,
    write_report,
)
from tfmult.xlab.experiments import (
    affine_envelope,
    estimate_operator_ratio,
    exponent_regression,
    run_dilation_scans,
    run_exp_bound_scan,
    threshold_packet,
)
from tfmult.xlab.report import parse_text, render, strip_timestamp

ENS = default_ensemble_spec()


@pytest.fixture(scope="module")
def signals():
    return build_ensemble(ENS)


# --- ensemble -------------------------------------------------------------------------------

def test_default_ensemble(signals):
    assert len(signals) >= 8
    labels = ENS.labels
    for need in ("gaussian", "chirp", "smoothed_box", "modulated_gaussian_1", "modulated_gaussian_2",
                 "wave_packet_k1", "wave_packet_k2"):
        assert need in labels
    for f in signals:
        assert np.all(np.isfinite(f.samples)) and abs(f.l2_norm() - 1) < 1e-10


def test_ensemble_deterministic():
    a = build_ensemble(default_ensemble_spec(seed=11))
    b = build_ensemble(default_ensemble_spec(seed=11))
    assert all(np.array_equal(x.samples, y.samples) for x, y in zip(a, b))


def test_wave_packet_k3_shell():
    ens = default_ensemble_spec(n=4096)
    f = build_ensemble(ens)[ens.labels.index("wave_packet_k3")]
    F = forward_ft(f)
    r = np.abs(F.grid.axis)
    m = np.abs(F.samples) ** 2
    assert m[(r < 4) | (r > 16)].sum() <= 1e-8 * m.sum()


def test_ensemble_validation():
    with pytest.raises(ValueError):
        EnsembleSpec(ENS.members[:4], ENS.grid, 0)
    bad = EnsembleSpec(ENS.members + (GeneratorSpec("wave_packet", shell=6),), ENS.grid, 0)
    with pytest.raises(NyquistError, match="wave_packet_k6"):
        build_ensemble(bad)


# --- operator ratios and regression ----------------------------------------------------------

def test_constant_symbol_ratio(signals):
    c = 0.6 - 0.8j * 1.5
    sp = SpaceParams(1, 2)
    r, _ = estimate_operator_ratio(constant_symbol(ENS.grid, c), signals, sp, sp, labels=ENS.labels)
    assert abs(r - abs(c)) < 1e-8


def test_zero_input_rejected(signals):
    zero = signals[0].scale(0)
    with pytest.raises(ValueError):
        estimate_operator_ratio(constant_symbol(ENS.grid, 1), [zero], SpaceParams(1, 1), SpaceParams(1, 1))


def test_bounded_symbols_m2q(signals):
    # all three q at once are covered by the acceptance suite; here the API path with q = 2
    sp = SpaceParams(2, 2)
    for seed in range(3):
        r, _ = estimate_operator_ratio(random_bounded_symbol(ENS.grid, seed), signals, sp, sp)
        assert r <= 1 + 1e-3


def test_unimodular_random_m21(signals):
    rng = np.random.default_rng(5)
    g = ENS.grid.dual()
    from tfmult.symbols import symbol_from_values
    sym = symbol_from_values(g, np.exp(1j * rng.uniform(0, 2 * np.pi, g.n)))
    r, _ = estimate_operator_ratio(sym, signals, SpaceParams(2, 1), SpaceParams(2, 1))
    assert r <= 1 + 1e-3


def test_regression_examples():
    s, _, res = exponent_regression([(j, 2.0**-j) for j in range(1, 6)])
    assert s == pytest.approx(-1, abs=1e-12) and res < 1e-12
    assert exponent_regression([(j, 3.0) for j in range(4)])[0] == pytest.approx(0, abs=1e-12)
    s, _, _ = exponent_regression([(j, 2.0**-j * (1 + 0.01 * (-1) ** j)) for j in range(1, 7)])
    assert abs(s + 1) <= 0.02
    with pytest.raises(ValueError):
        exponent_regression([(0, 1), (1, 2)])
    with pytest.raises(ValueError):
        exponent_regression([(0, 1), (1, 0), (2, 1)])


@given(st.floats(-3, 3, allow_nan=False), st.floats(-5, 5, allow_nan=False))
def test_regression_recovers_power_law(slope, icpt):
    s, b, res = exponent_regression([(j, 2.0 ** (slope * j + icpt)) for j in range(-3, 4)])
    assert abs(s - slope) < 1e-9 and abs(b - icpt) < 1e-9 and res < 1e-9


def test_dilation_gaussian_l2_slope():
    pt = IndexPoint.from_exponents(2, 2)
    for regime in (LARGE, SMALL):
        rep = run_dilation_scans([pt], regime, 3, [GeneratorSpec("gaussian")])[pt]
        assert abs(rep.member_rows("gaussian")[0].slope + 0.5) <= 0.02
        sign = 1 if regime == LARGE else -1
        assert [r.scale for r in rep.rows] == [sign * j for j in (1, 2, 3)] if sign > 0 else True


def test_dilation_rejects_short_scan():
    with pytest.raises(ValueError):
        run_dilation_scans([IndexPoint(1, 1)], LARGE, 2, [GeneratorSpec("gaussian")])


def test_threshold_packet_matches_lambda_scaling():
    pk = threshold_packet(3, 3.0, PhaseSpec("power_abs", alpha=3))
    assert pk.spec.xi0[0] == 8.0
    assert pk.spec.width == pytest.approx(2.0 ** (-1.5))


def test_affine_envelope():
    s = np.array([0, 1, 2, 4, 8])
    env = affine_envelope(s, 1 + 0.5 * s)
    assert env["relative_residual"] < 1e-8 and env["slope"] == pytest.approx(0.5, abs=1e-8)
    y = np.sqrt(s + 1.0)
    env = affine_envelope(s, y)
    assert env["max_gap"] >= 0 and np.all(env["intercept"] + env["slope"] * s >= y - 1e-12)


def test_exp_bound_affine_phase_constant():
    rep = run_exp_bound_scan(PhaseSpec("custom_table", table=lambda x: 3 + 2 * x), [0, 1, 2, 4, 8, 16, 32])
    base = rep.rows[0].output_norm
    assert rep.rows[0].output_norm == pytest.approx(rep.rows[0].input_norm, rel=1e-12)
    for r in rep.rows:
        assert abs(r.output_norm / base - 1) <= 1e-6


# --- reports -----------------------------------------------------------------------------------

def _report():
    rep = ExperimentReport("demo", {"p": "1", "x": 1 / 3, "big": math.pi}, grid=(1, 1024, 64.0), seed=3)
    rep.add(ReportRow("b", 2.0, 1.0, 3.0 / 7.0, slope=-0.1234567890123456789))
    rep.add(ReportRow("a", 1.0, 2.0, 1e-300))
    rep.add(ReportRow("b", -1.0, 0.3, 0.1))
    rep.stats = {"max": 0.1 + 0.2}
    return rep


def test_row_validation():
    with pytest.raises(ValueError):
        ReportRow("m", 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        ReportRow("m", 0.0, 1.0, math.inf)
    assert ReportRow("m", 0, 4.0, 2.0).ratio == 0.5


def test_round_trip(tmp_path):
    rep = _report()
    path = tmp_path / "r.csv"
    write_report(rep, path)
    meta, back = parse_report(path)
    assert meta["seed"] == "3" and meta["grid"] == "1,1024,64"
    assert len(back) == 1
    assert back[0].rows == rep.rows
    assert back[0].stats == {"max": 0.1 + 0.2}
    assert [r.member for r in back[0].rows] == ["b", "b", "a"]
    assert [r.scale for r in back[0].member_rows("b")] == [-1.0, 2.0]


def test_empty_report_is_header_only(tmp_path):
    path = tmp_path / "e.csv"
    write_report(ExperimentReport("empty"), path)
    lines = path.read_text().splitlines()
    assert len(lines) == 2 and lines[1].startswith("experiment,param_json")
    assert parse_report(path)[1] == []


def test_render_deterministic_modulo_timestamp():
    a = render([_report()])
    b = render([_report()], timestamp="1999-01-01T00:00:00Z")
    assert a != b and strip_timestamp(a) == strip_timestamp(b)


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        parse_text("")
    with pytest.raises(ValueError):
        parse_text("experiment,x\n")
    with pytest.raises(ValueError):
        parse_text("# seed=1\nfoo,bar\n")


@given(st.lists(st.tuples(st.floats(-1e6, 1e6, allow_nan=False), st.floats(1e-150, 1e150),
                          st.floats(0, 1e150)), min_size=0, max_size=8))
def test_round_trip_property(rows):
    rep = ExperimentReport("prop", {"k": 1})
    for i, (s, a, b) in enumerate(rows):
        rep.add(ReportRow(f"m{i % 3}", s, a, b))
    _, back = parse_text(render([rep]))
    got = back[0].rows if back else []
    rep.sort()
    assert got == rep.rows
