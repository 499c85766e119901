import json
import math
from types import SimpleNamespace

import numpy as np
import pytest

from pbsim.errors import BoundaryMinimumError, ClassificationDegenerateWarning, ConfigError
from pbsim.models import OneCavityParams, TwoCavityParams
from pbsim.observables import classify
from pbsim.sweep import (
    CSV_HEADER,
    ResultRow,
    SolverOptions,
    SweepSpec,
    default_workers,
    emit_csv,
    find_optimum,
    load_config,
    load_preset,
    locate_region_boundaries,
    preset_names,
    read_csv,
    run_sweep,
    spec_from_dict,
)


def small_spec(axis="delta", lo=-0.3, hi=0.3, points=7, **kw):
    kw.setdefault("omega_drive", 83.33)
    return SweepSpec("one_cavity", axis, lo, hi, points, OneCavityParams(n_trunc=5, **kw))


def test_sweep_is_deterministic():
    spec = small_spec()
    a, b = run_sweep(spec, workers=1), run_sweep(spec, workers=1)
    assert a == b


def test_parallel_matches_serial():
    spec = small_spec()
    assert run_sweep(spec, workers=3) == run_sweep(spec, workers=1)


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv("PB_SIM_THREADS", "4")
    assert default_workers() == 4
    monkeypatch.setenv("PB_SIM_THREADS", "many")
    with pytest.raises(ConfigError):
        default_workers()


def test_failing_point_does_not_abort():
    rows = run_sweep(small_spec("eps", 0.0, 0.02, 3), workers=1)
    assert len(rows) == 3
    assert not rows[0].ok and rows[0].region_label == "error"
    assert math.isnan(rows[0].g2)
    assert rows[1].ok and rows[2].ok


def test_invalid_axis_rejected():
    with pytest.raises(ConfigError):
        small_spec(axis="g_prime")
    with pytest.raises(ConfigError):
        small_spec(lo=1.0, hi=0.0)
    with pytest.raises(ConfigError):
        SweepSpec("one_cavity", "delta", 0, 1, 3, OneCavityParams(n_trunc=40), solver=SolverOptions(max_dim=64))


def test_optimum_of_quadratic():
    spec = small_spec("delta", 0.0, 1.0, 11)
    x, y = find_optimum(spec, objective=lambda x: (x - 0.3137) ** 2 + 0.5)
    assert x == pytest.approx(0.3137, abs=1e-6)
    assert y == pytest.approx(0.5, abs=1e-9)


def test_optimum_on_grid_without_refinement():
    spec = small_spec("delta", 0.0, 1.0, 11)
    x, _ = find_optimum(spec, refine=False, objective=lambda x: (x - 0.32) ** 2)
    assert x == pytest.approx(0.3)


def test_optimum_at_edge_raises():
    spec = small_spec("delta", 0.0, 1.0, 11)
    with pytest.raises(BoundaryMinimumError):
        find_optimum(spec, objective=lambda x: x)


def test_optimum_tie_picks_smaller_value():
    spec = small_spec("delta", 0.0, 1.0, 11)
    x, _ = find_optimum(spec, refine=False, objective=lambda x: min(abs(x - 0.3), abs(x - 0.7)))
    assert x == pytest.approx(0.3)


def row(x, g2, g3, g4):
    return ResultRow(x, 0.01, g2, g3, g4, classify(g2, g3, g4)[0].value)


def test_boundaries_bisected_to_tolerance():
    # g2 crosses 1 at x = 0.4137
    def gs(x):
        g2 = 0.5 + (x - 0.1) * (0.5 / 0.3137)
        return SimpleNamespace(g2=g2, g3=0.2, g4=5.0)

    rows = [row(x, gs(x).g2, 0.2, 5.0) for x in np.linspace(0, 1, 6)]
    bounds = locate_region_boundaries(rows, gs, xtol=1e-6)
    assert len(bounds) == 1
    assert bounds[0].position == pytest.approx(0.4137, abs=1e-6)
    assert (bounds[0].left, bounds[0].right) == ("C", "g4>g2>1>g3")


def test_single_region_warns():
    rows = [row(x, 0.5, 0.1, 0.3) for x in (0.0, 0.5, 1.0)]
    with pytest.warns(ClassificationDegenerateWarning):
        assert locate_region_boundaries(rows) == []


def test_csv_layout_and_round_trip(tmp_path):
    rows = [row(0.1, 0.5, 0.1, 0.3), row(0.2, 2.0, 3.0, 4.0), ResultRow.failed(0.3, ValueError("x"))]
    path = emit_csv(rows, tmp_path / "out.csv")
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert len(lines) == 4
    assert lines[0].split(",") == CSV_HEADER
    back = read_csv(path)
    for a, b in zip(rows, back):
        assert a.axis_value == b.axis_value and a.region_label == b.region_label
        np.testing.assert_array_equal([a.mean_phonon, a.g2, a.g3, a.g4], [b.mean_phonon, b.g2, b.g3, b.g4])


def test_csv_region_matches_classifier(tmp_path):
    rows = run_sweep(small_spec(), workers=1)
    for r in read_csv(emit_csv(rows, tmp_path / "s.csv")):
        assert r.region_label == classify(r.g2, r.g3, r.g4)[0].value


def test_mhz_units_and_family():
    doc = {
        "name": "run",
        "model": "two_cavity_reduced",
        "params": {"sqrt_n_plus": 51.0, "sqrt_n_minus": 1.0},
        "units": {"kappa_MHz_over_2pi": 5.0, "MHz_over_2pi": {"g": 0.4, "g0": 2.0, "J": 4.0, "Jm": 0.01}},
        "sweep": {"axis": "eps", "range": [0.01, 0.05], "points": 3},
        "family": {"param": "n_trunc", "values": [6, 8]},
    }
    specs = spec_from_dict(doc)
    assert [s.name for s in specs] == ["run_n_trunc=6", "run_n_trunc=8"]
    p = specs[0].fixed
    assert isinstance(p, TwoCavityParams)
    assert (p.g, p.g0, p.J, p.Jm) == pytest.approx((0.08, 0.4, 0.8, 0.002))
    assert p.n_plus == pytest.approx(2601)
    assert p.coupling == pytest.approx(0.5, rel=1e-12)
    assert specs[1].fixed.n_trunc == 8


def test_config_errors(tmp_path):
    base = {"model": "one_cavity", "sweep": {"axis": "delta", "range": [0, 1], "points": 3}}
    with pytest.raises(ConfigError):
        spec_from_dict({**base, "bogus": 1})
    with pytest.raises(ConfigError):
        spec_from_dict({**base, "params": {"nope": 1}})
    with pytest.raises(ConfigError):
        spec_from_dict({**base, "model": "three_cavity"})
    with pytest.raises(ConfigError):
        spec_from_dict({**base, "outputs": ["g5"]})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    good = tmp_path / "good.json"
    good.write_text(json.dumps(base))
    assert len(load_config(good)) == 1


def test_presets_load():
    names = preset_names()
    assert {"fig3", "fig4", "fig6a", "fig6b", "fig7", "fig8"} <= set(names)
    for name in names:
        specs = load_preset(name)
        assert specs
        for s in specs:
            assert s.fixed.space.dim <= s.solver.max_dim
    with pytest.raises(ConfigError):
        load_preset("fig99")


def test_time_axis_trajectory():
    spec = SweepSpec("two_cavity_reduced", "t", 0.0, 2.0, 3, TwoCavityParams(n_trunc=4))
    rows = run_sweep(spec)
    assert [r.axis_value for r in rows] == [0.0, 1.0, 2.0]
    assert not rows[0].ok  # vacuum has undefined g2
    assert rows[2].ok
