import math
import os

import pytest

import epigain

SOURCE_DIR = os.environ.get(
    "EPIGAIN_SOURCE_DIR", os.path.join(os.path.dirname(__file__), "..", "..")
)


def test_version():
    assert epigain.__version__.count(".") == 2


def test_closed_form_and_noisy_gains():
    p = epigain.ModelParams(s_p=10.0, s_l=1.0, epsilon=1e-3)
    assert epigain.kld_minus_bs_gaussian(p, 2.0) > 0.0
    g = epigain.gain_point(p, 4.0)
    assert g.ig == pytest.approx(g.kld + g.bs, abs=1e-15)
    assert g.surprise == pytest.approx(g.bs + g.u, abs=1e-5)
    assert epigain.surprise(p, 0.0) == pytest.approx(2.10960700, abs=1e-7)


def test_gain_curve_has_one_peak():
    p = epigain.ModelParams(s_p=10.0, s_l=1.0)
    ig = [pt.ig for pt in epigain.gain_curve(p, epigain.linspace(0.0, 20.0, 201))]
    peaks = [i for i in range(1, len(ig) - 1) if ig[i - 1] < ig[i] > ig[i + 1]]
    assert len(peaks) == 1


def test_optima_and_ordering():
    r = epigain.find_optima(epigain.ModelParams(s_p=10.0, s_l=1.0))
    assert r.converged
    assert r.delta_kld < r.delta_ig < r.delta_bs
    assert r.s_kld < r.s_bs
    assert r.delta_kld == pytest.approx(5.167786, rel=1e-5)


def test_sweep_matches_golden_csv():
    grid = epigain.sweep(workers=2)
    assert len(grid.records) == 100
    assert grid.failed_cells == 0
    with open(os.path.join(SOURCE_DIR, "tests", "golden", "sweep_coarse.csv"), newline="") as fh:
        assert grid.to_csv() == fh.read()
    assert grid.heatmap_svg("max_ig").count('class="cell"') == 100


def test_simulate_jump_mode():
    trace = epigain.simulate(epigain.ModelParams(s_p=10.0, s_l=1.0), cycles=5)
    assert len(trace.steps) == 11
    deltas = {s.delta for s in trace.steps[1:]}
    assert deltas == {trace.optima.delta_kld, trace.optima.delta_bs}
    assert trace.to_csv().startswith("step,phase,delta,surprise,kld,bs,ig,emotion\n")


def test_efe_on_bundled_model():
    model = epigain.load_policy_model(os.path.join(SOURCE_DIR, "data", "example_policy_model.json"))
    rows = [epigain.efe_decompose(model, k) for k in range(len(model.policies))]
    for b in rows:
        assert abs(b.reconstructed() - b.g) <= 1e-10
    prior = epigain.policy_prior([b.g for b in rows], model.gamma)
    assert math.fsum(prior) == pytest.approx(1.0)


def test_errors_map_to_python_exceptions():
    with pytest.raises(epigain.ValidationError):
        epigain.ModelParams(s_p=-1.0)
    with pytest.raises(epigain.ValidationError):
        epigain.parse_range("1:2")
    assert issubclass(epigain.ConvergenceError, epigain.Error)
    assert issubclass(epigain.Error, RuntimeError)
