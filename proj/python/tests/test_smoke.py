import math

import numpy as np
import pytest

import kgsys


@pytest.fixture(scope="module")
def line():
    return kgsys.Grid(1, 512, 32.0)


def sech_pair(grid, scale=1.0):
    x = grid.coordinates()
    s = scale * math.sqrt(2.0) / np.cosh(x)
    return s, np.zeros_like(s)


def test_grid(line):
    assert line.dim == 1
    assert line.points == 512
    assert line.coordinates().shape == (512,)
    with pytest.raises(ValueError):
        kgsys.Grid(2, 7, 1.0)


def test_params_validation():
    with pytest.raises(ValueError):
        kgsys.Params(-1.0)


def test_functionals_of_the_scalar_ground_state(line):
    u1, u2 = sech_pair(line)
    r = kgsys.functionals(line, u1, u2, kgsys.Params(0.0))
    assert r["J"] == pytest.approx(4.0 / 3.0, rel=1e-10)
    assert abs(r["K0"]) < 1e-9
    assert r["E"] == pytest.approx(r["J"])


def test_ground_state_levels(line):
    gs = kgsys.ground_state(kgsys.Params(3.0), line)
    assert gs["converged"]
    assert gs["level"] == pytest.approx(2.0 / 3.0, rel=1e-6)
    assert gs["u1"].shape == (512,)
    levels = kgsys.candidate_levels(kgsys.Params(1.0), 1)
    assert levels["best"] == pytest.approx(4.0 / 3.0, rel=1e-12)
    assert kgsys.h0(kgsys.Params(2.0), 1) == pytest.approx(8.0 / 9.0, rel=1e-6)


def test_classify_and_evolve(line):
    p = kgsys.Params(2.0)
    gs = kgsys.ground_state(p, line)
    level = gs["level"]
    below = kgsys.classify(line, 0.5 * gs["u1"], 0.5 * gs["u2"], p, level)
    assert below["region"] == "PS_plus"
    above = kgsys.classify(line, 1.05 * gs["u1"], 1.05 * gs["u2"], p, level)
    assert above["region"] == "PS_minus"

    run = kgsys.evolve(line, 0.5 * gs["u1"], 0.5 * gs["u2"], p, 5.0)
    assert run["status"] == "completed"
    assert run["max_energy_drift"] < 1e-4
    blown = kgsys.evolve(line, 1.05 * gs["u1"], 1.05 * gs["u2"], p, 20.0)
    assert blown["status"] == "blowup_detected"


def test_free_evolution_round_trip(line):
    u1, u2 = sech_pair(line, 0.3)
    a = kgsys.free_evolve(line, u1, u2, 1.7)
    b = kgsys.free_evolve(line, a[0], a[1], -1.7, v1=a[2], v2=a[3])
    assert np.max(np.abs(b[0] - u1)) < 1e-12


def test_boost_rotation_of_even_data(line):
    x = line.coordinates()
    u1 = 0.5 * np.exp(-x**2 / 2)
    u2 = 0.3 * np.exp(-x**2 / 2)
    rows = kgsys.boost_rotation(line, u1, u2, kgsys.Params(0.5), [0.0, 0.2])
    assert len(rows) == 2
    assert rows[1]["E"] == pytest.approx(rows[0]["E"] * math.cosh(0.2), rel=2e-3)
