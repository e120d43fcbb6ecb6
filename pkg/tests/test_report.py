import math

import pytest

from qmpemba import DissipationSpec, ModelParams, ParameterError, StateSpec, TimeGrid, mpemba_report

P = ModelParams(V=1.4, J=1.0, beta=4 * math.pi**2, alpha=0.7, L=10)


@pytest.fixture(scope="module")
def report():
    states = [StateSpec("mixed"), StateSpec("thermal", 2.0), StateSpec("eigenstate", 1), StateSpec("site", 5)]
    return mpemba_report(P, DissipationSpec(1.0), states, engine="both", samples=200)


def test_pairs_oriented_colder_first(report):
    p = report.pair("mixed", "T2")
    assert (p.colder, p.hotter) == ("T2", "mixed")
    assert p.ordered_by_temperature
    q = report.pair("m1", "T2")
    assert q.colder == "m1"
    # the mixed state sits at the target and never crosses anything
    assert report.state("mixed").distance0 == pytest.approx(0, abs=1e-15)


def test_engines_agree_and_temperatures(report):
    assert report.engine_discrepancy < 1e-8
    assert report.state("T2").temperature == 2.0
    assert report.state("mixed").temperature is None
    T1 = report.state("m1").temperature
    assert 0 < T1 < 0.5


def test_fitted_rates_reach_the_gap(report):
    for label in ("T2", "m1", "site5"):
        assert report.state(label).rate == pytest.approx(-report.slowest.gap, rel=1e-4)


def test_to_dict_is_json_ready(report):
    import json

    doc = report.to_dict()
    json.dumps(doc, allow_nan=False)
    assert doc["grid"]["samples"] == 200
    assert isinstance(doc["verdicts"], list)


def test_explicit_grid_and_bad_engine():
    g = TimeGrid.linear(5.0, 11)
    rep = mpemba_report(P, DissipationSpec(1.0), [("eigenstate", 2), ("eigenstate", 9)], engine="ode", grid=g)
    assert len(rep.state("m2").trajectories["ode"].distances) == 11
    with pytest.raises(ParameterError):
        mpemba_report(P, DissipationSpec(1.0), [("mixed",)], engine="fast")
    with pytest.raises(ParameterError):
        mpemba_report(P, DissipationSpec(1.0), [("eigenstate", 11)])
