"""Large-tilt predictions: constants, exponents, regimes, studies."""

import math
import os
import subprocess
import sys

import pytest

from eqm import asymptotics
from eqm.errors import UnsupportedRegime
from eqm.field import FieldSpec, PowerTerm

from conftest import quartic_field, semicircle_field, sextic_field


def test_sextic_negative_constant():
    pred = asymptotics.predict(sextic_field(0.0), -1)
    assert pred.scaling_exponent == pytest.approx(1.0 / 3.0)
    assert pred.limit_constant == pytest.approx(0.5 ** (1.0 / 3.0), rel=1e-12)
    # negative cubic tilt pushes the well to the positive side
    assert pred.well_location > 0.0


def test_quartic_negative_constant():
    pred = asymptotics.predict(quartic_field(0.0), -1)
    assert pred.scaling_exponent == pytest.approx(0.5)
    assert pred.limit_constant == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-12)


def test_positive_convex_constant():
    pred = asymptotics.predict(semicircle_field(0.0), +1)
    assert pred.scaling_exponent == pytest.approx(-0.5)
    assert pred.limit_constant == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-12)


def test_odd_positive_mirror():
    neg = asymptotics.predict(sextic_field(0.0), -1)
    pos = asymptotics.predict(sextic_field(0.0), +1)
    assert pos.limit_constant == pytest.approx(neg.limit_constant, rel=1e-12)
    assert pos.well_location == pytest.approx(-neg.well_location, rel=1e-6)


def test_subdominant_terms_do_not_change_constant():
    base = sextic_field(0.0)
    bumped = FieldSpec(
        vstar=(PowerTerm("monomial", 6.0, 1.0), PowerTerm("monomial", 2.0, 1.0)),
        p_coeffs=(0.0, 0.0, 0.0, 1.0),
        t=0.0,
    )
    a = asymptotics.predict(base, -1)
    b = asymptotics.predict(bumped, -1)
    assert b.limit_constant == pytest.approx(a.limit_constant, rel=1e-12)
    assert b.scaling_exponent == pytest.approx(a.scaling_exponent)


def test_nonconvex_positive_unsupported():
    field = FieldSpec(
        vstar=(PowerTerm("monomial", 8.0, 1.0),),
        p_coeffs=(0.0, 0.0, -3.0, 0.0, 1.0),
        t=0.0,
    )
    with pytest.raises(UnsupportedRegime):
        asymptotics.predict(field, +1)


def test_dominated_field_unsupported():
    # fixed part must dominate the tilt degree
    field = FieldSpec(
        vstar=(PowerTerm("monomial", 2.0, 1.0),),
        p_coeffs=(0.0, 0.0, 0.0, 1.0),
        t=0.0,
    )
    with pytest.raises(UnsupportedRegime):
        asymptotics.predict(field, -1)


def test_prediction_dict():
    pred = asymptotics.predict(quartic_field(0.0), -1)
    d = pred.as_dict()
    assert d["regime"] == pred.regime
    assert d["scaling_exponent"] == pred.scaling_exponent
    assert d["limit_constant"] == pred.limit_constant


def test_worker_count_env(monkeypatch):
    monkeypatch.delenv("EQM_THREADS", raising=False)
    assert asymptotics.worker_count(16) == 4
    monkeypatch.setenv("EQM_THREADS", "2")
    assert asymptotics.worker_count(16) == 2
    monkeypatch.setenv("EQM_THREADS", "99")
    assert asymptotics.worker_count(16) == 16
    monkeypatch.setenv("EQM_THREADS", "junk")
    assert asymptotics.worker_count(16) == 4


def test_scaling_study_sextic():
    study = asymptotics.scaling_study(sextic_field(0.0), -1, 3)
    devs = [row["deviation"] for row in study.rows]
    assert all(row.get("error") is None for row in study.rows)
    assert devs == sorted(devs, reverse=True)
    assert all(row["gaps"] == 0 for row in study.rows)
    assert all(row["well_inside"] for row in study.rows)
    csv_text = study.to_csv()
    lines = csv_text.strip().split("\n")
    assert len(lines) == 4
    assert lines[0].startswith("t,")


def test_scaling_study_validates_decades():
    with pytest.raises(ValueError):
        asymptotics.scaling_study(sextic_field(0.0), -1, 2)
