import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import mutate, random_problem
from samyield.distributions import Exponential, Fixed, Gaussian, Uniform
from samyield.netlist import (
    BindingError,
    DuplicateParameterError,
    InvalidParameterError,
    MalformedNumberError,
    MalformedStatementError,
    NetlistParseError,
    UndeclaredMetricError,
    UnknownDeviceError,
    UnknownDistributionError,
    UnknownMetricError,
    UnknownStatementError,
    load,
    parse,
    serialize,
)
from samyield.problem import DesignProblem, Relation

CANTILEVER = """\
device cantilever calib_f=1.7678e7
param w nominal=2e-6 dist=gaussian sigma=0.1e-6
param l nominal=100e-6 dist=none
bind w = w
bind l = l
metric resonant_frequency
spec resonant_frequency ge 49e3
"""

FULL = """\
# all four beam fields statistical
device cantilever calib_f=1.7678e7   # calibrated
param E nominal=169e9 dist=gaussian sigma=5e9
param t nominal=2e-6 dist=uniform lo=1.9e-6 hi=2.1e-6
param w nominal=2e-6 dist=uniform halfwidth=0.05e-6
param l nominal=100e-6 dist=exponential rate=1e6 offset=99e-6

bind E = E
bind t=t
bind   w   =   w
bind l = l
metric spring_constant
metric resonant_frequency
spec resonant_frequency ge 49e3
"""


def test_parse_minimal_cantilever():
    p = parse(CANTILEVER)
    assert p.device == "cantilever"
    assert p.options == {"calib_f": 1.7678e7}
    assert [q.name for q in p.parameters] == ["w", "l"]
    assert p.parameters[0].dist == Gaussian(2e-6, 0.1e-6)
    assert p.parameters[1].dist == Fixed(100e-6)
    assert p.bindings == {"w": "w", "l": "l"}
    assert len(p.specs) == 1
    assert p.specs[0].relation is Relation.GE and p.specs[0].bound == 49e3


def test_parse_four_parameter_cantilever():
    p = parse(FULL)
    assert len(p.parameters) == 4
    assert len(p.specs) == 1
    assert p.parameters[1].dist == Uniform(1.9e-6, 2.1e-6)
    assert p.parameters[2].dist == Uniform(2e-6 - 0.05e-6, 2e-6 + 0.05e-6)
    assert p.parameters[3].dist == Exponential(1e6, 99e-6)
    assert p.metrics == ["spring_constant", "resonant_frequency"]


def test_unbound_fields_take_device_defaults():
    p = parse(CANTILEVER)
    values = p.field_values()
    assert values["E"] == 169e9 and values["t"] == 2e-6


def test_literal_binding():
    p = parse(CANTILEVER.replace("bind l = l", "bind l = 120e-6"))
    assert p.bindings["l"] == 120e-6
    assert p.field_values()["l"] == 120e-6


@pytest.mark.parametrize(
    "text,exc,line",
    [
        (CANTILEVER.replace("dist=gaussian", "dist=gauss"), UnknownDistributionError, 2),
        ("device cantilever\nparam w nominal=1 dist=none\nparam w nominal=2 dist=none\n", DuplicateParameterError, 3),
        ("device cantilever\nmetric spring_constant\nspec touchdown_force ge 1\n", UndeclaredMetricError, 3),
        ("device cantilever\nparam w nominal=2e-6x dist=none\n", MalformedNumberError, 2),
        ("device cantilever\nparam w nominal=nan dist=none\n", MalformedNumberError, 2),
        ("device cantilever\nspec spring_constant ge 1e999\nmetric spring_constant\n", MalformedNumberError, 2),
        ("device cantilever\nresistor r1 1 2\n", UnknownStatementError, 2),
        ("Device cantilever\n", UnknownStatementError, 1),
        ("device beam\n", UnknownDeviceError, 1),
        ("device pressure_sensor\nmetric spring_constant\n", UnknownMetricError, 2),
        ("device cantilever\nmetric resonant_frequency\n", UnknownMetricError, 2),
        ("device cantilever\nbind w = q\n", BindingError, 2),
        ("device cantilever\n\nbind g0 = 1\n", BindingError, 3),
        ("device cantilever\nparam w nominal=1 dist=gaussian\n", MalformedStatementError, 2),
        ("device cantilever\nparam w nominal=1 dist=gaussian sigma=-1\n", InvalidParameterError, 2),
        ("device cantilever\nparam w nominal=5 dist=uniform lo=0 hi=1\n", InvalidParameterError, 2),
        ("device cantilever\nparam w nominal=1 dist=uniform lo=0 hi=2 halfwidth=1\n", MalformedStatementError, 2),
        ("device cantilever\nparam w nominal=1 dist=none sigma=1\n", MalformedStatementError, 2),
        ("device cantilever\ndevice cantilever\n", MalformedStatementError, 2),
        ("# nothing here\n", MalformedStatementError, 1),
        ("", MalformedStatementError, 1),
        ("device cantilever\nspec spring_constant gt 1\n", MalformedStatementError, 2),
        ("device cantilever foo=1\n", MalformedStatementError, 1),
        ("device cantilever\nbind w =\n", MalformedStatementError, 2),
    ],
)
def test_parse_errors(text, exc, line):
    with pytest.raises(exc) as info:
        parse(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_unknown_distribution_message():
    with pytest.raises(UnknownDistributionError, match="unknown distribution kind 'gauss'"):
        parse(CANTILEVER.replace("dist=gaussian", "dist=gauss"))


def test_error_column_points_at_token():
    with pytest.raises(UnknownDistributionError) as info:
        parse("device cantilever\nparam w nominal=2e-6 dist=gauss sigma=1\n")
    assert info.value.column == len("param w nominal=2e-6 dist=") + 1


def test_serialize_canonical_forms():
    p = parse(CANTILEVER)
    text = serialize(p)
    assert "param l nominal=0.0001 dist=none" in text
    assert "spec" in text
    no_specs = DesignProblem(p.device, p.parameters, p.bindings, p.metrics, [], p.options)
    assert not any(line.startswith("spec") for line in serialize(no_specs).splitlines())


def test_uniform_halfwidth_normalized_on_output():
    text = serialize(parse(FULL))
    assert "halfwidth" not in text
    assert "dist=uniform lo=1.95e-06 hi=2.05e-06" in text


def test_round_trip_bundled_designs(designs):
    for path in sorted(designs.glob("*.sam")):
        p = load(path)
        assert parse(serialize(p)) == p


def test_round_trip_50_random_problems():
    rng = np.random.default_rng(20241016)
    for _ in range(50):
        p = random_problem(rng)
        assert parse(serialize(p)) == p


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1))
def test_round_trip_property(seed):
    p = random_problem(np.random.default_rng(seed))
    text = serialize(p)
    assert parse(text) == p
    assert serialize(parse(text)) == text


@settings(max_examples=500)
@given(st.text(max_size=200))
def test_parse_is_total_on_arbitrary_text(text):
    try:
        parse(text)
    except NetlistParseError as exc:
        assert exc.line >= 1


def test_mutation_fuzzing():
    rng = np.random.default_rng(7)
    corpus = [CANTILEVER, FULL] + [serialize(random_problem(rng)) for _ in range(20)]
    errors = 0
    for _ in range(2000):
        text = corpus[int(rng.integers(len(corpus)))]
        for _ in range(int(rng.integers(1, 4))):
            text = mutate(rng, text)
        try:
            parse(text)
        except NetlistParseError as exc:
            errors += 1
            assert 1 <= exc.line <= max(1, text.count("\n") + 1)
    assert errors > 0


def test_load_rejects_invalid_utf8(tmp_path):
    path = tmp_path / "bad.sam"
    path.write_bytes(b"device cantilever\nparam w nominal=1 dist=none # \xff\xfe\n")
    with pytest.raises(NetlistParseError) as info:
        load(path)
    assert info.value.line == 2
