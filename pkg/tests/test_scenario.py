import numpy as np
import pytest

from divchain.cli import bundled_paths
from divchain.errors import ScenarioParseError, ScenarioValidationError
from divchain.scenario import Scenario, load, parse_text

MINIMAL = """
[scenario]
id = demo
dim = 1
domain = -1 .. 1
experiments = chain

[singular]
points = 0 : +1

[field]
b = sign(x1)
M = 1
b_plus = 1
b_minus = -1

[u]
breaks =
pieces = 0.5
grads = 0
sup = 0.5
"""


def test_minimal_scenario_builds():
    scn = Scenario(parse_text(MINIMAL))
    assert scn.id == "demo"
    assert scn.field.M == 1.0
    assert scn.u.eval(np.array([[0.3]]))[0] == 0.5
    assert not scn.is_cantor
    assert scn.tol_abs == 1e-7


def test_parse_error_positions():
    with pytest.raises(ScenarioParseError) as e:
        parse_text("[scenario\nid = x")
    assert e.value.line == 1
    with pytest.raises(ScenarioParseError) as e:
        parse_text("[scenario]\nnonsense line\n")
    assert e.value.line == 2
    with pytest.raises(ScenarioParseError):
        parse_text("key = before section")


def test_duplicate_key_rejected():
    with pytest.raises(ScenarioParseError):
        parse_text("[scenario]\nid = a\nid = b\n")


def test_unknown_experiment_rejected():
    bad = MINIMAL.replace("experiments = chain", "experiments = warp")
    with pytest.raises(ScenarioValidationError):
        Scenario(parse_text(bad))


def test_singular_point_outside_domain_rejected():
    bad = MINIMAL.replace("points = 0 : +1", "points = 5 : +1")
    with pytest.raises(ScenarioValidationError):
        Scenario(parse_text(bad))


def test_cantor_scenario_relaxes_tolerances():
    txt = MINIMAL.replace("[u]\nbreaks =", "[u]\ncantor_amplitude = 1\nbreaks =")
    txt = txt.replace("domain = -1 .. 1", "domain = -1 .. 2")
    scn = Scenario(parse_text(txt))
    assert scn.is_cantor and scn.tol_abs == 1e-5


def test_bundled_corpus_is_large_enough():
    paths = bundled_paths()
    assert len(paths) >= 12
    for p in paths:
        scn = load(p)       # every bundled file parses and validates
        assert scn.id
