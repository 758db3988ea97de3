import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from samyield.montecarlo import run_monte_carlo
from samyield.netlist import parse
from samyield.problem import Specification
from samyield.sensitivity import linearize
from samyield.worstcase import (
    ConvergenceError,
    DegenerateGradientError,
    NoBoundaryError,
    WorstCaseError,
    analyze,
    grid_error,
    wcd_brute_oracle,
    wcd_linear,
    wcd_relinearized,
    yield_from_beta,
)

PHI_3 = 0.9986501019683699054733  # mpmath, 40 digits
PHI_M1 = 0.1586552539314570514148


def linear(coeffs, spec, nominals=None, sigmas=None, offset=0.0):
    n = len(coeffs)
    nominals = nominals or [0.0] * n
    sigmas = sigmas or [1.0] * n
    opts = " ".join(f"c{i + 1}={c!r}" for i, c in enumerate(coeffs))
    lines = [f"device linear {opts} offset={offset!r}"]
    for i in range(n):
        lines.append(f"param a{i + 1} nominal={nominals[i]!r} dist=gaussian sigma={sigmas[i]!r}")
        lines.append(f"bind x{i + 1} = a{i + 1}")
    lines += ["metric linear_response", f"spec linear_response {spec}"]
    return parse("\n".join(lines))


def one_shot(p, k=0):
    s = p.specs[k]
    return wcd_linear(linearize(p, s.metric), p, s)


# -- beta to yield ----------------------------------------------------------------


def test_yield_from_beta_examples():
    assert yield_from_beta(0.0) == 0.5
    assert yield_from_beta(3.0) == pytest.approx(0.9986501, abs=1e-6)
    assert yield_from_beta(3.0) == pytest.approx(PHI_3, abs=1e-15)
    assert yield_from_beta(-1.0) == pytest.approx(0.1586553, abs=1e-6)
    assert yield_from_beta(-1.0) == pytest.approx(PHI_M1, abs=1e-15)


@given(st.floats(-8, 8))
def test_yield_from_beta_symmetry(beta):
    assert abs(yield_from_beta(beta) + yield_from_beta(-beta) - 1.0) <= 1e-12


@given(st.floats(-8, 6), st.floats(1e-3, 1.0))
def test_yield_from_beta_increasing(beta, step):
    assert yield_from_beta(beta + step) > yield_from_beta(beta)


# -- one-shot linear ----------------------------------------------------------------


def test_linear_distance_three():
    p = linear([1.0, 0.0], "le 3")
    r = one_shot(p)
    assert r.beta == pytest.approx(3.0, abs=1e-12)
    assert np.allclose(r.worst_case_u, [3.0, 0.0])
    assert r.linear_yield == pytest.approx(0.99865, abs=1e-5)


def test_nominal_on_boundary():
    r = one_shot(linear([1.0], "le 0"))
    assert r.beta == 0.0
    assert r.linear_yield == 0.5


def test_diagonal_plane():
    r = one_shot(linear([1.0, 1.0], "le 2"))
    assert r.beta == pytest.approx(math.sqrt(2), abs=1e-12)
    assert np.allclose(r.worst_case_u, [1.0, 1.0])


def test_sign_convention_for_violated_nominal():
    r = one_shot(linear([1.0], "ge 1"))
    assert r.beta == pytest.approx(-1.0)
    assert r.linear_yield == pytest.approx(PHI_M1, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3), min_size=1, max_size=4),
    st.floats(-10, 10),
    st.sampled_from(["le", "ge"]),
    st.data(),
)
def test_linear_result_lies_on_boundary_at_distance_beta(coeffs, bound, rel, data):
    n = len(coeffs)
    nominals = data.draw(st.lists(st.floats(-3, 3), min_size=n, max_size=n))
    sigmas = data.draw(st.lists(st.floats(0.1, 3), min_size=n, max_size=n))
    p = linear(coeffs, f"{rel} {bound!r}", nominals, sigmas)
    r = one_shot(p)
    assert np.linalg.norm(r.worst_case_u) == pytest.approx(abs(r.beta), abs=1e-9)
    value = p.evaluate(p.nominal_values() * 0 + r.worst_case_x)["linear_response"]
    assert value == pytest.approx(bound, abs=1e-9 * max(1.0, abs(bound)))
    passes = p.passes()
    assert (r.beta > 0) == (passes and value != p.evaluate()["linear_response"])


@given(st.floats(1e-3, 1e3))
def test_scale_invariance(c):
    base = one_shot(linear([2.0, -1.0], "le 3"))
    scaled = one_shot(linear([2.0 * c, -1.0 * c], f"le {3.0 * c!r}"))
    assert scaled.beta == pytest.approx(base.beta, abs=1e-9)


def test_degenerate_gradient():
    with pytest.raises(DegenerateGradientError):
        one_shot(linear([0.0], "le 1"))
    with pytest.raises(DegenerateGradientError):
        wcd_relinearized(linear([0.0], "le 1"), Specification("linear_response", "le", 1.0))


def test_mismatched_spec_rejected(design):
    p = design("cantilever")
    with pytest.raises(ValueError):
        wcd_linear(linearize(p, "resonant_frequency"), p, Specification("spring_constant", "ge", 1.0))


# -- relinearized --------------------------------------------------------------------


def test_relinearized_linear_metric_one_iteration():
    p = linear([1.0, 2.0], "le 4", nominals=[0.5, -0.2], sigmas=[1.0, 0.5])
    lin = one_shot(p)
    rel = wcd_relinearized(p, p.specs[0])
    assert rel.iterations == 1
    assert rel.beta == lin.beta
    assert np.array_equal(rel.worst_case_u, lin.worst_case_u)


def test_relinearized_cantilever_lands_on_boundary(design):
    p = design("cantilever")
    r = wcd_relinearized(p, p.specs[0])
    f = p.evaluate(np.array([r.worst_case_x[0], 100e-6]))["resonant_frequency"]
    assert f == pytest.approx(49e3, abs=0.05)
    assert r.beta > 0


def test_relinearized_uniform_width_is_exact(design):
    # one monotone parameter: u-space WCD reproduces the exact yield
    p = design("cantilever_uniform")
    r = wcd_relinearized(p, p.specs[0])
    w_b = (49e3 / 1.7677669529663688e7) ** (2 / 3) * 100e-6
    exact = 1 - p.parameters[0].dist.cdf(w_b)
    assert r.linear_yield == pytest.approx(exact, abs=1e-9)


def test_relinearized_exponential_is_exact():
    p = parse(
        "device linear\nparam a nominal=1.5 dist=exponential rate=2 offset=1\n"
        "bind x1 = a\nmetric linear_response\nspec linear_response le 2\n"
    )
    r = wcd_relinearized(p, p.specs[0])
    assert r.linear_yield == pytest.approx(p.parameters[0].dist.cdf(2.0), abs=1e-9)


@pytest.mark.parametrize("stem,bound", [("cantilever", 51e3), ("cantilever_2param", 51e3)])
def test_relinearized_not_above_one_shot_for_convex_metric(design, stem, bound):
    # f_r is convex in w, so an upper bound's violation set contains the
    # tangent half-space and the true distance cannot exceed the one-shot one
    p = design(stem)
    spec = Specification("resonant_frequency", "le", bound)
    tol = 1e-9
    lin = wcd_linear(linearize(p, spec.metric), p, spec)
    rel = wcd_relinearized(p, spec, tol=tol)
    assert rel.beta <= lin.beta + tol
    radius = 3.5
    oracle = wcd_brute_oracle(p, spec, radius, 501)
    assert abs(rel.beta - oracle) <= grid_error(radius, 501, len(p.statistical)) + tol


def test_non_convergence_reports_last_iterate(design):
    p = design("cantilever_2param")
    with pytest.raises(ConvergenceError) as info:
        wcd_relinearized(p, p.specs[0], max_iter=1)
    assert info.value.last_u is not None and len(info.value.last_u) == 2


def test_unreachable_boundary_does_not_converge(design):
    # the widened beam never reaches 49 kHz inside the uniform support, so the
    # iterate runs into the flat tail of the u-space map
    p = design("cantilever_wide")
    with pytest.raises(WorstCaseError):
        wcd_relinearized(p, p.specs[0])


def test_argument_validation(design):
    p = design("cantilever")
    with pytest.raises(ValueError):
        wcd_relinearized(p, p.specs[0], max_iter=0)
    with pytest.raises(ValueError):
        wcd_relinearized(p, p.specs[0], tol=0.0)


# -- brute-force oracle ----------------------------------------------------------------


def test_oracle_single_axis():
    p = linear([1.0], "le 3")
    assert wcd_brute_oracle(p, p.specs[0], 5.0, 501) == pytest.approx(3.0, abs=0.02)


def test_oracle_violated_nominal():
    p = linear([1.0], "ge 1")
    assert wcd_brute_oracle(p, p.specs[0], 5.0, 501) == 0.0


def test_oracle_diagonal_plane():
    p = linear([1.0, 1.0], "le 2")
    assert wcd_brute_oracle(p, p.specs[0], 5.0, 501) == pytest.approx(math.sqrt(2), abs=0.02)


def test_oracle_three_parameters():
    p = linear([1.0, 1.0, 1.0], "le 3")
    assert wcd_brute_oracle(p, p.specs[0], 3.0, 61) == pytest.approx(math.sqrt(3), abs=grid_error(3.0, 61, 3))


def test_oracle_limits():
    p = linear([1.0] * 4, "le 1")
    with pytest.raises(ValueError):
        wcd_brute_oracle(p, p.specs[0])
    p = linear([1.0], "le 1")
    with pytest.raises(ValueError):
        wcd_brute_oracle(p, p.specs[0], 5.0, 5)
    p = linear([1.0], "le 10")
    with pytest.raises(NoBoundaryError):
        wcd_brute_oracle(p, p.specs[0], 5.0, 101)


# -- consistency with Monte Carlo --------------------------------------------------------


def test_linear_yield_matches_monte_carlo():
    p = linear([2.0, -1.0, 0.5], "le 2.5", nominals=[0.1, 0.3, -0.2], sigmas=[0.5, 1.0, 2.0])
    r = one_shot(p)
    mc = run_monte_carlo(p, 1_000_000, 2718)
    assert abs(r.linear_yield - mc.yield_estimate) <= 0.002


def test_analyze_multiple_specs():
    p = parse(
        "device linear\nparam a nominal=0 dist=gaussian sigma=1\nbind x1 = a\n"
        "metric linear_response\nspec linear_response le 3\nspec linear_response ge -1\n"
    )
    s = analyze(p, "linear")
    assert [round(r.beta, 12) for r in s.results] == [3.0, 1.0]
    assert s.joint_linear_yield == pytest.approx(yield_from_beta(1.0))
    assert analyze(p).joint_linear_yield == pytest.approx(s.joint_linear_yield, abs=1e-12)
    with pytest.raises(ValueError):
        analyze(p, "quadratic")
