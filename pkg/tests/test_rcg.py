import math

import numpy as np
import pytest

from irs_precoding.oracles import central_difference, random_search_margin
from irs_precoding.rcg import (
    RcgOptions,
    SmoothedProblem,
    cophasing_init,
    epsilon_schedule,
    euclidean_gradient,
    form_values,
    project_to_tangent,
    rcg_minimize,
    retract,
    smoothed_objective,
    solve_relaxed,
    to_complex,
    to_oblique,
)

from conftest import random_channels, random_symbols


def _problem_from_values(values, eps):
    # one-element problem whose forms evaluate to ``values`` at theta = 1
    coeffs = np.zeros((len(values), 2, 1))
    coeffs[:, 0, 0] = values
    return SmoothedProblem(coeffs, eps)


def _random_point(rng, N):
    return to_oblique(np.exp(1j * rng.uniform(0, 2 * np.pi, N)))


def test_smoothed_value_of_equal_forms():
    p = _problem_from_values([0.0, 0.0], 0.1)
    assert smoothed_objective(p, np.array([[1.0], [0.0]])) == pytest.approx(0.1 * math.log(2),
                                                                            abs=1e-15)


def test_smoothed_value_does_not_overflow():
    p = _problem_from_values([1.0, -50.0], 0.01)
    v = smoothed_objective(p, np.array([[1.0], [0.0]]))
    assert math.isfinite(v)
    assert v == pytest.approx(1.0, abs=1e-12)


def test_epsilon_must_be_positive():
    with pytest.raises(ValueError):
        _problem_from_values([0.0], 0.0)


def test_sandwich_bounds(qpsk, rng):
    for _ in range(200):
        K, N = 3, 6
        h = random_channels(rng, K, N)
        s = random_symbols(rng, qpsk, K)
        eps = rng.uniform(1e-3, 1.0)
        p = SmoothedProblem.from_channels(h, s, qpsk.phi, eps)
        x = _random_point(rng, N)
        g = form_values(p, x).max()
        f = smoothed_objective(p, x)
        assert g - 1e-12 <= f <= g + eps * math.log(2 * K) + 1e-12


def test_form_values_match_complex_margins(qpsk, rng):
    h = random_channels(rng, 2, 5)
    s = random_symbols(rng, qpsk, 2)
    theta = np.exp(1j * rng.uniform(0, 2 * np.pi, 5))
    p = SmoothedProblem.from_channels(h, s, qpsk.phi, 0.1)
    g = form_values(p, to_oblique(theta)).reshape(2, 2)
    r = (h.conj() @ theta) * np.exp(-1j * np.angle(s))
    expected = np.abs(r.imag) - r.real * math.tan(qpsk.phi)
    assert g.max(axis=1) == pytest.approx(expected, abs=1e-12)


def test_gradient_matches_finite_differences(qpsk, rng):
    h = random_channels(rng, 3, 6)
    s = random_symbols(rng, qpsk, 3)
    p = SmoothedProblem.from_channels(h, s, qpsk.phi, 0.05)
    x = _random_point(rng, 6)
    fd = central_difference(lambda y: smoothed_objective(p, y), x)
    g = euclidean_gradient(p, x)
    assert np.linalg.norm(g - fd) / np.linalg.norm(fd) < 1e-6


def test_projection_example():
    x = np.array([[1.0], [0.0]])
    assert project_to_tangent(x, np.array([[1.0], [1.0]])) == pytest.approx(np.array([[0.0], [1.0]]))


def test_projection_is_orthogonal(rng):
    x = _random_point(rng, 7)
    v = project_to_tangent(x, rng.standard_normal((2, 7)))
    assert np.abs(np.sum(x * v, axis=0)).max() < 1e-14


def test_retraction_example():
    y = retract(np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]]), 1.0)
    assert y[:, 0] == pytest.approx([1 / math.sqrt(2), 1 / math.sqrt(2)])


def test_retraction_rejects_zero_column():
    with pytest.raises(FloatingPointError):
        retract(np.array([[1.0], [0.0]]), np.array([[-1.0], [0.0]]), 1.0)


def test_oblique_roundtrip(rng):
    theta = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
    assert to_complex(to_oblique(theta)) == pytest.approx(theta)


def test_trace_is_monotone_and_unit_modulus(qpsk, rng):
    h = random_channels(rng, 2, 8)
    s = random_symbols(rng, qpsk, 2)
    p = SmoothedProblem.from_channels(h, s, qpsk.phi, 0.05)
    x, trace = rcg_minimize(p, _random_point(rng, 8))
    assert np.all(np.diff(trace.objective) <= 1e-12)
    assert np.sqrt(np.sum(x * x, axis=0)) == pytest.approx(np.ones(8), abs=1e-12)
    assert trace.status in ("converged", "max_iter", "stalled")


def test_single_user_reaches_closed_form(qpsk, rng):
    h = random_channels(rng, 1, 16)
    sol = solve_relaxed(h, qpsk.points[:1], qpsk.phi, rng=rng)
    target = -math.tan(qpsk.phi) * np.abs(h).sum()
    assert sol.margin == pytest.approx(target, rel=1e-3)
    assert np.abs(sol.theta) == pytest.approx(np.ones(16), abs=1e-12)


def test_cophasing_is_optimal_for_one_user(qpsk, rng):
    h = random_channels(rng, 1, 8)
    s = qpsk.points[2:3]
    theta = cophasing_init(h, s)
    r = (h[0].conj() @ theta) * np.exp(-1j * np.angle(s[0]))
    assert r.real == pytest.approx(np.abs(h).sum())
    assert r.imag == pytest.approx(0.0, abs=1e-12)


def test_beats_random_search(qpsk, rng):
    h = random_channels(rng, 2, 4)
    s = random_symbols(rng, qpsk, 2)
    sol = solve_relaxed(h, s, qpsk.phi, rng=rng)
    ref = random_search_margin(h, s, qpsk.phi, 10 ** 4, rng)
    assert sol.margin <= ref + 1e-3


def test_solve_relaxed_is_deterministic(qpsk):
    rng = np.random.default_rng(7)
    h = random_channels(rng, 2, 8)
    s = random_symbols(rng, qpsk, 2)
    a = solve_relaxed(h, s, qpsk.phi, rng=np.random.default_rng(1))
    b = solve_relaxed(h, s, qpsk.phi, rng=np.random.default_rng(1))
    assert np.array_equal(a.theta, b.theta)
    assert a.margin == b.margin


def test_restarts_need_a_generator(qpsk, rng):
    h = random_channels(rng, 2, 4)
    with pytest.raises(ValueError):
        solve_relaxed(h, qpsk.points[:2], qpsk.phi, rng=None, restarts=2)


def test_zero_channel_returns_feasible_point(qpsk):
    sol = solve_relaxed(np.zeros((2, 4)), qpsk.points[:2], qpsk.phi, restarts=0)
    assert sol.margin == 0.0
    assert np.abs(sol.theta) == pytest.approx(np.ones(4))


def test_epsilon_schedule_ends_at_channel_scale(rng):
    h = random_channels(rng, 2, 16)
    eps = epsilon_schedule(h)
    assert eps[-1] == pytest.approx(1e-3 * np.linalg.norm(h, axis=1).max())
    assert list(eps) == sorted(eps, reverse=True)


def test_options_limit_iterations(qpsk, rng):
    h = random_channels(rng, 2, 8)
    p = SmoothedProblem.from_channels(h, random_symbols(rng, qpsk, 2), qpsk.phi, 0.01)
    _, trace = rcg_minimize(p, _random_point(rng, 8), RcgOptions(max_iter=3, grad_tol=0.0))
    assert trace.iterations <= 3
