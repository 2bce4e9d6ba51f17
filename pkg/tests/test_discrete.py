import itertools
import math

import numpy as np
import pytest

from irs_precoding.discrete import (
    BnbNode,
    OneBitInstance,
    bnb_solve_1bit,
    branching_order,
    build_onebit_instance,
    node_lower_bound,
    quantize_phases,
)
from irs_precoding.margin import worst_user_margin
from irs_precoding.oracles import exhaustive_discrete, exhaustive_onebit, loop_worst_margin
from irs_precoding.rcg import solve_relaxed
from irs_precoding.signals import phase_alphabet

from conftest import random_channels, random_symbols


def _all_signs(N):
    return [np.array(t, dtype=float) for t in itertools.product([1.0, -1.0], repeat=N)]


@pytest.fixture
def two_element(qpsk):
    return build_onebit_instance(np.array([[1.0, 1.0]]), np.array([1.0 + 0j]), qpsk.phi)


def test_quantize_to_two_bits():
    q = quantize_phases(np.array([np.exp(1.2j)]), phase_alphabet(2))
    assert q[0] == 1j


def test_quantize_wraps_to_plus_one():
    q = quantize_phases(np.array([np.exp(6.2j)]), phase_alphabet(1))
    assert q[0] == 1.0


def test_quantize_keeps_alphabet_points(rng):
    for B in (1, 2, 3):
        a = phase_alphabet(B)
        pts = a.values[rng.integers(a.size, size=20)]
        assert np.array_equal(quantize_phases(pts, a), pts)


def test_quantize_is_nearest_point(rng):
    a = phase_alphabet(3)
    theta = np.exp(1j * rng.uniform(0, 2 * np.pi, 200))
    q = quantize_phases(theta, a)
    dist = np.abs(np.angle(theta[:, None] / a.values[None, :]))
    chosen = np.abs(np.angle(theta / q))
    assert np.all(chosen <= dist.min(axis=1) + 1e-12)


def test_quantize_rejects_continuous_alphabet():
    with pytest.raises(ValueError):
        quantize_phases(np.ones(2), phase_alphabet("inf"))


def test_two_element_margins(two_element):
    vals = sorted(two_element.objective(t) for t in _all_signs(2))
    assert vals == pytest.approx([-2.0, 0.0, 0.0, 2.0], abs=1e-12)


def test_two_element_optimum(two_element):
    res = bnb_solve_1bit(two_element)
    assert np.array_equal(res.theta, [1.0, 1.0])
    assert res.value == pytest.approx(-2.0)
    assert res.status == "optimal"
    assert res.gap == 0.0


def test_two_element_root_bound(two_element):
    assert node_lower_bound(two_element, BnbNode(np.zeros(2))) <= -2.0 + 1e-12


def test_full_node_bound_is_objective(qpsk, rng):
    inst = build_onebit_instance(random_channels(rng, 2, 6), random_symbols(rng, qpsk, 2), qpsk.phi)
    theta = rng.choice([-1.0, 1.0], 6)
    assert node_lower_bound(inst, BnbNode(theta)) == pytest.approx(inst.objective(theta), abs=1e-12)


def test_real_positive_channel_prefers_all_plus(qpsk, rng):
    h = np.abs(rng.standard_normal((1, 7)))
    res = bnb_solve_1bit(build_onebit_instance(h, qpsk.points[:1], qpsk.phi))
    assert np.array_equal(res.theta, np.ones(7))


def test_instance_matches_complex_path_exhaustively(qpsk, rng):
    h = random_channels(rng, 2, 8)
    s = random_symbols(rng, qpsk, 2)
    inst = build_onebit_instance(h, s, qpsk.phi)
    for theta in _all_signs(8):
        ref = loop_worst_margin(h, theta, s, qpsk.phi)
        assert inst.objective(theta) == pytest.approx(ref, abs=1e-12)


def test_bound_is_admissible(qpsk, rng):
    N = 10
    h = random_channels(rng, 2, N)
    inst = build_onebit_instance(h, random_symbols(rng, qpsk, 2), qpsk.phi)
    for _ in range(1000):
        fixed = rng.choice([-1.0, 0.0, 1.0], N)
        free = np.flatnonzero(fixed == 0)
        best = math.inf
        for signs in itertools.product([1.0, -1.0], repeat=free.size):
            t = fixed.copy()
            t[free] = signs
            best = min(best, inst.objective(t))
        assert node_lower_bound(inst, BnbNode(fixed)) <= best + 1e-12


def test_bnb_matches_exhaustive_and_beats_quantization(qpsk, rng):
    one = phase_alphabet(1)
    for _ in range(30):
        K = int(rng.integers(1, 4))
        N = int(rng.integers(2, 11))
        h = random_channels(rng, K, N)
        s = random_symbols(rng, qpsk, K)
        inst = build_onebit_instance(h, s, qpsk.phi)
        q = quantize_phases(solve_relaxed(h, s, qpsk.phi, rng=rng).theta, one)
        res = bnb_solve_1bit(inst, q)
        _, best = exhaustive_onebit(inst)
        assert res.status == "optimal"
        assert res.value == best
        assert res.value <= inst.objective(q.real)


def test_budget_exhaustion_reports_gap(qpsk, rng):
    inst = build_onebit_instance(random_channels(rng, 3, 12), random_symbols(rng, qpsk, 3), qpsk.phi)
    res = bnb_solve_1bit(inst, node_budget=3)
    assert res.status == "budget-exhausted"
    assert res.gap >= 0.0
    assert res.value == pytest.approx(inst.objective(res.theta))


def test_bnb_is_deterministic(qpsk, rng):
    inst = build_onebit_instance(random_channels(rng, 2, 12), random_symbols(rng, qpsk, 2), qpsk.phi)
    a, b = bnb_solve_1bit(inst), bnb_solve_1bit(inst)
    assert a.nodes == b.nodes
    assert np.array_equal(a.theta, b.theta)
    assert a.value == b.value


def test_branching_order_by_largest_coefficient():
    A = np.array([[0.1, -3.0, 0.5], [2.0, 0.0, -0.5]])
    assert list(branching_order(A)) == [1, 0, 2]


def test_onebit_metadata(qpsk, rng):
    inst = build_onebit_instance(random_channels(rng, 3, 4), random_symbols(rng, qpsk, 3), qpsk.phi)
    assert inst.users == (0, 0, 1, 1, 2, 2)
    assert inst.branches == (1, -1, 1, -1, 1, -1)
    assert isinstance(inst, OneBitInstance)


def test_mean_margin_ordering_over_alphabets(qpsk):
    rng = np.random.default_rng(2024)
    totals = {"inf": 0.0, 3: 0.0, 2: 0.0, 1: 0.0, "bnb": 0.0}
    n = 200
    for _ in range(n):
        h = random_channels(rng, 2, 8)
        s = random_symbols(rng, qpsk, 2)
        sol = solve_relaxed(h, s, qpsk.phi, rng=rng, restarts=1)
        totals["inf"] += sol.margin
        for B in (3, 2, 1):
            q = quantize_phases(sol.theta, phase_alphabet(B))
            totals[B] += worst_user_margin(h, q, s, qpsk.phi)
        inst = build_onebit_instance(h, s, qpsk.phi)
        q1 = quantize_phases(sol.theta, phase_alphabet(1))
        res = bnb_solve_1bit(inst, q1)
        assert res.value <= inst.objective(q1.real)
        totals["bnb"] += res.value
    m = {k: v / n for k, v in totals.items()}
    assert m["inf"] <= m[3] <= m[2] <= m[1]
    assert m["bnb"] <= m[1]


def test_small_multibit_exhaustive_oracle(qpsk, rng):
    # 2-bit quantization can never beat the exhaustive 2-bit optimum
    a = phase_alphabet(2)
    for _ in range(5):
        h = random_channels(rng, 2, 4)
        s = random_symbols(rng, qpsk, 2)
        _, best = exhaustive_discrete(h, s, qpsk.phi, a)
        q = quantize_phases(solve_relaxed(h, s, qpsk.phi, rng=rng).theta, a)
        assert best <= worst_user_margin(h, q, s, qpsk.phi) + 1e-12
