"""
Discrete-phase precoders: nearest-phase quantization of a relaxed
solution and exact depth-first branch-and-bound for 1-bit elements.

A 1-bit precoder is a vector in {+1, -1}^N. Since it is real, every
margin branch reduces to a linear function ``a_i @ theta`` and the
problem becomes ``min_theta max_i a_i @ theta``.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .margin import stack_forms


def quantize_phases(theta_cont, alphabet):
    """Round each phase to the nearest multiple of ``alphabet.delta``.

    Angles are taken in ``[0, 2*pi)`` before rounding and the result is
    reduced modulo ``2*pi`` so that, e.g., 6.2 rad with 1 bit maps to +1.
    """
    if alphabet.is_infinite:
        raise ValueError("cannot quantize to the continuous alphabet")
    L = alphabet.size
    ang = np.mod(np.angle(np.asarray(theta_cont)), 2 * np.pi)
    idx = np.round(ang / alphabet.delta).astype(np.int64) % L
    return alphabet.values[idx]


@dataclass(frozen=True)
class OneBitInstance:
    """Row i of ``A`` gives margin branch i as ``A[i] @ theta``, theta in {+1,-1}^N.

    ``users[i]`` and ``branches[i]`` record which user and which sign of
    ``Im`` the row encodes.
    """

    A: np.ndarray
    users: tuple = ()
    branches: tuple = ()

    @property
    def N(self):
        return self.A.shape[1]

    def objective(self, theta):
        return float(np.max(self.A @ np.asarray(theta, dtype=float)))


def build_onebit_instance(h_effs, symbols, phi):
    """1-bit instance for one symbol vector from ``(K, N)`` effective channels."""
    coeffs = stack_forms(h_effs, symbols, phi)
    K2 = coeffs.shape[0]
    return OneBitInstance(
        A=coeffs[:, 0, :].copy(),
        users=tuple(i // 2 for i in range(K2)),
        branches=tuple(1 if i % 2 == 0 else -1 for i in range(K2)),
    )


@dataclass
class BnbNode:
    """Partial assignment: ``fixed[n]`` is +1, -1 or 0 (free)."""

    fixed: np.ndarray
    lower_bound: float = -math.inf
    depth: int = 0


def node_lower_bound(inst, node):
    """``max_i (A[i, fixed] @ theta_fixed - sum_{free n} |A[i, n]|)``.

    Every completion satisfies ``A[i] @ theta >= `` the row term, so the
    maximum over rows bounds the best completion from below.
    """
    fixed = np.asarray(node.fixed, dtype=float)
    free = fixed == 0
    rows = inst.A @ fixed - np.abs(inst.A[:, free]).sum(axis=1)
    return float(rows.max())


@dataclass
class BnbResult:
    theta: np.ndarray
    value: float
    status: str
    gap: float
    nodes: int = 0
    incumbent_updates: int = field(default=0, repr=False)


def branching_order(A):
    """Free variables in decreasing order of ``max_i |A[i, n]|`` (stable)."""
    return np.argsort(-np.abs(A).max(axis=0), kind="stable")


def bnb_solve_1bit(inst, incumbent_init: Optional[np.ndarray] = None,
                   node_budget=10 ** 6, gap_tol=1e-9):
    """Globally minimize ``max_i A[i] @ theta`` over ``theta in {+1,-1}^N``.

    Depth-first search over a fixed variable order (largest coefficient
    magnitude first). Of the two children, the one with the smaller bound
    is explored first, +1 on ties. A node is pruned when its bound is not
    below ``incumbent - gap_tol``.

    Parameters
    ----------
    inst : OneBitInstance
    incumbent_init : array_like, optional
        A feasible +-1 vector, typically the quantized relaxed solution.
    node_budget : int
        Maximum number of nodes expanded before giving up.
    gap_tol : float
        Absolute optimality tolerance.

    Returns
    -------
    BnbResult
        ``status`` is ``optimal`` or ``budget-exhausted``; ``gap`` is the
        difference between the incumbent and the smallest open bound.
    """
    A = np.asarray(inst.A, dtype=float)
    n_rows, N = A.shape
    order = branching_order(A)
    cols = A[:, order]
    absc = np.abs(cols)
    # tail[:, d] = sum of |coefficients| of variables order[d:]
    tail = np.zeros((n_rows, N + 1))
    tail[:, :N] = np.cumsum(absc[:, ::-1], axis=1)[:, ::-1]

    if incumbent_init is not None:
        best_theta = np.where(np.real(np.asarray(incumbent_init)) >= 0, 1.0, -1.0)
    else:
        best_theta = np.ones(N)
    best = float(np.max(A @ best_theta))

    # stack entries: (depth, partial sums, assignment in branching order)
    assign = np.zeros(N)
    stack = [(0, np.zeros(n_rows), assign)]
    nodes = 0
    open_bound = math.inf
    updates = 0
    while stack:
        depth, partial, assign = stack.pop()
        bound = float(np.max(partial - tail[:, depth]))
        if bound >= best - gap_tol:
            continue
        if nodes >= node_budget:
            open_bound = min(open_bound, bound, *(
                float(np.max(p - tail[:, dp])) for dp, p, _ in stack))
            break
        nodes += 1
        if depth == N:
            best = float(np.max(partial))
            best_theta = np.empty(N)
            best_theta[order] = assign
            updates += 1
            continue
        col = cols[:, depth]
        plus = partial + col
        minus = partial - col
        b_plus = float(np.max(plus - tail[:, depth + 1]))
        b_minus = float(np.max(minus - tail[:, depth + 1]))
        a_plus = assign.copy()
        a_plus[depth] = 1.0
        a_minus = assign.copy()
        a_minus[depth] = -1.0
        # push the worse child first so the better one is expanded next
        if b_minus < b_plus:
            stack.append((depth + 1, plus, a_plus))
            stack.append((depth + 1, minus, a_minus))
        else:
            stack.append((depth + 1, minus, a_minus))
            stack.append((depth + 1, plus, a_plus))

    # report the value in the same arithmetic as OneBitInstance.objective
    best = float(np.max(A @ best_theta))
    if open_bound == math.inf:
        status, gap = "optimal", 0.0
    else:
        status, gap = "budget-exhausted", max(0.0, best - open_bound)
    return BnbResult(theta=best_theta, value=best, status=status, gap=gap,
                     nodes=nodes, incumbent_updates=updates)
