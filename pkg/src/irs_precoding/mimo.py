"""
Alternating precoder/combiner design for multi-antenna users.

With the combiners fixed, every codebook entry is a single-antenna
problem on the effective channels ``H_k w_k``. With the codebook fixed,
each user's combiner solves the convex problem

    min_{||w|| <= 1}  max_m  |Im(w^H c_m)| - tan(phi) Re(w^H c_m),
    c_m = H_k^H theta_m exp(-j angle(s_m(k))).
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import optimize

from .codebook import PrecoderCodebook, design_codebooks, parse_scheme
from .margin import codebook_margins
from .rcg import RcgOptions
from .signals import ChannelSet, symbol_table


def effective_channel(H_k, w_k):
    """``H_k @ w_k``, so that ``w^H H^H theta == h_eff^H theta``."""
    H_k = np.asarray(H_k)
    w_k = np.atleast_1d(np.asarray(w_k))
    if H_k.ndim != 2 or H_k.shape[1] != w_k.shape[0]:
        raise ValueError(f"shape mismatch: H_k {H_k.shape}, w_k {w_k.shape}")
    return H_k @ w_k


def combiner_vectors(H_k, codebook_entries, symbols_k):
    """Rows ``c_m = H_k^H theta_m exp(-j angle(s_m(k)))``, shape ``(M**K, Nr)``."""
    C = np.asarray(codebook_entries) @ np.asarray(H_k).conj()
    return C * np.exp(-1j * np.angle(np.asarray(symbols_k)))[:, None]


def _pieces(C, phi):
    # real linear pieces of the combiner objective in z = [Re w, Im w]
    a = math.tan(phi)
    cr, ci = C.real, C.imag
    plus = np.hstack([ci - a * cr, -cr - a * ci])
    minus = np.hstack([-ci - a * cr, cr - a * ci])
    return np.vstack([plus, minus])


def combiner_objective(w, C, phi):
    """``max_m |Im(w^H c_m)| - tan(phi) Re(w^H c_m)``."""
    r = np.asarray(C) @ np.conj(np.atleast_1d(w))
    return float(np.max(np.abs(r.imag) - r.real * math.tan(phi)))


@dataclass
class CombinerOptions:
    iterations: int = 2000
    step_scale: float = 0.5
    polish_step: float = 1e-4
    polish_start: float = 1e-2
    polish_sweeps: int = 2000
    tolerance: float = 1e-12
    dual_refine: bool = True


def _project_ball(z):
    n = math.sqrt(float(z @ z))
    return z / n if n > 1.0 else z


def _polish(z, pieces, opts):
    """Pattern search over per-antenna magnitude and phase, step halved down to ``polish_step``."""
    Nr = z.size // 2
    w = z[:Nr] + 1j * z[Nr:]
    mag, ang = np.abs(w), np.angle(w)

    def value(mag, ang):
        nrm = math.sqrt(float(mag @ mag))
        if nrm > 1.0:
            mag = mag / nrm
        ww = mag * np.exp(1j * ang)
        return float(np.max(pieces @ np.concatenate([ww.real, ww.imag]))), mag

    best, mag = value(mag, ang)
    step = opts.polish_start
    sweeps = 0
    while step >= opts.polish_step and sweeps < opts.polish_sweeps:
        improved = False
        for i in range(2 * Nr):
            for sgn in (1.0, -1.0):
                m2, a2 = mag.copy(), ang.copy()
                if i < Nr:
                    m2[i] = max(0.0, m2[i] + sgn * step)
                else:
                    a2[i - Nr] += sgn * step
                v, m2 = value(m2, a2)
                if v < best - opts.tolerance:
                    best, mag, ang, improved = v, m2, a2, True
        sweeps += 1
        if not improved:
            step /= 2
    w = mag * np.exp(1j * ang)
    return np.concatenate([w.real, w.imag]), best


def _dual_refine(pieces):
    """Exact minimizer from the dual problem.

    ``min_{||z|| <= 1} max_j a_j . z = -min_{lam in simplex} ||A^T lam||``;
    when the minimum-norm point ``p`` of the hull of the pieces is nonzero,
    ``z = -p / ||p||`` attains it.
    """
    n = pieces.shape[0]
    Q = pieces @ pieces.T
    res = optimize.minimize(
        lambda lam: lam @ Q @ lam,
        np.full(n, 1.0 / n),
        jac=lambda lam: 2.0 * Q @ lam,
        bounds=[(0.0, None)] * n,
        constraints=[{"type": "eq", "fun": lambda lam: lam.sum() - 1.0,
                      "jac": lambda lam: np.ones_like(lam)}],
        method="SLSQP",
        options={"ftol": 1e-15, "maxiter": 500},
    )
    p = res.x @ pieces
    nrm = float(np.linalg.norm(p))
    if nrm == 0.0:
        return np.zeros(pieces.shape[1])
    return -p / nrm


def solve_combiner(H_k, codebook_entries, symbols_k, phi, w_prev=None,
                   opts: Optional[CombinerOptions] = None):
    """Combiner of one user for a fixed codebook.

    Projected subgradient descent on the unit ball (step ``c / sqrt(t)``
    with ``c = 0.5 / max_m ||c_m||``, best iterate kept), followed by a
    magnitude/phase pattern search and an exact minimum-norm-point
    solution of the dual. The result is never worse than ``w_prev``.

    Returns
    -------
    w : ndarray, shape (Nr,)
    value : float
        Objective at ``w``.
    degenerate : bool
        True when every ``c_m`` is zero; ``w`` is then the first basis vector.
    """
    opts = opts or CombinerOptions()
    C = combiner_vectors(H_k, codebook_entries, symbols_k)
    Nr = C.shape[1]
    cmax = float(np.max(np.linalg.norm(C, axis=1)))
    if cmax == 0.0:
        w = np.zeros(Nr, dtype=complex)
        w[0] = 1.0
        return w, 0.0, True
    pieces = _pieces(C, phi)

    if w_prev is None:
        z = np.zeros(2 * Nr)
    else:
        w0 = np.atleast_1d(np.asarray(w_prev, dtype=complex))
        z = _project_ball(np.concatenate([w0.real, w0.imag]))
    vals = pieces @ z
    best_z, best_v = z.copy(), float(vals.max())
    c = opts.step_scale / cmax
    for t in range(1, opts.iterations + 1):
        j = int(np.argmax(vals))
        z = _project_ball(z - (c / math.sqrt(t)) * pieces[j])
        vals = pieces @ z
        v = float(vals.max())
        if v < best_v:
            best_z, best_v = z.copy(), v
    z, v = _polish(best_z, pieces, opts)
    if v < best_v:
        best_z, best_v = z, v
    if opts.dual_refine:
        z = _dual_refine(pieces)
        v = float(np.max(pieces @ z))
        if v < best_v:
            best_z, best_v = z, v

    w = best_z[:Nr] + 1j * best_z[Nr:]
    if w_prev is not None:
        w_prev = np.atleast_1d(np.asarray(w_prev, dtype=complex))
        if np.linalg.norm(w_prev) <= 1.0 + 1e-12:
            v_prev = combiner_objective(w_prev, C, phi)
            if v_prev <= best_v:
                return w_prev.copy(), v_prev, False
    return w, combiner_objective(w, C, phi), False


def initial_combiners(channels: ChannelSet):
    """Unit-norm dominant left singular vector of each ``H_k^H``."""
    W = np.empty((channels.K, channels.Nr), dtype=complex)
    for k in range(channels.K):
        U, _, _ = np.linalg.svd(channels.H[k].conj().T)
        W[k] = U[:, 0] / np.linalg.norm(U[:, 0])
    return W


def global_objective(channels: ChannelSet, entries, combiners, constellation):
    """Worst margin over all symbol vectors and users."""
    h_eff = np.einsum("knr,kr->kn", channels.H, combiners)
    _, S = symbol_table(constellation, channels.K)
    return float(codebook_margins(h_eff, entries, S, constellation.phi).max())


@dataclass
class AlternatingTrace:
    """History of the alternating loop.

    ``objective[i]`` is f after iteration i, ``delta[i]`` the relative
    change, ``best[i]`` the best f so far. ``before_combiner`` and
    ``after_combiner`` hold f with the new codebook and the old and new
    combiners respectively.
    """

    objective: List[float] = field(default_factory=list)
    delta: List[float] = field(default_factory=list)
    best: List[float] = field(default_factory=list)
    before_combiner: List[float] = field(default_factory=list)
    after_combiner: List[float] = field(default_factory=list)
    stalled: List[bool] = field(default_factory=list)
    degenerate: List[bool] = field(default_factory=list)

    @property
    def iterations(self):
        return len(self.objective)


def alternating_design(channels: ChannelSet, constellation, scheme, seed=0, key=(),
                       max_iter=20, delta_th=1e-3, update_combiners=True,
                       combiners_init=None, restarts=3, rcg_opts: Optional[RcgOptions] = None,
                       combiner_opts: Optional[CombinerOptions] = None):
    """Alternate between codebook and combiner updates.

    The loop runs while ``iteration <= max_iter`` and ``delta >= delta_th``
    with ``delta = |(f - f_prev) / f|`` (``|f - f_prev|`` when f is 0).
    From the second iteration on, each entry's RCG is also started from
    its previous relaxed solution. With ``update_combiners=False`` a single
    codebook pass is made with the initial combiners.

    Returns
    -------
    codebook : PrecoderCodebook
        Best codebook seen (by f).
    combiners : ndarray, shape (K, Nr)
        Combiners paired with that codebook.
    trace : AlternatingTrace
    """
    scheme = parse_scheme(scheme)
    if combiners_init is None:
        W = initial_combiners(channels)
    else:
        W = np.asarray(combiners_init, dtype=complex).reshape(channels.K, channels.Nr).copy()
    _, S = symbol_table(constellation, channels.K)
    phi = constellation.phi
    trace = AlternatingTrace()
    best_book, best_W, best_f = None, None, math.inf
    f = math.inf
    delta = math.inf
    warm = None
    it = 0
    while it <= max_iter and delta >= delta_th:
        f_prev = f
        h_eff = np.einsum("knr,kr->kn", channels.H, W)
        book = design_codebooks(h_eff, constellation, [scheme], seed=seed, key=key,
                                iteration=it, restarts=restarts, warm_starts=warm,
                                rcg_opts=rcg_opts)[scheme.name]
        warm = book.relaxed
        trace.stalled.append(any(book.stalled))
        f_before = global_objective(channels, book.entries, W, constellation)
        degenerate = False
        if update_combiners:
            W_new = np.empty_like(W)
            for k in range(channels.K):
                w, _, deg = solve_combiner(channels.H[k], book.entries, S[:, k], phi,
                                           w_prev=W[k], opts=combiner_opts)
                W_new[k] = w
                degenerate |= deg
            W = W_new
        f = global_objective(channels, book.entries, W, constellation)
        trace.before_combiner.append(f_before)
        trace.after_combiner.append(f)
        trace.degenerate.append(degenerate)
        if math.isinf(f_prev):
            delta = math.inf
        elif abs(f) < 1e-12:
            delta = abs(f - f_prev)
        else:
            delta = abs((f - f_prev) / f)
        if f < best_f:
            best_f, best_book, best_W = f, book, W.copy()
        trace.objective.append(f)
        trace.delta.append(delta)
        trace.best.append(best_f)
        it += 1
        if not update_combiners:
            break
    return best_book, best_W, trace
