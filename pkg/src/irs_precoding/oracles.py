"""
Brute-force reference computations used to check the solvers.

None of these share code paths with the solvers they check: margins are
evaluated with plain Python loops over complex numbers, discrete problems
by enumeration and the combiner problem by grid search.
"""

import cmath
import itertools
import math

import numpy as np


def loop_worst_margin(h_effs, theta, symbols, phi):
    """Worst user margin computed element by element."""
    worst = -math.inf
    t = math.tan(phi)
    for h, s in zip(h_effs, symbols):
        acc = 0j
        for hn, tn in zip(h, theta):
            acc += complex(hn).conjugate() * complex(tn)
        r = acc * cmath.exp(-1j * cmath.phase(s))
        worst = max(worst, abs(r.imag) - r.real * t)
    return worst


def exhaustive_discrete(h_effs, symbols, phi, alphabet):
    """Optimal B-bit precoder by enumerating all ``2**(B*N)`` vectors (tiny N only)."""
    N = np.asarray(h_effs).shape[1]
    if alphabet.size ** N > 2 ** 20:
        raise ValueError("instance too large for enumeration")
    best, best_theta = math.inf, None
    for idx in itertools.product(range(alphabet.size), repeat=N):
        theta = alphabet.values[list(idx)]
        v = loop_worst_margin(h_effs, theta, symbols, phi)
        if v < best:
            best, best_theta = v, theta
    return best_theta, best


def random_search_margin(h_effs, symbols, phi, samples, rng, chunk=4096):
    """Best worst-user margin over uniformly random unit-modulus points."""
    h_effs = np.asarray(h_effs, dtype=complex)
    rot = np.exp(-1j * np.angle(np.asarray(symbols)))
    t = math.tan(phi)
    best = math.inf
    left = samples
    while left > 0:
        n = min(chunk, left)
        theta = np.exp(1j * rng.uniform(0, 2 * np.pi, (n, h_effs.shape[1])))
        r = (theta @ h_effs.conj().T) * rot
        v = (np.abs(r.imag) - r.real * t).max(axis=1).min()
        best = min(best, float(v))
        left -= n
    return best


def central_difference(fun, x, h=1e-6):
    """Central finite-difference gradient of ``fun`` at array ``x``."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        e = np.zeros_like(x)
        e[idx] = h
        g[idx] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


def _combiner_values(Z, C, phi):
    # Z: (n, 2 Nr) real points [Re w, Im w]; C: (MK, Nr) complex.
    # conj(w) c = (u - jv)(a + jb): Re = u.a + v.b, Im = u.b - v.a
    a, b = C.real, C.imag
    t = math.tan(phi)
    re = np.hstack([a, b])
    im = np.hstack([b, -a])
    P = np.vstack([im - t * re, -im - t * re])
    return (Z @ P.T).max(axis=1)


def _s3_points(psi1, psi2, ph):
    s1 = np.sin(psi1)
    s2 = np.sin(psi2)
    return np.stack([np.cos(psi1), s1 * np.cos(psi2), s1 * s2 * np.cos(ph), s1 * s2 * np.sin(ph)],
                    axis=-1)


def combiner_grid_search(C, phi, step=0.01, refine_levels=4):
    """Grid-search minimum of the combiner objective over the unit ball.

    The objective is positively homogeneous, so its minimum over the ball
    is ``min(0, min over the unit sphere)``. The sphere is covered by a
    hyperspherical grid with arc spacing ``step`` (circle for one antenna,
    3-sphere for two), then the best point is refined by nested local
    grids, each five times finer than the one before.

    Returns
    -------
    value : float
    z : ndarray
        Real coordinates ``[Re w, Im w]`` of the best point.
    """
    C = np.atleast_2d(np.asarray(C, dtype=complex))
    Nr = C.shape[1]
    if Nr == 1:
        ang = np.arange(0.0, 2 * np.pi, step)
        Z = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        vals = _combiner_values(Z, C, phi)
        i = int(np.argmin(vals))
        best, best_ang = float(vals[i]), ang[i]
        s = step
        for _ in range(refine_levels):
            a = best_ang + np.linspace(-2 * s, 2 * s, 41)
            Z = np.stack([np.cos(a), np.sin(a)], axis=1)
            vals = _combiner_values(Z, C, phi)
            i = int(np.argmin(vals))
            if vals[i] < best:
                best, best_ang = float(vals[i]), a[i]
            s /= 10
        z = np.array([math.cos(best_ang), math.sin(best_ang)])
    elif Nr == 2:
        best, coords = math.inf, None
        for p1 in np.arange(step / 2, np.pi, step):
            n2 = max(1, int(math.ceil(np.pi * math.sin(p1) / step)))
            p2 = (np.arange(n2) + 0.5) * (np.pi / n2)
            n3 = np.maximum(1, np.ceil(2 * np.pi * math.sin(p1) * np.sin(p2) / step).astype(int))
            P2 = np.repeat(p2, n3)
            P3 = np.concatenate([np.arange(n) * (2 * np.pi / n) for n in n3])
            Z = _s3_points(np.full(P2.shape, p1), P2, P3)
            vals = _combiner_values(Z, C, phi)
            i = int(np.argmin(vals))
            if vals[i] < best:
                best, coords = float(vals[i]), np.array([p1, P2[i], P3[i]])
        # local grids scaled to equal arc length along each angle, recentred
        # until the best point is interior, then shrunk fivefold per level
        width = step
        for _ in range(refine_levels):
            moved = True
            while moved:
                moved = False
                s1 = max(abs(math.sin(coords[0])), 1e-3)
                s12 = max(abs(s1 * math.sin(coords[1])), 1e-3)
                offs = np.linspace(-3.0, 3.0, 31)
                A, B, Cc = np.meshgrid(coords[0] + width * offs, coords[1] + width / s1 * offs,
                                       coords[2] + width / s12 * offs, indexing="ij")
                Z = _s3_points(A.ravel(), B.ravel(), Cc.ravel())
                vals = _combiner_values(Z, C, phi)
                i = int(np.argmin(vals))
                if vals[i] < best - 1e-15:
                    best = float(vals[i])
                    coords = np.array([A.ravel()[i], B.ravel()[i], Cc.ravel()[i]])
                    moved = True
            width /= 5
        z = _s3_points(*coords)
    else:
        raise ValueError("grid search supports one or two receive antennas")
    if best > 0.0:
        return 0.0, np.zeros(2 * Nr)
    return best, z


def cube_ball_grid_search(C, phi, step):
    """Literal grid over ``[-1, 1]**(2 Nr)`` restricted to the unit ball (coarse steps only)."""
    C = np.atleast_2d(np.asarray(C, dtype=complex))
    d = 2 * C.shape[1]
    axis = np.arange(-1.0, 1.0 + step / 2, step)
    if axis.size ** d > 5e7:
        raise ValueError("grid too large; use combiner_grid_search")
    Z = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    Z = Z[np.einsum("ij,ij->i", Z, Z) <= 1.0 + 1e-12]
    vals = _combiner_values(Z, C, phi)
    i = int(np.argmin(vals))
    return float(vals[i]), Z[i]


def exhaustive_onebit(inst):
    """Brute-force minimum over all ``2**N`` sign vectors (N <= 20)."""
    N = inst.N
    if N > 20:
        raise ValueError("exhaustive search is limited to N <= 20")
    bits = (np.arange(2 ** N)[:, None] >> np.arange(N)[None, :]) & 1
    thetas = 1.0 - 2.0 * bits
    vals = (thetas @ inst.A.T).max(axis=1)
    i = int(np.argmin(vals))
    return thetas[i], inst.objective(thetas[i])
