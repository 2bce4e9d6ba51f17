"""
Riemannian conjugate gradient on the product of unit circles.

A phase vector ``theta`` of length N is handled as the real ``(2, N)``
matrix ``[theta.real; theta.imag]`` whose columns have unit norm. The
max-of-linear-forms margin is replaced by its log-sum-exp upper bound
``eps * log(sum(exp(g_i / eps)))`` and minimized with Polak-Ribiere+
conjugate directions, projection-based vector transport, normalization
retraction and Armijo backtracking.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numba
import numpy as np

from .margin import stack_forms

DEFAULT_EPSILONS = (0.5, 0.125, 0.03125)
FINAL_EPSILON_FACTOR = 1e-3


@dataclass(frozen=True)
class SmoothedProblem:
    """Log-sum-exp surrogate of ``max_i g_i`` for 2K linear forms.

    ``coeffs`` has shape ``(2K, 2, N)``: row i holds the coefficients of
    form i on the real and imaginary parts of ``theta``.
    """

    coeffs: np.ndarray
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.coeffs.ndim != 3 or self.coeffs.shape[1] != 2:
            raise ValueError("coeffs must have shape (2K, 2, N)")

    @classmethod
    def from_forms(cls, forms, epsilon):
        coeffs = np.stack([np.stack([f.coeff_re, f.coeff_im]) for f in forms])
        return cls(coeffs=coeffs, epsilon=epsilon)

    @classmethod
    def from_channels(cls, h_effs, symbols, phi, epsilon):
        return cls(coeffs=stack_forms(h_effs, symbols, phi), epsilon=epsilon)

    @property
    def matrix(self):
        return self.coeffs.reshape(self.coeffs.shape[0], -1)

    def with_epsilon(self, epsilon):
        return SmoothedProblem(coeffs=self.coeffs, epsilon=epsilon)


def to_oblique(theta):
    theta = np.asarray(theta)
    return np.stack([theta.real, theta.imag]).astype(float)


def to_complex(x):
    return x[0] + 1j * x[1]


def form_values(p, x):
    """Values of all 2K linear forms at ``x``."""
    return p.matrix @ np.ravel(x)


def _lse(g, eps):
    gm = g.max()
    return gm + eps * math.log(np.exp((g - gm) / eps).sum())


def smoothed_objective(p, x):
    """Overflow-safe ``eps * log(sum(exp(g / eps)))``."""
    return _lse(form_values(p, x), p.epsilon)


def euclidean_gradient(p, x):
    """Gradient of the surrogate: softmax-weighted sum of the form coefficients."""
    g = form_values(p, x)
    w = np.exp((g - g.max()) / p.epsilon)
    w /= w.sum()
    return (w @ p.matrix).reshape(2, -1)


def project_to_tangent(x, v):
    """Remove from each column of ``v`` its component along the matching column of ``x``."""
    return v - np.sum(x * v, axis=0) * x


def retract(x, d, step):
    """Normalization retraction ``(x + step d) / ||x + step d||`` columnwise."""
    y = x + step * d
    nrm = np.sqrt(np.sum(y * y, axis=0))
    if np.any(nrm == 0):
        raise FloatingPointError("retraction hit a zero-norm column")
    return y / nrm


@dataclass
class RcgOptions:
    max_iter: int = 500
    grad_tol: float = 1e-6
    initial_step: float = 1.0
    contraction: float = 0.5
    sufficient_decrease: float = 1e-4
    max_backtracks: int = 30


@dataclass
class RcgTrace:
    """Per-iteration history of one RCG run.

    ``objective[0]`` is the value at the initial point; ``status`` is one
    of ``converged``, ``max_iter`` or ``stalled``.
    """

    objective: List[float] = field(default_factory=list)
    grad_norm: List[float] = field(default_factory=list)
    status: str = "max_iter"

    @property
    def iterations(self):
        return len(self.objective) - 1

    @property
    def stalled(self):
        return self.status == "stalled"


_STATUS = ("converged", "max_iter", "stalled")


@numba.njit(cache=True)
def _rcg_loop(G, x, eps, max_iter, grad_tol, step0, contraction, c1, max_bt):
    n_forms, dim = G.shape
    N = dim // 2
    hist = np.empty(max_iter + 1)
    gnorm = np.empty(max_iter + 1)
    g = np.empty(n_forms)
    w = np.empty(n_forms)
    grad = np.empty(dim)
    grad_new = np.empty(dim)
    d = np.empty(dim)
    y = np.empty(dim)

    def lse(z):
        for i in range(n_forms):
            acc = 0.0
            for j in range(dim):
                acc += G[i, j] * z[j]
            g[i] = acc
        gm = g[0]
        for i in range(1, n_forms):
            if g[i] > gm:
                gm = g[i]
        s = 0.0
        for i in range(n_forms):
            w[i] = math.exp((g[i] - gm) / eps)
            s += w[i]
        return gm + eps * math.log(s), s

    def rgrad(z, out):
        f, s = lse(z)
        for j in range(dim):
            acc = 0.0
            for i in range(n_forms):
                acc += w[i] * G[i, j]
            out[j] = acc / s
        for n in range(N):
            ip = z[n] * out[n] + z[N + n] * out[N + n]
            out[n] -= ip * z[n]
            out[N + n] -= ip * z[N + n]
        return f

    f = rgrad(x, grad)
    gg = 0.0
    for j in range(dim):
        gg += grad[j] * grad[j]
        d[j] = -grad[j]
    hist[0] = f
    gnorm[0] = math.sqrt(gg)
    it = 0
    status = 1
    while True:
        if math.sqrt(gg) <= grad_tol * (1.0 + abs(f)):
            status = 0
            break
        if it >= max_iter:
            break
        slope = 0.0
        for j in range(dim):
            slope += grad[j] * d[j]
        if slope >= 0.0:
            for j in range(dim):
                d[j] = -grad[j]
            slope = -gg
        t = step0
        accepted = False
        fy = f
        for _ in range(max_bt + 1):
            for n in range(N):
                a = x[n] + t * d[n]
                b = x[N + n] + t * d[N + n]
                r = math.sqrt(a * a + b * b)
                y[n] = a / r
                y[N + n] = b / r
            fy, _s = lse(y)
            if fy <= f + c1 * t * slope:
                accepted = True
                break
            t *= contraction
        if not accepted or fy >= f:
            status = 2
            break
        f_new = rgrad(y, grad_new)
        # transport old gradient and direction by projection at y
        num = 0.0
        gg_new = 0.0
        for n in range(N):
            ipg = y[n] * grad[n] + y[N + n] * grad[N + n]
            ipd = y[n] * d[n] + y[N + n] * d[N + n]
            for j in (n, N + n):
                tg = grad[j] - ipg * y[j]
                d[j] = d[j] - ipd * y[j]
                num += grad_new[j] * (grad_new[j] - tg)
                gg_new += grad_new[j] * grad_new[j]
        beta = num / gg
        if beta < 0.0:
            beta = 0.0
        for j in range(dim):
            d[j] = -grad_new[j] + beta * d[j]
            x[j] = y[j]
            grad[j] = grad_new[j]
        f = f_new
        gg = gg_new
        it += 1
        hist[it] = f
        gnorm[it] = math.sqrt(gg)
    return x, hist[: it + 1].copy(), gnorm[: it + 1].copy(), status


def rcg_minimize(p, init, opts: Optional[RcgOptions] = None):
    """Minimize the smoothed margin over unit-modulus phase vectors.

    Parameters
    ----------
    p : SmoothedProblem
    init : ndarray, shape (2, N)
        Starting point; columns are re-normalized.
    opts : RcgOptions, optional

    Returns
    -------
    x : ndarray, shape (2, N)
    trace : RcgTrace
    """
    opts = opts or RcgOptions()
    x = np.array(init, dtype=float)
    x /= np.sqrt(np.sum(x * x, axis=0))
    shape = x.shape
    G = np.ascontiguousarray(p.matrix, dtype=float)
    xf, hist, gnorm, status = _rcg_loop(
        G, x.ravel().copy(), float(p.epsilon), int(opts.max_iter), float(opts.grad_tol),
        float(opts.initial_step), float(opts.contraction), float(opts.sufficient_decrease),
        int(opts.max_backtracks),
    )
    trace = RcgTrace(objective=hist.tolist(), grad_norm=gnorm.tolist(), status=_STATUS[status])
    return xf.reshape(shape), trace


def cophasing_init(h_effs, symbols):
    """Phases aligning every element with the symbol-rotated channel sum."""
    h_effs = np.asarray(h_effs, dtype=complex)
    acc = (h_effs * np.exp(1j * np.angle(np.asarray(symbols)))[:, None]).sum(axis=0)
    return np.exp(1j * np.angle(acc))


def epsilon_schedule(h_effs):
    """Continuation sequence ending at ``1e-3 * max_k ||h_k||``."""
    scale = float(np.max(np.linalg.norm(np.asarray(h_effs), axis=1)))
    final = FINAL_EPSILON_FACTOR * scale
    eps = [e for e in DEFAULT_EPSILONS if e > final]
    return tuple(eps) + (final,)


@dataclass
class RelaxedSolution:
    """Best continuous precoder found across starts."""

    theta: np.ndarray
    margin: float
    traces: list = field(default_factory=list, repr=False)
    start: int = 0

    @property
    def stalled(self):
        return any(t.stalled for t in self.traces)


def solve_relaxed(h_effs, symbols, phi, rng=None, restarts=3, extra_inits=(),
                  opts: Optional[RcgOptions] = None, epsilons=None):
    """Continuous-phase precoder for one symbol vector.

    Runs the log-sum-exp continuation from the co-phasing start, from any
    ``extra_inits`` and from ``restarts`` uniformly random starts drawn
    from ``rng``; returns the start with the smallest worst-user margin.

    Parameters
    ----------
    h_effs : ndarray, shape (K, N)
        Effective channels (``H_k w_k`` for multi-antenna users).
    symbols : ndarray, shape (K,)
        Desired symbols of this symbol vector.
    phi : float
        Decision half-angle.
    rng : numpy.random.Generator, optional
        Needed when ``restarts > 0``.
    """
    h_effs = np.asarray(h_effs, dtype=complex)
    N = h_effs.shape[1]
    if not np.any(h_effs):
        return RelaxedSolution(theta=np.ones(N, dtype=complex), margin=0.0)
    coeffs = stack_forms(h_effs, symbols, phi)
    G = coeffs.reshape(coeffs.shape[0], -1)
    if epsilons is None:
        epsilons = epsilon_schedule(h_effs)

    starts = [cophasing_init(h_effs, symbols)]
    starts.extend(np.asarray(t, dtype=complex) for t in extra_inits)
    if restarts:
        if rng is None:
            raise ValueError("rng is required for random restarts")
        for _ in range(restarts):
            starts.append(np.exp(1j * rng.uniform(0.0, 2 * np.pi, N)))

    best = None
    for i, theta0 in enumerate(starts):
        x = to_oblique(theta0)
        traces = []
        for eps in epsilons:
            x, tr = rcg_minimize(SmoothedProblem(coeffs, eps), x, opts)
            traces.append(tr)
        margin = float(np.max(G @ x.ravel()))
        if best is None or margin < best.margin:
            best = RelaxedSolution(theta=to_complex(x), margin=margin, traces=traces, start=i)
    return best
