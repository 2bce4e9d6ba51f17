"""
Shared signal substrate: PSK constellations, discrete phase alphabets,
symbol-vector enumeration, Rayleigh channels and seeded noise streams.

Random streams are Philox generators derived from a master seed and a
tuple key (``substream(seed, "noise", cell, realization)``), so results
never depend on the order in which tasks are executed.
"""

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

import numpy as np

INFINITE = math.inf
DEFAULT_ENUMERATION_CAP = 4 ** 4
MAX_BITS = 8

_PURPOSES = {
    "channel": 1,
    "precoder": 2,
    "noise": 3,
    "combiner": 4,
    "oracle": 5,
}


class DomainError(ValueError):
    """Raised when an argument lies outside the supported model."""


class EnumerationSizeError(DomainError):
    """Raised when M**K exceeds the configured enumeration cap."""


def substream(seed, purpose, *key):
    """Return an independent Philox generator for ``(seed, purpose, *key)``.

    Parameters
    ----------
    seed : int
        Master seed.
    purpose : str
        One of ``channel``, ``precoder``, ``noise``, ``combiner``, ``oracle``.
    *key : int
        Further non-negative integers identifying the task.
    """
    if purpose not in _PURPOSES:
        raise ValueError(f"unknown stream purpose {purpose!r}")
    spawn_key = (_PURPOSES[purpose],) + tuple(int(k) for k in key)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class Constellation:
    """M-PSK symbol set with points ``exp(j*2*pi*m/M)``.

    ``phi`` is the half-angle of each decision cone, ``pi/M``.
    """

    M: int
    points: np.ndarray = field(repr=False)
    phi: float

    @property
    def alpha(self):
        return math.tan(self.phi)


def make_constellation(M):
    """Build the M-PSK constellation. BPSK (M=2) is not supported."""
    if int(M) != M or M < 3:
        raise DomainError(f"M-PSK requires M >= 3, got M={M}")
    M = int(M)
    points = np.exp(2j * np.pi * np.arange(M) / M)
    points.setflags(write=False)
    return Constellation(M=M, points=points, phi=math.pi / M)


@dataclass(frozen=True)
class PhaseAlphabet:
    """Unit-modulus phase set of a B-bit reflecting element.

    ``B`` is ``INFINITE`` for continuous phases, in which case ``values``
    is None and ``delta`` is 0.
    """

    B: Union[int, float]
    values: Optional[np.ndarray] = field(repr=False)
    delta: float

    @property
    def is_infinite(self):
        return self.B == INFINITE

    @property
    def size(self):
        return None if self.is_infinite else 2 ** self.B


def phase_alphabet(B):
    """Return the ``2**B`` phase alphabet, or the continuous one for ``INFINITE``.

    ``B`` may also be given as the strings ``"inf"`` or ``"infinite"``.
    """
    if isinstance(B, str):
        if B.strip().lower() in ("inf", "infinite", "∞"):
            B = INFINITE
        else:
            B = int(B)
    if B == INFINITE:
        return PhaseAlphabet(B=INFINITE, values=None, delta=0.0)
    if int(B) != B or not 1 <= B <= MAX_BITS:
        raise DomainError(f"phase resolution must be 1..{MAX_BITS} bits or INFINITE, got {B}")
    B = int(B)
    L = 2 ** B
    values = np.exp(2j * np.pi * np.arange(L) / L)
    # exact +-1, +-j where they occur
    values = np.where(np.abs(values.real) < 1e-15, 1j * np.sign(values.imag), values)
    values = np.where(np.abs(values.imag) < 1e-15, np.sign(values.real) + 0j, values)
    values.setflags(write=False)
    return PhaseAlphabet(B=B, values=values, delta=2 * math.pi / L)


@dataclass(frozen=True)
class SymbolVectorIndex:
    """One of the ``M**K`` symbol vectors; ``m`` is 1-based.

    ``digits[k]`` is the constellation index of user ``k``; user 1 is the
    least significant base-M digit of ``m - 1``.
    """

    m: int
    digits: tuple


def symbol_digits(m, M, K):
    """Base-M digits of the 1-based index ``m``, least significant first."""
    rest = m - 1
    out = []
    for _ in range(K):
        rest, d = divmod(rest, M)
        out.append(d)
    return tuple(out)


def digits_to_index(digits, M):
    return 1 + sum(int(d) * M ** k for k, d in enumerate(digits))


def _check_cap(M, K, cap):
    if M ** K > cap:
        raise EnumerationSizeError(
            f"M**K = {M}**{K} = {M ** K} symbol vectors exceeds the cap of {cap}"
        )


def enumerate_symbol_vectors(M, K, cap=DEFAULT_ENUMERATION_CAP) -> Iterator[SymbolVectorIndex]:
    """Yield every symbol vector index ``m = 1..M**K`` in increasing order."""
    if K < 1:
        raise DomainError("K must be >= 1")
    _check_cap(M, K, cap)
    for m in range(1, M ** K + 1):
        yield SymbolVectorIndex(m=m, digits=symbol_digits(m, M, K))


def symbol_table(constellation, K, cap=DEFAULT_ENUMERATION_CAP):
    """Return ``(digits, symbols)`` arrays of shape ``(M**K, K)``.

    Row ``m - 1`` holds the digits and PSK symbols of symbol vector ``m``.
    """
    M = constellation.M
    _check_cap(M, K, cap)
    idx = np.arange(M ** K)
    digits = (idx[:, None] // M ** np.arange(K)[None, :]) % M
    return digits, constellation.points[digits]


@dataclass(frozen=True)
class ChannelSet:
    """Channels from the surface to K users.

    ``H`` has shape ``(K, N, Nr)``; with ``Nr == 1`` column 0 is the MISO
    vector ``h_k``. ``sigma`` holds per-user noise standard deviations.
    """

    H: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)
    P: float = 1.0

    def __post_init__(self):
        if self.H.ndim != 3:
            raise DomainError("H must have shape (K, N, Nr)")
        if not np.all(np.isfinite(self.H)):
            raise DomainError("channel entries must be finite")
        if self.sigma.shape != (self.H.shape[0],):
            raise DomainError("sigma must hold one value per user")

    @property
    def K(self):
        return self.H.shape[0]

    @property
    def N(self):
        return self.H.shape[1]

    @property
    def Nr(self):
        return self.H.shape[2]

    @property
    def h(self):
        """MISO channel vectors, shape ``(K, N)``."""
        if self.Nr != 1:
            raise DomainError("h is only defined for single-antenna users")
        return self.H[:, :, 0]


def sample_channels(N, K, Nr=1, seed=0, sigma=1.0, P=1.0, stream=None):
    """Draw i.i.d. CN(0, 1) Rayleigh channels.

    ``stream`` overrides ``seed`` when an existing generator is supplied.
    """
    for name, v in (("N", N), ("K", K), ("Nr", Nr)):
        if int(v) != v or v < 1:
            raise DomainError(f"{name} must be a positive integer, got {v}")
    rng = stream if stream is not None else substream(seed, "channel")
    shape = (int(K), int(N), int(Nr))
    H = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
    sig = np.broadcast_to(np.asarray(sigma, dtype=float), (int(K),)).copy()
    if np.any(sig < 0):
        raise DomainError("sigma must be non-negative")
    return ChannelSet(H=H, sigma=sig, P=float(P))


def channels_from_arrays(H, sigma=1.0, P=1.0):
    """Wrap a ``(K, N)`` or ``(K, N, Nr)`` array as a ChannelSet."""
    H = np.asarray(H, dtype=complex)
    if H.ndim == 2:
        H = H[:, :, None]
    sig = np.broadcast_to(np.asarray(sigma, dtype=float), (H.shape[0],)).copy()
    return ChannelSet(H=H, sigma=sig, P=float(P))


def awgn(sigma, stream, size: Optional[Union[int, Sequence[int]]] = None):
    """Circularly-symmetric complex Gaussian noise with variance ``sigma**2``."""
    if sigma < 0:
        raise DomainError("sigma must be non-negative")
    re = stream.standard_normal(size)
    im = stream.standard_normal(size)
    return (sigma / math.sqrt(2)) * (re + 1j * im)
