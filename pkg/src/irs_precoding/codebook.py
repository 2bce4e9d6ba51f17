"""
Per-symbol-vector precoder design and the ``M**K``-entry codebook.

A *scheme* names the solver chain applied to each symbol vector:

    inf      relaxed RCG solution as is
    B        RCG, then nearest-phase quantization to B bits (B = 1..8)
    1-bnb    RCG, 1-bit quantization as incumbent, then branch-and-bound
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from .discrete import bnb_solve_1bit, build_onebit_instance, quantize_phases
from .margin import codebook_margins
from .rcg import RcgOptions, solve_relaxed
from .signals import DomainError, PhaseAlphabet, phase_alphabet, substream, symbol_table


@dataclass(frozen=True)
class Scheme:
    alphabet: PhaseAlphabet
    bnb: bool = False

    @property
    def name(self):
        if self.alphabet.is_infinite:
            return "inf"
        return f"{self.alphabet.B}-bnb" if self.bnb else str(self.alphabet.B)

    @property
    def bits(self):
        """Value written to the ``B`` column of result files."""
        return "inf" if self.alphabet.is_infinite else self.alphabet.B

    def __str__(self):
        return self.name


def parse_scheme(value):
    """Parse ``"inf"``, ``3``, ``"2"``, ``"1"`` or ``"1-bnb"`` into a Scheme."""
    if isinstance(value, Scheme):
        return value
    text = str(value).strip().lower()
    if text.endswith("-bnb"):
        alphabet = phase_alphabet(text[:-4])
        if alphabet.B != 1:
            raise DomainError("branch-and-bound is only available for 1-bit phases")
        return Scheme(alphabet, bnb=True)
    if text.endswith("-bit"):
        text = text[:-4]
    try:
        return Scheme(phase_alphabet(text))
    except ValueError as exc:
        raise DomainError(f"unknown scheme {value!r}") from exc


@dataclass
class PrecoderCodebook:
    """Row ``m - 1`` of ``entries`` is the phase vector sent for symbol vector m.

    ``relaxed`` keeps the continuous RCG solutions the entries were
    derived from; ``margins`` the worst-user design margin per entry.
    """

    entries: np.ndarray
    scheme: Scheme
    margins: np.ndarray = field(default=None, repr=False)
    relaxed: Optional[np.ndarray] = field(default=None, repr=False)
    stalled: tuple = ()
    bnb_status: tuple = ()

    @property
    def size(self):
        return self.entries.shape[0]

    def __len__(self):
        return self.size


def _finish(theta_relaxed, h_effs, symbols, phi, scheme, inst_cache):
    if scheme.alphabet.is_infinite:
        return theta_relaxed, None
    q = quantize_phases(theta_relaxed, scheme.alphabet)
    if not scheme.bnb:
        return q, None
    if inst_cache.get("inst") is None:
        inst_cache["inst"] = build_onebit_instance(h_effs, symbols, phi)
    res = bnb_solve_1bit(inst_cache["inst"], q)
    return res.theta.astype(complex), res.status


def design_codebooks(h_effs, constellation, schemes: Sequence, seed=0, key=(), iteration=0,
                     restarts=3, warm_starts=None, rcg_opts: Optional[RcgOptions] = None,
                     ) -> Dict[str, PrecoderCodebook]:
    """Design codebooks for several schemes from one shared relaxation per entry.

    Parameters
    ----------
    h_effs : ndarray, shape (K, N)
        Effective channels (MISO channels, or ``H_k w_k``).
    constellation : Constellation
    schemes : sequence of Scheme or str
    seed, key, iteration :
        The random restarts of entry m use
        ``substream(seed, "precoder", *key, iteration, m)``.
    warm_starts : ndarray, shape (M**K, N), optional
        Additional RCG starting points, one per entry.

    Returns
    -------
    dict
        Scheme name to PrecoderCodebook.
    """
    h_effs = np.asarray(h_effs, dtype=complex)
    K, N = h_effs.shape
    schemes = [parse_scheme(s) for s in schemes]
    _, S = symbol_table(constellation, K)
    MK = S.shape[0]
    phi = constellation.phi
    relaxed = np.empty((MK, N), dtype=complex)
    stalled = []
    out = {s.name: (np.empty((MK, N), dtype=complex), []) for s in schemes}
    for m in range(MK):
        rng = substream(seed, "precoder", *key, iteration, m + 1)
        extra = () if warm_starts is None else (warm_starts[m],)
        try:
            sol = solve_relaxed(h_effs, S[m], phi, rng=rng, restarts=restarts,
                                extra_inits=extra, opts=rcg_opts)
        except Exception as exc:
            raise RuntimeError(f"precoder design failed for symbol vector m={m + 1}: {exc}") from exc
        relaxed[m] = sol.theta
        stalled.append(sol.stalled)
        cache = {}
        for s in schemes:
            theta, status = _finish(sol.theta, h_effs, S[m], phi, s, cache)
            out[s.name][0][m] = theta
            out[s.name][1].append(status)
    books = {}
    for s in schemes:
        entries, statuses = out[s.name]
        books[s.name] = PrecoderCodebook(
            entries=entries,
            scheme=s,
            margins=codebook_margins(h_effs, entries, S, phi).max(axis=1),
            relaxed=relaxed,
            stalled=tuple(stalled),
            bnb_status=tuple(statuses) if s.bnb else (),
        )
    return books


def design_codebook(channels, scheme, constellation, seed=0, key=(), restarts=3,
                    rcg_opts: Optional[RcgOptions] = None) -> PrecoderCodebook:
    """Codebook for single-antenna users under one scheme.

    ``channels`` is a ChannelSet with ``Nr == 1`` or a ``(K, N)`` array.
    """
    h = channels.h if hasattr(channels, "h") else np.asarray(channels, dtype=complex)
    scheme = parse_scheme(scheme)
    return design_codebooks(h, constellation, [scheme], seed=seed, key=key,
                            restarts=restarts, rcg_opts=rcg_opts)[scheme.name]
