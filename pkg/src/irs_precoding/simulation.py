"""
Monte Carlo symbol-error-rate estimation.

The receive model is ``r = sqrt(P/N) h^H theta_m + n`` for single-antenna
users and ``r = sqrt(P/N) w^H H^H theta_m + n`` with combiners, where
``n ~ CN(0, sigma_k**2)`` is added after combining. All ``M**K`` symbol
vectors are used equally often; every user's symbol is detected by
nearest-phase PSK decision.
"""

import math
from dataclasses import dataclass

import numpy as np

from .margin import detect_psk
from .signals import ChannelSet, channels_from_arrays, symbol_table


@dataclass(frozen=True)
class SerEstimate:
    """Error counts for one SNR point.

    ``per_user`` is the symbol error rate of each user, ``mean`` the
    average over users and ``stderr`` its binomial standard error.
    """

    per_user: np.ndarray
    mean: float
    stderr: float
    errors: int
    trials: int


def _effective(channels, combiners):
    if combiners is None:
        return channels.h
    W = np.asarray(combiners, dtype=complex).reshape(channels.K, channels.Nr)
    return np.einsum("knr,kr->kn", channels.H, W)


def estimate_ser_curve(codebook, channels, constellation, snr_db, draws, stream,
                       combiners=None, power_scale=1.0):
    """SER at several SNR points sharing one set of noise samples.

    Parameters
    ----------
    codebook : PrecoderCodebook or ndarray, shape (M**K, N)
    channels : ChannelSet or array_like
    constellation : Constellation
    snr_db : sequence of float
        ``P / sigma**2`` in dB, with ``sigma = 1``.
    draws : int
        Noise draws per symbol vector.
    stream : numpy.random.Generator
    combiners : ndarray, shape (K, Nr), optional
    power_scale : float
        Multiplies P; e.g. K when ``snr_db`` is a per-user power.

    Returns
    -------
    list of SerEstimate
    """
    if not isinstance(channels, ChannelSet):
        channels = channels_from_arrays(channels)
    if draws < 1:
        raise ValueError("draws must be >= 1")
    entries = getattr(codebook, "entries", codebook)
    K, N = channels.K, channels.N
    digits, _ = symbol_table(constellation, K)
    MK = digits.shape[0]
    h_eff = _effective(channels, combiners)
    clean = np.asarray(entries) @ h_eff.conj().T  # (MK, K)
    shape = (draws, MK, K)
    noise = (stream.standard_normal(shape) + 1j * stream.standard_normal(shape)) / math.sqrt(2)
    noise *= channels.sigma[None, None, :]
    out = []
    for snr in np.atleast_1d(snr_db):
        P = power_scale * 10.0 ** (float(snr) / 10.0)
        r = math.sqrt(P / N) * clean[None, :, :] + noise
        wrong = detect_psk(r, constellation) != digits[None, :, :]
        per_user = wrong.mean(axis=(0, 1))
        errors = int(wrong.sum())
        trials = wrong.size
        p = errors / trials
        out.append(SerEstimate(per_user=per_user, mean=p, stderr=math.sqrt(p * (1 - p) / trials),
                               errors=errors, trials=trials))
    return out


def estimate_ser(codebook, channels, constellation, snr_db, draws, stream, combiners=None,
                 power_scale=1.0):
    """SER at a single SNR point; see :func:`estimate_ser_curve`."""
    return estimate_ser_curve(codebook, channels, constellation, [snr_db], draws, stream,
                              combiners=combiners, power_scale=power_scale)[0]
