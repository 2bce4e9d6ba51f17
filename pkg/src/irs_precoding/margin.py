"""
Constructive-interference safety margin and PSK detection.

The margin of user k for precoder ``theta`` is

    |Im(r)| - Re(r) * tan(phi),    r = h^H theta exp(-j angle(s_k)),

which is negative when the noise-free point lies strictly inside the
decision cone of ``s_k``; more negative is safer. The transmit power
factor sqrt(P/N) is left out at design time.
"""

import math
from dataclasses import dataclass

import numpy as np

from .signals import ChannelSet


def rotated_received(h_eff, theta, symbol):
    """Noise-free received value derotated by the phase of ``symbol``."""
    h_eff = np.asarray(h_eff)
    theta = np.asarray(theta)
    if h_eff.shape != theta.shape:
        raise ValueError(f"length mismatch: h has shape {h_eff.shape}, theta {theta.shape}")
    return complex(np.vdot(h_eff, theta) * np.exp(-1j * np.angle(symbol)))


def margin_objective(r, phi):
    """``|Im r| - Re r * tan(phi)``; works elementwise on arrays."""
    return np.abs(np.imag(r)) - np.real(r) * math.tan(phi)


def _effective_channels(channels, combiners=None):
    if isinstance(channels, ChannelSet):
        H = channels.H
    else:
        H = np.asarray(channels, dtype=complex)
        if H.ndim == 2:
            H = H[:, :, None]
    if combiners is None:
        if H.shape[2] != 1:
            raise ValueError("combiners are required for multi-antenna users")
        return H[:, :, 0]
    W = np.asarray(combiners, dtype=complex).reshape(H.shape[0], H.shape[2])
    return np.einsum("knr,kr->kn", H, W)


def worst_user_margin(channels, theta, symbol_vector, phi, combiners=None):
    """Largest (worst) margin over users for one symbol vector.

    Parameters
    ----------
    channels : ChannelSet or array_like
        Either a ChannelSet, a ``(K, N)`` array of MISO channels, or a
        ``(K, N, Nr)`` array.
    theta : array_like, shape (N,)
        Precoder phases.
    symbol_vector : array_like, shape (K,)
        Desired PSK symbols, one per user.
    phi : float
        Decision half-angle.
    combiners : array_like, shape (K, Nr), optional
        Receive combiners; required iff ``Nr > 1``.
    """
    h = _effective_channels(channels, combiners)
    s = np.asarray(symbol_vector)
    r = (h.conj() @ np.asarray(theta)) * np.exp(-1j * np.angle(s))
    return float(np.max(margin_objective(r, phi)))


def codebook_margins(h_eff, codebook, symbols, phi):
    """Margins of every (m, k) pair, shape ``(M**K, K)``.

    ``h_eff`` is ``(K, N)``, ``codebook`` ``(M**K, N)`` and ``symbols``
    ``(M**K, K)``.
    """
    r = (np.asarray(codebook) @ np.asarray(h_eff).conj().T) * np.exp(-1j * np.angle(symbols))
    return margin_objective(r, phi)


@dataclass(frozen=True)
class LinearForm:
    """Real linear form ``coeff_re @ theta.real + coeff_im @ theta.imag``.

    ``branch`` is +1 for ``+Im(r) - alpha Re(r)`` and -1 for
    ``-Im(r) - alpha Re(r)``.
    """

    coeff_re: np.ndarray
    coeff_im: np.ndarray
    user: int = 0
    branch: int = 1

    def __call__(self, theta_re, theta_im=None):
        if theta_im is None:
            theta = np.asarray(theta_re)
            theta_re, theta_im = theta.real, theta.imag
        return float(self.coeff_re @ theta_re + self.coeff_im @ theta_im)


def realify(h_eff, symbol, phi, user=0):
    """Split the margin of one user into two linear forms.

    With ``g = h exp(j angle(s))`` we have ``r = g^H theta``, hence

        Re r = g_re . t_re + g_im . t_im
        Im r = g_re . t_im - g_im . t_re

    and the margin is ``max(+Im r - a Re r, -Im r - a Re r)``.
    """
    g = np.asarray(h_eff, dtype=complex) * np.exp(1j * np.angle(symbol))
    a = math.tan(phi)
    gr, gi = g.real, g.imag
    odd = LinearForm(-gi - a * gr, gr - a * gi, user=user, branch=1)
    even = LinearForm(gi - a * gr, -gr - a * gi, user=user, branch=-1)
    return odd, even


def stack_forms(h_effs, symbols, phi):
    """Coefficient tensor of all 2K forms, shape ``(2K, 2, N)``.

    Row ``2k`` is the +Im branch of user k, row ``2k + 1`` the -Im branch;
    axis 1 separates the real-part and imaginary-part coefficients.
    """
    h_effs = np.asarray(h_effs, dtype=complex)
    g = h_effs * np.exp(1j * np.angle(np.asarray(symbols)))[:, None]
    a = math.tan(phi)
    gr, gi = g.real, g.imag
    K, N = g.shape
    out = np.empty((2 * K, 2, N))
    out[0::2, 0] = -gi - a * gr
    out[0::2, 1] = gr - a * gi
    out[1::2, 0] = gi - a * gr
    out[1::2, 1] = -gr - a * gi
    return out


def detect_psk(r, constellation):
    """Maximum-likelihood M-PSK decision: index of the nearest phase.

    Exact ties go to the lower index; ``r = 0`` maps to index 0. Accepts
    scalars or arrays.
    """
    M = constellation.M if hasattr(constellation, "M") else int(constellation)
    ang = np.mod(np.angle(r), 2 * np.pi)
    x = ang / (2 * np.pi / M) - 0.5
    low = np.ceil(x)
    idx = low.astype(np.int64) % M
    tie = x == low
    if np.any(tie):
        idx = np.where(tie, np.minimum(idx, (idx + 1) % M), idx)
    if np.ndim(idx) == 0:
        return int(idx)
    return idx
