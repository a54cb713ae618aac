"""Structured RIS phase profiles and the reflection-angle-based channel.

A surface configured by a phase gradient ``q = (qx, qy)`` and a reference
phase ``phi`` applies ``theta_ij = 2*pi*delta*((i-1/2)*qx + (j-1/2)*qy) + phi``
to element ``(i, j)``. The cascaded channel then collapses to
``h^H = v^H H`` where ``H`` is ``N x M`` and ``v^H = [e^{j phi_1}, ...]``.

In this package ``v`` follows that definition literally, so
``v = exp(-1j * phi)`` and ``h^H = v.conj() @ H``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .channel_model import (ChannelRealization, SystemConfig, assemble_bs_ris_channel,
                            assemble_ris_user_channel, path_loss, ula_steering)

__all__ = [
    "PhaseProfile",
    "ElementPhases",
    "CascadedChannel",
    "CompactModel",
    "q_from_angles",
    "wrap_q",
    "wrap_gradient",
    "snell_element_phases",
    "expand_profile",
    "dirichlet_gain",
    "gain_factor",
    "compact_channel",
    "direct_cascaded_channel",
    "reflection_matrix",
]


@dataclass(frozen=True)
class PhaseProfile:
    """Hierarchical variables: gradients ``Q`` (2 x N) and reference phases ``phi`` (N)."""

    Q: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float).reshape(2, -1)
        phi = np.array(self.phi, dtype=float).reshape(-1)
        if phi.size != Q.shape[1]:
            raise ValueError(f"phi has {phi.size} entries, Q has {Q.shape[1]} columns")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "phi", phi)

    @property
    def N(self):
        return self.phi.size

    @property
    def v(self):
        return np.exp(-1j * self.phi)

    @classmethod
    def from_v(cls, Q, v):
        return cls(Q, -np.angle(v))


@dataclass(frozen=True)
class ElementPhases:
    """Per-element phases ``theta`` with shape ``(N, L, L)``."""

    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if theta.ndim != 3 or theta.shape[1] != theta.shape[2]:
            raise ValueError(f"theta must have shape (N, L, L), got {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta must be finite")
        object.__setattr__(self, "theta", theta)

    @property
    def N(self):
        return self.theta.shape[0]

    @property
    def L(self):
        return self.theta.shape[1]

    def flat(self):
        """Phases as ``(N, L**2)`` in steering-vector element order."""
        return self.theta.reshape(self.N, -1)

    @classmethod
    def from_flat(cls, theta, L):
        return cls(np.asarray(theta, dtype=float).reshape(-1, L, L))


@dataclass(frozen=True)
class CascadedChannel:
    """Compact channel ``H`` plus the per-path quantities it was built from.

    ``r`` is ``(N, D)``; ``sx``, ``sy`` and ``p_tilde`` are ``(N, K, D)``;
    ``amp`` holds ``sqrt(PL_n)``, already folded into the rows of ``H``.
    """

    H: np.ndarray
    r: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    p_tilde: np.ndarray
    amp: np.ndarray

    def effective(self, v):
        return np.conj(v) @ self.H


def q_from_angles(incident, reflected):
    """Phase gradient steering ``incident=(elev, azim)`` into ``reflected``."""
    ei, ai = incident
    er, ar = reflected
    qx = np.sin(er) * np.cos(ar) + np.sin(ei) * np.cos(ai)
    qy = np.sin(er) * np.sin(ar) + np.sin(ei) * np.sin(ai)
    return qx, qy


def _wrap_count(q, delta):
    qbar = min(2.0, 1.0 / (2.0 * delta))
    q = np.asarray(q, dtype=float)
    shifts = np.where(np.abs(q) <= qbar, 0.0, np.rint(q * delta))
    return shifts


def wrap_q(q, delta):
    """Shift ``q`` by a multiple of ``1/delta`` into ``[-qbar, qbar]``.

    The element phases change by a multiple of ``pi`` per shift (a common
    offset across the surface); use :func:`wrap_gradient` to also fold that
    offset into the reference phase.
    """
    shifts = _wrap_count(q, delta)
    out = np.asarray(q, dtype=float) - shifts / delta
    return float(out) if out.ndim == 0 else out


def wrap_gradient(q, phi, delta):
    """Wrap both gradient components and compensate the reference phase.

    Returns ``(q_wrapped, phi_adjusted)`` whose element phases equal the
    originals modulo ``2*pi``.
    """
    q = np.asarray(q, dtype=float)
    shifts = _wrap_count(q, delta)
    return q - shifts / delta, phi + np.pi * np.sum(shifts, axis=0)


def snell_element_phases(q_n, phi_n, L, delta):
    """``L x L`` matrix of element phases for one surface (rows index ``i``)."""
    if L % 2:
        raise ValueError(f"L must be even, got {L}")
    pos = np.arange(1 - L // 2, L // 2 + 1) - 0.5
    qx, qy = q_n
    return (2 * np.pi * delta * (pos[:, None] * qx + pos[None, :] * qy) + phi_n)


def expand_profile(profile: PhaseProfile, L, delta) -> ElementPhases:
    return ElementPhases(np.stack([
        snell_element_phases(profile.Q[:, n], profile.phi[n], L, delta)
        for n in range(profile.N)]))


def dirichlet_gain(s, L, delta):
    """Per-axis array gain ``sinc(delta*L*s) / sinc(delta*s)`` (real, signed)."""
    if L % 2:
        raise ValueError(f"L must be even, got {L}")
    return _kernels.dirichlet(s, L, delta)


def _direction_sums(realization: ChannelRealization):
    """``(N, K, D)`` x/y direction-cosine sums of departure and arrival paths."""
    se_u = np.sin(realization.ris_aod_elev)
    se_a = np.sin(realization.ris_aoa_elev)
    ux = se_u * np.cos(realization.ris_aod_azim)
    uy = se_u * np.sin(realization.ris_aod_azim)
    ax = se_a * np.cos(realization.ris_aoa_azim)
    ay = se_a * np.sin(realization.ris_aoa_azim)
    return ux[:, :, None] + ax[:, None, :], uy[:, :, None] + ay[:, None, :]


def gain_factor(realization, n, k, d, Q, phi, config: SystemConfig):
    """Return ``(p, p_tilde)`` for the path pair ``(k, d)`` of surface ``n``."""
    if not 0 <= n < realization.N:
        raise IndexError(f"RIS index {n} out of range")
    if not (0 <= k < realization.K and 0 <= d < realization.D):
        raise IndexError(f"path pair ({k}, {d}) out of range")
    Q = np.asarray(Q, dtype=float).reshape(2, -1)
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    qx, qy = q_from_angles(
        (realization.ris_aoa_elev[n, d], realization.ris_aoa_azim[n, d]),
        (realization.ris_aod_elev[n, k], realization.ris_aod_azim[n, k]))
    p_tilde = (dirichlet_gain(qx - Q[0, n], config.L, config.delta)
               * dirichlet_gain(qy - Q[1, n], config.L, config.delta))
    return np.exp(1j * phi[n]) * p_tilde, float(p_tilde)


class CompactModel:
    """Per-realization quantities that do not depend on the phase profile.

    Building ``H`` for a new ``Q`` costs ``O(N K D)`` Dirichlet evaluations
    plus an ``N x D x M`` contraction, independent of the surface size.
    """

    def __init__(self, realization: ChannelRealization, config: SystemConfig):
        if realization.N != config.N:
            raise ValueError(f"realization has {realization.N} surfaces, config N={config.N}")
        self.realization = realization
        self.config = config
        self.cx, self.cy = _direction_sums(realization)
        m = np.arange(config.M)
        # rows b^H of B_n, shape (N, D, M)
        self.bh = np.exp(1j * np.pi * m * np.sin(realization.bs_aod)[..., None]) / np.sqrt(config.M)
        self.amp = np.sqrt([path_loss(config, n) for n in range(config.N)])
        self.alpha = np.ascontiguousarray(realization.alpha)
        self.beta = np.ascontiguousarray(realization.beta)

    def weights(self, Q):
        Q = np.asarray(Q, dtype=float).reshape(2, -1)
        return _kernels.cascade_weights(
            self.cx, self.cy, self.alpha, self.beta,
            np.ascontiguousarray(Q[0]), np.ascontiguousarray(Q[1]),
            self.config.L, float(self.config.delta))

    def H(self, Q):
        r = self.weights(Q)
        return self.amp[:, None] * np.einsum("nd,ndm->nm", r, self.bh)


def compact_channel(realization, profile: PhaseProfile, config: SystemConfig,
                    model: CompactModel | None = None) -> CascadedChannel:
    """Reflection-angle-based channel for a given hierarchical profile."""
    if profile.N != realization.N:
        raise ValueError(f"profile has {profile.N} surfaces, realization {realization.N}")
    model = model or CompactModel(realization, config)
    Q = profile.Q
    sx = model.cx - Q[0][:, None, None]
    sy = model.cy - Q[1][:, None, None]
    p_tilde = dirichlet_gain(sx, config.L, config.delta) * dirichlet_gain(sy, config.L, config.delta)
    r = realization.alpha * np.einsum("nk,nkd->nd", realization.beta, p_tilde)
    H = model.amp[:, None] * np.einsum("nd,ndm->nm", r, model.bh)
    return CascadedChannel(H=H, r=r, sx=sx, sy=sy, p_tilde=p_tilde, amp=model.amp)


def _check_phases(phases: ElementPhases, realization, config):
    if phases.N != realization.N or phases.L != config.L:
        raise ValueError(
            f"phases shape {phases.theta.shape} does not match N={realization.N}, L={config.L}")


def direct_cascaded_channel(realization, phases: ElementPhases, config: SystemConfig):
    """``h^H = sum_n sqrt(PL_n) f_n^H Theta_n G_n`` as a length-``M`` vector."""
    _check_phases(phases, realization, config)
    h = np.zeros(config.M, dtype=complex)
    flat = phases.flat()
    for n in range(realization.N):
        f = assemble_ris_user_channel(realization, n, config)
        G = assemble_bs_ris_channel(realization, n, config)
        h += np.sqrt(path_loss(config, n)) * ((f * np.exp(1j * flat[n])) @ G)
    return h


def reflection_matrix(realization, config: SystemConfig):
    """Stacked ``sqrt(PL_n) diag(f_n^H) G_n``, shape ``(N * L**2, M)``.

    With ``x = exp(-1j * theta)`` flattened over all elements the direct
    channel is ``x.conj() @ A``.
    """
    blocks = []
    for n in range(realization.N):
        f = assemble_ris_user_channel(realization, n, config)
        G = assemble_bs_ris_channel(realization, n, config)
        blocks.append(np.sqrt(path_loss(config, n)) * f[:, None] * G)
    return np.concatenate(blocks, axis=0)


def bs_steering_rows(realization, config):
    """``b^H`` rows for every BS path, ``(N, D, M)``; reference helper."""
    return np.stack([[ula_steering(a, config.M).conj() for a in row]
                     for row in realization.bs_aod])
