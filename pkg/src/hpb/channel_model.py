"""Geometric multipath channels between the BS, the RISs and the user.

Conventions
-----------
* The BS carries a half-wavelength ULA with ``M`` antennas; each RIS is an
  ``L x L`` URA with spacing ``delta * lambda`` and element indices
  ``i, j in [1 - L/2, L/2]``.
* ``a(elev, azim)`` from :func:`ura_steering` is the arrival response of a
  surface. The departure response ``u`` used towards the user has the
  opposite phase progression, so ``u^H = a^T``; with this choice the
  reflected phase gradient is the *sum* of the incident and reflected
  direction cosines and the strongest-path gradient cancels the beam offset
  exactly.
* ``f_n^H`` is therefore ``sum_k beta_{n,k} * a(theta_k, phi_k)`` taken as a
  row without conjugation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SystemConfig",
    "ChannelRealization",
    "ula_steering",
    "ura_steering",
    "laplace_offsets",
    "sample_realization",
    "assemble_bs_ris_channel",
    "assemble_ris_user_channel",
    "path_loss",
    "db_to_linear",
]

# Mean-cluster ranges used by sample_realization.
MAX_MEAN_ELEVATION = np.deg2rad(80.0)
MAX_MEAN_BS_AOD = np.deg2rad(80.0)
_HALF_PI_BELOW = np.nextafter(np.pi / 2, 0.0)


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    """Static scenario parameters.

    Distances ``d1``/``d2`` are per-RIS tuples (a scalar is broadcast to all
    ``N`` surfaces). Antenna gains are linear, not dBi.
    """

    M: int = 8
    N: int = 1
    L: int = 30
    delta: float = 0.5
    wavelength: float = 0.1
    p: float = 0.01
    sigma2: float = 1e-13
    d1: tuple = (50.0,)
    d2: tuple = (50.0,)
    g_bs: float = float(db_to_linear(5.0))
    g_ris: tuple = (float(db_to_linear(5.0)),)
    g_user: float = 1.0
    P: int = 8
    sigma_as: float = float(np.deg2rad(10.0))
    i_sca: int = 1000
    eps_sca: float = 1e-6

    def __post_init__(self):
        for name in ("d1", "d2", "g_ris"):
            val = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if val.size == 1:
                val = np.repeat(val, self.N)
            if val.size != self.N:
                raise ValueError(f"{name} has {val.size} entries, expected N={self.N}")
            object.__setattr__(self, name, tuple(float(x) for x in val))
        if self.M < 1 or self.N < 1:
            raise ValueError("M and N must be at least 1")
        if self.L < 2 or self.L % 2:
            raise ValueError(f"L must be an even integer >= 2, got {self.L}")
        if self.P < 1:
            raise ValueError(f"P must be at least 1, got {self.P}")
        positive = dict(delta=self.delta, wavelength=self.wavelength, p=self.p,
                        sigma2=self.sigma2, g_bs=self.g_bs, g_user=self.g_user)
        for name, val in positive.items():
            if not val > 0:
                raise ValueError(f"{name} must be positive, got {val}")
        for name in ("d1", "d2", "g_ris"):
            if min(getattr(self, name)) <= 0:
                raise ValueError(f"{name} entries must be positive")
        if self.sigma_as < 0:
            raise ValueError("sigma_as must be non-negative")
        if self.i_sca < 1 or not self.eps_sca > 0:
            raise ValueError("i_sca must be >= 1 and eps_sca > 0")

    @property
    def qbar(self) -> float:
        """Largest useful phase-gradient magnitude, ``min(2, 1/(2*delta))``."""
        return min(2.0, 1.0 / (2.0 * self.delta))

    def replace(self, **changes) -> "SystemConfig":
        """Copy with fields changed; per-RIS tuples are re-broadcast when N changes."""
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        if "N" in changes and changes["N"] != self.N:
            for name in ("d1", "d2", "g_ris"):
                if name not in changes:
                    vals = values[name]
                    values[name] = vals[0] if len(set(vals)) == 1 else vals
        values.update(changes)
        return SystemConfig(**values)


@dataclass(frozen=True)
class ChannelRealization:
    """Per-RIS multipath parameters, stored as ``(N, D)`` / ``(N, K)`` arrays.

    Attributes
    ----------
    alpha, bs_aod, ris_aoa_elev, ris_aoa_azim : ndarray, shape (N, D)
        BS-RIS path gains, BS departure angles and RIS arrival angles.
    beta, ris_aod_elev, ris_aod_azim : ndarray, shape (N, K)
        RIS-user path gains and RIS departure angles.
    alpha_var, beta_var : ndarray
        Per-path gain variances, each row summing to one.
    """

    alpha: np.ndarray
    ris_aoa_elev: np.ndarray
    ris_aoa_azim: np.ndarray
    bs_aod: np.ndarray
    beta: np.ndarray
    ris_aod_elev: np.ndarray
    ris_aod_azim: np.ndarray
    alpha_var: np.ndarray = field(default=None, repr=False)
    beta_var: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        D_shape = np.shape(self.alpha)
        K_shape = np.shape(self.beta)
        if len(D_shape) != 2 or len(K_shape) != 2 or D_shape[0] != K_shape[0]:
            raise ValueError("alpha and beta must be 2-D with matching RIS count")
        for name in ("ris_aoa_elev", "ris_aoa_azim", "bs_aod"):
            if np.shape(getattr(self, name)) != D_shape:
                raise ValueError(f"{name} must have shape {D_shape}")
        for name in ("ris_aod_elev", "ris_aod_azim"):
            if np.shape(getattr(self, name)) != K_shape:
                raise ValueError(f"{name} must have shape {K_shape}")

    @property
    def N(self) -> int:
        return self.alpha.shape[0]

    @property
    def D(self) -> int:
        return self.alpha.shape[1]

    @property
    def K(self) -> int:
        return self.beta.shape[1]

    def scaled(self, alpha_scale=1.0, beta_scale=1.0) -> "ChannelRealization":
        """Same geometry with every path gain multiplied by a constant."""
        return ChannelRealization(
            self.alpha * alpha_scale, self.ris_aoa_elev, self.ris_aoa_azim, self.bs_aod,
            self.beta * beta_scale, self.ris_aod_elev, self.ris_aod_azim,
            self.alpha_var, self.beta_var)

    def truncated(self, N: int) -> "ChannelRealization":
        """The first ``N`` surfaces of this realization."""
        return ChannelRealization(
            *(getattr(self, f)[:N] for f in
              ("alpha", "ris_aoa_elev", "ris_aoa_azim", "bs_aod",
               "beta", "ris_aod_elev", "ris_aod_azim")),
            None if self.alpha_var is None else self.alpha_var[:N],
            None if self.beta_var is None else self.beta_var[:N])


def ula_steering(angle, M):
    """Unit-norm ULA response ``b(angle)`` at half-wavelength spacing."""
    if M < 1:
        raise ValueError("M must be at least 1")
    m = np.arange(M)
    return np.exp(-1j * np.pi * m * np.sin(angle)) / np.sqrt(M)


def _axis_response(cosine, L, delta):
    ell = np.arange(1 - L // 2, L // 2 + 1) - 0.5
    return np.exp(-2j * np.pi * delta * ell * cosine) / np.sqrt(L)


def ura_steering(elev, azim, L, delta):
    """Unit-norm URA response ``a^x (x) a^y`` of length ``L**2``.

    Element ``(i, j)`` sits at flat index ``(i + L/2 - 1) * L + (j + L/2 - 1)``.
    """
    if L % 2:
        raise ValueError(f"L must be even, got {L}")
    ax = _axis_response(np.sin(elev) * np.cos(azim), L, delta)
    ay = _axis_response(np.sin(elev) * np.sin(azim), L, delta)
    return np.kron(ax, ay)


def laplace_offsets(rng, size, sigma):
    """Zero-mean Laplacian angle offsets with standard deviation ``sigma``."""
    return rng.laplace(0.0, sigma / np.sqrt(2.0), size=size)


def _path_gains(rng, count):
    var = rng.exponential(1.0, size=count)
    var /= var.sum()
    g = rng.standard_normal(count) + 1j * rng.standard_normal(count)
    return g * np.sqrt(var / 2.0), var


def sample_realization(config: SystemConfig, rng) -> ChannelRealization:
    """Draw one channel realization.

    Surfaces are sampled one after another from ``rng``, so with a fixed
    seed the first ``n`` surfaces do not depend on ``config.N``. Within a
    link all paths share one uniformly drawn cluster mean; each path adds an
    independent Laplacian offset. Elevations and BS departure angles are
    clipped into their valid ranges, azimuths are wrapped into ``[0, 2*pi)``.
    """
    if config.P < 1:
        raise ValueError("need at least one path per link")
    N, P = config.N, config.P
    out = {k: np.empty((N, P)) for k in
           ("ris_aoa_elev", "ris_aoa_azim", "bs_aod", "ris_aod_elev", "ris_aod_azim",
            "alpha_var", "beta_var")}
    alpha = np.empty((N, P), dtype=complex)
    beta = np.empty((N, P), dtype=complex)
    for n in range(N):
        # BS -> RIS link
        elev0 = rng.uniform(0.0, MAX_MEAN_ELEVATION)
        azim0 = rng.uniform(0.0, 2 * np.pi)
        aod0 = rng.uniform(-MAX_MEAN_BS_AOD, MAX_MEAN_BS_AOD)
        out["ris_aoa_elev"][n] = np.clip(
            elev0 + laplace_offsets(rng, P, config.sigma_as), 0.0, _HALF_PI_BELOW)
        out["ris_aoa_azim"][n] = np.mod(
            azim0 + laplace_offsets(rng, P, config.sigma_as), 2 * np.pi)
        out["bs_aod"][n] = np.clip(
            aod0 + laplace_offsets(rng, P, config.sigma_as), -_HALF_PI_BELOW, _HALF_PI_BELOW)
        alpha[n], out["alpha_var"][n] = _path_gains(rng, P)
        # RIS -> user link
        elev0 = rng.uniform(0.0, MAX_MEAN_ELEVATION)
        azim0 = rng.uniform(0.0, 2 * np.pi)
        out["ris_aod_elev"][n] = np.clip(
            elev0 + laplace_offsets(rng, P, config.sigma_as), 0.0, _HALF_PI_BELOW)
        out["ris_aod_azim"][n] = np.mod(
            azim0 + laplace_offsets(rng, P, config.sigma_as), 2 * np.pi)
        beta[n], out["beta_var"][n] = _path_gains(rng, P)
    # mod can return exactly 2*pi for tiny negative inputs
    for key in ("ris_aoa_azim", "ris_aod_azim"):
        out[key][out[key] >= 2 * np.pi] = 0.0
    return ChannelRealization(alpha=alpha, beta=beta, **out)


def _check_index(realization, n):
    if not 0 <= n < realization.N:
        raise IndexError(f"RIS index {n} out of range for N={realization.N}")


def assemble_bs_ris_channel(realization: ChannelRealization, n: int,
                            config: SystemConfig) -> np.ndarray:
    """``G_n = sum_d alpha_{n,d} a(.) b(.)^H``, shape ``(L**2, M)``."""
    _check_index(realization, n)
    G = np.zeros((config.L ** 2, config.M), dtype=complex)
    for d in range(realization.D):
        a = ura_steering(realization.ris_aoa_elev[n, d], realization.ris_aoa_azim[n, d],
                         config.L, config.delta)
        b = ula_steering(realization.bs_aod[n, d], config.M)
        G += realization.alpha[n, d] * np.outer(a, b.conj())
    return G


def assemble_ris_user_channel(realization: ChannelRealization, n: int,
                              config: SystemConfig) -> np.ndarray:
    """Row ``f_n^H = sum_k beta_{n,k} u^H(.)``, shape ``(L**2,)``."""
    _check_index(realization, n)
    f = np.zeros(config.L ** 2, dtype=complex)
    for k in range(realization.K):
        f += realization.beta[n, k] * ura_steering(
            realization.ris_aod_elev[n, k], realization.ris_aod_azim[n, k],
            config.L, config.delta)
    return f


def path_loss(config: SystemConfig, n: int) -> float:
    """Linear power gain of the ``n``-th cascaded BS-RIS-user link."""
    if not 0 <= n < config.N:
        raise IndexError(f"RIS index {n} out of range for N={config.N}")
    num = (config.g_bs * config.g_ris[n] * config.g_user
           * config.delta ** 2 * config.L ** 4 * config.wavelength ** 4)
    return num / (64 * np.pi ** 3 * config.d1[n] ** 2 * config.d2[n] ** 2)
